use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use christoffel_core::Result;

/// Buffered writer for `path`, or stdout when absent.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Equal-width histogram over `[min, max]` of the finite values. The last
/// bin is closed on the right.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in finite {
        let k = if width > 0.0 { (((v - lo) / width) as usize).min(bins - 1) } else { bins - 1 };
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let right = if k + 1 == bins { hi } else { lo + (k + 1) as f64 * width };
            (lo + k as f64 * width, right, c)
        })
        .collect()
}

pub fn write_histogram(path: &Path, values: &[f64], bins: usize) -> Result<()> {
    let mut w = sink(Some(path))?;
    writeln!(w, "bin_lo,bin_hi,count")?;
    for (lo, hi, count) in histogram(values, bins) {
        writeln!(w, "{lo},{hi},{count}")?;
    }
    w.flush()?;
    Ok(())
}
