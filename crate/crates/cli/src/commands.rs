use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::Path;

use christoffel_core::io::{
    read_table, write_entries_coefficients, write_entries_samples, write_samples_table, TrajectoryTable,
};
use christoffel_core::projection::{chebyshev_quadrature_nodes, default_quad_points, reconstruct};
use christoffel_core::scoring::{
    calibrate, classify, nearest_distance, PointwiseChristoffel, NAIVE_QUAD_POINTS, REPORT_HEADER,
};
use christoffel_core::synth::{generate_example1_with, generate_example2_with, SyntheticExample};
use christoffel_core::{
    ChristoffelModel, DatasetEntry, Domain, Error, Execution, FitOptions, FrameChoice, Regularization, Result,
    Threshold, ThresholdMethod, TrajectoryDataset, Verdict,
};

use crate::output::{sink, write_histogram};
use crate::{
    BaselineArgs, Cli, Command, EpsilonArg, ExampleArg, FitArgs, FrameArg, InfoArgs, ScoreArgs, SynthArgs,
    ThresholdArgs, UpdateArgs,
};

const OVERLAY_POINTS: usize = 201;

pub fn name(command: &Command) -> &'static str {
    match command {
        Command::Fit(_) => "fit",
        Command::Score(_) => "score",
        Command::Update(_) => "update",
        Command::Downdate(_) => "downdate",
        Command::Synth(_) => "synth",
        Command::Baseline(_) => "baseline",
        Command::Info(_) => "info",
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let exec = if cli.deterministic { Execution::Sequential } else { Execution::Parallel };
    match &cli.command {
        Command::Fit(a) => fit(a, exec),
        Command::Score(a) => score(a, exec),
        Command::Update(a) => absorb(a, exec, true),
        Command::Downdate(a) => absorb(a, exec, false),
        Command::Synth(a) => synth(a, exec),
        Command::Baseline(a) => baseline(a, exec),
        Command::Info(a) => info(a),
    }
}

fn read_file(path: &Path) -> Result<TrajectoryTable> {
    let file = File::open(path).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
    read_table(BufReader::new(file), &path.display().to_string())
}

fn load_model(path: &Path) -> Result<ChristoffelModel> {
    let file = File::open(path).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
    ChristoffelModel::load(BufReader::new(file))
}

fn write_model(path: &Path, model: &ChristoffelModel) -> Result<()> {
    fs::write(path, model.to_text())?;
    Ok(())
}

fn regularization(eps: EpsilonArg) -> Regularization {
    match eps {
        EpsilonArg::Auto => Regularization::Auto,
        EpsilonArg::Value(v) => Regularization::Absolute(v),
    }
}

/// Domain for a freshly read table: the flag, else the sample time span,
/// else `[-1, 1]`.
fn table_domain(table: &TrajectoryTable, flag: Option<Domain>) -> Domain {
    flag.or_else(|| table.time_span()).unwrap_or(Domain::CANONICAL)
}

/// Rejects a `--domain` flag or sample times that disagree with `expected`.
fn check_domain(expected: Domain, flag: Option<Domain>, table: &TrajectoryTable) -> Result<()> {
    let mismatch = |got: String| Error::DomainMismatch { expected: expected.to_string(), got };
    if let Some(d) = flag.filter(|d| *d != expected) {
        return Err(mismatch(d.to_string()));
    }
    if let TrajectoryTable::Samples { times, .. } = table {
        if let (Some(&first), Some(&last)) = (times.first(), times.last()) {
            if !expected.contains(first) || !expected.contains(last) {
                return Err(mismatch(format!("{first}:{last}")));
            }
        }
    }
    Ok(())
}

fn label(entry: &DatasetEntry, index: usize) -> String {
    entry.id.clone().unwrap_or_else(|| format!("col{}", index + 1))
}

fn threshold_method(args: &ThresholdArgs) -> ThresholdMethod {
    match (args.threshold_quantile, args.threshold_multiple) {
        (_, Some(alpha)) => ThresholdMethod::Multiple(alpha),
        (Some(q), None) => ThresholdMethod::Quantile(q),
        (None, None) => ThresholdMethod::default(),
    }
}

fn fit(a: &FitArgs, exec: Execution) -> Result<()> {
    let table = read_file(&a.input)?;
    let kind = table.kind();
    let domain = table_domain(&table, a.domain);
    let quad = a.quad_points.unwrap_or_else(|| default_quad_points(a.degree_n));
    let data = table.into_dataset(domain, a.degree_n, quad, exec)?;

    let frame = match a.frame {
        FrameArg::Standardized => FrameChoice::Standardized,
        FrameArg::Raw => FrameChoice::Raw,
    };
    let options = FitOptions { frame, regularization: regularization(a.epsilon), execution: exec };
    let mut model = ChristoffelModel::fit(&data, a.degree_d, a.degree_n, &options)?;
    let threshold = calibrate(&model, &data, threshold_method(&a.threshold), exec)?;
    model.set_metadata("input_kind", kind.name())?;
    model.set_metadata("quad_points", &quad.to_string())?;
    model.set_metadata("threshold", &threshold.to_record())?;
    write_model(&a.output, &model)?;

    let (lo, hi) = model.regularized_spectrum();
    println!("m = {}", model.dimension());
    println!("N = {}", model.sample_count());
    println!("epsilon = {:e}", model.epsilon());
    println!("min_eigenvalue = {lo:e}");
    println!("max_eigenvalue = {hi:e}");
    println!("threshold = {} ({})", threshold.value(), threshold.method());
    Ok(())
}

fn entries_for_model(
    model: &ChristoffelModel,
    path: &Path,
    domain_flag: Option<Domain>,
    quad_points: Option<usize>,
    exec: Execution,
) -> Result<Vec<DatasetEntry>> {
    let table = read_file(path)?;
    check_domain(model.domain(), domain_flag, &table)?;
    let n = model.harmonic_degree();
    let quad = quad_points.unwrap_or_else(|| default_quad_points(n));
    table.into_entries(model.domain(), n, quad, exec)
}

fn resolve_threshold(a: &ScoreArgs, model: &ChristoffelModel, exec: Execution) -> Result<Threshold> {
    if let Some(alpha) = a.threshold.threshold_multiple {
        let method = ThresholdMethod::Multiple(alpha);
        return Threshold::new(alpha * model.dimension() as f64, method, 0);
    }
    if let Some(path) = &a.calibration {
        let entries = entries_for_model(model, path, a.domain, a.quad_points, exec)?;
        let data = TrajectoryDataset::new(entries, model.domain())?;
        return calibrate(model, &data, threshold_method(&a.threshold), exec);
    }
    if a.threshold.threshold_quantile.is_some() {
        return Err(Error::InvalidParameter("--threshold-quantile needs --calibration trajectories".into()));
    }
    match model.metadata().get("threshold") {
        Some(record) => Threshold::from_record(record),
        None => {
            Err(Error::InvalidParameter("model stores no threshold; pass --threshold-multiple or --calibration".into()))
        }
    }
}

fn score(a: &ScoreArgs, exec: Execution) -> Result<()> {
    let model = load_model(&a.model)?;
    let probes = entries_for_model(&model, &a.input, a.domain, a.quad_points, exec)?;
    let threshold = resolve_threshold(a, &model, exec)?;
    let reference = match &a.dataset {
        Some(path) => {
            let entries = entries_for_model(&model, path, a.domain, a.quad_points, exec)?;
            Some(TrajectoryDataset::new(entries, model.domain())?)
        }
        None => None,
    };
    let nodes =
        chebyshev_quadrature_nodes(a.quad_points.unwrap_or_else(|| default_quad_points(model.harmonic_degree())))?;

    let mut reports = Vec::with_capacity(probes.len());
    for (i, entry) in probes.iter().enumerate() {
        let mut report = classify(&model, &threshold, &label(entry, i), &entry.coeffs)?;
        if let Some(data) = &reference {
            report.baseline_l2 = Some(nearest_distance(data, &entry.values_at(&nodes)?, &nodes, exec)?);
        }
        reports.push(report);
    }

    let mut out = sink(a.output.as_deref())?;
    writeln!(out, "{REPORT_HEADER}")?;
    for r in &reports {
        writeln!(out, "{}", r.to_line())?;
    }
    out.flush()?;

    let cds: Vec<f64> = reports.iter().map(|r| r.cd).collect();
    if let Some(path) = &a.histogram_out {
        write_histogram(path, &cds, a.bins)?;
    }
    let outliers = reports.iter().filter(|r| r.verdict == Verdict::Outlier).count();
    let mean = if cds.is_empty() { "n/a".to_owned() } else { (cds.iter().sum::<f64>() / cds.len() as f64).to_string() };
    eprintln!(
        "summary: probes={} inliers={} outliers={outliers} mean_cd={mean} threshold={} ({})",
        reports.len(),
        reports.len() - outliers,
        threshold.value(),
        threshold.method()
    );
    Ok(())
}

fn absorb(a: &UpdateArgs, exec: Execution, add: bool) -> Result<()> {
    let mut model = load_model(&a.model)?;
    let before = model.sample_count();
    for entry in entries_for_model(&model, &a.input, a.domain, a.quad_points, exec)? {
        model = if add { model.update(&entry.coeffs)? } else { model.downdate(&entry.coeffs)? };
    }
    write_model(&a.output, &model)?;
    println!("N = {before} -> {}", model.sample_count());
    Ok(())
}

fn write_pair(dir: &Path, stem: &str, entries: &[&DatasetEntry]) -> Result<()> {
    let mut coef = sink(Some(&dir.join(format!("{stem}_coef.csv"))))?;
    write_entries_coefficients(&mut coef, entries)?;
    coef.flush()?;
    let mut samples = sink(Some(&dir.join(format!("{stem}_samples.csv"))))?;
    write_entries_samples(&mut samples, entries)?;
    samples.flush()?;
    println!("wrote {stem}_coef.csv, {stem}_samples.csv ({} trajectories)", entries.len());
    Ok(())
}

fn write_overlay(dir: &Path, ex: &SyntheticExample) -> Result<()> {
    let times: Vec<f64> = (0..OVERLAY_POINTS).map(|i| -1.0 + 2.0 * i as f64 / (OVERLAY_POINTS - 1) as f64).collect();
    let curve = |e: &DatasetEntry| -> (String, Vec<f64>) {
        let values = times.iter().map(|&t| reconstruct(e.coeffs.as_slice(), t)).collect();
        (e.id.clone().unwrap_or_default(), values)
    };
    let columns: Vec<_> = [&ex.nominal, &ex.outlier].into_iter().chain(ex.dataset.entries()).map(curve).collect();
    let mut out = sink(Some(&dir.join("overlay.csv")))?;
    write_samples_table(&mut out, &times, &columns)?;
    out.flush()?;
    println!("wrote overlay.csv ({OVERLAY_POINTS} times)");
    Ok(())
}

fn synth(a: &SynthArgs, exec: Execution) -> Result<()> {
    let ex = match a.example {
        ExampleArg::Example1 => generate_example1_with(a.count, a.seed, exec)?,
        ExampleArg::Example2 => generate_example2_with(a.count, a.seed, a.amplitude, exec)?,
    };
    fs::create_dir_all(&a.output)?;
    let dataset: Vec<&DatasetEntry> = ex.dataset.entries().iter().collect();
    write_pair(&a.output, "dataset", &dataset)?;
    write_pair(&a.output, "outlier", &[&ex.outlier])?;
    write_pair(&a.output, "nominal", &[&ex.nominal])?;
    if a.overlay {
        write_overlay(&a.output, &ex)?;
    }
    Ok(())
}

fn baseline(a: &BaselineArgs, exec: Execution) -> Result<()> {
    let table = read_file(&a.dataset)?;
    let domain = table_domain(&table, a.domain);
    let model = match &a.model {
        Some(path) => load_model(path)?,
        None => {
            let quad = a.quad_points.unwrap_or_else(|| default_quad_points(a.degree_n));
            let data = table.clone().into_dataset(domain, a.degree_n, quad, exec)?;
            let options =
                FitOptions { regularization: regularization(a.epsilon), execution: exec, ..Default::default() };
            ChristoffelModel::fit(&data, a.degree_d, a.degree_n, &options)?
        }
    };
    if model.domain() != domain {
        return Err(Error::DomainMismatch { expected: model.domain().to_string(), got: domain.to_string() });
    }
    let n = model.harmonic_degree();
    let quad = a.quad_points.unwrap_or_else(|| default_quad_points(n));
    let data = table.into_dataset(domain, n, quad, exec)?;
    let probes = entries_for_model(&model, &a.input, a.domain, a.quad_points, exec)?;

    let naive = PointwiseChristoffel::fit(&data, a.naive_degree, NAIVE_QUAD_POINTS, exec)?;
    let delta = a.naive_delta.unwrap_or_else(|| naive.in_cloud_floor());
    eprintln!("naive: degree={} delta={delta:e} nodes={NAIVE_QUAD_POINTS}", a.naive_degree);
    let nodes = chebyshev_quadrature_nodes(quad)?;

    let mut out = sink(a.output.as_deref())?;
    writeln!(out, "id,cd,baseline_l2,naive_fraction")?;
    for (i, entry) in probes.iter().enumerate() {
        let cd = model.cd_value(&entry.coeffs)?;
        let l2 = nearest_distance(&data, &entry.values_at(&nodes)?, &nodes, exec)?;
        let fraction = naive.score_entry(entry, delta)?;
        writeln!(out, "{},{cd},{l2},{fraction}", label(entry, i))?;
    }
    out.flush()?;
    Ok(())
}

fn info(a: &InfoArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let (lo, hi) = model.regularized_spectrum();
    println!("algebraic_degree = {}", model.algebraic_degree());
    println!("harmonic_degree = {}", model.harmonic_degree());
    println!("m = {}", model.dimension());
    println!("N = {}", model.sample_count());
    println!("epsilon = {:e}", model.epsilon());
    println!("domain = {}", model.domain());
    println!("min_eigenvalue = {lo:e}");
    println!("max_eigenvalue = {hi:e}");
    for (k, v) in model.metadata() {
        println!("{k} = {v}");
    }
    Ok(())
}
