//! Text serialization of [`ChristoffelModel`].
//!
//! ```text
//! christoffel-model
//! format_version: 1
//! basis_ordering: graded-lex
//! algebraic_degree: 4
//! harmonic_degree: 4
//! epsilon: 0.0000000000000000e0
//! sample_count: 1000
//! domain: -1.0000000000000000e0 1.0000000000000000e0
//! frame_center: ...
//! frame_scale: ...
//! meta.<key>: <value>
//! moment_sum: 70
//! <70 rows of 70 space-separated entries>
//! checksum: sha256:<hex of every preceding byte>
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use super::{ChristoffelModel, CoordinateFrame};
use crate::basis::ORDERING_NAME;
use crate::error::{Error, Result};
use crate::projection::Domain;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "christoffel-model";
const CONTEXT: &str = "model file";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn reals(xs: &[f64]) -> String {
    xs.iter().map(|&x| real(x)).collect::<Vec<_>>().join(" ")
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl ChristoffelModel {
    /// Serializes the model to its text form.
    pub fn to_text(&self) -> String {
        let m = self.dimension();
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(MAGIC.to_owned());
        line(format!("format_version: {FORMAT_VERSION}"));
        line(format!("basis_ordering: {ORDERING_NAME}"));
        line(format!("algebraic_degree: {}", self.algebraic_degree()));
        line(format!("harmonic_degree: {}", self.harmonic_degree()));
        line(format!("epsilon: {}", real(self.epsilon)));
        line(format!("sample_count: {}", self.sample_count));
        line(format!("domain: {} {}", real(self.domain.lo), real(self.domain.hi)));
        line(format!("frame_center: {}", reals(self.frame.center())));
        line(format!("frame_scale: {}", reals(self.frame.scale())));
        for (k, v) in &self.metadata {
            line(format!("meta.{k}: {v}"));
        }
        line(format!("moment_sum: {m}"));
        for row in self.moment_sum.chunks(m) {
            line(reals(row));
        }
        let checksum = hex_digest(out.as_bytes());
        out.push_str(&format!("checksum: sha256:{checksum}\n"));
        out
    }

    pub fn save(&self, mut sink: impl Write) -> Result<()> {
        sink.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn load(mut source: impl Read) -> Result<Self> {
        let mut text = String::new();
        source.read_to_string(&mut text)?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::parse(CONTEXT, 1, "empty payload"));
        }
        let body_end = text
            .rfind("checksum: ")
            .ok_or_else(|| Error::parse(CONTEXT, text.lines().count(), "missing checksum line"))?;
        let (body, tail) = text.split_at(body_end);
        let stated = tail
            .trim_end()
            .strip_prefix("checksum: sha256:")
            .ok_or_else(|| Error::parse(CONTEXT, body.lines().count() + 1, "malformed checksum line"))?;
        if stated != hex_digest(body.as_bytes()) {
            return Err(Error::Checksum);
        }

        let mut lines = body.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, MAGIC)) => {}
            _ => return Err(Error::parse(CONTEXT, 1, "not a christoffel model file")),
        }

        let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut metadata = BTreeMap::new();
        let mut rows: Option<(usize, usize)> = None;
        for (no, l) in lines.by_ref() {
            let (key, value) = l
                .split_once(": ")
                .ok_or_else(|| Error::parse(CONTEXT, no, format!("expected 'key: value', got '{l}'")))?;
            if key == "moment_sum" {
                let m = value.trim().parse::<usize>().map_err(|_| Error::parse(CONTEXT, no, "bad matrix size"))?;
                rows = Some((no, m));
                break;
            }
            if let Some(meta) = key.strip_prefix("meta.") {
                metadata.insert(meta.to_owned(), value.to_owned());
            } else {
                fields.insert(key.to_owned(), (no, value.to_owned()));
            }
        }

        let field = |key: &str| -> Result<(usize, &str)> {
            fields
                .get(key)
                .map(|(no, v)| (*no, v.as_str()))
                .ok_or_else(|| Error::parse(CONTEXT, 0, format!("missing field '{key}'")))
        };
        let parse_usize = |key: &str| -> Result<usize> {
            let (no, v) = field(key)?;
            v.trim().parse().map_err(|_| Error::parse(CONTEXT, no, format!("{key}: not an integer")))
        };
        let parse_reals = |no: usize, v: &str| -> Result<Vec<f64>> {
            v.split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|_| Error::parse(CONTEXT, no, format!("'{x}' is not a number"))))
                .collect()
        };

        let version = field("format_version")?.1;
        if version.trim() != FORMAT_VERSION.to_string() {
            return Err(Error::Version(version.trim().to_owned()));
        }
        let (no, ordering) = field("basis_ordering")?;
        if ordering.trim() != ORDERING_NAME {
            return Err(Error::parse(CONTEXT, no, format!("unknown basis ordering '{ordering}'")));
        }
        let d = parse_usize("algebraic_degree")?;
        let n = parse_usize("harmonic_degree")?;
        let sample_count = parse_usize("sample_count")?;
        let (no, eps) = field("epsilon")?;
        let epsilon = parse_reals(no, eps)?;
        let (no, dom) = field("domain")?;
        let domain = match parse_reals(no, dom)?.as_slice() {
            [lo, hi] => Domain::new(*lo, *hi)?,
            _ => return Err(Error::parse(CONTEXT, no, "domain needs two bounds")),
        };
        let (no, center) = field("frame_center")?;
        let center = parse_reals(no, center)?;
        let (no, scale) = field("frame_scale")?;
        let scale = parse_reals(no, scale)?;
        let frame = CoordinateFrame::new(center, scale)?;
        let epsilon = match epsilon.as_slice() {
            [e] => *e,
            _ => return Err(Error::parse(CONTEXT, 0, "epsilon needs one value")),
        };

        let (header_no, m) = rows.ok_or_else(|| Error::parse(CONTEXT, 0, "missing moment_sum"))?;
        let expected = crate::basis::basis_dimension(d, n);
        if m as u128 != expected {
            return Err(Error::parse(
                CONTEXT,
                header_no,
                format!("moment_sum size {m} does not match binomial(n+d, n) = {expected}"),
            ));
        }
        let mut moment_sum = Vec::with_capacity(m * m);
        for _ in 0..m {
            let (no, l) = lines.next().ok_or_else(|| Error::parse(CONTEXT, header_no, "truncated moment_sum"))?;
            let row = parse_reals(no, l)?;
            if row.len() != m {
                return Err(Error::parse(CONTEXT, no, format!("expected {m} entries, got {}", row.len())));
            }
            moment_sum.extend(row);
        }
        if let Some((no, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(CONTEXT, no, format!("unexpected trailing content '{l}'")));
        }

        ChristoffelModel::from_parts(d, n, frame, epsilon, sample_count, moment_sum, domain, metadata)
    }
}

#[cfg(test)]
pub(super) mod tests_support {
    pub fn digest(body: &str) -> String {
        super::hex_digest(body.as_bytes())
    }
}
