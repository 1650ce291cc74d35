//! CSV trajectory tables.
//!
//! Two layouts are accepted, told apart by the first header cell. Both are
//! plain comma-separated text with a header row of trajectory ids.
//!
//! * `t,<id1>,<id2>,...`: one row per sample time (strictly increasing), one
//!   column per trajectory;
//! * `coef,<id1>,<id2>,...`: row `k` holds `<f, e_k>` for `k = 1..n`, one
//!   column per trajectory.

use std::io::{Read, Write};

use crate::dataset::{DatasetEntry, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::parallel::{map_collect, Execution};
use crate::projection::{project, CoefficientVector, Domain, SampledTrajectory};

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryTable {
    Samples { ids: Vec<String>, times: Vec<f64>, columns: Vec<Vec<f64>> },
    Coefficients { ids: Vec<String>, columns: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Samples,
    Coefficients,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Samples => "samples",
            TableKind::Coefficients => "coef",
        }
    }
}

fn parse_cell(context: &str, line: usize, cell: &str) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| Error::parse(context, line, format!("'{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(context, line, format!("non-finite value '{cell}'")));
    }
    Ok(v)
}

/// Reads a trajectory table. `context` names the source in error messages.
pub fn read_table(reader: impl Read, context: &str) -> Result<TrajectoryTable> {
    let mut csv = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(context, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, record));
    }
    let mut rows = rows.into_iter();
    let (header_no, header) = rows.next().ok_or_else(|| Error::parse(context, 1, "empty file: missing header"))?;
    let kind = match &header[0] {
        "t" => TableKind::Samples,
        "coef" => TableKind::Coefficients,
        other => {
            return Err(Error::parse(
                context,
                header_no,
                format!("first header cell must be 't' or 'coef', got '{other}'"),
            ))
        }
    };
    let ids: Vec<String> = header
        .iter()
        .skip(1)
        .enumerate()
        .map(|(j, id)| if id.is_empty() { format!("col{}", j + 1) } else { id.to_owned() })
        .collect();
    let width = header.len();

    let mut lead = Vec::new();
    let mut columns = vec![Vec::new(); ids.len()];
    for (no, cells) in rows {
        if cells.len() != width {
            return Err(Error::parse(context, no, format!("expected {width} cells, got {}", cells.len())));
        }
        lead.push((no, parse_cell(context, no, &cells[0])?));
        for (col, cell) in columns.iter_mut().zip(cells.iter().skip(1)) {
            col.push(parse_cell(context, no, cell)?);
        }
    }

    match kind {
        TableKind::Samples => {
            let times: Vec<f64> = lead.iter().map(|(_, t)| *t).collect();
            if let Some(w) = lead.windows(2).find(|w| w[0].1 >= w[1].1) {
                return Err(Error::parse(context, w[1].0, "times must be strictly increasing"));
            }
            Ok(TrajectoryTable::Samples { ids, times, columns })
        }
        TableKind::Coefficients => {
            for (k, (no, idx)) in lead.iter().enumerate() {
                if *idx != (k + 1) as f64 {
                    return Err(Error::parse(context, *no, format!("expected coefficient index {}, got {idx}", k + 1)));
                }
            }
            Ok(TrajectoryTable::Coefficients { ids, columns })
        }
    }
}

impl TrajectoryTable {
    pub fn kind(&self) -> TableKind {
        match self {
            TrajectoryTable::Samples { .. } => TableKind::Samples,
            TrajectoryTable::Coefficients { .. } => TableKind::Coefficients,
        }
    }

    pub fn ids(&self) -> &[String] {
        match self {
            TrajectoryTable::Samples { ids, .. } | TrajectoryTable::Coefficients { ids, .. } => ids,
        }
    }

    /// Number of trajectories.
    pub fn len(&self) -> usize {
        self.ids().len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids().is_empty()
    }

    /// `[first time, last time]` of a samples table.
    pub fn time_span(&self) -> Option<Domain> {
        match self {
            TrajectoryTable::Samples { times, .. } if times.len() >= 2 => {
                Domain::new(times[0], times[times.len() - 1]).ok()
            }
            _ => None,
        }
    }

    /// Converts every column into a dataset entry, projecting sampled columns
    /// onto `n` coefficients with `quad_points` nodes.
    pub fn into_entries(
        self,
        domain: Domain,
        n: usize,
        quad_points: usize,
        exec: Execution,
    ) -> Result<Vec<DatasetEntry>> {
        match self {
            TrajectoryTable::Samples { ids, times, columns } => {
                let trajectories = ids
                    .into_iter()
                    .zip(columns)
                    .map(|(id, values)| SampledTrajectory::new(Some(id), domain, times.clone(), values))
                    .collect::<Result<Vec<_>>>()?;
                let coeffs = map_collect(exec, &trajectories, |s| project(s, n, quad_points));
                trajectories
                    .into_iter()
                    .zip(coeffs)
                    .map(|(s, c)| Ok(DatasetEntry { id: s.id().map(str::to_owned), coeffs: c?, samples: Some(s) }))
                    .collect()
            }
            TrajectoryTable::Coefficients { ids, columns } => ids
                .into_iter()
                .zip(columns)
                .map(|(id, c)| Ok(DatasetEntry::from_coeffs(Some(id), CoefficientVector::new(c)?)))
                .collect(),
        }
    }

    pub fn into_dataset(
        self,
        domain: Domain,
        n: usize,
        quad_points: usize,
        exec: Execution,
    ) -> Result<TrajectoryDataset> {
        TrajectoryDataset::new(self.into_entries(domain, n, quad_points, exec)?, domain)
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::InvalidParameter(format!("csv output: {other:?}")),
    }
}

/// Writes a samples table; every trajectory must be sampled at `times`.
pub fn write_samples_table(w: impl Write, times: &[f64], columns: &[(String, Vec<f64>)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (id, values) in columns {
        assert_eq!(values.len(), times.len(), "column '{id}' has the wrong length");
    }
    let header = std::iter::once("t").chain(columns.iter().map(|(id, _)| id.as_str()));
    out.write_record(header).map_err(csv_error)?;
    for (i, t) in times.iter().enumerate() {
        let row = std::iter::once(t.to_string()).chain(columns.iter().map(|(_, v)| v[i].to_string()));
        out.write_record(row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a coefficient table with rows `k = 1..len`.
pub fn write_coefficient_table(w: impl Write, columns: &[(String, &CoefficientVector)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let len = columns.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    let header = std::iter::once("coef").chain(columns.iter().map(|(id, _)| id.as_str()));
    out.write_record(header).map_err(csv_error)?;
    for k in 0..len {
        let cells = columns.iter().map(|(_, c)| c.as_slice().get(k).copied().unwrap_or(0.0).to_string());
        out.write_record(std::iter::once((k + 1).to_string()).chain(cells)).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes entries' sampled forms; all must share the same sample times.
pub fn write_entries_samples(w: impl Write, entries: &[&DatasetEntry]) -> Result<()> {
    let first = entries
        .first()
        .and_then(|e| e.samples.as_ref())
        .ok_or_else(|| Error::InvalidParameter("entries carry no samples".into()))?;
    let times = first.times().to_vec();
    let columns = entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let s = e
                .samples
                .as_ref()
                .filter(|s| s.times() == times.as_slice())
                .ok_or_else(|| Error::InvalidParameter("entries must share sample times".into()))?;
            Ok((e.id.clone().unwrap_or_else(|| format!("col{}", i + 1)), s.values().to_vec()))
        })
        .collect::<Result<Vec<_>>>()?;
    write_samples_table(w, &times, &columns)
}

pub fn write_entries_coefficients(w: impl Write, entries: &[&DatasetEntry]) -> Result<()> {
    let columns: Vec<(String, &CoefficientVector)> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.clone().unwrap_or_else(|| format!("col{}", i + 1)), &e.coeffs))
        .collect();
    write_coefficient_table(w, &columns)
}
