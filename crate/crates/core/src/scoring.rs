//! Turning CD values into verdicts, plus the two baseline scores used for
//! comparison: distance to the nearest reference trajectory, and the
//! pointwise Christoffel function of the graph point cloud `{(t, g(t))}`.

use std::fmt;

use crate::dataset::{DatasetEntry, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::model::{ChristoffelModel, FitOptions};
use crate::parallel::{map_collect, Execution};
use crate::projection::{chebyshev_quadrature_nodes, resample_to_nodes, CoefficientVector, SampledTrajectory};

pub const DEFAULT_QUANTILE: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMethod {
    /// Nearest-rank `q`-quantile of calibration CD values, `q` in `(0, 1]`.
    Quantile(f64),
    /// `alpha * binomial(n + d, n)`, `alpha >= 1`; the in-support mean CD
    /// value equals the dimension.
    Multiple(f64),
}

impl Default for ThresholdMethod {
    fn default() -> Self {
        ThresholdMethod::Quantile(DEFAULT_QUANTILE)
    }
}

impl ThresholdMethod {
    fn validate(self) -> Result<Self> {
        match self {
            ThresholdMethod::Quantile(q) if q > 0.0 && q <= 1.0 => Ok(self),
            ThresholdMethod::Multiple(a) if a >= 1.0 && a.is_finite() => Ok(self),
            ThresholdMethod::Quantile(q) => Err(Error::InvalidParameter(format!("quantile {q} outside (0, 1]"))),
            ThresholdMethod::Multiple(a) => Err(Error::InvalidParameter(format!("multiple {a} must be >= 1"))),
        }
    }
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdMethod::Quantile(q) => write!(f, "quantile {q}"),
            ThresholdMethod::Multiple(a) => write!(f, "multiple {a}"),
        }
    }
}

impl std::str::FromStr for ThresholdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse threshold method '{s}'"));
        let mut parts = s.split_whitespace();
        let (kind, value) = (parts.next().ok_or_else(bad)?, parts.next().ok_or_else(bad)?);
        let value: f64 = value.parse().map_err(|_| bad())?;
        let method = match kind {
            "quantile" => ThresholdMethod::Quantile(value),
            "multiple" => ThresholdMethod::Multiple(value),
            _ => return Err(bad()),
        };
        method.validate()
    }
}

/// Decision threshold `tau`: a trajectory is abnormal iff its CD value
/// exceeds it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    value: f64,
    method: ThresholdMethod,
    calibration_size: usize,
}

impl Threshold {
    pub fn new(value: f64, method: ThresholdMethod, calibration_size: usize) -> Result<Self> {
        let method = method.validate()?;
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter(format!("threshold must be finite and positive, got {value}")));
        }
        Ok(Threshold { value, method, calibration_size })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn method(&self) -> ThresholdMethod {
        self.method
    }

    pub fn calibration_size(&self) -> usize {
        self.calibration_size
    }

    /// `"<method> <param> <value> <calibration size>"`, parsed back by
    /// [`Threshold::from_record`].
    pub fn to_record(&self) -> String {
        format!("{} {:.16e} {}", self.method, self.value, self.calibration_size)
    }

    pub fn from_record(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse threshold record '{s}'"));
        let parts: Vec<&str> = s.split_whitespace().collect();
        let [kind, param, value, size] = parts.as_slice() else {
            return Err(bad());
        };
        let method: ThresholdMethod = format!("{kind} {param}").parse()?;
        Threshold::new(value.parse().map_err(|_| bad())?, method, size.parse().map_err(|_| bad())?)
    }
}

/// Nearest-rank `q`-quantile: the `ceil(q * len)`-th smallest value.
pub fn nearest_rank_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!("quantile {q} outside (0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

/// Threshold from precomputed calibration CD values.
pub fn calibrate_values(cd_values: &[f64], dimension: usize, method: ThresholdMethod) -> Result<Threshold> {
    if cd_values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let value = match method.validate()? {
        ThresholdMethod::Quantile(q) => nearest_rank_quantile(cd_values, q)?,
        ThresholdMethod::Multiple(alpha) => alpha * dimension as f64,
    };
    Threshold::new(value, method, cd_values.len())
}

pub fn calibrate(
    model: &ChristoffelModel,
    data: &TrajectoryDataset,
    method: ThresholdMethod,
    exec: Execution,
) -> Result<Threshold> {
    let probes: Vec<CoefficientVector> = data.coefficients().cloned().collect();
    let cd = model.cd_values(&probes, exec)?;
    calibrate_values(&cd, model.dimension(), method)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Inlier,
    Outlier,
}

impl Verdict {
    /// Strict comparison: a CD value equal to the threshold is an inlier.
    pub fn from_cd(cd: f64, threshold: f64) -> Verdict {
        if cd > threshold {
            Verdict::Outlier
        } else {
            Verdict::Inlier
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Inlier => "inlier",
            Verdict::Outlier => "outlier",
        })
    }
}

/// Column order of serialized reports.
pub const REPORT_HEADER: &str = "id,cd,christoffel,threshold,verdict,baseline_l2";

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub id: String,
    pub cd: f64,
    pub christoffel: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub baseline_l2: Option<f64>,
}

impl ScoreReport {
    pub fn to_line(&self) -> String {
        let l2 = self.baseline_l2.map(|x| x.to_string()).unwrap_or_default();
        format!("{},{},{},{},{},{}", self.id, self.cd, self.christoffel, self.threshold, self.verdict, l2)
    }
}

pub fn classify(
    model: &ChristoffelModel,
    threshold: &Threshold,
    id: &str,
    c: &CoefficientVector,
) -> Result<ScoreReport> {
    let cd = model.cd_value(c)?;
    Ok(ScoreReport {
        id: id.to_owned(),
        cd,
        christoffel: if cd.is_finite() { 1.0 / cd } else { 0.0 },
        threshold: threshold.value(),
        verdict: Verdict::from_cd(cd, threshold.value()),
        baseline_l2: None,
    })
}

fn check_domain(data: &TrajectoryDataset, f: &SampledTrajectory) -> Result<()> {
    if data.domain() != f.domain() {
        return Err(Error::DomainMismatch { expected: data.domain().to_string(), got: f.domain().to_string() });
    }
    Ok(())
}

/// `min_{g in data} ||g - f||` in the Chebyshev-weighted L2 norm, evaluated by
/// `quad_points`-node Gauss-Chebyshev quadrature.
pub fn nearest_trajectory_score(
    data: &TrajectoryDataset,
    f: &SampledTrajectory,
    quad_points: usize,
    exec: Execution,
) -> Result<f64> {
    check_domain(data, f)?;
    let nodes = chebyshev_quadrature_nodes(quad_points)?;
    let fv = resample_to_nodes(f, &nodes)?;
    nearest_distance(data, &fv, &nodes, exec)
}

/// Same as [`nearest_trajectory_score`] for a probe given by its values at
/// `nodes` (Gauss-Chebyshev nodes).
pub fn nearest_distance(data: &TrajectoryDataset, probe: &[f64], nodes: &[f64], exec: Execution) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let distances = map_collect(exec, data.entries(), |g| -> Result<f64> {
        let gv = g.values_at(nodes)?;
        let ms = gv.iter().zip(probe).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / nodes.len() as f64;
        Ok(ms.sqrt())
    });
    let mut best = f64::INFINITY;
    for d in distances {
        best = best.min(d?);
    }
    Ok(best)
}

/// Classical bivariate Christoffel function over the graph points
/// `(t_j, g(t_j))` of every reference trajectory at Gauss-Chebyshev nodes.
#[derive(Debug, Clone)]
pub struct PointwiseChristoffel {
    model: ChristoffelModel,
    nodes: Vec<f64>,
    floor: f64,
}

impl PointwiseChristoffel {
    pub fn fit(data: &TrajectoryDataset, degree: usize, quad_points: usize, exec: Execution) -> Result<Self> {
        let nodes = chebyshev_quadrature_nodes(quad_points)?;
        let values = map_collect(exec, data.entries(), |e| e.values_at(&nodes));
        let mut cloud = Vec::with_capacity(data.len() * nodes.len());
        for v in values {
            for (&t, x) in nodes.iter().zip(v?) {
                cloud.push(CoefficientVector::new(vec![t, x])?);
            }
        }
        let dim = crate::basis::basis_dimension(degree, 2);
        if (cloud.len() as u128) < dim {
            return Err(Error::InvalidParameter(format!(
                "degenerate point cloud: {} points for {dim} bivariate monomials",
                cloud.len()
            )));
        }
        let options = FitOptions::default().execution(exec);
        let model = ChristoffelModel::fit_points(&cloud, degree, 2, data.domain(), &options)?;
        let floor = model.cd_values(&cloud, exec)?.into_iter().map(|cd| 1.0 / cd).fold(f64::INFINITY, f64::min);
        Ok(PointwiseChristoffel { model, nodes, floor })
    }

    /// Smallest pointwise Christoffel value over the training cloud.
    pub fn in_cloud_floor(&self) -> f64 {
        self.floor
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn christoffel_at(&self, t: f64, x: f64) -> Result<f64> {
        self.model.christoffel_value(&CoefficientVector::new(vec![t, x])?)
    }

    /// Fraction of nodes where the probe's graph point has a Christoffel
    /// value below `delta`.
    pub fn score_values(&self, values: &[f64], delta: f64) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch { expected: self.nodes.len(), got: values.len() });
        }
        let mut below = 0usize;
        for (&t, &x) in self.nodes.iter().zip(values) {
            if self.christoffel_at(t, x)? < delta {
                below += 1;
            }
        }
        Ok(below as f64 / self.nodes.len() as f64)
    }

    pub fn score(&self, f: &SampledTrajectory, delta: f64) -> Result<f64> {
        self.score_values(&resample_to_nodes(f, &self.nodes)?, delta)
    }

    pub fn score_entry(&self, entry: &DatasetEntry, delta: f64) -> Result<f64> {
        self.score_values(&entry.values_at(&self.nodes)?, delta)
    }
}

/// Quadrature nodes used by [`naive_pointwise_score`].
pub const NAIVE_QUAD_POINTS: usize = 64;

/// Fits the pointwise Christoffel function of degree `d2` on `data` and
/// returns the fraction of nodes where `f` falls below `delta`.
pub fn naive_pointwise_score(data: &TrajectoryDataset, f: &SampledTrajectory, d2: usize, delta: f64) -> Result<f64> {
    check_domain(data, f)?;
    PointwiseChristoffel::fit(data, d2, NAIVE_QUAD_POINTS, Execution::Parallel)?.score(f, delta)
}
