//! Chebyshev coefficients of sampled trajectories.
//!
//! The orthonormal system is `e_1 = 1`, `e_k = sqrt(2) T_{k-1}` on `[-1, 1]`
//! under the Chebyshev probability weight `1 / (pi sqrt(1 - t^2))`. Inner
//! products are evaluated with the M-point Gauss-Chebyshev rule, which is
//! exact for polynomial integrands of degree up to `2M - 1`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use crate::error::{Error, Result};

/// Largest harmonic truncation accepted by [`project`].
pub const MAX_HARMONIC_DEGREE: usize = 4096;

/// Default number of quadrature nodes for a harmonic truncation `n`.
pub fn default_quad_points(n: usize) -> usize {
    256.max(8 * n)
}

/// Closed time interval a trajectory is declared on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub const CANONICAL: Domain = Domain { lo: -1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!("domain [{lo}, {hi}] is empty or not finite")));
        }
        Ok(Domain { lo, hi })
    }

    /// Affine map onto `[-1, 1]`.
    pub fn to_canonical(&self, t: f64) -> f64 {
        2.0 * (t - self.lo) / (self.hi - self.lo) - 1.0
    }

    pub fn from_canonical(&self, u: f64) -> f64 {
        self.lo + (u + 1.0) * 0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, t: f64) -> bool {
        let slack = 1e-12 * (self.hi - self.lo);
        t >= self.lo - slack && t <= self.hi + slack
    }
}

impl Default for Domain {
    fn default() -> Self {
        Domain::CANONICAL
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("domain '{s}' is not of the form lo:hi")))?;
        let parse = |x: &str| {
            x.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("domain bound '{x}' is not a number")))
        };
        Domain::new(parse(lo)?, parse(hi)?)
    }
}

/// A trajectory observed at strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory {
    id: Option<String>,
    domain: Domain,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SampledTrajectory {
    pub fn new(id: Option<String>, domain: Domain, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidTrajectory { id: id.clone(), reason };
        if times.len() != values.len() {
            return Err(invalid(format!("{} times but {} values", times.len(), values.len())));
        }
        if times.len() < 2 {
            return Err(invalid("at least 2 samples are required".into()));
        }
        if let Some(w) = times.windows(2).position(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(invalid(format!("times not strictly increasing at sample {}", w + 1)));
        }
        if let Some((i, t)) = times.iter().enumerate().find(|(_, t)| !domain.contains(**t)) {
            return Err(invalid(format!("time {t} at sample {i} lies outside domain {domain}")));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(invalid(format!("non-finite value {v} at sample {i}")));
        }
        Ok(SampledTrajectory { id, domain, times, values })
    }

    pub fn id(&self) -> Option<&str> {
        self.id.as_deref()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// First `n` coefficients `<f, e_k>` of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector(Vec<f64>);

impl CoefficientVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = coeffs.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(CoefficientVector(coeffs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Squared norm of the projection onto the first `n` basis functions.
    pub fn truncated_norm_sq(&self, n: usize) -> f64 {
        self.0.iter().take(n).map(|c| c * c).sum()
    }
}

impl AsRef<[f64]> for CoefficientVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Chebyshev polynomial of the first kind `T_k(t)` by the three-term recurrence.
pub fn chebyshev_t(k: usize, t: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => t,
        _ => {
            let (mut prev, mut cur) = (1.0, t);
            for _ in 1..k {
                let next = 2.0 * t * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Orthonormal basis function `e_k` (1-based).
pub fn basis_function(k: usize, t: f64) -> f64 {
    assert!(k >= 1, "basis functions are 1-based");
    if k == 1 {
        1.0
    } else {
        SQRT_2 * chebyshev_t(k - 1, t)
    }
}

/// Gauss-Chebyshev nodes `cos((2j - 1) pi / (2M))`, `j = 1..M`, descending.
pub fn chebyshev_quadrature_nodes(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("quadrature needs at least 2 nodes, got {m}")));
    }
    Ok((1..=m).map(|j| ((2 * j - 1) as f64 * PI / (2 * m) as f64).cos()).collect())
}

/// Chebyshev extreme points `cos(j pi / (count - 1))` in ascending order,
/// endpoints included.
pub fn chebyshev_extreme_points(count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let last = (count - 1) as f64;
    (0..count).rev().map(|j| (j as f64 * PI / last).cos()).collect()
}

/// Piecewise-linear interpolation of `traj` at canonical nodes in `[-1, 1]`,
/// clamping to the endpoint values outside the sampled range.
pub fn resample_to_nodes(traj: &SampledTrajectory, nodes: &[f64]) -> Result<Vec<f64>> {
    if traj.times.is_empty() {
        return Err(Error::InvalidTrajectory { id: traj.id.clone(), reason: "empty trajectory".into() });
    }
    let domain = traj.domain;
    let times: Vec<f64> = traj.times.iter().map(|&t| domain.to_canonical(t)).collect();
    let values = &traj.values;
    let last = times.len() - 1;
    Ok(nodes
        .iter()
        .map(|&x| {
            if x <= times[0] {
                return values[0];
            }
            if x >= times[last] {
                return values[last];
            }
            // first index with times[i] > x; 1 <= i <= last
            let i = times.partition_point(|&t| t <= x);
            let (t0, t1) = (times[i - 1], times[i]);
            if x == t0 {
                return values[i - 1];
            }
            let w = (x - t0) / (t1 - t0);
            values[i - 1] + w * (values[i] - values[i - 1])
        })
        .collect())
}

/// Coefficients from function values at the nodes of
/// [`chebyshev_quadrature_nodes`]`(values.len())`.
pub fn project_node_values(values: &[f64], n: usize) -> Result<CoefficientVector> {
    let m = values.len();
    let nodes = chebyshev_quadrature_nodes(m)?;
    let mut coeffs = vec![0.0; n];
    for (&t, &f) in nodes.iter().zip(values) {
        if !f.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite function value {f} at node {t}")));
        }
        let (mut prev, mut cur) = (1.0, t);
        for (k, slot) in coeffs.iter_mut().enumerate() {
            let tk = match k {
                0 => 1.0,
                1 => t,
                _ => {
                    let next = 2.0 * t * cur - prev;
                    prev = cur;
                    cur = next;
                    cur
                }
            };
            *slot += f * tk;
        }
    }
    let inv_m = 1.0 / m as f64;
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= if k == 0 { inv_m } else { SQRT_2 * inv_m };
    }
    CoefficientVector::new(coeffs)
}

fn check_truncation(n: usize) -> Result<()> {
    if n == 0 || n > MAX_HARMONIC_DEGREE {
        return Err(Error::InvalidParameter(format!("harmonic truncation {n} outside 1..={MAX_HARMONIC_DEGREE}")));
    }
    Ok(())
}

/// Projects a sampled trajectory onto the first `n` basis functions using
/// `quad_points` Gauss-Chebyshev nodes.
pub fn project(traj: &SampledTrajectory, n: usize, quad_points: usize) -> Result<CoefficientVector> {
    check_truncation(n)?;
    let nodes = chebyshev_quadrature_nodes(quad_points)?;
    let values = resample_to_nodes(traj, &nodes)?;
    project_node_values(&values, n)
}

/// Projects a function given in closed form on `[-1, 1]`.
pub fn project_fn(f: impl Fn(f64) -> f64, n: usize, quad_points: usize) -> Result<CoefficientVector> {
    check_truncation(n)?;
    let nodes = chebyshev_quadrature_nodes(quad_points)?;
    let values: Vec<f64> = nodes.iter().map(|&t| f(t)).collect();
    project_node_values(&values, n)
}

/// Evaluates the truncated series `sum_k c_k e_k(t)` at canonical time `t`.
pub fn reconstruct(coeffs: &[f64], t: f64) -> f64 {
    // Clenshaw on sum_j a_j T_j with a_0 = c_1, a_j = sqrt(2) c_{j+1}
    let a = |j: usize| if j == 0 { coeffs[0] } else { SQRT_2 * coeffs[j] };
    let (mut b1, mut b2) = (0.0, 0.0);
    for j in (1..coeffs.len()).rev() {
        let b0 = a(j) + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    match coeffs.len() {
        0 => 0.0,
        _ => a(0) + t * b1 - b2,
    }
}
