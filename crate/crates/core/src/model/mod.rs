//! Empirical moment matrix and the Christoffel-Darboux quantities derived
//! from it.
//!
//! A model keeps the raw moment sum `S = sum_i v(g_i) v(g_i)^T` and the
//! sample count `N`; the averaged matrix `M = S / N` is derived on demand, so
//! both `N`- and `(N + 1)`-normalized forms are exact consequences of the
//! stored state. Every query goes through a spectral factorization of
//! `M + eps I`.
//!
//! Monomials are evaluated in a [`CoordinateFrame`]: the coefficients are
//! shifted and scaled per coordinate before the monomial vector is formed.
//! The polynomial space is invariant under such affine maps, so at
//! `eps = 0` every CD value is frame independent; the frame only controls
//! conditioning and the basis in which `eps I` is added.

mod file;

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::basis::{enumerate_basis, BasisEnumeration};
use crate::dataset::TrajectoryDataset;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalue_range, to_dmatrix, SpectralFactor};
use crate::parallel::{map_collect, map_range, Execution};
use crate::projection::{CoefficientVector, Domain};

pub use file::FORMAT_VERSION;

/// Relative factor of the default regularization `1e-8 * trace(M) / m`.
pub const DEFAULT_EPSILON_FACTOR: f64 = 1e-8;

/// Per-coordinate affine normalization `u_k = (c_k - center_k) / scale_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateFrame {
    center: Vec<f64>,
    scale: Vec<f64>,
}

impl CoordinateFrame {
    pub fn identity(n: usize) -> Self {
        CoordinateFrame { center: vec![0.0; n], scale: vec![1.0; n] }
    }

    pub fn new(center: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if center.len() != scale.len() {
            return Err(Error::DimensionMismatch { expected: center.len(), got: scale.len() });
        }
        if center.iter().any(|c| !c.is_finite()) || scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParameter("frame centers must be finite and scales positive".into()));
        }
        Ok(CoordinateFrame { center, scale })
    }

    /// Mean and population standard deviation of the first `n` coordinates.
    /// Constant coordinates keep scale 1.
    pub fn standardized<'a>(points: impl IntoIterator<Item = &'a CoefficientVector>, n: usize) -> Self {
        let points: Vec<&[f64]> = points.into_iter().map(|c| &c.as_slice()[..n]).collect();
        let count = points.len().max(1) as f64;
        let mut center = vec![0.0; n];
        for p in &points {
            for (acc, x) in center.iter_mut().zip(p.iter()) {
                *acc += x;
            }
        }
        center.iter_mut().for_each(|c| *c /= count);
        let mut var = vec![0.0; n];
        for p in &points {
            for k in 0..n {
                let dev = p[k] - center[k];
                var[k] += dev * dev;
            }
        }
        let scale = var
            .iter()
            .zip(&center)
            .map(|(v, c)| {
                let sd = (v / count).sqrt();
                // below this the spread is rounding noise around the mean
                if sd > 1e-12 * (1.0 + c.abs()) {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        CoordinateFrame { center, scale }
    }

    pub fn len(&self) -> usize {
        self.center.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center.is_empty()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn is_identity(&self) -> bool {
        self.center.iter().all(|&c| c == 0.0) && self.scale.iter().all(|&s| s == 1.0)
    }

    pub fn apply(&self, coeffs: &[f64]) -> Vec<f64> {
        coeffs.iter().zip(self.center.iter().zip(&self.scale)).map(|(x, (c, s))| (x - c) / s).collect()
    }
}

/// How the coordinate frame of a new model is chosen.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum FrameChoice {
    /// Monomials of the raw coefficients.
    Raw,
    /// Center and scale from the fitted data.
    #[default]
    Standardized,
    Fixed(CoordinateFrame),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Regularization {
    /// `1e-8 * trace(S / N) / m`.
    #[default]
    Auto,
    Absolute(f64),
}

#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    pub frame: FrameChoice,
    pub regularization: Regularization,
    pub execution: Execution,
}

impl FitOptions {
    pub fn with_epsilon(epsilon: f64) -> Self {
        FitOptions { regularization: Regularization::Absolute(epsilon), ..Default::default() }
    }

    pub fn frame(mut self, frame: FrameChoice) -> Self {
        self.frame = frame;
        self
    }

    pub fn execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// A fitted empirical Christoffel model of order `(d, n)`.
#[derive(Debug, Clone)]
pub struct ChristoffelModel {
    basis: BasisEnumeration,
    frame: CoordinateFrame,
    epsilon: f64,
    sample_count: usize,
    moment_sum: Vec<f64>,
    domain: Domain,
    metadata: BTreeMap<String, String>,
    factor: SpectralFactor,
}

impl ChristoffelModel {
    /// Fits a model on every coefficient vector of `data`.
    pub fn fit(data: &TrajectoryDataset, d: usize, n: usize, options: &FitOptions) -> Result<Self> {
        let points: Vec<CoefficientVector> = data.coefficients().cloned().collect();
        Self::fit_points(&points, d, n, data.domain(), options)
    }

    pub fn fit_points(
        points: &[CoefficientVector],
        d: usize,
        n: usize,
        domain: Domain,
        options: &FitOptions,
    ) -> Result<Self> {
        let basis = enumerate_basis(d as i64, n as i64)?;
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(short) = points.iter().find(|c| c.len() < n) {
            return Err(Error::DimensionMismatch { expected: n, got: short.len() });
        }
        let frame = match &options.frame {
            FrameChoice::Raw => CoordinateFrame::identity(n),
            FrameChoice::Standardized => CoordinateFrame::standardized(points, n),
            FrameChoice::Fixed(f) if f.len() == n => f.clone(),
            FrameChoice::Fixed(f) => return Err(Error::DimensionMismatch { expected: n, got: f.len() }),
        };

        let exec = options.execution;
        let vectors: Vec<Vec<f64>> =
            map_collect(exec, points, |c| basis.eval(&frame.apply(&c.as_slice()[..n])).expect("length checked above"));
        let moment_sum = gram_sum(exec, &vectors, basis.len());
        let sample_count = points.len();

        let epsilon = match options.regularization {
            Regularization::Absolute(e) if e >= 0.0 && e.is_finite() => e,
            Regularization::Absolute(e) => {
                return Err(Error::InvalidParameter(format!("epsilon must be finite and >= 0, got {e}")))
            }
            Regularization::Auto => {
                let m = basis.len();
                let trace: f64 = (0..m).map(|i| moment_sum[i * m + i]).sum::<f64>() / sample_count as f64;
                DEFAULT_EPSILON_FACTOR * trace / m as f64
            }
        };

        Self::assemble(basis, frame, epsilon, sample_count, moment_sum, domain, BTreeMap::new())
    }

    /// Rebuilds a model from its persisted state.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        d: usize,
        n: usize,
        frame: CoordinateFrame,
        epsilon: f64,
        sample_count: usize,
        moment_sum: Vec<f64>,
        domain: Domain,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        let basis = enumerate_basis(d as i64, n as i64)?;
        let m = basis.len();
        if moment_sum.len() != m * m {
            return Err(Error::DimensionMismatch { expected: m * m, got: moment_sum.len() });
        }
        if frame.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: frame.len() });
        }
        if sample_count == 0 {
            return Err(Error::EmptyDataset);
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        if let Some((index, &value)) = moment_sum.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Self::assemble(basis, frame, epsilon, sample_count, moment_sum, domain, metadata)
    }

    fn assemble(
        basis: BasisEnumeration,
        frame: CoordinateFrame,
        epsilon: f64,
        sample_count: usize,
        moment_sum: Vec<f64>,
        domain: Domain,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        let regularized = regularized_matrix(&moment_sum, basis.len(), sample_count, epsilon);
        let factor = SpectralFactor::new(&regularized);
        if !factor.is_positive_definite() {
            let (min_eigenvalue, _) = eigenvalue_range(&regularized);
            return Err(Error::Singular { min_eigenvalue });
        }
        Ok(ChristoffelModel { basis, frame, epsilon, sample_count, moment_sum, domain, metadata, factor })
    }

    pub fn algebraic_degree(&self) -> usize {
        self.basis.algebraic_degree()
    }

    pub fn harmonic_degree(&self) -> usize {
        self.basis.harmonic_degree()
    }

    /// `m = binomial(n + d, n)`.
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &BasisEnumeration {
        &self.basis
    }

    pub fn frame(&self) -> &CoordinateFrame {
        &self.frame
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Row-major `S = sum_i v(g_i) v(g_i)^T`.
    pub fn moment_sum(&self) -> &[f64] {
        &self.moment_sum
    }

    /// Row-major `S / N`.
    pub fn moment_matrix(&self) -> Vec<f64> {
        let n = self.sample_count as f64;
        self.moment_sum.iter().map(|s| s / n).collect()
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    /// Sets a metadata entry persisted with the model. Keys are limited to
    /// `[A-Za-z0-9_.-]` and values to a single line.
    pub fn set_metadata(&mut self, key: &str, value: &str) -> Result<()> {
        let key_ok = !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || "_.-".contains(c));
        if !key_ok || value.contains(['\n', '\r']) {
            return Err(Error::InvalidParameter(format!("invalid metadata entry '{key}'")));
        }
        self.metadata.insert(key.to_owned(), value.to_owned());
        Ok(())
    }

    /// Extreme eigenvalues of the regularized matrix `S / N + eps I`.
    pub fn regularized_spectrum(&self) -> (f64, f64) {
        let m = self.dimension();
        eigenvalue_range(&regularized_matrix(&self.moment_sum, m, self.sample_count, self.epsilon))
    }

    /// Monomial vector of `c` in this model's frame.
    pub fn monomial_vector(&self, c: &CoefficientVector) -> Result<Vec<f64>> {
        let n = self.harmonic_degree();
        if c.len() < n {
            return Err(Error::DimensionMismatch { expected: n, got: c.len() });
        }
        self.basis.eval(&self.frame.apply(&c.as_slice()[..n]))
    }

    /// Christoffel-Darboux polynomial `p(c) = v(c)^T (S / N + eps I)^{-1} v(c)`.
    pub fn cd_value(&self, c: &CoefficientVector) -> Result<f64> {
        Ok(self.factor.quadratic_form(&self.monomial_vector(c)?))
    }

    /// Christoffel function `1 / p(c)`; 0 when `p(c)` overflows.
    pub fn christoffel_value(&self, c: &CoefficientVector) -> Result<f64> {
        let cd = self.cd_value(c)?;
        Ok(if cd.is_finite() { 1.0 / cd } else { 0.0 })
    }

    /// CD kernel `K(c1, c2) = v(c1)^T (S / N + eps I)^{-1} v(c2)`.
    pub fn kernel(&self, c1: &CoefficientVector, c2: &CoefficientVector) -> Result<f64> {
        let (v1, v2) = (self.monomial_vector(c1)?, self.monomial_vector(c2)?);
        Ok(self.factor.bilinear_form(&v1, &v2))
    }

    /// Coefficients, in this model's monomial basis, of the polynomial
    /// `K(., h) / K(h, h)` that attains the Christoffel minimum at `h`.
    pub fn extremal_polynomial(&self, h: &CoefficientVector) -> Result<Vec<f64>> {
        let v = self.monomial_vector(h)?;
        let solved = self.factor.solve(&v);
        let cd: f64 = solved.iter().zip(&v).map(|(a, b)| a * b).sum();
        if !(cd.is_finite() && cd > 0.0) {
            return Err(Error::ZeroCdValue);
        }
        Ok(solved.into_iter().map(|x| x / cd).collect())
    }

    /// Evaluates a polynomial given by coefficients in this model's basis.
    pub fn eval_polynomial(&self, coeffs: &[f64], c: &CoefficientVector) -> Result<f64> {
        if coeffs.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: coeffs.len() });
        }
        Ok(coeffs.iter().zip(self.monomial_vector(c)?).map(|(a, b)| a * b).sum())
    }

    /// CD values for a batch of probes, in input order.
    pub fn cd_values(&self, probes: &[CoefficientVector], exec: Execution) -> Result<Vec<f64>> {
        map_collect(exec, probes, |c| self.cd_value(c)).into_iter().collect()
    }

    /// Absorbs one trajectory. The moment sum and count are updated exactly and
    /// the regularized matrix is refactorized.
    pub fn update(&self, c_new: &CoefficientVector) -> Result<Self> {
        self.rank_one(c_new, 1.0)
    }

    /// Removes one previously absorbed trajectory.
    pub fn downdate(&self, c_old: &CoefficientVector) -> Result<Self> {
        if self.sample_count < 2 {
            return Err(Error::InvalidParameter("cannot downdate a model holding a single trajectory".into()));
        }
        self.rank_one(c_old, -1.0)
    }

    fn rank_one(&self, c: &CoefficientVector, sign: f64) -> Result<Self> {
        let v = self.monomial_vector(c)?;
        let m = self.dimension();
        let mut moment_sum = self.moment_sum.clone();
        for i in 0..m {
            let vi = sign * v[i];
            for j in 0..m {
                moment_sum[i * m + j] += vi * v[j];
            }
        }
        let sample_count = if sign > 0.0 { self.sample_count + 1 } else { self.sample_count - 1 };
        if sign < 0.0 {
            let trace: f64 = (0..m).map(|i| moment_sum[i * m + i]).sum();
            let (min_eigenvalue, _) = eigenvalue_range(&to_dmatrix(m, &moment_sum));
            if min_eigenvalue < -1e-10 * trace.abs() {
                return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
            }
        }
        Self::assemble(
            self.basis.clone(),
            self.frame.clone(),
            self.epsilon,
            sample_count,
            moment_sum,
            self.domain,
            self.metadata.clone(),
        )
    }

    /// CD value at `probe` for the model that would result from absorbing
    /// `added`, by the Sherman-Morrison identity on the unregularized matrix:
    ///
    /// `p'(g) = (N + 1) [ p(g) / N - (K(g, g0) / N)^2 / (1 + p(g0) / N) ]`.
    ///
    /// Only exact for `eps = 0`; regularized models are rejected.
    pub fn fast_score_update(&self, added: &CoefficientVector, probe: &CoefficientVector) -> Result<f64> {
        if self.epsilon != 0.0 {
            return Err(Error::RegularizedFastPath(self.epsilon));
        }
        let n = self.sample_count as f64;
        let k = self.kernel(probe, added)?;
        let p_probe = self.cd_value(probe)?;
        let p_added = self.cd_value(added)?;
        Ok((n + 1.0) * (p_probe / n - (k / n).powi(2) / (1.0 + p_added / n)))
    }
}

fn regularized_matrix(moment_sum: &[f64], m: usize, sample_count: usize, epsilon: f64) -> DMatrix<f64> {
    let n = sample_count as f64;
    let mut a = DMatrix::from_fn(m, m, |i, j| moment_sum[i * m + j] / n);
    for i in 0..m {
        a[(i, i)] += epsilon;
    }
    a
}

/// Row-major `sum_p v_p v_p^T`. Each row sums over `p` in input order, so the
/// result does not depend on the execution mode.
fn gram_sum(exec: Execution, vectors: &[Vec<f64>], m: usize) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = map_range(exec, m, |i| {
        let mut row = vec![0.0; m - i];
        for v in vectors {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for (slot, vj) in row.iter_mut().zip(&v[i..]) {
                *slot += vi * vj;
            }
        }
        row
    });
    let mut out = vec![0.0; m * m];
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, value) in row.into_iter().enumerate() {
            let j = i + offset;
            out[i * m + j] = value;
            out[j * m + i] = value;
        }
    }
    out
}
