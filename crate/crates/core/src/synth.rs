//! Seeded generators for the nominal-plus-ball-perturbation experiments.
//!
//! Every draw uses ChaCha8 seeded from the experiment seed, with one stream
//! per trajectory index. Generation is therefore reproducible bit for bit and
//! independent of how work is spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};

use crate::dataset::{DatasetEntry, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::parallel::{map_range, Execution};
use crate::projection::{chebyshev_extreme_points, reconstruct, CoefficientVector, Domain, SampledTrajectory};

/// Length of every generated coefficient vector.
pub const SYNTH_COEFFS: usize = 8;
/// Chebyshev extreme points used for the sampled form of generated curves.
pub const SYNTH_SAMPLE_POINTS: usize = 33;
/// Inlier perturbation radius.
pub const INLIER_RADIUS: f64 = 0.1;
/// Outlier perturbation radius, ten times the inlier radius.
pub const OUTLIER_RADIUS: f64 = 1.0;
/// Default amplitude of the extra harmonic in the second experiment.
pub const HARMONIC_OUTLIER_AMPLITUDE: f64 = 0.1;

const AUX_STREAM_BASE: u64 = 1 << 63;

/// Nominal coefficients `(0, 1/3, 1/3, 1/3, 0, ...)`.
pub fn nominal_coefficients() -> Vec<f64> {
    let mut c = vec![0.0; SYNTH_COEFFS];
    c[1..4].fill(1.0 / 3.0);
    c
}

/// Coordinates (0-based) that receive ball noise: the first four.
pub fn perturbed_coordinates() -> Vec<usize> {
    (0..4).collect()
}

/// Nominal trajectory plus uniform-ball noise on a subset of coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub nominal: Vec<f64>,
    pub perturbed: Vec<usize>,
    pub radius: f64,
    pub count: usize,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {}", self.radius)));
        }
        if self.count == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        if self.perturbed.is_empty() || self.perturbed.iter().any(|&k| k >= self.nominal.len()) {
            return Err(Error::InvalidParameter("perturbed coordinates out of range".into()));
        }
        Ok(())
    }

    /// Coefficient vectors of every generated trajectory.
    pub fn generate(&self, exec: Execution) -> Result<Vec<CoefficientVector>> {
        self.validate()?;
        map_range(exec, self.count, |i| self.draw(stream_rng(self.seed, i as u64))).into_iter().collect()
    }

    fn draw(&self, mut rng: ChaCha8Rng) -> Result<CoefficientVector> {
        let noise = sample_ball(self.perturbed.len(), self.radius, &mut rng);
        let mut c = self.nominal.clone();
        for (&k, e) in self.perturbed.iter().zip(noise) {
            c[k] += e;
        }
        CoefficientVector::new(c)
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw from the solid ball of `radius` in dimension `dim`:
/// normalized Gaussian direction times `radius * U^(1/dim)`.
pub fn sample_ball<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    assert!(dim >= 1, "ball dimension must be at least 1");
    let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u: f64 = rng.sample(Open01);
    let r = radius * u.powf(1.0 / dim as f64);
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v *= r / norm);
    }
    x
}

/// A generated reference database with its designated outlier.
#[derive(Debug, Clone)]
pub struct SyntheticExample {
    pub dataset: TrajectoryDataset,
    pub outlier: DatasetEntry,
    pub nominal: DatasetEntry,
}

/// Coefficients and their sampled form on the Chebyshev extreme points.
pub fn entry_from_coeffs(id: String, coeffs: CoefficientVector) -> Result<DatasetEntry> {
    let times = chebyshev_extreme_points(SYNTH_SAMPLE_POINTS);
    let values = times.iter().map(|&t| reconstruct(coeffs.as_slice(), t)).collect();
    let samples = SampledTrajectory::new(Some(id.clone()), Domain::CANONICAL, times, values)?;
    Ok(DatasetEntry { id: Some(id), samples: Some(samples), coeffs })
}

fn inlier_spec(count: usize, seed: u64) -> SynthSpec {
    SynthSpec {
        nominal: nominal_coefficients(),
        perturbed: perturbed_coordinates(),
        radius: INLIER_RADIUS,
        count,
        seed,
    }
}

fn inliers(count: usize, seed: u64, exec: Execution) -> Result<TrajectoryDataset> {
    let coeffs = inlier_spec(count, seed).generate(exec)?;
    let entries = coeffs
        .into_iter()
        .enumerate()
        .map(|(i, c)| entry_from_coeffs(format!("g{}", i + 1), c))
        .collect::<Result<Vec<_>>>()?;
    TrajectoryDataset::new(entries, Domain::CANONICAL)
}

fn nominal_entry() -> Result<DatasetEntry> {
    entry_from_coeffs("nominal".into(), CoefficientVector::new(nominal_coefficients())?)
}

/// `count` inliers `g0 + eps` with `eps` uniform in the radius-0.1 ball over
/// the first four coordinates, and one outlier drawn the same way with
/// radius 1.
pub fn generate_example1(count: usize, seed: u64) -> Result<SyntheticExample> {
    generate_example1_with(count, seed, Execution::Parallel)
}

pub fn generate_example1_with(count: usize, seed: u64, exec: Execution) -> Result<SyntheticExample> {
    let dataset = inliers(count, seed, exec)?;
    let outlier_spec = SynthSpec { radius: OUTLIER_RADIUS, count: 1, ..inlier_spec(1, seed) };
    let outlier = outlier_spec.draw(stream_rng(seed, AUX_STREAM_BASE))?;
    Ok(SyntheticExample { dataset, outlier: entry_from_coeffs("outlier".into(), outlier)?, nominal: nominal_entry()? })
}

/// Inliers as in [`generate_example1`]; the outlier is the nominal trajectory
/// plus `amplitude` on the fifth basis function, a harmonic absent from
/// every inlier.
pub fn generate_example2(count: usize, seed: u64) -> Result<SyntheticExample> {
    generate_example2_with(count, seed, HARMONIC_OUTLIER_AMPLITUDE, Execution::Parallel)
}

pub fn generate_example2_with(count: usize, seed: u64, amplitude: f64, exec: Execution) -> Result<SyntheticExample> {
    let dataset = inliers(count, seed, exec)?;
    let mut c = nominal_coefficients();
    c[4] += amplitude;
    let outlier = entry_from_coeffs("outlier".into(), CoefficientVector::new(c)?)?;
    Ok(SyntheticExample { dataset, outlier, nominal: nominal_entry()? })
}
