//! Anomaly detection for trajectories (functions of time) with an
//! infinite-dimensional Christoffel function.
//!
//! Trajectories are embedded as Chebyshev coefficient vectors
//! ([`projection`]), polynomials in those coefficients of bounded total degree
//! `d` and harmonic degree `n` are enumerated in [`basis`], and [`model`]
//! builds the empirical moment matrix of a reference database. The
//! Christoffel-Darboux value `v(h)^T M^{-1} v(h)` of a probe `h` grows
//! polynomially in the degree on the support of the data and exponentially
//! off it, which [`scoring`] turns into inlier/outlier verdicts.
//!
//! ```
//! use christoffel_core::scoring::{calibrate, classify};
//! use christoffel_core::synth::generate_example1;
//! use christoffel_core::{ChristoffelModel, Execution, FitOptions, ThresholdMethod, Verdict};
//!
//! let ex = generate_example1(1000, 0)?;
//! let model = ChristoffelModel::fit(&ex.dataset, 4, 4, &FitOptions::with_epsilon(0.0))?;
//! let tau = calibrate(&model, &ex.dataset, ThresholdMethod::default(), Execution::Parallel)?;
//! let report = classify(&model, &tau, "outlier", &ex.outlier.coeffs)?;
//! assert_eq!(report.verdict, Verdict::Outlier);
//! # Ok::<(), christoffel_core::Error>(())
//! ```

pub mod basis;
pub mod dataset;
pub mod error;
pub mod io;
mod linalg;
pub mod model;
pub mod parallel;
pub mod projection;
pub mod scoring;
pub mod synth;

pub use basis::{enumerate_basis, eval_monomial, eval_monomial_vector, BasisEnumeration, MultiIndex};
pub use dataset::{DatasetEntry, TrajectoryDataset};
pub use error::{Error, ErrorClass, Result};
pub use model::{ChristoffelModel, CoordinateFrame, FitOptions, FrameChoice, Regularization};
pub use parallel::Execution;
pub use projection::{CoefficientVector, Domain, SampledTrajectory};
pub use scoring::{ScoreReport, Threshold, ThresholdMethod, Verdict};
