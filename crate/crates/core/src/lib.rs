//! Resolving instantaneous linear mixtures of multivariate time series.
//!
//! The main pipeline, [`unmixing::innovations_orthogonalize`], fits a vector
//! autoregression, orthogonalizes its residuals with an orthogonal (not
//! orthonormal) Procrustes factorization, estimates the mixing matrix from
//! the two sets of residuals and inverts it. The comparator,
//! [`unmixing::leakage_correct`], orthogonalizes the signals directly.
//!
//! [`generators`] produces the synthetic families used to compare the two,
//! [`connectivity`] the measures used to judge them, and [`harness`] the
//! reproducible experiments.

pub mod connectivity;
pub mod error;
pub mod generators;
pub mod harness;
pub mod io;
pub mod procrustes;
pub mod types;
pub mod unmixing;
pub mod var;

pub use error::{Error, Result};
pub use generators::MixingMatrix;
pub use types::{CorrelationMatrix, EpochedSeries, SeedSpec, TimeSeriesMatrix};
pub use var::{InnovationsMatrix, VarModel};
