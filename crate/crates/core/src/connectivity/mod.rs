//! Connectivity measures used to judge the pipelines: lag-zero correlation,
//! epoch-averaged squared coherence, isolated effective coherence (iCoh)
//! and envelope correlation.

mod envelope;
mod spectral;

pub use envelope::{envelope_correlation, hilbert_envelope, EnvelopeSeries, ENVELOPE_TRIM};
pub use spectral::{coherence_squared, default_icoh_grid, icoh};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::{CorrelationMatrix, TimeSeriesMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralKind {
    CoherenceSquared,
    Icoh,
}

/// Per-frequency `p × p` matrices with values in [0, 1].
///
/// For iCoh, entry `(i, j)` is the flow `j → i` (column sender, row
/// receiver) and the diagonal is stored as 0. Coherence is symmetric with
/// unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralConnectivity {
    pub kind: SpectralKind,
    pub frequencies: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
}

impl SpectralConnectivity {
    pub fn channels(&self) -> usize {
        self.values.first().map_or(0, |m| m.nrows())
    }

    /// Values of `(to, from)` across frequency (0-based channels).
    pub fn curve(&self, to: usize, from: usize) -> Vec<f64> {
        self.values.iter().map(|m| m[(to, from)]).collect()
    }

    /// Entry-wise maximum over frequency.
    pub fn max_over_frequency(&self) -> DMatrix<f64> {
        let p = self.channels();
        let mut out = DMatrix::zeros(p, p);
        for m in &self.values {
            out.zip_apply(m, |a: &mut f64, b| *a = a.max(b));
        }
        out
    }

    /// Largest absolute difference against another result on the same grid.
    pub fn max_abs_difference(&self, other: &SpectralConnectivity) -> Result<f64> {
        if self.frequencies != other.frequencies || self.channels() != other.channels() {
            return Err(Error::Dimension("spectral results are on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max))
    }

    /// Restricts to frequencies within `[lo, hi]`.
    pub fn restricted(&self, lo: f64, hi: f64) -> SpectralConnectivity {
        let keep: Vec<usize> = (0..self.frequencies.len())
            .filter(|&k| self.frequencies[k] >= lo && self.frequencies[k] <= hi)
            .collect();
        SpectralConnectivity {
            kind: self.kind,
            frequencies: keep.iter().map(|&k| self.frequencies[k]).collect(),
            values: keep.iter().map(|&k| self.values[k].clone()).collect(),
        }
    }
}

/// Lag-zero correlation `S_ij / sqrt(S_ii S_jj)` of the second-moment
/// matrix `S = XᵀX / N_T`, taken about zero: the series are zero-mean by
/// model assumption, and this keeps exactly orthogonal columns at exactly
/// zero correlation.
pub fn lag_zero_correlation(x: &TimeSeriesMatrix) -> Result<CorrelationMatrix> {
    let s = x.data().transpose() * x.data() / x.samples() as f64;
    CorrelationMatrix::from_covariance(&s)
}

/// Ordinary Pearson correlation (channel means removed).
pub fn pearson_correlation(x: &DMatrix<f64>) -> Result<CorrelationMatrix> {
    let mut c = x.clone();
    for mut col in c.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let s = c.transpose() * &c / x.nrows().max(1) as f64;
    CorrelationMatrix::from_covariance(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::Noise;
    use crate::types::SeedSpec;

    #[test]
    fn duplicated_channel_correlates_exactly() {
        let mut noise = Noise::new(SeedSpec::new(1, 0));
        let col: Vec<f64> = (0..500).map(|_| noise.gaussian()).collect();
        let x = DMatrix::from_fn(500, 3, |i, j| if j == 2 { noise.gaussian() } else { col[i] });
        let r = lag_zero_correlation(&TimeSeriesMatrix::new(x).unwrap()).unwrap();
        assert!((r.get(0, 1) - 1.0).abs() < 1e-14);
        assert!(r.get(0, 2).abs() < 0.2);
    }

    #[test]
    fn zero_variance_channel_named() {
        let x = DMatrix::from_fn(10, 2, |i, j| if j == 0 { i as f64 } else { 0.0 });
        let err = lag_zero_correlation(&TimeSeriesMatrix::new(x).unwrap()).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance { channel: 2 }));
    }

    #[test]
    fn pearson_ignores_offsets() {
        let x = DMatrix::from_fn(50, 2, |i, j| (i as f64).sin() + if j == 1 { 10.0 } else { 0.0 });
        let r = pearson_correlation(&x).unwrap();
        assert!((r.get(0, 1) - 1.0).abs() < 1e-12);
    }
}
