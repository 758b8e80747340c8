use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::pearson_correlation;
use crate::error::{Error, Result};
use crate::types::{CorrelationMatrix, TimeSeriesMatrix};

/// Fraction of samples dropped at each end before correlating envelopes.
pub const ENVELOPE_TRIM: f64 = 0.02;

/// Instantaneous amplitude, same shape as its source.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeSeries(DMatrix<f64>);

impl EnvelopeSeries {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.0.column(j).iter().copied().collect()
    }
}

/// Modulus of the discrete analytic signal, channel by channel.
///
/// Spectrum weights: bin 0 ×1, positive bins ×2, Nyquist bin (even N) ×1,
/// negative bins ×0.
pub fn hilbert_envelope(x: &TimeSeriesMatrix) -> Result<EnvelopeSeries> {
    let n = x.samples();
    if n < 4 {
        return Err(Error::InvalidArgument(format!("envelope needs at least 4 samples, got {n}")));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let half = n.div_ceil(2);

    let mut out = DMatrix::zeros(n, x.channels());
    let mut buf = vec![Complex64::default(); n];
    for c in 0..x.channels() {
        for (t, slot) in buf.iter_mut().enumerate() {
            *slot = Complex64::new(x.data()[(t, c)], 0.0);
        }
        fwd.process(&mut buf);
        for (k, z) in buf.iter_mut().enumerate() {
            let w = if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
                1.0
            } else if k < half {
                2.0
            } else {
                0.0
            };
            *z *= w / n as f64;
        }
        inv.process(&mut buf);
        for (t, z) in buf.iter().enumerate() {
            out[(t, c)] = z.norm();
        }
    }
    Ok(EnvelopeSeries(out))
}

/// Pearson correlation of Hilbert envelopes after trimming
/// [`ENVELOPE_TRIM`] of the samples at each end.
pub fn envelope_correlation(x: &TimeSeriesMatrix) -> Result<CorrelationMatrix> {
    let env = hilbert_envelope(x)?;
    let n = x.samples();
    let trim = (ENVELOPE_TRIM * n as f64).floor() as usize;
    let kept = env.0.rows(trim, n - 2 * trim).into_owned();
    pearson_correlation(&kept)
}
