use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{SpectralConnectivity, SpectralKind};
use crate::error::{Error, Result};
use crate::types::EpochedSeries;
use crate::var::{var_transfer, VarModel};

/// Squared coherence from cross-spectra averaged over epochs.
///
/// Each epoch and channel gets a rectangular-window DFT; bins whose
/// frequency `k f_s / L` falls inside `freq_range_hz` (inclusive) are kept.
pub fn coherence_squared(e: &EpochedSeries, freq_range_hz: (f64, f64)) -> Result<SpectralConnectivity> {
    if e.n_epochs() < 2 {
        return Err(Error::InvalidArgument(
            "coherence needs at least two epochs; a single epoch gives 1 everywhere".into(),
        ));
    }
    let len = e.epoch_length();
    if len < 2 {
        return Err(Error::InvalidArgument("epochs need at least two samples".into()));
    }
    let p = e.channels();
    let fs = e.sampling_rate();
    let (lo, hi) = freq_range_hz;
    let bins: Vec<usize> = (0..=len / 2)
        .filter(|&k| {
            let f = k as f64 * fs / len as f64;
            f >= lo && f <= hi
        })
        .collect();
    if bins.is_empty() {
        return Err(Error::InvalidArgument(format!("no DFT bin inside [{lo}, {hi}] Hz")));
    }

    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);
    let mut cross = vec![DMatrix::<Complex64>::zeros(p, p); bins.len()];
    let mut spectra = vec![vec![Complex64::default(); len]; p];
    for epoch in e.epochs() {
        for (c, buf) in spectra.iter_mut().enumerate() {
            for (t, slot) in buf.iter_mut().enumerate() {
                *slot = Complex64::new(epoch[(t, c)], 0.0);
            }
            fft.process(buf);
        }
        for (b, &k) in bins.iter().enumerate() {
            let s = &mut cross[b];
            for i in 0..p {
                for j in 0..p {
                    s[(i, j)] += spectra[i][k] * spectra[j][k].conj();
                }
            }
        }
    }

    let values = cross
        .iter()
        .map(|s| {
            DMatrix::from_fn(p, p, |i, j| {
                if i == j {
                    return 1.0;
                }
                let denom = s[(i, i)].re * s[(j, j)].re;
                if denom > 0.0 {
                    (s[(i, j)].norm_sqr() / denom).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
        })
        .collect();
    Ok(SpectralConnectivity {
        kind: SpectralKind::CoherenceSquared,
        frequencies: bins.iter().map(|&k| k as f64 * fs / len as f64).collect(),
        values,
    })
}

/// Integer frequencies from 1 Hz up to just below Nyquist.
pub fn default_icoh_grid(sampling_rate: f64) -> Vec<f64> {
    let top = (sampling_rate / 2.0).ceil() as usize;
    (1..top).map(|f| f as f64).collect()
}

/// Isolated effective coherence from a VAR model.
///
/// With `P = S⁻¹` the innovation precision and `Ā(f)` from [`var_transfer`],
/// `iCoh_{i←j}(f) = P_ii |Ā_ij|² / (P_ii |Ā_ij|² + P_jj |Ā_jj|²)`.
pub fn icoh(model: &VarModel, freqs_hz: &[f64], sampling_rate: f64) -> Result<SpectralConnectivity> {
    let precision = model
        .innovation_covariance()
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Singular("innovation covariance is not invertible".into()))?;
    let p = model.channels();
    let transfer = var_transfer(model, freqs_hz, sampling_rate)?;
    let values = transfer
        .iter()
        .map(|abar| {
            DMatrix::from_fn(p, p, |i, j| {
                if i == j {
                    return 0.0;
                }
                let num = precision[(i, i)] * abar[(i, j)].norm_sqr();
                let den = num + precision[(j, j)] * abar[(j, j)].norm_sqr();
                if den > 0.0 {
                    (num / den).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
        })
        .collect();
    Ok(SpectralConnectivity {
        kind: SpectralKind::Icoh,
        frequencies: freqs_hz.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::Noise;
    use crate::types::SeedSpec;

    fn noise_epochs(epochs: usize, len: usize, p: usize, seed: u64) -> EpochedSeries {
        let mut n = Noise::new(SeedSpec::new(seed, 0));
        let e = (0..epochs).map(|_| DMatrix::from_fn(len, p, |_, _| n.gaussian())).collect();
        EpochedSeries::new(e, 256.0).unwrap()
    }

    #[test]
    fn single_epoch_rejected() {
        assert!(coherence_squared(&noise_epochs(1, 64, 2, 1), (1.0, 30.0)).is_err());
    }

    #[test]
    fn duplicated_channel_is_fully_coherent() {
        let base = noise_epochs(10, 64, 1, 2);
        let dup = base.epochs().iter().map(|e| DMatrix::from_fn(64, 2, |t, _| e[(t, 0)])).collect();
        let c = coherence_squared(&EpochedSeries::new(dup, 256.0).unwrap(), (0.0, 128.0)).unwrap();
        for m in &c.values {
            assert!((m[(0, 1)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn white_noise_coherence_bias() {
        // |coh|² of independent channels over K epochs is Beta(1, K - 1), mean 1/K
        let c = coherence_squared(&noise_epochs(100, 256, 2, 3), (1.0, 127.0)).unwrap();
        let curve = c.curve(0, 1);
        let mean = curve.iter().sum::<f64>() / curve.len() as f64;
        assert!((mean - 0.01).abs() < 0.003, "{mean}");
        let band = c.restricted(1.0, 30.0).curve(0, 1);
        assert!(band.iter().all(|v| *v < 0.05), "{band:?}");
    }

    #[test]
    fn coherence_grid_and_scale_invariance() {
        let e = noise_epochs(20, 256, 2, 4);
        let c = coherence_squared(&e, (1.0, 30.0)).unwrap();
        assert_eq!(c.frequencies.len(), 30);
        assert_eq!(c.frequencies[0], 1.0);
        let scaled = e.epochs().iter().map(|m| {
            let mut m = m.clone();
            m.column_mut(1).scale_mut(2.0);
            m
        });
        let c2 = coherence_squared(&EpochedSeries::new(scaled.collect(), 256.0).unwrap(), (1.0, 30.0)).unwrap();
        assert!(c.max_abs_difference(&c2).unwrap() < 1e-12);
    }

    #[test]
    fn icoh_zero_for_diagonal_var() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, -0.3, 0.2]));
        let model = VarModel::new(vec![a], DMatrix::identity(3, 3) * 2.0, 0).unwrap();
        let ic = icoh(&model, &default_icoh_grid(256.0), 256.0).unwrap();
        assert_eq!(ic.frequencies.len(), 127);
        assert!(ic.values.iter().all(|m| m.amax() == 0.0));
    }

    #[test]
    fn icoh_matches_hand_evaluation() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.3, 0.5]);
        let model = VarModel::new(vec![a], DMatrix::identity(2, 2), 0).unwrap();
        for f in [5.0, 32.0, 64.0, 100.0] {
            let ic = icoh(&model, &[f], 256.0).unwrap();
            let theta = 2.0 * std::f64::consts::PI * f / 256.0;
            // Ā_21 = -0.3 e^{-iθ}, Ā_22 = 1 - 0.5 e^{-iθ}
            let a21 = 0.09;
            let a22 = 1.25 - theta.cos();
            let expected = a21 / (a21 + a22);
            assert!((ic.values[0][(1, 0)] - expected).abs() < 1e-14);
            assert_eq!(ic.values[0][(0, 1)], 0.0);
        }
    }

    #[test]
    fn icoh_rejects_singular_covariance() {
        let model = VarModel::new(vec![DMatrix::zeros(2, 2)], DMatrix::from_element(2, 2, 1.0), 0).unwrap();
        assert!(matches!(icoh(&model, &[1.0], 256.0), Err(Error::Singular(_))));
    }
}
