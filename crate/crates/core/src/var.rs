//! Least-squares vector autoregression: estimation, AIC order selection,
//! residual extraction and the frequency-domain transfer matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generators::MixingMatrix;
use crate::types::TimeSeriesMatrix;

/// A fitted (or exact) VAR(q): coefficient matrices for lags 1..=q, with
/// entry `(i, j)` the effect of channel j on channel i, plus the
/// innovation covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct VarModel {
    coefficients: Vec<DMatrix<f64>>,
    innovation_covariance: DMatrix<f64>,
    n_effective: usize,
}

impl VarModel {
    pub fn new(coefficients: Vec<DMatrix<f64>>, innovation_covariance: DMatrix<f64>, n_effective: usize) -> Result<Self> {
        let p = innovation_covariance.nrows();
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("VAR order must be >= 1".into()));
        }
        if !innovation_covariance.is_square() || coefficients.iter().any(|a| a.shape() != (p, p)) {
            return Err(Error::Dimension(format!("VAR matrices must all be {p} x {p}")));
        }
        let asym = (&innovation_covariance - innovation_covariance.transpose()).amax();
        if asym > 1e-10 * innovation_covariance.amax().max(1.0) {
            return Err(Error::InvalidArgument(format!("innovation covariance is not symmetric ({asym:e})")));
        }
        Ok(Self {
            coefficients,
            innovation_covariance,
            n_effective,
        })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn channels(&self) -> usize {
        self.innovation_covariance.nrows()
    }

    pub fn coefficients(&self) -> &[DMatrix<f64>] {
        &self.coefficients
    }

    pub fn innovation_covariance(&self) -> &DMatrix<f64> {
        &self.innovation_covariance
    }

    pub fn n_effective(&self) -> usize {
        self.n_effective
    }

    /// The model of `Y_t = M X_t` when `self` describes `X_t`:
    /// `B_k = M A_k M⁻¹` and `S_ηη = M S_εε Mᵀ`.
    pub fn transported(&self, m: &MixingMatrix) -> Result<VarModel> {
        if m.dim() != self.channels() {
            return Err(Error::Dimension("mixing matrix does not match model".into()));
        }
        let inv = m.inverse()?;
        let mm = m.matrix();
        let coefficients = self.coefficients.iter().map(|a| mm * a * &inv).collect();
        let cov = mm * &self.innovation_covariance * mm.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        VarModel::new(coefficients, cov, self.n_effective)
    }
}

/// One-step-ahead residuals; row r belongs to time sample `q + r` (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct InnovationsMatrix(DMatrix<f64>);

impl InnovationsMatrix {
    pub fn new(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn channels(&self) -> usize {
        self.0.ncols()
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FitOptions {
    /// Subtract each channel's mean before fitting. Off by default: the
    /// model has no intercept and inputs are taken as zero-mean.
    pub demean: bool,
}

/// `(1/rows) EᵀE`.
pub fn innovation_covariance(e: &InnovationsMatrix) -> DMatrix<f64> {
    let m = e.matrix();
    let rows = m.nrows().max(1) as f64;
    let c = m.transpose() * m / rows;
    (&c + c.transpose()) * 0.5
}

pub fn fit_var(y: &TimeSeriesMatrix, q: usize) -> Result<(VarModel, InnovationsMatrix)> {
    fit_var_with(y, q, FitOptions::default())
}

pub fn fit_var_with(y: &TimeSeriesMatrix, q: usize, opts: FitOptions) -> Result<(VarModel, InnovationsMatrix)> {
    let data = prepare(y, opts);
    fit_window(&data, q, q)
}

fn prepare(y: &TimeSeriesMatrix, opts: FitOptions) -> DMatrix<f64> {
    let mut data = y.data().clone();
    if opts.demean {
        for mut col in data.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
    }
    data
}

/// OLS fit of a VAR(q) predicting rows `start..N` (0-based), `start >= q`.
/// Solved through a Householder QR of the lagged regressor matrix.
fn fit_window(data: &DMatrix<f64>, q: usize, start: usize) -> Result<(VarModel, InnovationsMatrix)> {
    let (n, p) = data.shape();
    if q == 0 {
        return Err(Error::InvalidArgument("VAR order must be >= 1".into()));
    }
    debug_assert!(start >= q);
    let n_eff = n.saturating_sub(start);
    let k = p * q;
    if n_eff <= k {
        return Err(Error::InvalidArgument(format!(
            "order {q} needs more than {k} usable samples, only {n_eff} available from {n}"
        )));
    }

    let mut z = DMatrix::<f64>::zeros(n_eff, k);
    for lag in 1..=q {
        z.view_mut((0, (lag - 1) * p), (n_eff, p))
            .copy_from(&data.rows(start - lag, n_eff));
    }
    let targets = data.rows(start, n_eff).into_owned();

    let qr = z.clone().qr();
    let r = qr.r();
    let rmax = r.diagonal().amax();
    for c in 0..k {
        if !(r[(c, c)].abs() > 1e-10 * rmax) {
            return Err(Error::RankDeficient(format!(
                "lagged regressor for channel {} at lag {} is linearly dependent on the others",
                c % p + 1,
                c / p + 1
            )));
        }
    }
    let mut qty = targets.clone();
    qr.q_tr_mul(&mut qty);
    let top = qty.rows(0, k).into_owned();
    let beta = r
        .solve_upper_triangular(&top)
        .ok_or_else(|| Error::RankDeficient("triangular solve failed".into()))?;

    let resid = &targets - &z * &beta;
    let coefficients = (0..q)
        .map(|lag| beta.rows(lag * p, p).transpose())
        .collect();
    let innovations = InnovationsMatrix(resid);
    let cov = innovation_covariance(&innovations);
    Ok((VarModel::new(coefficients, cov, n_eff)?, innovations))
}

/// `ln det` of a symmetric positive-definite matrix via Cholesky.
pub fn log_det_spd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("residual covariance is not positive definite".into()))?;
    Ok(chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum())
}

/// AIC order selection over `1..=q_max`. Every candidate is fitted on the
/// same targets (samples `q_max..N`), so
/// `AIC(q) = N_eff ln det Σ̂_q + 2 q p²` is comparable across q.
/// Returns the best order (ties go to the smaller one) and all scores.
pub fn select_order_aic(y: &TimeSeriesMatrix, q_max: usize) -> Result<(usize, Vec<f64>)> {
    select_order_aic_with(y, q_max, FitOptions::default())
}

pub fn select_order_aic_with(y: &TimeSeriesMatrix, q_max: usize, opts: FitOptions) -> Result<(usize, Vec<f64>)> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("maximum order must be >= 1".into()));
    }
    let data = prepare(y, opts);
    let p = data.ncols() as f64;
    let mut scores = Vec::with_capacity(q_max);
    for q in 1..=q_max {
        let (model, _) = fit_window(&data, q, q_max)?;
        let n_eff = model.n_effective() as f64;
        let ld = log_det_spd(model.innovation_covariance())?;
        scores.push(n_eff * ld + 2.0 * q as f64 * p * p);
    }
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = i;
        }
    }
    Ok((best + 1, scores))
}

/// `Ā(f) = I − Σ_k A_k exp(−i 2π f k / f_s)` at each frequency.
pub fn var_transfer(model: &VarModel, freqs_hz: &[f64], sampling_rate: f64) -> Result<Vec<DMatrix<Complex64>>> {
    if !(sampling_rate > 0.0) {
        return Err(Error::InvalidArgument(format!("sampling rate must be positive, got {sampling_rate}")));
    }
    let nyquist = sampling_rate / 2.0;
    if let Some(f) = freqs_hz.iter().find(|f| !(**f >= 0.0 && **f <= nyquist)) {
        return Err(Error::InvalidArgument(format!("frequency {f} Hz outside [0, {nyquist}]")));
    }
    let p = model.channels();
    Ok(freqs_hz
        .iter()
        .map(|&f| {
            let mut abar = DMatrix::<Complex64>::identity(p, p);
            for (k, a) in model.coefficients().iter().enumerate() {
                let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * (k + 1) as f64 / sampling_rate);
                for i in 0..p {
                    for j in 0..p {
                        abar[(i, j)] -= phase * a[(i, j)];
                    }
                }
            }
            abar
        })
        .collect())
}
