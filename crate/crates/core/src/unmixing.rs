//! The two competing pipelines for instantaneously mixed series.
//!
//! Innovations orthogonalization fits a VAR to the observed `Y`, factorizes
//! the (mixed, correlated) residuals `η ≈ V D`, reads the mixing matrix off
//! the least-squares relation `η = ε Mᵀ` with `ε = V D`, and unmixes `Y`
//! with its inverse.
//!
//! Leakage correction applies the same factorization to `Y` itself and
//! returns `V D`, forcing zero lag-zero correlation between the outputs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::generators::MixingMatrix;
use crate::procrustes::{orthogonalize, OrthogonalFactorization};
use crate::types::TimeSeriesMatrix;
use crate::var::{fit_var, InnovationsMatrix, VarModel};

/// Inversion refuses estimated mixing matrices worse conditioned than this.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct UnmixResult {
    pub estimated_mixing: MixingMatrix,
    pub unmixed: TimeSeriesMatrix,
    /// VAR fitted to the observed series.
    pub model: VarModel,
    pub mixed_innovations: InnovationsMatrix,
    pub orthogonal_innovations: InnovationsMatrix,
    pub factorization: OrthogonalFactorization,
}

impl UnmixResult {
    /// Deviation of `diag(M̂)` from 1. The estimate is not renormalized, so
    /// this is a direct readout of estimation error on the diagonal.
    pub fn diagonal_deviation(&self) -> f64 {
        self.estimated_mixing.diagonal_deviation()
    }
}

pub fn innovations_orthogonalize(y: &TimeSeriesMatrix, q: usize) -> Result<UnmixResult> {
    let (model, eta) = fit_var(y, q)?;
    let factorization = orthogonalize(eta.matrix())?;
    let eps_io = InnovationsMatrix::new(factorization.product());
    let m = estimate_mixing(&eps_io, &eta, &factorization.d)?;
    let estimated_mixing = MixingMatrix::new(m)?;
    let unmixed = unmix(y, &estimated_mixing)?;
    Ok(UnmixResult {
        estimated_mixing,
        unmixed,
        model,
        mixed_innovations: eta,
        orthogonal_innovations: eps_io,
        factorization,
    })
}

/// Least-squares mixing estimate from `η_t = M ε_t`, i.e. `η = ε_io Mᵀ`
/// in time-in-rows form: `M̂ᵀ = (ε_ioᵀ ε_io)⁻¹ ε_ioᵀ η = D⁻¹ Vᵀ η`, because
/// `ε_ioᵀ ε_io = D²`. Returned untransposed so that `X̂_t = M̂⁻¹ Y_t`.
pub fn estimate_mixing(eps_io: &InnovationsMatrix, eta: &InnovationsMatrix, d_io: &DVector<f64>) -> Result<DMatrix<f64>> {
    let (n, p) = eps_io.matrix().shape();
    if eta.matrix().shape() != (n, p) || d_io.len() != p {
        return Err(Error::Dimension(format!(
            "innovations {:?} vs {:?} with {} diagonal entries",
            eps_io.matrix().shape(),
            eta.matrix().shape(),
            d_io.len()
        )));
    }
    if let Some(j) = d_io.iter().position(|d| *d == 0.0 || !d.is_finite()) {
        return Err(Error::Singular(format!("diagonal factor {} is zero", j + 1)));
    }
    // D⁻¹ Vᵀ η = D⁻² ε_ioᵀ η
    let mut mt = eps_io.matrix().transpose() * eta.matrix();
    for i in 0..p {
        mt.row_mut(i).scale_mut(1.0 / (d_io[i] * d_io[i]));
    }
    Ok(mt.transpose())
}

/// `X̂_t = M⁻¹ Y_t` for every sample.
pub fn unmix(y: &TimeSeriesMatrix, m: &MixingMatrix) -> Result<TimeSeriesMatrix> {
    if m.dim() != y.channels() {
        return Err(Error::Dimension(format!("{} x {} matrix for {} channels", m.dim(), m.dim(), y.channels())));
    }
    let cond = m.condition_number();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::Singular(format!("mixing matrix condition number {cond:e} exceeds {MAX_CONDITION:e}")));
    }
    let inv = m.inverse()?;
    let out = TimeSeriesMatrix::new(y.data() * inv.transpose())?;
    Ok(match y.sampling_rate() {
        Some(fs) => out.with_sampling_rate(fs),
        None => out,
    })
}

/// Replaces `y` by its nearest orthogonal-columns approximation `V D`.
pub fn leakage_correct(y: &TimeSeriesMatrix) -> Result<(TimeSeriesMatrix, OrthogonalFactorization)> {
    let f = orthogonalize(y.data())?;
    let out = TimeSeriesMatrix::new(f.product())?;
    let out = match y.sampling_rate() {
        Some(fs) => out.with_sampling_rate(fs),
        None => out,
    };
    Ok((out, f))
}
