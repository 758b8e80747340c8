//! Orthogonal-but-not-orthonormal Procrustes factorization `A ≈ V D`.
//!
//! `V` has orthonormal columns and `D` is diagonal. The solver alternates
//! two exact partial minimizations of `‖A − V D‖²_F`:
//!
//! 1. for fixed `D`, `V = L Rᵀ` from the thin SVD `A D = L Λ Rᵀ`;
//! 2. for fixed `V`, `D = diag(Vᵀ A)`.
//!
//! starting from `D = I`. Each half-step cannot increase the objective, and
//! after step 2 the objective equals `‖A‖²_F − Σ D_ii²`.
//!
//! Column i of `V` stays paired with column i of `A`; there is no sign or
//! permutation freedom left once `D` is made nonnegative.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalFactorization {
    /// `N × p` with orthonormal columns.
    pub v: DMatrix<f64>,
    /// Nonnegative diagonal of `D`.
    pub d: DVector<f64>,
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    /// Objective after every iteration.
    pub objective_history: Vec<f64>,
    pub warnings: Vec<String>,
}

impl OrthogonalFactorization {
    /// `V D`, the orthogonal-columns approximation of the input.
    pub fn product(&self) -> DMatrix<f64> {
        let mut out = self.v.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col *= self.d[j];
        }
        out
    }

    /// `max |VᵀV − I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let p = self.v.ncols();
        (self.v.transpose() * &self.v - DMatrix::<f64>::identity(p, p)).amax()
    }
}

/// Errors on zero or linearly dependent columns and on `N < p`.
pub fn check_full_rank(a: &DMatrix<f64>) -> Result<()> {
    let (n, p) = a.shape();
    if p == 0 {
        return Err(Error::Empty("matrix".into()));
    }
    if n < p {
        return Err(Error::Dimension(format!("need at least as many rows as columns, got {n} x {p}")));
    }
    if let Some(j) = a.column_iter().position(|c| c.amax() == 0.0) {
        return Err(Error::RankDeficient(format!("column {} is identically zero", j + 1)));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let sv = a.clone().singular_values();
    if sv.min() <= 1e-12 * sv.max() {
        return Err(Error::RankDeficient(format!(
            "columns are linearly dependent (singular values {:e} .. {:e})",
            sv.min(),
            sv.max()
        )));
    }
    Ok(())
}

fn scale_columns(a: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let mut out = a.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= d[j];
    }
    out
}

/// Factorizes `a` (N × p, N > p, full column rank).
///
/// Stops when `max_i |ΔD_ii| <= tol · max_i |D_ii|` or after `max_iter`
/// iterations; in the latter case `converged` is false and a warning is
/// attached.
pub fn orthogonal_procrustes(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<OrthogonalFactorization> {
    check_full_rank(a)?;
    let p = a.ncols();
    let norm_sq = a.norm_squared();
    let mut d = DVector::from_element(p, 1.0);
    let mut v = DMatrix::zeros(a.nrows(), p);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let svd = SVD::new(scale_columns(a, &d), true, true);
        let (l, rt) = match (svd.u, svd.v_t) {
            (Some(l), Some(rt)) => (l, rt),
            _ => return Err(Error::Singular("SVD did not produce singular vectors".into())),
        };
        v = l * rt;
        let next = DVector::from_iterator(p, (0..p).map(|j| v.column(j).dot(&a.column(j))));
        let objective = norm_sq - next.norm_squared();
        if let Some(prev) = history.last() {
            debug_assert!(
                objective <= prev + 1e-10 * norm_sq,
                "objective increased from {prev} to {objective}"
            );
        }
        history.push(objective);
        let change = (&next - &d).amax();
        d = next;
        if change <= tol * d.amax() {
            converged = true;
            break;
        }
    }

    for j in 0..p {
        if d[j] < 0.0 {
            d[j] = -d[j];
            v.column_mut(j).neg_mut();
        }
    }

    let mut f = OrthogonalFactorization {
        v,
        d,
        iterations,
        final_objective: 0.0,
        converged,
        objective_history: history,
        warnings: Vec::new(),
    };
    f.final_objective = procrustes_objective(a, &f)?;
    if !converged {
        f.warnings.push(format!(
            "orthogonal Procrustes did not converge within {max_iter} iterations"
        ));
    }
    Ok(f)
}

/// `orthogonal_procrustes` with the default tolerance and iteration cap.
pub fn orthogonalize(a: &DMatrix<f64>) -> Result<OrthogonalFactorization> {
    orthogonal_procrustes(a, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)
}

/// `tr[(A − V D)ᵀ (A − V D)]`.
pub fn procrustes_objective(a: &DMatrix<f64>, f: &OrthogonalFactorization) -> Result<f64> {
    if a.shape() != f.v.shape() || f.d.len() != a.ncols() {
        return Err(Error::Dimension(format!(
            "matrix {:?} against factorization {:?}",
            a.shape(),
            f.v.shape()
        )));
    }
    Ok((a - f.product()).norm_squared())
}
