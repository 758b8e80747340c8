#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use unmixio::connectivity::{default_icoh_grid, icoh, SpectralConnectivity};
use unmixio::generators::gen_var5;
use unmixio::var::fit_var;
use unmixio::{SeedSpec, TimeSeriesMatrix};

pub const SAMPLES: usize = 25600;

/// Reference lag-zero correlations of the five-node network.
pub const TABLE1: [[f64; 5]; 5] = [
    [1.0, -0.83132, -0.40895, -0.41049, -0.40963],
    [-0.83132, 1.0, 0.396376, 0.398864, 0.398153],
    [-0.40895, 0.396376, 1.0, 0.872185, 0.87103],
    [-0.41049, 0.398864, 0.872185, 1.0, 0.869128],
    [-0.40963, 0.398153, 0.87103, 0.869128, 1.0],
];

/// Reference mixing estimate for the 0.7-mixed network (the table3b layout).
pub const TABLE3B: [[f64; 5]; 5] = [
    [1.000, 0.700, 0.699, 0.701, 0.700],
    [0.700, 1.000, 0.698, 0.700, 0.702],
    [0.699, 0.698, 1.000, 0.700, 0.699],
    [0.701, 0.700, 0.700, 1.000, 0.701],
    [0.700, 0.702, 0.699, 0.701, 1.000],
];

/// Directed edges of the five-node network as (from, to), 0-based.
pub const EDGES: [(usize, usize); 5] = [(0, 1), (1, 0), (1, 2), (1, 3), (1, 4)];

pub fn is_edge(from: usize, to: usize) -> bool {
    EDGES.contains(&(from, to))
}

pub fn var5() -> TimeSeriesMatrix {
    gen_var5(SAMPLES, SeedSpec::default()).unwrap()
}

pub fn var_icoh(x: &TimeSeriesMatrix, q: usize) -> SpectralConnectivity {
    let fs = x.sampling_rate().unwrap_or(256.0);
    let (model, _) = fit_var(x, q).unwrap();
    icoh(&model, &default_icoh_grid(fs), fs).unwrap()
}

/// Largest max-over-frequency iCoh among true edges' complement, and the
/// smallest among the edges.
pub fn icoh_pattern(s: &SpectralConnectivity) -> (f64, f64) {
    let peak = s.max_over_frequency();
    let mut weakest_edge = f64::INFINITY;
    let mut strongest_absent = 0.0f64;
    for to in 0..5 {
        for from in 0..5 {
            if to == from {
                continue;
            }
            if is_edge(from, to) {
                weakest_edge = weakest_edge.min(peak[(to, from)]);
            } else {
                strongest_absent = strongest_absent.max(peak[(to, from)]);
            }
        }
    }
    (weakest_edge, strongest_absent)
}

pub struct OracleSolution {
    pub d: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Alternating minimization of `‖A − V D‖²_F` without any SVD.
///
/// With the Householder factorization `A = Q R`, the optimal `V` for fixed
/// `D` is `Q U` where `U` is the orthogonal polar factor of `R D`, found by
/// the scaled Newton iteration `X ← (γX + (γX)⁻ᵀ) / 2`. Then
/// `D = diag(Uᵀ R)`. Starts from the column norms.
pub fn procrustes_oracle(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> OracleSolution {
    let qr = a.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let p = r.ncols();
    let mut d = DVector::from_fn(p, |i, _| a.column(i).norm());
    let mut u = DMatrix::identity(p, p);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        u = polar_factor(&(&r * DMatrix::from_diagonal(&d)));
        let next = (u.transpose() * &r).diagonal();
        let change = (&next - &d).amax();
        d = next;
        if change <= tol * d.amax() {
            break;
        }
    }
    let v = q * u;
    let objective = (a - v * DMatrix::from_diagonal(&d)).norm_squared();
    OracleSolution { d, objective, iterations }
}

fn polar_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut x = m.clone();
    for _ in 0..100 {
        let inv = x.clone().try_inverse().expect("nonsingular polar input");
        let gamma = (inv.norm() / x.norm()).sqrt();
        let next = (&x * gamma + inv.transpose() / gamma) * 0.5;
        let done = (&next - &x).amax() <= 1e-15;
        x = next;
        if done {
            break;
        }
    }
    x
}

fn inverse_sqrt(h: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(h.clone());
    let s = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&s) * eig.eigenvectors.transpose()
}

/// Symmetric orthogonalization `V = A (AᵀA)^{-1/2}` with `D = diag(VᵀA)`.
pub fn naive_objective(a: &DMatrix<f64>) -> f64 {
    let v = a * inverse_sqrt(&(a.transpose() * a));
    let d = DMatrix::from_diagonal(&(v.transpose() * a).diagonal());
    (a - v * d).norm_squared()
}

/// Instance `k` of the Procrustes test family: N ≤ 500, p ≤ 8, cycling
/// through independent, correlated and badly scaled columns. Normalized to
/// unit Frobenius norm.
pub fn procrustes_instance(k: u64) -> DMatrix<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_0000 + k);
    let p = rng.random_range(1..=8usize);
    let n = rng.random_range(p + 1..=500usize);
    let mut a = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    match k % 3 {
        1 => {
            let mut c = DMatrix::<f64>::identity(p, p);
            for i in 0..p {
                for j in i + 1..p {
                    c[(i, j)] = rng.random_range(-1.5..1.5);
                }
            }
            a *= c;
        }
        2 => {
            for mut col in a.column_iter_mut() {
                col *= 10f64.powf(rng.random_range(-2.0..2.0));
            }
        }
        _ => {}
    }
    let norm = a.norm();
    a / norm
}
