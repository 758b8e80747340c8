mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;

use unmixio::connectivity::{coherence_squared, icoh, lag_zero_correlation};
use unmixio::generators::{apply_mixing, spectral_radius, uniform_mixing, MixingMatrix, VarSpec, TOY_LAG1, TOY_LAG2};
use unmixio::procrustes::orthogonalize;
use unmixio::unmixing::{innovations_orthogonalize, leakage_correct};
use unmixio::var::{fit_var, VarModel};
use unmixio::{EpochedSeries, SeedSpec, TimeSeriesMatrix};

const N: usize = 25600;

/// Scales lag k by `α^k`, which scales every companion eigenvalue by `α`.
fn stabilized(mut coefs: Vec<DMatrix<f64>>, max_radius: f64) -> Vec<DMatrix<f64>> {
    let rho = spectral_radius(&coefs);
    if rho > max_radius {
        let alpha = max_radius / rho;
        for (k, a) in coefs.iter_mut().enumerate() {
            *a *= alpha.powi(k as i32 + 1);
        }
    }
    coefs
}

/// Symmetric positive-definite with unit diagonal: `G Gᵀ + I` rescaled.
fn spd_mixing(p: usize, g: &[f64]) -> MixingMatrix {
    let g = DMatrix::from_row_slice(p, p, g);
    let a = &g * g.transpose() + DMatrix::<f64>::identity(p, p);
    let mut m = DMatrix::from_fn(p, p, |i, j| a[(i, j)] / (a[(i, i)] * a[(j, j)]).sqrt());
    for i in 0..p {
        m[(i, i)] = 1.0;
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
    MixingMatrix::synthetic(m).unwrap()
}

#[derive(Debug, Clone)]
struct RandomVar {
    p: usize,
    coefs: Vec<f64>,
    order: usize,
    sd: Vec<f64>,
    mix: Vec<f64>,
    seed: u64,
}

fn random_var() -> impl Strategy<Value = RandomVar> {
    (2usize..=6, 1usize..=2).prop_flat_map(|(p, order)| {
        (
            prop::collection::vec(-0.5f64..0.5, order * p * p),
            prop::collection::vec(0.7f64..1.4, p),
            prop::collection::vec(-0.8f64..0.8, p * p),
            any::<u64>(),
        )
            .prop_map(move |(coefs, sd, mix, seed)| RandomVar { p, coefs, order, sd, mix, seed })
    })
}

impl RandomVar {
    fn spec(&self) -> VarSpec {
        let pp = self.p * self.p;
        let coefs = (0..self.order)
            .map(|k| DMatrix::from_row_slice(self.p, self.p, &self.coefs[k * pp..(k + 1) * pp]))
            .collect();
        VarSpec::new(stabilized(coefs, 0.8), self.sd.clone(), 1000).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn unmixing_recovers_random_mixtures(v in random_var()) {
        let spec = v.spec();
        let x = spec.simulate(N, SeedSpec::new(v.seed, 0)).unwrap();

        let (fit, _) = fit_var(&x, v.order).unwrap();
        for (a, truth) in fit.coefficients().iter().zip(spec.coefficients()) {
            prop_assert!((a - truth).amax() <= 0.05, "refit error {}", (a - truth).amax());
        }

        let m = spd_mixing(v.p, &v.mix);
        let y = apply_mixing(&x, &m).unwrap();
        let res = innovations_orthogonalize(&y, v.order).unwrap();
        let err = (res.estimated_mixing.matrix() - m.matrix()).amax();
        prop_assert!(err <= 0.02, "M̂ error {err}\nM = {}M̂ = {}", m.matrix(), res.estimated_mixing.matrix());

        // X̂_t = M̂⁻¹ Y_t, checked as M̂ X̂_t = Y_t
        let back = res.unmixed.data() * res.estimated_mixing.matrix().transpose();
        prop_assert!((back - y.data()).amax() <= 1e-10 * y.data().amax());
    }

    #[test]
    fn uniform_mixing_is_valid(p in 1usize..=16, c in -0.9f64..0.9) {
        prop_assume!(p == 1 || (1.0 + (p as f64 - 1.0) * c).abs() > 1e-6);
        let m = uniform_mixing(p, c).unwrap();
        let a = m.matrix();
        prop_assert_eq!(a, &a.transpose());
        prop_assert!(a.diagonal().iter().all(|d| *d == 1.0));
        let inv = m.inverse().unwrap();
        let resid = (a * inv - DMatrix::<f64>::identity(p, p)).amax();
        prop_assert!(resid <= 1e-12 * m.condition_number(), "{resid}");
    }

    #[test]
    fn mixing_is_linear(
        p in 1usize..=6,
        data in prop::collection::vec(-10.0f64..10.0, 2 * 40 * 6),
        c in -0.5f64..0.9,
    ) {
        let x1 = DMatrix::from_fn(40, p, |t, j| data[t * 6 + j]);
        let x2 = DMatrix::from_fn(40, p, |t, j| data[240 + t * 6 + j]);
        let m = uniform_mixing(p, c).unwrap();
        let mix = |x: DMatrix<f64>| apply_mixing(&TimeSeriesMatrix::new(x).unwrap(), &m).unwrap().into_inner();
        let lhs = mix(&x1 + &x2);
        let rhs = mix(x1) + mix(x2);
        prop_assert!((&lhs - &rhs).amax() <= 1e-12 * lhs.amax().max(1.0));
    }

    #[test]
    fn icoh_follows_channel_relabeling(
        v in random_var(),
        cov in prop::collection::vec(-1.0f64..1.0, 36),
        perm_key in prop::collection::vec(any::<u32>(), 6),
    ) {
        let p = v.p;
        let spec = v.spec();
        let l = DMatrix::from_fn(p, p, |i, j| if j <= i { cov[i * 6 + j] } else { 0.0 });
        let s = &l * l.transpose() + DMatrix::<f64>::identity(p, p) * 0.1;
        let model = VarModel::new(spec.coefficients().to_vec(), s.clone(), N).unwrap();

        let mut perm: Vec<usize> = (0..p).collect();
        perm.sort_by_key(|&i| perm_key[i]);
        // channel k of the relabeled model is channel perm[k] of the original
        let relabel = |a: &DMatrix<f64>| DMatrix::from_fn(p, p, |i, j| a[(perm[i], perm[j])]);
        let permuted = VarModel::new(spec.coefficients().iter().map(relabel).collect(), relabel(&s), N).unwrap();

        let freqs: Vec<f64> = (1..128).map(f64::from).collect();
        let a = icoh(&model, &freqs, 256.0).unwrap();
        let b = icoh(&permuted, &freqs, 256.0).unwrap();
        for (ma, mb) in a.values.iter().zip(&b.values) {
            prop_assert!((relabel(ma) - mb).amax() <= 1e-12);
            prop_assert!(ma.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn coherence_stays_in_unit_interval(
        p in 2usize..=4,
        data in prop::collection::vec(-1.0f64..1.0, 4 * 64 * 4),
    ) {
        let epochs = (0..4)
            .map(|e| DMatrix::from_fn(64, p, |t, j| data[(e * 64 + t) * 4 + j]))
            .collect();
        let e = EpochedSeries::new(epochs, 64.0).unwrap();
        let coh = coherence_squared(&e, (1.0, 31.0)).unwrap();
        for m in &coh.values {
            prop_assert!(m.iter().all(|x| (-1e-12..=1.0 + 1e-12).contains(x)));
        }
    }

    #[test]
    fn leakage_correction_output_is_uncorrelated(
        p in 2usize..=6,
        n in 50usize..300,
        data in prop::collection::vec(-1.0f64..1.0, 300 * 6),
        c in 0.0f64..0.9,
    ) {
        let x = TimeSeriesMatrix::new(DMatrix::from_fn(n, p, |t, j| data[t * 6 + j])).unwrap();
        let y = apply_mixing(&x, &uniform_mixing(p, c).unwrap()).unwrap();
        let (lc, f) = leakage_correct(&y).unwrap();
        let cov = lc.data().transpose() * lc.data();
        let scale = cov.diagonal().amax();
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    prop_assert!(cov[(i, j)].abs() <= 1e-6 * scale);
                }
            }
        }
        prop_assert!(f.orthonormality_residual() <= 1e-10);
        prop_assert!(lag_zero_correlation(&lc).unwrap().max_abs_off_diagonal() <= 1e-6);
    }

    #[test]
    fn procrustes_is_bit_deterministic(data in prop::collection::vec(-1.0f64..1.0, 60 * 4)) {
        let a = DMatrix::from_row_slice(60, 4, &data);
        prop_assert_eq!(orthogonalize(&a).unwrap(), orthogonalize(&a).unwrap());
    }
}

fn toy() -> Vec<DMatrix<f64>> {
    [TOY_LAG1, TOY_LAG2]
        .iter()
        .map(|rows| DMatrix::from_fn(5, 5, |i, j| rows[i][j]))
        .collect()
}

#[test]
fn similarity_transport_is_exact_for_exact_matrices() {
    let m = uniform_mixing(5, 0.7).unwrap();
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.5, 2.0, 1.5, 0.8]));
    let model = VarModel::new(toy(), s.clone(), N).unwrap();
    let mixed = model.transported(&m).unwrap();
    let mm = m.matrix();
    // checked without inverting M: B_k M = M A_k
    for (b, a) in mixed.coefficients().iter().zip(model.coefficients()) {
        assert!((b * mm - mm * a).amax() <= 1e-12, "{}", (b * mm - mm * a).amax());
    }
    assert!((mixed.innovation_covariance() - mm * &s * mm).amax() <= 1e-12);
}

#[test]
fn fitted_mixed_model_matches_transported_truth() {
    let m = uniform_mixing(5, 0.7).unwrap();
    let y = apply_mixing(&common::var5(), &m).unwrap();
    let (fit, _) = fit_var(&y, 2).unwrap();
    let truth = VarModel::new(toy(), DMatrix::identity(5, 5), N).unwrap().transported(&m).unwrap();
    for (b, t) in fit.coefficients().iter().zip(truth.coefficients()) {
        assert!((b - t).amax() <= 0.05, "{}", (b - t).amax());
    }
    let ds = (fit.innovation_covariance() - truth.innovation_covariance()).amax();
    assert!(ds <= 0.05, "{ds}");
}

#[test]
fn unmixing_unmixed_network_preserves_icoh() {
    let x = common::var5();
    let direct = common::var_icoh(&x, 2);
    let res = innovations_orthogonalize(&x, 2).unwrap();
    let again = common::var_icoh(&res.unmixed, 2);
    let d = direct.max_abs_difference(&again).unwrap();
    assert!(d <= 0.05, "{d}");
}
