//! Seeded generators for the three synthetic signal families and for
//! instantaneous mixing.
//!
//! * [`VarSpec`] / [`gen_var5`]: the five-node order-2 causal network with
//!   standard Gaussian innovations.
//! * [`OscillatorSpec`] / [`gen_oscillators`]: epoched noisy sinusoids with a
//!   delayed copy (10 Hz pair) and an unrelated 17 Hz channel.
//! * [`AmpModSpec`] / [`gen_ampmod`]: carriers whose amplitudes are slowly and
//!   independently modulated, so the true envelopes are uncorrelated.
//!
//! Delays follow the `sin(ω(t − τ))` convention with the negative τ values
//! of the defining equations; `t` starts at 1.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::types::{EpochedSeries, SeedSpec, TimeSeriesMatrix};

/// Uniform and Gaussian draws from one ChaCha stream.
pub(crate) struct Noise {
    rng: ChaCha20Rng,
}

impl Noise {
    pub(crate) fn new(seed: SeedSpec) -> Self {
        Self { rng: seed.rng() }
    }

    /// Uniform on `[0, 1)`.
    pub(crate) fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `[center - half_width, center + half_width)`.
    pub(crate) fn uniform(&mut self, center: f64, half_width: f64) -> f64 {
        center + half_width * (2.0 * self.unit() - 1.0)
    }

    pub(crate) fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// Coefficients of the five-node network at lag 1 (row = receiver,
/// column = sender).
pub const TOY_LAG1: [[f64; 5]; 5] = [
    [1.5, -0.25, 0.0, 0.0, 0.0],
    [-0.2, 1.8, 0.0, 0.0, 0.0],
    [0.0, 0.9, 1.65, 0.0, 0.0],
    [0.0, 0.9, 0.0, 1.65, 0.0],
    [0.0, 0.9, 0.0, 0.0, 1.65],
];

/// Coefficients of the five-node network at lag 2.
pub const TOY_LAG2: [[f64; 5]; 5] = [
    [-0.95, 0.0, 0.0, 0.0, 0.0],
    [0.0, -0.96, 0.0, 0.0, 0.0],
    [0.0, -0.8, -0.95, 0.0, 0.0],
    [0.0, -0.8, 0.0, -0.95, 0.0],
    [0.0, -0.8, 0.0, 0.0, -0.95],
];

pub const DEFAULT_BURN_IN: usize = 1000;

fn from_rows<const N: usize>(rows: &[[f64; N]; N]) -> DMatrix<f64> {
    DMatrix::from_fn(N, N, |i, j| rows[i][j])
}

/// Stable VAR with independent Gaussian innovations, used for simulation.
#[derive(Clone, Debug)]
pub struct VarSpec {
    coefficients: Vec<DMatrix<f64>>,
    innovation_sd: Vec<f64>,
    burn_in: usize,
}

impl VarSpec {
    /// Rejects empty, non-square or unstable coefficient sets.
    pub fn new(coefficients: Vec<DMatrix<f64>>, innovation_sd: Vec<f64>, burn_in: usize) -> Result<Self> {
        let p = innovation_sd.len();
        if coefficients.is_empty() || p == 0 {
            return Err(Error::InvalidArgument("VAR needs at least one lag and one channel".into()));
        }
        if coefficients.iter().any(|a| a.shape() != (p, p)) {
            return Err(Error::Dimension(format!("every coefficient matrix must be {p} x {p}")));
        }
        if innovation_sd.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument("innovation standard deviations must be finite and >= 0".into()));
        }
        let radius = spectral_radius(&coefficients);
        if !(radius < 1.0) {
            return Err(Error::Unstable { radius });
        }
        Ok(Self {
            coefficients,
            innovation_sd,
            burn_in,
        })
    }

    /// The five-node network with unit-variance innovations.
    pub fn toy_network() -> Self {
        Self::new(
            vec![from_rows(&TOY_LAG1), from_rows(&TOY_LAG2)],
            vec![1.0; 5],
            DEFAULT_BURN_IN,
        )
        .expect("toy network is stable")
    }

    pub fn coefficients(&self) -> &[DMatrix<f64>] {
        &self.coefficients
    }

    pub fn innovation_sd(&self) -> &[f64] {
        &self.innovation_sd
    }

    pub fn channels(&self) -> usize {
        self.innovation_sd.len()
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.coefficients)
    }

    /// Simulates from zero initial conditions, dropping the burn-in.
    /// Returns the series and the innovations that drove it.
    pub fn simulate_with_innovations(&self, n_samples: usize, seed: SeedSpec) -> Result<(TimeSeriesMatrix, DMatrix<f64>)> {
        let p = self.channels();
        let q = self.order();
        let total = n_samples + self.burn_in;
        let mut noise = Noise::new(seed);
        let mut x = DMatrix::<f64>::zeros(total + q, p);
        let mut e = DMatrix::<f64>::zeros(total, p);
        for t in 0..total {
            let row = t + q;
            for i in 0..p {
                let eps = self.innovation_sd[i] * noise.gaussian();
                e[(t, i)] = eps;
                let mut acc = eps;
                for (k, a) in self.coefficients.iter().enumerate() {
                    let lagged = row - k - 1;
                    for j in 0..p {
                        acc += a[(i, j)] * x[(lagged, j)];
                    }
                }
                x[(row, i)] = acc;
            }
        }
        let out = x.rows(q + self.burn_in, n_samples).into_owned();
        let innov = e.rows(self.burn_in, n_samples).into_owned();
        Ok((TimeSeriesMatrix::new(out)?, innov))
    }

    pub fn simulate(&self, n_samples: usize, seed: SeedSpec) -> Result<TimeSeriesMatrix> {
        Ok(self.simulate_with_innovations(n_samples, seed)?.0)
    }
}

/// Largest eigenvalue modulus of the companion matrix.
pub fn spectral_radius(coefficients: &[DMatrix<f64>]) -> f64 {
    let q = coefficients.len();
    let p = coefficients[0].nrows();
    let mut c = DMatrix::<f64>::zeros(p * q, p * q);
    for (k, a) in coefficients.iter().enumerate() {
        c.view_mut((0, k * p), (p, p)).copy_from(a);
    }
    for i in p..p * q {
        c[(i, i - p)] = 1.0;
    }
    c.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// The five-node network, `n_samples` rows after a 1000-sample burn-in.
pub fn gen_var5(n_samples: usize, seed: SeedSpec) -> Result<TimeSeriesMatrix> {
    if n_samples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples, got {n_samples}")));
    }
    VarSpec::toy_network().simulate(n_samples, seed)
}

/// Parameters of the noisy oscillator family. Frequencies are in radians
/// per sample, delays in samples.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorSpec {
    pub frequencies: Vec<f64>,
    pub delays: Vec<f64>,
    /// Amplitudes are uniform on `[1 - amp_jitter, 1 + amp_jitter]`, redrawn per epoch.
    pub amp_jitter: f64,
    /// Additive noise is uniform on `[-noise, noise]`.
    pub noise: f64,
    pub epochs: usize,
    pub epoch_length: usize,
    pub sampling_rate: f64,
}

impl Default for OscillatorSpec {
    fn default() -> Self {
        let w = |hz: f64| 2.0 * PI * hz / 256.0;
        Self {
            frequencies: vec![w(10.0), w(10.0), w(17.0)],
            delays: vec![0.0, -1.0, -2.0],
            amp_jitter: 0.5,
            noise: 0.9,
            epochs: 100,
            epoch_length: 256,
            sampling_rate: 256.0,
        }
    }
}

impl OscillatorSpec {
    fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty() || self.frequencies.len() != self.delays.len() {
            return Err(Error::InvalidArgument("one frequency and one delay per channel".into()));
        }
        if self.epochs == 0 || self.epoch_length == 0 {
            return Err(Error::InvalidArgument("need at least one non-empty epoch".into()));
        }
        if self.amp_jitter < 0.0 || self.noise < 0.0 {
            return Err(Error::InvalidArgument("noise widths must be >= 0".into()));
        }
        Ok(())
    }
}

pub fn gen_oscillators(spec: &OscillatorSpec, seed: SeedSpec) -> Result<EpochedSeries> {
    spec.validate()?;
    let p = spec.frequencies.len();
    let mut noise = Noise::new(seed);
    let mut epochs = Vec::with_capacity(spec.epochs);
    for _ in 0..spec.epochs {
        let amps: Vec<f64> = (0..p).map(|_| noise.uniform(1.0, spec.amp_jitter)).collect();
        let mut e = DMatrix::zeros(spec.epoch_length, p);
        for r in 0..spec.epoch_length {
            let t = (r + 1) as f64;
            for i in 0..p {
                let clean = amps[i] * (spec.frequencies[i] * (t - spec.delays[i])).sin();
                e[(r, i)] = clean + noise.uniform(0.0, spec.noise);
            }
        }
        epochs.push(e);
    }
    EpochedSeries::new(epochs, spec.sampling_rate)
}

/// Parameters of the amplitude-modulated family.
#[derive(Clone, Debug, PartialEq)]
pub struct AmpModSpec {
    pub slow_frequencies: Vec<f64>,
    pub slow_delays: Vec<f64>,
    pub fast_frequencies: Vec<f64>,
    pub fast_delays: Vec<f64>,
    /// Depth of the slow sinusoidal modulation.
    pub depth: f64,
    /// Multiplicative noise is uniform on `[1 - noise, 1 + noise]`.
    pub noise: f64,
    pub n_samples: usize,
    pub sampling_rate: f64,
}

impl Default for AmpModSpec {
    fn default() -> Self {
        let w = |hz: f64| 2.0 * PI * hz / 256.0;
        Self {
            slow_frequencies: vec![w(2.0), w(3.0), w(5.0)],
            slow_delays: vec![0.0, -4.0, -4.0],
            fast_frequencies: vec![w(22.0), w(22.0), w(28.0)],
            fast_delays: vec![0.0, -1.0, -2.0],
            depth: 0.5,
            noise: 0.2,
            n_samples: 25600,
            sampling_rate: 256.0,
        }
    }
}

/// Returns `(signals, true_envelopes)`.
pub fn gen_ampmod(spec: &AmpModSpec, seed: SeedSpec) -> Result<(TimeSeriesMatrix, TimeSeriesMatrix)> {
    let p = spec.slow_frequencies.len();
    if p == 0 || [spec.slow_delays.len(), spec.fast_frequencies.len(), spec.fast_delays.len()] != [p; 3] {
        return Err(Error::InvalidArgument("parameter lists must all have one entry per channel".into()));
    }
    let mut noise = Noise::new(seed);
    let mut env = DMatrix::zeros(spec.n_samples, p);
    let mut sig = DMatrix::zeros(spec.n_samples, p);
    for r in 0..spec.n_samples {
        let t = (r + 1) as f64;
        for i in 0..p {
            let slow = 1.0 + spec.depth * (spec.slow_frequencies[i] * (t - spec.slow_delays[i])).sin();
            let a = slow * noise.uniform(1.0, spec.noise);
            env[(r, i)] = a;
            sig[(r, i)] = a * (spec.fast_frequencies[i] * (t - spec.fast_delays[i])).sin();
        }
    }
    let fs = spec.sampling_rate;
    Ok((
        TimeSeriesMatrix::new(sig)?.with_sampling_rate(fs),
        TimeSeriesMatrix::new(env)?.with_sampling_rate(fs),
    ))
}

/// A square instantaneous mixing (or estimated mixing) operator.
#[derive(Clone, Debug, PartialEq)]
pub struct MixingMatrix(DMatrix<f64>);

impl MixingMatrix {
    /// Any square finite matrix; estimates need not be symmetric.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Dimension(format!("mixing matrix must be square, got {:?}", m.shape())));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("mixing matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    /// A synthetic mixing matrix: symmetric, unit diagonal, off-diagonal
    /// magnitudes below one, non-singular.
    pub fn synthetic(m: DMatrix<f64>) -> Result<Self> {
        let m = Self::new(m)?;
        let p = m.dim();
        for i in 0..p {
            if m.0[(i, i)] != 1.0 {
                return Err(Error::InvalidArgument(format!("diagonal entry {} is not 1", i + 1)));
            }
            for j in 0..p {
                if i != j {
                    if m.0[(i, j)] != m.0[(j, i)] {
                        return Err(Error::InvalidArgument("mixing matrix must be symmetric".into()));
                    }
                    if m.0[(i, j)].abs() >= 1.0 {
                        return Err(Error::InvalidArgument("off-diagonal magnitudes must be < 1".into()));
                    }
                }
            }
        }
        m.inverse()?;
        Ok(m)
    }

    pub fn identity(p: usize) -> Self {
        Self(DMatrix::identity(p, p))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn condition_number(&self) -> f64 {
        let sv = self.0.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.0
            .clone()
            .try_inverse()
            .filter(|m| m.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Singular("mixing matrix is not invertible".into()))
    }

    /// Largest absolute deviation of the diagonal from 1.
    pub fn diagonal_deviation(&self) -> f64 {
        self.0.diagonal().iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Ones on the diagonal and `c` everywhere else.
pub fn uniform_mixing(p: usize, c: f64) -> Result<MixingMatrix> {
    if p == 0 {
        return Err(Error::InvalidArgument("mixing dimension must be >= 1".into()));
    }
    if !(c.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("off-diagonal value must satisfy |c| < 1, got {c}")));
    }
    // Eigenvalues are 1 - c (p - 1 times) and 1 + (p - 1) c.
    if p > 1 && (1.0 + (p as f64 - 1.0) * c).abs() < 1e-12 {
        return Err(Error::Singular(format!(
            "c = {c} = -1/(p-1) makes the {p} x {p} uniform mixing matrix singular"
        )));
    }
    let m = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { c });
    MixingMatrix::synthetic(m)
}

/// `Y_t = M X_t` for every sample.
pub fn apply_mixing(x: &TimeSeriesMatrix, m: &MixingMatrix) -> Result<TimeSeriesMatrix> {
    if m.dim() != x.channels() {
        return Err(Error::Dimension(format!(
            "{} x {} mixing matrix for {} channels",
            m.dim(),
            m.dim(),
            x.channels()
        )));
    }
    let y = x.data() * m.matrix().transpose();
    let out = TimeSeriesMatrix::new(y)?;
    Ok(match x.sampling_rate() {
        Some(fs) => out.with_sampling_rate(fs),
        None => out,
    })
}

/// Mixes every epoch with the same matrix.
pub fn apply_mixing_epochs(x: &EpochedSeries, m: &MixingMatrix) -> Result<EpochedSeries> {
    if m.dim() != x.channels() {
        return Err(Error::Dimension("mixing matrix does not match channel count".into()));
    }
    let mt = m.matrix().transpose();
    EpochedSeries::new(x.epochs().iter().map(|e| e * &mt).collect(), x.sampling_rate())
}
