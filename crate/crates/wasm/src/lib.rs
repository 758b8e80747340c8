//! Browser demo bindings. Each operation takes a mixing strength, a sample
//! count and a seed, runs the pipelines in wasm and returns JSON.
//!
//! The `*_demo` functions are plain Rust and are what the tests exercise;
//! the `#[wasm_bindgen]` wrappers only serialize.

use nalgebra::DMatrix;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use unmixio::connectivity::{
    default_icoh_grid, envelope_correlation, icoh, lag_zero_correlation, pearson_correlation, SpectralConnectivity,
};
use unmixio::generators::{apply_mixing, gen_ampmod, gen_var5, uniform_mixing, AmpModSpec};
use unmixio::unmixing::{innovations_orthogonalize, leakage_correct};
use unmixio::var::fit_var;
use unmixio::{Result, SeedSpec, TimeSeriesMatrix};

/// VAR order for the five-node network.
const NETWORK_ORDER: usize = 2;
/// VAR order for the amplitude-modulated signals.
const SIGNAL_ORDER: usize = 9;

type Rows = Vec<Vec<f64>>;

fn rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn off_diagonal_max(m: &DMatrix<f64>) -> f64 {
    let mut out = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                out = out.max(m[(i, j)].abs());
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct MixingDemo {
    pub c: f64,
    pub true_mixing: Rows,
    pub estimated_mixing: Rows,
    pub max_abs_error: f64,
    pub observed_correlation: Rows,
    pub unmixed_correlation: Rows,
    pub procrustes_iterations: usize,
}

/// Mixes the five-node network with uniform strength `c` and estimates the
/// mixing matrix back from the VAR innovations.
pub fn mixing_demo(c: f64, samples: usize, seed: u64) -> Result<MixingDemo> {
    let x = gen_var5(samples, SeedSpec::new(seed, 0))?;
    let m = uniform_mixing(5, c)?;
    let y = apply_mixing(&x, &m)?;
    let res = innovations_orthogonalize(&y, NETWORK_ORDER)?;
    Ok(MixingDemo {
        c,
        true_mixing: rows(m.matrix()),
        estimated_mixing: rows(res.estimated_mixing.matrix()),
        max_abs_error: (res.estimated_mixing.matrix() - m.matrix()).amax(),
        observed_correlation: rows(lag_zero_correlation(&y)?.matrix()),
        unmixed_correlation: rows(lag_zero_correlation(&res.unmixed)?.matrix()),
        procrustes_iterations: res.factorization.iterations,
    })
}

#[derive(Debug, Serialize)]
pub struct IcohMethod {
    pub label: String,
    /// `curves[to][from][k]`, the flow `from → to` at `frequencies[k]`.
    pub curves: Vec<Vec<Vec<f64>>>,
    /// Largest max-over-frequency value among the 15 absent connections.
    pub strongest_absent: f64,
}

#[derive(Debug, Serialize)]
pub struct IcohDemo {
    pub c: f64,
    pub frequencies: Vec<f64>,
    pub edges: Vec<(usize, usize)>,
    pub methods: Vec<IcohMethod>,
}

/// Directed edges of the five-node network, as 0-based (from, to).
pub const EDGES: [(usize, usize); 5] = [(0, 1), (1, 0), (1, 2), (1, 3), (1, 4)];

fn var_icoh(x: &TimeSeriesMatrix) -> Result<SpectralConnectivity> {
    let fs = x.sampling_rate().unwrap_or(256.0);
    let (model, _) = fit_var(x, NETWORK_ORDER)?;
    icoh(&model, &default_icoh_grid(fs), fs)
}

fn icoh_method(label: &str, s: &SpectralConnectivity) -> IcohMethod {
    let p = s.channels();
    let peak = s.max_over_frequency();
    let mut strongest_absent = 0.0f64;
    for to in 0..p {
        for from in 0..p {
            if to != from && !EDGES.contains(&(from, to)) {
                strongest_absent = strongest_absent.max(peak[(to, from)]);
            }
        }
    }
    IcohMethod {
        label: label.to_string(),
        curves: (0..p).map(|to| (0..p).map(|from| s.curve(to, from)).collect()).collect(),
        strongest_absent,
    }
}

/// iCoh of the true network against two ways of treating its `c`-mixed
/// version: innovations orthogonalization and leakage correction.
pub fn icoh_demo(c: f64, samples: usize, seed: u64) -> Result<IcohDemo> {
    let x = gen_var5(samples, SeedSpec::new(seed, 0))?;
    let y = apply_mixing(&x, &uniform_mixing(5, c)?)?;
    let truth = var_icoh(&x)?;
    let unmixed = var_icoh(&innovations_orthogonalize(&y, NETWORK_ORDER)?.unmixed)?;
    let corrected = var_icoh(&leakage_correct(&y)?.0)?;
    Ok(IcohDemo {
        c,
        frequencies: truth.frequencies.clone(),
        edges: EDGES.to_vec(),
        methods: vec![
            icoh_method("true signals", &truth),
            icoh_method("innovations orthogonalization", &unmixed),
            icoh_method("leakage correction", &corrected),
        ],
    })
}

#[derive(Debug, Serialize)]
pub struct EnvelopeDemo {
    pub c: f64,
    pub signal_correlation: Rows,
    pub true_envelopes: Rows,
    pub leakage_corrected: Rows,
    pub unmixed: Rows,
    pub estimated_mixing: Rows,
    pub unmixed_max_abs: f64,
}

/// Envelope correlations of the amplitude-modulated signals, mixed with
/// strength `c`, after each correction.
pub fn envelope_demo(c: f64, samples: usize, seed: u64) -> Result<EnvelopeDemo> {
    let spec = AmpModSpec {
        n_samples: samples,
        ..AmpModSpec::default()
    };
    let (x, env) = gen_ampmod(&spec, SeedSpec::new(seed, 0))?;
    let y = apply_mixing(&x, &uniform_mixing(3, c)?)?;
    let io = innovations_orthogonalize(&y, SIGNAL_ORDER)?;
    let unmixed = envelope_correlation(&io.unmixed)?;
    Ok(EnvelopeDemo {
        c,
        signal_correlation: rows(lag_zero_correlation(&y)?.matrix()),
        true_envelopes: rows(pearson_correlation(env.data())?.matrix()),
        leakage_corrected: rows(envelope_correlation(&leakage_correct(&y)?.0)?.matrix()),
        unmixed_max_abs: off_diagonal_max(unmixed.matrix()),
        unmixed: rows(unmixed.matrix()),
        estimated_mixing: rows(io.estimated_mixing.matrix()),
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsValue> {
    let value = r.map_err(|e| JsValue::from_str(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn mixing(c: f64, samples: u32, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(mixing_demo(c, samples as usize, seed.into()))
}

#[wasm_bindgen]
pub fn icoh_curves(c: f64, samples: u32, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(icoh_demo(c, samples as usize, seed.into()))
}

#[wasm_bindgen]
pub fn envelopes(c: f64, samples: u32, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(envelope_demo(c, samples as usize, seed.into()))
}
