use std::fmt::Write;

use super::config::{ExperimentConfig, ExperimentId};
use super::manifest::{DIAGNOSTICS_ROLE, PLOT_ROLE};
use super::plot::{LinePlot, GREEN, LIGHT_GREEN, MAGENTA};
use crate::connectivity::{
    coherence_squared, default_icoh_grid, envelope_correlation, icoh, lag_zero_correlation, pearson_correlation,
    SpectralConnectivity,
};
use crate::error::{Result, StageContext};
use crate::generators::{
    apply_mixing, gen_ampmod, gen_oscillators, gen_var5, uniform_mixing, AmpModSpec, MixingMatrix, OscillatorSpec,
};
use crate::io::{fmt_f64, matrix_csv, spectral_csv};
use crate::types::{EpochedSeries, TimeSeriesMatrix};
use crate::unmixing::{innovations_orthogonalize, leakage_correct, UnmixResult};
use crate::var::{fit_var, select_order_aic};

pub const DEFAULT_SAMPLES: usize = 25600;
pub const DEFAULT_MIX: f64 = 0.7;
/// Order of the five-node network.
pub const DEFAULT_VAR_ORDER: usize = 2;
/// Order used for the oscillator and amplitude-modulated signals, which are
/// not autoregressive.
pub const DEFAULT_SIGNAL_ORDER: usize = 9;
pub const OSCILLATOR_AIC_MAX_ORDER: usize = 20;
pub const COHERENCE_BAND_HZ: (f64, f64) = (1.0, 30.0);

pub(super) struct Artifact {
    pub file: String,
    pub role: &'static str,
    pub contents: String,
}

fn artifact(file: &str, role: &'static str, contents: String) -> Artifact {
    Artifact {
        file: file.to_string(),
        role,
        contents,
    }
}

fn plot(file: &str, p: LinePlot) -> Artifact {
    artifact(file, PLOT_ROLE, p.to_svg())
}

/// `name,value` rows.
fn scalars_csv(key: &str, rows: &[(String, f64)]) -> String {
    let mut out = format!("{key},value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{}", fmt_f64(*v));
    }
    out
}

fn unmix_diagnostics(label: &str, r: &UnmixResult, target: &MixingMatrix) -> Vec<(String, f64)> {
    let f = &r.factorization;
    vec![
        (format!("{label},max_abs_deviation_from_target"), (r.estimated_mixing.matrix() - target.matrix()).amax()),
        (format!("{label},diagonal_deviation"), r.diagonal_deviation()),
        (format!("{label},condition_number"), r.estimated_mixing.condition_number()),
        (format!("{label},procrustes_iterations"), f.iterations as f64),
        (format!("{label},procrustes_converged"), if f.converged { 1.0 } else { 0.0 }),
        (format!("{label},procrustes_objective"), f.final_objective),
        (format!("{label},orthonormality_residual"), f.orthonormality_residual()),
    ]
}

struct Params {
    samples: usize,
    epochs: usize,
    mix: f64,
    var_order: usize,
    signal_order: usize,
}

impl Params {
    fn from(cfg: &ExperimentConfig) -> Self {
        let o = &cfg.overrides;
        Params {
            samples: o.samples.unwrap_or(DEFAULT_SAMPLES),
            epochs: o.epochs.unwrap_or(OscillatorSpec::default().epochs),
            mix: o.mix.unwrap_or(DEFAULT_MIX),
            var_order: o.order.unwrap_or(DEFAULT_VAR_ORDER),
            signal_order: o.order.unwrap_or(DEFAULT_SIGNAL_ORDER),
        }
    }
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let p = Params::from(cfg);
    match cfg.experiment {
        ExperimentId::Table1 => table1(cfg, &p),
        ExperimentId::Table3 => table3(cfg, &p),
        ExperimentId::Fig2 => fig2(cfg, &p),
        ExperimentId::Fig3 => fig3(cfg, &p),
        ExperimentId::Appendix3 => appendix3(cfg, &p),
        ExperimentId::Sec7Envelope => sec7(cfg, &p),
        ExperimentId::Sec9Unmix => sec9(cfg, &p),
        ExperimentId::Sec10Oscillators => sec10(cfg, &p),
        ExperimentId::Sec11Ampmod => sec11(cfg, &p),
    }
}

fn var5(cfg: &ExperimentConfig, p: &Params) -> Result<TimeSeriesMatrix> {
    gen_var5(p.samples, cfg.seed).stage("generate five-node network")
}

fn mixing(p: &Params, channels: usize) -> Result<MixingMatrix> {
    uniform_mixing(channels, p.mix).stage("build mixing matrix")
}

fn var_icoh(x: &TimeSeriesMatrix, q: usize) -> Result<SpectralConnectivity> {
    let fs = x.sampling_rate().unwrap_or(256.0);
    let (model, _) = fit_var(x, q).stage("fit VAR")?;
    icoh(&model, &default_icoh_grid(fs), fs).stage("iCoh")
}

fn oscillators(cfg: &ExperimentConfig, p: &Params) -> Result<(EpochedSeries, TimeSeriesMatrix)> {
    let spec = OscillatorSpec {
        epochs: p.epochs,
        ..OscillatorSpec::default()
    };
    let e = gen_oscillators(&spec, cfg.seed).stage("generate oscillators")?;
    let cat = e.concatenate().stage("concatenate epochs")?;
    Ok((e, cat))
}

fn epoched_coherence(x: &TimeSeriesMatrix, like: &EpochedSeries) -> Result<SpectralConnectivity> {
    let e = EpochedSeries::from_series(x, like.epoch_length(), like.sampling_rate()).stage("split into epochs")?;
    coherence_squared(&e, COHERENCE_BAND_HZ).stage("coherence")
}

fn ampmod(cfg: &ExperimentConfig, p: &Params) -> Result<(TimeSeriesMatrix, TimeSeriesMatrix)> {
    let spec = AmpModSpec {
        n_samples: p.samples,
        ..AmpModSpec::default()
    };
    gen_ampmod(&spec, cfg.seed).stage("generate amplitude-modulated signals")
}

fn table1(cfg: &ExperimentConfig, p: &Params) -> Result<Vec<Artifact>> {
    let x = var5(cfg, p)?;
    let r = lag_zero_correlation(&x).stage("lag-zero correlation")?;
    Ok(vec![artifact("table1_correlation.csv", "table", matrix_csv(r.matrix()))])
}

fn table3(cfg: &ExperimentConfig, p: &Params) -> Result<Vec<Artifact>> {
    let x = var5(cfg, p)?;
    let m = mixing(p, 5)?;
    let y = apply_mixing(&x, &m).stage("mix")?;
    let a = innovations_orthogonalize(&x, p.var_order).stage("unmix original signals")?;
    let b = innovations_orthogonalize(&y, p.var_order).stage("unmix mixed signals")?;
    let mut diag = unmix_diagnostics("unmixed", &a, &MixingMatrix::identity(5));
    diag.extend(unmix_diagnostics("mixed", &b, &m));
    Ok(vec![
        artifact("table3a_mixing.csv", "table", matrix_csv(a.estimated_mixing.matrix())),
        artifact("table3b_mixing.csv", "table", matrix_csv(b.estimated_mixing.matrix())),
        artifact("table3_diagnostics.csv", DIAGNOSTICS_ROLE, scalars_csv("dataset,quantity", &diag)),
    ])
}

fn fig2(cfg: &ExperimentConfig, p: &Params) -> Result<Vec<Artifact>> {
    let x = var5(cfg, p)?;
    let truth = var_icoh(&x, p.var_order)?;
    let (lc, _) = leakage_correct(&x).stage("leakage correction")?;
    let corrected = var_icoh(&lc, p.var_order)?;
    let chart = LinePlot::spectral(
        "iCoh: original (magenta) vs leakage-corrected (green)",
        "frequency (Hz)",
        &[("original", MAGENTA, &truth), ("leakage-corrected", GREEN, &corrected)],
    );
    Ok(vec![
        artifact("fig2_icoh_true.csv", "curves", spectral_csv(&truth)),
        artifact("fig2_icoh_lc.csv", "curves", spectral_csv(&corrected)),
        plot("fig2.svg", chart),
    ])
}

fn fig3(cfg: &ExperimentConfig, p: &Params) -> Result<Vec<Artifact>> {
    let (e, cat) = oscillators(cfg, p)?;
    let truth = coherence_squared(&e, COHERENCE_BAND_HZ).stage("coherence")?;
    let (lc, _) = leakage_correct(&cat).stage("leakage correction")?;
    let corrected = epoched_coherence(&lc, &e)?;
    let r = lag_zero_correlation(&cat).stage("lag-zero correlation")?;
    let chart = LinePlot::spectral(
        "squared coherence: original (magenta) vs leakage-corrected (green)",
        "frequency (Hz)",
        &[("original", MAGENTA, &truth), ("leakage-corrected", GREEN, &corrected)],
    );
    Ok(vec![
        artifact("fig3_correlation.csv", "table", matrix_csv(r.matrix())),
        artifact("fig3_coherence_true.csv", "curves", spectral_csv(&truth)),
        artifact("fig3_coherence_lc.csv", "curves", spectral_csv(&corrected)),
        plot("fig3.svg", chart),
    ])
}

fn appendix3(cfg: &ExperimentConfig, p: &Params) -> Result<Vec<Artifact>> {
    let x = var5(cfg, p)?;
    let y = apply_mixing(&x, &mixing(p, 5)?).stage("mix")?;
    let truth = var_icoh(&x, p.var_order)?;
    let (lc, _) = leakage_correct(&x).stage("leakage correction of original signals")?;
    let (lc_mixed, _) = leakage_correct(&y).stage("leakage correction of mixed signals")?;
    let corrected = var_icoh(&lc, p.var_order)?;
    let corrected_mixed = var_icoh(&lc_mixed, p.var_order)?;
    let chart = LinePlot::spectral(
        "iCoh: original, leakage-corrected, leakage-corrected mixed",
        "frequency (Hz)",
        &[
            ("original", MAGENTA, &truth),
            ("leakage-corrected", GREEN, &corrected),
            ("leakage-corrected mixed", LIGHT_GREEN, &corrected_mixed),
        ],
    );
    Ok(vec![
        artifact("appendix3_icoh_true.csv", "curves", spectral_csv(&truth)),
        artifact("appendix3_icoh_lc.csv", "curves", spectral_csv(&corrected)),
        artifact("appendix3_icoh_lc_mixed.csv", "curves", spectral_csv(&corrected_mixed)),
        plot("appendix3.svg", chart),
    ])
}

fn sec7(cfg: &ExperimentConfig, p: &Params) -> Result<Vec<Artifact>> {
    let (x, env) = ampmod(cfg, p)?;
    let r = lag_zero_correlation(&x).stage("lag-zero correlation")?;
    let true_env = pearson_correlation(env.data()).stage("true envelope correlation")?;
    let est_env = envelope_correlation(&x).stage("envelope correlation")?;
    let (lc, _) = leakage_correct(&x).stage("leakage correction")?;
    let lc_env = envelope_correlation(&lc).stage("envelope correlation after leakage correction")?;
    Ok(vec![
        artifact("sec7_signal_correlation.csv", "table", matrix_csv(r.matrix())),
        artifact("sec7_true_envelope_correlation.csv", "table", matrix_csv(true_env.matrix())),
        artifact("sec7_envelope_correlation.csv", "table", matrix_csv(est_env.matrix())),
        artifact("sec7_lc_envelope_correlation.csv", "table", matrix_csv(lc_env.matrix())),
    ])
}

fn sec9(cfg: &ExperimentConfig, p: &Params) -> Result<Vec<Artifact>> {
    let x = var5(cfg, p)?;
    let m = mixing(p, 5)?;
    let y = apply_mixing(&x, &m).stage("mix")?;
    let direct = var_icoh(&x, p.var_order)?;
    let a = innovations_orthogonalize(&x, p.var_order).stage("unmix original signals")?;
    let b = innovations_orthogonalize(&y, p.var_order).stage("unmix mixed signals")?;
    let from_original = var_icoh(&a.unmixed, p.var_order)?;
    let from_mixed = var_icoh(&b.unmixed, p.var_order)?;
    let chart = LinePlot::spectral(
        "iCoh: original, unmixed original, unmixed mixed",
        "frequency (Hz)",
        &[
            ("original", MAGENTA, &direct),
            ("unmixed original", GREEN, &from_original),
            ("unmixed mixed", LIGHT_GREEN, &from_mixed),
        ],
    );
    Ok(vec![
        artifact("sec9_icoh_direct.csv", "curves", spectral_csv(&direct)),
        artifact("sec9_icoh_unmixed_original.csv", "curves", spectral_csv(&from_original)),
        artifact("sec9_icoh_unmixed_mixed.csv", "curves", spectral_csv(&from_mixed)),
        artifact("sec9_mixing_original.csv", "table", matrix_csv(a.estimated_mixing.matrix())),
        artifact("sec9_mixing_mixed.csv", "table", matrix_csv(b.estimated_mixing.matrix())),
        plot("sec9.svg", chart),
    ])
}

fn sec10(cfg: &ExperimentConfig, p: &Params) -> Result<Vec<Artifact>> {
    let (e, cat) = oscillators(cfg, p)?;
    let (_, scores) = select_order_aic(&cat, OSCILLATOR_AIC_MAX_ORDER).stage("AIC order scan")?;
    let aic: Vec<(String, f64)> = scores.iter().enumerate().map(|(k, s)| ((k + 1).to_string(), *s)).collect();
    let m = mixing(p, 3)?;
    let y = apply_mixing(&cat, &m).stage("mix")?;
    let truth = coherence_squared(&e, COHERENCE_BAND_HZ).stage("coherence")?;
    let a = innovations_orthogonalize(&cat, p.signal_order).stage("unmix original signals")?;
    let b = innovations_orthogonalize(&y, p.signal_order).stage("unmix mixed signals")?;
    let from_original = epoched_coherence(&a.unmixed, &e)?;
    let from_mixed = epoched_coherence(&b.unmixed, &e)?;
    let mut diag = unmix_diagnostics("original", &a, &MixingMatrix::identity(3));
    diag.extend(unmix_diagnostics("mixed", &b, &m));
    let chart = LinePlot::spectral(
        "squared coherence: original, unmixed original, unmixed mixed",
        "frequency (Hz)",
        &[
            ("original", MAGENTA, &truth),
            ("unmixed original", GREEN, &from_original),
            ("unmixed mixed", LIGHT_GREEN, &from_mixed),
        ],
    );
    Ok(vec![
        artifact("sec10_aic.csv", "scores", scalars_csv("order", &aic)),
        artifact("sec10_coherence_original.csv", "curves", spectral_csv(&truth)),
        artifact("sec10_coherence_unmixed_original.csv", "curves", spectral_csv(&from_original)),
        artifact("sec10_coherence_unmixed_mixed.csv", "curves", spectral_csv(&from_mixed)),
        artifact("sec10_mixing_original.csv", "table", matrix_csv(a.estimated_mixing.matrix())),
        artifact("sec10_mixing_mixed.csv", "table", matrix_csv(b.estimated_mixing.matrix())),
        artifact("sec10_diagnostics.csv", DIAGNOSTICS_ROLE, scalars_csv("dataset,quantity", &diag)),
        plot("sec10.svg", chart),
    ])
}

fn sec11(cfg: &ExperimentConfig, p: &Params) -> Result<Vec<Artifact>> {
    let (x, _) = ampmod(cfg, p)?;
    let m = mixing(p, 3)?;
    let y = apply_mixing(&x, &m).stage("mix")?;
    let a = innovations_orthogonalize(&x, p.signal_order).stage("unmix original signals")?;
    let b = innovations_orthogonalize(&y, p.signal_order).stage("unmix mixed signals")?;
    let env_a = envelope_correlation(&a.unmixed).stage("envelope correlation of unmixed original")?;
    let env_b = envelope_correlation(&b.unmixed).stage("envelope correlation of unmixed mixed")?;
    let mut diag = unmix_diagnostics("original", &a, &MixingMatrix::identity(3));
    diag.extend(unmix_diagnostics("mixed", &b, &m));
    Ok(vec![
        artifact("sec11_mixing_original.csv", "table", matrix_csv(a.estimated_mixing.matrix())),
        artifact("sec11_mixing_mixed.csv", "table", matrix_csv(b.estimated_mixing.matrix())),
        artifact("sec11_envelope_correlation_original.csv", "table", matrix_csv(env_a.matrix())),
        artifact("sec11_envelope_correlation_mixed.csv", "table", matrix_csv(env_b.matrix())),
        artifact("sec11_diagnostics.csv", DIAGNOSTICS_ROLE, scalars_csv("dataset,quantity", &diag)),
    ])
}
