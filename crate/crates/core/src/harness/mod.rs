//! Reproducible experiments. Each run is a pure function of the experiment
//! id, the seed and the overrides; it writes CSV tables and curves, an SVG
//! plot for figure-type experiments, and `manifest.json` listing every file
//! with its role and SHA-256 digest.

mod config;
mod experiments;
mod manifest;
mod plot;

use std::fs;

pub use config::{ConfigFile, ExperimentConfig, ExperimentId, Overrides};
pub use experiments::{
    COHERENCE_BAND_HZ, DEFAULT_MIX, DEFAULT_SAMPLES, DEFAULT_SIGNAL_ORDER, DEFAULT_VAR_ORDER, OSCILLATOR_AIC_MAX_ORDER,
};
pub use manifest::{
    compare_runs, sha256_hex, ComparisonReport, EntryDeviation, FileComparison, Manifest, ManifestEntry, MANIFEST_FILE,
    DIAGNOSTICS_ROLE, PLOT_ROLE,
};
pub use plot::{LinePlot, Panel, Series, GREEN, LIGHT_GREEN, MAGENTA};

use crate::error::{Error, Result};

/// Runs one experiment into `cfg.out_dir` (created if needed) and returns
/// the manifest that was written there.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Manifest> {
    cfg.validate()?;
    let artifacts = experiments::run(cfg)?;
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = dir.join(&a.file);
        fs::write(&path, &a.contents).map_err(|e| Error::io(&path, e))?;
        files.push(ManifestEntry {
            sha256: sha256_hex(a.contents.as_bytes()),
            file: a.file,
            role: a.role.to_string(),
        });
    }
    let manifest = Manifest {
        experiment: cfg.experiment.as_str().to_string(),
        seed: cfg.seed.seed,
        stream: cfg.seed.stream,
        overrides: cfg.overrides,
        files,
    };
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
