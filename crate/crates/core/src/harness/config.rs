use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::SeedSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Table1,
    Table3,
    Fig2,
    Fig3,
    Appendix3,
    Sec7Envelope,
    Sec9Unmix,
    Sec10Oscillators,
    Sec11Ampmod,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        ExperimentId::Table1,
        ExperimentId::Table3,
        ExperimentId::Fig2,
        ExperimentId::Fig3,
        ExperimentId::Appendix3,
        ExperimentId::Sec7Envelope,
        ExperimentId::Sec9Unmix,
        ExperimentId::Sec10Oscillators,
        ExperimentId::Sec11Ampmod,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Table1 => "table1",
            ExperimentId::Table3 => "table3",
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Appendix3 => "appendix3",
            ExperimentId::Sec7Envelope => "sec7-envelope",
            ExperimentId::Sec9Unmix => "sec9-unmix",
            ExperimentId::Sec10Oscillators => "sec10-oscillators",
            ExperimentId::Sec11Ampmod => "sec11-ampmod",
        }
    }

    /// Figure-type experiments also write an SVG plot.
    pub fn is_figure(self) -> bool {
        matches!(
            self,
            ExperimentId::Fig2
                | ExperimentId::Fig3
                | ExperimentId::Appendix3
                | ExperimentId::Sec9Unmix
                | ExperimentId::Sec10Oscillators
        )
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| {
            let known: Vec<&str> = ExperimentId::ALL.iter().map(|id| id.as_str()).collect();
            Error::Config(format!("unknown experiment id {s:?}; expected one of {}", known.join(", ")))
        })
    }
}

/// Optional changes to an experiment's defaults. Experiments ignore the
/// fields that do not apply to them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mix: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

impl Overrides {
    /// Fields set in `top` replace those in `self`.
    pub fn layered(self, top: Overrides) -> Overrides {
        Overrides {
            samples: top.samples.or(self.samples),
            epochs: top.epochs.or(self.epochs),
            mix: top.mix.or(self.mix),
            order: top.order.or(self.order),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(n) = self.samples {
            if n < 100 {
                return Err(Error::Config(format!("samples must be at least 100, got {n}")));
            }
        }
        if let Some(e) = self.epochs {
            if e < 2 {
                return Err(Error::Config(format!("epochs must be at least 2, got {e}")));
            }
        }
        if let Some(c) = self.mix {
            if !(c.abs() < 1.0) {
                return Err(Error::Config(format!("mixing strength must satisfy |c| < 1, got {c}")));
            }
        }
        if self.order == Some(0) {
            return Err(Error::Config("order must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: SeedSpec,
    pub overrides: Overrides,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            experiment,
            seed: SeedSpec::default(),
            overrides: Overrides::default(),
            out_dir: out_dir.into(),
        }
    }

    pub fn with_seed(mut self, seed: SeedSpec) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_overrides(mut self, overrides: Overrides) -> Self {
        self.overrides = overrides;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.overrides.validate()
    }
}

/// Configuration file contents, or the same fields collected from
/// command-line flags. Flat keys plus an `[overrides]` table:
///
/// ```toml
/// experiment = "table3"
/// seed = 7
/// out = "runs/table3"
///
/// [overrides]
/// mix = 0.5
/// order = 2
/// ```
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub overrides: Overrides,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `top` (typically flags) win.
    pub fn layered(self, top: ConfigFile) -> ConfigFile {
        ConfigFile {
            experiment: top.experiment.or(self.experiment),
            seed: top.seed.or(self.seed),
            stream: top.stream.or(self.stream),
            out: top.out.or(self.out),
            overrides: self.overrides.layered(top.overrides),
        }
    }

    /// Resolves to a validated config. The output directory defaults to
    /// `runs/<experiment-id>`.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let experiment: ExperimentId = self
            .experiment
            .as_deref()
            .ok_or_else(|| Error::Config("no experiment id given".into()))?
            .parse()?;
        let default = SeedSpec::default();
        let cfg = ExperimentConfig {
            experiment,
            seed: SeedSpec::new(self.seed.unwrap_or(default.seed), self.stream.unwrap_or(default.stream)),
            overrides: self.overrides,
            out_dir: self.out.unwrap_or_else(|| Path::new("runs").join(experiment.as_str())),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
