use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use unmixio::connectivity::{
    coherence_squared, default_icoh_grid, envelope_correlation, icoh, lag_zero_correlation,
};
use unmixio::generators::{
    apply_mixing, gen_ampmod, gen_oscillators, gen_var5, uniform_mixing, AmpModSpec, OscillatorSpec,
};
use unmixio::harness::{compare_runs, run_experiment, ConfigFile, ExperimentId, Overrides, DEFAULT_SAMPLES};
use unmixio::io::{fmt_f64, format_matrix, lagged_csv, matrix_csv, read_matrix, spectral_csv, write_matrix};
use unmixio::unmixing::{innovations_orthogonalize, leakage_correct};
use unmixio::var::{fit_var, select_order_aic};
use unmixio::{CorrelationMatrix, EpochedSeries, Error, Result, SeedSpec, TimeSeriesMatrix};

/// Exit code when `compare` finds deviations above the tolerance.
const COMPARISON_FAILED: u8 = 1;

#[derive(Parser)]
#[command(name = "unmixio", version, about = "Unmix instantaneously mixed multivariate time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a synthetic signal family
    Gen(GenArgs),
    /// Fit a VAR(q) by least squares
    Fit(FitArgs),
    /// Score VAR orders by AIC
    Order(OrderArgs),
    /// Innovations orthogonalization: estimate the mixing matrix and unmix
    Unmix(UnmixArgs),
    /// Leakage correction by signal orthogonalization
    Lc(LcArgs),
    /// Connectivity measure as freq_hz,from,to,value CSV
    Conn(ConnArgs),
    /// Reproduce an experiment (or `all`)
    Repro(ReproArgs),
    /// Compare two experiment runs entry by entry
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Var5,
    Oscillators,
    Ampmod,
}

#[derive(Args)]
struct SeedArgs {
    #[arg(long, default_value_t = SeedSpec::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

impl SeedArgs {
    fn spec(&self) -> SeedSpec {
        SeedSpec::new(self.seed, self.stream)
    }
}

#[derive(Args)]
struct GenArgs {
    family: Family,
    /// Output matrix file (time in rows)
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    samples: Option<usize>,
    /// Oscillators only
    #[arg(long)]
    epochs: Option<usize>,
    /// Apply uniform mixing with this off-diagonal value
    #[arg(long)]
    mix: Option<f64>,
    /// Ampmod only: also write the true envelopes here
    #[arg(long)]
    envelopes: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArgs,
}

#[derive(Args)]
struct InputArgs {
    /// Whitespace- or comma-separated matrix, one sample per row
    input: PathBuf,
    /// Sampling rate in Hz
    #[arg(long, default_value_t = 256.0)]
    fs: f64,
}

impl InputArgs {
    fn read(&self) -> Result<TimeSeriesMatrix> {
        if !(self.fs > 0.0 && self.fs.is_finite()) {
            return Err(Error::Config(format!("sampling rate must be positive, got {}", self.fs)));
        }
        Ok(read_matrix(&self.input)?.with_sampling_rate(self.fs))
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct OrderArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 10)]
    max_order: usize,
    /// Write the score CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct UnmixArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct LcArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Measure {
    Corr0,
    Coh,
    Icoh,
    Envcorr,
}

#[derive(Args)]
struct ConnArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    measure: Measure,
    /// VAR order for icoh
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Epoch length in samples for coh
    #[arg(long, default_value_t = 256)]
    epoch_length: usize,
    #[arg(long, default_value_t = 1.0)]
    fmin: f64,
    /// Defaults to just below Nyquist
    #[arg(long)]
    fmax: Option<f64>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    /// Experiment id, or `all`; may come from the config file instead
    experiment: Option<String>,
    /// Configuration file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Default 20170101
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stream: Option<u64>,
    /// Output directory; default runs/<experiment>
    #[arg(long)]
    out: Option<PathBuf>,
    /// VAR order (default 2 for the network, 9 for the other families)
    #[arg(long)]
    order: Option<usize>,
    /// Uniform mixing strength (default 0.7)
    #[arg(long)]
    mix: Option<f64>,
    /// Sample count for the network and amplitude-modulated families
    #[arg(long)]
    samples: Option<usize>,
    /// Epoch count for the oscillators
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// First run directory or manifest.json
    a: PathBuf,
    /// Second run directory or manifest.json
    b: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    tolerance: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => gen(a).map(|_| ExitCode::SUCCESS),
        Command::Fit(a) => fit(a).map(|_| ExitCode::SUCCESS),
        Command::Order(a) => order(a).map(|_| ExitCode::SUCCESS),
        Command::Unmix(a) => unmix(a).map(|_| ExitCode::SUCCESS),
        Command::Lc(a) => lc(a).map(|_| ExitCode::SUCCESS),
        Command::Conn(a) => conn(a).map(|_| ExitCode::SUCCESS),
        Command::Repro(a) => repro(a).map(|_| ExitCode::SUCCESS),
        Command::Compare(a) => compare(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write(path, contents),
        // a reader that stops early (`| head`) is not an error
        None => match io::stdout().lock().write_all(contents.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Error::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            }),
            _ => Ok(()),
        },
    }
}

fn scalars_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("quantity,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{}", fmt_f64(*v));
    }
    out
}

fn gen(a: GenArgs) -> Result<()> {
    let seed = a.seed.spec();
    let mut envelopes = None;
    let x = match a.family {
        Family::Var5 => gen_var5(a.samples.unwrap_or(DEFAULT_SAMPLES), seed)?,
        Family::Oscillators => {
            let spec = OscillatorSpec {
                epochs: a.epochs.unwrap_or(OscillatorSpec::default().epochs),
                ..OscillatorSpec::default()
            };
            gen_oscillators(&spec, seed)?.concatenate()?
        }
        Family::Ampmod => {
            let spec = AmpModSpec {
                n_samples: a.samples.unwrap_or(DEFAULT_SAMPLES),
                ..AmpModSpec::default()
            };
            let (x, env) = gen_ampmod(&spec, seed)?;
            envelopes = Some(env);
            x
        }
    };
    let x = match a.mix {
        Some(c) => apply_mixing(&x, &uniform_mixing(x.channels(), c)?)?,
        None => x,
    };
    write_matrix(x.data(), &a.out)?;
    match (a.envelopes, envelopes) {
        (Some(path), Some(env)) => write_matrix(env.data(), path),
        (Some(_), None) => Err(Error::Config("--envelopes only applies to ampmod".into())),
        _ => Ok(()),
    }
}

fn fit(a: FitArgs) -> Result<()> {
    let y = a.input.read()?;
    let (model, resid) = fit_var(&y, a.order)?;
    ensure_dir(&a.out)?;
    write(&a.out.join("coefficients.csv"), &lagged_csv(model.coefficients()))?;
    write(&a.out.join("innovation_covariance.csv"), &matrix_csv(model.innovation_covariance()))?;
    write_matrix(resid.matrix(), a.out.join("residuals.txt"))?;
    println!("fitted VAR({}) on {} samples x {} channels", model.order(), y.samples(), y.channels());
    Ok(())
}

fn order(a: OrderArgs) -> Result<()> {
    let y = a.input.read()?;
    let (best, scores) = select_order_aic(&y, a.max_order)?;
    let rows: Vec<(String, f64)> = scores.iter().enumerate().map(|(k, s)| ((k + 1).to_string(), *s)).collect();
    let mut csv = String::from("order,value\n");
    for (k, v) in &rows {
        let _ = writeln!(csv, "{k},{}", fmt_f64(*v));
    }
    emit(a.out.as_deref(), &csv)?;
    eprintln!("best order: {best}");
    Ok(())
}

fn unmix(a: UnmixArgs) -> Result<()> {
    let y = a.input.read()?;
    let r = innovations_orthogonalize(&y, a.order)?;
    ensure_dir(&a.out)?;
    write_matrix(r.unmixed.data(), a.out.join("unmixed.txt"))?;
    write(&a.out.join("mixing.csv"), &matrix_csv(r.estimated_mixing.matrix()))?;
    let f = &r.factorization;
    let rows = vec![
        ("diagonal_deviation".to_string(), r.diagonal_deviation()),
        ("condition_number".to_string(), r.estimated_mixing.condition_number()),
        ("procrustes_iterations".to_string(), f.iterations as f64),
        ("procrustes_converged".to_string(), if f.converged { 1.0 } else { 0.0 }),
        ("procrustes_objective".to_string(), f.final_objective),
        ("orthonormality_residual".to_string(), f.orthonormality_residual()),
    ];
    write(&a.out.join("diagnostics.csv"), &scalars_csv(&rows))?;
    for w in &f.warnings {
        eprintln!("warning: {w}");
    }
    print!("estimated mixing matrix:\n{}", format_matrix(r.estimated_mixing.matrix()));
    Ok(())
}

fn lc(a: LcArgs) -> Result<()> {
    let y = a.input.read()?;
    let (x, f) = leakage_correct(&y)?;
    ensure_dir(&a.out)?;
    write_matrix(x.data(), a.out.join("corrected.txt"))?;
    let mut rows: Vec<(String, f64)> = f.d.iter().enumerate().map(|(j, d)| (format!("d_{}", j + 1), *d)).collect();
    rows.push(("iterations".into(), f.iterations as f64));
    rows.push(("converged".into(), if f.converged { 1.0 } else { 0.0 }));
    rows.push(("objective".into(), f.final_objective));
    rows.push(("orthonormality_residual".into(), f.orthonormality_residual()));
    write(&a.out.join("factorization.csv"), &scalars_csv(&rows))?;
    for w in &f.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

/// Correlations use the spectral layout with a single pseudo-frequency 0.
fn correlation_csv(r: &CorrelationMatrix) -> String {
    let mut out = String::from("freq_hz,from,to,value\n");
    for to in 0..r.dim() {
        for from in 0..r.dim() {
            if from != to {
                let _ = writeln!(out, "0,{},{},{}", from + 1, to + 1, fmt_f64(r.get(to, from)));
            }
        }
    }
    out
}

fn conn(a: ConnArgs) -> Result<()> {
    let y = a.input.read()?;
    let fs = a.input.fs;
    let fmax = a.fmax.unwrap_or(fs / 2.0 - 1e-9);
    if !(a.fmin <= fmax) {
        return Err(Error::Config(format!("empty frequency range [{}, {fmax}]", a.fmin)));
    }
    let csv = match a.measure {
        Measure::Corr0 => correlation_csv(&lag_zero_correlation(&y)?),
        Measure::Envcorr => correlation_csv(&envelope_correlation(&y)?),
        Measure::Coh => {
            let e = EpochedSeries::from_series(&y, a.epoch_length, fs)?;
            spectral_csv(&coherence_squared(&e, (a.fmin, fmax))?)
        }
        Measure::Icoh => {
            let (model, _) = fit_var(&y, a.order)?;
            let grid: Vec<f64> = default_icoh_grid(fs).into_iter().filter(|f| *f >= a.fmin && *f <= fmax).collect();
            if grid.is_empty() {
                return Err(Error::Config(format!("no integer frequency in [{}, {fmax}]", a.fmin)));
            }
            spectral_csv(&icoh(&model, &grid, fs)?)
        }
    };
    emit(a.out.as_deref(), &csv)
}

fn repro(a: ReproArgs) -> Result<()> {
    let file = match &a.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let flags = ConfigFile {
        experiment: None,
        seed: a.seed,
        stream: a.stream,
        out: a.out.clone(),
        overrides: Overrides {
            samples: a.samples,
            epochs: a.epochs,
            mix: a.mix,
            order: a.order,
        },
    };
    let base = file.layered(flags);
    let requested = a
        .experiment
        .or_else(|| base.experiment.clone())
        .ok_or_else(|| Error::Config("no experiment id given".into()))?;
    let ids: Vec<ExperimentId> = if requested == "all" {
        ExperimentId::ALL.to_vec()
    } else {
        vec![requested.parse()?]
    };
    let all = ids.len() > 1;
    for id in ids {
        let mut layer = base.clone();
        layer.experiment = Some(id.as_str().to_string());
        if all {
            let root = base.out.clone().unwrap_or_else(|| PathBuf::from("runs"));
            layer.out = Some(root.join(id.as_str()));
        }
        let cfg = layer.resolve()?;
        let manifest = run_experiment(&cfg)?;
        println!("{}: {} files in {}", id, manifest.files.len(), cfg.out_dir.display());
    }
    Ok(())
}

fn compare(a: CompareArgs) -> Result<ExitCode> {
    let report = compare_runs(&a.a, &a.b, a.tolerance)?;
    println!("{report}");
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(COMPARISON_FAILED)
    })
}
