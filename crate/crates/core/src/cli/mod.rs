//! Front end of the `slocc` binary.
//!
//! Exit statuses: 0 success, 1 usage or domain error, 2 validation failure,
//! 3 I/O error.

pub mod config;
pub mod sweep;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::channels::{p_analytic, ChannelKind, LorentzianBath};
use crate::entanglement::{concurrence_closed, delta_c, success_probability_closed};
use crate::error::Error;
use crate::nolabel::Statistics;
use crate::protocol::{indistinguishability, spec_for_target_i, DeformationSpec};

use config::{ConfigFile, RealList};
use sweep::{format_g12, gnuplot_script, sweep_csv, FigurePreset, Quantity, Regime, SweepConfig};

/// Default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "SLOCC_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Model(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "slocc", version, about = "Entanglement recovery of noisy identical qubits")]
pub struct Cli {
    /// key = value file supplying defaults for any flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate concurrence, gain and success probability at one point
    Eval(EvalArgs),
    /// Sweep γt for a list of indistinguishability values and write CSV
    Sweep(SweepArgs),
    /// Write the data behind a figure preset (fig2 .. fig10)
    Figure(FigureArgs),
    /// Compare the closed forms against the labeled oracle on random cases
    Validate(ValidateArgs),
}

#[derive(Debug, Args, Default)]
pub struct PhysicsArgs {
    /// adc, pdc or dep
    #[arg(long)]
    pub channel: Option<ChannelKind>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Bath width; overrides the regime
    #[arg(long)]
    pub lambda: Option<f64>,
    /// markovian (λ = 5γ) or nonmarkovian (λ = 0.01γ)
    #[arg(long)]
    pub regime: Option<String>,
    /// fermion or boson
    #[arg(long)]
    pub statistics: Option<Statistics>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    /// Time t (γt is reported)
    #[arg(long, conflicts_with = "p")]
    pub t: Option<f64>,
    /// Disturbance probability, bypassing the bath
    #[arg(long)]
    pub p: Option<f64>,
    /// Target indistinguishability on the standard family
    #[arg(long, conflicts_with = "coeffs")]
    pub indist: Option<f64>,
    /// Real coefficients l,r,l',r'
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<RealList>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    /// Comma-separated indistinguishability values
    #[arg(long)]
    pub indist: Option<RealList>,
    /// Largest γt
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Output CSV file (defaults to $SLOCC_OUT_DIR/sweep.csv, else stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV
    #[arg(long)]
    pub gnuplot: bool,
    /// Quantity drawn by the gnuplot script
    #[arg(long, default_value = "concurrence")]
    pub quantity: Quantity,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// fig2 .. fig10
    pub id: String,
    #[arg(long)]
    pub statistics: Option<Statistics>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub indist: Option<RealList>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Output directory (defaults to $SLOCC_OUT_DIR, else the current directory)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cases: Option<usize>,
    /// Also write the report to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match &cli.command {
        Command::Eval(a) => run_eval(a, &cfg, stdout),
        Command::Sweep(a) => run_sweep(a, &cfg, stdout),
        Command::Figure(a) => run_figure(a, &cfg, stdout),
        Command::Validate(a) => run_validate(a, &cfg, stdout),
    }
}

fn parse_regime(s: &str) -> Result<Regime, CliError> {
    match s.trim().to_ascii_lowercase().replace('-', "").as_str() {
        "markovian" => Ok(Regime::Markovian),
        "nonmarkovian" => Ok(Regime::NonMarkovian),
        other => Err(CliError::Usage(format!("unknown regime '{other}' (markovian or nonmarkovian)"))),
    }
}

struct Physics {
    kind: ChannelKind,
    gamma: f64,
    regime: Regime,
    statistics: Statistics,
}

impl Physics {
    fn resolve(a: &PhysicsArgs, cfg: &ConfigFile) -> Result<Self, CliError> {
        let kind = cfg.pick(a.channel, "channel")?.unwrap_or(ChannelKind::Adc);
        let gamma = cfg.pick(a.gamma, "gamma")?.unwrap_or(1.0);
        let statistics = cfg.pick(a.statistics, "statistics")?.unwrap_or(Statistics::Fermion);
        let regime = match (cfg.pick(a.lambda, "lambda")?, cfg.pick(a.regime.clone(), "regime")?) {
            (Some(lambda), _) => Regime::Custom { lambda },
            (None, Some(r)) => parse_regime(&r)?,
            (None, None) => Regime::Markovian,
        };
        Ok(Self { kind, gamma, regime, statistics })
    }

    fn bath(&self) -> Result<LorentzianBath, CliError> {
        Ok(self.regime.bath(self.gamma)?)
    }
}

fn default_out_dir() -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("cannot write output: {e}")))
}

fn run_eval(a: &EvalArgs, cfg: &ConfigFile, stdout: &mut dyn Write) -> Result<(), CliError> {
    let phys = Physics::resolve(&a.physics, cfg)?;
    let (p, gamma_t) = match (cfg.pick(a.p, "p")?, cfg.pick(a.t, "t")?) {
        (Some(p), _) => (p, None),
        (None, Some(t)) => (p_analytic(t, &phys.bath()?)?, Some(phys.gamma * t)),
        (None, None) => return Err(CliError::Usage("eval needs --t or --p".into())),
    };
    let spec = match (cfg.pick(a.coeffs.clone(), "coeffs")?, cfg.pick(a.indist, "indist")?) {
        (Some(RealList(c)), _) => {
            if c.len() != 4 {
                return Err(CliError::Usage(format!("--coeffs needs 4 values l,r,l',r', got {}", c.len())));
            }
            let z = |x: f64| Complex64::new(x, 0.0);
            DeformationSpec::new(z(c[0]), z(c[1]), z(c[2]), z(c[3]), phys.statistics)?
        }
        (None, Some(i)) => spec_for_target_i(i, phys.statistics)?,
        (None, None) => return Err(CliError::Usage("eval needs --indist or --coeffs".into())),
    };
    let indist = indistinguishability(&spec)?;
    let c = concurrence_closed(phys.kind, &spec, p)?.value();
    let gain = delta_c(phys.kind, &spec, p)?;
    let prob = success_probability_closed(phys.kind, &spec, p)?;
    let mut line = String::new();
    if let Some(gt) = gamma_t {
        line.push_str(&format!("gamma_t={} ", format_g12(gt)));
    }
    line.push_str(&format!(
        "p={} I={} statistics={} channel={} concurrence={} delta_c={} probability={}\n",
        format_g12(p),
        format_g12(indist),
        phys.statistics,
        phys.kind,
        format_g12(c),
        format_g12(gain),
        format_g12(prob)
    ));
    emit(stdout, &line)
}

fn run_sweep(a: &SweepArgs, cfg: &ConfigFile, stdout: &mut dyn Write) -> Result<(), CliError> {
    let phys = Physics::resolve(&a.physics, cfg)?;
    let config = SweepConfig {
        kind: phys.kind,
        gamma: phys.gamma,
        regime: phys.regime,
        i_values: cfg
            .pick(a.indist.clone(), "indist")?
            .map(|l| l.0)
            .unwrap_or_else(|| sweep::DEFAULT_I_GRID.to_vec()),
        statistics: phys.statistics,
        t_max: cfg.pick(a.t_max, "t_max")?.unwrap_or(10.0),
        n_points: cfg.pick(a.points, "points")?.unwrap_or(201),
        quantity: a.quantity,
    };
    let csv = sweep_csv(&config)?;
    let out = cfg.pick(a.out.clone(), "out")?.or_else(|| default_out_dir().map(|d| d.join("sweep.csv")));
    match out {
        Some(path) => {
            write_file(&path, &csv)?;
            if a.gnuplot || cfg.get::<bool>("gnuplot")?.unwrap_or(false) {
                let gp = path.with_extension("gp");
                write_file(&gp, &gnuplot_script(&path.to_string_lossy(), &config))?;
            }
            emit(stdout, &format!("wrote {}\n", path.display()))
        }
        None => emit(stdout, &csv),
    }
}

fn run_figure(a: &FigureArgs, cfg: &ConfigFile, stdout: &mut dyn Write) -> Result<(), CliError> {
    let preset = FigurePreset::find(&a.id)?;
    let statistics = cfg.pick(a.statistics, "statistics")?.unwrap_or(Statistics::Fermion);
    let gamma = cfg.pick(a.gamma, "gamma")?.unwrap_or(1.0);
    let i_values = cfg
        .pick(a.indist.clone(), "indist")?
        .map(|l| l.0)
        .unwrap_or_else(|| sweep::DEFAULT_I_GRID.to_vec());
    let points = cfg.pick(a.points, "points")?.unwrap_or(sweep::FIGURE_POINTS);
    let dir = cfg
        .pick(a.out.clone(), "out")?
        .or_else(default_out_dir)
        .unwrap_or_else(|| PathBuf::from("."));
    let gnuplot = a.gnuplot || cfg.get::<bool>("gnuplot")?.unwrap_or(false);
    for panel in preset.panels(gamma, statistics, &i_values, points) {
        let path = dir.join(format!("{}_{}.csv", preset.id, panel.regime.label()));
        write_file(&path, &sweep_csv(&panel)?)?;
        if gnuplot {
            write_file(&path.with_extension("gp"), &gnuplot_script(&path.to_string_lossy(), &panel))?;
        }
        emit(stdout, &format!("wrote {}\n", path.display()))?;
    }
    Ok(())
}

fn run_validate(a: &ValidateArgs, cfg: &ConfigFile, stdout: &mut dyn Write) -> Result<(), CliError> {
    let seed = cfg.pick(a.seed, "seed")?.unwrap_or(42);
    let cases = cfg.pick(a.cases, "cases")?.unwrap_or(100);
    if cases == 0 {
        return Err(CliError::Usage("--cases must be at least 1".into()));
    }
    let report = validate::run_validate(seed, cases)?;
    let text = report.render();
    emit(stdout, &text)?;
    if let Some(path) = cfg.pick(a.out.clone(), "out")? {
        write_file(&path, &text)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Validation("oracle deviation above threshold".into()))
    }
}
