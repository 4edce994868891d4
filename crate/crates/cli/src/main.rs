//! `fractal-index`: harmonic structures, energy-measure tables, Φ-field rank
//! statistics and carpet dimension reports from the command line.

mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fractal_index::carpet::{carpet_by_name, CarpetGenerator};
use fractal_index::config::{ConfigFile, RunSection};
use fractal_index::dimension::BlowupOptions;
use fractal_index::structure::presets::{self, PcfPreset};
use fractal_index::{Error, Rational, Result};

use output::{input_hash, CheckResult, OutputDir, RunManifest};

const THREADS_ENV: &str = "FRACTAL_INDEX_THREADS";

#[derive(Parser)]
#[command(name = "fractal-index", version, about = "Energy measures, index estimates and carpet dimensions on self-similar fractals")]
struct Cli {
    /// Worker threads [env: FRACTAL_INDEX_THREADS; default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Built-in structure (sg2, sg3, interval, sg2-level3)
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML config describing the structure and run settings
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct Basis {
    /// Boundary data of the tuple, vectors separated by ';' (default: unit vectors)
    #[arg(long)]
    basis: Option<String>,
    /// Use f64 instead of exact rationals
    #[arg(long)]
    float: bool,
}

#[derive(Args, Clone)]
struct CarpetSource {
    /// Built-in carpet (carpet-2d, carpet-3d, carpet-2d-l4)
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML config with a [carpet] table
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct Solver {
    /// Largest pre-carpet graph, in vertices
    #[arg(long)]
    cap: Option<u64>,
    /// CG relative residual
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Report an Aitken-extrapolated ratio as well
    #[arg(long)]
    extrapolate: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check D1-D3 and the one-level fixed point of (D, r)
    VerifyHs {
        #[command(flatten)]
        src: Source,
    },
    /// Harmonic extension of boundary values to V_m
    Extend {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        boundary: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
    },
    /// Cell table of the energy measure (or the mutual one with --with)
    EnergyTable {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        boundary: String,
        #[arg(long)]
        with: Option<String>,
        #[arg(long)]
        level: usize,
    },
    /// Cell densities of the tuple's mutual energy measures
    PhiField {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        basis: Basis,
        #[arg(long)]
        level: usize,
    },
    /// eps-rank statistics of the Φ field at several levels
    RankSpectrum {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        basis: Basis,
        /// Comma list or a..b
        #[arg(long)]
        levels: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Cell-level search for points where Φ has full rank
    Blowup {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        basis: Basis,
        /// Determinant threshold
        #[arg(long)]
        threshold: Option<f64>,
        /// Neighborhood radii 1/k per descent step
        #[arg(long)]
        shrink: Option<String>,
        #[arg(long)]
        reference_level: Option<usize>,
        #[arg(long, default_value_t = 6)]
        max_level: usize,
    },
    /// Index estimate across levels and thresholds
    IndexReport {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        basis: Basis,
        #[arg(long)]
        levels: Option<String>,
        /// Comma list of thresholds
        #[arg(long)]
        eps: Option<String>,
    },
    /// Generalized Sierpinski carpets
    Carpet {
        #[command(subcommand)]
        command: CarpetCommand,
    },
}

#[derive(Subcommand)]
enum CarpetCommand {
    /// Symmetry, connectedness, nondiagonality and borders-included checks
    Check {
        #[command(flatten)]
        src: CarpetSource,
    },
    /// Face-to-face resistances of pre-carpet graphs and their ratios
    Resistance {
        #[command(flatten)]
        src: CarpetSource,
        #[arg(long)]
        levels: String,
        #[command(flatten)]
        solver: Solver,
    },
    /// Hausdorff, walk and spectral dimensions and the martingale-dimension bound
    Dims {
        #[command(flatten)]
        src: CarpetSource,
        #[arg(long)]
        levels: Option<String>,
        /// Use this resistance factor instead of solving
        #[arg(long)]
        r_hat: Option<f64>,
        #[command(flatten)]
        solver: Solver,
    },
}

struct Loaded {
    config: Option<ConfigFile>,
    text: Option<String>,
}

fn load_config(path: Option<&Path>) -> Result<Loaded> {
    match path {
        None => Ok(Loaded { config: None, text: None }),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Invalid(format!("cannot read config {}: {e}", p.display())))?;
            Ok(Loaded { config: Some(ConfigFile::parse(&text)?), text: Some(text) })
        }
    }
}

fn pcf(src: &Source, loaded: &Loaded, basis: Option<&Basis>) -> Result<PcfPreset> {
    let mut p = match (&src.preset, &loaded.config) {
        (Some(name), _) => presets::by_name(name)?,
        (None, Some(cfg)) => cfg.pcf()?,
        (None, None) => return Err(Error::Invalid("give --preset or --config".into())),
    };
    if let Some(text) = basis.and_then(|b| b.basis.as_deref()) {
        p.basis = commands::parse_basis(text)?;
    }
    Ok(p)
}

fn carpet(src: &CarpetSource, loaded: &Loaded) -> Result<CarpetGenerator> {
    match (&src.preset, &loaded.config) {
        (Some(name), _) => carpet_by_name(name),
        (None, Some(cfg)) => cfg.carpet(),
        (None, None) => Err(Error::Invalid("give --preset or --config".into())),
    }
}

fn run_section(loaded: &Loaded) -> RunSection {
    loaded.config.as_ref().map(|c| c.run.clone()).unwrap_or_default()
}

fn levels_or(text: Option<&str>, run: &RunSection, default: &[usize]) -> Result<Vec<usize>> {
    match text {
        Some(t) => commands::parse_levels(t),
        None => Ok(run.levels.clone().unwrap_or_else(|| default.to_vec())),
    }
}

fn check_eps(eps: &[f64]) -> Result<()> {
    match eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        Some(e) => Err(Error::Invalid(format!("epsilon {e} is outside (0, 1)"))),
        None => Ok(()),
    }
}

fn solver_settings(s: &Solver, run: &RunSection) -> Result<commands::SolverSettings> {
    let tolerance = s.tolerance.or(run.cg_tolerance).unwrap_or(1e-10);
    if !(tolerance > 0.0) {
        return Err(Error::Invalid(format!("tolerance {tolerance} must be positive")));
    }
    Ok(commands::SolverSettings {
        cap: s.cap.or(run.vertex_cap),
        tolerance,
        max_iterations: s.max_iterations.or(run.cg_max_iterations),
    })
}

fn vector(text: &str) -> Result<Vec<Rational>> {
    commands::parse_vector(text)
}

macro_rules! by_arith {
    ($float:expr, $f:ident ( $($arg:expr),* )) => {
        if $float { commands::$f::<f64>($($arg),*) } else { commands::$f::<Rational>($($arg),*) }
    };
}

struct Plan {
    name: &'static str,
    out: PathBuf,
    config: Option<PathBuf>,
}

fn plan(cmd: &Command) -> Plan {
    let (name, out, config) = match cmd {
        Command::VerifyHs { src } => ("verify-hs", &src.out, &src.config),
        Command::Extend { src, .. } => ("extend", &src.out, &src.config),
        Command::EnergyTable { src, .. } => ("energy-table", &src.out, &src.config),
        Command::PhiField { src, .. } => ("phi-field", &src.out, &src.config),
        Command::RankSpectrum { src, .. } => ("rank-spectrum", &src.out, &src.config),
        Command::Blowup { src, .. } => ("blowup", &src.out, &src.config),
        Command::IndexReport { src, .. } => ("index-report", &src.out, &src.config),
        Command::Carpet { command } => match command {
            CarpetCommand::Check { src } => ("carpet check", &src.out, &src.config),
            CarpetCommand::Resistance { src, .. } => ("carpet resistance", &src.out, &src.config),
            CarpetCommand::Dims { src, .. } => ("carpet dims", &src.out, &src.config),
        },
    };
    Plan { name, out: out.clone(), config: config.clone() }
}

fn execute(cmd: &Command, loaded: &Loaded, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let run = run_section(loaded);
    match cmd {
        Command::VerifyHs { src } => commands::verify_hs(&pcf(src, loaded, None)?, out),
        Command::Extend { src, boundary, level } => commands::extend(&pcf(src, loaded, None)?, &vector(boundary)?, *level, out),
        Command::EnergyTable { src, boundary, with, level } => {
            let g = with.as_deref().map(vector).transpose()?;
            commands::energy_table(&pcf(src, loaded, None)?, &vector(boundary)?, g.as_deref(), *level, out)
        }
        Command::PhiField { src, basis, level } => {
            let p = pcf(src, loaded, Some(basis))?;
            by_arith!(basis.float, phi_field(&p, *level, out))
        }
        Command::RankSpectrum { src, basis, levels, eps } => {
            let p = pcf(src, loaded, Some(basis))?;
            let levels = levels_or(levels.as_deref(), &run, &[4, 6, 8])?;
            let eps = eps.or_else(|| run.epsilons.as_ref().and_then(|e| e.first().copied())).unwrap_or(0.01);
            check_eps(&[eps])?;
            by_arith!(basis.float, rank_spectrum(&p, &levels, eps, out))
        }
        Command::Blowup { src, basis, threshold, shrink, reference_level, max_level } => {
            let p = pcf(src, loaded, Some(basis))?;
            let shrink = match shrink.as_deref() {
                Some(t) => t
                    .split(',')
                    .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("bad shrink entry {s:?}"))))
                    .collect::<Result<Vec<u32>>>()?,
                None => run.shrink.clone().unwrap_or_else(|| vec![2, 4, 8]),
            };
            let opts = BlowupOptions {
                threshold: threshold.or(run.threshold).unwrap_or(0.05),
                shrink,
                reference_level: reference_level.unwrap_or_else(|| (*max_level).clamp(1, 3)),
                max_level: *max_level,
            };
            by_arith!(basis.float, blowup(&p, &opts, out))
        }
        Command::IndexReport { src, basis, levels, eps } => {
            let p = pcf(src, loaded, Some(basis))?;
            let levels = levels_or(levels.as_deref(), &run, &[2, 4, 6])?;
            let eps = match eps {
                Some(t) => commands::parse_floats(t)?,
                None => run.epsilons.clone().unwrap_or_else(|| vec![0.01, 0.05, 0.1]),
            };
            check_eps(&eps)?;
            by_arith!(basis.float, index(&p, &levels, &eps, out))
        }
        Command::Carpet { command } => match command {
            CarpetCommand::Check { src } => commands::carpet_check(&carpet(src, loaded)?, out),
            CarpetCommand::Resistance { src, levels, solver } => commands::carpet_resistance(
                &carpet(src, loaded)?,
                &commands::parse_levels(levels)?,
                &solver_settings(solver, &run)?,
                solver.extrapolate,
                out,
            ),
            CarpetCommand::Dims { src, levels, r_hat, solver } => {
                let levels = levels.as_deref().map(commands::parse_levels).transpose()?;
                commands::carpet_dims(
                    &carpet(src, loaded)?,
                    levels.as_deref(),
                    *r_hat,
                    &solver_settings(solver, &run)?,
                    solver.extrapolate,
                    out,
                )
            }
        },
    }
}

fn configure_threads(cli: Option<usize>) -> Result<()> {
    let from_env = std::env::var(THREADS_ENV).ok();
    let n = match (cli, from_env) {
        (Some(n), _) => Some(n),
        (None, Some(v)) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
        ),
        (None, None) => None,
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::Invalid("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() { 2 } else { 1 }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let arguments: Vec<String> = std::env::args().skip(1).collect();
    let plan = plan(&cli.command);
    let start = Instant::now();
    let loaded = match load_config(plan.config.as_deref()) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let mut out = match OutputDir::create(&plan.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create output directory {}: {e}", plan.out.display());
            return ExitCode::from(1);
        }
    };
    let result = execute(&cli.command, &loaded, &mut out);
    let (status, checks, code) = match result {
        Ok(checks) => match checks.iter().find(|c| !c.passed) {
            Some(c) => {
                eprintln!("check failed: {}", c.name);
                (format!("check failed: {}", c.name), checks, 1)
            }
            None => ("ok".to_string(), checks, 0),
        },
        Err(e) => {
            eprintln!("error: {e}");
            (format!("error: {e}"), Vec::new(), exit_code(&e))
        }
    };
    let manifest = RunManifest {
        tool: "fractal-index",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: plan.name.to_string(),
        input_hash: input_hash(&arguments, loaded.text.as_deref()),
        arguments,
        elapsed_seconds: output::elapsed(start.elapsed()),
        status,
        checks,
        outputs: out.written().to_vec(),
    };
    if let Err(e) = out.write_json("manifest.json", &manifest) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
