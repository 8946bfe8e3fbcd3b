//! Command-line front end.
//!
//! Exit codes: 0 success, 1 engine or I/O failure, 2 usage or configuration
//! error, 3 a `reproduce` check failed.

pub mod charts;
pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use config::{ExperimentConfig, InstanceSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "stratsim", version, about = "Repeated recommendation games against strategic users")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
struct Common {
    /// TOML experiment file.
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario name instead of a config file.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds (overrides engine.seeds).
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    grid_k: Option<usize>,
    #[arg(long)]
    tau_dom: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the repeated game and write trajectories.
    Simulate(Common),
    /// Iterated elimination of dominated models for the configured user strategy.
    StableSet(Common),
    /// Search the candidate family for the strategic user's best strategy.
    Solve(Common),
    /// Strategization gap and trust measure.
    Trust(Common),
    /// Forecast versus realized payoff of a counterfactual algorithm.
    Counterfactual(Common),
    /// Check the engines against the closed-form results.
    Reproduce {
        #[command(flatten)]
        common: Common,
        /// Comma-separated proposition ids (overrides reproduce.props).
        #[arg(long, value_delimiter = ',')]
        props: Option<Vec<u8>>,
        /// Also re-run checks 4 and 5 with their small constants at 0.001 and 0.05.
        #[arg(long)]
        sensitivity: bool,
    },
    /// Render SVG charts from a run directory or report.
    Charts {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn load_config(common: &Common, required: bool) -> Result<ExperimentConfig> {
    let mut cfg = match (&common.config, &common.scenario) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => scenario_config(name),
        (None, None) if !required => scenario_config("s1"),
        (None, None) => return Err(Error::Config("pass --config <file> or --scenario <name>".into())),
    };
    if let Some(seeds) = &common.seeds {
        cfg.engine.seeds = seeds.clone();
    }
    if let Some(k) = common.grid_k {
        cfg.engine.grid_k = k;
    }
    if let Some(t) = common.tau_dom {
        cfg.engine.tau_dom = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// A config with every section at its default.
pub fn scenario_config(name: &str) -> ExperimentConfig {
    ExperimentConfig {
        instance: InstanceSpec::Scenario { name: name.to_string() },
        algorithm: None,
        user: Default::default(),
        engine: Default::default(),
        counterfactual: None,
        trust: Default::default(),
        reproduce: Default::default(),
        output: Default::default(),
    }
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir))
}

fn execute(command: Command) -> Result<(commands::Outcome, Option<(PathBuf, String, String)>)> {
    type Runner = fn(&ExperimentConfig, &Path) -> Result<commands::Outcome>;
    let (name, common, runner, required): (&str, Common, Runner, bool) = match command {
        Command::Simulate(c) => ("simulate", c, commands::simulate, true),
        Command::StableSet(c) => ("stable-set", c, commands::stable_set_cmd, true),
        Command::Solve(c) => ("solve", c, commands::solve, true),
        Command::Trust(c) => ("trust", c, commands::trust, true),
        Command::Counterfactual(c) => ("counterfactual", c, commands::counterfactual, true),
        Command::Reproduce { common, props, sensitivity } => {
            let mut cfg = load_config(&common, false)?;
            cfg.reproduce.sensitivity |= sensitivity;
            if let Some(p) = props {
                cfg.reproduce.props = p;
                cfg.validate()?;
            }
            let out = out_dir(&common, &cfg);
            let outcome = commands::reproduce(&cfg, &out)?;
            return Ok((outcome, Some((out, "reproduce".into(), cfg.hash()))));
        }
        Command::Charts { input, out } => return Ok((charts::charts(&input, &out)?, None)),
    };
    let cfg = load_config(&common, required)?;
    let out = out_dir(&common, &cfg);
    let outcome = runner(&cfg, &out)?;
    Ok((outcome, Some((out, name.to_string(), cfg.hash()))))
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let started = report::now_ms();
    let run = || execute(cli.command);
    let result = match cli.jobs {
        Some(0) => Err(Error::Config("--jobs must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(Error::InvalidParameter(format!("thread pool: {e}"))),
        },
        None => run(),
    };
    match result {
        Ok((outcome, meta)) => {
            if let Some((out, name, hash)) = meta {
                if let Err(e) = report::write_run_meta(&out, &name, &hash, started, &outcome.files) {
                    eprintln!("error: {e}");
                    return EXIT_FAILURE;
                }
            }
            // A closed pipe (e.g. `| head`) must not turn a finished run into a panic.
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", outcome.summary);
            for f in &outcome.files {
                let _ = writeln!(stdout, "wrote {}", f.display());
            }
            if outcome.success {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
