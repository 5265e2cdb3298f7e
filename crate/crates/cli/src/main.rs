use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use arexit::mc::Parallelism;
use arexit::McConfig;
use arexit_cli::commands::{cmd_analyze, cmd_simulate, cmd_table1};
use arexit_cli::config::OutputSection;
use arexit_cli::error::EXIT_OK;
use arexit_cli::verify::{cmd_verify, VerifyOptions, DEFAULT_SEED, DEFAULT_TRIALS};
use arexit_cli::{CliError, Format, Report, RunConfig};
use clap::{Args, Parser, Subcommand};

/// Exit-time exponents and Monte Carlo exit times for Gaussian
/// autoregressive processes.
#[derive(Debug, Parser)]
#[command(name = "arexit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stationary covariance, exit exponent, finite-horizon table and optimal path.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo estimate of the mean exit time.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: McFlags,
        /// Comma-separated noise scales to sweep.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
    },
    /// Rerun the bivariate exit-time experiment next to the published values.
    Table1 {
        /// Only `[mc]` and `[output]` are read from this file.
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: McFlags,
        /// Subset of the table's noise scales.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
    },
    /// Randomized oracle cross-checks with a fixed seed.
    Verify {
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct McFlags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    max_steps: Option<u64>,
    /// Worker threads, or `auto`.
    #[arg(long)]
    threads: Option<Parallelism>,
}

impl McFlags {
    fn apply(&self, mc: &mut McConfig) -> Result<(), CliError> {
        if let Some(s) = self.seed {
            mc.seed = s;
        }
        if let Some(n) = self.paths {
            mc.n_paths = n;
        }
        if let Some(m) = self.max_steps {
            mc.max_steps = m;
        }
        if let Some(p) = self.threads {
            mc.parallelism = p;
        }
        mc.validate().map_err(|e| CliError::Config(e.to_string()))
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    RunConfig::load(path)
}

fn emit(report: &dyn Report, format: Option<Format>, out: Option<&PathBuf>, file: &OutputSection) -> Result<(), CliError> {
    let format = format.or(file.format).unwrap_or_default();
    match out.or(file.path.as_ref()) {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            report.render(format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            report.render(format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { common } => {
            let cfg = load(&common)?;
            let report = cmd_analyze(&cfg)?;
            emit(&report, common.format, common.out.as_ref(), &cfg.output)
        }
        Command::Simulate { common, mc, eps } => {
            let mut cfg = load(&common)?;
            mc.apply(&mut cfg.mc)?;
            let report = cmd_simulate(&cfg, Some(&eps))?;
            emit(&report, common.format, common.out.as_ref(), &cfg.output)
        }
        Command::Table1 { common, mc, eps } => {
            let (mut mc_cfg, output) = match &common.config {
                Some(_) => {
                    let cfg = load(&common)?;
                    (cfg.mc, cfg.output)
                }
                None => (McConfig::default(), OutputSection::default()),
            };
            mc.apply(&mut mc_cfg)?;
            let report = cmd_table1(&mc_cfg, Some(&eps))?;
            emit(&report, common.format, common.out.as_ref(), &output)
        }
        Command::Verify {
            format,
            out,
            seed,
            trials,
            inject_fault,
        } => {
            let report = cmd_verify(VerifyOptions {
                seed,
                trials,
                inject_fault,
            })?;
            emit(&report, format, out.as_ref(), &OutputSection::default())?;
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::VerifyFailed(report.failures()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
