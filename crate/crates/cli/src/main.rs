use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mixdetect_cli::commands::{self, SimMode};
use mixdetect_cli::config::{Format, OutputConfig, RuleName, RunConfig, ScenarioConfig};
use mixdetect_cli::records::Report;
use mixdetect_cli::reproduce::Options;

/// Detect a change affecting an unknown subset of many Gaussian streams.
#[derive(Parser)]
#[command(name = "mixdetect", version)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write results here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    #[arg(long, value_enum)]
    rule: Option<RuleName>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Threshold.
    #[arg(long, short)]
    b: Option<f64>,
    /// Number of streams.
    #[arg(long = "streams", short = 'N')]
    n: Option<usize>,
    #[arg(long)]
    m0: Option<usize>,
    #[arg(long)]
    m1: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Default)]
struct Change {
    /// Change-point.
    #[arg(long)]
    kappa: Option<u64>,
    /// Fraction of affected streams.
    #[arg(long)]
    fraction: Option<f64>,
    /// Number of affected streams.
    #[arg(long)]
    affected: Option<usize>,
    /// Post-change mean of the affected streams.
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Arl,
    Edd,
}

#[derive(Subcommand)]
enum Command {
    /// Choose a threshold from an ARL target or a tail probability.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target_arl: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Estimate ARL or detection delay by simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        change: Change,
        #[arg(long, value_enum, default_value = "arl")]
        mode: ModeArg,
        /// Horizon for the tail-probability ARL estimate.
        #[arg(long)]
        horizon: Option<u64>,
        /// Cap on full runs.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Run a detector over observations in CSV form, one row per time step.
    Detect {
        #[command(flatten)]
        common: Common,
        /// CSV file, or `-` for standard input.
        #[arg(long, short, default_value = "-")]
        input: PathBuf,
        /// Number of streams to list at the stop.
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
    /// Analytic ARL, tail probability and detection delay.
    Analytic {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        change: Change,
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Regenerate reference tables: 1-7 or fig1.
    Reproduce {
        /// Table ids; all when omitted.
        ids: Vec<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Skip simulated cells.
        #[arg(long)]
        theory_only: bool,
        /// Include the costly optional cells.
        #[arg(long)]
        extended: bool,
        /// Write the survival curve of fig1 to this CSV file.
        #[arg(long)]
        survival_csv: Option<PathBuf>,
    },
}

impl Common {
    fn into_config(self) -> RunConfig {
        RunConfig {
            rule: self.rule,
            p0: self.p0,
            delta: self.delta,
            b: self.b,
            n: self.n,
            m0: self.m0,
            m1: self.m1,
            trials: self.trials,
            seed: self.seed,
            ..Default::default()
        }
    }
}

impl Change {
    fn into_scenario(self) -> Option<ScenarioConfig> {
        if self.kappa.is_none() && self.fraction.is_none() && self.affected.is_none() && self.mu.is_none() {
            return None;
        }
        Some(ScenarioConfig {
            kappa: self.kappa,
            fraction: self.fraction,
            affected: self.affected,
            mu: self.mu,
            ..Default::default()
        })
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let mut output = file.output.clone().unwrap_or_default();
    if let Some(f) = cli.format {
        output.format = f;
    }
    if let Some(p) = &cli.output {
        output.path = Some(p.clone());
    }
    let with = |flags: RunConfig| -> RunConfig {
        let mut c = file.clone().merged(flags);
        c.output = None;
        c
    };
    let mut code = ExitCode::SUCCESS;
    let report = match cli.command {
        Command::Calibrate { common, target_arl, alpha, horizon } => {
            let cfg = with(RunConfig { target_arl, alpha, horizon, ..common.into_config() });
            commands::calibrate(&cfg)?
        }
        Command::Simulate { common, change, mode, horizon, cap } => {
            let cfg = with(RunConfig { horizon, cap, scenario: change.into_scenario(), ..common.into_config() });
            let mode = match mode {
                ModeArg::Arl => SimMode::Arl,
                ModeArg::Edd => SimMode::Edd,
            };
            commands::simulate(&cfg, mode)?
        }
        Command::Detect { common, input, top } => {
            let cfg = with(common.into_config());
            let (rep, det) = commands::detect(&cfg, &input, top)?;
            if det.decision.is_none() {
                code = ExitCode::from(2);
            }
            rep
        }
        Command::Analytic { common, change, horizon } => {
            let cfg = with(RunConfig { horizon, scenario: change.into_scenario(), ..common.into_config() });
            commands::analytic(&cfg)?
        }
        Command::Reproduce { ids, trials, seed, theory_only, extended, survival_csv } => {
            let ids = if ids.is_empty() {
                mixdetect_cli::reproduce::TABLE_IDS.iter().map(|s| s.to_string()).collect()
            } else {
                ids
            };
            let opts = Options {
                trials: trials.or(file.trials),
                seed: seed.or(file.seed).unwrap_or(mixdetect_cli::config::DEFAULT_SEED),
                theory_only,
                extended,
            };
            let tables = match commands::reproduce_tables(&ids, &opts) {
                Ok(t) => t,
                Err(e) if e.to_string().starts_with("unknown table id") => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(2));
                }
                Err(e) => return Err(e),
            };
            if let (Some(path), Some(t)) = (&survival_csv, tables.iter().find(|t| !t.survival.is_empty())) {
                std::fs::write(path, commands::survival_csv(t)?).with_context(|| format!("writing {}", path.display()))?;
            }
            let hash = serde_json::to_string(&opts).map(|s| format!("{:x}", sha256(&s)))?;
            commands::tables_report(&tables, &hash, opts.seed)
        }
    };
    emit(&report, &output)?;
    Ok(code)
}

fn sha256(s: &str) -> impl std::fmt::LowerHex {
    use sha2::{Digest, Sha256};
    Sha256::digest(s.as_bytes())
}

fn emit(report: &Report, out: &OutputConfig) -> Result<()> {
    match &out.path {
        Some(p) => {
            let mut f = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            report.write(out.format, &mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            report.write(out.format, &mut lock)?;
        }
    }
    Ok(())
}
