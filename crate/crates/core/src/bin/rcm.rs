use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dht_rcm::analytic::DenominatorMode;
use dht_rcm::harness::{
    self, parse_d_list, parse_geometries, Command, ConfigOverrides, ExperimentConfig, OutputFormat,
};

const EXIT_USAGE: u8 = 1;
const EXIT_BREACH: u8 = 2;

/// Routability of DHT routing geometries under random node failure.
#[derive(Debug, Parser)]
#[command(name = "rcm", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Model routability over a q grid.
    Analytic(Opts),
    /// Monte Carlo routability over a q grid.
    Simulate(Opts),
    /// Model and simulator side by side, with per-row tolerance checks.
    Compare(Opts),
    /// Model routability across a list of identifier lengths.
    Asymptotic(Opts),
    /// Scalable/unscalable verdicts with convergence evidence.
    Scalability(Opts),
}

#[derive(Debug, Args)]
struct Opts {
    /// Flat key=value file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated geometries, or `all`.
    #[arg(long)]
    geometry: Option<String>,
    /// Identifier length(s) in bits, comma-separated.
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    q_start: Option<f64>,
    #[arg(long)]
    q_stop: Option<f64>,
    #[arg(long)]
    q_step: Option<f64>,
    #[arg(long)]
    trials: Option<u32>,
    /// Ordered pairs routed per trial.
    #[arg(long)]
    pairs: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// `paper` uses (1-q)N-1 surviving partners, `exact` (N-1)(1-q).
    #[arg(long, value_parser = parse_denominator)]
    denominator: Option<DenominatorMode>,
    /// Symphony near neighbours.
    #[arg(long)]
    kn: Option<u32>,
    /// Symphony shortcuts.
    #[arg(long)]
    ks: Option<u32>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 2 when a compare row exceeds its tolerance.
    #[arg(long)]
    check: bool,
}

fn parse_denominator(s: &str) -> Result<DenominatorMode, String> {
    s.parse().map_err(|e: dht_rcm::RcmError| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: dht_rcm::RcmError| e.to_string())
}

impl Opts {
    fn overrides(self) -> Result<ConfigOverrides, dht_rcm::RcmError> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::from_file(path)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            geometry: self.geometry.as_deref().map(parse_geometries).transpose()?,
            d: self.d.as_deref().map(parse_d_list).transpose()?,
            q_start: self.q_start,
            q_stop: self.q_stop,
            q_step: self.q_step,
            trials: self.trials,
            pairs: self.pairs,
            seed: self.seed,
            denominator: self.denominator,
            k_n: self.kn,
            k_s: self.ks,
            format: self.format,
            out: self.out,
            check: self.check.then_some(true),
        };
        Ok(file.merge(flags))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (command, opts) = match cli.command {
        Sub::Analytic(o) => (Command::Analytic, o),
        Sub::Simulate(o) => (Command::Simulate, o),
        Sub::Compare(o) => (Command::Compare, o),
        Sub::Asymptotic(o) => (Command::Asymptotic, o),
        Sub::Scalability(o) => (Command::Scalability, o),
    };
    let config = match opts
        .overrides()
        .and_then(|o| ExperimentConfig::resolve(command, o))
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("rcm: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let output = match harness::run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("rcm: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(e) = harness::emit(&output.report, config.format, config.out.as_deref()) {
        eprintln!("rcm: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    if config.check && output.breaches > 0 {
        eprintln!("rcm: {} row(s) outside tolerance", output.breaches);
        return ExitCode::from(EXIT_BREACH);
    }
    ExitCode::SUCCESS
}
