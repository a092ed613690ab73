use std::path::PathBuf;
use std::process::ExitCode;

use bridgelab::commands::{Command, EXIT_CONFIG};
use bridgelab::config::RawConfig;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bridgelab", version, about = "Bridge functional, JKO and particle experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// F_eps along an epsilon ladder against the entropy target
    GammaSweep(Common),
    /// Minimizing-movement heat flow with variance and dissipation checks
    JkoRun(Common),
    /// Brownian particle ensembles against heat evolution
    ParticlesRun(Common),
    /// One static bridge and the transport potentials
    BridgeSolve(Common),
    /// Torus seminorm inequalities and Gaussian moments
    SeminormCheck(Common),
    /// Tilde coupling normalisation, marginals and lower bound
    TildeqReport(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for CSV files
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Shorthand for `--set seed=N`
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override one key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the resolved configuration and exit
    #[arg(long)]
    print_config: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let (command, common) = match cli.command {
        Cmd::GammaSweep(c) => (Command::GammaSweep, c),
        Cmd::JkoRun(c) => (Command::JkoRun, c),
        Cmd::ParticlesRun(c) => (Command::ParticlesRun, c),
        Cmd::BridgeSolve(c) => (Command::BridgeSolve, c),
        Cmd::SeminormCheck(c) => (Command::SeminormCheck, c),
        Cmd::TildeqReport(c) => (Command::TildeqReport, c),
    };
    ExitCode::from(execute(command, &common) as u8)
}

fn execute(command: Command, common: &Common) -> i32 {
    let mut raw = match &common.config {
        Some(path) => match RawConfig::load(path) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("{}: config error: {e}", command.name());
                return EXIT_CONFIG;
            }
        },
        None => RawConfig::default(),
    };
    if let Some(s) = common.seed {
        raw.insert("seed", &s.to_string());
    }
    for a in &common.set {
        if let Err(e) = raw.set(a) {
            eprintln!("{}: config error: {e}", command.name());
            return EXIT_CONFIG;
        }
    }
    if common.print_config {
        return match command.resolve(&raw) {
            Ok(cfg) => {
                print!("{}", cfg.canonical());
                println!("# config_sha256={}", cfg.hash());
                0
            }
            Err(e) => {
                eprintln!("{}: {e}", command.name());
                e.exit_code()
            }
        };
    }
    match command.run(&raw, &common.out) {
        Ok(outcome) => {
            for line in &outcome.notes {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            for line in &outcome.failures {
                eprintln!("FAIL {line}");
            }
            println!("{}: {}", command.name(), if outcome.pass { "PASS" } else { "FAIL" });
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("{}: {e}", command.name());
            e.exit_code()
        }
    }
}
