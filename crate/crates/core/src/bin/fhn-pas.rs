use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fhn_pas::cli::{exit_code, load_config, parse_config, run, RunConfig, RunContext, StudyConfig, StudyKind};
use fhn_pas::Error;

/// FitzHugh–Nagumo cable equation under interferential stimulation.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// JSON run configuration; reference parameters are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.directory`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for jittering certification sample points.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Resting state and its admissibility bounds.
    Equilibrium,
    /// Admissibility of (beta, gamma).
    Admissible,
    /// Contracting rectangle, face fluxes and PAS invariance.
    Rectangle,
    /// Integrate one system and dump the trajectory.
    Simulate,
    /// Averaging residuals as omega1 grows.
    AverageCheck,
    /// Decay of the oscillatory heat integral.
    Oscillatory,
    /// Approximation error of the PAS across omega1.
    Sweep,
}

impl Command {
    fn kind(self) -> StudyKind {
        match self {
            Command::Equilibrium => StudyKind::Equilibrium,
            Command::Admissible => StudyKind::Admissible,
            Command::Rectangle => StudyKind::Rectangle,
            Command::Simulate => StudyKind::Simulate,
            Command::AverageCheck => StudyKind::AverageCheck,
            Command::Oscillatory => StudyKind::Oscillatory,
            Command::Sweep => StudyKind::Sweep,
        }
    }
}

fn config_for(cli: &Cli) -> fhn_pas::Result<RunConfig> {
    let kind = cli.command.kind();
    let Some(path) = &cli.config else {
        return Ok(RunConfig::reference(kind));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Configuration(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str::<serde_json::Value>(&text) {
        Ok(mut v) if v.get("study").is_none() && v.is_object() => {
            v["study"] = serde_json::to_value(StudyConfig::default_for(kind))?;
            parse_config(&v.to_string())
        }
        _ => {
            let config = load_config(path)?;
            if config.study.kind() != kind {
                return Err(Error::Configuration(format!(
                    "study.kind: config declares `{}` but the subcommand is `{}`",
                    config.study.kind().name(),
                    kind.name()
                )));
            }
            Ok(config)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::error!("cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = RunContext {
        out_dir: cli.out.clone(),
        threads: cli.threads,
        seed: cli.seed,
        command: std::env::args().collect(),
    };
    let result = config_for(&cli).and_then(|config| run(&config, &ctx));
    match &result {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("manifest: {}", outcome.manifest.display());
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
