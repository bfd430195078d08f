//! `dogm-threat` command-line tool.
//!
//! Exit codes: 0 ok, 1 I/O failure, 2 configuration or usage error,
//! 3 scenario construction failure, 4 input parse failure.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;
use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "dogm-threat", version, about = "Threat-region identification on dynamic occupancy grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and report detection times.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write frames.dogm, ego.plan and reports.jsonl.
        #[arg(long)]
        emit_frames: bool,
        /// Also write a top-down SVG of the first threat frame.
        #[arg(long)]
        emit_svg: bool,
    },
    /// Evaluate a frame stream against an ego plan; one JSON report per line.
    Detect {
        #[command(flatten)]
        common: Common,
        /// Frame file (concatenated DOGM frames).
        #[arg(long)]
        frames: Option<PathBuf>,
        /// Ego plan file.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Time every pipeline stage on synthesized frames.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Number of frames to replay.
        #[arg(long)]
        bench_frames: Option<usize>,
    },
    /// Write a scenario's frames and ego plan for `detect`.
    ExportScenario {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// turning-in, turning-over or straight-crossing.
    #[arg(long)]
    scenario: Option<String>,
    /// Prediction horizon, seconds.
    #[arg(long)]
    horizon: Option<f64>,
    /// Cluster angle uncertainty, degrees.
    #[arg(long)]
    phi_u: Option<f64>,
    /// Noise RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (or file for `detect`).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self, extra: &[(&str, Option<String>)]) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_text(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        }
        let flags = [
            ("scenario", self.scenario.clone()),
            ("horizon", self.horizon.map(|v| v.to_string())),
            ("phi_u", self.phi_u.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (key, value) in flags.iter().chain(extra) {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| CliError::Config(e.to_string()))?;
            }
        }
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { common, emit_frames, emit_svg } => {
            let on = |b: bool| b.then(|| "true".to_string());
            let cfg = common.load(&[("emit_frames", on(emit_frames)), ("emit_svg", on(emit_svg))])?;
            commands::run(&cfg)
        }
        Command::Detect { common, frames, plan } => {
            let path = |p: Option<PathBuf>| p.map(|p| p.display().to_string());
            let cfg = common.load(&[("frames", path(frames)), ("plan", path(plan))])?;
            commands::detect(&cfg)
        }
        Command::Bench { common, bench_frames } => {
            let cfg = common.load(&[("bench_frames", bench_frames.map(|n| n.to_string()))])?;
            commands::bench(&cfg)
        }
        Command::ExportScenario { common } => commands::export(&common.load(&[])?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
