//! Argument parsing and process exit codes.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::harness::run::{cmd_eval, cmd_heatmap, cmd_train, EvalArgs, HeatmapArgs, TrainArgs};

#[derive(Parser)]
#[command(
    name = "manet",
    about = "Attention-based Q-learning on gridworld navigation and team combat"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a config file, writing metrics and checkpoints.
    Train {
        /// Flat key=value config file; `env` and `model` are required.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for metrics.csv, config.txt, checkpoint.bin.
        #[arg(long)]
        out: PathBuf,
        /// Override the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Continue from an earlier checkpoint of the same config.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Evaluate a checkpoint and print a one-line summary.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 100)]
        episodes: u32,
        /// Exploration mixed into the greedy policy during evaluation.
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dump per-step attention heatmaps and board frames for a checkpoint.
    Heatmap {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Episodes over which to measure how often the attention argmax
        /// cells coincide with the agent and its next waypoint.
        #[arg(long, default_value_t = 100)]
        episodes: u32,
    },
}

/// Returns the process exit code: 0 on success, 1 with a one-line
/// diagnostic on stderr otherwise. Usage errors exit 2 via clap.
pub fn harness_main() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train { config, out, seed, resume } => {
            cmd_train(&TrainArgs { config, out, seed, resume })
        }
        Command::Eval { checkpoint, episodes, epsilon, seed } => {
            cmd_eval(&EvalArgs { checkpoint, episodes, epsilon, seed })
        }
        Command::Heatmap { checkpoint, out, seed, episodes } => {
            cmd_heatmap(&HeatmapArgs { checkpoint, out, seed, episodes })
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
