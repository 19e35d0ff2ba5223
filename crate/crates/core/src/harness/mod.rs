//! Run orchestration: config files, checkpoints, metrics, heatmaps, and
//! the command-line entry point.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod heatmap;
pub mod metrics;
pub mod run;

pub use checkpoint::Checkpoint;
pub use config::{EnvKind, ModelKind, RunConfig};
pub use metrics::{CsvWriter, CSV_HEADER};
pub use run::{attention_match_rate, cmd_eval, cmd_heatmap, cmd_train, EvalArgs, HeatmapArgs, TrainArgs};
