//! Multi-focus attention networks for deep Q-learning.
//!
//! The crate is organized bottom-up:
//!
//! * [`nn`] is a small dense-tensor autodiff library (tape-based reverse
//!   mode) with an Adam optimizer and a finite-difference gradient checker.
//! * [`env`] holds the two gridworld tasks: waypoint navigation rendered as
//!   an RGB image, and a 5v5 combat game observed as per-agent feature
//!   vectors.
//! * [`model`] builds the attention Q-networks and the baselines they are
//!   compared against.
//! * [`rl`] is the Q-learning machinery: replay memory, epsilon schedule,
//!   TD loss construction, and the training loops.
//! * [`harness`] is the user-facing layer: config files, CSV metrics,
//!   checkpoints, heatmap export, and the train/eval/heatmap commands
//!   wired up by the `manet` binary.
//!
//! Everything is driven by explicitly seeded ChaCha generators; a fixed
//! seed reproduces a run byte for byte.

pub mod env;
pub mod error;
pub mod harness;
pub mod model;
pub mod nn;
pub mod rl;

pub use error::{Error, Result};
pub use harness::cli::harness_main;
