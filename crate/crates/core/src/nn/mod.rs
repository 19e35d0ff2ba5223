//! Dense-tensor reverse-mode autodiff, just large enough for the models in
//! this crate. Values are flat `Vec<f64>` buffers plus a shape; gradients
//! are accumulated on a per-forward tape that is discarded after
//! `backward`. Shape mismatches are programmer errors and panic.

pub mod adam;
pub mod gradcheck;
pub mod mlp;
pub mod params;
pub mod tape;
pub mod tensor;

pub use adam::AdamState;
pub use mlp::{Activation, Mlp};
pub use params::{ParamId, ParamSet};
pub use tape::{Tape, Var};
pub use tensor::Tensor;

/// Negative-side slope used by every leaky ReLU in the crate.
pub const LEAKY_SLOPE: f64 = 0.01;
