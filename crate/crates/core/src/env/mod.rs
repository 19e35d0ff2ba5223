//! Gridworld environments.

pub mod combat;
pub mod nav;
