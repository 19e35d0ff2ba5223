//! Q-learning machinery: replay, exploration, TD losses, and the
//! train/eval loops for both tasks.

pub mod epsilon;
pub mod loss;
pub mod replay;
pub mod trainer;

pub use epsilon::{epsilon_greedy, greedy, EpsilonSchedule};
pub use loss::{td_loss_single, td_loss_team, td_targets_single, td_targets_team, SingleBatch, TeamBatch};
pub use replay::{ReplayBuffer, Transition};
pub use trainer::{
    evaluate_combat, evaluate_nav, sub_seed, CombatTrainer, EpochMetrics, EvalSummary, NavTrainer,
    TrainConfig,
};
