//! Temporal-difference targets and losses.
//!
//! Targets come from the frozen target network on a throwaway tape and
//! re-enter the online graph as constants, so no gradient flows into the
//! target parameters.

use crate::error::{Error, Result};
use crate::model::{ImageQNet, TeamQNet};
use crate::nn::tensor::Tensor;
use crate::nn::{Tape, Var};

fn row_max(t: &Tensor, row: usize) -> f64 {
    t.row_slice(row).iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Sampled single-agent transitions, already observed into image tensors.
#[derive(Clone, Debug)]
pub struct SingleBatch {
    pub states: Vec<Tensor>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<Tensor>,
    pub terminals: Vec<bool>,
}

impl SingleBatch {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let n = self.states.len();
        if n == 0 {
            return Err(Error::Usage("empty training batch".into()));
        }
        if [self.actions.len(), self.rewards.len(), self.next_states.len(), self.terminals.len()]
            != [n; 4]
        {
            return Err(Error::Usage("batch field lengths disagree".into()));
        }
        Ok(())
    }
}

/// y_i = r_i for terminal transitions, otherwise r_i + gamma * max_a Q(s', a).
pub fn td_targets_single<M: ImageQNet>(
    target_net: &M,
    batch: &SingleBatch,
    gamma: f64,
) -> Result<Vec<f64>> {
    batch.validate()?;
    let mut tape = Tape::new();
    let fwd = target_net.forward_batch(&mut tape, &batch.next_states)?;
    let q = tape.value(fwd.q_all);
    Ok((0..batch.len())
        .map(|i| {
            if batch.terminals[i] {
                batch.rewards[i]
            } else {
                batch.rewards[i] + gamma * row_max(q, i)
            }
        })
        .collect())
}

/// Mean squared TD error plus the model's regularizer, when it has one.
pub fn td_loss_single<M: ImageQNet>(
    tape: &mut Tape,
    online: &M,
    batch: &SingleBatch,
    targets: &[f64],
) -> Result<Var> {
    batch.validate()?;
    assert_eq!(targets.len(), batch.len(), "one target per transition");
    let fwd = online.forward_batch(tape, &batch.states)?;
    let picked = tape.pick_per_row(fwd.q_all, batch.actions.clone());
    let y = tape.constant(Tensor::new(&[batch.len(), 1], targets.to_vec()));
    let d = tape.sub(picked, y);
    let sq = tape.mul(d, d);
    let mse = tape.mean(sq);
    Ok(match online.regularizer(tape, &fwd) {
        Some(r) => tape.add(mse, r),
        None => mse,
    })
}

/// Sampled team transitions. `alive` marks the agents that actually acted
/// at the stored step; dead agents are excluded from the loss.
#[derive(Clone, Debug)]
pub struct TeamBatch {
    pub states: Vec<Tensor>,
    pub actions: Vec<Vec<usize>>,
    pub alive: Vec<Vec<bool>>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<Tensor>,
    pub terminals: Vec<bool>,
}

impl TeamBatch {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn validate(&self, agents: usize) -> Result<()> {
        let n = self.states.len();
        if n == 0 {
            return Err(Error::Usage("empty training batch".into()));
        }
        if [self.actions.len(), self.alive.len(), self.rewards.len(), self.next_states.len(), self.terminals.len()]
            != [n; 5]
        {
            return Err(Error::Usage("batch field lengths disagree".into()));
        }
        for i in 0..n {
            if self.actions[i].len() != agents || self.alive[i].len() != agents {
                return Err(Error::Usage(format!(
                    "batch item {i} does not carry {agents} per-agent entries"
                )));
            }
        }
        Ok(())
    }
}

/// One target per agent row, sharing the team reward: y = r for terminal
/// items, otherwise r + gamma * max_a Q_i(o'_i, a). Dead agents still get
/// a target (their rows are masked out of the loss instead).
pub fn td_targets_team<M: TeamQNet>(
    target_net: &M,
    batch: &TeamBatch,
    gamma: f64,
) -> Result<Vec<f64>> {
    let k = target_net.agents();
    batch.validate(k)?;
    let mut tape = Tape::new();
    let fwd = target_net.forward_batch(&mut tape, &batch.next_states)?;
    let q = tape.value(fwd.q_all);
    let mut out = Vec::with_capacity(batch.len() * k);
    for i in 0..batch.len() {
        for agent in 0..k {
            out.push(if batch.terminals[i] {
                batch.rewards[i]
            } else {
                batch.rewards[i] + gamma * row_max(q, i * k + agent)
            });
        }
    }
    Ok(out)
}

/// Squared TD error averaged over the rows whose agent was alive when the
/// transition was recorded, plus the model's regularizer.
pub fn td_loss_team<M: TeamQNet>(
    tape: &mut Tape,
    online: &M,
    batch: &TeamBatch,
    targets: &[f64],
) -> Result<Var> {
    let k = online.agents();
    batch.validate(k)?;
    assert_eq!(targets.len(), batch.len() * k, "one target per agent row");
    let alive_count: usize = batch.alive.iter().flatten().filter(|&&a| a).count();
    if alive_count == 0 {
        return Err(Error::Usage("every agent in the batch is masked out".into()));
    }
    let fwd = online.forward_batch(tape, &batch.states)?;
    let flat_actions: Vec<usize> = batch.actions.iter().flatten().copied().collect();
    let picked = tape.pick_per_row(fwd.q_all, flat_actions);
    let y = tape.constant(Tensor::new(&[targets.len(), 1], targets.to_vec()));
    let d = tape.sub(picked, y);
    let sq = tape.mul(d, d);
    let mask: Vec<f64> = batch
        .alive
        .iter()
        .flatten()
        .map(|&a| if a { 1.0 } else { 0.0 })
        .collect();
    let m = tape.constant(Tensor::new(&[targets.len(), 1], mask));
    let masked = tape.mul(sq, m);
    let total = tape.sum(masked);
    let mse = tape.scale(total, 1.0 / alive_count as f64);
    Ok(match online.regularizer(tape, &fwd) {
        Some(r) => tape.add(mse, r),
        None => mse,
    })
}
