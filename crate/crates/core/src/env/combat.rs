//! 5v5 combat on a 15x15 grid. Five learner-controlled agents fight five
//! scripted bots. All ten units act simultaneously each step: moves resolve
//! first under a random priority order, then attacks land at the post-move
//! positions. Each agent observes the 5x5 area around itself as a
//! 150-value vector (25 cells x 6 features). Rewards are shared across the
//! team: +1 per landed attack, +3 on wiping the bots, and a penalty scaled
//! by the bots' surviving health on a loss or timeout.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

pub const GRID: i32 = 15;
pub const TEAM_SIZE: usize = 5;
pub const MAX_STEPS: u32 = 80;
pub const NUM_ACTIONS: usize = 10;
pub const MAX_HEALTH: i32 = 3;
/// Cells per observation window side; an agent sees Chebyshev distance <= 2.
pub const VIEW_SIDE: i32 = 5;
/// Attacks reach the 3x3 neighborhood: Chebyshev distance <= 1.
pub const ATTACK_RANGE: i32 = 1;
pub const FEATURES_PER_CELL: usize = 6;
pub const OBS_LEN: usize = VIEW_SIDE as usize * VIEW_SIDE as usize * FEATURES_PER_CELL;

pub const MODEL_START: (i32, i32) = (3, 3);
pub const BOT_START: (i32, i32) = (11, 11);

pub const ATTACK_REWARD: f64 = 1.0;
pub const WIN_REWARD: f64 = 3.0;
pub const LOSS_PENALTY: f64 = -3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Team {
    Model,
    Bot,
}

impl Team {
    pub fn enemy(self) -> Team {
        match self {
            Team::Model => Team::Bot,
            Team::Bot => Team::Model,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Unit {
    pub row: i32,
    pub col: i32,
    /// 0..=3; the unit is dead (and off the board) at 0.
    pub health: i32,
    /// 1 on the step after an effective attack, else 0.
    pub cooldown: u8,
}

impl Unit {
    pub fn alive(&self) -> bool {
        self.health > 0
    }

    pub fn chebyshev(&self, other: &Unit) -> i32 {
        (self.row - other.row).abs().max((self.col - other.col).abs())
    }

    pub fn manhattan(&self, other: &Unit) -> i32 {
        (self.row - other.row).abs() + (self.col - other.col).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ongoing,
    ModelWin,
    BotWin,
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombatState {
    pub model: [Unit; TEAM_SIZE],
    pub bots: [Unit; TEAM_SIZE],
    pub steps: u32,
    /// Latched true once any bot has ever had a model agent in view.
    pub spotted: bool,
    pub outcome: Outcome,
}

impl CombatState {
    pub fn units(&self, team: Team) -> &[Unit; TEAM_SIZE] {
        match team {
            Team::Model => &self.model,
            Team::Bot => &self.bots,
        }
    }

    fn units_mut(&mut self, team: Team) -> &mut [Unit; TEAM_SIZE] {
        match team {
            Team::Model => &mut self.model,
            Team::Bot => &mut self.bots,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome != Outcome::Ongoing
    }

    pub fn alive_count(&self, team: Team) -> usize {
        self.units(team).iter().filter(|u| u.alive()).count()
    }

    pub fn health_sum(&self, team: Team) -> i32 {
        self.units(team).iter().map(|u| u.health).sum()
    }
}

/// Actions 0..=3 move, 4..=8 attack the enemy with that slot (enemy index
/// 1..=5), 9 is a no-op.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombatAction {
    Up,
    Down,
    Left,
    Right,
    Attack(usize),
    Noop,
}

impl CombatAction {
    pub fn from_index(i: usize) -> Result<CombatAction> {
        match i {
            0 => Ok(CombatAction::Up),
            1 => Ok(CombatAction::Down),
            2 => Ok(CombatAction::Left),
            3 => Ok(CombatAction::Right),
            4..=8 => Ok(CombatAction::Attack(i - 4)),
            9 => Ok(CombatAction::Noop),
            _ => Err(Error::Usage(format!("combat action index {i} out of range 0..10"))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            CombatAction::Up => 0,
            CombatAction::Down => 1,
            CombatAction::Left => 2,
            CombatAction::Right => 3,
            CombatAction::Attack(slot) => 4 + slot,
            CombatAction::Noop => 9,
        }
    }

    fn move_delta(self) -> Option<(i32, i32)> {
        match self {
            CombatAction::Up => Some((-1, 0)),
            CombatAction::Down => Some((1, 0)),
            CombatAction::Left => Some((0, -1)),
            CombatAction::Right => Some((0, 1)),
            _ => None,
        }
    }
}

fn spawn_team(rng: &mut ChaCha8Rng, center: (i32, i32)) -> [Unit; TEAM_SIZE] {
    let mut cells: Vec<(i32, i32)> = Vec::with_capacity(TEAM_SIZE);
    while cells.len() < TEAM_SIZE {
        let cell = (
            center.0 + rng.random_range(-1..=1),
            center.1 + rng.random_range(-1..=1),
        );
        if !cells.contains(&cell) {
            cells.push(cell);
        }
    }
    std::array::from_fn(|i| Unit { row: cells[i].0, col: cells[i].1, health: MAX_HEALTH, cooldown: 0 })
}

/// Spawn each team on five distinct cells chosen uniformly from the 3x3
/// area around its fixed start.
pub fn reset(rng: &mut ChaCha8Rng) -> CombatState {
    CombatState {
        model: spawn_team(rng, MODEL_START),
        bots: spawn_team(rng, BOT_START),
        steps: 0,
        spotted: false,
        outcome: Outcome::Ongoing,
    }
}

fn in_grid(row: i32, col: i32) -> bool {
    (0..GRID).contains(&row) && (0..GRID).contains(&col)
}

/// Model agents a bot can currently see (Chebyshev <= 2 of any living bot).
fn visible_model_slots(state: &CombatState) -> Vec<usize> {
    let mut visible = Vec::new();
    for (m_slot, m) in state.model.iter().enumerate() {
        if !m.alive() {
            continue;
        }
        let seen = state
            .bots
            .iter()
            .any(|b| b.alive() && b.chebyshev(m) <= (VIEW_SIDE - 1) / 2);
        if seen {
            visible.push(m_slot);
        }
    }
    visible
}

/// Scripted opponent: wander until contact, then each bot chases the model
/// agent nearest to it among those visible to any bot (Manhattan distance,
/// ties to the lowest index) and attacks once adjacent with cooldown ready.
pub fn bot_policy(state: &CombatState, rng: &mut ChaCha8Rng) -> [CombatAction; TEAM_SIZE] {
    let visible = visible_model_slots(state);
    std::array::from_fn(|slot| {
        let bot = &state.bots[slot];
        if !bot.alive() {
            return CombatAction::Noop;
        }
        if visible.is_empty() {
            let idx = rng.random_range(0..4);
            return CombatAction::from_index(idx).unwrap();
        }
        let target = *visible
            .iter()
            .min_by_key(|&&m| (bot.manhattan(&state.model[m]), m))
            .unwrap();
        let enemy = &state.model[target];
        if bot.chebyshev(enemy) <= ATTACK_RANGE && bot.cooldown == 0 {
            return CombatAction::Attack(target);
        }
        // Close the Manhattan gap, preferring the row move.
        if bot.row < enemy.row {
            CombatAction::Down
        } else if bot.row > enemy.row {
            CombatAction::Up
        } else if bot.col < enemy.col {
            CombatAction::Right
        } else {
            CombatAction::Left
        }
    })
}

/// Per-step damage accounting, exposed for the bookkeeping invariants:
/// `hits[team][slot]` counts effective attacks landed on that unit.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepDetail {
    pub hits_on_model: [u8; TEAM_SIZE],
    pub hits_on_bots: [u8; TEAM_SIZE],
    pub model_attacks_landed: u32,
}

/// Advance one step with the given model-team actions (bot actions come
/// from [`bot_policy`]). Returns the new state, the shared reward, the
/// terminal flag, and the outcome label.
pub fn step(
    state: &CombatState,
    model_actions: [CombatAction; TEAM_SIZE],
    rng: &mut ChaCha8Rng,
) -> Result<(CombatState, f64, bool, Outcome)> {
    let (next, reward, terminal, outcome, _) = step_detailed(state, model_actions, rng)?;
    Ok((next, reward, terminal, outcome))
}

pub fn step_detailed(
    state: &CombatState,
    model_actions: [CombatAction; TEAM_SIZE],
    rng: &mut ChaCha8Rng,
) -> Result<(CombatState, f64, bool, Outcome, StepDetail)> {
    if state.is_terminal() {
        return Err(Error::Usage("combat_step on a terminal episode".into()));
    }
    let bot_actions = bot_policy(state, rng);
    let mut next = state.clone();
    next.spotted = state.spotted || !visible_model_slots(state).is_empty();

    let all_actions = |team: Team, slot: usize| -> CombatAction {
        match team {
            Team::Model => model_actions[slot],
            Team::Bot => bot_actions[slot],
        }
    };

    // Phase 1: moves, in a fresh random priority order. A unit moves only
    // if its target cell is free at its turn, so two units never merge and
    // position swaps deadlock (both see an occupied cell and stay).
    let mut occupied = [[false; GRID as usize]; GRID as usize];
    for team in [Team::Model, Team::Bot] {
        for u in next.units(team) {
            if u.alive() {
                occupied[u.row as usize][u.col as usize] = true;
            }
        }
    }
    let mut movers: Vec<(Team, usize, (i32, i32))> = Vec::new();
    for team in [Team::Model, Team::Bot] {
        for slot in 0..TEAM_SIZE {
            let unit = &next.units(team)[slot];
            if !unit.alive() {
                continue;
            }
            if let Some((dr, dc)) = all_actions(team, slot).move_delta() {
                movers.push((team, slot, (dr, dc)));
            }
        }
    }
    use rand::seq::SliceRandom;
    movers.shuffle(rng);
    for (team, slot, (dr, dc)) in movers {
        let unit = next.units(team)[slot];
        let (nr, nc) = (unit.row + dr, unit.col + dc);
        if !in_grid(nr, nc) || occupied[nr as usize][nc as usize] {
            continue;
        }
        occupied[unit.row as usize][unit.col as usize] = false;
        occupied[nr as usize][nc as usize] = true;
        let u = &mut next.units_mut(team)[slot];
        u.row = nr;
        u.col = nc;
    }

    // Phase 2: attacks, judged simultaneously at post-move positions. An
    // attack is effective iff the attacker is alive with cooldown 0 and the
    // named enemy is alive within the 3x3 neighborhood; only effective
    // attacks set the attacker's cooldown.
    let mut detail = StepDetail::default();
    let mut new_cooldowns: [[u8; TEAM_SIZE]; 2] = [[0; TEAM_SIZE]; 2];
    for (ti, team) in [Team::Model, Team::Bot].into_iter().enumerate() {
        for slot in 0..TEAM_SIZE {
            let attacker = &next.units(team)[slot];
            if !attacker.alive() {
                continue;
            }
            let target_slot = match all_actions(team, slot) {
                CombatAction::Attack(t) => t,
                _ => continue,
            };
            if target_slot >= TEAM_SIZE {
                return Err(Error::Usage(format!("attack target index {target_slot} out of range")));
            }
            if attacker.cooldown != 0 {
                continue;
            }
            let target = &next.units(team.enemy())[target_slot];
            if !target.alive() || attacker.chebyshev(target) > ATTACK_RANGE {
                continue;
            }
            match team {
                Team::Model => {
                    detail.hits_on_bots[target_slot] += 1;
                    detail.model_attacks_landed += 1;
                }
                Team::Bot => detail.hits_on_model[target_slot] += 1,
            }
            new_cooldowns[ti][slot] = 1;
        }
    }
    for (ti, team) in [Team::Model, Team::Bot].into_iter().enumerate() {
        let hits = match team {
            Team::Model => &detail.hits_on_model,
            Team::Bot => &detail.hits_on_bots,
        };
        for slot in 0..TEAM_SIZE {
            let u = &mut next.units_mut(team)[slot];
            u.health = (u.health - hits[slot] as i32).max(0);
            u.cooldown = new_cooldowns[ti][slot];
        }
    }

    next.steps += 1;
    let mut reward = detail.model_attacks_landed as f64 * ATTACK_REWARD;
    if next.alive_count(Team::Bot) == 0 {
        next.outcome = Outcome::ModelWin;
        reward += WIN_REWARD;
    } else if next.alive_count(Team::Model) == 0 {
        next.outcome = Outcome::BotWin;
        reward += LOSS_PENALTY - next.health_sum(Team::Bot) as f64;
    } else if next.steps >= MAX_STEPS {
        next.outcome = Outcome::Timeout;
        reward += LOSS_PENALTY - next.health_sum(Team::Bot) as f64;
    }
    let terminal = next.is_terminal();
    let outcome = next.outcome;
    Ok((next, reward, terminal, outcome, detail))
}

/// Observation for one model agent: the 5x5 window centered on it, cells in
/// row-major order, each encoded as (x, y, index, team, health, cooldown).
/// Positions are absolute; with `raw` false they are normalized (col/14,
/// row/14, index/5, health/3) so every entry lies in [-1, 1]. Off-grid
/// cells and the whole vector of a dead observer are zeros.
pub fn observe_with(state: &CombatState, model_slot: usize, raw: bool) -> Tensor {
    assert!(model_slot < TEAM_SIZE, "model slot {model_slot} out of range");
    let mut out = vec![0.0; OBS_LEN];
    let me = &state.model[model_slot];
    if !me.alive() {
        return Tensor::new(&[1, OBS_LEN], out);
    }
    let half = (VIEW_SIDE - 1) / 2;
    let mut cell = 0usize;
    for dr in -half..=half {
        for dc in -half..=half {
            let (row, col) = (me.row + dr, me.col + dc);
            let base = cell * FEATURES_PER_CELL;
            cell += 1;
            if !in_grid(row, col) {
                continue;
            }
            let (x, y) = if raw {
                (col as f64, row as f64)
            } else {
                (col as f64 / (GRID - 1) as f64, row as f64 / (GRID - 1) as f64)
            };
            out[base] = x;
            out[base + 1] = y;
            let occupant = [Team::Model, Team::Bot].into_iter().find_map(|team| {
                state.units(team).iter().enumerate().find_map(|(slot, u)| {
                    (u.alive() && u.row == row && u.col == col).then_some((team, slot, u))
                })
            });
            if let Some((team, slot, unit)) = occupant {
                let index = (slot + 1) as f64;
                let health = unit.health as f64;
                out[base + 2] = if raw { index } else { index / TEAM_SIZE as f64 };
                out[base + 3] = if team == Team::Model { 1.0 } else { -1.0 };
                out[base + 4] = if raw { health } else { health / MAX_HEALTH as f64 };
                out[base + 5] = unit.cooldown as f64;
            }
        }
    }
    Tensor::new(&[1, OBS_LEN], out)
}

pub fn observe(state: &CombatState, model_slot: usize) -> Tensor {
    observe_with(state, model_slot, false)
}

/// All five model observations stacked into a [5, 150] matrix.
pub fn observe_team(state: &CombatState, raw: bool) -> Tensor {
    let mut data = Vec::with_capacity(TEAM_SIZE * OBS_LEN);
    for slot in 0..TEAM_SIZE {
        data.extend_from_slice(observe_with(state, slot, raw).data());
    }
    Tensor::new(&[TEAM_SIZE, OBS_LEN], data)
}

/// Step-by-step unit table for trace dumps.
pub fn format_unit_table(state: &CombatState) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(
        out,
        "step {:>2}  spotted {}  outcome {:?}",
        state.steps, state.spotted, state.outcome
    )
    .unwrap();
    writeln!(out, "team  idx  row  col  hp  cool  alive").unwrap();
    for (team, label) in [(Team::Model, "model"), (Team::Bot, "bot  ")] {
        for (slot, u) in state.units(team).iter().enumerate() {
            writeln!(
                out,
                "{label}  {:>2}  {:>3}  {:>3}  {:>2}  {:>4}  {}",
                slot + 1,
                u.row,
                u.col,
                u.health,
                u.cooldown,
                if u.alive() { "yes" } else { "no" }
            )
            .unwrap();
        }
    }
    out
}
