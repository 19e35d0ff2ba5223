//! Waypoint navigation on an 8x8 grid. The agent must visit four waypoints
//! in a fixed order; the observation is a 40x40 RGB rendering in which the
//! agent is green and each still-unvisited waypoint is a shade of red,
//! darker shades to be visited first. Visited waypoints vanish, which keeps
//! the image a complete (Markov) description of the state.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

pub const GRID: usize = 8;
pub const NUM_WAYPOINTS: usize = 4;
pub const MAX_STEPS: u32 = 200;
pub const NUM_ACTIONS: usize = 4;
/// Each grid cell is rendered as a PATCH x PATCH block.
pub const PATCH: usize = 5;
pub const IMAGE_SIDE: usize = GRID * PATCH;
pub const CHANNELS: usize = 3;

pub const STEP_PENALTY: f64 = -0.01;
pub const WAYPOINT_BONUS: f64 = 1.0;
pub const FINISH_BONUS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub row: u8,
    pub col: u8,
}

impl Cell {
    pub fn manhattan(self, other: Cell) -> u32 {
        let dr = (self.row as i32 - other.row as i32).unsigned_abs();
        let dc = (self.col as i32 - other.col as i32).unsigned_abs();
        dr + dc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NavAction {
    Up,
    Down,
    Left,
    Right,
}

impl NavAction {
    pub const ALL: [NavAction; NUM_ACTIONS] =
        [NavAction::Up, NavAction::Down, NavAction::Left, NavAction::Right];

    pub fn from_index(i: usize) -> Result<NavAction> {
        NavAction::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::Usage(format!("navigation action index {i} out of range 0..4")))
    }

    pub fn index(self) -> usize {
        NavAction::ALL.iter().position(|&a| a == self).unwrap()
    }

    fn delta(self) -> (i32, i32) {
        match self {
            NavAction::Up => (-1, 0),
            NavAction::Down => (1, 0),
            NavAction::Left => (0, -1),
            NavAction::Right => (0, 1),
        }
    }
}

/// Full episode state. `visited` counts waypoints already collected, so
/// `waypoints[visited]` is the current target and `visited == 4` means done.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NavState {
    pub agent: Cell,
    pub waypoints: [Cell; NUM_WAYPOINTS],
    pub visited: u8,
    pub steps: u32,
}

impl NavState {
    pub fn is_terminal(&self) -> bool {
        self.visited as usize == NUM_WAYPOINTS || self.steps >= MAX_STEPS
    }

    /// Index (0-based) of the waypoint that must be visited next.
    pub fn next_waypoint(&self) -> Option<usize> {
        if (self.visited as usize) < NUM_WAYPOINTS {
            Some(self.visited as usize)
        } else {
            None
        }
    }
}

/// Place the agent and the four waypoints on five distinct cells, uniformly.
pub fn reset(rng: &mut ChaCha8Rng) -> NavState {
    let mut cells: Vec<Cell> = Vec::with_capacity(5);
    while cells.len() < 5 {
        let cell = Cell {
            row: rng.random_range(0..GRID) as u8,
            col: rng.random_range(0..GRID) as u8,
        };
        if !cells.contains(&cell) {
            cells.push(cell);
        }
    }
    NavState {
        agent: cells[0],
        waypoints: [cells[1], cells[2], cells[3], cells[4]],
        visited: 0,
        steps: 0,
    }
}

/// Advance one step. Off-grid moves keep the agent in place but still cost
/// the movement penalty. Entering the current target waypoint pays +1, and
/// an additional +3 if it was the last one.
pub fn step(state: &NavState, action: NavAction) -> Result<(NavState, f64, bool)> {
    if state.is_terminal() {
        return Err(Error::Usage("nav_step on a terminal episode".into()));
    }
    let mut next = state.clone();
    let (dr, dc) = action.delta();
    let nr = state.agent.row as i32 + dr;
    let nc = state.agent.col as i32 + dc;
    if (0..GRID as i32).contains(&nr) && (0..GRID as i32).contains(&nc) {
        next.agent = Cell { row: nr as u8, col: nc as u8 };
    }
    next.steps += 1;

    let mut reward = STEP_PENALTY;
    if let Some(target) = state.next_waypoint() {
        if next.agent == state.waypoints[target] {
            reward += WAYPOINT_BONUS;
            next.visited += 1;
            if next.visited as usize == NUM_WAYPOINTS {
                reward += FINISH_BONUS;
            }
        }
    }
    let terminal = next.is_terminal();
    Ok((next, reward, terminal))
}

/// Render as a [40, 40, 3] tensor with channels in [0, 1]. Each cell is a
/// uniform 5x5 patch: agent (0,1,0), unvisited waypoint k (1-based) a red
/// of intensity k/5, everything else black. The agent wins overlaps.
pub fn render(state: &NavState) -> Tensor {
    let mut image = Tensor::zeros(&[IMAGE_SIDE, IMAGE_SIDE, CHANNELS]);
    for (k, &w) in state.waypoints.iter().enumerate() {
        if k >= state.visited as usize && w != state.agent {
            paint(&mut image, w, [(k + 1) as f64 / 5.0, 0.0, 0.0]);
        }
    }
    paint(&mut image, state.agent, [0.0, 1.0, 0.0]);
    image
}

fn paint(image: &mut Tensor, cell: Cell, color: [f64; 3]) {
    let data = image.data_mut();
    for pr in 0..PATCH {
        for pc in 0..PATCH {
            let row = cell.row as usize * PATCH + pr;
            let col = cell.col as usize * PATCH + pc;
            let base = (row * IMAGE_SIDE + col) * CHANNELS;
            data[base..base + 3].copy_from_slice(&color);
        }
    }
}

/// Optimal step count and score for a fresh episode: the grid has no
/// obstacles, so the shortest route is the chained Manhattan distance
/// agent -> W1 -> W2 -> W3 -> W4 and a perfect run scores
/// 7 - 0.01 * steps (four +1 bonuses, one +3, one penalty per step).
pub fn oracle(state: &NavState) -> Result<(u32, f64)> {
    if state.steps != 0 || state.visited != 0 {
        return Err(Error::Usage("nav_oracle expects a fresh episode".into()));
    }
    let mut steps = state.agent.manhattan(state.waypoints[0]);
    for pair in state.waypoints.windows(2) {
        steps += pair[0].manhattan(pair[1]);
    }
    let score = NUM_WAYPOINTS as f64 * WAYPOINT_BONUS + FINISH_BONUS + STEP_PENALTY * steps as f64;
    Ok((steps, score))
}

/// One step of the greedy shortest-path policy: reduce the Manhattan
/// distance to the current target, rows before columns. Returns `None` on
/// a finished episode. This policy is optimal here (no obstacles).
pub fn shortest_path_action(state: &NavState) -> Option<NavAction> {
    let target = state.waypoints[state.next_waypoint()?];
    let (ar, ac) = (state.agent.row, state.agent.col);
    if ar > target.row {
        Some(NavAction::Up)
    } else if ar < target.row {
        Some(NavAction::Down)
    } else if ac > target.col {
        Some(NavAction::Left)
    } else if ac < target.col {
        Some(NavAction::Right)
    } else {
        // Only reachable on a fresh state whose agent already sits on the
        // target; one step away and back costs two moves.
        Some(NavAction::Up)
    }
}
