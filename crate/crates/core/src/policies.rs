//! Scripted baseline agents used by the rollout harness.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Action, CellCoord};
use crate::env::{rewards, Observation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Uniform over the five actions.
    Random,
    /// Search when the own cell is worth it, otherwise head for the belief peak.
    Greedy,
    /// Boustrophedon sweep, searching each cell once on arrival.
    Lawnmower,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [
        PolicyKind::Random,
        PolicyKind::Greedy,
        PolicyKind::Lawnmower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Lawnmower => "lawnmower",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown policy {s:?}, expected random|greedy|lawnmower"))
    }
}

/// Per-agent memory carried between calls. Only the lawnmower uses it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolicyMemory {
    sweep_backward: bool,
    last_searched: Option<CellCoord>,
}

/// Chooses the next action for one agent.
pub fn act<T: Scalar, R: Rng + ?Sized>(
    kind: PolicyKind,
    observation: &Observation<T>,
    memory: &mut PolicyMemory,
    rng: &mut R,
) -> Action {
    match kind {
        PolicyKind::Random => Action::ALL[rng.gen_range(0..Action::ALL.len())],
        PolicyKind::Greedy => greedy(observation),
        PolicyKind::Lawnmower => lawnmower(observation, memory),
    }
}

/// First row-major cell with the largest value.
fn argmax<T: Scalar>(values: &[T], grid_size: usize) -> CellCoord {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    CellCoord::from_index(best, grid_size)
}

fn greedy<T: Scalar>(obs: &Observation<T>) -> Action {
    let here = obs.agent_position;
    let value = obs.value_at(here).unwrap_or_else(T::zero);
    if value >= T::lit(rewards::SEARCH_THRESHOLD) {
        return Action::Search;
    }
    let goal = argmax(&obs.probability_values, obs.grid_size);
    let (dx, dy) = (goal.x - here.x, goal.y - here.y);
    if dx == 0 && dy == 0 {
        // Already on the peak, nothing better to do.
        Action::Search
    } else if dx.abs() >= dy.abs() {
        if dx > 0 {
            Action::Right
        } else {
            Action::Left
        }
    } else if dy > 0 {
        Action::Down
    } else {
        Action::Up
    }
}

/// Position of `cell` along the serpentine path: even rows left to right, odd
/// rows right to left.
pub fn sweep_index(cell: CellCoord, grid_size: usize) -> usize {
    let (x, y) = (cell.x as usize, cell.y as usize);
    let along = if y.is_multiple_of(2) {
        x
    } else {
        grid_size - 1 - x
    };
    y * grid_size + along
}

pub fn sweep_cell(index: usize, grid_size: usize) -> CellCoord {
    let y = index / grid_size;
    let along = index % grid_size;
    let x = if y.is_multiple_of(2) {
        along
    } else {
        grid_size - 1 - along
    };
    CellCoord::new(x as i32, y as i32)
}

fn lawnmower<T: Scalar>(obs: &Observation<T>, memory: &mut PolicyMemory) -> Action {
    let here = obs.agent_position;
    if memory.last_searched != Some(here) {
        memory.last_searched = Some(here);
        return Action::Search;
    }
    let n = obs.grid_size;
    let last = n * n - 1;
    if last == 0 {
        return Action::Search;
    }
    let k = sweep_index(here, n);
    if (!memory.sweep_backward && k == last) || (memory.sweep_backward && k == 0) {
        memory.sweep_backward = !memory.sweep_backward;
    }
    let next = if memory.sweep_backward { k - 1 } else { k + 1 };
    let to = sweep_cell(next, n);
    match (to.x - here.x, to.y - here.y) {
        (1, 0) => Action::Right,
        (-1, 0) => Action::Left,
        (0, 1) => Action::Down,
        (0, -1) => Action::Up,
        other => unreachable!("serpentine neighbours are adjacent, got {other:?}"),
    }
}
