//! Movement of the shipwrecked person.
//!
//! Each step the person either stays or moves to one of its in-grid
//! 4-neighbours, chosen with probability proportional to the belief map value
//! of each candidate. With no mass on any candidate the choice is uniform.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Action, CellCoord};
use crate::probability::ProbabilityMap;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetState {
    pub position: CellCoord,
}

impl TargetState {
    pub fn new(position: CellCoord) -> Self {
        Self { position }
    }
}

/// Current cell followed by the in-grid neighbours in Up, Down, Left, Right order.
pub fn candidate_cells(position: CellCoord, grid_size: usize) -> Vec<CellCoord> {
    std::iter::once(position)
        .chain(Action::MOVES.iter().map(|&a| position.offset(a)))
        .filter(|c| c.in_grid(grid_size))
        .collect()
}

/// Index into `weights` selected by the uniform variate `u` in `[0, 1)`.
///
/// Weighted categorical when the weights carry mass, uniform otherwise.
pub fn pick_weighted<T: Scalar>(weights: &[T], u: f64) -> usize {
    debug_assert!(!weights.is_empty());
    let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    if total > T::zero() {
        let threshold = T::lit(u) * total;
        let mut cumulative = T::zero();
        let mut last_positive = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w > T::zero() {
                cumulative = cumulative + w;
                last_positive = i;
                if threshold < cumulative {
                    return i;
                }
            }
        }
        // Rounding can leave threshold == total.
        last_positive
    } else {
        ((u * weights.len() as f64) as usize).min(weights.len() - 1)
    }
}

/// Moves the person one step. Consumes exactly one `f64` draw from `rng`.
pub fn step_target<T: Scalar, R: Rng + ?Sized>(
    state: TargetState,
    map: &ProbabilityMap<T>,
    rng: &mut R,
) -> TargetState {
    let candidates = candidate_cells(state.position, map.grid_size());
    let weights: Vec<T> = candidates
        .iter()
        .map(|&c| map.value(c).expect("candidates are in-grid"))
        .collect();
    let u: f64 = rng.gen();
    TargetState::new(candidates[pick_weighted(&weights, u)])
}
