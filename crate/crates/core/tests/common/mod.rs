#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::RngCore;
use searchgrid::{Action, AgentId, CellCoord, Config, GaussianParams, Vector2};

pub fn config(n: usize, drones: &[(i32, i32)], person: (i32, i32)) -> Config {
    Config {
        grid_size: n,
        timestep_limit: 500,
        person_initial_position: CellCoord::new(person.0, person.1),
        current_vector: Vector2::new(0.0, 0.0),
        gaussian: GaussianParams::new(1.0, 1.0, 1.0),
        radius_initial: 1.0,
        radius_growth: 0.1,
        drone_positions: drones.iter().map(|&(x, y)| CellCoord::new(x, y)).collect(),
        cell_size_m: 130.0,
        seed: 0,
    }
}

pub fn actions(list: &[Action]) -> BTreeMap<AgentId, Action> {
    list.iter()
        .enumerate()
        .map(|(i, &a)| (AgentId(i), a))
        .collect()
}

/// Counts how many times the wrapped generator is asked for randomness.
pub struct CountingRng<R> {
    pub inner: R,
    pub draws: usize,
}

impl<R: RngCore> RngCore for CountingRng<R> {
    fn next_u32(&mut self) -> u32 {
        self.draws += 1;
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.draws += 1;
        self.inner.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.draws += 1;
        self.inner.try_fill_bytes(dest)
    }
}
