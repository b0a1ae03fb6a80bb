//! Seedable multi-agent search-and-rescue grid environment.
//!
//! Drones move over a square grid and search for a single drifting person.
//! They never see the person; each observation carries the belief map, a
//! Gaussian blob whose centre is dragged by a constant current and whose
//! support grows over time. The person moves by sampling among its own cell
//! and its neighbours in proportion to that map.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below pin the common double-precision instantiation.

pub mod config;
pub mod env;
pub mod policies;
pub mod probability;
pub mod render;
pub mod scalar;
pub mod target;
pub mod trajectory;

pub use config::{
    cells_for_side, Action, CellCoord, ConfigError, EnvConfig, GaussianParams, SizingError,
    Vector2, DEFAULT_CELL_SIZE_M, MAX_GRID_SIZE,
};
pub use env::{
    rewards, AgentId, AgentRecord, EnvError, EnvState, Observation, Observations, StepInfo,
    StepOutcome,
};
pub use policies::{act, PolicyKind, PolicyMemory};
pub use probability::{gaussian_value, MapError, ProbabilityMap};
pub use render::{render_ascii, render_pgm};
pub use scalar::Scalar;
pub use target::{step_target, TargetState};
pub use trajectory::{JsonlWriter, TrajectoryRecord, TRAJECTORY_SCHEMA};

pub type Config = EnvConfig<f64>;
pub type Env = EnvState<f64>;
pub type Map = ProbabilityMap<f64>;
pub type Outcome = StepOutcome<f64>;

pub type ConfigF32 = EnvConfig<f32>;
pub type EnvF32 = EnvState<f32>;
pub type MapF32 = ProbabilityMap<f32>;
