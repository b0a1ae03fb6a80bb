//! Domain types shared by every part of the engine, configuration loading
//! and validation, and the real-world grid sizing helper.
//!
//! Coordinates are `(x, y)` with `x` the column and `y` the row, origin at
//! the top-left cell. `Up` decrements `y`, `Down` increments it, `Left`
//! decrements `x` and `Right` increments it. Every module, log and render
//! uses this convention.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Largest accepted grid side. Keeps `grid_size²` allocations sane and every
/// coordinate representable as `i32`.
pub const MAX_GRID_SIZE: usize = 4096;

/// Default side of one square cell in meters (drone camera footprint at 120 m).
pub const DEFAULT_CELL_SIZE_M: f64 = 130.0;

/// A grid cell. Signed so that intended off-grid destinations are representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellCoord {
    pub x: i32,
    pub y: i32,
}

impl CellCoord {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn in_grid(self, grid_size: usize) -> bool {
        let n = grid_size as i64;
        (0..n).contains(&(self.x as i64)) && (0..n).contains(&(self.y as i64))
    }

    /// Row-major index. Only meaningful for in-grid coordinates.
    #[inline]
    pub fn index(self, grid_size: usize) -> usize {
        debug_assert!(self.in_grid(grid_size));
        self.y as usize * grid_size + self.x as usize
    }

    #[inline]
    pub fn from_index(index: usize, grid_size: usize) -> Self {
        Self::new((index % grid_size) as i32, (index / grid_size) as i32)
    }

    /// The neighbouring cell in `direction`, which may lie off-grid.
    #[inline]
    pub fn offset(self, direction: Action) -> Self {
        let (dx, dy) = direction.delta();
        Self::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Per-timestep drift of the belief centre, in cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct Vector2<T = f64> {
    pub dx: T,
    pub dy: T,
}

impl<T: Scalar> Vector2<T> {
    pub fn new(dx: T, dy: T) -> Self {
        Self { dx, dy }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }
}

/// Amplitude and per-axis spread of the bivariate Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct GaussianParams<T = f64> {
    pub amplitude: T,
    pub sigma_x: T,
    pub sigma_y: T,
}

impl<T: Scalar> GaussianParams<T> {
    pub fn new(amplitude: T, sigma_x: T, sigma_y: T) -> Self {
        Self {
            amplitude,
            sigma_x,
            sigma_y,
        }
    }
}

/// The five drone actions. There are no diagonal moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Search,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::Up,
        Action::Down,
        Action::Left,
        Action::Right,
        Action::Search,
    ];

    pub const MOVES: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    #[inline]
    pub fn is_move(self) -> bool {
        self != Action::Search
    }

    /// `(dx, dy)` displacement; zero for `Search`.
    #[inline]
    pub fn delta(self) -> (i32, i32) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
            Action::Search => (0, 0),
        }
    }

    /// Stable integer encoding, `0..5` in declaration order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

fn default_radius_initial<T: Scalar>() -> T {
    T::one()
}

fn default_radius_growth<T: Scalar>() -> T {
    T::lit(0.1)
}

fn default_cell_size_m<T: Scalar>() -> T {
    T::lit(DEFAULT_CELL_SIZE_M)
}

/// Everything a user supplies to build an episode.
///
/// The drone list order defines agent ids `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct EnvConfig<T = f64> {
    pub grid_size: usize,
    pub timestep_limit: u32,
    pub person_initial_position: CellCoord,
    pub current_vector: Vector2<T>,
    pub gaussian: GaussianParams<T>,
    #[serde(default = "default_radius_initial")]
    pub radius_initial: T,
    #[serde(default = "default_radius_growth")]
    pub radius_growth: T,
    pub drone_positions: Vec<CellCoord>,
    /// Used for reporting only; the dynamics are unitless.
    #[serde(default = "default_cell_size_m")]
    pub cell_size_m: T,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("grid_size must be at least 1")]
    GridSizeZero,
    #[error("grid_size {0} exceeds the maximum of {MAX_GRID_SIZE}")]
    GridSizeTooLarge(usize),
    #[error("timestep_limit must be at least 1")]
    TimestepLimitZero,
    #[error("person_initial_position out of grid: {0}")]
    PersonOutOfGrid(CellCoord),
    #[error("drone_positions must list at least one drone")]
    NoDrones,
    #[error("drone_positions[{index}] out of grid: {position}")]
    DroneOutOfGrid { index: usize, position: CellCoord },
    #[error("duplicate drone positions: {0} appears more than once")]
    DuplicateDrones(CellCoord),
    #[error("current_vector must have finite components")]
    NonFiniteCurrent,
    #[error("gaussian.{0} must be finite and > 0")]
    NonPositiveGaussian(&'static str),
    #[error("{0} must be finite and >= 0")]
    NegativeRadius(&'static str),
    #[error("cell_size_m must be finite and > 0")]
    NonPositiveCellSize,
    #[error("invalid config document: {0}")]
    Parse(String),
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

impl<T: Scalar> EnvConfig<T> {
    /// Checks every configuration invariant and returns the first violation.
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.grid_size == 0 {
            return Err(ConfigError::GridSizeZero);
        }
        if self.grid_size > MAX_GRID_SIZE {
            return Err(ConfigError::GridSizeTooLarge(self.grid_size));
        }
        if self.timestep_limit == 0 {
            return Err(ConfigError::TimestepLimitZero);
        }
        if !self.person_initial_position.in_grid(self.grid_size) {
            return Err(ConfigError::PersonOutOfGrid(self.person_initial_position));
        }
        if self.drone_positions.is_empty() {
            return Err(ConfigError::NoDrones);
        }
        let mut seen = HashSet::with_capacity(self.drone_positions.len());
        for (index, &position) in self.drone_positions.iter().enumerate() {
            if !position.in_grid(self.grid_size) {
                return Err(ConfigError::DroneOutOfGrid { index, position });
            }
            if !seen.insert(position) {
                return Err(ConfigError::DuplicateDrones(position));
            }
        }
        if !(self.current_vector.dx.is_finite() && self.current_vector.dy.is_finite()) {
            return Err(ConfigError::NonFiniteCurrent);
        }
        let positive = |v: T| v.is_finite() && v > T::zero();
        let g = &self.gaussian;
        for (name, v) in [
            ("amplitude", g.amplitude),
            ("sigma_x", g.sigma_x),
            ("sigma_y", g.sigma_y),
        ] {
            if !positive(v) {
                return Err(ConfigError::NonPositiveGaussian(name));
            }
        }
        for (name, v) in [
            ("radius_initial", self.radius_initial),
            ("radius_growth", self.radius_growth),
        ] {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(ConfigError::NegativeRadius(name));
            }
        }
        if !positive(self.cell_size_m) {
            return Err(ConfigError::NonPositiveCellSize);
        }
        Ok(())
    }

    /// Returns the config unchanged when every invariant holds.
    pub fn validate(self) -> Result<Self, ConfigError> {
        self.check().map(|()| self)
    }

    /// Parses and validates a JSON config. Unknown fields are rejected.
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn agent_count(&self) -> usize {
        self.drone_positions.len()
    }

    /// Physical side length of the simulated area in meters.
    pub fn side_m(&self) -> T {
        self.cell_size_m * T::from_index(self.grid_size)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SizingError {
    #[error("side_m must be finite and > 0")]
    NonPositiveSide,
    #[error("cell_size_m must be finite and > 0")]
    NonPositiveCell,
    #[error("side needs more than {MAX_GRID_SIZE} cells")]
    TooManyCells,
}

/// Number of square cells needed to cover a search zone side of `side_m`
/// meters, `ceil(side_m / cell_size_m)`.
///
/// A quotient within a few ulps of an integer is snapped to it so exact
/// multiples (`k * c`, `c`) always give `k` despite rounding in `k * c`.
pub fn cells_for_side<T: Scalar>(side_m: T, cell_size_m: T) -> Result<usize, SizingError> {
    if !(side_m.is_finite() && side_m > T::zero()) {
        return Err(SizingError::NonPositiveSide);
    }
    if !(cell_size_m.is_finite() && cell_size_m > T::zero()) {
        return Err(SizingError::NonPositiveCell);
    }
    let quotient = side_m / cell_size_m;
    let nearest = quotient.round();
    let snap = quotient * T::epsilon() * T::lit(4.0);
    let cells = if (quotient - nearest).abs() <= snap && nearest >= T::one() {
        nearest
    } else {
        quotient.ceil()
    };
    match cells.to_usize() {
        Some(n) if n <= MAX_GRID_SIZE => Ok(n.max(1)),
        _ => Err(SizingError::TooManyCells),
    }
}
