//! The belief map: where the shipwrecked person probably is.
//!
//! At tick 0 all mass sits on the last-seen cell. Each [`ProbabilityMap::advance`]
//! drifts the continuous belief centre by the current vector (clamped to the
//! grid), grows the support circle linearly, fills every in-grid cell centre
//! inside the circle with the bivariate Gaussian and normalizes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{CellCoord, EnvConfig, GaussianParams};
use crate::scalar::Scalar;

/// Bivariate Gaussian `A * exp(-((x-x0)^2 / (2 sx^2) + (y-y0)^2 / (2 sy^2)))`.
#[inline]
pub fn gaussian_value<T: Scalar>(x: T, y: T, center: (T, T), params: &GaussianParams<T>) -> T {
    params.amplitude * (-gaussian_exponent(x, y, center, params)).exp()
}

#[inline]
fn gaussian_exponent<T: Scalar>(x: T, y: T, center: (T, T), params: &GaussianParams<T>) -> T {
    let two = T::lit(2.0);
    let dx = x - center.0;
    let dy = y - center.1;
    dx * dx / (two * params.sigma_x * params.sigma_x)
        + dy * dy / (two * params.sigma_y * params.sigma_y)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("values length {0} is not a non-zero perfect square")]
    NotSquare(usize),
    #[error("values length {got} does not match grid_size {grid_size}")]
    SizeMismatch { got: usize, grid_size: usize },
    #[error("cell {0} holds a negative or non-finite probability")]
    InvalidValue(usize),
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("supposed_position must lie in [0, grid_size-1] on both axes")]
    PositionOutOfRange,
    #[error("support_radius must be finite and >= 0")]
    InvalidRadius,
}

/// Grid of cell probabilities plus the continuous belief centre and the
/// support radius that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    bound = "T: Scalar",
    try_from = "MapSnapshot<T>",
    into = "MapSnapshot<T>"
)]
pub struct ProbabilityMap<T = f64> {
    grid_size: usize,
    values: Vec<T>,
    supposed_position: (T, T),
    support_radius: T,
    tick: u64,
}

/// Wire form used by frame dumps. `values` is row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
struct MapSnapshot<T> {
    tick: u64,
    supposed_position: (T, T),
    support_radius: T,
    values: Vec<T>,
}

impl<T: Scalar> From<ProbabilityMap<T>> for MapSnapshot<T> {
    fn from(map: ProbabilityMap<T>) -> Self {
        Self {
            tick: map.tick,
            supposed_position: map.supposed_position,
            support_radius: map.support_radius,
            values: map.values,
        }
    }
}

impl<T: Scalar> TryFrom<MapSnapshot<T>> for ProbabilityMap<T> {
    type Error = MapError;

    fn try_from(s: MapSnapshot<T>) -> Result<Self, MapError> {
        let len = s.values.len();
        let side = (len as f64).sqrt().round() as usize;
        if len == 0 || side * side != len {
            return Err(MapError::NotSquare(len));
        }
        ProbabilityMap::from_parts(
            side,
            s.values,
            s.supposed_position,
            s.support_radius,
            s.tick,
        )
    }
}

impl<T: Scalar> ProbabilityMap<T> {
    /// Delta map on the person's last-seen cell.
    pub fn init(config: &EnvConfig<T>) -> Self {
        let n = config.grid_size;
        let start = config.person_initial_position;
        let mut values = vec![T::zero(); n * n];
        values[start.index(n)] = T::one();
        Self {
            grid_size: n,
            values,
            supposed_position: (T::from_coord(start.x), T::from_coord(start.y)),
            support_radius: config.radius_initial,
            tick: 0,
        }
    }

    /// Builds a map from raw parts, checking non-negativity, normalization and
    /// range of the belief centre.
    pub fn from_parts(
        grid_size: usize,
        values: Vec<T>,
        supposed_position: (T, T),
        support_radius: T,
        tick: u64,
    ) -> Result<Self, MapError> {
        if grid_size == 0 {
            return Err(MapError::NotSquare(values.len()));
        }
        if values.len() != grid_size * grid_size {
            return Err(MapError::SizeMismatch {
                got: values.len(),
                grid_size,
            });
        }
        if let Some(i) = values
            .iter()
            .position(|v| !(v.is_finite() && *v >= T::zero()))
        {
            return Err(MapError::InvalidValue(i));
        }
        let sum = values.iter().fold(T::zero(), |acc, &v| acc + v);
        if (sum - T::one()).abs() > Self::sum_tolerance(values.len()) {
            return Err(MapError::NotNormalized(sum.to_f64().unwrap_or(f64::NAN)));
        }
        let hi = T::from_index(grid_size - 1);
        let (x0, y0) = supposed_position;
        let in_range = |v: T| v.is_finite() && v >= T::zero() && v <= hi;
        if !(in_range(x0) && in_range(y0)) {
            return Err(MapError::PositionOutOfRange);
        }
        if !(support_radius.is_finite() && support_radius >= T::zero()) {
            return Err(MapError::InvalidRadius);
        }
        Ok(Self {
            grid_size,
            values,
            supposed_position,
            support_radius,
            tick,
        })
    }

    /// Accepted deviation of the value sum from 1.
    pub fn sum_tolerance(len: usize) -> T {
        let floor = T::lit(1e-9);
        let scaled = T::epsilon() * T::lit(16.0) * T::from_index(len.max(1));
        floor.max(scaled)
    }

    /// One tick of drift, radius growth and Gaussian redistribution.
    ///
    /// The amplitude is a common factor of every raw value and cancels in the
    /// normalization, so it is factored out before exponentiation. Exponents
    /// are shifted by their minimum so the largest weight is exactly 1 and the
    /// sum can never underflow.
    pub fn advance(&self, config: &EnvConfig<T>) -> Self {
        let n = self.grid_size;
        let hi = T::from_index(n - 1);
        let clamp = |v: T| v.max(T::zero()).min(hi);
        let x0 = clamp(self.supposed_position.0 + config.current_vector.dx);
        let y0 = clamp(self.supposed_position.1 + config.current_vector.dy);
        let tick = self.tick + 1;
        let radius = config.radius_initial
            + config.radius_growth * T::from_u64(tick).expect("tick representable");
        let center = (x0, y0);

        let (xs, ys) = (
            Self::axis_window(x0, radius, n),
            Self::axis_window(y0, radius, n),
        );
        let r2 = radius * radius;
        let mut support: Vec<(usize, T)> = Vec::new();
        let mut min_exponent = T::infinity();
        for y in ys.clone() {
            let cy = T::from_index(y);
            for x in xs.clone() {
                let cx = T::from_index(x);
                let (dx, dy) = (cx - x0, cy - y0);
                if dx * dx + dy * dy <= r2 {
                    let e = gaussian_exponent(cx, cy, center, &config.gaussian);
                    min_exponent = min_exponent.min(e);
                    support.push((y * n + x, e));
                }
            }
        }

        let mut values = vec![T::zero(); n * n];
        if support.is_empty() {
            let cell = CellCoord::new(
                x0.round().to_i32().expect("clamped"),
                y0.round().to_i32().expect("clamped"),
            );
            values[cell.index(n)] = T::one();
        } else {
            let mut total = T::zero();
            for (_, e) in support.iter_mut() {
                *e = (-(*e - min_exponent)).exp();
                total = total + *e;
            }
            for (i, w) in support {
                values[i] = w / total;
            }
        }

        Self {
            grid_size: n,
            values,
            supposed_position: center,
            support_radius: radius,
            tick,
        }
    }

    /// Index range of cell centres on one axis that can lie within `radius` of `c`.
    fn axis_window(c: T, radius: T, n: usize) -> std::ops::RangeInclusive<usize> {
        let hi = T::from_index(n - 1);
        let lo = (c - radius).ceil().max(T::zero()).min(hi);
        let up = (c + radius).floor().max(T::zero()).min(hi);
        let lo = lo.to_usize().unwrap_or(0);
        let up = up.to_usize().unwrap_or(n - 1);
        lo..=up
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Row-major cell probabilities.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn supposed_position(&self) -> (T, T) {
        self.supposed_position
    }

    pub fn support_radius(&self) -> T {
        self.support_radius
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Probability of an in-grid cell; `None` off-grid.
    pub fn value(&self, cell: CellCoord) -> Option<T> {
        cell.in_grid(self.grid_size)
            .then(|| self.values[cell.index(self.grid_size)])
    }

    /// First cell in row-major order holding the maximal probability.
    pub fn argmax(&self) -> CellCoord {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        CellCoord::from_index(best, self.grid_size)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc.max(v))
    }

    pub fn sum(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc + v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("map serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}
