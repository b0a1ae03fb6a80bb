//! JSON-lines trajectory records, one per step.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::config::{Action, CellCoord};
use crate::env::{AgentId, EnvState, StepOutcome};
use crate::scalar::Scalar;

pub const TRAJECTORY_SCHEMA: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct TrajectoryRecord<T = f64> {
    pub version: String,
    pub timestep: u32,
    pub actions: BTreeMap<AgentId, Action>,
    pub rewards: BTreeMap<AgentId, T>,
    /// Every agent's cell after the step, dead agents included.
    pub positions: BTreeMap<AgentId, CellCoord>,
    /// The person's cell when the step was taken.
    pub target_position: CellCoord,
    pub found: bool,
}

impl<T: Scalar> TrajectoryRecord<T> {
    /// Builds the record for a step that has just been applied to `state`.
    pub fn capture(
        state: &EnvState<T>,
        actions: &BTreeMap<AgentId, Action>,
        outcome: &StepOutcome<T>,
    ) -> Self {
        Self {
            version: TRAJECTORY_SCHEMA.to_owned(),
            timestep: outcome.info.timestep,
            actions: actions.clone(),
            rewards: outcome.rewards.clone(),
            positions: state.agents().iter().map(|a| (a.id, a.position)).collect(),
            target_position: outcome.info.target_position,
            found: outcome.info.found,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Writes one JSON object per line.
pub struct JsonlWriter<W> {
    inner: W,
}

impl<W: Write> JsonlWriter<W> {
    pub fn new(inner: W) -> Self {
        Self { inner }
    }

    pub fn write<T: Scalar>(&mut self, record: &TrajectoryRecord<T>) -> io::Result<()> {
        writeln!(self.inner, "{}", record.to_json_line())
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{EnvConfig, GaussianParams, Vector2};

    #[test]
    fn record_round_trips_and_is_versioned() {
        let config = EnvConfig::<f64> {
            grid_size: 4,
            timestep_limit: 10,
            person_initial_position: CellCoord::new(3, 3),
            current_vector: Vector2::zero(),
            gaussian: GaussianParams::new(1.0, 1.0, 1.0),
            radius_initial: 1.0,
            radius_growth: 0.1,
            drone_positions: vec![CellCoord::new(0, 0), CellCoord::new(1, 0)],
            cell_size_m: 130.0,
            seed: 0,
        };
        let (mut state, _) = EnvState::reset(config, 3).unwrap();
        let actions: BTreeMap<_, _> = [(AgentId(0), Action::Down), (AgentId(1), Action::Search)]
            .into_iter()
            .collect();
        let outcome = state.step(&actions).unwrap();
        let record = TrajectoryRecord::capture(&state, &actions, &outcome);
        let line = record.to_json_line();
        assert!(
            line.starts_with(r#"{"version":"v1","timestep":1,"actions":{"0":"Down","1":"Search"}"#),
            "{line}"
        );
        let back: TrajectoryRecord<f64> = serde_json::from_str(&line).unwrap();
        assert_eq!(back, record);

        let mut w = JsonlWriter::new(Vec::new());
        w.write(&record).unwrap();
        w.write(&record).unwrap();
        let text = String::from_utf8(w.into_inner()).unwrap();
        assert_eq!(text.lines().count(), 2);
    }
}
