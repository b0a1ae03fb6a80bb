//! Multi-agent episode lifecycle: reset, simultaneous action resolution, the
//! reward schedule, and termination/truncation bookkeeping.
//!
//! A step runs in a fixed order:
//! 1. the timestep counter advances; past the limit every agent is truncated
//!    with the over-limit penalty;
//! 2. moves are resolved simultaneously (off-grid exits, shared destinations,
//!    moves onto a stationary agent and swaps are all conflicts);
//! 3. rewards are assigned against the map the agents observed;
//! 4. unless the episode ended, the belief map advances and the person moves;
//! 5. the episode is done when the person was found, the budget ran out, or
//!    no drone is left on the grid.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Action, CellCoord, ConfigError, EnvConfig};
use crate::probability::ProbabilityMap;
use crate::scalar::Scalar;
use crate::target::{step_target, TargetState};

/// Reward schedule.
pub mod rewards {
    use crate::scalar::Scalar;

    pub const MOVE: f64 = 1.0;
    pub const LEAVE_GRID: f64 = -100_000.0;
    pub const COLLISION: f64 = -100_000.0;
    pub const OVER_LIMIT: f64 = -100_000.0;
    pub const LOW_PROBABILITY_SEARCH: f64 = -100.0;
    /// Searches below this cell probability (1 %) are penalized.
    pub const SEARCH_THRESHOLD: f64 = 0.01;
    pub const SEARCH_SCALE: f64 = 10_000.0;
    pub const FIND_BASE: f64 = 10_000.0;

    /// Reward for searching a cell that does not hold the person.
    pub fn search<T: Scalar>(cell_probability: T) -> T {
        if cell_probability < T::lit(SEARCH_THRESHOLD) {
            T::lit(LOW_PROBABILITY_SEARCH)
        } else {
            cell_probability * T::lit(SEARCH_SCALE)
        }
    }

    /// `10000 + 10000 * (1 - timestep) / timestep_limit`, with `timestep` the
    /// 1-based count of the action being taken.
    ///
    /// The product is formed before the division so integer inputs give exact
    /// results (e.g. 420 at step 480 of 500).
    pub fn find<T: Scalar>(timestep: u32, timestep_limit: u32) -> T {
        let base = T::lit(FIND_BASE);
        let numerator = T::one() - T::lit(timestep as f64);
        let limit = T::lit(timestep_limit as f64);
        base + base * numerator / limit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "drone{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: AgentId,
    pub position: CellCoord,
    /// False once the drone has left the grid. Its position stays frozen.
    pub alive: bool,
}

/// What one agent sees: its own cell and the full belief map.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T = f64> {
    pub agent_position: CellCoord,
    pub grid_size: usize,
    /// Row-major, shared between all agents of a step.
    pub probability_values: Arc<[T]>,
}

impl<T: Scalar> Observation<T> {
    pub fn value_at(&self, cell: CellCoord) -> Option<T> {
        cell.in_grid(self.grid_size)
            .then(|| self.probability_values[cell.index(self.grid_size)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub found: bool,
    pub finder_ids: Vec<AgentId>,
    pub timestep: u32,
    /// The person's true cell at step entry. Debug aid; agents must not use it.
    pub target_position: CellCoord,
}

/// Per-agent results of one step, keyed by the agents alive at step entry.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T = f64> {
    pub observations: BTreeMap<AgentId, Observation<T>>,
    pub rewards: BTreeMap<AgentId, T>,
    pub terminations: BTreeMap<AgentId, bool>,
    pub truncations: BTreeMap<AgentId, bool>,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("episode finished")]
    EpisodeFinished,
    #[error("missing action for live agent {0}")]
    MissingAction(AgentId),
    #[error("action given for unknown or inactive agent {0}")]
    UnexpectedAgent(AgentId),
    #[error("target position {0} out of grid")]
    TargetOutOfGrid(CellCoord),
    #[error("map grid size {got} does not match config grid size {expected}")]
    MapSizeMismatch { got: usize, expected: usize },
}

/// Outcome of move resolution for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Resolution {
    Search,
    Pending(CellCoord),
    OutOfGrid,
    Collided,
}

/// Full mutable state of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState<T = f64> {
    config: EnvConfig<T>,
    map: ProbabilityMap<T>,
    target: TargetState,
    agents: Vec<AgentRecord>,
    timestep: u32,
    done: bool,
    rng: ChaCha8Rng,
}

pub type Observations<T> = BTreeMap<AgentId, Observation<T>>;

impl<T: Scalar> EnvState<T> {
    /// Starts a fresh episode. Nothing is carried over from earlier episodes.
    pub fn reset(config: EnvConfig<T>, seed: u64) -> Result<(Self, Observations<T>), EnvError> {
        let config = config.validate()?;
        let map = ProbabilityMap::init(&config);
        let target = TargetState::new(config.person_initial_position);
        let agents = config
            .drone_positions
            .iter()
            .enumerate()
            .map(|(i, &position)| AgentRecord {
                id: AgentId(i),
                position,
                alive: true,
            })
            .collect();
        let state = Self {
            config,
            map,
            target,
            agents,
            timestep: 0,
            done: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        let observations = state.observations();
        Ok((state, observations))
    }

    pub fn config(&self) -> &EnvConfig<T> {
        &self.config
    }

    pub fn map(&self) -> &ProbabilityMap<T> {
        &self.map
    }

    pub fn target(&self) -> TargetState {
        self.target
    }

    pub fn agents(&self) -> &[AgentRecord] {
        &self.agents
    }

    /// Number of completed steps.
    pub fn timestep(&self) -> u32 {
        self.timestep
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn live_agents(&self) -> impl Iterator<Item = &AgentRecord> + '_ {
        self.agents.iter().filter(|a| a.alive)
    }

    /// Observations for every live agent.
    pub fn observations(&self) -> Observations<T> {
        let ids: Vec<AgentId> = self.live_agents().map(|a| a.id).collect();
        self.observations_for(&ids)
    }

    fn observations_for(&self, ids: &[AgentId]) -> Observations<T> {
        let values: Arc<[T]> = Arc::from(self.map.values());
        ids.iter()
            .map(|&id| {
                (
                    id,
                    Observation {
                        agent_position: self.agents[id.0].position,
                        grid_size: self.config.grid_size,
                        probability_values: Arc::clone(&values),
                    },
                )
            })
            .collect()
    }

    /// Places the person on `cell`, for scripted scenarios.
    pub fn set_target_position(&mut self, cell: CellCoord) -> Result<(), EnvError> {
        if !cell.in_grid(self.config.grid_size) {
            return Err(EnvError::TargetOutOfGrid(cell));
        }
        self.target = TargetState::new(cell);
        Ok(())
    }

    /// Replaces the belief map, for scripted scenarios.
    pub fn set_map(&mut self, map: ProbabilityMap<T>) -> Result<(), EnvError> {
        if map.grid_size() != self.config.grid_size {
            return Err(EnvError::MapSizeMismatch {
                got: map.grid_size(),
                expected: self.config.grid_size,
            });
        }
        self.map = map;
        Ok(())
    }

    /// Advances the episode by one joint action. `actions` must name exactly
    /// the live agents.
    pub fn step(
        &mut self,
        actions: &BTreeMap<AgentId, Action>,
    ) -> Result<StepOutcome<T>, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }
        let live: Vec<AgentId> = self.live_agents().map(|a| a.id).collect();
        let live_set: BTreeSet<AgentId> = live.iter().copied().collect();
        if let Some(&id) = live.iter().find(|id| !actions.contains_key(id)) {
            return Err(EnvError::MissingAction(id));
        }
        if let Some(&id) = actions.keys().find(|id| !live_set.contains(id)) {
            return Err(EnvError::UnexpectedAgent(id));
        }

        let entry_target = self.target.position;
        let next_timestep = self.timestep + 1;
        let mut rewards = BTreeMap::new();
        let mut terminations: BTreeMap<AgentId, bool> =
            live.iter().map(|&id| (id, false)).collect();
        let mut truncations = terminations.clone();

        if next_timestep > self.config.timestep_limit {
            for &id in &live {
                rewards.insert(id, T::lit(rewards::OVER_LIMIT));
                truncations.insert(id, true);
            }
            self.done = true;
            return Ok(StepOutcome {
                observations: self.observations_for(&live),
                rewards,
                terminations,
                truncations,
                info: StepInfo {
                    found: false,
                    finder_ids: Vec::new(),
                    timestep: next_timestep,
                    target_position: entry_target,
                },
            });
        }
        self.timestep = next_timestep;

        let resolution = self.resolve_moves(&live, actions);

        let mut finders = Vec::new();
        for &id in &live {
            let agent = &mut self.agents[id.0];
            let reward = match resolution[&id] {
                Resolution::Pending(dest) => {
                    agent.position = dest;
                    T::lit(rewards::MOVE)
                }
                Resolution::OutOfGrid => {
                    agent.alive = false;
                    terminations.insert(id, true);
                    T::lit(rewards::LEAVE_GRID)
                }
                Resolution::Collided => T::lit(rewards::COLLISION),
                Resolution::Search if agent.position == entry_target => {
                    finders.push(id);
                    rewards::find(next_timestep, self.config.timestep_limit)
                }
                Resolution::Search => {
                    let p = self
                        .map
                        .value(agent.position)
                        .expect("live agents are in-grid");
                    rewards::search(p)
                }
            };
            rewards.insert(id, reward);
        }

        let found = !finders.is_empty();
        if found {
            for &id in &live {
                terminations.insert(id, true);
            }
            self.done = true;
        } else if self.live_agents().next().is_none() {
            self.done = true;
        } else {
            self.map = self.map.advance(&self.config);
            self.target = step_target(self.target, &self.map, &mut self.rng);
        }

        Ok(StepOutcome {
            observations: self.observations_for(&live),
            rewards,
            terminations,
            truncations,
            info: StepInfo {
                found,
                finder_ids: finders,
                timestep: next_timestep,
                target_position: entry_target,
            },
        })
    }

    /// Simultaneous move resolution. Conflicting movers stay put; the check is
    /// repeated until no bounced mover blocks another.
    fn resolve_moves(
        &self,
        live: &[AgentId],
        actions: &BTreeMap<AgentId, Action>,
    ) -> BTreeMap<AgentId, Resolution> {
        let n = self.config.grid_size;
        let pos = |id: AgentId| self.agents[id.0].position;
        let mut res: BTreeMap<AgentId, Resolution> = live
            .iter()
            .map(|&id| {
                let action = actions[&id];
                let r = if !action.is_move() {
                    Resolution::Search
                } else {
                    let dest = pos(id).offset(action);
                    if dest.in_grid(n) {
                        Resolution::Pending(dest)
                    } else {
                        Resolution::OutOfGrid
                    }
                };
                (id, r)
            })
            .collect();

        loop {
            let stationary: BTreeSet<CellCoord> = res
                .iter()
                .filter(|(_, r)| matches!(r, Resolution::Search | Resolution::Collided))
                .map(|(&id, _)| pos(id))
                .collect();
            let mut dest_count: HashMap<CellCoord, usize> = HashMap::new();
            let mut dest_of: HashMap<CellCoord, AgentId> = HashMap::new();
            for (&id, r) in &res {
                if let Resolution::Pending(d) = r {
                    *dest_count.entry(*d).or_default() += 1;
                    dest_of.insert(pos(id), id);
                }
            }
            let mut bounced = Vec::new();
            for (&id, r) in &res {
                let Resolution::Pending(d) = *r else { continue };
                let shared = dest_count[&d] > 1;
                let blocked = stationary.contains(&d);
                let swap = dest_of
                    .get(&d)
                    .is_some_and(|&other| res[&other] == Resolution::Pending(pos(id)));
                if shared || blocked || swap {
                    bounced.push(id);
                }
            }
            if bounced.is_empty() {
                return res;
            }
            for id in bounced {
                res.insert(id, Resolution::Collided);
            }
        }
    }
}
