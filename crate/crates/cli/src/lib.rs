//! Batch rollouts of scripted policies over the search grid.
//!
//! Episode `i` of a batch runs with seed `base_seed + i`. The environment
//! draws from ChaCha8 stream 0 of that seed and the policies from stream 1,
//! so an episode is reproducible on its own.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use searchgrid::{
    act, render_ascii, render_pgm, Action, AgentId, Config, ConfigError, Env, EnvError,
    Observations, PolicyKind, PolicyMemory, TrajectoryRecord,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing summaries: {0}")]
    Csv(#[from] csv::Error),
    #[error("episodes must be at least 1")]
    NoEpisodes,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    None,
    Ascii,
    Pgm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub episode_index: usize,
    pub seed: u64,
    pub found: bool,
    pub steps: u32,
    pub total_reward_per_agent: Vec<f64>,
    pub finder_ids: Vec<usize>,
}

impl EpisodeSummary {
    pub fn total_reward(&self) -> f64 {
        self.total_reward_per_agent.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub policy: PolicyKind,
    pub episodes: usize,
    pub base_seed: u64,
    pub found: usize,
    pub find_rate: f64,
    /// Over found episodes only; `null` when none was found.
    pub mean_steps_to_find: Option<f64>,
    pub median_steps_to_find: Option<f64>,
    /// Mean over episodes of the reward summed across agents.
    pub mean_total_reward: f64,
}

impl Aggregate {
    pub fn from_summaries(
        policy: PolicyKind,
        base_seed: u64,
        summaries: &[EpisodeSummary],
    ) -> Self {
        let episodes = summaries.len();
        let mut steps: Vec<u32> = summaries
            .iter()
            .filter(|s| s.found)
            .map(|s| s.steps)
            .collect();
        steps.sort_unstable();
        let found = steps.len();
        let mean_steps_to_find =
            (found > 0).then(|| steps.iter().map(|&s| s as f64).sum::<f64>() / found as f64);
        let median_steps_to_find = (found > 0).then(|| {
            if found % 2 == 1 {
                steps[found / 2] as f64
            } else {
                (steps[found / 2 - 1] as f64 + steps[found / 2] as f64) / 2.0
            }
        });
        let mean_total_reward = if episodes == 0 {
            0.0
        } else {
            summaries
                .iter()
                .map(EpisodeSummary::total_reward)
                .sum::<f64>()
                / episodes as f64
        };
        Self {
            policy,
            episodes,
            base_seed,
            found,
            find_rate: if episodes == 0 {
                0.0
            } else {
                found as f64 / episodes as f64
            },
            mean_steps_to_find,
            median_steps_to_find,
            mean_total_reward,
        }
    }
}

/// What to capture while an episode runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct Capture {
    pub trajectory: bool,
    pub render: Option<RenderMode>,
    pub debug_target: bool,
}

/// One rendered frame: file extension plus contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub extension: &'static str,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct EpisodeRun {
    pub summary: EpisodeSummary,
    /// JSON lines, one per step, when trajectory capture is on.
    pub trajectory: Option<String>,
    /// Initial frame followed by one frame per step.
    pub frames: Vec<Frame>,
}

fn policy_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

fn frame(env: &Env, mode: RenderMode, debug_target: bool) -> Option<Frame> {
    match mode {
        RenderMode::None => None,
        RenderMode::Ascii => {
            let mut text = render_ascii(env, debug_target);
            text.push('\n');
            Some(Frame {
                extension: "txt",
                bytes: text.into_bytes(),
            })
        }
        RenderMode::Pgm => {
            let target = debug_target.then(|| env.target().position);
            Some(Frame {
                extension: "pgm",
                bytes: render_pgm(env.map(), env.agents(), target),
            })
        }
    }
}

/// Actions of every live agent, chosen in agent id order.
pub fn choose_actions(
    kind: PolicyKind,
    observations: &Observations<f64>,
    memories: &mut [PolicyMemory],
    rng: &mut ChaCha8Rng,
) -> BTreeMap<AgentId, Action> {
    observations
        .iter()
        .map(|(&id, obs)| (id, act(kind, obs, &mut memories[id.0], rng)))
        .collect()
}

/// Runs one episode to completion.
pub fn run_episode(
    config: &Config,
    episode_index: usize,
    seed: u64,
    policy: PolicyKind,
    capture: Capture,
) -> Result<EpisodeRun, CliError> {
    let (mut env, mut observations) = Env::reset(config.clone(), seed)?;
    let mut rng = policy_rng(seed);
    let mut memories = vec![PolicyMemory::default(); config.agent_count()];
    let mut totals = vec![0.0; config.agent_count()];
    let mut trajectory = capture.trajectory.then(String::new);
    let mut frames = Vec::new();
    let render = capture.render.unwrap_or(RenderMode::None);
    frames.extend(frame(&env, render, capture.debug_target));

    let mut found = false;
    let mut finder_ids = Vec::new();
    while !env.is_done() {
        let actions = choose_actions(policy, &observations, &mut memories, &mut rng);
        let outcome = env.step(&actions)?;
        for (id, reward) in &outcome.rewards {
            totals[id.0] += reward;
        }
        if let Some(log) = trajectory.as_mut() {
            log.push_str(&TrajectoryRecord::capture(&env, &actions, &outcome).to_json_line());
            log.push('\n');
        }
        frames.extend(frame(&env, render, capture.debug_target));
        if outcome.info.found {
            found = true;
            finder_ids = outcome.info.finder_ids.iter().map(|id| id.0).collect();
        }
        observations = outcome
            .observations
            .into_iter()
            .filter(|(id, _)| env.agents()[id.0].alive)
            .collect();
    }

    Ok(EpisodeRun {
        summary: EpisodeSummary {
            episode_index,
            seed,
            found,
            steps: env.timestep(),
            total_reward_per_agent: totals,
            finder_ids,
        },
        trajectory,
        frames,
    })
}

#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub config_path: PathBuf,
    pub episodes: usize,
    pub base_seed: u64,
    pub policy: PolicyKind,
    pub out_dir: PathBuf,
    pub render: RenderMode,
    pub log_trajectories: bool,
    pub debug_target: bool,
}

#[derive(Debug, Clone)]
pub struct BatchReport {
    pub summaries: Vec<EpisodeSummary>,
    pub aggregate: Aggregate,
}

/// Runs every episode of a batch in memory. Episodes run in parallel; the
/// result is ordered by episode index.
pub fn simulate_batch(
    config: &Config,
    episodes: usize,
    base_seed: u64,
    policy: PolicyKind,
    capture: Capture,
) -> Result<Vec<EpisodeRun>, CliError> {
    if episodes == 0 {
        return Err(CliError::NoEpisodes);
    }
    (0..episodes)
        .into_par_iter()
        .map(|i| run_episode(config, i, base_seed.wrapping_add(i as u64), policy, capture))
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

pub fn summaries_csv(summaries: &[EpisodeSummary]) -> Result<Vec<u8>, CliError> {
    let join = |items: Vec<String>| items.join(";");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "episode_index",
        "seed",
        "found",
        "steps",
        "total_reward_per_agent",
        "finder_ids",
    ])?;
    for s in summaries {
        w.write_record([
            s.episode_index.to_string(),
            s.seed.to_string(),
            s.found.to_string(),
            s.steps.to_string(),
            join(
                s.total_reward_per_agent
                    .iter()
                    .map(f64::to_string)
                    .collect(),
            ),
            join(s.finder_ids.iter().map(usize::to_string).collect()),
        ])?;
    }
    w.into_inner()
        .map_err(|e| CliError::Csv(e.into_error().into()))
}

fn write_frames(dir: &Path, frames: &[Frame]) -> Result<Vec<PathBuf>, CliError> {
    create_dir(dir)?;
    frames
        .iter()
        .enumerate()
        .map(|(t, f)| {
            let path = dir.join(format!("frame_{t:05}.{}", f.extension));
            write_file(&path, &f.bytes).map(|()| path)
        })
        .collect()
}

/// Loads the config, runs the batch and writes `summaries.csv`,
/// `aggregate.json`, and optionally trajectories and frames under `out_dir`.
pub fn run_batch(opts: &BatchOptions) -> Result<BatchReport, CliError> {
    let config = Config::from_json_file(&opts.config_path)?;
    create_dir(&opts.out_dir)?;
    let capture = Capture {
        trajectory: opts.log_trajectories,
        render: Some(opts.render),
        debug_target: opts.debug_target,
    };
    let runs = simulate_batch(&config, opts.episodes, opts.base_seed, opts.policy, capture)?;

    let summaries: Vec<EpisodeSummary> = runs.iter().map(|r| r.summary.clone()).collect();
    let aggregate = Aggregate::from_summaries(opts.policy, opts.base_seed, &summaries);

    write_file(
        &opts.out_dir.join("summaries.csv"),
        &summaries_csv(&summaries)?,
    )?;
    let mut json = serde_json::to_string_pretty(&aggregate).expect("aggregate serializes");
    json.push('\n');
    write_file(&opts.out_dir.join("aggregate.json"), json.as_bytes())?;

    if opts.log_trajectories {
        let dir = opts.out_dir.join("trajectories");
        create_dir(&dir)?;
        for run in &runs {
            let path = dir.join(format!("episode_{:05}.jsonl", run.summary.episode_index));
            write_file(&path, run.trajectory.as_deref().unwrap_or("").as_bytes())?;
        }
    }
    if opts.render != RenderMode::None {
        for run in &runs {
            let dir = opts
                .out_dir
                .join("frames")
                .join(format!("episode_{:05}", run.summary.episode_index));
            write_frames(&dir, &run.frames)?;
        }
    }
    Ok(BatchReport {
        summaries,
        aggregate,
    })
}

/// Renders a single episode, one file per frame, into `output`.
pub fn render_episode(
    config_path: &Path,
    seed: u64,
    policy: PolicyKind,
    mode: RenderMode,
    output: &Path,
    debug_target: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let config = Config::from_json_file(config_path)?;
    let capture = Capture {
        trajectory: false,
        render: Some(mode),
        debug_target,
    };
    let run = run_episode(&config, 0, seed, policy, capture)?;
    write_frames(output, &run.frames)
}
