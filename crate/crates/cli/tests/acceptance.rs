//! Acceptance criteria, one line of output per criterion.
//!
//! Run with `cargo test -p searchgrid-cli --test acceptance -- --nocapture`
//! to see the report.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use searchgrid::target::candidate_cells;
use searchgrid::{
    cells_for_side, gaussian_value, rewards, step_target, Action, AgentId, CellCoord, Config, Env,
    GaussianParams, Map, PolicyKind, TargetState, Vector2,
};
use searchgrid_cli::{run_batch, simulate_batch, BatchOptions, Capture, RenderMode};

const BASELINE_CONFIG: &str = include_str!("../configs/baseline_8x8.json");

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    check(
        elapsed < budget,
        format!("took {elapsed:.2?}, budget {budget:.0?}"),
    )
}

fn config(n: usize, drones: &[(i32, i32)], person: (i32, i32), limit: u32) -> Config {
    Config {
        grid_size: n,
        timestep_limit: limit,
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

fn acts(list: &[Action]) -> BTreeMap<AgentId, Action> {
    list.iter()
        .enumerate()
        .map(|(i, &a)| (AgentId(i), a))
        .collect()
}

fn two_cell_map(n: usize, cell: CellCoord, value: f64, rest: CellCoord) -> Map {
    let mut values = vec![0.0; n * n];
    values[cell.index(n)] = value;
    values[rest.index(n)] = 1.0 - value;
    Map::from_parts(n, values, (0.0, 0.0), 1.0, 1).unwrap()
}

fn reward_of(env: &mut Env, list: &[Action], agent: usize) -> Result<f64, String> {
    let out = env.step(&acts(list)).map_err(|e| e.to_string())?;
    Ok(out.rewards[&AgentId(agent)])
}

fn reward_table() -> Verdict {
    let start = Instant::now();
    let mut rows = Vec::new();

    let (mut env, _) = Env::reset(config(8, &[(3, 3)], (7, 7), 500), 0).unwrap();
    let r = reward_of(&mut env, &[Action::Right], 0)?;
    check(
        r == 1.0 && env.agents()[0].position == CellCoord::new(4, 3),
        format!("move: {r}"),
    )?;
    rows.push(r);

    let (mut env, _) = Env::reset(config(8, &[(0, 0)], (7, 7), 500), 0).unwrap();
    let r = reward_of(&mut env, &[Action::Left], 0)?;
    check(
        r == -100_000.0 && !env.agents()[0].alive,
        format!("leave grid: {r}"),
    )?;
    rows.push(r);

    let (mut env, _) = Env::reset(config(5, &[(1, 2), (3, 2)], (4, 4), 500), 0).unwrap();
    let out = env
        .step(&acts(&[Action::Right, Action::Left]))
        .map_err(|e| e.to_string())?;
    let (a, b) = (out.rewards[&AgentId(0)], out.rewards[&AgentId(1)]);
    check(
        a == -100_000.0 && b == -100_000.0,
        format!("collision: {a}, {b}"),
    )?;
    check(
        env.agents()[0].position == CellCoord::new(1, 2)
            && env.agents()[1].position == CellCoord::new(3, 2),
        "colliding movers must stay put",
    )?;
    rows.push(a);

    let (mut env, _) = Env::reset(config(4, &[(1, 1)], (3, 3), 500), 0).unwrap();
    env.set_map(two_cell_map(
        4,
        CellCoord::new(1, 1),
        0.004,
        CellCoord::new(2, 2),
    ))
    .unwrap();
    let r = reward_of(&mut env, &[Action::Search], 0)?;
    check(r == -100.0, format!("low-probability search: {r}"))?;
    rows.push(r);

    let (mut env, _) = Env::reset(config(4, &[(1, 1)], (3, 3), 500), 0).unwrap();
    env.set_map(two_cell_map(
        4,
        CellCoord::new(1, 1),
        0.5,
        CellCoord::new(2, 2),
    ))
    .unwrap();
    let r = reward_of(&mut env, &[Action::Search], 0)?;
    check(r == 5000.0, format!("probability search: {r}"))?;
    rows.push(r);

    let (mut env, _) = Env::reset(config(4, &[(2, 2)], (2, 2), 500), 0).unwrap();
    let r = reward_of(&mut env, &[Action::Search], 0)?;
    check(r == 10_000.0 && env.is_done(), format!("find: {r}"))?;
    rows.push(r);

    let (mut env, _) = Env::reset(config(4, &[(0, 0)], (3, 3), 2), 0).unwrap();
    reward_of(&mut env, &[Action::Right], 0)?;
    reward_of(&mut env, &[Action::Left], 0)?;
    let out = env
        .step(&acts(&[Action::Right]))
        .map_err(|e| e.to_string())?;
    let r = out.rewards[&AgentId(0)];
    check(
        r == -100_000.0 && out.truncations[&AgentId(0)] && env.is_done(),
        format!("over limit: {r}"),
    )?;
    rows.push(r);

    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("7 rows {rows:?}"))
}

/// The printed formula is used literally. The worked prose examples that
/// accompany it (200 at step 480, 4000 at step 100, limit 500) do not follow
/// from it; the formula gives 420 and 8020.
fn find_formula() -> Verdict {
    let first: f64 = rewards::find(1, 500);
    let late: f64 = rewards::find(480, 500);
    check(first == 10_000.0, format!("t=1 gave {first}"))?;
    check(late == 420.0, format!("t=480 gave {late}"))?;

    // Same value through a full episode.
    let (mut env, _) = Env::reset(config(8, &[(0, 0)], (7, 7), 500), 3).unwrap();
    for t in 0..479 {
        let a = if t % 2 == 0 {
            Action::Right
        } else {
            Action::Left
        };
        env.step(&acts(&[a])).map_err(|e| e.to_string())?;
    }
    env.set_target_position(env.agents()[0].position).unwrap();
    let r = reward_of(&mut env, &[Action::Search], 0)?;
    check(r == 420.0, format!("episode find at 480 gave {r}"))?;
    Ok(format!("t=1 -> {first}, t=480/500 -> {late}"))
}

fn grid_sizing() -> Verdict {
    let n = cells_for_side(1000.0, 130.0).map_err(|e| e.to_string())?;
    check(n == 8, format!("got {n}"))?;
    Ok("1000 m / 130 m -> 8 cells".into())
}

fn random_config(rng: &mut ChaCha8Rng, max_n: usize) -> Config {
    let n = rng.gen_range(1..=max_n);
    Config {
        grid_size: n,
        timestep_limit: 100,
        person_initial_position: CellCoord::new(
            rng.gen_range(0..n as i32),
            rng.gen_range(0..n as i32),
        ),
        current_vector: Vector2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)),
        gaussian: GaussianParams::new(
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.3..4.0),
            rng.gen_range(0.3..4.0),
        ),
        radius_initial: rng.gen_range(0.0..3.0),
        radius_growth: rng.gen_range(0.0..0.5),
        drone_positions: vec![CellCoord::new(0, 0)],
        cell_size_m: 130.0,
        seed: 0,
    }
}

fn normalization() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let c = random_config(&mut rng, 24);
        let mut map = Map::init(&c);
        for t in 1..=50 {
            map = map.advance(&c);
            let dev = (map.values().iter().sum::<f64>() - 1.0).abs();
            worst = worst.max(dev);
            check(
                dev <= 1e-9,
                format!("config {i} tick {t}: |sum-1| = {dev:e}"),
            )?;
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("1000 configs x 50 ticks, max |sum-1| = {worst:e}"))
}

fn gaussian_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let mut c = random_config(&mut rng, 12);
        c.gaussian.sigma_x = rng.gen_range(0.5..4.0);
        c.gaussian.sigma_y = rng.gen_range(0.5..4.0);
        let mut map = Map::init(&c);
        for _ in 0..rng.gen_range(1..12) {
            map = map.advance(&c);
        }
        let n = c.grid_size;
        let center = map.supposed_position();
        let r = map.support_radius();
        let dist = |cell: CellCoord| {
            ((cell.x as f64 - center.0).powi(2) + (cell.y as f64 - center.1).powi(2)).sqrt()
        };
        let support: Vec<CellCoord> = (0..n * n)
            .map(|k| CellCoord::from_index(k, n))
            .filter(|&cell| dist(cell) <= r)
            .collect();
        if support.is_empty() {
            continue;
        }
        let raw =
            |cell: CellCoord| gaussian_value(cell.x as f64, cell.y as f64, center, &c.gaussian);
        let raw_sum: f64 = support.iter().map(|&cell| raw(cell)).sum();
        let cell = support[rng.gen_range(0..support.len())];
        let want = raw(cell);
        let got = map.value(cell).unwrap() * raw_sum;
        let rel = ((got - want) / want).abs();
        worst = worst.max(rel);
        check(
            rel <= 1e-12,
            format!("triple {i}: cell {cell}, rel err {rel:e}"),
        )?;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("10000 triples, max rel err {worst:e}"))
}

fn target_distribution() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 5;
    let draws = 100_000;
    let mut worst = 0.0f64;
    for profile in 0..20 {
        let here = CellCoord::new(rng.gen_range(0..5), rng.gen_range(0..5));
        let cands = candidate_cells(here, n);
        let mut weights: Vec<f64> = cands
            .iter()
            .map(|_| {
                if rng.gen_bool(0.2) {
                    0.0
                } else {
                    rng.gen_range(0.01..1.0)
                }
            })
            .collect();
        if weights.iter().all(|&w| w == 0.0) {
            weights[0] = 1.0;
        }
        // Mass outside the candidate set must not matter.
        let outside = (0..n * n)
            .map(|k| CellCoord::from_index(k, n))
            .find(|cell| !cands.contains(cell));
        let mut values = vec![0.0; n * n];
        for (cell, w) in cands.iter().zip(&weights) {
            values[cell.index(n)] = *w;
        }
        if let Some(cell) = outside {
            values[cell.index(n)] = 0.7;
        }
        let total: f64 = values.iter().sum();
        values.iter_mut().for_each(|v| *v /= total);
        let map = Map::from_parts(n, values, (2.0, 2.0), 3.0, 1).unwrap();

        let wsum: f64 = cands.iter().map(|cell| map.value(*cell).unwrap()).sum();
        let mut counts = vec![0usize; cands.len()];
        for _ in 0..draws {
            let p = step_target(TargetState::new(here), &map, &mut rng).position;
            let k = cands
                .iter()
                .position(|&cell| cell == p)
                .ok_or("left candidate set")?;
            counts[k] += 1;
        }
        for (k, cell) in cands.iter().enumerate() {
            let expected = map.value(*cell).unwrap() / wsum;
            let dev = (counts[k] as f64 / draws as f64 - expected).abs();
            worst = worst.max(dev);
            check(
                dev <= 0.01,
                format!("profile {profile} candidate {cell}: dev {dev}"),
            )?;
        }
    }
    Ok(format!("20 profiles x 100000 draws, max dev {worst:.4}"))
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config_path = tmp.path().join("config.json");
    fs::write(&config_path, BASELINE_CONFIG).unwrap();
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        let opts = BatchOptions {
            config_path: config_path.clone(),
            episodes: 200,
            base_seed: 11,
            policy: PolicyKind::Random,
            out_dir: tmp.path().join(run),
            render: RenderMode::None,
            log_trajectories: true,
            debug_target: false,
        };
        run_batch(&opts).map_err(|e| e.to_string())?;
        trees.push(read_tree(&opts.out_dir));
    }
    check(
        trees[0].len() == 202,
        format!("expected 202 files, got {}", trees[0].len()),
    )?;
    check(
        trees[0].contains_key("summaries.csv") && trees[0].contains_key("aggregate.json"),
        "missing outputs",
    )?;
    for (name, bytes) in &trees[0] {
        check(trees[1].get(name) == Some(bytes), format!("{name} differs"))?;
    }
    check(trees[0].len() == trees[1].len(), "file sets differ")?;
    Ok(format!(
        "{} files byte-identical across two runs",
        trees[0].len()
    ))
}

fn containment() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut steps = 0usize;
    let mut episodes = 0usize;
    while steps < 100_000 {
        let mut c = random_config(&mut rng, 9);
        let n = c.grid_size;
        let drones = rng.gen_range(1..=3.min(n * n));
        let mut cells: Vec<usize> = (0..n * n).collect();
        for i in 0..drones {
            let j = rng.gen_range(i..cells.len());
            cells.swap(i, j);
        }
        c.drone_positions = cells[..drones]
            .iter()
            .map(|&k| CellCoord::from_index(k, n))
            .collect();
        c.timestep_limit = rng.gen_range(1..80);
        let (mut env, _) = Env::reset(c.clone(), rng.gen()).unwrap();
        let mut attempts = 0u32;
        while !env.is_done() {
            // Mostly in-grid moves so episodes run long.
            let actions: BTreeMap<_, _> = env
                .live_agents()
                .map(|a| {
                    let pick = Action::ALL[rng.gen_range(0..5)];
                    let pick = if a.position.offset(pick).in_grid(n) || rng.gen_bool(0.05) {
                        pick
                    } else {
                        Action::Search
                    };
                    (a.id, pick)
                })
                .collect();
            env.step(&actions).map_err(|e| e.to_string())?;
            attempts += 1;
            steps += 1;
            check(
                env.target().position.in_grid(n),
                format!("target left grid: {}", env.target().position),
            )?;
            check(
                env.live_agents().all(|a| a.position.in_grid(n)),
                "live drone off grid",
            )?;
            check(
                env.timestep() <= c.timestep_limit,
                "timestep exceeded limit",
            )?;
            check(
                attempts <= c.timestep_limit + 1,
                "episode ran past its budget",
            )?;
        }
        episodes += 1;
    }
    Ok(format!("{steps} steps over {episodes} episodes"))
}

fn baseline_separation() -> Verdict {
    let start = Instant::now();
    let c = Config::from_json_str(BASELINE_CONFIG).map_err(|e| e.to_string())?;
    check(
        c.grid_size == 8 && c.timestep_limit == 200,
        "baseline config must be 8x8, limit 200",
    )?;
    let run =
        |policy| simulate_batch(&c, 200, 0, policy, Capture::default()).map_err(|e| e.to_string());
    let greedy = run(PolicyKind::Greedy)?;
    let random = run(PolicyKind::Random)?;
    let rate = |runs: &[searchgrid_cli::EpisodeRun]| {
        runs.iter().filter(|r| r.summary.found).count() as f64 / runs.len() as f64
    };
    let (g_rate, r_rate) = (rate(&greedy), rate(&random));
    check(
        g_rate > r_rate,
        format!("greedy find_rate {g_rate} <= random {r_rate}"),
    )?;

    let mutual: Vec<(u32, u32)> = greedy
        .iter()
        .zip(&random)
        .filter(|(g, r)| g.summary.found && r.summary.found)
        .map(|(g, r)| (g.summary.steps, r.summary.steps))
        .collect();
    check(!mutual.is_empty(), "no mutually found episodes")?;
    let mean = |f: fn(&(u32, u32)) -> u32| {
        mutual.iter().map(|p| f(p) as f64).sum::<f64>() / mutual.len() as f64
    };
    let (g_steps, r_steps) = (mean(|p| p.0), mean(|p| p.1));
    check(
        g_steps < r_steps,
        format!("greedy mean steps {g_steps} >= random {r_steps}"),
    )?;
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "find_rate greedy {g_rate:.3} vs random {r_rate:.3}; mean steps over {} mutual finds {g_steps:.2} vs {r_steps:.2}",
        mutual.len()
    ))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("reward table", reward_table),
        ("find reward formula", find_formula),
        ("grid sizing", grid_sizing),
        ("normalization", normalization),
        ("gaussian oracle", gaussian_oracle),
        ("target distribution", target_distribution),
        ("batch determinism", determinism),
        ("containment", containment),
        ("baseline separation", baseline_separation),
    ];
    let mut failed = Vec::new();
    for (name, criterion) in criteria {
        let start = Instant::now();
        match criterion() {
            Ok(detail) => println!("PASS  {name:<22} {detail} ({:.2?})", start.elapsed()),
            Err(why) => {
                println!("FAIL  {name:<22} {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
