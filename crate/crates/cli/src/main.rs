use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use searchgrid::{cells_for_side, PolicyKind, DEFAULT_CELL_SIZE_M};
use searchgrid_cli::{render_episode, run_batch, BatchOptions, RenderMode};

#[derive(Parser)]
#[command(
    name = "searchgrid",
    version,
    about = "Seeded rollouts of the drone search grid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of seeded episodes and write statistics.
    Run(RunArgs),
    /// Render a single episode frame by frame.
    Render(RenderArgs),
    /// Grid side (in cells) needed to cover a square search zone.
    Cells {
        #[arg(long)]
        side_m: f64,
        #[arg(long, default_value_t = DEFAULT_CELL_SIZE_M)]
        cell_size_m: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Random,
    Greedy,
    Lawnmower,
}

impl From<Policy> for PolicyKind {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Random => PolicyKind::Random,
            Policy::Greedy => PolicyKind::Greedy,
            Policy::Lawnmower => PolicyKind::Lawnmower,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Render {
    None,
    Ascii,
    Pgm,
}

impl From<Render> for RenderMode {
    fn from(r: Render) -> Self {
        match r {
            Render::None => RenderMode::None,
            Render::Ascii => RenderMode::Ascii,
            Render::Pgm => RenderMode::Pgm,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 1)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "greedy")]
    policy: Policy,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "none")]
    render: Render,
    #[arg(long, value_enum, default_value = "off")]
    log_trajectories: Switch,
    #[arg(long, value_enum, default_value = "off")]
    debug_target: Switch,
}

#[derive(clap::Args)]
struct RenderArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "greedy")]
    policy: Policy,
    #[arg(long, value_enum, default_value = "ascii")]
    mode: Render,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "off")]
    debug_target: Switch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => {
            let opts = BatchOptions {
                config_path: args.config,
                episodes: args.episodes,
                base_seed: args.seed,
                policy: args.policy.into(),
                out_dir: args.out,
                render: args.render.into(),
                log_trajectories: args.log_trajectories == Switch::On,
                debug_target: args.debug_target == Switch::On,
            };
            run_batch(&opts).map(|report| {
                let a = &report.aggregate;
                println!(
                    "{} episodes, policy {}: find_rate {:.4}, mean total reward {:.2}",
                    a.episodes, a.policy, a.find_rate, a.mean_total_reward
                );
            })
        }
        Command::Render(args) => render_episode(
            &args.config,
            args.seed,
            args.policy.into(),
            args.mode.into(),
            &args.out,
            args.debug_target == Switch::On,
        )
        .map(|paths| println!("wrote {} frames to {}", paths.len(), args.out.display())),
        Command::Cells {
            side_m,
            cell_size_m,
        } => match cells_for_side(side_m, cell_size_m) {
            Ok(n) => {
                println!("{n}");
                Ok(())
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
