//! `treeswarm`: encode shapes into tree maps, run swarm simulations, and
//! recompute metrics from recorded trajectories.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors (missing
//! or malformed files, config violations, failed runs).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use treeswarm_core::io::{self, config::config_hash, dump, pgm, traj, vox};
use treeswarm_core::metrics::{memory_report, step_record, MetricsReport};
use treeswarm_core::shapes::{generate_2d, generate_3d, Shape2, Shape3};
use treeswarm_core::sim::{build_map, run_on, SimConfig, TrajectoryLog, WorldState};
use treeswarm_core::{Error, NeighborMap, Result, TreeMap};

#[derive(Parser)]
#[command(name = "treeswarm", version, about = "Tree-map shape assembly for robot swarms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a shape file (PGM or VOX3) into a tree map dump.
    Encode {
        /// Input shape file.
        shape: PathBuf,
        /// Maximum tree depth.
        #[arg(long, default_value_t = 7)]
        dmax: u32,
        /// Output dump path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a simulation and write trajectory.csv and metrics.json.
    Simulate {
        /// Run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Directory for the output files (created if missing).
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Recompute metrics from a recorded trajectory.
    Metrics {
        /// Trajectory CSV written by `simulate`.
        #[arg(long)]
        traj: PathBuf,
        /// The config the trajectory was recorded with.
        #[arg(long)]
        config: PathBuf,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Decode a tree map dump back to a dense image.
    Rasterize {
        /// Input dump path.
        tree: PathBuf,
        /// Output image (PGM for 2D maps, VOX3 for 3D).
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a built-in test shape.
    Gen {
        /// Which shape to generate.
        #[arg(long)]
        shape: ShapeName,
        /// Image side in pixels (a power of two).
        #[arg(long)]
        side: usize,
        /// Output image path.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Config keys that can be overridden from the command line.
#[derive(Args)]
struct Overrides {
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's d_max.
    #[arg(long)]
    dmax: Option<u32>,
    /// Override the config's d_map.
    #[arg(long)]
    dmap: Option<u32>,
    /// Override the config's n_steps.
    #[arg(long)]
    steps: Option<u64>,
    /// Override the config's n_robot.
    #[arg(long)]
    robots: Option<usize>,
}

impl Overrides {
    fn apply(&self, config: &mut SimConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(dmax) = self.dmax {
            config.d_max = dmax;
        }
        if let Some(dmap) = self.dmap {
            config.d_map = Some(dmap);
        }
        if let Some(steps) = self.steps {
            config.n_steps = steps;
        }
        if let Some(robots) = self.robots {
            config.n_robot = robots;
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeName {
    Disk,
    Ring,
    LetterT,
    LetterH,
    Pyramid,
    Helix,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version land here too; only real usage errors fail
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode { shape, dmax, out } => match io::sniff_dimension(&shape)? {
            2 => encode::<2>(&shape, dmax, &out),
            3 => encode::<3>(&shape, dmax, &out),
            d => Err(Error::Dimension(d)),
        },
        Command::Simulate { config, out_dir, overrides } => {
            let config = load(&config, &overrides)?;
            match config.dim {
                2 => simulate::<2>(&config, &out_dir),
                3 => simulate::<3>(&config, &out_dir),
                d => Err(Error::Dimension(d)),
            }
        }
        Command::Metrics { traj, config, out, overrides } => {
            let config = load(&config, &overrides)?;
            match config.dim {
                2 => metrics::<2>(&traj, &config, out.as_deref()),
                3 => metrics::<3>(&traj, &config, out.as_deref()),
                d => Err(Error::Dimension(d)),
            }
        }
        Command::Rasterize { tree, out } => match dump::read_dimension(&tree)? {
            2 => rasterize2(&tree, &out),
            3 => rasterize3(&tree, &out),
            d => Err(Error::Dimension(d)),
        },
        Command::Gen { shape, side, out } => gen(shape, side, &out),
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<SimConfig> {
    let mut config = io::load_config(path)?;
    overrides.apply(&mut config);
    Ok(config)
}

fn encode<const D: usize>(shape: &Path, dmax: u32, out: &Path) -> Result<()> {
    let img = io::load_shape::<D>(shape)?;
    let tree = TreeMap::encode(&img, dmax)?.merge();
    dump::write_tree(out, &tree)?;
    let report = memory_report(&tree);
    println!("encoded {} ({D}D, padded side {}, d_max {dmax})", shape.display(), img.side());
    println!(
        "nodes:           {} ({} middle, {} leaves)",
        tree.node_count(),
        tree.n_middle(),
        tree.n_leaf()
    );
    println!("tree bytes:      {:.3}", report.tree_bytes);
    println!("full grid bytes: {:.0}", report.full_grid_bytes);
    println!("reduction ratio: {:.3}", report.reduction_ratio);
    println!("wrote {}", out.display());
    Ok(())
}

fn simulate<const D: usize>(config: &SimConfig, out_dir: &Path) -> Result<()> {
    let map = build_map::<D>(config)?;
    let log = run_on(&map, config)?;
    let report = MetricsReport::new(&log, memory_report(map.tree()));

    std::fs::create_dir_all(out_dir)?;
    let traj_path = out_dir.join("trajectory.csv");
    let metrics_path = out_dir.join("metrics.json");
    traj::write_trajectory(&traj_path, &log)?;
    traj::write_metrics(&metrics_path, &report)?;

    println!("ran {} steps, {} robots, seed {}", config.n_steps, config.n_robot, config.seed);
    match report.entering_time {
        Some(t) => println!("entering time:       step {t}"),
        None => println!("entering time:       not reached"),
    }
    println!("final entering rate: {:.1}%", report.final_entering_rate);
    println!("wrote {}", traj_path.display());
    println!("wrote {}", metrics_path.display());
    Ok(())
}

fn metrics<const D: usize>(traj_path: &Path, config: &SimConfig, out: Option<&Path>) -> Result<()> {
    let traj = traj::read_trajectory::<D>(traj_path)?;
    let hash = config_hash(config);
    if traj.config_hash != hash {
        return Err(Error::Config(format!(
            "trajectory was recorded with config {} but this config hashes to {hash}",
            traj.config_hash
        )));
    }
    if traj.states.is_empty() {
        return Err(Error::file(traj_path, "no recorded steps"));
    }
    let map = build_map::<D>(config)?;
    let nmap = NeighborMap::build(&map, config.d_map_effective())?;
    let params = config.control_params::<D>();
    let records: Vec<_> = traj
        .states
        .iter()
        .map(|(step, positions)| {
            let world = WorldState::<D> {
                positions: positions.clone(),
                step: *step,
                dt: traj.dt,
                seed: traj.seed,
            };
            step_record(&world, &map, &nmap, &params)
        })
        .collect();
    let log = TrajectoryLog::<D> {
        n_robot: traj.n_robot,
        dt: traj.dt,
        seed: traj.seed,
        config_hash: traj.config_hash,
        initial: Vec::new(),
        states: traj.states,
        metrics: records,
    };
    let report = MetricsReport::new(&log, memory_report(map.tree()));
    match out {
        Some(path) => {
            traj::write_metrics(path, &report)?;
            println!("wrote {}", path.display());
        }
        None => print!("{}", traj::metrics_json(&report)?),
    }
    Ok(())
}

fn rasterize2(tree: &Path, out: &Path) -> Result<()> {
    let map: TreeMap<2> = dump::read_tree(tree)?;
    let img = map.rasterize()?;
    pgm::write(out, &img)?;
    println!("wrote {} (2D, side {})", out.display(), img.side());
    Ok(())
}

fn rasterize3(tree: &Path, out: &Path) -> Result<()> {
    let map: TreeMap<3> = dump::read_tree(tree)?;
    let img = map.rasterize()?;
    vox::write(out, &img)?;
    println!("wrote {} (3D, side {})", out.display(), img.side());
    Ok(())
}

fn gen(shape: ShapeName, side: usize, out: &Path) -> Result<()> {
    let (dim, black, total) = match shape {
        ShapeName::Disk | ShapeName::Ring | ShapeName::LetterT | ShapeName::LetterH => {
            let which = match shape {
                ShapeName::Disk => Shape2::Disk,
                ShapeName::Ring => Shape2::Ring,
                ShapeName::LetterT => Shape2::LetterT,
                _ => Shape2::LetterH,
            };
            let img = generate_2d(which, side)?;
            pgm::write(out, &img)?;
            (2, img.black_count(), img.voxels().len())
        }
        ShapeName::Pyramid | ShapeName::Helix => {
            let which = match shape {
                ShapeName::Pyramid => Shape3::Pyramid,
                _ => Shape3::Helix,
            };
            let img = generate_3d(which, side)?;
            vox::write(out, &img)?;
            (3, img.black_count(), img.voxels().len())
        }
    };
    println!("wrote {} ({dim}D, side {side}, {black} black of {total})", out.display());
    Ok(())
}
