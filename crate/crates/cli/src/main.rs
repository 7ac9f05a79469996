//! `cie`: command-line workbench for complex information entropy experiments.

mod error;
mod graph_demo;
mod infer;
mod life;
mod output;
mod simulate;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cie_core::graph::{CutObjective, GraphSpec};
use cie_core::inference::{AnnealDriver, GrowthCriterion, InferenceConfig};
use cie_core::multiscale::{patterns, Topology};
use cie_core::world::WorldConfig;
use error::{CliError, CliResult};
use output::{Format, Formats, GraphDemoRun, InferRun, LifeRun, Manifest, OutputDir, RunConfig, SimulateRun};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cie", version, about = "Complex information entropy workbench")]
struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving the outputs and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Output formats, comma separated [default: json,csv,svg].
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Block entropies of an edge-probability graph.
    GraphDemo(GraphDemoArgs),
    /// Simulate the four-region world.
    Simulate(SimulateArgs),
    /// Discover hidden objects in a trajectory.
    Infer(InferArgs),
    /// Run Game of Life and extract macro-objects.
    Life(LifeArgs),
    /// Repeat the run recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct GraphDemoArgs {
    /// Eight nodes, every slot with probability 0.5.
    #[arg(long, conflicts_with = "graph")]
    paper_example: bool,
    /// Graph description: `{"n": .., "p": [[..]]}` or `{"n": .., "uniform_p": ..}`.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// `all`, or comma-separated blocks of 1-based nodes such as `1-4,5-8`.
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long)]
    find_bipartition: bool,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::MeanSlotEntropy)]
    objective: ObjectiveArg,
    #[arg(long, default_value_t = 16)]
    max_exhaustive_n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    MeanSlotEntropy,
    TotalEntropy,
}

impl From<ObjectiveArg> for CutObjective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::MeanSlotEntropy => CutObjective::MeanSlotEntropy,
            ObjectiveArg::TotalEntropy => CutObjective::TotalEntropy,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// World configuration JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    a_mag: Option<f64>,
    #[arg(long)]
    r_center: Option<f64>,
    #[arg(long)]
    map_size: Option<f64>,
    #[arg(long)]
    v0_mag: Option<f64>,
}

#[derive(Args)]
struct InferArgs {
    /// Trajectory in CSV, or JSON when the extension is `.json`.
    #[arg(long)]
    input: PathBuf,
    /// Inference configuration JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    criterion: Option<CriterionArg>,
    #[arg(long, value_enum)]
    driver: Option<DriverArg>,
    #[arg(long)]
    min_improvement: Option<f64>,
    #[arg(long)]
    max_objects: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Loss,
    Cie,
}

#[derive(Clone, Copy, ValueEnum)]
enum DriverArg {
    HardEm,
    Bellman,
}

#[derive(Args)]
struct LifeArgs {
    /// Plaintext or RLE pattern file.
    #[arg(long, conflicts_with = "builtin")]
    pattern: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BuiltinPattern::Glider)]
    builtin: BuiltinPattern,
    #[arg(long, default_value_t = 16)]
    width: usize,
    #[arg(long, default_value_t = 16)]
    height: usize,
    /// Column of the pattern's top-left corner.
    #[arg(long, default_value_t = 1)]
    x: usize,
    /// Row of the pattern's top-left corner.
    #[arg(long, default_value_t = 1)]
    y: usize,
    #[arg(long, value_enum, default_value_t = TopologyArg::Torus)]
    topology: TopologyArg,
    #[arg(long, default_value_t = 20)]
    generations: usize,
    #[arg(long, default_value_t = 4)]
    max_period: usize,
    #[arg(long)]
    zizo: bool,
    #[arg(long, default_value_t = 10)]
    max_iters: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinPattern {
    Glider,
    Block,
    Blinker,
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    Torus,
    Bounded,
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
}

fn read_text(path: &Path, what: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{what} {}: {e}", path.display())))
}

fn graph_run(a: GraphDemoArgs, seed: u64) -> CliResult<GraphDemoRun> {
    let graph = match (&a.graph, a.paper_example) {
        (Some(path), _) => {
            let g = GraphSpec::parse(&read_text(path, "graph")?)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            GraphSpec::Matrix { n: g.n(), p: g.rows() }
        }
        (None, true) => graph_demo::paper_example(),
        (None, false) => return Err(CliError::input("graph-demo needs --graph <file> or --paper-example")),
    };
    let blocks = match (&a.blocks, a.paper_example) {
        (Some(text), _) => graph_demo::parse_blocks(text)?,
        (None, true) => graph_demo::parse_blocks("1-4,5-8")?,
        (None, false) => output::BlockChoice::All,
    };
    Ok(GraphDemoRun {
        graph,
        blocks,
        find_bipartition: a.find_bipartition,
        objective: a.objective.into(),
        max_exhaustive_n: a.max_exhaustive_n,
        seed,
    })
}

fn simulate_run(a: SimulateArgs, seed: Option<u64>) -> CliResult<SimulateRun> {
    let mut world: WorldConfig = match &a.config {
        Some(path) => serde_json::from_str(&read_text(path, "config")?)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        None => WorldConfig::default(),
    };
    if let Some(v) = seed {
        world.seed = v;
    }
    if let Some(v) = a.n_steps {
        world.n_steps = v;
    }
    if let Some(v) = a.dt {
        world.dt = v;
    }
    if let Some(v) = a.a_mag {
        world.a_mag = v;
    }
    if let Some(v) = a.r_center {
        world.r_center = v;
    }
    if let Some(v) = a.map_size {
        world.map_size = v;
    }
    if let Some(v) = a.v0_mag {
        world.v0_mag = v;
    }
    Ok(SimulateRun { world: world.resolved() })
}

fn infer_run(a: InferArgs, seed: Option<u64>) -> CliResult<InferRun> {
    let mut inference: InferenceConfig = match &a.config {
        Some(path) => serde_json::from_str(&read_text(path, "config")?)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        None => InferenceConfig::default(),
    };
    if let Some(v) = seed {
        inference.seed = v;
    }
    if let Some(c) = a.criterion {
        inference.criterion = match c {
            CriterionArg::Loss => GrowthCriterion::Loss,
            CriterionArg::Cie => GrowthCriterion::Cie,
        };
    }
    if let Some(d) = a.driver {
        inference.driver = match d {
            DriverArg::HardEm => AnnealDriver::HardEm,
            DriverArg::Bellman => AnnealDriver::Bellman,
        };
    }
    if let Some(v) = a.min_improvement {
        inference.min_improvement = v;
    }
    if let Some(v) = a.max_objects {
        inference.max_objects = v;
    }
    let input = std::fs::canonicalize(&a.input).unwrap_or(a.input);
    Ok(InferRun { input, inference })
}

fn life_run(a: LifeArgs) -> CliResult<LifeRun> {
    let topology = match a.topology {
        TopologyArg::Torus => Topology::Torus,
        TopologyArg::Bounded => Topology::Bounded,
    };
    let pattern = match &a.pattern {
        Some(path) => read_text(path, "pattern")?,
        None => match a.builtin {
            BuiltinPattern::Glider => patterns::GLIDER,
            BuiltinPattern::Block => patterns::BLOCK,
            BuiltinPattern::Blinker => patterns::BLINKER,
        }
        .to_string(),
    };
    Ok(LifeRun {
        board: life::place(&pattern, a.width, a.height, a.x, a.y, topology)?,
        topology,
        generations: a.generations,
        max_period: a.max_period,
        zizo: a.zizo,
        max_iters: a.max_iters,
    })
}

fn execute(run: &RunConfig, formats: &Formats, out_dir: &Path) -> CliResult<Vec<String>> {
    let mut out = OutputDir::create(out_dir)?;
    match run {
        RunConfig::GraphDemo(r) => {
            let report = graph_demo::execute(r, formats, &mut out)?;
            for b in &report.blocks {
                println!("H(A{}) = {} bits", b.block, b.bits);
            }
            println!("H(B) = {} bits", report.cross.iter().map(|c| c.bits).sum::<f64>());
            println!("total = {} bits", report.block_total_bits);
            if let Some(bp) = &report.bipartition {
                println!("best bipartition: {:?}", bp.blocks);
            }
        }
        RunConfig::Simulate(r) => {
            let traj = simulate::execute(r, formats, &mut out)?;
            println!("simulated {} samples", traj.samples.len());
        }
        RunConfig::Infer(r) => {
            let doc = infer::execute(r, formats, &mut out)?;
            println!("objects: {}", doc.objects.len());
            println!("loss: {:e} (baseline {:e})", doc.loss, doc.baseline_loss);
            if let Some(rec) = &doc.recovery {
                println!("agreement with regions: {:.4}", rec.agreement);
            }
            for w in &doc.warnings {
                eprintln!("warning: {w}");
            }
        }
        RunConfig::Life(r) => {
            let report = life::execute(r, formats, &mut out)?;
            for o in &report.objects {
                println!(
                    "{:?} period {} displacement ({}, {}) frames {}..={}",
                    o.kind, o.period, o.displacement.0, o.displacement.1, o.first_frame, o.last_frame
                );
            }
            if let Some(z) = &report.zizo {
                println!("zizo converged: {} after {} iterations", z.converged, z.iterations);
            }
        }
    }
    out.finish(formats, run.clone())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let chosen = cli.format.map(Formats::new);
    let fresh = |run: RunConfig| -> CliResult<(RunConfig, Formats)> {
        Ok((run, chosen.clone().unwrap_or_else(|| Formats::new(vec![Format::Json, Format::Csv, Format::Svg]))))
    };
    let (run, formats) = match cli.command {
        Command::Replay(a) => {
            let manifest = Manifest::read(&a.manifest)?;
            (manifest.run, chosen.clone().unwrap_or(manifest.formats))
        }
        Command::GraphDemo(a) => fresh(RunConfig::GraphDemo(graph_run(a, cli.seed.unwrap_or(0))?))?,
        Command::Simulate(a) => fresh(RunConfig::Simulate(simulate_run(a, cli.seed)?))?,
        Command::Infer(a) => fresh(RunConfig::Infer(infer_run(a, cli.seed)?))?,
        Command::Life(a) => fresh(RunConfig::Life(life_run(a)?))?,
    };
    let written = execute(&run, &formats, &cli.out)?;
    println!("wrote {} files to {}", written.len(), cli.out.display());
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
