use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

const FORMATS: &str = "\
File formats:
  mesh (text):
    surf v=<V> f=<F>
    n <id> [x y [z]]          one line per node
    t <a> <b> <c>             one line per triangle, counter-clockwise
    hole <n0> <n1> ...        optional, one line per inner boundary loop
  1-cochain (text):
    c1 <surface-hash>
    e <u> <v> <value>         value on the edge u -> v
  trajectories (JSON lines, one per trajectory):
    {\"id\": \"<id>\", \"nodes\": [<n0>, <n1>, ...]}
    {\"id\": \"<id>\", \"points\": [[x, y], ...]}   snapped to the mesh
  basis (JSON): {\"eps\", \"seeds\", \"canonical\", \"period_matrix\", \"surface_hash\", \"forms\": [<1-cochain text>, ...]}
  config (TOML): eps, mu (\"auto\" or number), seed, out_dir, verbosity, threads
Lines starting with '#' and blank lines are ignored in text and JSON-lines inputs.

Exit codes: 0 success, 1 usage error, 2 data or validation error, 3 non-convergence.
Errors are printed to stderr as one JSON line: {\"error\": <kind>, \"message\": ..., \"path\": ...}.";

#[derive(Debug, Parser)]
#[command(name = "hodgetrack", version, about = "Harmonic 1-forms on sensor-network meshes and homology classes of trajectories", after_long_help = FORMATS)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML config file; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory relative output paths are written under
    #[arg(long, global = true, env = "HODGETRACK_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for sweeps (0 = all cores)
    #[arg(long, global = true, env = "HODGETRACK_THREADS")]
    pub threads: Option<usize>,
    /// Gossip stopping threshold
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Classification threshold: "auto" or a positive number
    #[arg(long, global = true)]
    pub mu: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate meshes and trajectories
    #[command(subcommand)]
    Gen(GenCommand),
    /// Split a 1-form into gradient, curl and harmonic parts by gossip
    #[command(after_long_help = FORMATS)]
    Decompose(DecomposeArgs),
    /// Harmonic basis construction
    #[command(subcommand)]
    Basis(BasisCommand),
    /// Bucket trajectories by homology class
    #[command(after_long_help = FORMATS)]
    Classify(ClassifyArgs),
    /// Independent checks against exact solvers and tree-cotree classes
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Experiment sweeps
    Sim(SimArgs),
    /// Generate, build a basis, classify and verify in one run
    #[command(after_long_help = PIPELINE_HELP)]
    Pipeline(PipelineArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Jittered grid with rectangular holes
    #[command(after_long_help = FORMATS)]
    Grid(GridArgs),
    /// Floor plan of rooms, doors and free-standing walls
    #[command(after_long_help = FORMATS)]
    Museum(MuseumArgs),
    /// Trajectories on an existing mesh
    #[command(after_long_help = FORMATS)]
    Trajs(TrajsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    Scattered,
    Row,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 500)]
    pub nodes: usize,
    #[arg(long, default_value_t = 3)]
    pub holes: usize,
    #[arg(long, value_enum, default_value_t = Layout::Scattered)]
    pub layout: Layout,
    /// Full domain spec (JSON: width, height, holes, jitter, target_nodes, seed); overrides the other shape flags
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value = "mesh.txt")]
    pub out: PathBuf,
    /// Also write the known hole count, anchors and loops as JSON
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MuseumArgs {
    /// Museum spec (JSON); defaults to 5 x 3 rooms with 5 free-standing walls
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, default_value = "mesh.txt")]
    pub out: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrajKind {
    Waypoints,
    Museum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WalkMode {
    Simple,
    NoBacktrack,
}

#[derive(Debug, Args)]
pub struct TrajsArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, value_enum, default_value_t = TrajKind::Waypoints)]
    pub kind: TrajKind,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Random stops per trajectory (waypoints kind)
    #[arg(long, default_value_t = 2)]
    pub waypoints: usize,
    #[arg(long)]
    pub source: Option<usize>,
    #[arg(long)]
    pub target: Option<usize>,
    /// Museum spec the mesh was generated from (museum kind)
    #[arg(long)]
    pub museum: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = WalkMode::Simple)]
    pub mode: WalkMode,
    #[arg(long, default_value = "trajectories.jsonl")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StopRuleArg {
    Global,
    PerNode,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    /// Input 1-cochain; a random form from --seed when absent
    #[arg(long)]
    pub form: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_rounds: usize,
    #[arg(long, default_value_t = 1.0)]
    pub damping: f64,
    #[arg(long, value_enum, default_value_t = StopRuleArg::Global)]
    pub stop_rule: StopRuleArg,
    /// Directory for h.txt, df.txt, dg.txt and report.json
    #[arg(long, default_value = "decompose")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum BasisCommand {
    /// Harmonic parts of random forms until the rank stops growing
    #[command(after_long_help = FORMATS)]
    Build(BasisBuildArgs),
}

#[derive(Debug, Args)]
pub struct BasisBuildArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    /// Keep the raw forms instead of normalizing hole-loop periods to the identity
    #[arg(long)]
    pub raw: bool,
    /// Rank-preserving candidates in a row needed to stop
    #[arg(long, default_value_t = 5)]
    pub confirmations: usize,
    /// Decide rank from local probe edges only
    #[arg(long)]
    pub local_only: bool,
    #[arg(long, default_value = "basis.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long)]
    pub trajs: PathBuf,
    /// Key buckets by rounded integral differences (canonical basis)
    #[arg(long)]
    pub quantize: bool,
    /// Directory for buckets.csv and buckets.json
    #[arg(long, default_value = "classify")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Compare a basis and trajectory classes with the exact oracles
    #[command(after_long_help = FORMATS)]
    Check(OracleCheckArgs),
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long)]
    pub trajs: Option<PathBuf>,
    #[arg(long, default_value = "oracle.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Spread over random initial forms on one domain
    Table1,
    /// Iterations over eps, node count and hole count
    Fig6,
    /// Residuals over the same grid
    Fig7,
    /// Pairwise classification against the oracle over a mu sweep
    Fig8,
}

#[derive(Debug, Args)]
#[command(after_long_help = SIM_HELP)]
pub struct SimArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// Experiment spec (JSON); built-in desk-scale defaults when absent
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Override seeds per cell
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Output directory; defaults to `out` in the spec file or the experiment name
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const SIM_HELP: &str = "\
Sweep spec (table1, fig6, fig7):
  {\"name\": \"...\", \"domains\": [<domain>, ...], \"eps\": [5e-3, ...],
   \"seeds\": 20, \"seed_base\": 0, \"max_rounds\": 1000000,
   \"metrics\": [\"iters_f\", \"iters_g\", \"err_dh\", \"err_dh_rms\", \"err_delta_h\",
               \"err_delta_h_rms\", \"messages_f\", \"messages_g\"]}
  <domain> = {\"kind\": \"scattered\" | \"holes-in-row\", \"holes\": k, \"nodes\": n, \"seed\": s}
           | {\"kind\": \"grid\", \"spec\": {...}} | {\"kind\": \"museum\", \"spec\": {...}}
           | {\"kind\": \"torus\", \"nx\": a, \"ny\": b}
Classification spec (fig8):
  {\"domain\": <domain>, \"patterns\": [[true, false, true], ...], \"per_class\": 5,
   \"eps\": 5e-6, \"canonical\": false, \"mu_range\": [1e-8, 10], \"steps_per_decade\": 10,
   \"reference_mu\": [1e-5, 1e-4]}
Outputs: <name>.csv (one stat row per cell and metric: n_h,n_v,eps,metric,n,excluded,min,max,avg,std,std_pct),
<name>.jsonl (raw per-seed logs), <name>_plot.csv (x,y,series). fig8 writes <name>.json, <name>_pairs.csv, <name>_plot.csv.";

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value = "pipeline")]
    pub out: PathBuf,
}

const PIPELINE_HELP: &str = "\
Pipeline spec (JSON):
  {\"name\": \"...\", \"domain\": <domain>, \"eps\": 1e-6, \"basis_seed\": 0, \"canonical\": true,
   \"trajectories\": <source>, \"mu\": \"auto\" | {\"fixed\": 0.5}, \"quantize\": false}
  <source> = {\"kind\": \"none\"}
           | {\"kind\": \"classed\", \"patterns\": [[true, false], ...], \"per_class\": 5, \"seed\": 0}
           | {\"kind\": \"museum\", \"n\": 200, \"seed\": 0, \"mode\": \"simple\" | \"no-backtrack\"}
           | {\"kind\": \"waypoints\", \"n\": 20, \"waypoints\": 2, \"seed\": 0, \"source\": a, \"target\": b}
           | {\"kind\": \"inline\", \"trajectories\": [{\"id\": ..., \"nodes\": [...]}, ...]}
Writes mesh.txt, basis.json, trajectories.jsonl, buckets.csv, buckets.json, pairs.csv,
mu_curve.csv and summary.json into the output directory.";
