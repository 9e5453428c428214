//! Command-line definitions and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tvsched::scheduling::DEFAULT_BUDGET;
use tvsched::{
    chi_vs_horizon, generate, DirectionTemplates, Family, GeneratorConfig, ManipulationSweepConfig,
    MetricKind, WeightMode,
};

use crate::analysis::{
    run_analysis, Analyses, AnalysisRun, Conversion, InputSource, ManipulationRequest,
    ScheduleRequest, SolverChoice,
};
use crate::edgelist::{format_edge_list, EdgeListOptions, IndexBase};
use crate::error::{CliError, CliResult};
use crate::report::{csv_float, render_json, to_value, Provenance};
use crate::sweep::{
    ensemble_csv, grid_csv, grid_sweep, manipulation_csv, manipulation_table, random_ensemble,
    summarize_ensemble, with_workers, EnsembleConfig, FamilyKind, GridSweepConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "tvsched",
    version,
    about = "Time-varying control scheduling on network dynamics"
)]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Write the result to this file instead of standard output.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a raw connectivity edge list.
    Generate(GenerateArgs),
    /// Convert raw connectivity to a dynamics matrix, written as an edge list.
    Convert(ConvertArgs),
    /// Communicability profile, argmax sequence and dominance.
    Communicability(CommunicabilityArgs),
    /// Optimal time-varying and time-invariant schedules.
    Schedule(ScheduleArgs),
    /// Relative advantage of time-varying over time-invariant scheduling.
    Chi(ChiArgs),
    /// Chi as a function of the horizon, as CSV.
    ChiSweep(ChiSweepArgs),
    /// Smallest manifest-block manipulation making the optimal schedule
    /// use manifest nodes only.
    Manipulate(ManipulateArgs),
    /// Ensemble sweeps, as CSV.
    #[command(subcommand)]
    Sweep(SweepCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Line,
    Ring,
    Star,
    Er,
    Ba,
    Ws,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    Unit,
    Uniform,
}

impl From<WeightArg> for WeightMode {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::Unit => WeightMode::Unit,
            WeightArg::Uniform => WeightMode::UniformRandom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Transmission,
    Induction,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Trace,
    Trinv,
    Det,
    Mineig,
}

impl From<MetricArg> for MetricKind {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Trace => MetricKind::Trace,
            MetricArg::Trinv => MetricKind::TraceInverseInverse,
            MetricArg::Det => MetricKind::Determinant,
            MetricArg::Mineig => MetricKind::MinEigenvalue,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Auto,
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    /// Network family to generate instead of reading a file.
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Node count of the generated network.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Edge probability (er).
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    /// Links per new node (ba).
    #[arg(long = "m-a", default_value_t = 2)]
    pub m_a: usize,
    /// Ring neighbours, even (ws).
    #[arg(long = "k-ring", default_value_t = 4)]
    pub k_ring: usize,
    /// Rewiring probability (ws).
    #[arg(long, default_value_t = 0.2)]
    pub beta: f64,
    /// Edge weight of unit-weight networks.
    #[arg(long = "edge-weight", default_value_t = 1.0)]
    pub edge_weight: f64,
    #[arg(long, value_enum, default_value_t = WeightArg::Unit)]
    pub weights: WeightArg,
    /// Directed generation (er only).
    #[arg(long)]
    pub directed: bool,
}

impl GeneratorArgs {
    fn config(&self, family: FamilyArg, seed: u64) -> GeneratorConfig {
        let family = match family {
            FamilyArg::Line => Family::Line,
            FamilyArg::Ring => Family::Ring,
            FamilyArg::Star => Family::Star,
            FamilyArg::Er => Family::ErdosRenyi { p: self.p },
            FamilyArg::Ba => Family::BarabasiAlbert { m_a: self.m_a },
            FamilyArg::Ws => Family::WattsStrogatz {
                k_ring: self.k_ring,
                beta: self.beta,
            },
        };
        GeneratorConfig {
            family,
            n: self.n,
            edge_weight: self.edge_weight,
            weight_mode: self.weights.into(),
            directed: self.directed,
            seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Edge-list file with `src dst [weight]` lines.
    pub input: Option<PathBuf>,
    /// Treat every edge as undirected.
    #[arg(long)]
    pub undirected: bool,
    /// Node ids in files start at 1.
    #[arg(long = "one-based")]
    pub one_based: bool,
    /// Node count, for files whose largest id is below it.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

impl InputArgs {
    fn base(&self) -> IndexBase {
        if self.one_based {
            IndexBase::One
        } else {
            IndexBase::Zero
        }
    }

    fn source(&self, seed: u64) -> CliResult<InputSource> {
        match (&self.input, self.generator.family) {
            (Some(_), Some(_)) => Err(CliError::Usage(
                "give either an input file or --family, not both".into(),
            )),
            (None, None) => Err(CliError::Usage(
                "an input file or --family is required".into(),
            )),
            (None, Some(family)) => Ok(InputSource::Generator {
                config: self.generator.config(family, seed),
            }),
            (Some(path), None) => Ok(InputSource::EdgeList {
                path: path.clone(),
                options: EdgeListOptions {
                    directed: !self.undirected,
                    base: self.base(),
                    nodes: self.nodes,
                },
            }),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ConversionArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Transmission)]
    pub method: MethodArg,
    /// Sampling interval of the induction method.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Leak rate of the induction method.
    #[arg(long, default_value_t = 1.0)]
    pub leak: f64,
}

impl ConversionArgs {
    fn conversion(&self) -> Conversion {
        match self.method {
            MethodArg::Transmission => Conversion::Transmission,
            MethodArg::Induction => Conversion::Induction {
                tau: self.tau,
                leak: self.leak,
            },
            MethodArg::None => Conversion::None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write one-based node ids.
    #[arg(long = "one-based")]
    pub one_based: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub conversion: ConversionArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct CommunicabilityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub conversion: ConversionArgs,
    /// Horizon K.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit the profile as CSV (one row per node) instead of a JSON report.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub conversion: ConversionArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Trace)]
    pub metric: MetricArg,
    /// Inputs per step.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    pub solver: SolverArg,
    /// Schedule budget of the exhaustive solver.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Comma-separated final state for minimum-energy steering.
    #[arg(long, value_delimiter = ',')]
    pub target: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ChiArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub conversion: ConversionArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Metrics to evaluate (repeatable; default: all four).
    #[arg(long, value_enum)]
    pub metric: Vec<MetricArg>,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ChiSweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub conversion: ConversionArgs,
    /// Largest horizon.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Trace)]
    pub metric: MetricArg,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ManipulateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub conversion: ConversionArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Comma-separated zero-based manifest nodes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub manifest: Vec<usize>,
    /// Random search directions.
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
    /// Largest manipulation, relative to the 2-norm of the dynamics matrix.
    #[arg(long = "norm-cap", default_value_t = 1.0)]
    pub norm_cap: f64,
    /// Only try acyclic manipulation patterns.
    #[arg(long = "acyclic-only")]
    pub acyclic_only: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum SweepCommand {
    /// Family x size x parameter grid with replicates per cell.
    Grid(GridArgs),
    /// Random directed networks of log-uniform size; one row per network.
    Random(RandomArgs),
    /// Manipulation size and advantage versus manifest fraction.
    Manipulation(ManipulationArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Family parameter values: p (er), m_a (ba), beta (ws), edge weight
    /// (line, ring, star).
    #[arg(long, value_delimiter = ',', required = true)]
    pub params: Vec<f64>,
    #[arg(long = "k-ring", default_value_t = 4)]
    pub k_ring: usize,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Trace)]
    pub metric: MetricArg,
    #[command(flatten)]
    pub conversion: ConversionArgs,
    #[arg(long, value_enum, default_value_t = WeightArg::Uniform)]
    pub weights: WeightArg,
    /// Directed generation (er only).
    #[arg(long)]
    pub directed: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Clone, Args)]
pub struct RandomArgs {
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long = "n-min", default_value_t = 10)]
    pub n_min: usize,
    #[arg(long = "n-max", default_value_t = 100)]
    pub n_max: usize,
    /// 10^4 networks with up to 1000 nodes.
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[command(flatten)]
    pub conversion: ConversionArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit a JSON summary with this many dominance bins instead of CSV.
    #[arg(long)]
    pub summary: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ManipulationArgs {
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.1, 0.2, 0.5, 0.9])]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
    #[arg(long = "norm-cap", default_value_t = 1.0)]
    pub norm_cap: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn analysis_run(
    input: &InputArgs,
    conversion: &ConversionArgs,
    seed: u64,
    horizon: usize,
) -> CliResult<AnalysisRun> {
    let mut run = AnalysisRun::new(input.source(seed)?);
    run.conversion = conversion.conversion();
    run.horizon = horizon;
    run.seed = seed;
    Ok(run)
}

fn profile_csv(run: &AnalysisRun) -> CliResult<String> {
    let raw = run.input.load()?;
    let net = run.conversion.apply(&raw)?;
    let p = tvsched::profile(&net, run.horizon).map_err(CliError::module("communicability"))?;
    let mut header = vec!["node".to_string()];
    header.extend((0..p.horizon()).map(|k| format!("r_{k}")));
    header.push("r_inf".into());
    let mut out = header.join(",") + "\n";
    for i in 0..p.n() {
        let mut row = vec![i.to_string()];
        row.extend((0..p.horizon()).map(|k| csv_float(p.r_values[(i, k)])));
        row.push(csv_float(p.r_inf.values[i]));
        out += &(row.join(",") + "\n");
    }
    Ok(out)
}

/// Runs a parsed command line and returns the text to emit.
pub fn execute(cli: &Cli) -> CliResult<String> {
    with_workers(cli.workers, || dispatch(&cli.command))?
}

fn dispatch(command: &Command) -> CliResult<String> {
    match command {
        Command::Generate(args) => {
            let family = args
                .generator
                .family
                .ok_or_else(|| CliError::Usage("generate needs --family".into()))?;
            let cfg = args.generator.config(family, args.seed);
            let raw = generate::<f64>(&cfg).map_err(CliError::module("netgen"))?;
            let base = if args.one_based {
                IndexBase::One
            } else {
                IndexBase::Zero
            };
            Ok(format_edge_list(&raw.c, raw.directed, base))
        }
        Command::Convert(args) => {
            let run = analysis_run(&args.input, &args.conversion, args.seed, 1)?;
            let net = run.conversion.apply(&run.input.load()?)?;
            let header = format!(
                "# dynamics matrix, {}\n",
                serde_json::to_string(&run.conversion)?
            );
            Ok(header + &format_edge_list(net.matrix(), true, args.input.base()))
        }
        Command::Communicability(args) => {
            let mut run = analysis_run(&args.input, &args.conversion, args.seed, args.k)?;
            if args.csv {
                return profile_csv(&run);
            }
            run.analyses = Analyses {
                communicability: true,
                ..Analyses::default()
            };
            render_json(run_analysis(&run)?)
        }
        Command::Schedule(args) => {
            let mut run = analysis_run(&args.input, &args.conversion, args.seed, args.k)?;
            run.metrics = vec![args.metric.into()];
            run.inputs_per_step = args.m;
            run.budget = args.budget;
            let solver = match args.solver {
                SolverArg::Auto => SolverChoice::Auto,
                SolverArg::Exhaustive => SolverChoice::Exhaustive,
                SolverArg::Greedy => SolverChoice::Greedy,
            };
            run.analyses.schedule = Some(ScheduleRequest {
                solver,
                target: args.target.clone(),
            });
            render_json(run_analysis(&run)?)
        }
        Command::Chi(args) => {
            let mut run = analysis_run(&args.input, &args.conversion, args.seed, args.k)?;
            run.metrics = if args.metric.is_empty() {
                MetricKind::ALL.to_vec()
            } else {
                args.metric.iter().map(|m| (*m).into()).collect()
            };
            run.inputs_per_step = args.m;
            run.budget = args.budget;
            run.analyses.chi = true;
            render_json(run_analysis(&run)?)
        }
        Command::ChiSweep(args) => {
            let run = analysis_run(&args.input, &args.conversion, args.seed, args.k)?;
            let net = run.conversion.apply(&run.input.load()?)?;
            let sweep = chi_vs_horizon(&net, args.k, args.metric.into(), args.budget)
                .map_err(CliError::module("scheduling"))?;
            let mut out = String::from("horizon,chi\n");
            for p in &sweep.points {
                out += &format!(
                    "{},{}\n",
                    p.horizon,
                    p.chi.map(csv_float).unwrap_or_else(|| "NaN".into())
                );
            }
            Ok(out)
        }
        Command::Manipulate(args) => {
            let mut run = analysis_run(&args.input, &args.conversion, args.seed, args.k)?;
            run.analyses.manipulation = Some(ManipulationRequest {
                manifest: args.manifest.clone(),
                trials: args.trials,
                norm_cap: args.norm_cap,
                templates: if args.acyclic_only {
                    DirectionTemplates::AcyclicOnly
                } else {
                    DirectionTemplates::Mixed
                },
            });
            render_json(run_analysis(&run)?)
        }
        Command::Sweep(SweepCommand::Grid(args)) => {
            let family = match args.family {
                FamilyArg::Er => FamilyKind::Er,
                FamilyArg::Ba => FamilyKind::Ba,
                FamilyArg::Ws => FamilyKind::Ws {
                    k_ring: args.k_ring,
                },
                FamilyArg::Line => FamilyKind::Line,
                FamilyArg::Ring => FamilyKind::Ring,
                FamilyArg::Star => FamilyKind::Star,
            };
            let mut cfg = GridSweepConfig::new(
                family,
                args.sizes.clone(),
                args.params.clone(),
                args.replicates,
                args.seed,
            );
            cfg.horizon = args.k;
            cfg.metric = args.metric.into();
            cfg.conversion = args.conversion.conversion();
            cfg.weight_mode = args.weights.into();
            cfg.directed = args.directed;
            cfg.budget = args.budget;
            Ok(grid_csv(&grid_sweep(&cfg, None)?))
        }
        Command::Sweep(SweepCommand::Random(args)) => {
            let mut cfg = if args.full {
                EnsembleConfig::full(args.seed)
            } else {
                EnsembleConfig {
                    count: args.count,
                    n_min: args.n_min,
                    n_max: args.n_max,
                    ..EnsembleConfig::reduced(args.seed)
                }
            };
            cfg.horizon = args.k;
            cfg.conversion = args.conversion.conversion();
            let samples = random_ensemble(&cfg, None)?;
            match args.summary {
                Some(bins) => render_json(json!({
                    "config": to_value(&cfg)?,
                    "provenance": to_value(&Provenance::current())?,
                    "summary": to_value(&summarize_ensemble(&samples, bins))?,
                })),
                None => Ok(ensemble_csv(&samples)),
            }
        }
        Command::Sweep(SweepCommand::Manipulation(args)) => {
            let mut cfg = ManipulationSweepConfig::new(
                args.n,
                args.fractions.clone(),
                args.replicates,
                args.k,
                args.seed,
            );
            cfg.trials = args.trials;
            cfg.norm_cap = args.norm_cap;
            Ok(manipulation_csv(&manipulation_table(&cfg, None)?))
        }
    }
}

/// Writes `text` to `path`, or to standard output.
pub fn emit(text: &str, path: Option<&std::path::Path>) -> CliResult<()> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}
