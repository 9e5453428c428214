//! Seeded ensemble sweeps. Every replicate derives its own seed from the
//! base seed, results are collected in replicate order and aggregated
//! serially, so the output does not depend on the worker count.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tvsched::communicability::{dominance_from_profile, GlobalScale};
use tvsched::manipulation::{manipulation_samples, summarize_manipulation};
use tvsched::netgen::{log_uniform_random_config, replicate_seed};
use tvsched::scheduling::DEFAULT_BUDGET;
use tvsched::{
    chi_report, generate, profile, ClassLabel, Family, GeneratorConfig, ManipulationSweepConfig,
    ManipulationSweepRow, MetricKind, NetworkMatrix, WeightMode,
};

use crate::analysis::Conversion;
use crate::error::{CliError, CliResult};
use crate::report::csv_float;

/// Runs `job` on a pool with `workers` threads, or on the global pool.
pub fn with_workers<R: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> R + Send,
) -> CliResult<R> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| CliError::Pool(e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-network quantities shared by all ensemble sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkOutcome {
    pub n: usize,
    pub chi: f64,
    pub class_v: bool,
    pub chi_is_lower_bound: bool,
    /// Some node leads at both `k = 1` and `k = K-1` (ties count as shared).
    pub coincident_leader: bool,
    /// Dominance of the shared leader; meaningful when `coincident_leader`.
    pub dominance: f64,
}

/// Chi, class and leader statistics of one network.
pub fn evaluate_network(
    net: &NetworkMatrix<f64>,
    horizon: usize,
    kind: MetricKind,
    budget: u64,
) -> CliResult<NetworkOutcome> {
    let report =
        chi_report(net, horizon, kind, 1, budget).map_err(CliError::module("scheduling"))?;
    let (coincident_leader, dominance) = if net.n() >= 2 && horizon >= 2 {
        let p = profile(net, horizon).map_err(CliError::module("communicability"))?;
        let d = dominance_from_profile(&p, GlobalScale::FiniteHorizon)
            .map_err(CliError::module("communicability"))?;
        (!p.scale_heterogeneous(), d.dominance)
    } else {
        (true, 0.0)
    };
    Ok(NetworkOutcome {
        n: net.n(),
        chi: report.chi,
        class_v: report.class_label == ClassLabel::V,
        chi_is_lower_bound: report.chi_is_lower_bound,
        coincident_leader,
        dominance,
    })
}

/// Network families of the grid sweep; `param` of a grid cell maps to the
/// family parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `param` = edge probability.
    Er,
    /// `param` = attachment count (rounded).
    Ba,
    /// `param` = rewiring probability.
    Ws {
        k_ring: usize,
    },
    /// `param` = edge weight.
    Line,
    Ring,
    Star,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Er => "er",
            FamilyKind::Ba => "ba",
            FamilyKind::Ws { .. } => "ws",
            FamilyKind::Line => "line",
            FamilyKind::Ring => "ring",
            FamilyKind::Star => "star",
        }
    }

    pub fn config(&self, n: usize, param: f64) -> GeneratorConfig {
        let family = match *self {
            FamilyKind::Er => Family::ErdosRenyi { p: param },
            FamilyKind::Ba => Family::BarabasiAlbert {
                m_a: param.round() as usize,
            },
            FamilyKind::Ws { k_ring } => Family::WattsStrogatz {
                k_ring,
                beta: param,
            },
            FamilyKind::Line => Family::Line,
            FamilyKind::Ring => Family::Ring,
            FamilyKind::Star => Family::Star,
        };
        let mut cfg = GeneratorConfig::new(family, n);
        if matches!(self, FamilyKind::Line | FamilyKind::Ring | FamilyKind::Star) {
            cfg.edge_weight = param;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSweepConfig {
    pub family: FamilyKind,
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
    pub replicates: usize,
    pub horizon: usize,
    pub metric: MetricKind,
    pub conversion: Conversion,
    pub weight_mode: WeightMode,
    pub directed: bool,
    pub seed: u64,
    pub budget: u64,
}

impl GridSweepConfig {
    pub fn new(
        family: FamilyKind,
        sizes: Vec<usize>,
        params: Vec<f64>,
        replicates: usize,
        seed: u64,
    ) -> Self {
        Self {
            family,
            sizes,
            params,
            replicates,
            horizon: 10,
            metric: MetricKind::Trace,
            conversion: Conversion::Transmission,
            weight_mode: WeightMode::UniformRandom,
            directed: false,
            seed,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Aggregates of one (size, parameter) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub family: String,
    pub n: usize,
    pub param: f64,
    pub replicates: usize,
    pub mean_chi: f64,
    pub std_chi: f64,
    pub class_v_fraction: f64,
    pub coincident_count: usize,
    pub class_v_fraction_coincident: f64,
    pub mean_chi_coincident: f64,
    pub mean_dominance_coincident: f64,
    pub lower_bound_fraction: f64,
}

pub const GRID_HEADER: &str =
    "family,n,param,replicates,mean_chi,std_chi,class_v_fraction,coincident_count,\
class_v_fraction_coincident,mean_chi_coincident,mean_dominance_coincident,lower_bound_fraction";

fn fraction(count: usize, total: usize) -> f64 {
    if total == 0 {
        f64::NAN
    } else {
        count as f64 / total as f64
    }
}

fn grid_row(cfg: &GridSweepConfig, n: usize, param: f64, outcomes: &[NetworkOutcome]) -> GridRow {
    let chis: Vec<f64> = outcomes.iter().map(|o| o.chi).collect();
    let (mean_chi, std_chi) = mean_std(&chis);
    let coincident: Vec<&NetworkOutcome> =
        outcomes.iter().filter(|o| o.coincident_leader).collect();
    let co_chi: Vec<f64> = coincident.iter().map(|o| o.chi).collect();
    let co_dom: Vec<f64> = coincident.iter().map(|o| o.dominance).collect();
    GridRow {
        family: cfg.family.name().into(),
        n,
        param,
        replicates: outcomes.len(),
        mean_chi,
        std_chi,
        class_v_fraction: fraction(
            outcomes.iter().filter(|o| o.class_v).count(),
            outcomes.len(),
        ),
        coincident_count: coincident.len(),
        class_v_fraction_coincident: fraction(
            coincident.iter().filter(|o| o.class_v).count(),
            coincident.len(),
        ),
        mean_chi_coincident: mean_std(&co_chi).0,
        mean_dominance_coincident: mean_std(&co_dom).0,
        lower_bound_fraction: fraction(
            outcomes.iter().filter(|o| o.chi_is_lower_bound).count(),
            outcomes.len(),
        ),
    }
}

/// One row per (size, parameter) cell, sizes outermost. Cells are seeded by
/// their position in the grid, replicates by their index in the cell.
pub fn grid_sweep(cfg: &GridSweepConfig, workers: Option<usize>) -> CliResult<Vec<GridRow>> {
    if cfg.replicates == 0 {
        return Ok(Vec::new());
    }
    let cells: Vec<(usize, usize, f64)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| cfg.params.iter().map(move |&p| (n, p)))
        .enumerate()
        .map(|(i, (n, p))| (i, n, p))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.replicates).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<NetworkOutcome> = with_workers(workers, || {
        jobs.par_iter()
            .map(|&(c, r)| {
                let (cell, n, param) = cells[c];
                let mut gen = cfg.family.config(n, param);
                gen.weight_mode = cfg.weight_mode;
                gen.directed = cfg.directed;
                gen.seed = replicate_seed(replicate_seed(cfg.seed, cell as u64), r as u64);
                let raw = generate::<f64>(&gen).map_err(CliError::module("netgen"))?;
                let net = cfg.conversion.apply(&raw)?;
                evaluate_network(&net, cfg.horizon, cfg.metric, cfg.budget)
            })
            .collect::<CliResult<Vec<_>>>()
    })??;
    Ok(cells
        .iter()
        .enumerate()
        .map(|(c, &(_, n, p))| {
            grid_row(
                cfg,
                n,
                p,
                &outcomes[c * cfg.replicates..(c + 1) * cfg.replicates],
            )
        })
        .collect())
}

pub fn grid_csv(rows: &[GridRow]) -> String {
    let mut out = format!("{GRID_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.family,
            r.n,
            csv_float(r.param),
            r.replicates,
            csv_float(r.mean_chi),
            csv_float(r.std_chi),
            csv_float(r.class_v_fraction),
            r.coincident_count,
            csv_float(r.class_v_fraction_coincident),
            csv_float(r.mean_chi_coincident),
            csv_float(r.mean_dominance_coincident),
            csv_float(r.lower_bound_fraction),
        )
        .expect("writing to a string");
    }
    out
}

/// Random directed networks with log-uniform size, uniform edge density and
/// uniform weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub count: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub horizon: usize,
    pub conversion: Conversion,
    pub seed: u64,
}

impl EnsembleConfig {
    /// Reduced recipe: 1000 networks with 10 to 100 nodes.
    pub fn reduced(seed: u64) -> Self {
        Self {
            count: 1000,
            n_min: 10,
            n_max: 100,
            horizon: 10,
            conversion: Conversion::Transmission,
            seed,
        }
    }

    /// Full recipe: 10^4 networks with 10 to 1000 nodes.
    pub fn full(seed: u64) -> Self {
        Self {
            count: 10_000,
            n_max: 1000,
            ..Self::reduced(seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSample {
    pub index: usize,
    pub density: f64,
    #[serde(flatten)]
    pub outcome: NetworkOutcome,
}

pub const ENSEMBLE_HEADER: &str = "index,n,density,chi,class_v,coincident_leader,dominance";

/// Trace-metric outcomes of every network in the ensemble, in index order.
pub fn random_ensemble(
    cfg: &EnsembleConfig,
    workers: Option<usize>,
) -> CliResult<Vec<EnsembleSample>> {
    with_workers(workers, || {
        (0..cfg.count)
            .into_par_iter()
            .map(|index| {
                let gen = log_uniform_random_config(
                    cfg.n_min,
                    cfg.n_max,
                    replicate_seed(cfg.seed, index as u64),
                );
                let density = match gen.family {
                    Family::ErdosRenyi { p } => p,
                    _ => unreachable!("ensemble networks are Erdos-Renyi"),
                };
                let raw = generate::<f64>(&gen).map_err(CliError::module("netgen"))?;
                let net = cfg.conversion.apply(&raw)?;
                let outcome =
                    evaluate_network(&net, cfg.horizon, MetricKind::Trace, DEFAULT_BUDGET)?;
                Ok(EnsembleSample {
                    index,
                    density,
                    outcome,
                })
            })
            .collect()
    })?
}

pub fn ensemble_csv(samples: &[EnsembleSample]) -> String {
    let mut out = format!("{ENSEMBLE_HEADER}\n");
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.index,
            s.outcome.n,
            csv_float(s.density),
            csv_float(s.outcome.chi),
            s.outcome.class_v as u8,
            s.outcome.coincident_leader as u8,
            csv_float(s.outcome.dominance),
        )
        .expect("writing to a string");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceBin {
    pub dominance_min: f64,
    pub dominance_max: f64,
    pub count: usize,
    pub mean_chi: f64,
    pub std_chi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub count: usize,
    pub class_v_fraction: f64,
    pub coincident_count: usize,
    pub class_v_fraction_coincident: f64,
    pub mean_chi_coincident: f64,
    /// Coincident-leader networks split into equal-count bins of increasing
    /// dominance.
    pub dominance_bins: Vec<DominanceBin>,
}

pub fn summarize_ensemble(samples: &[EnsembleSample], bins: usize) -> EnsembleSummary {
    let outcomes: Vec<&NetworkOutcome> = samples.iter().map(|s| &s.outcome).collect();
    let mut coincident: Vec<&NetworkOutcome> = outcomes
        .iter()
        .copied()
        .filter(|o| o.coincident_leader)
        .collect();
    coincident.sort_by(|a, b| a.dominance.total_cmp(&b.dominance));
    let co_chi: Vec<f64> = coincident.iter().map(|o| o.chi).collect();
    let dominance_bins = (0..bins)
        .filter_map(|b| {
            let lo = b * coincident.len() / bins;
            let hi = (b + 1) * coincident.len() / bins;
            let part = &coincident[lo..hi];
            let chis: Vec<f64> = part.iter().map(|o| o.chi).collect();
            let (mean_chi, std_chi) = mean_std(&chis);
            Some(DominanceBin {
                dominance_min: part.first()?.dominance,
                dominance_max: part.last()?.dominance,
                count: part.len(),
                mean_chi,
                std_chi,
            })
        })
        .collect();
    EnsembleSummary {
        count: outcomes.len(),
        class_v_fraction: fraction(
            outcomes.iter().filter(|o| o.class_v).count(),
            outcomes.len(),
        ),
        coincident_count: coincident.len(),
        class_v_fraction_coincident: fraction(
            coincident.iter().filter(|o| o.class_v).count(),
            coincident.len(),
        ),
        mean_chi_coincident: mean_std(&co_chi).0,
        dominance_bins,
    }
}

pub const MANIPULATION_HEADER: &str =
    "fraction,mean_norm,std_norm,mean_ratio,std_ratio,success_rate";

pub fn manipulation_table(
    cfg: &ManipulationSweepConfig,
    workers: Option<usize>,
) -> CliResult<Vec<ManipulationSweepRow>> {
    let samples = with_workers(workers, || manipulation_samples(cfg))?
        .map_err(CliError::module("manipulation"))?;
    Ok(summarize_manipulation(cfg, &samples))
}

pub fn manipulation_csv(rows: &[ManipulationSweepRow]) -> String {
    let mut out = format!("{MANIPULATION_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_float(r.fraction),
            csv_float(r.mean_norm),
            csv_float(r.std_norm),
            csv_float(r.mean_ratio),
            csv_float(r.std_ratio),
            csv_float(r.success_rate),
        )
        .expect("writing to a string");
    }
    out
}
