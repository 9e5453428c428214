//! Single-network analysis runs: input, conversion to dynamics, requested
//! analyses and a self-describing JSON report.

use std::path::PathBuf;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use tvsched::communicability::{dominance_from_profile, GlobalScale};
use tvsched::linalg::spectral_radius;
use tvsched::scheduling::DEFAULT_BUDGET;
use tvsched::{
    chi_report, exhaustive_schedule, find_min_manipulation, generate, gramian, greedy_schedule,
    induction, metric, min_energy_control, profile, tics_trace, transmission, tvcs_trace,
    DirectionTemplates, GeneratorConfig, ManifestProblem, MetricKind, NetworkMatrix,
    RawConnectivity, ScheduleSolution,
};

use crate::edgelist::{load_edge_list, EdgeListOptions};
use crate::error::{CliError, CliResult};
use crate::report::{to_value, Provenance};

/// Where the raw connectivity comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSource {
    EdgeList {
        path: PathBuf,
        options: EdgeListOptions,
    },
    Generator {
        config: GeneratorConfig,
    },
}

impl InputSource {
    pub fn load(&self) -> CliResult<RawConnectivity<f64>> {
        match self {
            InputSource::EdgeList { path, options } => Ok(load_edge_list(path, *options)?),
            InputSource::Generator { config } => {
                generate(config).map_err(CliError::module("netgen"))
            }
        }
    }
}

/// Conversion from raw connectivity to the dynamics matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Conversion {
    Transmission,
    Induction { tau: f64, leak: f64 },
    None,
}

impl Conversion {
    pub fn apply(&self, raw: &RawConnectivity<f64>) -> CliResult<NetworkMatrix<f64>> {
        match *self {
            Conversion::Transmission => Ok(transmission(raw)),
            Conversion::Induction { tau, leak } => {
                induction(raw, tau, leak).map_err(CliError::module("netgen"))
            }
            Conversion::None => Ok(raw.as_network()),
        }
    }
}

/// Schedule solver selection for the schedule analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    /// Closed form for trace, otherwise the same choice as the chi analysis.
    #[default]
    Auto,
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRequest {
    pub solver: SolverChoice,
    /// Final state for a minimum-energy steering computation.
    pub target: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulationRequest {
    pub manifest: Vec<usize>,
    pub trials: usize,
    pub norm_cap: f64,
    pub templates: DirectionTemplates,
}

/// Which analyses a run performs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Analyses {
    pub chi: bool,
    pub communicability: bool,
    pub schedule: Option<ScheduleRequest>,
    pub manipulation: Option<ManipulationRequest>,
}

/// Full description of one analysis run; echoed verbatim in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRun {
    pub input: InputSource,
    pub conversion: Conversion,
    pub horizon: usize,
    pub metrics: Vec<MetricKind>,
    pub inputs_per_step: usize,
    pub seed: u64,
    pub budget: u64,
    pub analyses: Analyses,
}

impl AnalysisRun {
    pub fn new(input: InputSource) -> Self {
        Self {
            input,
            conversion: Conversion::Transmission,
            horizon: 10,
            metrics: vec![MetricKind::Trace],
            inputs_per_step: 1,
            seed: 0,
            budget: DEFAULT_BUDGET,
            analyses: Analyses::default(),
        }
    }
}

fn network_summary(raw: &RawConnectivity<f64>, net: &NetworkMatrix<f64>) -> CliResult<Value> {
    let rho = spectral_radius(net.matrix()).map_err(CliError::module("linalg"))?;
    Ok(json!({
        "nodes": net.n(),
        "raw_edges": raw.edge_count(),
        "directed": raw.directed,
        "nonzero_entries": net.matrix().iter().filter(|v| **v != 0.0).count(),
        "spectral_radius": rho,
        "nonnegative": net.is_nonnegative(),
    }))
}

fn communicability_section(net: &NetworkMatrix<f64>, horizon: usize) -> CliResult<Value> {
    let p = profile(net, horizon).map_err(CliError::module("communicability"))?;
    let r_values: Vec<Vec<f64>> = (0..p.horizon()).map(|k| p.at_scale(k)).collect();
    let mut section = Map::new();
    section.insert("r_values_by_scale".into(), to_value(&r_values)?);
    section.insert("argmax_sequence".into(), to_value(&p.argmax_seq)?);
    section.insert("r_infinity".into(), to_value(&p.r_inf.values.as_slice())?);
    section.insert("r_infinity_fallback".into(), Value::Bool(p.r_inf.fallback));
    section.insert(
        "asymptotic_leader".into(),
        to_value(&p.asymptotic_leader())?,
    );
    section.insert("spectral_radius".into(), to_value(&p.spectral_radius)?);
    section.insert(
        "scale_heterogeneous".into(),
        Value::Bool(p.scale_heterogeneous()),
    );
    if p.n() >= 2 && p.horizon() >= 2 {
        for (key, scale) in [
            ("dominance", GlobalScale::FiniteHorizon),
            ("dominance_asymptotic", GlobalScale::Asymptotic),
        ] {
            let d =
                dominance_from_profile(&p, scale).map_err(CliError::module("communicability"))?;
            section.insert(key.into(), to_value(&d)?);
        }
    }
    Ok(Value::Object(section))
}

fn solve(
    net: &NetworkMatrix<f64>,
    run: &AnalysisRun,
    kind: MetricKind,
    solver: SolverChoice,
    constant: bool,
) -> CliResult<ScheduleSolution<f64>> {
    let (k, m) = (run.horizon, run.inputs_per_step);
    let result = match (solver, kind) {
        (SolverChoice::Auto, MetricKind::Trace) => {
            if constant {
                tics_trace(net, k, m)
            } else {
                tvcs_trace(net, k, m)
            }
        }
        (SolverChoice::Auto, _) => {
            let report =
                chi_report(net, k, kind, m, run.budget).map_err(CliError::module("scheduling"))?;
            return Ok(if constant {
                ScheduleSolution {
                    schedule: report.schedule_ti,
                    value: report.f_ti,
                }
            } else {
                ScheduleSolution {
                    schedule: report.schedule_tv,
                    value: report.f_tv,
                }
            });
        }
        (SolverChoice::Exhaustive, _) => {
            if m != 1 {
                return Err(CliError::Usage(
                    "the exhaustive solver supports one input per step".into(),
                ));
            }
            exhaustive_schedule(net, k, kind, constant, run.budget)
        }
        (SolverChoice::Greedy, _) if constant => {
            return Err(CliError::Usage(
                "the greedy solver only builds time-varying schedules".into(),
            ))
        }
        (SolverChoice::Greedy, _) => greedy_schedule(net, k, kind, m),
    };
    result.map_err(CliError::module("scheduling"))
}

fn schedule_entry(net: &NetworkMatrix<f64>, solution: &ScheduleSolution<f64>) -> CliResult<Value> {
    let w = gramian(net, &solution.schedule).map_err(CliError::module("gramian"))?;
    let metrics: Map<String, Value> = MetricKind::ALL
        .iter()
        .map(|k| Ok((k.short_name().to_string(), to_value(&metric(&w, *k))?)))
        .collect::<CliResult<_>>()?;
    Ok(json!({
        "schedule": solution.schedule.steps(),
        "value": solution.value,
        "gramian_metrics": metrics,
    }))
}

fn schedule_section(
    net: &NetworkMatrix<f64>,
    run: &AnalysisRun,
    request: &ScheduleRequest,
) -> CliResult<Value> {
    let mut section = Map::new();
    for &kind in &run.metrics {
        let tv = solve(net, run, kind, request.solver, false)?;
        let mut entry = Map::new();
        entry.insert("time_varying".into(), schedule_entry(net, &tv)?);
        if request.solver != SolverChoice::Greedy {
            let ti = solve(net, run, kind, request.solver, true)?;
            entry.insert("time_invariant".into(), schedule_entry(net, &ti)?);
        }
        if let Some(target) = &request.target {
            if target.len() != net.n() {
                return Err(CliError::Module {
                    module: "gramian",
                    source: tvsched::Error::Dimension(format!(
                        "target has {} entries for {} nodes",
                        target.len(),
                        net.n()
                    )),
                });
            }
            let x_f = DVector::from_column_slice(target);
            let control =
                min_energy_control(net, &tv.schedule, &x_f).map_err(CliError::module("gramian"))?;
            let inputs: Vec<Vec<f64>> = control
                .inputs
                .iter()
                .map(|u| u.iter().copied().collect())
                .collect();
            entry.insert(
                "steering".into(),
                json!({ "inputs": inputs, "energy": control.energy, "condition": control.condition }),
            );
        }
        section.insert(kind.short_name().into(), Value::Object(entry));
    }
    Ok(Value::Object(section))
}

fn manipulation_section(
    net: &NetworkMatrix<f64>,
    run: &AnalysisRun,
    request: &ManipulationRequest,
) -> CliResult<Value> {
    let problem = ManifestProblem::new(net.clone(), &request.manifest, run.horizon)
        .map_err(CliError::module("manipulation"))?
        .with_trials(request.trials)
        .with_norm_cap(request.norm_cap)
        .with_templates(request.templates);
    let result =
        find_min_manipulation(&problem, run.seed).map_err(CliError::module("manipulation"))?;
    let mut value = to_value(&result)?;
    let delta: Vec<Value> = (0..net.n())
        .flat_map(|i| (0..net.n()).map(move |j| (i, j)))
        .filter(|&(i, j)| result.delta[(i, j)] != 0.0)
        .map(|(i, j)| json!({ "src": j, "dst": i, "value": result.delta[(i, j)] }))
        .collect();
    value
        .as_object_mut()
        .expect("manipulation result serializes as an object")
        .insert("delta_entries".into(), Value::Array(delta));
    Ok(value)
}

/// Executes `run` and returns the report, including the run itself and the
/// provenance block.
pub fn run_analysis(run: &AnalysisRun) -> CliResult<Value> {
    let raw = run.input.load()?;
    let net = run.conversion.apply(&raw)?;
    let mut report = Map::new();
    report.insert("config".into(), to_value(run)?);
    report.insert("provenance".into(), to_value(&Provenance::current())?);
    report.insert("network".into(), network_summary(&raw, &net)?);
    if run.analyses.chi {
        let mut chi = Map::new();
        for &kind in &run.metrics {
            let r = chi_report(&net, run.horizon, kind, run.inputs_per_step, run.budget)
                .map_err(CliError::module("scheduling"))?;
            chi.insert(kind.short_name().into(), to_value(&r)?);
        }
        report.insert("chi".into(), Value::Object(chi));
    }
    if run.analyses.communicability {
        report.insert(
            "communicability".into(),
            communicability_section(&net, run.horizon)?,
        );
    }
    if let Some(request) = &run.analyses.schedule {
        report.insert("schedule".into(), schedule_section(&net, run, request)?);
    }
    if let Some(request) = &run.analyses.manipulation {
        report.insert(
            "manipulation".into(),
            manipulation_section(&net, run, request)?,
        );
    }
    Ok(Value::Object(report))
}
