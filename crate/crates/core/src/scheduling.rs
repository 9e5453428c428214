//! Optimal time-invariant (TICS) and time-varying (TVCS) control schedules
//! and the relative advantage `chi = (f_tv - f_ti) / f_ti`.
//!
//! Under the trace metric both problems separate: `tr(W_K)` is the sum over
//! `k` of the diagonal entries of `(A^k)^T A^k` picked by the node actuated
//! at step `K-1-k`, so TVCS takes the largest entry per `k` and TICS the
//! largest entry of the sum. Other metrics need search.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::communicability::top_m;
use crate::error::{Error, Result};
use crate::gramian::{gramian_with_cache, metric_of_matrix, MetricKind};
use crate::linalg::symmetric_eigen;
use crate::network::{ControlSchedule, NetworkMatrix, PowerCache};
use crate::scalar::Scalar;

/// Relative advantage above which a network is labelled class V.
pub const CHI_EPSILON: f64 = 1e-9;
/// Default cap on Gramian evaluations for exhaustive search.
pub const DEFAULT_BUDGET: u64 = 2_000_000;
/// Greedy regulariser relative to `tr(sum_k A^k (A^k)^T) / n`.
pub const GREEDY_REGULARIZATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    ClosedFormTrace,
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassLabel {
    /// Benefits from time-varying scheduling (`chi > 0`).
    V,
    /// No benefit (`chi = 0`).
    I,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleSolution<T: Scalar> {
    pub schedule: ControlSchedule,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiReport<T: Scalar> {
    pub metric: MetricKind,
    pub horizon: usize,
    pub inputs_per_step: usize,
    pub f_ti: T,
    pub f_tv: T,
    pub chi: T,
    pub schedule_ti: ControlSchedule,
    pub schedule_tv: ControlSchedule,
    pub class_label: ClassLabel,
    pub solver_ti: Solver,
    pub solver_tv: Solver,
    /// Set when the time-varying optimum comes from the greedy solver, so
    /// `chi` is only a lower bound.
    pub chi_is_lower_bound: bool,
}

fn check_dims(n: usize, horizon: usize, m: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "inputs per step must be in 1..={n}, got {m}"
        )));
    }
    Ok(())
}

/// Optimal time-varying schedule under the trace metric.
pub fn tvcs_trace<T: Scalar>(
    net: &NetworkMatrix<T>,
    horizon: usize,
    m: usize,
) -> Result<ScheduleSolution<T>> {
    check_dims(net.n(), horizon, m)?;
    let cache = PowerCache::with_max_power(net, horizon - 1);
    tvcs_trace_with_cache(&cache, horizon, m)
}

pub fn tvcs_trace_with_cache<T: Scalar>(
    cache: &PowerCache<T>,
    horizon: usize,
    m: usize,
) -> Result<ScheduleSolution<T>> {
    check_dims(cache.n(), horizon, m)?;
    let mut steps = vec![Vec::new(); horizon];
    let mut value = T::zero();
    for k in 0..horizon {
        let r = cache.column_norms_sq(k);
        let chosen = top_m(&r, m);
        value += chosen.iter().fold(T::zero(), |s, &i| s + r[i]);
        steps[horizon - 1 - k] = chosen;
    }
    Ok(ScheduleSolution {
        schedule: ControlSchedule::new(steps)?,
        value,
    })
}

/// Optimal time-invariant schedule under the trace metric.
pub fn tics_trace<T: Scalar>(
    net: &NetworkMatrix<T>,
    horizon: usize,
    m: usize,
) -> Result<ScheduleSolution<T>> {
    check_dims(net.n(), horizon, m)?;
    let cache = PowerCache::with_max_power(net, horizon - 1);
    tics_trace_with_cache(&cache, horizon, m)
}

pub fn tics_trace_with_cache<T: Scalar>(
    cache: &PowerCache<T>,
    horizon: usize,
    m: usize,
) -> Result<ScheduleSolution<T>> {
    check_dims(cache.n(), horizon, m)?;
    let mut total = vec![T::zero(); cache.n()];
    for k in 0..horizon {
        for (t, r) in total.iter_mut().zip(cache.column_norms_sq(k)) {
            *t += r;
        }
    }
    let chosen = top_m(&total, m);
    let value = chosen.iter().fold(T::zero(), |s, &i| s + total[i]);
    Ok(ScheduleSolution {
        schedule: ControlSchedule::constant(&chosen, horizon)?,
        value,
    })
}

#[derive(Clone)]
struct Candidate<T> {
    value: T,
    nodes: Vec<usize>,
}

/// Larger value wins; equal values go to the lexicographically smaller schedule.
fn better<T: Scalar>(a: Candidate<T>, b: Candidate<T>) -> Candidate<T> {
    match a.value.partial_cmp(&b.value) {
        Some(Ordering::Greater) => a,
        Some(Ordering::Less) => b,
        _ => {
            if a.nodes <= b.nodes {
                a
            } else {
                b
            }
        }
    }
}

/// Global single-input optimum of `metric(W_K)` by enumeration, over all
/// `n^K` schedules or only the `n` constant ones.
pub fn exhaustive_schedule<T: Scalar>(
    net: &NetworkMatrix<T>,
    horizon: usize,
    kind: MetricKind,
    constant_only: bool,
    budget: u64,
) -> Result<ScheduleSolution<T>> {
    let n = net.n();
    check_dims(n, horizon, 1)?;
    let size = if constant_only {
        n as f64
    } else {
        (n as f64).powi(horizon as i32)
    };
    if size > budget as f64 {
        return Err(Error::BudgetExceeded { size, budget });
    }
    let cache = PowerCache::with_max_power(net, horizon - 1);

    // reach[t][j]: Gramian term of actuating node j at step t
    let reach: Vec<Vec<DMatrix<T>>> = (0..horizon)
        .map(|t| {
            let p = cache.power(horizon - 1 - t);
            (0..n)
                .map(|j| p.column(j) * p.column(j).transpose())
                .collect()
        })
        .collect();

    if constant_only {
        // same accumulation order as the full enumeration, so a constant
        // schedule scores identically under both searches
        let best = (0..n)
            .into_par_iter()
            .map(|i| {
                let w = reach
                    .iter()
                    .fold(DMatrix::zeros(n, n), |w, terms| w + &terms[i]);
                Candidate {
                    value: metric_of_matrix(&w, kind),
                    nodes: vec![i; horizon],
                }
            })
            .reduce_with(better)
            .expect("n >= 1");
        return Ok(ScheduleSolution {
            schedule: ControlSchedule::single(&best.nodes)?,
            value: best.value,
        });
    }

    let mut prefix_len = 1;
    while prefix_len < horizon && n.pow(prefix_len as u32) < 64 {
        prefix_len += 1;
    }
    let prefixes = n.pow(prefix_len as u32);
    let best = (0..prefixes)
        .into_par_iter()
        .map(|code| {
            let mut nodes = vec![0; horizon];
            let mut c = code;
            for t in (0..prefix_len).rev() {
                nodes[t] = c % n;
                c /= n;
            }
            let mut w = DMatrix::zeros(n, n);
            for t in 0..prefix_len {
                w += &reach[t][nodes[t]];
            }
            let mut best = None;
            search(&reach, kind, prefix_len, &mut nodes, &w, &mut best);
            best.expect("every prefix has a completion")
        })
        .reduce_with(better)
        .expect("at least one schedule");
    Ok(ScheduleSolution {
        schedule: ControlSchedule::single(&best.nodes)?,
        value: best.value,
    })
}

fn search<T: Scalar>(
    reach: &[Vec<DMatrix<T>>],
    kind: MetricKind,
    t: usize,
    nodes: &mut Vec<usize>,
    w: &DMatrix<T>,
    best: &mut Option<Candidate<T>>,
) {
    if t == reach.len() {
        let cand = Candidate {
            value: metric_of_matrix(w, kind),
            nodes: nodes.clone(),
        };
        *best = Some(match best.take() {
            Some(b) => better(b, cand),
            None => cand,
        });
        return;
    }
    for (j, term) in reach[t].iter().enumerate() {
        nodes[t] = j;
        let next = w + term;
        search(reach, kind, t + 1, nodes, &next, best);
    }
}

/// Greedy forward pass over time steps. Each step adds the node(s) that
/// most increase the metric of the partial Gramian; inverse-type metrics
/// are evaluated on `W + eps I`, with `log det(W + eps I)` breaking ties
/// between rank-deficient candidates.
pub fn greedy_schedule<T: Scalar>(
    net: &NetworkMatrix<T>,
    horizon: usize,
    kind: MetricKind,
    m: usize,
) -> Result<ScheduleSolution<T>> {
    let n = net.n();
    check_dims(n, horizon, m)?;
    let cache = PowerCache::with_max_power(net, horizon - 1);
    let eps = greedy_regularization(&cache, horizon);
    let mut w = DMatrix::<T>::zeros(n, n);
    let mut steps = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let power = cache.power(horizon - 1 - t);
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        for _ in 0..m {
            let mut best: Option<(usize, (T, T))> = None;
            for j in (0..n).filter(|j| !chosen.contains(j)) {
                let col = power.column(j);
                let score = if kind == MetricKind::Trace {
                    (col.norm_squared(), T::zero())
                } else {
                    let trial = &w + col * col.transpose();
                    regularized_score(&trial, kind, eps)
                };
                let replace = match &best {
                    None => true,
                    Some((_, b)) => score_gt(score, *b),
                };
                if replace {
                    best = Some((j, score));
                }
            }
            let (j, _) = best.expect("m <= n leaves a candidate");
            let col = power.column(j);
            w += col * col.transpose();
            chosen.push(j);
        }
        steps.push(chosen);
    }
    let schedule = ControlSchedule::new(steps)?;
    let value = metric_of_matrix(&w, kind);
    Ok(ScheduleSolution { schedule, value })
}

fn greedy_regularization<T: Scalar>(cache: &PowerCache<T>, horizon: usize) -> T {
    let total = (0..horizon)
        .map(|k| cache.power(k).norm_squared())
        .fold(T::zero(), |s, v| s + v);
    T::lit(GREEDY_REGULARIZATION) * total / T::from_usize_lossy(cache.n())
}

fn regularized_score<T: Scalar>(w: &DMatrix<T>, kind: MetricKind, eps: T) -> (T, T) {
    let n = w.nrows();
    let reg = w + DMatrix::<T>::identity(n, n) * eps;
    let primary = match kind {
        MetricKind::TraceInverseInverse => {
            let eig = symmetric_eigen(&reg);
            let s = eig
                .eigenvalues
                .iter()
                .fold(T::zero(), |s, v| s + T::one() / v.max(eps));
            T::one() / s
        }
        // the determinant is compared in log space to avoid underflow
        MetricKind::Determinant => T::zero(),
        _ => metric_of_matrix(&reg, kind),
    };
    let eig = symmetric_eigen(&reg);
    let logdet = eig
        .eigenvalues
        .iter()
        .fold(T::zero(), |s, v| s + v.max(eps).ln());
    (primary, logdet)
}

fn score_gt<T: Scalar>(a: (T, T), b: (T, T)) -> bool {
    let tol = T::tie_rel() * a.0.abs().max(b.0.abs());
    if a.0 > b.0 + tol {
        true
    } else if b.0 > a.0 + tol {
        false
    } else {
        a.1 > b.1 + T::tie_rel() * a.1.abs().max(b.1.abs())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Best constant schedule with `m` inputs by enumerating node subsets.
fn exhaustive_constant<T: Scalar>(
    cache: &PowerCache<T>,
    horizon: usize,
    kind: MetricKind,
    m: usize,
) -> ScheduleSolution<T> {
    let n = cache.n();
    let mut subsets = Vec::new();
    let mut current = Vec::with_capacity(m);
    fn rec(n: usize, m: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == m {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(n, m, i + 1, current, out);
            current.pop();
        }
    }
    rec(n, m, 0, &mut current, &mut subsets);
    let best = subsets
        .into_par_iter()
        .map(|nodes| {
            let s = ControlSchedule::constant(&nodes, horizon).expect("distinct subset");
            let w = gramian_with_cache(cache, &s).expect("validated schedule");
            Candidate {
                value: metric_of_matrix(w.matrix(), kind),
                nodes,
            }
        })
        .reduce_with(better)
        .expect("at least one subset");
    ScheduleSolution {
        schedule: ControlSchedule::constant(&best.nodes, horizon).expect("distinct subset"),
        value: best.value,
    }
}

/// Optimal TICS and TVCS values, `chi` and the class label.
///
/// Trace uses the closed forms. Other metrics are solved exactly by
/// enumeration when the search space fits in `budget`, and otherwise with
/// the greedy solver (the report is then flagged as a lower bound).
pub fn chi_report<T: Scalar>(
    net: &NetworkMatrix<T>,
    horizon: usize,
    kind: MetricKind,
    m: usize,
    budget: u64,
) -> Result<ChiReport<T>> {
    let n = net.n();
    check_dims(n, horizon, m)?;
    let cache = PowerCache::with_max_power(net, horizon - 1);
    let (ti, tv, solver_ti, solver_tv) = if kind == MetricKind::Trace {
        (
            tics_trace_with_cache(&cache, horizon, m)?,
            tvcs_trace_with_cache(&cache, horizon, m)?,
            Solver::ClosedFormTrace,
            Solver::ClosedFormTrace,
        )
    } else {
        let (ti, solver_ti) = if m == 1 && n as u64 <= budget {
            (
                exhaustive_schedule(net, horizon, kind, true, budget)?,
                Solver::Exhaustive,
            )
        } else if binomial(n, m) <= budget as f64 {
            (
                exhaustive_constant(&cache, horizon, kind, m),
                Solver::Exhaustive,
            )
        } else {
            (greedy_constant(&cache, horizon, kind, m)?, Solver::Greedy)
        };
        let full_size = binomial(n, m).powi(horizon as i32);
        if m == 1 && full_size <= budget as f64 {
            (
                ti,
                exhaustive_schedule(net, horizon, kind, false, budget)?,
                solver_ti,
                Solver::Exhaustive,
            )
        } else {
            let greedy = greedy_schedule(net, horizon, kind, m)?;
            // a constant schedule is also a time-varying candidate
            let tv = if greedy.value >= ti.value {
                greedy
            } else {
                ti.clone()
            };
            (ti, tv, solver_ti, Solver::Greedy)
        }
    };
    if !(ti.value > T::zero()) || !ti.value.is_finite() {
        return Err(Error::DegenerateBaseline(ti.value.as_f64()));
    }
    let chi = (tv.value - ti.value) / ti.value;
    Ok(ChiReport {
        metric: kind,
        horizon,
        inputs_per_step: m,
        f_ti: ti.value,
        f_tv: tv.value,
        chi,
        schedule_ti: ti.schedule,
        schedule_tv: tv.schedule,
        class_label: classify(chi),
        solver_ti,
        solver_tv,
        chi_is_lower_bound: solver_tv == Solver::Greedy,
    })
}

pub fn classify<T: Scalar>(chi: T) -> ClassLabel {
    if chi > T::lit(CHI_EPSILON) {
        ClassLabel::V
    } else {
        ClassLabel::I
    }
}

/// Greedy choice of a fixed node set actuated at every step.
fn greedy_constant<T: Scalar>(
    cache: &PowerCache<T>,
    horizon: usize,
    kind: MetricKind,
    m: usize,
) -> Result<ScheduleSolution<T>> {
    let n = cache.n();
    let eps = greedy_regularization(cache, horizon);
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    let mut w = DMatrix::<T>::zeros(n, n);
    let node_gramian = |j: usize| {
        let mut g = DMatrix::<T>::zeros(n, n);
        for k in 0..horizon {
            let col = cache.power(k).column(j);
            g += col * col.transpose();
        }
        g
    };
    for _ in 0..m {
        let mut best: Option<(usize, (T, T), DMatrix<T>)> = None;
        for j in (0..n).filter(|j| !chosen.contains(j)) {
            let trial = &w + node_gramian(j);
            let score = regularized_score(&trial, kind, eps);
            if best.as_ref().is_none_or(|(_, b, _)| score_gt(score, *b)) {
                best = Some((j, score, trial));
            }
        }
        let (j, _, trial) = best.expect("m <= n");
        chosen.push(j);
        w = trial;
    }
    Ok(ScheduleSolution {
        schedule: ControlSchedule::constant(&chosen, horizon)?,
        value: metric_of_matrix(&w, kind),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonPoint {
    pub horizon: usize,
    /// `None` when the time-invariant baseline is degenerate.
    pub chi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonSweep {
    pub metric: MetricKind,
    pub points: Vec<HorizonPoint>,
    /// Horizon with the largest `chi` (smallest horizon on ties).
    pub best_horizon: Option<usize>,
    pub best_chi: Option<f64>,
}

/// `chi(K)` for `K = 2..=k_max`, single input.
pub fn chi_vs_horizon<T: Scalar>(
    net: &NetworkMatrix<T>,
    k_max: usize,
    kind: MetricKind,
    budget: u64,
) -> Result<HorizonSweep> {
    if k_max < 2 {
        return Err(Error::InvalidParameter(
            "horizon cap must be at least 2".into(),
        ));
    }
    let n = net.n();
    let mut points = Vec::with_capacity(k_max - 1);
    if kind == MetricKind::Trace {
        let cache = PowerCache::with_max_power(net, k_max - 1);
        let mut tv = T::zero();
        let mut cumulative = vec![T::zero(); n];
        for k in 0..k_max {
            let r = cache.column_norms_sq(k);
            tv += r[top_m(&r, 1)[0]];
            for (c, v) in cumulative.iter_mut().zip(r) {
                *c += v;
            }
            if k >= 1 {
                let ti = cumulative[top_m(&cumulative, 1)[0]];
                let chi = ((tv - ti) / ti).as_f64();
                points.push(HorizonPoint {
                    horizon: k + 1,
                    chi: Some(chi),
                });
            }
        }
    } else {
        for horizon in 2..=k_max {
            let chi = match chi_report(net, horizon, kind, 1, budget) {
                Ok(r) => Some(r.chi.as_f64()),
                Err(Error::DegenerateBaseline(_)) => None,
                Err(e) => return Err(e),
            };
            points.push(HorizonPoint { horizon, chi });
        }
    }
    let best = points
        .iter()
        .filter_map(|p| p.chi.map(|c| (p.horizon, c)))
        .fold(None, |acc: Option<(usize, f64)>, (h, c)| match acc {
            Some((_, bc)) if c <= bc => acc,
            _ => Some((h, c)),
        });
    Ok(HorizonSweep {
        metric: kind,
        points,
        best_horizon: best.map(|b| b.0),
        best_chi: best.map(|b| b.1),
    })
}
