//! Manifest-subnetwork manipulation: the smallest perturbation of the
//! couplings among manifest (actuable) nodes that makes the unconstrained
//! trace-optimal time-varying schedule use manifest nodes only.
//!
//! The search is randomised. Each trial draws a direction `D` supported on
//! the manifest block with `||D||_2 = 1` and bisects the scale `s` for the
//! smallest `A + s D` whose argmax sequence `r(1), ..., r(K-1)` lies inside
//! the manifest. The returned norm is an upper bound on the true minimum.
//! `r(0)` is exempt because `R_i(0) = 1` for every node.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::communicability::argmax_lowest;
use crate::error::{Error, Result};
use crate::linalg::induced_two_norm;
use crate::netgen::{
    generate, log_uniform_random_config, normalize_spectral, replicate_seed, transmission,
};
use crate::network::{ControlSchedule, NetworkMatrix, PowerCache};
use crate::scalar::Scalar;
use crate::scheduling::{tvcs_trace, ScheduleSolution};

/// Bisection stops once the bracket is below this fraction of `||A||_2`.
pub const BISECTION_TOLERANCE: f64 = 1e-4;

/// Perturbation direction families drawn by the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionTemplates {
    /// Alternates dense nonnegative blocks and blocks embedding a directed
    /// cycle through the manifest nodes.
    Mixed,
    /// Only directed acyclic blocks (strictly triangular in a random order).
    AcyclicOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestProblem<T: Scalar> {
    pub net: NetworkMatrix<T>,
    manifest: Vec<usize>,
    pub horizon: usize,
    pub trials: usize,
    /// Largest admissible `||Delta A||_2 / ||A||_2`.
    pub norm_cap: T,
    pub templates: DirectionTemplates,
}

impl<T: Scalar> ManifestProblem<T> {
    pub fn new(net: NetworkMatrix<T>, manifest: &[usize], horizon: usize) -> Result<Self> {
        let mut manifest = manifest.to_vec();
        manifest.sort_unstable();
        manifest.dedup();
        if manifest.is_empty() {
            return Err(Error::InvalidParameter(
                "manifest set must not be empty".into(),
            ));
        }
        if let Some(&index) = manifest.iter().find(|&&i| i >= net.n()) {
            return Err(Error::NodeOutOfRange { index, n: net.n() });
        }
        if horizon < 2 {
            return Err(Error::InvalidParameter(
                "manipulation needs a horizon of at least 2".into(),
            ));
        }
        Ok(Self {
            net,
            manifest,
            horizon,
            trials: 32,
            norm_cap: T::one(),
            templates: DirectionTemplates::Mixed,
        })
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_norm_cap(mut self, cap: T) -> Self {
        self.norm_cap = cap;
        self
    }

    pub fn with_templates(mut self, templates: DirectionTemplates) -> Self {
        self.templates = templates;
        self
    }

    /// Sorted, deduplicated manifest node indices.
    pub fn manifest(&self) -> &[usize] {
        &self.manifest
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManipulationResult<T: Scalar> {
    /// Additive change of the dynamics, zero outside manifest x manifest.
    #[serde(skip)]
    pub delta: DMatrix<T>,
    pub relative_norm: T,
    pub all_manifest: bool,
    /// `tr(W_K)` of the unconstrained optimal schedule on the normalised
    /// manipulated network.
    pub tv_value_manipulated: T,
    /// `tr(W_K)` of the manifest-constrained optimal schedule on the
    /// normalised original network.
    pub tv_value_constrained: T,
    pub advantage_ratio: T,
    pub schedule_manipulated: ControlSchedule,
    pub schedule_constrained: ControlSchedule,
    /// `A + Delta A` has negative couplings.
    pub negative_entries: bool,
    pub successful_trials: usize,
    /// Trial that produced `delta`, `None` when no manipulation was needed.
    pub best_trial: Option<usize>,
}

/// Optimal single-input schedule restricted to manifest nodes, trace metric.
pub fn constrained_tvcs_trace<T: Scalar>(
    net: &NetworkMatrix<T>,
    manifest: &[usize],
    horizon: usize,
) -> Result<ScheduleSolution<T>> {
    let mut manifest = manifest.to_vec();
    manifest.sort_unstable();
    manifest.dedup();
    if manifest.is_empty() {
        return Err(Error::InvalidParameter(
            "manifest set must not be empty".into(),
        ));
    }
    if let Some(&index) = manifest.iter().find(|&&i| i >= net.n()) {
        return Err(Error::NodeOutOfRange { index, n: net.n() });
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let cache = PowerCache::with_max_power(net, horizon - 1);
    let mut steps = vec![Vec::new(); horizon];
    let mut value = T::zero();
    for k in 0..horizon {
        let r = cache.column_norms_sq(k);
        let pick =
            manifest[argmax_lowest(manifest.iter().map(|&i| r[i])).expect("nonempty manifest")];
        value += r[pick];
        steps[horizon - 1 - k] = vec![pick];
    }
    Ok(ScheduleSolution {
        schedule: ControlSchedule::new(steps)?,
        value,
    })
}

/// Number of scales `k = 1..K-1` whose most central node is manifest,
/// stopping at the first miss when `early_exit` is set.
fn manifest_hits<T: Scalar>(
    a: &DMatrix<T>,
    in_manifest: &[bool],
    horizon: usize,
    early_exit: bool,
) -> usize {
    let mut hits = 0;
    let mut power = a.clone();
    for k in 1..horizon {
        if k > 1 {
            power = a * &power;
        }
        let r = power
            .column_iter()
            .map(|c| c.iter().fold(T::zero(), |s, v| s + *v * *v));
        let leader = argmax_lowest(r).expect("nonempty network");
        if in_manifest[leader] {
            hits += 1;
        } else if early_exit {
            return hits;
        }
    }
    hits
}

/// Whether `r(k)` lies in the manifest for every `k = 1..K-1`.
pub fn is_all_manifest<T: Scalar>(
    net: &NetworkMatrix<T>,
    manifest: &[usize],
    horizon: usize,
) -> bool {
    let mut in_manifest = vec![false; net.n()];
    for &i in manifest {
        in_manifest[i] = true;
    }
    manifest_hits(net.matrix(), &in_manifest, horizon, true) == horizon.saturating_sub(1)
}

fn direction<T: Scalar>(
    n: usize,
    manifest: &[usize],
    template: usize,
    kind: DirectionTemplates,
    rng: &mut ChaCha8Rng,
) -> DMatrix<T> {
    let mut d = DMatrix::<T>::zeros(n, n);
    let mut order = manifest.to_vec();
    order.shuffle(rng);
    match (kind, template % 2) {
        (DirectionTemplates::AcyclicOnly, _) => {
            // edges only from earlier to later nodes in a random order
            for (p, &src) in order.iter().enumerate() {
                for &dst in &order[p + 1..] {
                    d[(dst, src)] = T::lit(rng.random::<f64>());
                }
            }
        }
        (DirectionTemplates::Mixed, 0) => {
            for &i in manifest {
                for &j in manifest {
                    d[(i, j)] = T::lit(rng.random::<f64>());
                }
            }
        }
        (DirectionTemplates::Mixed, _) => {
            // a directed cycle through a random subset of the manifest,
            // a self-loop when the subset has a single node
            let len = rng.random_range(1..=order.len());
            let cycle = &order[..len];
            for p in 0..len {
                let src = cycle[p];
                let dst = cycle[(p + 1) % len];
                d[(dst, src)] = T::lit(0.75 + 0.5 * rng.random::<f64>());
            }
            for &i in manifest {
                for &j in manifest {
                    d[(i, j)] += T::lit(0.05 * rng.random::<f64>());
                }
            }
        }
    }
    let norm = induced_two_norm(&d);
    if norm > T::zero() {
        d / norm
    } else {
        d
    }
}

struct Trial<T: Scalar> {
    index: usize,
    scale: Option<T>,
    hits_at_cap: usize,
    direction: DMatrix<T>,
}

fn run_trial<T: Scalar>(
    problem: &ManifestProblem<T>,
    in_manifest: &[bool],
    index: usize,
    seed: u64,
    cap: T,
    tol: T,
) -> Trial<T> {
    let a = problem.net.matrix();
    let n = problem.net.n();
    let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(seed, index as u64));
    let d = direction::<T>(n, &problem.manifest, index, problem.templates, &mut rng);
    let feasible = |s: T| {
        manifest_hits(&(a + &d * s), in_manifest, problem.horizon, true) == problem.horizon - 1
    };
    let zero_dir = d.iter().all(|v| *v == T::zero());
    if zero_dir || !feasible(cap) {
        let hits_at_cap = manifest_hits(&(a + &d * cap), in_manifest, problem.horizon, false);
        return Trial {
            index,
            scale: None,
            hits_at_cap,
            direction: d,
        };
    }
    let mut lo = T::zero();
    let mut hi = cap;
    loop {
        while hi - lo > tol {
            let mid = (lo + hi) * T::lit(0.5);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // certificate: one tolerance below the answer must fail
        let probe = hi - tol;
        if probe <= T::zero() || !feasible(probe) {
            break;
        }
        hi = probe;
        lo = T::zero();
    }
    Trial {
        index,
        scale: Some(hi),
        hits_at_cap: problem.horizon - 1,
        direction: d,
    }
}

/// Randomised search for the smallest manifest-block manipulation.
pub fn find_min_manipulation<T: Scalar>(
    problem: &ManifestProblem<T>,
    seed: u64,
) -> Result<ManipulationResult<T>> {
    if problem.trials == 0 {
        return Err(Error::InvalidParameter(
            "trial budget must be positive".into(),
        ));
    }
    let n = problem.net.n();
    let a = problem.net.matrix();
    let mut in_manifest = vec![false; n];
    for &i in &problem.manifest {
        in_manifest[i] = true;
    }
    let norm_a = induced_two_norm(a);

    let (delta, best_trial, successful_trials, all_manifest) =
        if is_all_manifest(&problem.net, &problem.manifest, problem.horizon) {
            (DMatrix::zeros(n, n), None, 0, true)
        } else {
            let cap = problem.norm_cap * norm_a;
            let tol = T::lit(BISECTION_TOLERANCE) * norm_a;
            let trials: Vec<Trial<T>> = (0..problem.trials)
                .into_par_iter()
                .map(|t| run_trial(problem, &in_manifest, t, seed, cap, tol))
                .collect();
            let successes = trials.iter().filter(|t| t.scale.is_some()).count();
            let best = trials.iter().filter_map(|t| t.scale.map(|s| (s, t))).fold(
                None::<(T, &Trial<T>)>,
                |acc, (s, t)| match acc {
                    Some((bs, _)) if s >= bs => acc,
                    _ => Some((s, t)),
                },
            );
            match best {
                Some((s, t)) => (&t.direction * s, Some(t.index), successes, true),
                None => {
                    let t = trials
                        .iter()
                        .fold(None::<&Trial<T>>, |acc, t| match acc {
                            Some(b) if t.hits_at_cap <= b.hits_at_cap => acc,
                            _ => Some(t),
                        })
                        .expect("at least one trial");
                    (&t.direction * cap, Some(t.index), 0, false)
                }
            }
        };

    let manipulated = NetworkMatrix::signed(a + &delta)?;
    let negative_entries = !manipulated.is_nonnegative();
    let tv = tvcs_trace(&normalize_spectral(&manipulated)?, problem.horizon, 1)?;
    let constrained = constrained_tvcs_trace(
        &normalize_spectral(&problem.net)?,
        &problem.manifest,
        problem.horizon,
    )?;
    let relative_norm = if norm_a > T::zero() {
        induced_two_norm(&delta) / norm_a
    } else {
        T::zero()
    };
    Ok(ManipulationResult {
        delta,
        relative_norm,
        all_manifest,
        tv_value_manipulated: tv.value,
        tv_value_constrained: constrained.value,
        advantage_ratio: tv.value / constrained.value,
        schedule_manipulated: tv.schedule,
        schedule_constrained: constrained.schedule,
        negative_entries,
        successful_trials,
        best_trial,
    })
}

/// Settings of a manipulation sweep over manifest fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulationSweepConfig {
    pub n: usize,
    pub fractions: Vec<f64>,
    pub replicates: usize,
    pub horizon: usize,
    pub trials: usize,
    pub norm_cap: f64,
    pub seed: u64,
}

impl ManipulationSweepConfig {
    pub fn new(
        n: usize,
        fractions: Vec<f64>,
        replicates: usize,
        horizon: usize,
        seed: u64,
    ) -> Self {
        Self {
            n,
            fractions,
            replicates,
            horizon,
            trials: 32,
            norm_cap: 1.0,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulationSweepRow {
    pub fraction: f64,
    pub mean_norm: f64,
    pub std_norm: f64,
    pub mean_ratio: f64,
    pub std_ratio: f64,
    pub success_rate: f64,
}

/// One replicate of a sweep: the network, manifest and search outcome.
#[derive(Debug, Clone)]
pub struct ManipulationSample {
    pub fraction: f64,
    pub replicate: usize,
    pub net: NetworkMatrix<f64>,
    pub manifest: Vec<usize>,
    pub result: ManipulationResult<f64>,
}

/// Spectrally normalised random transmission network of exactly `n` nodes
/// with uniform edge density and weights.
pub fn random_normalized_network(n: usize, seed: u64) -> Result<NetworkMatrix<f64>> {
    let mut cfg = log_uniform_random_config(n, n, seed);
    cfg.n = n;
    normalize_spectral(&transmission(&generate::<f64>(&cfg)?))
}

fn manifest_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n)
}

/// Runs every (fraction, replicate) pair. Replicate `r` uses the same
/// network for every fraction.
pub fn manipulation_samples(config: &ManipulationSweepConfig) -> Result<Vec<ManipulationSample>> {
    if let Some(f) = config.fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "manifest fraction {f} outside (0, 1]"
        )));
    }
    let jobs: Vec<(usize, usize)> = (0..config.fractions.len())
        .flat_map(|f| (0..config.replicates).map(move |r| (f, r)))
        .collect();
    jobs.into_par_iter()
        .map(|(f, r)| {
            let fraction = config.fractions[f];
            let net_seed = replicate_seed(config.seed, r as u64);
            let net = random_normalized_network(config.n, net_seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(net_seed, f as u64 + 1));
            let mut nodes: Vec<usize> = (0..config.n).collect();
            nodes.shuffle(&mut rng);
            nodes.truncate(manifest_size(config.n, fraction));
            nodes.sort_unstable();
            let problem = ManifestProblem::new(net.clone(), &nodes, config.horizon)?
                .with_trials(config.trials)
                .with_norm_cap(config.norm_cap);
            let result = find_min_manipulation(&problem, replicate_seed(net_seed, 0xA11))?;
            Ok(ManipulationSample {
                fraction,
                replicate: r,
                net,
                manifest: nodes,
                result,
            })
        })
        .collect()
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

/// Aggregates samples per fraction; norms and ratios average over the
/// successful replicates.
pub fn summarize_manipulation(
    config: &ManipulationSweepConfig,
    samples: &[ManipulationSample],
) -> Vec<ManipulationSweepRow> {
    config
        .fractions
        .iter()
        .map(|&fraction| {
            let rows: Vec<&ManipulationSample> =
                samples.iter().filter(|s| s.fraction == fraction).collect();
            let ok: Vec<&ManipulationSample> = rows
                .iter()
                .copied()
                .filter(|s| s.result.all_manifest)
                .collect();
            let norms: Vec<f64> = ok.iter().map(|s| s.result.relative_norm).collect();
            let ratios: Vec<f64> = ok.iter().map(|s| s.result.advantage_ratio).collect();
            let (mean_norm, std_norm) = mean_std(&norms);
            let (mean_ratio, std_ratio) = mean_std(&ratios);
            ManipulationSweepRow {
                fraction,
                mean_norm,
                std_norm,
                mean_ratio,
                std_ratio,
                success_rate: if rows.is_empty() {
                    f64::NAN
                } else {
                    ok.len() as f64 / rows.len() as f64
                },
            }
        })
        .collect()
}

pub fn manipulation_sweep(config: &ManipulationSweepConfig) -> Result<Vec<ManipulationSweepRow>> {
    let samples = manipulation_samples(config)?;
    Ok(summarize_manipulation(config, &samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduling::tvcs_trace;

    fn sample_net(seed: u64) -> NetworkMatrix<f64> {
        random_normalized_network(12, seed).unwrap()
    }

    #[test]
    fn all_nodes_manifest_is_unconstrained() {
        let net = sample_net(1);
        let all: Vec<usize> = (0..12).collect();
        let c = constrained_tvcs_trace(&net, &all, 6).unwrap();
        let u = tvcs_trace(&net, 6, 1).unwrap();
        assert_eq!(c.schedule, u.schedule);
        assert_eq!(c.value, u.value);
    }

    #[test]
    fn single_manifest_node_is_time_invariant() {
        let net = sample_net(2);
        let cache = PowerCache::with_max_power(&net, 5);
        let c = constrained_tvcs_trace(&net, &[3], 6).unwrap();
        let expected: f64 = (0..6).map(|k| cache.column_norms_sq(k)[3]).sum();
        assert!((c.value - expected).abs() < 1e-12);
        assert!(c.schedule.is_constant());
        assert!(constrained_tvcs_trace(&net, &[], 6).is_err());
        assert!(constrained_tvcs_trace(&net, &[12], 6).is_err());
    }

    #[test]
    fn no_manipulation_when_already_manifest() {
        let net = sample_net(3);
        let p = crate::communicability::profile(&net, 8).unwrap();
        let manifest: Vec<usize> = p.argmax_seq[1..].to_vec();
        let problem = ManifestProblem::new(net, &manifest, 8).unwrap();
        let r = find_min_manipulation(&problem, 9).unwrap();
        assert!(r.all_manifest);
        assert_eq!(r.relative_norm, 0.0);
        assert!(r.delta.iter().all(|v| *v == 0.0));
        assert_eq!(r.best_trial, None);
    }

    #[test]
    fn delta_is_supported_on_manifest_block() {
        let net = sample_net(4);
        let manifest = [1, 5, 7];
        let problem = ManifestProblem::new(net.clone(), &manifest, 8)
            .unwrap()
            .with_trials(8);
        let r = find_min_manipulation(&problem, 5).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                if !(manifest.contains(&i) && manifest.contains(&j)) {
                    assert_eq!(r.delta[(i, j)], 0.0);
                }
            }
        }
        if r.all_manifest {
            let manipulated = NetworkMatrix::signed(net.matrix() + &r.delta).unwrap();
            assert!(is_all_manifest(&manipulated, &manifest, 8));
        }
        assert_eq!(r, find_min_manipulation(&problem, 5).unwrap());
    }

    #[test]
    fn empty_manifest_and_zero_trials_rejected() {
        let net = sample_net(5);
        assert!(ManifestProblem::new(net.clone(), &[], 5).is_err());
        let p = ManifestProblem::new(net, &[0], 5).unwrap().with_trials(0);
        assert!(find_min_manipulation(&p, 0).is_err());
    }
}
