//! 2k-communicability `R_i(k) = ((A^k)^T A^k)_{ii}`, its Perron limit, the
//! argmax sequence `r(k)`, nodal dominance and the scale-heterogeneity test.
//!
//! `R_i(k)` is the squared norm of column `i` of `A^k`: the sum of squared
//! weighted counts of length-`k` walks leaving node `i`. For `k = 1` it
//! tracks out-degree; as `k` grows its ranking approaches that of the
//! squared left Perron vector.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_primitive, perron_vector, spectral_radius};
use crate::network::{NetworkMatrix, PowerCache};
use crate::scalar::Scalar;

/// Power used for the finite-`k` surrogate of `R_i(infinity)`.
pub const ASYMPTOTIC_FALLBACK_POWER: usize = 200;

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_lowest<T: Scalar>(values: impl IntoIterator<Item = T>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Indices whose value is within `T::tie_rel()` (relative) of the maximum.
pub fn argmax_set<T: Scalar>(values: &[T]) -> Vec<usize> {
    let Some(best) = argmax_lowest(values.iter().copied()) else {
        return Vec::new();
    };
    let max = values[best];
    let floor = max - T::tie_rel() * max.abs();
    (0..values.len()).filter(|&i| values[i] >= floor).collect()
}

/// Lowest index that is a maximiser of both `a` and `b`, up to ties.
pub fn shared_leader<T: Scalar>(a: &[T], b: &[T]) -> Option<usize> {
    let in_b = argmax_set(b);
    argmax_set(a).into_iter().find(|i| in_b.contains(i))
}

/// Indices of the `m` largest values, ordered by value (descending) then
/// index (ascending).
pub fn top_m<T: Scalar>(values: &[T], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .expect("finite communicability")
            .then(a.cmp(&b))
    });
    order.truncate(m);
    order
}

/// `R_i(infinity)` together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticCommunicability<T: Scalar> {
    pub values: DVector<T>,
    /// `true` when the matrix is not primitive (or the power iteration
    /// stalled) and `values` hold `R_i(200) / rho^400` instead of `u_{1,i}^2`.
    pub fallback: bool,
}

/// Communicability of every node at every scale `k = 0..K-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunicabilityProfile<T: Scalar> {
    /// `r_values[(i, k)] = R_i(k)`.
    pub r_values: DMatrix<T>,
    pub r_inf: AsymptoticCommunicability<T>,
    /// `r(k) = argmax_i R_i(k)`, lowest index on ties.
    pub argmax_seq: Vec<usize>,
    pub spectral_radius: T,
}

impl<T: Scalar> CommunicabilityProfile<T> {
    pub fn n(&self) -> usize {
        self.r_values.nrows()
    }

    pub fn horizon(&self) -> usize {
        self.r_values.ncols()
    }

    /// `R_i(k)` for all `i`.
    pub fn at_scale(&self, k: usize) -> Vec<T> {
        self.r_values.column(k).iter().copied().collect()
    }

    /// `argmax_i R_i(infinity)`.
    pub fn asymptotic_leader(&self) -> usize {
        argmax_lowest(self.r_inf.values.iter().copied()).expect("profile has nodes")
    }

    /// No node is a maximiser at both `k = 1` and `k = K-1` (ties count as
    /// shared); `false` when `K < 2`.
    pub fn scale_heterogeneous(&self) -> bool {
        let k = self.horizon();
        k >= 2 && shared_leader(&self.at_scale(1), &self.at_scale(k - 1)).is_none()
    }
}

/// Communicability profile over horizon `K`.
pub fn profile<T: Scalar>(
    net: &NetworkMatrix<T>,
    horizon: usize,
) -> Result<CommunicabilityProfile<T>> {
    let cache = PowerCache::with_max_power(net, horizon.saturating_sub(1));
    profile_with_cache(net, &cache, horizon)
}

pub fn profile_with_cache<T: Scalar>(
    net: &NetworkMatrix<T>,
    cache: &PowerCache<T>,
    horizon: usize,
) -> Result<CommunicabilityProfile<T>> {
    let r_values = finite_profile(cache, horizon)?;
    let argmax_seq = (0..horizon)
        .map(|k| argmax_lowest(r_values.column(k).iter().copied()).expect("profile has nodes"))
        .collect();
    Ok(CommunicabilityProfile {
        r_values,
        r_inf: asymptotic_communicability(net)?,
        argmax_seq,
        spectral_radius: spectral_radius(net.matrix())?,
    })
}

/// The `n x K` matrix of `R_i(k)` without the spectral quantities.
pub fn finite_profile<T: Scalar>(cache: &PowerCache<T>, horizon: usize) -> Result<DMatrix<T>> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if cache.max_power() + 1 < horizon {
        return Err(Error::Dimension(format!(
            "power cache holds A^0..A^{} but horizon is {horizon}",
            cache.max_power()
        )));
    }
    let n = cache.n();
    let mut r = DMatrix::zeros(n, horizon);
    for k in 0..horizon {
        for (i, v) in cache.column_norms_sq(k).into_iter().enumerate() {
            r[(i, k)] = v;
        }
    }
    Ok(r)
}

/// `R_i(infinity) = u_{1,i}^2`, with `u_1` the left Perron vector scaled so
/// that `u_1^T v_1 = 1` for the unit right Perron vector `v_1`.
pub fn asymptotic_communicability<T: Scalar>(
    net: &NetworkMatrix<T>,
) -> Result<AsymptoticCommunicability<T>> {
    let a = net.matrix();
    if is_primitive(a) {
        if let (Some(v1), Some(u1)) = (perron_vector(a), perron_vector(&a.transpose())) {
            let overlap = u1.dot(&v1);
            if overlap > T::zero() {
                let u1 = u1 / overlap;
                return Ok(AsymptoticCommunicability {
                    values: u1.map(|x| x * x),
                    fallback: false,
                });
            }
        }
    }
    Ok(AsymptoticCommunicability {
        values: normalized_communicability(a, ASYMPTOTIC_FALLBACK_POWER)?,
        fallback: true,
    })
}

/// `R_i(k) / rho(A)^{2k}`, computed on `A / rho(A)` by repeated squaring.
/// Zero for nilpotent matrices.
pub fn normalized_communicability<T: Scalar>(a: &DMatrix<T>, k: usize) -> Result<DVector<T>> {
    let n = a.nrows();
    let rho = spectral_radius(a)?;
    if rho == T::zero() {
        return Ok(DVector::zeros(n));
    }
    let base = a / rho;
    let mut result = DMatrix::<T>::identity(n, n);
    let mut square = base;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &square * &result;
        }
        e >>= 1;
        if e > 0 {
            square = &square * &square;
        }
    }
    Ok(DVector::from_iterator(
        n,
        result
            .column_iter()
            .map(|c| c.iter().fold(T::zero(), |s, v| s + *v * *v)),
    ))
}

/// Which centrality scale plays the role of "global" in the dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalScale {
    /// `k = K - 1`.
    FiniteHorizon,
    /// `R_i(infinity)`.
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    /// `r(1)`.
    pub leader: usize,
    pub runner_up_local: usize,
    pub runner_up_global: usize,
    /// Relative gap between the leader and the runner-up at `k = 1`.
    pub local_gap: f64,
    /// Relative gap at the global scale; negative when another node leads there.
    pub global_gap: f64,
    /// `min(local_gap, global_gap)`.
    pub dominance: f64,
    /// Whether `r(1)` is also the argmax at the global scale.
    pub leader_is_global_argmax: bool,
    /// Local scale `k = 1` and the global scale (`None` for infinity).
    pub scale_pair: (usize, Option<usize>),
}

/// Dominance of `r(1)` over the rest of the network at the local scale
/// `k = 1` and the chosen global scale.
pub fn dominance<T: Scalar>(net: &NetworkMatrix<T>, horizon: usize) -> Result<DominanceReport> {
    let p = profile(net, horizon.max(2))?;
    dominance_from_profile(&p, GlobalScale::FiniteHorizon)
}

pub fn dominance_from_profile<T: Scalar>(
    profile: &CommunicabilityProfile<T>,
    scale: GlobalScale,
) -> Result<DominanceReport> {
    let n = profile.n();
    let horizon = profile.horizon();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "dominance needs at least two nodes".into(),
        ));
    }
    if horizon < 2 {
        return Err(Error::InvalidParameter(
            "dominance needs a horizon of at least 2".into(),
        ));
    }
    let local = profile.at_scale(1);
    let (global, global_k) = match scale {
        GlobalScale::FiniteHorizon => (profile.at_scale(horizon - 1), Some(horizon - 1)),
        GlobalScale::Asymptotic => (profile.r_inf.values.iter().copied().collect(), None),
    };
    let leader = shared_leader(&local, &global)
        .or_else(|| argmax_lowest(local.iter().copied()))
        .expect("n >= 2");
    let (runner_up_local, local_gap) = gap_to_runner_up(&local, leader);
    let (runner_up_global, global_gap) = gap_to_runner_up(&global, leader);
    Ok(DominanceReport {
        leader,
        runner_up_local,
        runner_up_global,
        local_gap,
        global_gap,
        dominance: local_gap.min(global_gap),
        leader_is_global_argmax: argmax_lowest(global.iter().copied()) == Some(leader),
        scale_pair: (1, global_k),
    })
}

fn gap_to_runner_up<T: Scalar>(values: &[T], leader: usize) -> (usize, f64) {
    let runner = argmax_lowest(values.iter().enumerate().map(|(i, v)| {
        if i == leader {
            T::min_value().unwrap_or(-T::one())
        } else {
            *v
        }
    }))
    .expect("at least two nodes");
    let lead = values[leader];
    let gap = if lead == T::zero() {
        if values[runner] == T::zero() {
            0.0
        } else {
            -1.0
        }
    } else {
        ((lead - values[runner]) / lead).as_f64()
    };
    (runner, gap)
}

/// Sufficient test for a strictly positive time-varying advantage under the
/// trace metric: no node is most central at both scales 1 and `K-1`.
/// Tied maximisers all count, so an exact tie never signals heterogeneity.
pub fn scale_heterogeneity_test<T: Scalar>(net: &NetworkMatrix<T>, horizon: usize) -> Result<bool> {
    if horizon < 2 {
        return Err(Error::InvalidParameter(
            "scale heterogeneity needs a horizon of at least 2".into(),
        ));
    }
    let cache = PowerCache::with_max_power(net, horizon - 1);
    let r1 = cache.column_norms_sq(1);
    let rk = cache.column_norms_sq(horizon - 1);
    Ok(shared_leader(&r1, &rk).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{generate, transmission, GeneratorConfig};

    fn star(n: usize) -> NetworkMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for leaf in 1..n {
            a[(0, leaf)] = 1.0;
            a[(leaf, 0)] = 1.0;
        }
        NetworkMatrix::new(a).unwrap()
    }

    #[test]
    fn tied_leader_is_not_heterogeneous() {
        // nodes 0 and 1 tie at k = 1; node 1 alone keeps R = 2 afterwards
        let mut a = DMatrix::zeros(4, 4);
        a[(2, 0)] = 1.0;
        a[(3, 0)] = 1.0;
        a[(2, 1)] = 1.0;
        a[(1, 1)] = 1.0;
        let net = NetworkMatrix::new(a).unwrap();
        let p = profile(&net, 4).unwrap();
        assert_eq!(p.argmax_seq[1], 0);
        assert_eq!(p.argmax_seq[3], 1);
        assert!(!p.scale_heterogeneous());
        assert!(!scale_heterogeneity_test(&net, 4).unwrap());
        let d = dominance_from_profile(&p, GlobalScale::FiniteHorizon).unwrap();
        assert_eq!(d.leader, 1);
        assert_eq!(d.dominance, 0.0);
        let chi = crate::scheduling::chi_report(&net, 4, crate::MetricKind::Trace, 1, 1000)
            .unwrap()
            .chi;
        assert_eq!(chi, 0.0);
    }

    #[test]
    fn identity_profile_is_flat() {
        let p = profile(&NetworkMatrix::<f64>::identity(4), 5).unwrap();
        assert!(p.r_values.iter().all(|v| *v == 1.0));
        assert_eq!(p.argmax_seq, vec![0; 5]);
        assert!(!p.scale_heterogeneous());
    }

    #[test]
    fn star_center_and_leaves() {
        let p = profile(&star(5), 3).unwrap();
        assert_eq!(p.r_values[(0, 1)], 4.0);
        for leaf in 1..5 {
            assert_eq!(p.r_values[(leaf, 1)], 1.0);
        }
        assert_eq!(p.argmax_seq[1], 0);
    }

    #[test]
    fn chain_is_not_scale_heterogeneous() {
        let chain = NetworkMatrix::<f64>::directed_chain(5);
        assert!(!scale_heterogeneity_test(&chain, 5).unwrap());
        assert!(!scale_heterogeneity_test(&NetworkMatrix::<f64>::identity(3), 4).unwrap());
        assert!(scale_heterogeneity_test(&chain, 1).is_err());
    }

    #[test]
    fn two_cycle_asymptotic_is_symmetric() {
        // periodic, so the finite-power surrogate is used
        let a = NetworkMatrix::<f64>::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let r = asymptotic_communicability(&a).unwrap();
        assert!(r.fallback);
        assert!((r.values[0] - r.values[1]).abs() < 1e-12);
        // adding self-loops makes it primitive; Perron vectors are (1, 1)/sqrt 2
        let a = NetworkMatrix::<f64>::from_row_slice(2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let r = asymptotic_communicability(&a).unwrap();
        assert!(!r.fallback);
        assert!((r.values[0] - 0.5).abs() < 1e-10 && (r.values[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn symmetric_networks_rank_like_eigenvector_centrality() {
        let cfg = GeneratorConfig::erdos_renyi(12, 0.5, 7);
        let net = transmission(&generate::<f64>(&cfg).unwrap());
        let sym = NetworkMatrix::new(net.matrix() + net.matrix().transpose()).unwrap();
        let r = asymptotic_communicability(&sym).unwrap();
        if !r.fallback {
            let v = perron_vector(sym.matrix()).unwrap();
            assert_eq!(top_m(r.values.as_slice(), 12), top_m(v.as_slice(), 12));
        }
    }

    #[test]
    fn dominance_cases() {
        let twins = NetworkMatrix::<f64>::identity(2);
        let d = dominance(&twins, 4).unwrap();
        assert_eq!(d.dominance, 0.0);
        assert_eq!(d.leader, 0);

        let d = dominance(&star(5), 10).unwrap();
        assert_eq!(d.leader, 0);
        assert!(d.leader_is_global_argmax);
        assert!(d.dominance > 0.0);
        assert_eq!(d.scale_pair, (1, Some(9)));

        assert!(dominance(&NetworkMatrix::<f64>::identity(1), 3).is_err());
    }

    #[test]
    fn dominance_reports_negative_gap_when_leaders_differ() {
        // node 0: many weak out-links; node 3 feeds a strong loop
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 0.0, 0.0, //
                0.6, 0.0, 0.0, 0.0, //
                0.6, 0.0, 0.0, 0.9, //
                0.6, 0.0, 0.9, 0.0,
            ],
        );
        let p = profile(&NetworkMatrix::new(a).unwrap(), 6).unwrap();
        let d = dominance_from_profile(&p, GlobalScale::FiniteHorizon).unwrap();
        assert_eq!(d.leader, 0);
        assert!(!d.leader_is_global_argmax);
        assert!(d.global_gap < 0.0);
        assert!(d.dominance < 0.0);
        assert!(p.scale_heterogeneous());
    }

    #[test]
    fn top_m_breaks_ties_by_index() {
        assert_eq!(top_m(&[1.0, 3.0, 3.0, 2.0], 3), vec![1, 2, 3]);
        assert_eq!(argmax_lowest([2.0, 2.0, 1.0]), Some(0));
        assert_eq!(argmax_lowest(Vec::<f64>::new()), None);
    }
}
