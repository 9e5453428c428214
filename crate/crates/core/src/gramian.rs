//! Controllability Gramians for arbitrary schedules, the four Gramian-based
//! controllability metrics, minimum-energy control and forward simulation.
//!
//! The Gramian of a schedule over horizon `K` is
//!
//! ```text
//! W_K = sum_{k=0}^{K-1} A^k B(K-1-k) B(K-1-k)^T (A^T)^k
//! ```
//!
//! so the input applied at step `K-1-k` is propagated through `k` steps of
//! the dynamics before the final time.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::network::{ControlSchedule, NetworkMatrix, PowerCache};
use crate::scalar::Scalar;

/// Symmetric positive-semidefinite controllability Gramian.
#[derive(Debug, Clone, PartialEq)]
pub struct Gramian<T: Scalar> {
    w: DMatrix<T>,
}

impl<T: Scalar> Gramian<T> {
    /// Wraps a matrix after checking symmetry to the scalar's tolerance.
    pub fn new(w: DMatrix<T>) -> Result<Self> {
        if w.nrows() != w.ncols() {
            return Err(Error::Dimension(format!(
                "Gramian must be square, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        let scale = w.norm();
        let asym = (&w - w.transpose()).norm();
        if asym > T::symmetry_rel() * scale {
            return Err(Error::NotSymmetric {
                asymmetry: if scale > T::zero() {
                    (asym / scale).as_f64()
                } else {
                    asym.as_f64()
                },
            });
        }
        Ok(Self { w })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn trace(&self) -> T {
        self.w.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut ev: Vec<T> = symmetric_eigen(&self.w)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        ev
    }
}

/// Gramian-based controllability measure to maximise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    /// `tr(W)`, the average squared axis length of the reachability ellipsoid.
    #[serde(rename = "trace")]
    Trace,
    /// `tr(W^{-1})^{-1}`, inverse of the average energy over random targets.
    #[serde(rename = "trinv")]
    TraceInverseInverse,
    /// `det(W)`, proportional to the squared ellipsoid volume.
    #[serde(rename = "det")]
    Determinant,
    /// `lambda_min(W)`, worst-case controllability.
    #[serde(rename = "mineig")]
    MinEigenvalue,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Trace,
        MetricKind::TraceInverseInverse,
        MetricKind::Determinant,
        MetricKind::MinEigenvalue,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            MetricKind::Trace => "trace",
            MetricKind::TraceInverseInverse => "trinv",
            MetricKind::Determinant => "det",
            MetricKind::MinEigenvalue => "mineig",
        }
    }

    /// Metrics other than the trace need the smallest eigenvalues and are
    /// regularised inside the greedy solver.
    pub fn needs_regularization(self) -> bool {
        matches!(
            self,
            MetricKind::TraceInverseInverse | MetricKind::Determinant
        )
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trace" | "tr" => Ok(MetricKind::Trace),
            "trinv" | "trace_inverse_inverse" => Ok(MetricKind::TraceInverseInverse),
            "det" | "determinant" => Ok(MetricKind::Determinant),
            "mineig" | "min_eigenvalue" | "lambda_min" => Ok(MetricKind::MinEigenvalue),
            other => Err(Error::InvalidParameter(format!("unknown metric '{other}'"))),
        }
    }
}

/// `n x m` input matrix whose columns are the canonical basis vectors of the
/// nodes controlled at step `k`.
pub fn build_input_matrix<T: Scalar>(
    schedule: &ControlSchedule,
    k: usize,
    n: usize,
) -> Result<DMatrix<T>> {
    if k >= schedule.horizon() {
        return Err(Error::Dimension(format!(
            "time index {k} outside horizon {}",
            schedule.horizon()
        )));
    }
    let step = schedule.step(k);
    let mut b = DMatrix::zeros(n, step.len());
    for (col, &node) in step.iter().enumerate() {
        if node >= n {
            return Err(Error::NodeOutOfRange { index: node, n });
        }
        b[(node, col)] = T::one();
    }
    Ok(b)
}

/// Controllability Gramian of `schedule` on `net`.
pub fn gramian<T: Scalar>(
    net: &NetworkMatrix<T>,
    schedule: &ControlSchedule,
) -> Result<Gramian<T>> {
    let cache = PowerCache::with_max_power(net, schedule.horizon().saturating_sub(1));
    gramian_with_cache(&cache, schedule)
}

/// Same as [`gramian`], reusing cached powers of `A`.
pub fn gramian_with_cache<T: Scalar>(
    cache: &PowerCache<T>,
    schedule: &ControlSchedule,
) -> Result<Gramian<T>> {
    let n = cache.n();
    schedule.validate_for(n)?;
    let horizon = schedule.horizon();
    if cache.max_power() + 1 < horizon {
        return Err(Error::Dimension(format!(
            "power cache holds A^0..A^{} but horizon is {horizon}",
            cache.max_power()
        )));
    }
    let reach = reach_columns(cache, schedule);
    let w = &reach * reach.transpose();
    // symmetric by construction; mirror to remove rounding asymmetry
    let w = (&w + w.transpose()) * T::lit(0.5);
    Ok(Gramian { w })
}

/// Columns `A^k e_j` for every `j` controlled at step `K-1-k`.
fn reach_columns<T: Scalar>(cache: &PowerCache<T>, schedule: &ControlSchedule) -> DMatrix<T> {
    let n = cache.n();
    let horizon = schedule.horizon();
    let m = schedule.inputs_per_step();
    let mut cols = DMatrix::zeros(n, horizon * m);
    for k in 0..horizon {
        let power = cache.power(k);
        for (p, &j) in schedule.step(horizon - 1 - k).iter().enumerate() {
            cols.set_column(k * m + p, &power.column(j));
        }
    }
    cols
}

/// Value of a controllability metric. Singular Gramians map to the limit
/// values: zero for the inverse-trace and minimum eigenvalue, and the
/// (clamped) eigenvalue product for the determinant.
pub fn metric<T: Scalar>(w: &Gramian<T>, kind: MetricKind) -> T {
    metric_of_matrix(w.matrix(), kind)
}

pub(crate) fn metric_of_matrix<T: Scalar>(w: &DMatrix<T>, kind: MetricKind) -> T {
    if kind == MetricKind::Trace {
        return w.trace();
    }
    let eig = symmetric_eigen(w);
    let values: Vec<T> = eig.eigenvalues.iter().map(|v| v.max(T::zero())).collect();
    let lmax = values.iter().fold(T::zero(), |m, v| m.max(*v));
    let lmin = values
        .iter()
        .fold(T::max_value().unwrap_or(lmax), |m, v| m.min(*v));
    match kind {
        MetricKind::Trace => unreachable!(),
        MetricKind::Determinant => values.iter().fold(T::one(), |p, v| p * *v),
        MetricKind::MinEigenvalue => lmin,
        MetricKind::TraceInverseInverse => {
            if lmax == T::zero() || lmin <= T::singular_rel() * lmax {
                T::zero()
            } else {
                T::one() / values.iter().fold(T::zero(), |s, v| s + T::one() / *v)
            }
        }
    }
}

/// Minimum-energy input sequence steering `x(0) = 0` to `x(K) = x_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinEnergyControl<T: Scalar> {
    /// `inputs[k]` holds one value per controlled node at step `k`.
    pub inputs: Vec<DVector<T>>,
    /// `x_f^T W_K^{-1} x_f`.
    pub energy: T,
    /// `lambda_max / lambda_min` of the Gramian used.
    pub condition: T,
}

/// `u*(k) = B(k)^T (A^T)^{K-1-k} W_K^{-1} x_f`.
pub fn min_energy_control<T: Scalar>(
    net: &NetworkMatrix<T>,
    schedule: &ControlSchedule,
    x_f: &DVector<T>,
) -> Result<MinEnergyControl<T>> {
    let n = net.n();
    if x_f.len() != n {
        return Err(Error::Dimension(format!(
            "target has {} entries, network has {n} nodes",
            x_f.len()
        )));
    }
    schedule.validate_for(n)?;
    let horizon = schedule.horizon();
    let m = schedule.inputs_per_step();
    let cache = PowerCache::with_max_power(net, horizon.saturating_sub(1));
    // W = C C^T, so u* = C^+ x_f; solving on C avoids squaring the condition number
    let c = reach_columns(&cache, schedule);
    let svd = c.svd(true, true);
    let smax = svd.singular_values.iter().fold(T::zero(), |a, v| a.max(*v));
    let smin = if horizon * m < n {
        T::zero()
    } else {
        svd.singular_values.iter().fold(smax, |a, v| a.min(*v))
    };
    let (lmax, lmin) = (smax * smax, smin * smin);
    let condition = if lmin > T::zero() {
        lmax / lmin
    } else {
        T::max_value().unwrap_or(lmax)
    };
    if lmin <= T::singular_rel() * lmax || condition >= T::condition_cap() {
        return Err(Error::Uncontrollable {
            horizon,
            lambda_min: lmin.as_f64(),
            condition: condition.as_f64(),
        });
    }
    let u_mat = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let coeffs = u_mat.transpose() * x_f;
    let scaled = DVector::from_iterator(
        coeffs.len(),
        coeffs
            .iter()
            .zip(svd.singular_values.iter())
            .map(|(a, s)| *a / *s),
    );
    let u = v_t.transpose() * scaled;
    let energy = u.norm_squared();

    // column (K-1-k)*m + p of C carries input p of step k
    let inputs = (0..horizon)
        .map(|k| DVector::from_iterator(m, (0..m).map(|p| u[(horizon - 1 - k) * m + p])))
        .collect();
    Ok(MinEnergyControl {
        inputs,
        energy,
        condition,
    })
}

/// State trajectory `x(0), ..., x(K)` of `x(k+1) = A x(k) + B(k) u(k)`.
pub fn simulate<T: Scalar>(
    net: &NetworkMatrix<T>,
    schedule: &ControlSchedule,
    x0: &DVector<T>,
    inputs: &[DVector<T>],
) -> Result<Vec<DVector<T>>> {
    let n = net.n();
    schedule.validate_for(n)?;
    if x0.len() != n {
        return Err(Error::Dimension(format!(
            "initial state has {} entries, network has {n} nodes",
            x0.len()
        )));
    }
    if inputs.len() != schedule.horizon() {
        return Err(Error::Dimension(format!(
            "{} input steps for a horizon of {}",
            inputs.len(),
            schedule.horizon()
        )));
    }
    let mut states = Vec::with_capacity(inputs.len() + 1);
    states.push(x0.clone());
    for (k, u) in inputs.iter().enumerate() {
        let step = schedule.step(k);
        if u.len() != step.len() {
            return Err(Error::Dimension(format!(
                "step {k} has {} inputs for {} controlled nodes",
                u.len(),
                step.len()
            )));
        }
        let mut next = net.matrix() * states.last().expect("trajectory is never empty");
        for (&node, &value) in step.iter().zip(u.iter()) {
            next[node] += value;
        }
        states.push(next);
    }
    Ok(states)
}

/// Principal axes of the unit-energy reachable set `{x : x^T W^{-1} x <= 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilityEllipsoid<T: Scalar> {
    /// Orthonormal axis directions, one per column.
    pub axes: DMatrix<T>,
    /// Axis lengths `sqrt(lambda_i)`, descending.
    pub lengths: Vec<T>,
}

pub fn reachability_ellipsoid<T: Scalar>(w: &Gramian<T>) -> ReachabilityEllipsoid<T> {
    let eig = symmetric_eigen(w.matrix());
    let n = w.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    let mut axes = DMatrix::zeros(n, n);
    let mut lengths = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        axes.set_column(dst, &eig.eigenvectors.column(src));
        lengths.push(eig.eigenvalues[src].max(T::zero()).sqrt());
    }
    ReachabilityEllipsoid { axes, lengths }
}
