//! Network dynamics matrices, control schedules and cached matrix powers.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dynamical adjacency matrix `A` of `x(k+1) = A x(k) + B(k) u(k)`.
///
/// `a[(i, j)]` is the weight of the edge from node `j` to node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkMatrix<T: Scalar> {
    a: DMatrix<T>,
}

impl<T: Scalar> NetworkMatrix<T> {
    /// Builds a network from a square, entrywise nonnegative matrix.
    pub fn new(a: DMatrix<T>) -> Result<Self> {
        let net = Self::signed(a)?;
        if let Some(((i, j), v)) = net
            .a
            .iter()
            .enumerate()
            .map(|(idx, v)| ((idx % net.n(), idx / net.n()), v))
            .find(|(_, v)| !(**v >= T::zero()))
        {
            return Err(Error::InvalidParameter(format!(
                "adjacency entry ({i}, {j}) = {v} is negative or NaN"
            )));
        }
        Ok(net)
    }

    /// Builds a network without the sign check. Perturbed dynamics may carry
    /// negative couplings; use [`NetworkMatrix::is_nonnegative`] to flag them.
    pub fn signed(a: DMatrix<T>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!(
                "adjacency matrix must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.nrows() == 0 {
            return Err(Error::Dimension(
                "network must have at least one node".into(),
            ));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "adjacency matrix has non-finite entries".into(),
            ));
        }
        Ok(Self { a })
    }

    pub fn from_row_slice(n: usize, data: &[T]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            a: DMatrix::identity(n, n),
        }
    }

    /// Directed chain `1 -> 2 -> ... -> n` with unit weights (ones on the
    /// subdiagonal).
    pub fn directed_chain(n: usize) -> Self {
        let mut a = DMatrix::zeros(n, n);
        for i in 1..n {
            a[(i, i - 1)] = T::one();
        }
        Self { a }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.a
    }

    pub fn is_nonnegative(&self) -> bool {
        self.a.iter().all(|v| *v >= T::zero())
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { a: &self.a * c }
    }

    pub fn cast<U: Scalar>(&self) -> NetworkMatrix<U> {
        NetworkMatrix {
            a: self.a.map(|v| U::lit(v.as_f64())),
        }
    }
}

/// Per-step sets of controlled nodes `iota_0, ..., iota_{K-1}`.
///
/// Node indices are zero based. Every step controls the same number of
/// distinct nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ControlSchedule {
    steps: Vec<Vec<usize>>,
}

impl ControlSchedule {
    pub fn new(steps: Vec<Vec<usize>>) -> Result<Self> {
        let Some(first) = steps.first() else {
            return Err(Error::InvalidSchedule("horizon must be at least 1".into()));
        };
        let m = first.len();
        if m == 0 {
            return Err(Error::InvalidSchedule(
                "at least one input per step is required".into(),
            ));
        }
        for (k, step) in steps.iter().enumerate() {
            if step.len() != m {
                return Err(Error::InvalidSchedule(format!(
                    "step {k} controls {} nodes, expected {m}",
                    step.len()
                )));
            }
            for (p, node) in step.iter().enumerate() {
                if step[..p].contains(node) {
                    return Err(Error::InvalidSchedule(format!(
                        "node {node} appears twice at step {k}"
                    )));
                }
            }
        }
        Ok(Self { steps })
    }

    /// Single-input schedule, one node per step.
    pub fn single(nodes: &[usize]) -> Result<Self> {
        Self::new(nodes.iter().map(|&i| vec![i]).collect())
    }

    /// Time-invariant schedule actuating `nodes` at each of `horizon` steps.
    pub fn constant(nodes: &[usize], horizon: usize) -> Result<Self> {
        Self::new(vec![nodes.to_vec(); horizon])
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn inputs_per_step(&self) -> usize {
        self.steps[0].len()
    }

    pub fn step(&self, k: usize) -> &[usize] {
        &self.steps[k]
    }

    pub fn steps(&self) -> &[Vec<usize>] {
        &self.steps
    }

    pub fn is_constant(&self) -> bool {
        let mut first = self.steps[0].clone();
        first.sort_unstable();
        self.steps.iter().all(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s == first
        })
    }

    pub fn validate_for(&self, n: usize) -> Result<()> {
        for step in &self.steps {
            if let Some(&index) = step.iter().find(|&&i| i >= n) {
                return Err(Error::NodeOutOfRange { index, n });
            }
        }
        Ok(())
    }
}

/// Incrementally built powers `A^0, A^1, ...` of a network matrix.
#[derive(Debug, Clone)]
pub struct PowerCache<T: Scalar> {
    powers: Vec<DMatrix<T>>,
}

impl<T: Scalar> PowerCache<T> {
    pub fn new(net: &NetworkMatrix<T>) -> Self {
        let n = net.n();
        Self {
            powers: vec![DMatrix::identity(n, n), net.matrix().clone()],
        }
    }

    /// Cache holding at least `A^0 ..= A^max_power`.
    pub fn with_max_power(net: &NetworkMatrix<T>, max_power: usize) -> Self {
        let mut cache = Self::new(net);
        cache.extend_to(max_power);
        cache
    }

    pub fn extend_to(&mut self, max_power: usize) {
        while self.powers.len() <= max_power {
            let next = &self.powers[1] * self.powers.last().expect("cache is never empty");
            self.powers.push(next);
        }
    }

    /// `A^k`; panics if `k` has not been cached.
    pub fn power(&self, k: usize) -> &DMatrix<T> {
        &self.powers[k]
    }

    pub fn max_power(&self) -> usize {
        self.powers.len() - 1
    }

    pub fn n(&self) -> usize {
        self.powers[0].nrows()
    }

    /// Squared column norms of `A^k`, i.e. the diagonal of `(A^k)^T A^k`.
    pub fn column_norms_sq(&self, k: usize) -> Vec<T> {
        self.powers[k]
            .column_iter()
            .map(|c| c.iter().fold(T::zero(), |acc, v| acc + *v * *v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_non_square() {
        assert!(NetworkMatrix::<f64>::from_row_slice(2, &[0.0, -1.0, 0.0, 0.0]).is_err());
        assert!(NetworkMatrix::new(DMatrix::<f64>::zeros(2, 3)).is_err());
        assert!(NetworkMatrix::new(DMatrix::<f64>::zeros(0, 0)).is_err());
        assert!(NetworkMatrix::signed(DMatrix::from_element(2, 2, -1.0f64)).is_ok());
    }

    #[test]
    fn schedule_validation() {
        assert!(ControlSchedule::new(vec![]).is_err());
        assert!(ControlSchedule::new(vec![vec![0, 0]]).is_err());
        assert!(ControlSchedule::new(vec![vec![0, 1], vec![2]]).is_err());
        let s = ControlSchedule::single(&[0, 2, 1]).unwrap();
        assert_eq!(s.horizon(), 3);
        assert!(s.validate_for(3).is_ok());
        assert_eq!(
            s.validate_for(2),
            Err(Error::NodeOutOfRange { index: 2, n: 2 })
        );
        assert!(!s.is_constant());
        assert!(ControlSchedule::constant(&[1, 0], 4).unwrap().is_constant());
    }

    #[test]
    fn power_cache_matches_repeated_products() {
        let net = NetworkMatrix::from_row_slice(2, &[0.5, 1.0, 0.25, 0.0]).unwrap();
        let cache = PowerCache::with_max_power(&net, 4);
        let a = net.matrix();
        let a4 = a * a * a * a;
        assert!((cache.power(4) - a4).norm() < 1e-14);
        assert_eq!(cache.power(0), &DMatrix::identity(2, 2));
    }
}
