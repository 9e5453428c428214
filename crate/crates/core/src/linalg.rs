//! Dense spectral helpers: spectral radius, Perron vectors, graph structure
//! of a matrix, and symmetric eigendecomposition.

use std::collections::VecDeque;

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const POWER_ITERATIONS: usize = 20_000;

/// Eigendecomposition of the symmetric part `(W + W^T) / 2`.
pub fn symmetric_eigen<T: Scalar>(w: &DMatrix<T>) -> SymmetricEigen<T, nalgebra::Dyn> {
    let half = T::lit(0.5);
    let sym = (w + w.transpose()) * half;
    let n = sym.nrows();
    // Zero rows split off exactly as zero eigenpairs; the dense solver can
    // return non-finite values on matrices dominated by them.
    let keep: Vec<usize> = (0..n)
        .filter(|&i| sym.row(i).iter().any(|v| *v != T::zero()))
        .collect();
    if keep.len() == n {
        return SymmetricEigen::new(sym);
    }
    let mut eigenvalues = DVector::zeros(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    let mut col = 0;
    if !keep.is_empty() {
        let sub = DMatrix::from_fn(keep.len(), keep.len(), |a, b| sym[(keep[a], keep[b])]);
        let eig = SymmetricEigen::new(sub);
        for c in 0..keep.len() {
            eigenvalues[col] = eig.eigenvalues[c];
            for (a, &i) in keep.iter().enumerate() {
                eigenvectors[(i, col)] = eig.eigenvectors[(a, c)];
            }
            col += 1;
        }
    }
    for i in (0..n).filter(|i| !keep.contains(i)) {
        eigenvectors[(i, col)] = T::one();
        col += 1;
    }
    SymmetricEigen {
        eigenvectors,
        eigenvalues,
    }
}

/// Largest singular value.
pub fn induced_two_norm<T: Scalar>(a: &DMatrix<T>) -> T {
    if a.iter().all(|v| *v == T::zero()) {
        return T::zero();
    }
    let gram = a.transpose() * a;
    let eig = symmetric_eigen(&gram);
    let top = eig
        .eigenvalues
        .iter()
        .fold(T::zero(), |m, v| if *v > m { *v } else { m });
    top.sqrt()
}

/// Spectral radius `rho(A)`.
///
/// Nonnegative matrices are split into strongly connected components; each
/// irreducible block goes through a shifted power iteration with a
/// Collatz-Wielandt bracket. Signed matrices, and blocks where the
/// iteration stalls, fall back to a real Schur decomposition.
pub fn spectral_radius<T: Scalar>(a: &DMatrix<T>) -> Result<T> {
    if a.iter().all(|v| *v == T::zero()) {
        return Ok(T::zero());
    }
    if !a.iter().all(|v| *v >= T::zero()) {
        return schur_radius(a);
    }
    let mut rho = T::zero();
    for comp in strongly_connected_components(a) {
        let block = if comp.len() == a.nrows() {
            a.clone()
        } else {
            DMatrix::from_fn(comp.len(), comp.len(), |i, j| a[(comp[i], comp[j])])
        };
        if comp.len() == 1 {
            rho = rho.max(block[(0, 0)]);
            continue;
        }
        let r = match nonnegative_radius(&block) {
            Some(r) => r,
            None => schur_radius(&block)?,
        };
        rho = rho.max(r);
    }
    Ok(rho)
}

fn schur_radius<T: Scalar>(a: &DMatrix<T>) -> Result<T> {
    let n = a.nrows();
    let eps = T::default_epsilon() * T::from_usize_lossy(n.max(1));
    let schur = Schur::try_new(a.clone(), eps, 1000 * n.max(10))
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let eig = schur.complex_eigenvalues();
    Ok(eig
        .iter()
        .map(|c| (c.re * c.re + c.im * c.im).sqrt())
        .fold(T::zero(), |m, v| if v > m { v } else { m }))
}

fn nonnegative_radius<T: Scalar>(a: &DMatrix<T>) -> Option<T> {
    let n = a.nrows();
    let shifted = a + DMatrix::<T>::identity(n, n);
    let mut x = DVector::from_element(n, T::one() / T::from_usize_lossy(n).sqrt());
    let tol = T::default_epsilon() * T::lit(64.0);
    for _ in 0..POWER_ITERATIONS {
        let y = &shifted * &x;
        let mut lo = T::max_value().unwrap_or_else(T::one);
        let mut hi = T::zero();
        let mut all_positive = true;
        for i in 0..n {
            if x[i] <= T::zero() {
                all_positive = false;
                break;
            }
            let ratio = y[i] / x[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        if all_positive && hi - lo <= tol * hi {
            return Some(((hi + lo) * T::lit(0.5) - T::one()).max(T::zero()));
        }
        let norm = y.norm();
        if norm == T::zero() {
            return None;
        }
        x = y / norm;
    }
    None
}

/// Unit-norm eigenvector for the dominant eigenvalue of a nonnegative
/// matrix, by power iteration. `None` if the iteration does not settle.
pub fn perron_vector<T: Scalar>(a: &DMatrix<T>) -> Option<DVector<T>> {
    let n = a.nrows();
    let mut x = DVector::from_element(n, T::one() / T::from_usize_lossy(n).sqrt());
    let tol = T::default_epsilon().sqrt() * T::lit(1e-3);
    for _ in 0..POWER_ITERATIONS {
        let y = a * &x;
        let norm = y.norm();
        if norm == T::zero() {
            return None;
        }
        let y = y / norm;
        let delta = (&y - &x).amax();
        x = y;
        if delta <= tol {
            return Some(x);
        }
    }
    None
}

/// Out-neighbour lists of the graph whose edge `j -> i` exists when
/// `a[(i, j)] != 0`.
pub fn out_neighbors<T: Scalar>(a: &DMatrix<T>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    (0..n)
        .map(|j| (0..n).filter(|&i| a[(i, j)] != T::zero()).collect())
        .collect()
}

fn reach(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let lu = level[u].expect("queued nodes have a level");
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = Some(lu + 1);
                queue.push_back(v);
            }
        }
    }
    level
}

pub fn is_strongly_connected<T: Scalar>(a: &DMatrix<T>) -> bool {
    let out = out_neighbors(a);
    let mut inc = vec![Vec::new(); out.len()];
    for (u, vs) in out.iter().enumerate() {
        for &v in vs {
            inc[v].push(u);
        }
    }
    reach(&out, 0).iter().all(Option::is_some) && reach(&inc, 0).iter().all(Option::is_some)
}

/// Period of a strongly connected graph (gcd of its cycle lengths).
/// Returns 0 for graphs without cycles reachable from node 0.
pub fn period<T: Scalar>(a: &DMatrix<T>) -> usize {
    let out = out_neighbors(a);
    let level = reach(&out, 0);
    let mut g = 0usize;
    for (u, vs) in out.iter().enumerate() {
        let Some(lu) = level[u] else { continue };
        for &v in vs {
            let lv = level[v].expect("successor of a reached node is reached");
            g = gcd(g, (lu + 1).abs_diff(lv));
        }
    }
    g
}

pub fn is_primitive<T: Scalar>(a: &DMatrix<T>) -> bool {
    a.iter().all(|v| *v >= T::zero()) && is_strongly_connected(a) && period(a) == 1
}

/// Strongly connected components of the graph with edges `j -> i` for
/// `a[(i, j)] != 0` (Kosaraju, iterative).
pub fn strongly_connected_components<T: Scalar>(a: &DMatrix<T>) -> Vec<Vec<usize>> {
    let out = out_neighbors(a);
    let n = out.len();
    let mut inc = vec![Vec::new(); n];
    for (u, vs) in out.iter().enumerate() {
        for &v in vs {
            inc[v].push(u);
        }
    }
    let mut visited = vec![false; n];
    let mut finish = Vec::with_capacity(n);
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((u, next)) = stack.pop() {
            if next < out[u].len() {
                stack.push((u, next + 1));
                let v = out[u][next];
                if !visited[v] {
                    visited[v] = true;
                    stack.push((v, 0));
                }
            } else {
                finish.push(u);
            }
        }
    }
    let mut comp_of = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for &root in finish.iter().rev() {
        if comp_of[root] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![root];
        comp_of[root] = id;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in &inc[u] {
                if comp_of[v] == usize::MAX {
                    comp_of[v] = id;
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_norm_of_small_block_in_large_zero_matrix() {
        let mut d = DMatrix::<f64>::zeros(50, 50);
        let block = [
            [0.0159, 0.0141, 0.0011],
            [0.0050, 0.0130, 0.0137],
            [0.0002, 0.0090, 0.0121],
        ];
        let idx = [1, 29, 43];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                d[(i, j)] = block[a][b];
            }
        }
        let expected = d.clone().singular_values().max();
        let got = induced_two_norm(&d);
        assert!(
            (got - expected).abs() <= 1e-12 * expected,
            "{got} vs {expected}"
        );
        let eig = symmetric_eigen(&(d.transpose() * &d));
        let recon = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues)
            * eig.eigenvectors.transpose();
        assert!((recon - d.transpose() * &d).amax() < 1e-15);
    }

    #[test]
    fn radius_of_simple_matrices() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0f64, 1.0]));
        assert!((spectral_radius(&d).unwrap() - 3.0).abs() < 1e-10);
        let mut chain = DMatrix::<f64>::zeros(4, 4);
        for i in 1..4 {
            chain[(i, i - 1)] = 1.0;
        }
        assert_eq!(spectral_radius(&chain).unwrap(), 0.0);
        assert_eq!(strongly_connected_components(&chain).len(), 4);
        // rotation-like signed matrix
        let r = DMatrix::from_row_slice(2, 2, &[0.0f64, -2.0, 2.0, 0.0]);
        assert!((spectral_radius(&r).unwrap() - 2.0).abs() < 1e-10);
        // directed 3-cycle is periodic but has radius 1
        let c = DMatrix::from_row_slice(3, 3, &[0.0f64, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!((spectral_radius(&c).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn connectivity_and_period() {
        let c = DMatrix::from_row_slice(3, 3, &[0.0f64, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(is_strongly_connected(&c));
        assert_eq!(period(&c), 3);
        assert!(!is_primitive(&c));
        let mut loops = c.clone();
        loops[(0, 0)] = 1.0;
        assert_eq!(period(&loops), 1);
        assert!(is_primitive(&loops));
        let mut chain = DMatrix::<f64>::zeros(3, 3);
        chain[(1, 0)] = 1.0;
        chain[(2, 1)] = 1.0;
        assert!(!is_strongly_connected(&chain));
    }

    #[test]
    fn two_norm_of_diagonal() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0f64, 3.0, -1.0, 0.0]);
        assert!((induced_two_norm(&d) - 3.0).abs() < 1e-12);
    }
}
