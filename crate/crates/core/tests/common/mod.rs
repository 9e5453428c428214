#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvsched::{generate, transmission, ControlSchedule, GeneratorConfig, NetworkMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense random nonnegative matrix with entries in [0, scale).
pub fn random_matrix(n: usize, scale: f64, seed: u64) -> NetworkMatrix<f64> {
    let mut r = rng(seed);
    NetworkMatrix::new(DMatrix::from_fn(n, n, |_, _| scale * r.random::<f64>())).unwrap()
}

/// Transmission-converted directed random network with uniform weights.
pub fn random_transmission(n: usize, p: f64, seed: u64) -> NetworkMatrix<f64> {
    let cfg = GeneratorConfig::erdos_renyi(n, p, seed).directed(true);
    transmission(&generate::<f64>(&cfg).unwrap())
}

pub fn random_schedule(n: usize, horizon: usize, m: usize, seed: u64) -> ControlSchedule {
    let mut r = rng(seed);
    let steps = (0..horizon)
        .map(|_| {
            let mut nodes: Vec<usize> = (0..n).collect();
            for i in 0..m {
                let j = r.random_range(i..n);
                nodes.swap(i, j);
            }
            nodes.truncate(m);
            nodes
        })
        .collect();
    ControlSchedule::new(steps).unwrap()
}

/// Term-by-term sum of `A^k B(K-1-k) B(K-1-k)^T (A^T)^k` with explicitly
/// built input matrices and powers recomputed from scratch for every term.
pub fn naive_gramian(a: &DMatrix<f64>, schedule: &ControlSchedule) -> DMatrix<f64> {
    let n = a.nrows();
    let horizon = schedule.horizon();
    let mut w = DMatrix::zeros(n, n);
    for k in 0..horizon {
        let mut ak = DMatrix::identity(n, n);
        for _ in 0..k {
            ak = &ak * a;
        }
        let nodes = schedule.step(horizon - 1 - k);
        let mut b = DMatrix::zeros(n, nodes.len());
        for (c, &node) in nodes.iter().enumerate() {
            b[(node, c)] = 1.0;
        }
        w += &ak * &b * b.transpose() * ak.transpose();
    }
    w
}

/// All `n^K` single-input schedules in lexicographic order.
pub fn all_schedules(n: usize, horizon: usize) -> Vec<Vec<usize>> {
    let total = n.pow(horizon as u32);
    (0..total)
        .map(|mut code| {
            let mut s = vec![0; horizon];
            for t in (0..horizon).rev() {
                s[t] = code % n;
                code /= n;
            }
            s
        })
        .collect()
}

pub fn random_vector(n: usize, seed: u64) -> DVector<f64> {
    let mut r = rng(seed);
    DVector::from_fn(n, |_, _| r.random::<f64>() * 2.0 - 1.0)
}

/// Property-test settings with a fixed seed so runs are reproducible.
pub fn prop_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x7653_6564),
        failure_persistence: None,
        ..Default::default()
    }
}
