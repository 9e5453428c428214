mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use tvsched::scheduling::DEFAULT_BUDGET;
use tvsched::{
    chi_report, generate, induction, normalize_spectral, transmission, ClassLabel, Family,
    GeneratorConfig, MetricKind, RawConnectivity, WeightMode,
};

fn random_raw(n: usize, density: f64, seed: u64) -> RawConnectivity<f64> {
    let mut r = rng(seed);
    let c = DMatrix::from_fn(n, n, |_, _| {
        if r.random::<f64>() < density {
            r.random::<f64>() * 3.0
        } else {
            0.0
        }
    });
    RawConnectivity::new(c, true).unwrap()
}

proptest! {
    #![proptest_config(prop_config(64))]

    #[test]
    fn transmission_is_row_stochastic(seed in 0u64..100_000, n in 1usize..30, density in 0.0f64..1.0) {
        let raw = random_raw(n, density, seed);
        let a = transmission(&raw);
        for i in 0..n {
            let sum: f64 = a.matrix().row(i).iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            let empty = raw.c.row(i).iter().all(|v| *v == 0.0);
            for j in 0..n {
                let expect_nonzero = if empty { i == j } else { raw.c[(i, j)] != 0.0 };
                prop_assert_eq!(a.matrix()[(i, j)] != 0.0, expect_nonzero);
            }
        }
    }

    #[test]
    fn induction_is_nonnegative(seed in 0u64..100_000, n in 1usize..12, tau in 0.01f64..1.0, leak in 0.0f64..1.0) {
        let raw = random_raw(n, 0.4, seed);
        let a = induction(&raw, tau, leak).unwrap();
        prop_assert!(a.matrix().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn spectral_normalisation_reaches_unit_radius(seed in 0u64..100_000, n in 2usize..15) {
        let net = random_matrix(n, 2.0, seed);
        let normalized = normalize_spectral(&net).unwrap();
        // positive matrix: plain power iteration converges
        let mut x = DVector::from_element(n, 1.0);
        let mut rho = 0.0;
        for _ in 0..500 {
            let y = normalized.matrix() * &x;
            rho = y.norm() / x.norm();
            x = y;
        }
        prop_assert!((rho - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn induction_creates_long_range_couplings() {
    let mut c = DMatrix::zeros(3, 3);
    c[(1, 0)] = 1.0;
    c[(2, 1)] = 1.0;
    let a = induction(&RawConnectivity::new(c.clone(), true).unwrap(), 1.0, 1.0).unwrap();
    assert_eq!(c[(2, 0)], 0.0);
    assert!(a.matrix()[(2, 0)] > 0.0);
    // small tau: finite difference against the generator
    let tau = 1e-6;
    let a = induction(&RawConnectivity::new(c.clone(), true).unwrap(), tau, 1.0).unwrap();
    let derivative = (a.matrix() - DMatrix::identity(3, 3)) / tau;
    let generator = c - DMatrix::identity(3, 3);
    assert!((derivative - generator).amax() < 1e-5);
}

#[test]
fn generators_are_byte_deterministic() {
    let families = [
        Family::ErdosRenyi { p: 0.2 },
        Family::BarabasiAlbert { m_a: 3 },
        Family::WattsStrogatz {
            k_ring: 4,
            beta: 0.2,
        },
    ];
    for family in families {
        let cfg = GeneratorConfig::new(family, 40)
            .with_seed(99)
            .with_weights(WeightMode::UniformRandom);
        let a = generate::<f64>(&cfg).unwrap();
        let b = generate::<f64>(&cfg).unwrap();
        let bytes = |m: &DMatrix<f64>| m.iter().flat_map(|v| v.to_le_bytes()).collect::<Vec<u8>>();
        assert_eq!(bytes(&a.c), bytes(&b.c));
    }
}

#[test]
fn ring_and_star_are_class_one_after_transmission() {
    for (family, n) in [(Family::Ring, 9), (Family::Star, 8)] {
        let net = transmission(&generate::<f64>(&GeneratorConfig::new(family, n)).unwrap());
        let report = chi_report(&net, 10, MetricKind::Trace, 1, DEFAULT_BUDGET).unwrap();
        assert!(report.chi.abs() <= 1e-9, "{family:?}: chi = {}", report.chi);
        assert_eq!(report.class_label, ClassLabel::I);
        if family == Family::Star {
            assert_eq!(report.schedule_tv.step(0)[0], 0);
        }
    }
}

#[test]
fn homogeneous_line_is_class_one_with_center_control() {
    let net = generate::<f64>(&GeneratorConfig::new(Family::Line, 7))
        .unwrap()
        .as_network();
    let report = chi_report(&net, 10, MetricKind::Trace, 1, DEFAULT_BUDGET).unwrap();
    assert!(report.chi.abs() <= 1e-9);
    assert!(report.schedule_ti.steps().iter().all(|s| s == &vec![3]));
}

#[test]
fn transmission_line_is_scale_heterogeneous() {
    // row normalisation halves the weights leaving interior nodes, so the
    // end nodes' neighbours lead at short scales
    let net = transmission(&generate::<f64>(&GeneratorConfig::new(Family::Line, 7)).unwrap());
    let report = chi_report(&net, 10, MetricKind::Trace, 1, DEFAULT_BUDGET).unwrap();
    assert!(
        (report.chi - 0.0273188998138).abs() < 1e-9,
        "chi = {}",
        report.chi
    );
    assert_eq!(report.schedule_ti.step(0), &[1]);
}
