mod common;

use common::*;
use tvsched::linalg::induced_two_norm;
use tvsched::manipulation::{constrained_tvcs_trace, BISECTION_TOLERANCE};
use tvsched::{
    find_min_manipulation, profile, tvcs_trace, DirectionTemplates, ManifestProblem, NetworkMatrix,
};

fn recheck(net: &NetworkMatrix<f64>, manifest: &[usize], horizon: usize) -> bool {
    let p = profile(net, horizon).unwrap();
    p.argmax_seq[1..].iter().all(|r| manifest.contains(r))
}

fn random_manifest(n: usize, size: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut rng(seed));
    nodes.truncate(size);
    nodes
}

#[test]
fn constrained_schedule_reductions() {
    for seed in 0..40 {
        let net = random_transmission(10, 0.4, seed);
        let all: Vec<usize> = (0..10).collect();
        let free = tvcs_trace(&net, 8, 1).unwrap();
        let full = constrained_tvcs_trace(&net, &all, 8).unwrap();
        assert_eq!(full.schedule, free.schedule);
        assert!((full.value - free.value).abs() <= 1e-12 * free.value);

        let p = profile(&net, 8).unwrap();
        let j = (seed % 10) as usize;
        let single = constrained_tvcs_trace(&net, &[j], 8).unwrap();
        let expected: f64 = (0..8).map(|k| p.r_values[(j, k)]).sum();
        assert!((single.value - expected).abs() <= 1e-12 * expected);

        let half = random_manifest(10, 5, seed);
        let bounded = constrained_tvcs_trace(&net, &half, 8).unwrap();
        assert!(bounded.value <= free.value * (1.0 + 1e-12));
        assert!(bounded
            .schedule
            .steps()
            .iter()
            .all(|s| half.contains(&s[0])));
    }
}

#[test]
fn manifest_already_dominant_needs_nothing() {
    let net = random_transmission(8, 0.5, 7);
    let all: Vec<usize> = (0..8).collect();
    let result = find_min_manipulation(&ManifestProblem::new(net, &all, 6).unwrap(), 1).unwrap();
    assert_eq!(result.relative_norm, 0.0);
    assert!(result.all_manifest);
    assert!(result.delta.iter().all(|v| *v == 0.0));
}

#[test]
fn small_manifests_succeed_with_certificates() {
    let seeds = 30;
    let mut successes = 0;
    for seed in 0..seeds {
        let net = random_transmission(20, 0.3, 1000 + seed);
        let manifest = random_manifest(20, 2, seed);
        let problem = ManifestProblem::new(net.clone(), &manifest, 10).unwrap();
        let result = find_min_manipulation(&problem, seed).unwrap();
        // delta lives on the manifest block
        for i in 0..20 {
            for j in 0..20 {
                if !(manifest.contains(&i) && manifest.contains(&j)) {
                    assert_eq!(result.delta[(i, j)], 0.0);
                }
            }
        }
        if !result.all_manifest {
            continue;
        }
        successes += 1;
        assert!(result.relative_norm <= 1.0);
        let manipulated = NetworkMatrix::signed(net.matrix() + &result.delta).unwrap();
        assert!(
            recheck(&manipulated, &manifest, 10),
            "seed {seed}: certificate failed"
        );

        // one bisection step below the reported scale must fail
        let scale = induced_two_norm(&result.delta);
        if scale > 0.0 {
            let tol = BISECTION_TOLERANCE * induced_two_norm(net.matrix());
            let shrunk = &result.delta * ((scale - tol) / scale);
            let below = NetworkMatrix::signed(net.matrix() + shrunk).unwrap();
            assert!(!recheck(&below, &manifest, 10), "seed {seed}: not minimal");
        }
    }
    assert!(
        successes * 10 >= seeds * 9,
        "success rate {successes}/{seeds}"
    );
}

#[test]
fn more_trials_never_hurt() {
    for seed in 0..10 {
        let net = random_transmission(15, 0.3, 2000 + seed);
        let manifest = random_manifest(15, 3, seed);
        let base = ManifestProblem::new(net, &manifest, 8).unwrap();
        let few = find_min_manipulation(&base.clone().with_trials(8), seed).unwrap();
        let many = find_min_manipulation(&base.with_trials(32), seed).unwrap();
        if few.all_manifest {
            assert!(many.all_manifest);
            assert!(many.relative_norm <= few.relative_norm);
        }
    }
}

#[test]
fn acyclic_directions_fail_more_often() {
    let mut mixed_wins = 0usize;
    let mut acyclic_wins = 0usize;
    for seed in 0..30 {
        let net = random_transmission(20, 0.3, 3000 + seed);
        let manifest = random_manifest(20, 2, seed);
        let base = ManifestProblem::new(net, &manifest, 10).unwrap();
        let mixed = find_min_manipulation(&base.clone(), seed).unwrap();
        let acyclic =
            find_min_manipulation(&base.with_templates(DirectionTemplates::AcyclicOnly), seed)
                .unwrap();
        mixed_wins += mixed.all_manifest as usize;
        acyclic_wins += acyclic.all_manifest as usize;
    }
    assert!(
        acyclic_wins < mixed_wins,
        "acyclic {acyclic_wins} vs mixed {mixed_wins}"
    );
}

#[test]
fn rejects_empty_manifest() {
    let net = random_transmission(5, 0.5, 1);
    assert!(ManifestProblem::new(net, &[], 5).is_err());
}
