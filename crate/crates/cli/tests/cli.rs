use std::path::Path;
use std::process::{Command, Output};

use nalgebra::DMatrix;
use proptest::prelude::*;
use tvsched::ManipulationSweepConfig;
use tvsched_cli::sweep::{
    grid_sweep, manipulation_table, random_ensemble, EnsembleConfig, FamilyKind, GridSweepConfig,
};
use tvsched_cli::{exit, format_edge_list, parse_edge_list, EdgeListOptions, IndexBase};

fn tvsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn sparse_matrix(n: usize, entries: &[(usize, usize, f64)], symmetric: bool) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(n, n);
    for &(i, j, w) in entries {
        let (i, j) = (i % n, j % n);
        c[(i, j)] = w;
        if symmetric {
            c[(j, i)] = w;
        }
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, rng_seed: proptest::test_runner::RngSeed::Fixed(11), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn edge_list_round_trip(
        n in 1usize..15,
        entries in proptest::collection::vec((0usize..15, 0usize..15, 1e-6f64..1e3), 0..40),
        directed in any::<bool>(),
        one_based in any::<bool>(),
    ) {
        let c = sparse_matrix(n, &entries, !directed);
        let base = if one_based { IndexBase::One } else { IndexBase::Zero };
        let text = format_edge_list(&c, directed, base);
        let back = parse_edge_list(&text, EdgeListOptions { directed, base, nodes: None }).unwrap();
        prop_assert_eq!(back.c, c);
    }
}

#[test]
fn chain_report_contains_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(
        dir.path(),
        "chain.txt",
        "# directed chain\n1 2\n2 3\n3 4\n4 5\n",
    );
    let text = stdout(&tvsched(&[
        "chi",
        &chain,
        "--one-based",
        "--method",
        "none",
        "--k",
        "5",
    ]));
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    for (metric, expected) in [
        ("trace", 5.0),
        ("trinv", 0.2),
        ("det", 1.0),
        ("mineig", 1.0),
    ] {
        let entry = &report["chi"][metric];
        assert_eq!(entry["f_tv"].as_f64().unwrap(), expected, "{metric}");
        assert_eq!(entry["f_ti"].as_f64().unwrap(), expected, "{metric}");
        assert_eq!(entry["chi"].as_f64().unwrap(), 0.0, "{metric}");
    }
    assert!(report["provenance"]["formulas"]["transmission"].is_string());
    assert_eq!(report["config"]["horizon"], 5);
}

#[test]
fn reports_are_byte_identical_and_match_golden() {
    let args = [
        "chi", "--family", "line", "--n", "7", "--k", "10", "--metric", "trace", "--metric",
        "mineig",
    ];
    let first = stdout(&tvsched(&args));
    let second = stdout(&tvsched(&args));
    assert_eq!(first, second);
    let golden = include_str!("golden/line7_chi.json").replace(
        "\"version\": \"0.1.0\"",
        &format!("\"version\": \"{}\"", env!("CARGO_PKG_VERSION")),
    );
    assert_eq!(first, golden);
}

#[test]
fn worker_count_does_not_change_output() {
    let args = |w: &'static str| {
        vec![
            "sweep",
            "grid",
            "--family",
            "ws",
            "--sizes",
            "12,20",
            "--params",
            "0.1,0.5",
            "--replicates",
            "6",
            "--seed",
            "9",
            "--workers",
            w,
        ]
    };
    assert_eq!(stdout(&tvsched(&args("1"))), stdout(&tvsched(&args("4"))));

    let cfg = GridSweepConfig::new(FamilyKind::Ba, vec![15, 25], vec![1.0, 2.0], 8, 5);
    assert_eq!(
        grid_sweep(&cfg, Some(1)).unwrap(),
        grid_sweep(&cfg, Some(3)).unwrap()
    );
    let cfg = EnsembleConfig {
        count: 40,
        ..EnsembleConfig::reduced(4)
    };
    assert_eq!(
        random_ensemble(&cfg, Some(1)).unwrap(),
        random_ensemble(&cfg, Some(4)).unwrap()
    );
    let cfg = ManipulationSweepConfig::new(12, vec![0.2, 0.5], 3, 6, 2);
    assert_eq!(
        manipulation_table(&cfg, Some(1)).unwrap(),
        manipulation_table(&cfg, Some(4)).unwrap()
    );
}

#[test]
fn zero_replicates_emit_header_only() {
    let text = stdout(&tvsched(&[
        "sweep",
        "grid",
        "--family",
        "er",
        "--sizes",
        "20",
        "--params",
        "0.3",
        "--replicates",
        "0",
    ]));
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("family,n,param,replicates,mean_chi,std_chi,class_v_fraction"));
    let text = stdout(&tvsched(&[
        "sweep",
        "manipulation",
        "--n",
        "10",
        "--replicates",
        "1",
        "--fractions",
        "1.0",
    ]));
    assert_eq!(
        text.lines().next().unwrap(),
        "fraction,mean_norm,std_norm,mean_ratio,std_ratio,success_rate"
    );
    assert_eq!(text.lines().nth(1).unwrap(), "1,0,0,1,0,1");
}

#[test]
fn errors_map_to_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(dir.path(), "chain.txt", "1 2\n2 3\n3 4\n4 5\n");
    let bad = write(dir.path(), "bad.txt", "# header\n1 2\n2 x 1\n");
    let negative = write(dir.path(), "neg.txt", "1 2 -0.5\n");
    let missing = dir.path().join("missing.txt").display().to_string();

    let out = tvsched(&["chi", &missing]);
    assert_eq!(out.status.code(), Some(exit::IO));

    let out = tvsched(&["chi", &bad, "--one-based"]);
    assert_eq!(out.status.code(), Some(exit::PARSE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = tvsched(&["chi", &negative]);
    assert_eq!(out.status.code(), Some(exit::PARSE));

    let out = tvsched(&["chi", &chain, "--one-based", "--nodes", "3"]);
    assert_eq!(out.status.code(), Some(exit::DIMENSION));

    let out = tvsched(&[
        "schedule",
        &chain,
        "--one-based",
        "--method",
        "none",
        "--k",
        "2",
        "--target",
        "0,0,0,0,1",
    ]);
    assert_eq!(out.status.code(), Some(exit::CONTROLLABILITY));

    let out = tvsched(&[
        "schedule",
        "--family",
        "er",
        "--n",
        "12",
        "--k",
        "10",
        "--metric",
        "det",
        "--solver",
        "exhaustive",
        "--budget",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(exit::BUDGET));

    let codes = [
        exit::IO,
        exit::PARSE,
        exit::DIMENSION,
        exit::CONTROLLABILITY,
        exit::BUDGET,
    ];
    for (i, a) in codes.iter().enumerate() {
        assert_ne!(*a, 0);
        assert!(codes[i + 1..].iter().all(|b| a != b));
    }
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ba.txt");
    let out = tvsched(&[
        "generate",
        "--family",
        "ba",
        "--n",
        "10",
        "--m-a",
        "2",
        "--seed",
        "4",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let raw = parse_edge_list(
        &text,
        EdgeListOptions {
            directed: false,
            ..EdgeListOptions::default()
        },
    )
    .unwrap();
    assert_eq!(raw.n(), 10);
    // complete core of three nodes plus two links for each later node
    assert_eq!(raw.edge_count(), 3 + 2 * 7);
}

#[test]
fn steering_report_reaches_target() {
    let text = stdout(&tvsched(&[
        "schedule",
        "--family",
        "line",
        "--n",
        "4",
        "--method",
        "none",
        "--k",
        "6",
        "--metric",
        "trinv",
        "--target",
        "1,0.5,0,0",
    ]));
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let steering = &report["schedule"]["trinv"]["steering"];
    assert!(steering["energy"].as_f64().unwrap() > 0.0);
    assert_eq!(steering["inputs"].as_array().unwrap().len(), 6);
}
