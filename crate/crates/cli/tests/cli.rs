//! End-to-end smoke tests of the binary: exit codes, output contracts, and
//! replay determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bootperc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bootperc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn classify_reports_regime_and_fixed_point() {
    let out = bootperc(&[
        "classify", "--r", "2", "--gamma", "0.6", "--nu", "1", "--mu", "1", "--alpha1", "0.56",
        "--alpha2", "0.1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("resolved config"), "prints config first");
    assert!(text.contains("regime=Sub"));
    assert!(text.contains("fixed_point:"));
}

#[test]
fn phase_curve_neutral_rows_sum_to_half() {
    let out = bootperc(&["phase-curve", "--r", "2", "--gamma", "1", "--points", "64"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# r=2 gamma=1"));
    let mut rows = 0;
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("y1") || !line.contains(',') {
            continue;
        }
        let parts: Vec<f64> = line.split(',').filter_map(|x| x.parse().ok()).collect();
        if parts.len() == 3 {
            assert!((parts[1] + parts[2] - 0.5).abs() < 1e-9, "row {line}");
            rows += 1;
        }
    }
    assert!(rows > 30);
}

#[test]
fn unknown_flag_exits_one() {
    let out = bootperc(&["classify", "--nonsense", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_parameters_exit_two() {
    let out = bootperc(&[
        "classify", "--r", "2", "--gamma=-1", "--alpha1", "0.5", "--alpha2", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = bootperc(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn run_er_preset_prints_reference() {
    let out = bootperc(&[
        "run", "--preset", "er", "--replicas", "10", "--n1", "20000", "--g1", "25", "--seed", "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("1.171573"), "ER reference value shown");
    assert!(text.contains("median |G|/g1"));
}

#[test]
fn sweep_is_replayable_and_writes_manifest() {
    let dir = std::env::temp_dir().join(format!("bootperc-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("cfg.json");
    std::fs::write(
        &config,
        r#"{
            "name": "cli-smoke",
            "asym": { "r": 2, "gamma": 0.5 },
            "finite": { "target_g1": 10.0, "n1": 3000 },
            "grid": { "kind": "alpha", "alpha1": [0.2], "alpha2": [0.2, 0.5] },
            "replicas": 8,
            "master_seed": 5
        }"#,
    )
    .unwrap();
    let csv1: PathBuf = dir.join("a.csv");
    let csv2: PathBuf = dir.join("b.csv");
    for csv in [&csv1, &csv2] {
        let out = bootperc(&[
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&csv1).unwrap();
    let b = std::fs::read(&csv2).unwrap();
    assert_eq!(a, b, "reruns are bit-identical");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("a.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["rng_algorithm"], "splitmix64-ctr/1");
    assert_eq!(manifest["master_seed"], 5);
    assert!(manifest["config_hash"].as_str().unwrap().len() == 16);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn generate_probability_one_triangle() {
    let dir = std::env::temp_dir().join(format!("bootperc-cli-gen-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("g.txt");
    let out = bootperc(&[
        "generate", "--n1", "3", "--p1", "1.0", "--out", path.to_str().unwrap(), "--seed", "9",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "# sbm n1=3 n2=0 seed=9\n0 1\n0 2\n1 2\n");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bounds_subcommand_reports_domination() {
    let out = bootperc(&["bounds", "--m", "100", "--q", "0.5", "--k", "70"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("bound_holds=true"));
    let bad = bootperc(&["bounds", "--m", "100", "--q", "0.5", "--k", "30"]);
    assert_eq!(bad.status.code(), Some(2), "direction mismatch is a runtime error");
}
