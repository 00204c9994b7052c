use std::path::Path;
use std::process::{Command, Output};

use yrast_cli::schema::{
    parse, render, BranchRow, FidelityRow, HistogramRow, ProfileRow, Row, TrajectoryRow,
};

fn yrast(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yrast"))
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = yrast(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read<T: Row>(path: &Path) -> (Vec<String>, Vec<T>) {
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn branches_file_has_provenance_and_known_values() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(
        dir.path(),
        &["--seed", "3", "branches", "--n", "8", "--kmax", "4"],
    );
    assert!(stdout.contains("branches.csv"));
    let (comments, rows) = read::<BranchRow>(&dir.path().join("branches.csv"));
    assert_eq!(
        comments[0],
        format!("# yrast {}", env!("CARGO_PKG_VERSION"))
    );
    assert_eq!(comments[1], "# command branches");
    assert!(comments[2].starts_with("# config_sha256 ") && comments[2].len() == 16 + 64);
    assert_eq!(comments[3], "# seed 3");
    assert_eq!(rows.len(), 5);
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((rows[4].yrast - 8.0 * pi2).abs() < 1e-9);
    assert!((rows[4].elementary - 32.0 * pi2).abs() < 1e-9);
}

#[test]
fn csv_round_trips() {
    let rows = vec![
        HistogramRow {
            bin_left: 0.0,
            bin_right: 0.5,
            count: 3,
            density: 1.25,
        },
        HistogramRow {
            bin_left: 0.5,
            bin_right: 1.0,
            count: 0,
            density: 0.0,
        },
    ];
    let text = format!("# comment\n{}", render(&rows).unwrap());
    let (comments, back) = parse::<HistogramRow>(&text).unwrap();
    assert_eq!(comments, vec!["# comment"]);
    assert_eq!(back, rows);
    assert!(parse::<BranchRow>(&text).is_err());
}

#[test]
fn yrast_state_is_close_to_twin_fock_at_weak_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(
        dir.path(),
        &[
            "yrast",
            "--n",
            "8",
            "--k",
            "4",
            "--g",
            "0.08",
            "--kmax",
            "4",
            "--amplitudes",
        ],
    );
    let report: serde_json::Value = serde_json::from_str(
        stdout
            .lines()
            .take_while(|l| *l != "yrast.json")
            .collect::<Vec<_>>()
            .join("\n")
            .as_str(),
    )
    .unwrap();
    assert!(report["fidelity_with_free_yrast"].as_f64().unwrap() >= 0.995);
    assert_eq!(report["dimension"], 486);
    assert_eq!(report["top_amplitudes"][0]["state"], "|n0=4, n1=4>");
    assert_eq!(report["provenance"]["command"], "yrast");
    let text = std::fs::read_to_string(dir.path().join("yrast_amplitudes.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 487);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["nonsense"][..],
        &["yrast", "--n", "8"],
        &["conditional", "--state", "fock:x=1"],
        &["sample", "--state", "twin:N=5"],
        &["gpe", "--gn", "1", "--kavg", "0.3", "--grid", "1"],
        &["basis", "--n", "200", "--k", "100", "--kmax", "100"],
    ] {
        let out = yrast(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_1_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = yrast(
        dir.path(),
        &["gpe", "--gn", "1e5", "--kavg", "0.3", "--grid", "64"],
    );
    assert_eq!(out.status.code(), Some(1));
    let diag: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["status"], "error");
    assert_eq!(diag["exit_code"], 1);
    assert_eq!(diag["error"]["kind"], "NoSolution");
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "--seed",
        "11",
        "--threads",
        "1",
        "sample",
        "--state",
        "dicke:N=6,K=3",
        "--n-samples",
        "200",
        "--bins",
        "16",
        "--align",
        "--raw",
    ];
    ok(a.path(), &args);
    ok(b.path(), &args);
    for f in ["sample_hist.csv", "samples.csv", "sample.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let other = tempfile::tempdir().unwrap();
    let mut changed = args;
    changed[1] = "12";
    ok(other.path(), &changed);
    assert_ne!(
        std::fs::read(a.path().join("samples.csv")).unwrap(),
        std::fs::read(other.path().join("samples.csv")).unwrap()
    );
}

#[test]
fn conditional_with_explicit_positions() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "conditional",
            "--state",
            "fock:n0=2,n1=2",
            "--fixed",
            "0.1,0.4,0.7",
            "--grid",
            "128",
        ],
    );
    let (_, rows) = read::<ProfileRow>(&dir.path().join("conditional.csv"));
    assert_eq!(rows.len(), 128);
    let norm: f64 = rows.iter().map(|r| r.density).sum::<f64>() / 128.0;
    assert!((norm - 1.0).abs() < 1e-9);
    let report = json(&dir.path().join("conditional.json"));
    assert_eq!(report["fixed"].as_array().unwrap().len(), 3);
    let wrong = yrast(
        dir.path(),
        &["conditional", "--state", "fock:n0=2,n1=2", "--fixed", "0.1"],
    );
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn bohmian_writes_histograms_and_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "bohmian",
            "--state",
            "twin:N=4",
            "--n-real",
            "10",
            "--t-snapshots",
            "0.05,0.1",
            "--bins",
            "8",
        ],
    );
    let (_, h) = read::<HistogramRow>(&dir.path().join("bohmian_t0.05.csv"));
    assert_eq!(h.iter().map(|r| r.count).sum::<u64>(), 40);
    let (_, t) = read::<TrajectoryRow>(&dir.path().join("bohmian_trajectories.csv"));
    assert_eq!(t.len(), 10 * 3 * 4);
    let report = json(&dir.path().join("bohmian.json"));
    assert_eq!(report["completed"], 10);
}

#[test]
fn gpe_profile_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["gpe", "--gn", "10", "--kavg", "0.3", "--grid", "256"],
    );
    let (_, rows) = read::<ProfileRow>(&dir.path().join("gpe.csv"));
    let norm: f64 = rows.iter().map(|r| r.density).sum::<f64>() / 256.0;
    assert!((norm - 1.0).abs() < 1e-8);
    let report = json(&dir.path().join("gpe.json"));
    assert!(report["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(report["method"], "elliptic");
}

#[test]
fn small_sweep_and_figures() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "fidelity-sweep",
            "--ns",
            "4,6",
            "--xi",
            "0.5,0.2",
            "--kmax-limit",
            "4",
        ],
    );
    let (_, rows) = read::<FidelityRow>(&dir.path().join("fidelity_sweep.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.fidelity > 0.0 && r.fidelity <= 1.0));
    assert!(rows[0].fidelity > rows[1].fidelity);

    ok(dir.path(), &["fig", "--name", "fig3", "--n", "6"]);
    let manifest = json(&dir.path().join("fig3_manifest.json"));
    assert_eq!(manifest["artifacts"][0]["file"], "fig3_branches.csv");
    assert_eq!(manifest["artifacts"][0]["columns"][1], "E_elementary");

    ok(
        dir.path(),
        &["fig", "--name", "fig7", "--n", "8", "--samples", "30"],
    );
    let depths = json(&dir.path().join("fig7_N8_K2.json"));
    assert_eq!(depths["bound_violations"], 0);

    ok(
        dir.path(),
        &[
            "fig",
            "--name",
            "fig5",
            "--n",
            "8",
            "--samples",
            "50",
            "--bins",
            "8",
        ],
    );
    assert!(dir.path().join("fig5_N8_K4.csv").exists());
    assert!(dir.path().join("fig5_N8_K2_ideal.csv").exists());
}
