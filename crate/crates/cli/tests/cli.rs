use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qida_core::layers::LayerPlan;
use qida_core::qmi::QmiMatrix;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn qida(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qida")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn preset(name: &str) -> String {
    configs().join(format!("{name}.toml")).to_string_lossy().into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn ham_reports_energies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = qida(&["ham", "--config", &preset("3x4"), "--out", out, "--self-check"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("E_exact  -6.691680"), "{text}");
    assert!(text.contains("E_neel   -4.250000"), "{text}");
    let o = qida(&["ham", "--config", &preset("3x3"), "--out", out]);
    assert!(stdout(&o).contains("edges    12 "));
    let o = qida(&["ham", "--config", &preset("3x4_h2"), "--out", out]);
    assert!(stdout(&o).contains("E_exact  -9.508473"));
}

#[test]
fn qmi_top_pairs_and_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qida(&["qmi", "--config", &preset("3x4"), "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    let q = QmiMatrix::from_csv(&fs::read_to_string(tmp.path().join("qmi_normalized.csv")).unwrap()).unwrap();
    let mut pairs = q.pairs();
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut top: Vec<(usize, usize)> = pairs[..4].iter().map(|p| (p.0, p.1)).collect();
    top.sort_unstable();
    assert_eq!(top, vec![(0, 1), (2, 3), (8, 9), (10, 11)]);
    for i in 0..12 {
        assert_eq!(q.get(i, i), 0.0);
        for j in 0..12 {
            assert_eq!(q.get(i, j), q.get(j, i));
        }
    }
    assert!(tmp.path().join("qmi.csv").exists());
}

#[test]
fn product_ground_state_has_zero_qmi() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[lattice]\nrows = 2\ncols = 2\ncoupling = 0.0\nfield = 1.0\n");
    let o = qida(&["qmi", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let q = QmiMatrix::from_csv(&fs::read_to_string(tmp.path().join("qmi.csv")).unwrap()).unwrap();
    assert!(q.values.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn layer_plans_from_presets() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let plan_of = |name: &str| {
        let o = qida(&["layers", "--config", &preset(name), "--out", out]);
        assert!(o.status.success());
        LayerPlan::from_text(&fs::read_to_string(tmp.path().join("layers.txt")).unwrap()).unwrap().canonical()
    };
    let p = plan_of("2x6");
    assert_eq!(p.qida_layers[0], vec![(0, 6), (1, 7), (2, 8), (3, 9), (4, 10), (5, 11)]);
    assert_eq!(plan_of("3x4").qida_layers.len(), 4);
    assert_eq!(plan_of("3x4_h2").qida_layers.len(), 3);
}

const SMALL: &str = "name = \"small\"\n[lattice]\nrows = 2\ncols = 3\n[run]\nansatze = [\"so4\", \"cx\", \"ladder:2\"]\nruns = 2\nseed = 11\n";

#[test]
fn run_is_deterministic_and_report_matches() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let o = qida(&["run", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(summary, fs::read_to_string(b.join("summary.csv")).unwrap());
    assert_eq!(fs::read_to_string(a.join("runs.jsonl")).unwrap(), fs::read_to_string(b.join("runs.jsonl")).unwrap());
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.starts_with("Lattice,Ansatz,E_avg,E_best,AQE_avg,RQE_avg,AQE_best,RQE_best,MED,MAED,MRED"));

    let o = qida(&["report", a.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), summary);

    // two systems in one report
    let o = qida(&["report", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let dir = tmp.path().join("s");
    let o = qida(&["run", "--config", &cfg, "--out", dir.to_str().unwrap(), "--seed", "40", "--runs", "1", "--threads", "1"]);
    assert!(o.status.success());
    let runs = fs::read_to_string(dir.join("runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 3);
    assert!(runs.lines().all(|l| l.contains("\"seed\":40")));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();
    // missing file and invalid contents are config errors
    assert_eq!(qida(&["ham", "--config", "/nonexistent.toml", "--out", out]).status.code(), Some(1));
    let bad = write_config(tmp.path(), "[lattice]\nrows = 2\ncols = 2\n[run]\nruns = 0\n");
    assert_eq!(qida(&["ham", "--config", &bad, "--out", out]).status.code(), Some(1));
    assert_eq!(qida(&["report", tmp.path().join("empty").to_str().unwrap()]).status.code(), Some(1));

    let wrong = write_config(tmp.path(), "[lattice]\nrows = 2\ncols = 2\n[expected]\ne_exact = -10.0\n");
    assert_eq!(qida(&["ham", "--config", &wrong, "--out", out]).status.code(), Some(0));
    let o = qida(&["ham", "--config", &wrong, "--out", out, "--self-check"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("E_exact"));

    // a 2x2 ladder cannot reach 99.9% of the exact energy from a bad cap
    let strict = write_config(
        tmp.path(),
        "[lattice]\nrows = 2\ncols = 2\n[run]\nansatze = [\"ladder:1\"]\nruns = 1\nmax_iter = 1\n[expected]\naqe_avg_min = { \"ladder:1\" = 99.9 }\n",
    );
    assert_eq!(qida(&["run", "--config", &strict, "--out", out, "--self-check"]).status.code(), Some(3));
}
