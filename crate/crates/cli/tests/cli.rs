use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tlsme(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tlsme"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

const FIG2A: &str = r#"
name = "fig2a"
model = "lorentzian"
lambda = 25.0
delta = 0.01
detuning = 0.3
drive = 0.02
t_end = 10.0
n_steps = 10000
methods = ["exact", "tcl", "nz"]
"#;

fn column(csv: &str, method: &str, col: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|f| f[1] == method)
        .map(|f| f[col].parse().unwrap())
        .collect()
}

#[test]
fn run_writes_schema_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fig2a.toml", FIG2A);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = tlsme(&["run", &cfg, "--out", out.to_str().unwrap()], &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(
        text.lines().next().unwrap(),
        "t,method,sz,rho_ee_re,rho_eg_re,rho_eg_im,gamma,s,r_re,r_im,fidelity_vs_exact,min_eig,trace_dev"
    );
    assert_eq!(text.lines().count(), 1 + 3 * 10_001);

    let exact = column(&text, "exact", 2);
    for m in ["tcl", "nz"] {
        let other = column(&text, m, 2);
        let spread = exact
            .iter()
            .zip(&other)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(spread <= 0.02, "{m}: {spread}");
    }

    let tcl_row = text.lines().find(|l| l.contains(",tcl,")).unwrap();
    let fields: Vec<&str> = tcl_row.split(',').collect();
    assert!(fields[6..10].iter().all(|f| f.is_empty()));
    assert!(!fields[10].is_empty());

    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["regime"]["region"], "II");
    assert_eq!(summary["methods"].as_array().unwrap().len(), 3);
}

#[test]
fn nz_violation_is_flagged_for_fig3a() {
    let dir = tempfile::tempdir().unwrap();
    let o = tlsme(
        &["figure", "fig3a", "--out", dir.path().to_str().unwrap()],
        &[("TLSME_THREADS", "1")],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("fig3a_summary.json")).unwrap(),
    )
    .unwrap();
    let methods = summary["panels"][0]["methods"].as_array().unwrap();
    let physical = |m: &str| {
        methods
            .iter()
            .find(|x| x["method"] == m)
            .map(|x| x["physical"].as_bool().unwrap())
            .unwrap()
    };
    assert!(physical("exact"));
    assert!(!physical("nz"));
}

#[test]
fn config_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(
        dir.path(),
        "empty.toml",
        &FIG2A.replace(r#"["exact", "tcl", "nz"]"#, "[]"),
    );
    let o = tlsme(&["run", &empty], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("methods"));

    let typo = write_config(dir.path(), "typo.toml", &FIG2A.replace("lambda", "lamda"));
    let o = tlsme(&["run", &typo], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lamda"));

    let o = tlsme(&["figure", "fig11"], &[]);
    assert_eq!(o.status.code(), Some(1));

    let o = tlsme(
        &["figure", "fig7a", "--out", dir.path().to_str().unwrap()],
        &[("TLSME_THREADS", "zero")],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solver_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let degenerate = FIG2A
        .replace("detuning = 0.3", "detuning = 0.0")
        .replace("drive = 0.02", "drive = 0.0")
        .replace(r#"["exact", "tcl", "nz"]"#, r#"["tcl"]"#);
    let cfg = write_config(dir.path(), "degenerate.toml", &degenerate);
    let o = tlsme(&["run", &cfg], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tcl"));
}

#[test]
fn sweep_writes_one_csv_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let body = FIG2A
        .replace("n_steps = 10000", "n_steps = 1000")
        .replace(r#"["exact", "tcl", "nz"]"#, r#"["exact", "markovian"]"#);
    let cfg = write_config(dir.path(), "base.toml", &body);
    let out = dir.path().join("base.csv");
    let o = tlsme(
        &[
            "sweep",
            &cfg,
            "--vary",
            "drive=0:1:3",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..3 {
        assert!(dir.path().join(format!("base_drive_{i:03}.csv")).exists());
    }
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("base_sweep.json")).unwrap())
            .unwrap();
    assert_eq!(summary["values"], serde_json::json!([0.0, 0.5, 1.0]));

    let o = tlsme(&["sweep", &cfg, "--vary", "n_steps=1:2:2"], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_reports_resolution_and_mutation() {
    let o = tlsme(&["validate", "--n-steps", "10"], &[]);
    assert_eq!(o.status.code(), Some(3));
    let table = String::from_utf8_lossy(&o.stdout);
    let convergence = table
        .lines()
        .find(|l| l.starts_with("kernel_convergence"))
        .unwrap();
    assert!(convergence.contains("insufficient resolution"));

    let o = tlsme(&["validate", "--flip-gamma-sign", "--json"], &[]);
    assert_eq!(o.status.code(), Some(3));
    let checks: Value = serde_json::from_slice(&o.stdout).unwrap();
    let markov = checks
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "markovian_reduction")
        .unwrap();
    assert_eq!(markov["status"], "fail");
}
