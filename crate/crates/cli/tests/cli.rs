use std::path::Path;
use std::process::{Command, Output};

use oqsl_cli::output::read_csv;

fn oqsl(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oqsl"))
        .args(args)
        .arg("--output")
        .arg(out)
        .output()
        .unwrap()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(path).unwrap();
    let j = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[j]).collect()
}

#[test]
fn pauli_pair_report_saturates() {
    let dir = tempfile::tempdir().unwrap();
    let o = oqsl(&["bound", "--h", "pauli-z", "--a", "pauli-x", "--tau", "0.3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = dir.path().join("bound_report.csv");
    for key in ["tau_qsl", "tau_ref", "tau_oref"] {
        assert!((column(&report, key)[0] - 0.3).abs() < 1e-12, "{key}");
    }
    assert!(dir.path().join("bound_report.meta").exists());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("# generator: oqsl"));
    assert!(text.contains("# result.ordering_holds: true"));
}

#[test]
fn identity_is_flagged_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let o = oqsl(&["bound", "--h", "pauli-z", "--a", "identity"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = dir.path().join("bound_report.csv");
    assert_eq!(column(&report, "stationary")[0], 1.0);
    assert_eq!(column(&report, "tau_qsl")[0], 0.0);
}

#[test]
fn su2_autocorrelation_at_d3() {
    let dir = tempfile::tempdir().unwrap();
    let o = oqsl(&["krylov-su2", "--d", "3", "--samples", "50", "--cross-check"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = dir.path().join("krylov_su2_d3_plain.csv");
    let t = column(&table, "t");
    let c = column(&table, "autocorr");
    let num = column(&table, "autocorr_spectrum");
    for k in 0..t.len() {
        let want = 2.0 * t[k].cos() + 3.0;
        assert!((c[k] - want).abs() < 1e-12);
        assert!((num[k] - want).abs() < 1e-12);
    }
    let sub = dir.path().join("krylov_su2_d3_subtracted.csv");
    assert!(column(&sub, "gap").iter().all(|g| g.abs() < 1e-9));
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["wegner", "--n", "3"][..],
        &["krylov-su2", "--alpha", "0.5"],
        &["krylov-su2", "--t-max", "4"],
        &["bound", "--metric", "nope"],
        &["bound", "--tau", "-1"],
        &["bound", "--h", "missing-file.txt", "--a", "pauli-x"],
        &["toda", "--n", "1", "--seed", "1"],
        &["bound", "--unknown", "1"],
    ] {
        let o = oqsl(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn numerical_failures_exit_with_3_and_leave_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    // loose tolerances let the norm drift past the invariant guard
    let o = oqsl(
        &["wegner", "--n", "6", "--seed", "1", "--rtol", "1", "--atol", "1", "--l-max", "1e6"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let diag = std::fs::read_to_string(dir.path().join("diagnostics.txt")).unwrap();
    assert!(diag.contains("norm conservation"));
    assert!(diag.contains("param.seed: 1"));
}

#[test]
fn config_file_with_command_line_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# toda sweep\ncommand = toda\nn = 3, 4\nseed = 5\nsamples = 30\n").unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_oqsl"))
        .args(["toda", "--config"])
        .arg(&cfg)
        .args(["--seed", "6", "--output"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["toda_n3_seed6.csv", "toda_n4_seed6.csv", "toda_sweep_seed6.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }
    assert_eq!(column(&out.join("toda_n3_seed6.csv"), "l").len(), 30);

    // a file written for another command is rejected
    let o = Command::new(env!("CARGO_BIN_EXE_oqsl"))
        .args(["wegner", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn svg_plots_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let o = oqsl(&["toda-tight", "--n", "4", "--samples", "21", "--emit-svg"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(dir.path().join("toda_tight_n4.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn seeded_runs_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["krylov-lanczos", "--dim", "3", "--seed", "21", "--samples", "40"];
    assert!(oqsl(&args, &a).status.success());
    assert!(oqsl(&args, &b).status.success());
    for name in ["lanczos_coefficients.csv", "lanczos_complexity.csv", "lanczos_complexity.meta"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}
