use std::path::Path;
use std::process::{Command, Output};

fn qais(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qais"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("running qais")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = qais(out, args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

/// CSV contents without the timestamp comment.
fn body(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    body(path)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn unknown_integrand_lists_choices() {
    let dir = tempfile::tempdir().unwrap();
    let o = qais(dir.path(), &["train", "--integrand", "nope"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    for name in ["gauss2", "ring", "multipeak", "pentagon", "constant"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn train_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--seed", "4", "train", "--integrand", "gauss2", "--qubits", "2,2", "--max-iterations", "300"];
    let out = ok(a.path(), &args);
    assert!(out.contains("final KL"));
    ok(b.path(), &args);
    let pa = std::fs::read(a.path().join("params.toml")).unwrap();
    let pb = std::fs::read(b.path().join("params.toml")).unwrap();
    assert_eq!(pa, pb);
    assert_eq!(body(&a.path().join("train_history.csv")), body(&b.path().join("train_history.csv")));

    // The trained file drives integration.
    let params = a.path().join("params.toml");
    ok(
        a.path(),
        &["integrate", "--integrand", "gauss2", "--qubits", "2,2", "--params", params.to_str().unwrap(), "--shots", "1e3,1e4"],
    );
    assert_eq!(rows(&a.path().join("integrate.csv")).len(), 2);
    // A parameter file for a different grid is rejected.
    let o = qais(
        a.path(),
        &["integrate", "--integrand", "gauss2", "--qubits", "3,3", "--params", params.to_str().unwrap()],
    );
    assert!(!o.status.success());
}

#[test]
fn integrate_needs_a_proposal() {
    let dir = tempfile::tempdir().unwrap();
    let o = qais(dir.path(), &["integrate", "--integrand", "gauss2"]);
    assert!(!o.status.success());
    let o = qais(dir.path(), &["integrate", "--integrand", "gauss2", "--params", "/nonexistent/params.toml"]);
    assert!(!o.status.success());
}

#[test]
fn bad_schedules_fail() {
    let dir = tempfile::tempdir().unwrap();
    for shots in ["", "1e4,1e3", "1e3,1e3", "12.5"] {
        let o = qais(dir.path(), &["compare", "--integrand", "gauss2", "--shots", shots]);
        assert!(!o.status.success(), "{shots:?}");
    }
}

#[test]
fn integrate_is_thread_count_independent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |t: &'static str| {
        vec!["--threads", t, "--seed", "9", "integrate", "--integrand", "ring", "--oracle", "--shots", "1e3,1e5", "--replicates", "3"]
    };
    ok(a.path(), &args("1"));
    ok(b.path(), &args("4"));
    for f in ["integrate.csv", "integrate_summary.csv"] {
        assert_eq!(body(&a.path().join(f)), body(&b.path().join(f)));
    }
    assert_eq!(rows(&a.path().join("integrate.csv")).len(), 6);
}

#[test]
fn pentagon_oracle_integration() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["integrate", "--integrand", "pentagon", "--oracle", "--shots", "2e5"]);
    let r = &rows(&dir.path().join("integrate.csv"))[0];
    let (est, std): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
    assert!((est + 1.24027e-13).abs() < 4.0 * std, "{est} {std}");
}

#[test]
fn config_file_sections() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 2\n[grid]\ndims = 2\nqubits = [3, 3]\nlower = [0.0, 0.0]\nupper = [2.0, 1.0]\n\
         [target]\nintegrand = \"constant\"\nvalue = 2.5\n[integrate]\noracle = true\nshots = [1e2, 1e3]\n",
    )
    .unwrap();
    ok(dir.path(), &["--config", cfg.to_str().unwrap(), "integrate"]);
    for r in rows(&dir.path().join("integrate.csv")) {
        let est: f64 = r[2].parse().unwrap();
        assert!((est - 5.0).abs() < 1e-12 * 5.0);
    }
    // Flags override the file.
    ok(dir.path(), &["--config", cfg.to_str().unwrap(), "integrate", "--value", "1.0", "--shots", "50"]);
    let r = &rows(&dir.path().join("integrate.csv"))[0];
    assert!((r[2].parse::<f64>().unwrap() - 2.0).abs() < 1e-12);

    std::fs::write(&cfg, "[target]\nintegrand = \"pentagon\"\nkinematics = \"missing.toml\"\n").unwrap();
    let o = qais(dir.path(), &["--config", cfg.to_str().unwrap(), "vegas"]);
    assert!(!o.status.success());
    std::fs::write(&cfg, "[grid]\nunknown_key = 1\n").unwrap();
    let o = qais(dir.path(), &["--config", cfg.to_str().unwrap(), "vegas", "--integrand", "gauss2"]);
    assert!(!o.status.success());
}

#[test]
fn vegas_constant_rows_have_zero_sigma() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["vegas", "--integrand", "constant", "--value", "3", "--samples", "5000", "--iterations", "4"]);
    let rows = rows(&dir.path().join("vegas.csv"));
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!((r[1].parse::<f64>().unwrap() - 3.0).abs() < 1e-12);
        assert!(r[2].parse::<f64>().unwrap() < 1e-12);
    }
    assert!(dir.path().join("vegas_grid.csv").exists());
}

#[test]
fn vegas_multipeak_emits_phantom_block() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["vegas", "--integrand", "multipeak", "--samples", "5e4", "--iterations", "5"]);
    assert!(out.contains("phantom"));
    let diag = body(&dir.path().join("vegas_diagnostics.csv"));
    assert!(diag.contains("phantom_fraction") && diag.contains("phantom_sites,6"));
    let best = rows(&dir.path().join("vegas.csv")).iter().filter(|r| r[5] == "1").count();
    assert_eq!(best, 1);
}

#[test]
fn compare_writes_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["compare", "--integrand", "multipeak", "--shots", "1e3,1e4", "--replicates", "3"]);
    let rows = rows(&dir.path().join("compare.csv"));
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let q: f64 = r[1].parse().unwrap();
        let v: f64 = r[5].parse().unwrap();
        assert!(q > 0.0 && v > 0.0);
    }
}

#[test]
fn tile_check_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["tile-check"]);
    assert!(out.starts_with("PASS"));
    ok(dir.path(), &["tile-check", "--min-dims", "1", "--max-dims", "1", "--trials", "200"]);
    let r = &rows(&dir.path().join("tile_check.csv"))[0];
    assert_eq!(r, &["1", "1", "1"]);
    let o = qais(dir.path(), &["tile-check", "--min-dims", "3", "--max-dims", "2"]);
    assert!(!o.status.success());
}
