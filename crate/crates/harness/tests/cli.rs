use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simmap"))
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn help_exits_zero_and_documents_schema() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["trotter-sweep", "noise_placement", "observable_sim", "SIMMAP_THREADS"] {
        assert!(text.contains(needle), "help lacks {needle}");
    }
}

#[test]
fn missing_config_path_exits_one() {
    let out = bin().args(["trotter-sweep", "--config", "/no/such/file.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/file.cfg"));
}

#[test]
fn unknown_subcommand_exits_one() {
    let out = bin().arg("plot").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bad_config_line_exits_one_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "kind = trotter-sweep\nT 8\n").unwrap();
    let out = bin().args(["trotter-sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn runtime_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fm.cfg");
    // first order needs a drive with zero average
    std::fs::write(&cfg, "N = 4\nuptau = 0.1\np_order = 1\n").unwrap();
    let out = bin().args(["floquet-sweep", "--quiet", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N=4"));
}

#[test]
fn golden_validate_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let status = bin().args(["validate", "--quiet", "--config"]).arg(golden("validate_seed7.cfg")).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(golden("validate_seed7.csv")).unwrap());
}

#[test]
fn seed_flag_changes_random_case_only() {
    let run = |seed: &str| {
        let out = bin().args(["validate", "--quiet", "--config"]).arg(golden("validate_seed7.cfg")).args(["--seed", seed]).output().unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let (a, b) = (run("7"), run("8"));
    assert_ne!(a, b);
    let strip = |s: &str| s.lines().filter(|l| !l.contains("random-exact")).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn env_threads_used_when_flag_absent() {
    let out = bin().args(["validate", "--quiet", "--config"]).arg(golden("validate_seed7.cfg")).env("SIMMAP_THREADS", "3").output().unwrap();
    assert!(out.status.success());
    assert_eq!(out.stdout, std::fs::read(golden("validate_seed7.csv")).unwrap());
    let out = bin().args(["validate", "--quiet"]).env("SIMMAP_THREADS", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fit_subcommand_reads_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.csv");
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "kind = trotter-sweep\nN = 16\nT = 8, 16, 32, 64\np_order = 2\n").unwrap();
    assert!(bin().args(["trotter-sweep", "--quiet", "--config"]).arg(&cfg).arg("--out").arg(&rows).status().unwrap().success());
    let fit_cfg = dir.path().join("fit.cfg");
    std::fs::write(&fit_cfg, format!("input = {}\nx_column = control\ny_column = abs_error\nfilter = p_order:2\n", rows.display())).unwrap();
    let out = bin().args(["fit", "--quiet", "--config"]).arg(&fit_cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().nth(1).unwrap();
    let slope: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
    assert!((slope + 2.0).abs() < 0.25, "{line}");
}
