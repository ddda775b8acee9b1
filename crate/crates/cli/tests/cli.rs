use std::path::Path;
use std::process::{Command, Output};

fn forager(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forager"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: &str = "grid.cells = 12, 12\nrun.horizon = 0.5\nrun.stride = 5\n";

#[test]
fn run_writes_a_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.txt"), SMALL).unwrap();
    let o = forager(&["run", "small.txt"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("verdict:"));
    let run_dir = dir.path().join("runs").join("small");
    for f in ["config.txt", "report.json", "series.csv"] {
        assert!(run_dir.join(f).exists(), "{f} missing");
    }
}

#[test]
fn blow_up_does_not_change_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("b.txt"),
        format!("{SMALL}run.blowup_threshold = 1.2\n"),
    )
    .unwrap();
    let o = forager(&["run", "b.txt"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("blow-up"));
}

#[test]
fn config_errors_exit_with_two_and_list_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.txt"),
        "run.horizon = 0\nparams.gamma = 3\nrun.stride = 0\n",
    )
    .unwrap();
    let o = forager(&["run", "bad.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("horizon") && err.contains("gamma") && err.contains("stride"),
        "{err}"
    );

    let o = forager(&["run", "missing.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = forager(&["suite", "no-such-suite"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_prints_a_summary_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.txt"), SMALL).unwrap();
    let o = forager(
        &[
            "sweep",
            "s.txt",
            "--axis",
            "params.xi",
            "--values",
            "0,0.1,0.2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 4, "{out}");
    assert!(out.starts_with("params.xi,verdict"));
    let o = forager(
        &["sweep", "s.txt", "--axis", "params.nope", "--values", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn suites_report_pass_and_fail_through_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = forager(
        &["suite", "steady-state", "--cells", "8", "--horizon", "5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(dir
        .path()
        .join("suites")
        .join("steady-state")
        .join("report.txt")
        .exists());
    // At coarse resolution the discrete inequality ratio still rises under
    // refinement, so the suite fails.
    let o = forager(&["suite", "inequality-3.5a", "--cells", "16"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn check_conditions_prints_regime_quantities() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.txt"),
        "params.m = 2\nparams.l = 6\nw0.base = 2\nsource.r0 = 3\n",
    )
    .unwrap();
    let o = forager(&["check-conditions", "c.txt"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    for key in [
        "p  = 2",
        "Q  = 3",
        "G0 = ",
        "H0 = ",
        "chi <= kappa/G0",
        "admissible (m=2, l=6): true",
    ] {
        assert!(out.contains(key), "{key} missing from\n{out}");
    }
}

#[test]
fn calibrate_kappa_with_degenerate_bracket() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("k.txt"),
        "grid.cells = 12, 12\nrun.horizon = 4\ncontrol.mode = imex\ncontrol.dt_max = 0.05\n",
    )
    .unwrap();
    let o = forager(
        &["calibrate-kappa", "k.txt", "--lo", "0.01", "--hi", "0.01"],
        dir.path(),
    );
    assert!(
        o.status.success(),
        "{}{}",
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("empirical kappa = 0.01"));
}
