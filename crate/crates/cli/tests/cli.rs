//! End-to-end tests of the binary: exit codes, CSV shape, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_refmarket")
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const TWO_VALUE: &str = r#"
[values]
atoms = [[0.0, 0.95], [1.0, 0.05]]

[referrals]
family = "poisson"

[groups]
n_b = 1.0
n_g = 1.0
h_b = 1.0
h_g = 1.0

[market]
w_min = 0.0
r = 1.0

[initial_state]
e_b = 0.7
e_g = 0.3

[run]
periods = 5

[policy]
aa_kind = "demote-blue"
aa_size = 0.02
aa_period = 0
kappa = 0.2
lambda = 0.5

[abm]
firm_count = 20000
mode = "redraw"
periods = 3
seed = 7
"#;

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn equilibrium_row_matches_two_value_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TWO_VALUE);
    let out = run(&["equilibrium", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# version="));
    assert!(lines[1].starts_with("threshold,"));
    let threshold: f64 = lines[2].split(',').next().unwrap().parse().unwrap();
    assert!((threshold - 0.031536).abs() < 1e-4);
}

#[test]
fn missing_values_section_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let body = TWO_VALUE.replace("[values]\natoms = [[0.0, 0.95], [1.0, 0.05]]\n", "");
    let cfg = write_config(dir.path(), &body);
    let out = run(&["equilibrium", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("values"), "stderr must name the section: {err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{TWO_VALUE}\n[market2]\nx = 1\n");
    let cfg = write_config(dir.path(), &body);
    let out = run(&["equilibrium", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let body = TWO_VALUE.replace("w_min = 0.0", "w_min = 0.0\nwmax = 3.0");
    let cfg = write_config(dir.path(), &body);
    let out = run(&["equilibrium", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_flag_passes_on_valid_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TWO_VALUE);
    let out = run(&["equilibrium", "--config", cfg.to_str().unwrap(), "--check"]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("check uniqueness: ok"));
    assert!(err.contains("check lemons: ok"));
    let out = run(&["check", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
}

#[test]
fn infeasible_policy_size_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let body = TWO_VALUE.replace("aa_size = 0.02", "aa_size = 0.5");
    let cfg = write_config(dir.path(), &body);
    let out = run(&["policy", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("blue referral hires"), "{err}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TWO_VALUE);
    let cfg_str = cfg.to_str().unwrap();
    for args in [
        vec!["dynamics", "--config", cfg_str],
        vec!["abm", "--config", cfg_str],
        vec!["abm", "--config", cfg_str, "--compare-baseline"],
        vec!["policy", "--config", cfg_str, "--compare-baseline"],
        vec!["firing", "--config", cfg_str, "--sweep", "lambda=0:1:0.5"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?} must be deterministic");
    }
}

#[test]
fn seed_flag_changes_abm_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TWO_VALUE);
    let cfg_str = cfg.to_str().unwrap();
    let a = run(&["abm", "--config", cfg_str, "--seed", "1"]);
    let b = run(&["abm", "--config", cfg_str, "--seed", "2"]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn out_file_is_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TWO_VALUE);
    let target = dir.path().join("traj.csv");
    let out = run(&[
        "dynamics",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let written = std::fs::read(&target).unwrap();
    let stdout_run = run(&["dynamics", "--config", cfg.to_str().unwrap()]);
    assert_eq!(written, stdout_run.stdout);
    // No temp droppings left behind.
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp-"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn dynamics_sweep_locates_regime_switch() {
    let dir = tempfile::tempdir().unwrap();
    let third = 1.0 / 3.0;
    let body = format!(
        r#"
[values]
atoms = [[0.0, {third}], [{third}, {third}], [1.0, {}]]

[referrals]
family = "poisson"

[groups]
n_b = 0.7
n_g = 0.7
h_b = 1.0
h_g = 1.0

[market]
w_min = 0.0

[initial_state]
e_b = 0.65
e_g = 0.35
"#,
        1.0 - 2.0 * third
    );
    let cfg = write_config(dir.path(), &body);
    let out = run(&[
        "dynamics",
        "--config",
        cfg.to_str().unwrap(),
        "--sweep",
        "initial_state.e_g_complement=0.30:0.40:0.001",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(2)
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    assert_eq!(rows.len(), 101);
    // Column 0: swept e_g; column 6: hire_ref_b. The referral-hire mass jumps
    // at the regime switch; locate it and check the next-period drop.
    let mut switch = None;
    for pair in rows.windows(2) {
        if (pair[1][6] - pair[0][6]).abs() > 0.05 {
            switch = Some((pair[0].clone(), pair[1].clone()));
            break;
        }
    }
    let (below, above) = switch.expect("regime switch in the sweep range");
    assert!((below[0] - 0.355).abs() <= 0.01, "switch at {}", below[0]);
    assert!(above[3] < below[3], "next-period green employment must drop");
}

#[test]
fn macro_sweep_rows_are_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TWO_VALUE);
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--target",
        "macro",
        "--param",
        "kappa=0:0.4:0.1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let productions: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(productions.len(), 5);
    for w in productions.windows(2) {
        assert!(w[1] < w[0], "shocked production must fall with kappa");
    }
}
