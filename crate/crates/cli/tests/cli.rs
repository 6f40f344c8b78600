use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ontochain"));
    cmd.env_remove("ONTOCHAIN_OUT_DIR");
    cmd
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin().arg("--out").arg(out).args(args).output().unwrap()
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&read(path)).unwrap()
}

#[test]
fn cogwheel_verify_passes_for_small_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["cogwheel-verify", "--n-min", "2", "--n-max", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(dir.path().join("cogwheel-verify.csv"));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    let summary = json(dir.path().join("cogwheel-verify.json"));
    assert_eq!(summary["command"], "cogwheel-verify");
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["results"].as_array().unwrap().len(), 11);
}

#[test]
fn cogwheel_verify_rejects_n_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["cogwheel-verify", "--n-min", "1", "--n-max", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("cogwheel-verify.csv").exists());
}

#[test]
fn cogwheel_verify_detects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["cogwheel-verify", "--n-min", "2", "--n-max", "4", "--inject-corruption", "1e-3"],
    );
    assert_eq!(out.status.code(), Some(1));
    let csv = read(dir.path().join("cogwheel-verify.csv"));
    assert_eq!(csv.lines().skip(1).filter(|r| r.ends_with(",false")).count(), 3);
}

#[test]
fn chain_report_histogram_and_zero_modes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["chain-report", "--spins", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read(dir.path().join("chain-report-histogram.csv")), "orbit_length,count\n1,4\n2,6\n");

    let out = run(dir.path(), &["chain-report", "--spins", "6", "--steps", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        read(dir.path().join("chain-report-zero-modes.csv")),
        "index,state\n0,dddddd\n21,ududud\n42,dududu\n63,uuuuuu\n"
    );
    let traj = read(dir.path().join("chain-report-trajectory.csv"));
    let lines: Vec<&str> = traj.lines().collect();
    assert_eq!(lines.len(), 5);
    // S = 3: the trajectory is back at its start after three updates.
    assert_eq!(lines[1].split(',').nth(2), lines[4].split(',').nth(2));
}

#[test]
fn chain_report_rejects_odd_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["chain-report", "--spins", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("even"));
}

#[test]
fn bch_verify_all_orbits_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["bch-verify", "--spins", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(dir.path().join("bch-verify.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("orbit_min_index,orbit_length,max_deviation,pass"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let covered: u64 = rows.iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
    assert_eq!(covered, 256);
    assert!(rows.iter().all(|r| r[3] == "true"));
    let mins: Vec<u64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(mins.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn bell_demo_prints_both_branches() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["bell-demo", "--spins", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("        .  .  .  .  .  e  o  .  .  .  .  ."));
    assert!(text.contains("psi     u  u  u  u  u  d  d  u  u  u  u  u"));
    assert!(text.contains("+1      u  u  u  u  d  u  u  d  u  u  u  u"));
    assert!(text.contains("-1      u  u  u  d  u  u  u  u  d  u  u  u"));
    let csv = read(dir.path().join("bell-demo.csv"));
    assert!(csv.contains("shift_difference,"));
    assert!(csv.contains(",uuuuduuduuuu,1.0000000000000000e0,0.0000000000000000e0"));
    assert!(csv.contains(",uuuduuuuduuu,-1.0000000000000000e0,0.0000000000000000e0"));
}

#[test]
fn hybrid_example_is_entangled() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("hybrid_example.toml");
    let out = run(dir.path(), &["--config", cfg.to_str().unwrap(), "hybrid"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path().join("hybrid.csv"));
    assert_eq!(
        csv.lines().next(),
        Some("member_index,probability,schmidt_rank,entropy_bits,classification")
    );
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "2");
    assert_eq!(row[4], "entangled");
    let entropy: f64 = row[3].parse().unwrap();
    assert!((entropy - 1.0).abs() < 1e-10);

    let summary = json(dir.path().join("hybrid.json"));
    let coeffs = summary["results"][0]["schmidt_coefficients"].as_array().unwrap();
    assert_eq!(coeffs.len(), 2);
    for c in coeffs {
        assert!((c.as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }
}

#[test]
fn command_taken_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("swap_example.toml");
    let out = run(dir.path(), &["--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path().join("hybrid.csv"));
    assert_eq!(csv.lines().skip(1).filter(|l| l.ends_with(",1,0.0000000000000000e0,hybrid_swapped")).count(), 2);
    assert!(!dir.path().join("hybrid.json").exists());
}

#[test]
fn output_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = example("hybrid_example.toml");
    for dir in [&a, &b] {
        run(dir.path(), &["--config", cfg.to_str().unwrap(), "--threads", "2"]);
        run(dir.path(), &["bch-verify", "--spins", "10"]);
    }
    for name in ["hybrid.csv", "hybrid.json", "bch-verify.csv", "bch-verify.json"] {
        assert_eq!(read(a.path().join(name)), read(b.path().join(name)), "{name}");
    }
}

#[test]
fn config_errors_exit_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "command = \"hybrid\"\nspins = 6\n\n[[quantum]]\nstate = \"uuxuuu\"\namplitude = [1.0, 0.0]\n\n[[classical]]\nstate = \"uuuuuu\"\n",
    )
    .unwrap();
    let out = run(dir.path(), &["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.toml:5: field `quantum[0].state`"), "{err}");

    std::fs::write(&cfg, "command = \"hybrid\"\nspins = 6\ntimestep = -1.0\n").unwrap();
    let out = run(dir.path(), &["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["bch-verify"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["bogus"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["hybrid"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["--threads", "0", "bell-demo"]).status.code(), Some(2));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("ONTOCHAIN_OUT_DIR", dir.path())
        .args(["chain-report", "--spins", "4", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let summary = json(dir.path().join("chain-report.json"));
    assert_eq!(summary["config_echo"]["spins"], 4);
    assert_eq!(summary["pass"], true);
}
