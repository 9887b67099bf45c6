use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fronthaul::harness::{read_grid, write_grid};
use fronthaul::signal::ResourceGrid;
use num_complex::Complex64;

const SMALL: &str = r#"
seed = 5
[system]
m_antennas = 16
n_user = 2
n_rb = 2
[beamspace]
n_beam = 4
[training]
budget_per_beam = 4
[experiment]
n_scenarios = 2
n_noise_seeds = 1
"#;

fn fronthaul(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fronthaul")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_writes_csv_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sim.csv");
    let o = fronthaul(&["simulate", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("n_beam = 4") && stderr.contains("b_fp = 16"), "{stderr}");
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("experiment,scenario,noise_index"));
    assert_eq!(csv.lines().count(), 3);

    let again = fronthaul(&["simulate", &cfg]);
    assert_eq!(stdout(&again), csv);
}

#[test]
fn sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = fronthaul(&["sweep-cond", &cfg, "--conds", "10,100", "--bits", "4,8", "--seeds", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 2 * 3);
}

#[test]
fn train_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = fronthaul(&["train", &cfg, "--mode", "offline"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("beam_index,bits\n"));
    assert_eq!(text.lines().count(), 5);
    assert_eq!(fronthaul(&["train", &cfg, "--mode", "sideways"]).status.code(), Some(2));
}

#[test]
fn reproduce_tables_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("n_scenarios = 2", "n_scenarios = 4").replace("m_antennas = 16", "m_antennas = 32"));
    let out = dir.path().join("tables");
    let o = fronthaul(&["reproduce-tables", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let tables = fs::read_to_string(out.join("tables.csv")).unwrap();
    assert_eq!(tables.lines().count(), 1 + 20);
    assert!(fs::read_to_string(out.join("profiles.csv")).unwrap().lines().count() > 1);
}

#[test]
fn codec_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = (0..48 * 2)
        .map(|k| Complex64::new((k as f64 * 0.3).sin(), (k as f64 * 0.7).cos()))
        .collect();
    let grid = ResourceGrid::new(48, 2, data).unwrap();
    let input = dir.path().join("in.fhgr");
    let frame = dir.path().join("f.fhc1");
    let decoded = dir.path().join("out.fhgr");
    fs::write(&input, write_grid(&grid)).unwrap();
    let p = |p: &Path| p.to_str().unwrap().to_owned();

    let o = fronthaul(&["codec", "encode", &p(&input), &p(&frame), "--bits", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fronthaul(&["codec", "decode", &p(&frame), &p(&decoded)]).status.success());
    let back = read_grid(&fs::read(&decoded).unwrap()).unwrap();
    assert_eq!((back.n_sc(), back.n_streams()), (48, 2));
    let err: f64 = grid.as_slice().iter().zip(back.as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 0.05, "{err}");

    let profile = dir.path().join("profile.csv");
    fs::write(&profile, "beam_index,bits\n0,6\n1,3\n").unwrap();
    let o = fronthaul(&["codec", "encode", &p(&input), &p(&frame), "--profile", &p(&profile), "--n12", "24"]);
    assert!(o.status.success());
    assert_eq!(fs::read(&frame).unwrap()[9], 24);

    // bad profile width is a config error, a mangled frame an input error
    assert_eq!(fronthaul(&["codec", "encode", &p(&input), &p(&frame), "--bits", "12"]).status.code(), Some(2));
    fs::write(&frame, b"FHC1\x01").unwrap();
    assert_eq!(fronthaul(&["codec", "decode", &p(&frame), &p(&decoded)]).status.code(), Some(1));
}

#[test]
fn codebook_listing() {
    let o = fronthaul(&["codebook", "--bits", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,level,threshold");
    let level: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((level - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
    assert_eq!(fronthaul(&["codebook", "--bits", "13"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nm_antenas = 8\n");
    assert_eq!(fronthaul(&["simulate", &cfg]).status.code(), Some(2));
    assert_eq!(fronthaul(&["simulate", "/nonexistent/cfg.toml"]).status.code(), Some(1));
    assert_eq!(fronthaul(&["simulate"]).status.code(), Some(2));
    let cfg = write_config(dir.path(), SMALL);
    let o = fronthaul(&["sweep-cond", &cfg, "--conds", "0.5", "--bits", "6", "--seeds", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
