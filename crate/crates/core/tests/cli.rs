use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "gamma_t,p,I,statistics,channel,concurrence,delta_c,probability";

fn slocc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slocc"))
        .args(args)
        .env_remove("SLOCC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
}

/// Parsed data rows: (gamma_t, I, concurrence, probability).
fn rows(csv: &str) -> Vec<(f64, f64, f64, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0].parse().unwrap(), c[2].parse().unwrap(), c[5].parse().unwrap(), c[7].parse().unwrap())
        })
        .collect()
}

#[test]
fn eval_at_time_zero() {
    let o = slocc(&["eval", "--channel", "adc", "--gamma", "1", "--lambda", "5", "--t", "0", "--indist", "1"]);
    assert!(o.status.success());
    let line = stdout(&o);
    assert_eq!(field(&line, "p"), "0");
    assert_eq!(field(&line, "concurrence"), "1");
    assert_eq!(field(&line, "probability"), "0.5");
}

#[test]
fn eval_depolarized_separated_pair_dies_at_two_thirds() {
    let o = slocc(&["eval", "--channel", "dep", "--indist", "0", "--p", "0.666666666666667"]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "concurrence"), "0");
}

#[test]
fn eval_phase_damping_long_times() {
    let o = slocc(&["eval", "--channel", "pdc", "--indist", "0", "--regime", "markovian", "--t", "60"]);
    let line = stdout(&o);
    assert!(field(&line, "concurrence").parse::<f64>().unwrap() < 1e-12);
    assert_eq!(field(&line, "probability"), "1");
}

#[test]
fn usage_and_domain_errors_exit_with_one() {
    assert_eq!(slocc(&["eval", "--indist", "0.5"]).status.code(), Some(1));
    assert_eq!(slocc(&["eval", "--indist", "2", "--p", "0.1"]).status.code(), Some(1));
    assert_eq!(slocc(&["figure", "fig1"]).status.code(), Some(1));
    assert_eq!(slocc(&["validate", "--cases", "0"]).status.code(), Some(1));
    assert_eq!(slocc(&["sweep", "--points", "1"]).status.code(), Some(1));
    let o = slocc(&["eval", "--channel", "xyz", "--p", "0.1", "--indist", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn io_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sweep.csv");
    let o = slocc(&["sweep", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let o = slocc(&["--config", dir.path().join("missing.cfg").to_str().unwrap(), "validate"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweeps_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = slocc(&["sweep", "--channel", "dep", "--regime", "nonmarkovian", "--t-max", "50", "--points", "101", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let x = std::fs::read(&a).unwrap();
    assert_eq!(x, std::fs::read(&b).unwrap());
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with(&format!("{HEADER}\n")));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 1 + 5 * 101);
}

#[test]
fn empty_i_list_writes_header_only() {
    let o = slocc(&["sweep", "--indist", ""]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), format!("{HEADER}\n"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# archived sweep\nchannel = pdc\nindist = 0.5\nt_max = 2\npoints = 3\nstatistics = boson\n").unwrap();
    let o = slocc(&["--config", cfg.to_str().unwrap(), "sweep", "--points", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().nth(1).unwrap().contains(",boson,pdc,"));
    std::fs::write(&cfg, "flavour = up\n").unwrap();
    assert_eq!(slocc(&["--config", cfg.to_str().unwrap(), "sweep"]).status.code(), Some(1));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_slocc"))
        .args(["sweep", "--points", "3", "--gnuplot"])
        .env("SLOCC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("sweep.csv").exists());
    let gp = std::fs::read_to_string(dir.path().join("sweep.gp")).unwrap();
    assert!(gp.contains("plot "));
}

fn figure(id: &str, dir: &Path) -> (String, String) {
    let o = slocc(&["figure", id, "--points", "401", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = std::fs::read_to_string(dir.join(format!("{id}_markovian.csv"))).unwrap();
    let n = std::fs::read_to_string(dir.join(format!("{id}_nonmarkovian.csv"))).unwrap();
    (m, n)
}

#[test]
fn concurrence_figure_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let (m, n) = figure("fig2", dir.path());
    let (m, n) = (rows(&m), rows(&n));
    for i in [0.0, 0.25, 0.5, 0.75] {
        let c: Vec<f64> = m.iter().filter(|r| r.1 == i).map(|r| r.2).collect();
        assert!(c.windows(2).all(|w| w[1] <= w[0] + 1e-15), "I={i} not monotone");
        let c: Vec<f64> = n.iter().filter(|r| r.1 == i).map(|r| r.2).collect();
        let turns = c.windows(3).filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0).count();
        assert!(turns >= 2, "I={i}: no collapse and revival");
    }
    assert!(m.iter().filter(|r| r.1 == 1.0).all(|r| (r.2 - 1.0).abs() < 1e-12));
}

#[test]
fn probability_figure_is_flat_at_full_overlap() {
    let dir = tempfile::tempdir().unwrap();
    for id in ["fig4", "fig7", "fig10"] {
        let (m, n) = figure(id, dir.path());
        for r in rows(&m).iter().chain(rows(&n).iter()).filter(|r| r.1 == 1.0) {
            assert!((r.3 - 0.5).abs() < 1e-9, "{id}: {r:?}");
        }
    }
}

#[test]
fn validate_is_deterministic_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let a = slocc(&["validate", "--seed", "42", "--cases", "100", "--out", report.to_str().unwrap()]);
    let b = slocc(&["validate", "--seed", "42", "--cases", "100"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(std::fs::read(&report).unwrap(), a.stdout);
    let text = stdout(&a);
    let dc: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("max_abs_delta_concurrence="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(dc <= 1e-9);
    assert!(text.ends_with("status=PASS\n"));
}
