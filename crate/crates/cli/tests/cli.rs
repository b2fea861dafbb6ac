use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kickscope_core::experiment::reference_state;
use kickscope_core::wavepacket::{propagate_fft, GridSpec, PhysicalUnits, SlitGeometry};

const SMALL: &str = "units.t = 0.15\ngrid.n = 65536\nsampling.count = 20000\n";

fn kickscope(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kickscope"))
        .args(args)
        .current_dir(dir)
        .env_remove("KICKSCOPE_OUT")
        .output()
        .unwrap()
}

fn config(dir: &Path, name: &str, extra: &str) -> PathBuf {
    let path = dir.join(name);
    let key = |l: &str| l.split('=').next().unwrap().trim().to_string();
    let overridden: Vec<String> = extra.lines().map(key).collect();
    let base: String = SMALL
        .lines()
        .filter(|l| !overridden.contains(&key(l)))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&path, format!("{base}{extra}")).unwrap();
    path
}

fn summary(path: &Path) -> Vec<(String, String)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn value(s: &[(String, String)], key: &str) -> f64 {
    s.iter().find(|(k, _)| k == key).unwrap().1.parse().unwrap()
}

fn column(csv: &str, col: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn run_writes_pattern_spectra_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "k.cfg", "");
    let out = kickscope(
        &["run", "--config", cfg.to_str().unwrap(), "--out", "res"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let res = dir.path().join("res");
    let s = summary(&res.join("summary.txt"));
    assert!((value(&s, "V_measured") - 0.5).abs() <= 0.02);
    assert!((value(&s, "F_k_branch") - 0.25).abs() <= 1e-10);
    assert_eq!(value(&s, "F_k_theory"), 0.25);
    assert!((value(&s, "p0_measured") - value(&s, "p0")).abs() <= value(&s, "dp"));
    assert_eq!(value(&s, "storey_lhs"), std::f64::consts::PI);

    let pattern = fs::read_to_string(res.join("pattern.csv")).unwrap();
    assert!(pattern.starts_with("x,rho_total,rho_branch1,rho_branch2,rho_branch3\n"));
    assert_eq!(pattern.lines().count(), 65536 + 1);
    let total = column(&pattern, 1);
    let parts: Vec<Vec<f64>> = (2..5).map(|c| column(&pattern, c)).collect();
    for j in (0..total.len()).step_by(97) {
        let sum = parts[0][j] + parts[1][j] + parts[2][j];
        assert!((sum - total[j]).abs() <= 1e-14 * total[j].max(1.0));
    }
    let momentum = fs::read_to_string(res.join("momentum.csv")).unwrap();
    assert!(momentum.starts_with("p,spec_branch1,spec_branch2,spec_branch3\n"));
    assert_eq!(momentum.lines().count(), 65536 + 1);
    // no staging leftovers
    assert_eq!(fs::read_dir(&res).unwrap().count(), 3);
}

#[test]
fn full_overlap_reproduces_the_undisturbed_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "k.cfg", "detector.c = 1\n");
    let out = kickscope(
        &["run", "--config", cfg.to_str().unwrap(), "--out", "."],
        dir.path(),
    );
    assert!(out.status.success());

    let geom = SlitGeometry::new(1.0, 0.01).unwrap();
    let grid = GridSpec::centered(65536, 0.0025, 0.5).unwrap();
    let units = PhysicalUnits::new(1.0, 1.0, 0.15).unwrap();
    let free = propagate_fft(&reference_state(&geom, &grid).unwrap(), &units)
        .unwrap()
        .density();
    let rho = column(
        &fs::read_to_string(dir.path().join("pattern.csv")).unwrap(),
        1,
    );
    let peak = free.iter().cloned().fold(0.0, f64::max);
    let worst = rho
        .iter()
        .zip(&free)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12 * peak, "{worst}");
    let s = summary(&dir.path().join("summary.txt"));
    assert!(s.iter().any(|(k, v)| k == "p0_measured" && v == "NaN"));
}

#[test]
fn stride_decimates_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "k.cfg",
        "output.stride = 64\noutput.momentum_stride = 128\n",
    );
    assert!(
        kickscope(&["run", "--config", cfg.to_str().unwrap()], dir.path())
            .status
            .success()
    );
    let lines = |f: &str| {
        fs::read_to_string(dir.path().join(f))
            .unwrap()
            .lines()
            .count()
    };
    assert_eq!(lines("pattern.csv"), 1024 + 1);
    assert_eq!(lines("momentum.csv"), 512 + 1);
}

#[test]
fn config_errors_exit_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    for (extra, needle) in [
        ("detector.cc = 0.5\n", "unknown key `detector.cc`"),
        ("detector.c = 2\n", "[0, 1]"),
        (
            "geometry.sigma = 0.005\ngrid.x_min = -80\ngrid.x_max = 80\n",
            "sigma/4",
        ),
        ("units.t = 50\n", "wraparound"),
    ] {
        let cfg = config(dir.path(), "bad.cfg", extra);
        for cmd in ["run", "scan", "sample", "verify"] {
            let out = kickscope(
                &[cmd, "--config", cfg.to_str().unwrap(), "--out", "res"],
                dir.path(),
            );
            assert_eq!(out.status.code(), Some(2), "{cmd} {extra}");
            let err = String::from_utf8_lossy(&out.stderr);
            assert!(err.contains(needle), "{cmd}: {err}");
        }
    }
    assert!(!dir.path().join("res").exists());

    let missing = kickscope(&["run", "--config", "nope.cfg"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
    let bad_c = kickscope(
        &[
            "scan",
            "--config",
            config(dir.path(), "k.cfg", "").to_str().unwrap(),
            "--c-values",
            "0.5,1.5",
        ],
        dir.path(),
    );
    assert_eq!(bad_c.status.code(), Some(2));
    assert!(!dir.path().join("scan.csv").exists());
}

#[test]
fn scan_tabulates_the_laws() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "k.cfg", "");
    let out = kickscope(
        &[
            "scan",
            "--config",
            cfg.to_str().unwrap(),
            "--c-values",
            "0,0.5,1",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert!(csv.starts_with("c,V_measured,F_k_branch,p0_measured,eq14_residual\n"));
    let c = column(&csv, 0);
    let v = column(&csv, 1);
    let f = column(&csv, 2);
    let p0 = column(&csv, 3);
    assert_eq!(c, vec![0.0, 0.5, 1.0]);
    for (fk, want) in f.iter().zip([0.5, 0.25, 0.0]) {
        assert!((fk - want).abs() <= 1e-10);
    }
    for (vi, ci) in v.iter().zip(&c) {
        assert!((vi - ci).abs() <= 0.02);
    }
    assert_eq!(p0[0], p0[1]);
    assert!(p0[2].is_nan());
}

#[test]
fn sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "k.cfg", "sampling.seed = 9\n");
    let cfg = cfg.to_str().unwrap();
    for out in ["a", "b"] {
        assert!(
            kickscope(&["sample", "--config", cfg, "--out", out], dir.path())
                .status
                .success()
        );
    }
    assert!(kickscope(
        &["sample", "--config", cfg, "--out", "c", "--seed", "10"],
        dir.path()
    )
    .status
    .success());
    let read = |d: &str| fs::read(dir.path().join(d).join("events.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    let events = String::from_utf8(read("a")).unwrap();
    assert!(events.starts_with("outcome,x\n"));
    assert_eq!(events.lines().count(), 20_001);
    assert!(events
        .lines()
        .skip(1)
        .all(|l| ["q+,", "q-,", "q3,"].iter().any(|p| l.starts_with(p))));
    let s = summary(&dir.path().join("a").join("sample_summary.txt"));
    assert_eq!(value(&s, "seed"), 9.0);
    assert!(value(&s, "chi_square_p") > 0.01);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "k.cfg", "sampling.count = 10\n");
    let out = Command::new(env!("CARGO_BIN_EXE_kickscope"))
        .args(["sample", "--config", cfg.to_str().unwrap()])
        .current_dir(dir.path())
        .env("KICKSCOPE_OUT", dir.path().join("env_out"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("env_out").join("events.csv").exists());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = config(
        dir.path(),
        "ok.cfg",
        "basis = tilted:pi/8\ndetector.theta = pi/3\n",
    );
    let out = kickscope(&["verify", "--config", ok.to_str().unwrap()], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("0 failed"));

    let corrupt = kickscope(
        &[
            "verify",
            "--config",
            ok.to_str().unwrap(),
            "--tolerance-scale",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(corrupt.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&corrupt.stderr).contains("failed checks"));

    let edge = config(dir.path(), "edge.cfg", "detector.c = 1\n");
    let out = kickscope(&["verify", "--config", edge.to_str().unwrap()], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("SKIP")
        && l.contains("relative kick")
        && l.contains("not applicable")));
}
