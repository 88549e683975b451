use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wigner_kg_cli::io::load_bin;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn wigner_kg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wigner-kg"))
        .args(args)
        .output()
        .unwrap()
}

fn run_cfg(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    wigner_kg(&args)
}

fn write_cfg(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = r#"
[grid]
n = 16
length = 12.0

[initial]
kind = "gaussian_packet"
center = 6.0
width = 1.5
k0 = 1.0

[solver]
dt = DT
t_end = 0.2
"#;

fn sorted_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn compare_is_bitwise_deterministic_across_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("compare_bump.toml");
    let mut runs = Vec::new();
    for threads in ["1", "2", "4"] {
        let out = tmp.path().join(format!("t{threads}"));
        let o = run_cfg("compare", &cfg, &out, &["--threads", threads, "--format", "bin"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push(out);
    }
    let base = sorted_files(&runs[0]);
    assert!(base.iter().any(|p| p.file_name().unwrap() == "compare_l2.bin"));
    for other in &runs[1..] {
        let files = sorted_files(other);
        assert_eq!(files.len(), base.len());
        for (a, b) in base.iter().zip(&files) {
            assert_eq!(a.file_name(), b.file_name());
            assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{:?}", a.file_name());
        }
    }
}

#[test]
fn unstable_dt_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), &SMALL.replace("DT", "5.0"));
    for cmd in ["evolve-wigner", "evolve-kg", "compare"] {
        let o = run_cfg(cmd, &cfg, &tmp.path().join("out"), &[]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("solver.dt"), "{cmd}");
    }
}

#[test]
fn malformed_configs_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    for (text, key) in [
        (SMALL.replace("DT", "\"quick\""), "solver.dt"),
        (SMALL.replace("DT", "0.01").replace("n = 16", "n = 15"), "grid.n"),
        (
            SMALL
                .replace("DT", "0.01")
                .replace("width = 1.5", "width = 1.5\nspread = 2"),
            "initial",
        ),
        (
            format!("{}\n[params]\nomega_p0 = -1.0\n", SMALL.replace("DT", "0.01")),
            "params.omega_p0",
        ),
        (
            format!(
                "{}\n[medium]\nkind = \"sinusoid\"\namplitude = 0.1\nwavelength = 5.0\n",
                SMALL.replace("DT", "0.01")
            ),
            "medium.wavelength",
        ),
    ] {
        let cfg = write_cfg(tmp.path(), &text);
        let o = run_cfg("evolve-wigner", &cfg, &tmp.path().join("out"), &[]);
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(o.status.code(), Some(2), "{err}");
        assert!(err.contains(key), "{err} should name {key}");
    }
    let o = wigner_kg(&["wigner", "--config", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_finite_initial_state_aborts_with_step() {
    let tmp = tempfile::tempdir().unwrap();
    let mut rows = String::from("phi_re,phi_im,dphi_re,dphi_im\n");
    for i in 0..16 {
        rows.push_str(if i == 3 { "NaN,0,0,0\n" } else { "1,0,0,-1\n" });
    }
    fs::write(tmp.path().join("field.csv"), rows).unwrap();
    let text = SMALL.replace("DT", "0.01").replace(
        "kind = \"gaussian_packet\"\ncenter = 6.0\nwidth = 1.5\nk0 = 1.0",
        "kind = \"file\"\npath = \"field.csv\"",
    );
    let cfg = write_cfg(tmp.path(), &text);
    for cmd in ["evolve-wigner", "evolve-kg"] {
        let o = run_cfg(cmd, &cfg, &tmp.path().join("out"), &[]);
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(o.status.code(), Some(3), "{cmd}: {err}");
        assert!(err.contains("step 1"), "{err}");
    }
}

#[test]
fn two_wave_case_writes_interference_peak() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_cfg(
        "case-two-wave",
        &configs().join("two_wave.toml"),
        tmp.path(),
        &["--format", "both"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("two_wave_peaks.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (eta, w1, w0k0, w3k0) = (col("eta"), col("W1_mid"), col("W0_k0"), col("W3_k0"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[w1] - v[eta].sin()).abs() < 1e-12);
        assert!((v[w0k0] - 2.0).abs() < 1e-12);
        assert!((v[w3k0] - 2.5).abs() < 1e-12);
    }
    let w1 = load_bin(&tmp.path().join("W1_0000.bin")).unwrap();
    assert_eq!(w1.axes.iter().map(|a| a.label.as_str()).collect::<Vec<_>>(), ["r", "k"]);
    assert_eq!(w1.data.len(), 64 * 64);
}

#[test]
fn every_command_runs_on_shipped_configs() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, cfg, expect) in [
        ("wigner", "evolve_wigner.toml", "W_PhiPhi_0000.csv"),
        ("evolve-wigner", "evolve_wigner.toml", "W3_0013.bin"),
        ("evolve-kg", "kg_bump.toml", "W_PhiPhi_0010.csv"),
        ("evolve-swl", "swl_packet.toml", "residuals_0000.csv"),
        ("compare", "compare_bump.toml", "compare_l2.bin"),
    ] {
        let out = tmp.path().join(cmd);
        let o = run_cfg(cmd, &configs().join(cfg), &out, &[]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(expect).exists(), "{cmd}: missing {expect}");
    }
    let series = fs::read_to_string(tmp.path().join("evolve-kg/series.csv")).unwrap();
    let mut lines = series.lines();
    let col = lines.next().unwrap().split(',').position(|h| h == "energy").unwrap();
    let energies: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    let e0 = energies[0];
    assert!(energies.iter().all(|e| (e - e0).abs() <= 1e-9 * e0));
    let swl = fs::read_to_string(tmp.path().join("evolve-swl/series.csv")).unwrap();
    let totals: Vec<Vec<f64>> = swl
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|s| s.parse().unwrap()).collect())
        .collect();
    for row in &totals {
        assert!((row[2] - totals[0][2]).abs() <= 1e-10 * totals[0][2]);
        assert!((row[3] - totals[0][3]).abs() <= 1e-10 * totals[0][3]);
    }
}
