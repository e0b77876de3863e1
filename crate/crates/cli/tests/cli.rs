//! End-to-end runs of the `gcm` binary.

use std::path::Path;
use std::process::{Command, Output};

use gcm_cli::stv::StvFile;
use tempfile::TempDir;

fn gcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn synth(dir: &TempDir, name: &str, extra: &[&str]) -> String {
    let out = path(dir, name);
    let mut args = vec!["synth", "--out", out.as_str()];
    args.extend_from_slice(extra);
    let o = gcm(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn footer_v_m(text: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with("# v_m=")).expect("footer");
    line["# v_m=".len()..].parse().unwrap()
}

#[test]
fn synth_writes_exact_length_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let file = synth(&dir, "bench.stv", &["--size", "64x64x16", "--speed", "3"]);
    assert_eq!(std::fs::metadata(&file).unwrap().len(), 20 + 4 * 65536);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bench.json")).unwrap()).unwrap();
    assert_eq!(sidecar["v_r"], 3.0);
    assert_eq!(sidecar["sigma_y"], 8.0);
}

#[test]
fn static_synth_has_identical_frames() {
    let dir = TempDir::new().unwrap();
    let file = synth(&dir, "still.stv", &["--speed", "0", "--dtype", "f64"]);
    let sidecar = std::fs::read_to_string(dir.path().join("still.json")).unwrap();
    assert!(sidecar.contains("\"v_r\": 0.0"));
    let v = StvFile::read(Path::new(&file)).unwrap();
    let plane = v.nx * v.ny;
    for t in 1..v.nt {
        assert_eq!(v.data[t * plane..(t + 1) * plane], v.data[..plane]);
    }
    let scan = gcm(&["scan", "--in", &file]);
    assert_eq!(code(&scan), 4);
}

#[test]
fn synth_is_deterministic_with_noise() {
    let dir = TempDir::new().unwrap();
    let a = synth(&dir, "a.stv", &["--noise", "0.1", "--seed", "9"]);
    let b = synth(&dir, "b.stv", &["--noise", "0.1", "--seed", "9"]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn scan_finds_speed_and_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let file = synth(&dir, "s.stv", &["--speed", "3"]);
    let (c1, c2) = (path(&dir, "1.csv"), path(&dir, "2.csv"));
    assert_eq!(code(&gcm(&["scan", "--in", &file, "--out", &c1])), 0);
    assert_eq!(code(&gcm(&["scan", "--in", &file, "--out", &c2])), 0);
    let (t1, t2) = (std::fs::read(&c1).unwrap(), std::fs::read(&c2).unwrap());
    assert_eq!(t1, t2);
    let text = String::from_utf8(t1).unwrap();
    assert!(text.starts_with("c,energy\n"));
    assert_eq!(csv_rows(&text).len(), 21);
    assert!((footer_v_m(&text) - 3.0).abs() <= 0.25);
}

#[test]
fn scan_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let file = synth(&dir, "s.stv", &["--size", "16x16x4"]);
    assert_eq!(code(&gcm(&["scan", "--in", &file, "--c-step", "10"])), 2);
    assert_eq!(code(&gcm(&["scan", "--in", &file, "--frames", "9"])), 2);
    assert_eq!(code(&gcm(&["scan", "--in", &path(&dir, "missing.stv")])), 3);
    std::fs::write(dir.path().join("junk.stv"), b"STV1 not really").unwrap();
    assert_eq!(code(&gcm(&["scan", "--in", &path(&dir, "junk.stv")])), 3);
    assert_eq!(code(&gcm(&["scan", "--in", &file, "--theta", "pi/0"])), 2);
    assert_eq!(code(&gcm(&["scan", "--bogus"])), 2);
}

#[test]
fn single_entry_sweeps_agree_with_scan() {
    let dir = TempDir::new().unwrap();
    let file = synth(&dir, "s.stv", &["--size", "32x32x16", "--sigma-y", "4"]);
    let scan = String::from_utf8(gcm(&["scan", "--in", &file, "--theta", "pi/32"]).stdout).unwrap();
    let orient =
        String::from_utf8(gcm(&["orient-scan", "--in", &file, "--thetas", "pi/32"]).stdout).unwrap();
    let aperture = String::from_utf8(
        gcm(&["aperture-sweep", "--in", &file, "--theta", "pi/32", "--alphas", "pi/16"]).stdout,
    )
    .unwrap();
    assert!(orient.starts_with("theta,v_m,peak_energy\n"));
    assert!(aperture.starts_with("alpha,v_m,peak_energy\n"));
    let peak = csv_rows(&scan).iter().map(|r| r[1]).fold(f64::MIN, f64::max);
    for text in [&orient, &aperture] {
        let rows = csv_rows(text);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0][1], footer_v_m(&scan));
        assert_eq!(rows[0][2], peak);
    }
}

#[test]
fn kernel_dumps_respect_the_cone() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "shark.stv");
    let o = gcm(&[
        "kernel", "--type", "gc2d", "--alpha", "10deg", "--l", "4", "--m", "4", "--size", "64x64x8",
        "--out", &out,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let re = StvFile::read(Path::new(&out)).unwrap();
    assert_eq!((re.nx, re.ny, re.nt), (64, 64, 1));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("shark.json")).unwrap()).unwrap();
    let (min, step) = (meta["kx"]["min"].as_f64().unwrap(), meta["kx"]["step"].as_f64().unwrap());
    let alpha = 10f64.to_radians();
    let mut inside = 0;
    for y in 0..64 {
        for x in 0..64 {
            let (kx, ky) = (min + step * x as f64, min + step * y as f64);
            let v = re.data[x + 64 * y];
            if ky.atan2(kx).abs() > alpha + 1e-9 || (kx == 0.0 && ky == 0.0) {
                assert_eq!(v, 0.0, "({kx}, {ky})");
            } else if v > 0.0 {
                inside += 1;
            }
        }
    }
    assert!(inside > 10);
    let im = StvFile::read(&dir.path().join("shark.imag.stv")).unwrap();
    assert!(im.data.iter().all(|&v| v == 0.0));

    for c in ["0.4", "1", "4"] {
        let out = path(&dir, &format!("gcm{c}.stv"));
        let o = gcm(&["kernel", "--type", "gcm", "--c", c, "--size", "16x16x8", "--out", &out]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(code(&gcm(&["kernel", "--type", "bogus", "--out", &out])), 2);
}

#[test]
fn frame_bounds_exit_codes_and_stub() {
    let small = ["--grid", "12", "--gamma-grid", "6", "--scale-min", "-2", "--scale-max", "2",
        "--speed-min", "-2", "--speed-max", "2"];
    let mut stub = vec!["frame-bounds", "--kernel", "stub", "--q1", "4", "--bx0", "0.01", "--by0", "0.01", "--tau0", "0.01"];
    stub.extend_from_slice(&small);
    let o = gcm(&stub);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["a"], r["b"]);
    assert_eq!(r["label"], "estimate, not certificate");

    let mut coarse = vec!["frame-bounds", "--q1", "8"];
    coarse.extend_from_slice(&small);
    let o = gcm(&coarse);
    assert_eq!(code(&o), 5);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["valid"], false);
    assert!(r["ratio"].is_null());

    assert_eq!(code(&gcm(&["frame-bounds", "--a0", "x"])), 2);
    assert_eq!(code(&gcm(&["frame-bounds", "--a0", "0.5"])), 2);
}

#[test]
fn compare_aperture_table() {
    let o = gcm(&["compare-aperture"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let morlet: Vec<&Vec<&str>> = rows.iter().filter(|r| r[0] == "morlet").collect();
    let arps: Vec<f64> = morlet.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(arps.windows(2).all(|w| w[1] < w[0]));
    let radii: Vec<f64> = morlet.iter().map(|r| r[3].parse().unwrap()).collect();
    for (r, k0) in radii.iter().zip([6.0, 12.0, 22.0]) {
        assert!((r - k0).abs() <= 0.05);
    }
    let gcm_radii: Vec<f64> = rows.iter().filter(|r| r[0] == "gcm").map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(gcm_radii.len(), 3);
    assert!(gcm_radii.iter().all(|r| (r - 20f64.sqrt()).abs() <= 0.05));

    let only = String::from_utf8(gcm(&["compare-aperture", "--gcm-alpha", ""]).stdout).unwrap();
    assert_eq!(only.lines().count(), 4);
    assert!(!only.contains("gcm,"));
    assert_eq!(code(&gcm(&["compare-aperture", "--morlet-k0", "6,12"])), 2);
}
