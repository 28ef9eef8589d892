use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use adaptive_fv::runner::{SNAPSHOT_HEADER, SUMMARY_HEADER};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_adaptive-fv"));
    c.env_remove("ADAPTIVE_FV_OUTPUT_ROOT");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Parsed CSV: header and rows of fields.
fn csv(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn column(rows: &[Vec<String>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn snapshots(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir.join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn run_writes_documented_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "shock.cfg",
        "problem = burgers\nn_cells = 40\nt_end = 0.2\ninitial = riemann\nsnapshot_every = 7\nalpha = 2\n",
    );
    let out_dir = tmp.path().join("out");
    ok(bin()
        .arg("run")
        .arg(&cfg)
        .arg(format!("--output-dir={}", out_dir.display()))
        .output()
        .unwrap());

    let (header, rows) = csv(&out_dir.join("summary.csv"));
    assert_eq!(header, SUMMARY_HEADER);
    assert!(rows.len() > 2);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[0][2], "NaN");
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 8);
        assert_eq!(r[0], k.to_string());
    }
    let t = column(&rows, 1);
    assert_eq!(*t.last().unwrap(), 0.2);
    let mass = column(&rows, 4);
    for m in &mass {
        assert!(((m - mass[0]) / mass[0]).abs() <= 1e-12);
    }
    // 17 significant digits
    assert_eq!(rows[1][1].split('e').next().unwrap().len(), 18);

    let last = rows.len() - 1;
    let names = snapshots(&out_dir);
    assert!(names.contains(&"step_0.csv".to_string()));
    assert!(names.contains(&"step_7.csv".to_string()));
    assert!(names.contains(&format!("step_{last}.csv")));
    let (header, cells) = csv(&out_dir.join(format!("snapshots/step_{last}.csv")));
    assert_eq!(header, SNAPSHOT_HEADER);
    assert_eq!(cells.len(), 40);
    let xl = column(&cells, 1);
    let xr = column(&cells, 2);
    let h = column(&cells, 3);
    assert_eq!(xl[0], 0.0);
    assert_eq!(xr[39], 1.0);
    for i in 0..40 {
        assert!((xr[i] - xl[i] - h[i]).abs() < 1e-15);
        if i > 0 {
            assert_eq!(xl[i], xr[i - 1]);
        }
    }

    let meta = fs::read_to_string(out_dir.join("run_meta.txt")).unwrap();
    assert!(meta.contains("problem = burgers\n"));
    assert!(meta.contains("snapshot_every = 7\n"));
}

#[test]
fn identical_configs_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "a.cfg",
        "problem = burgers\nn_cells = 30\nt_end = 0.1\ninitial = hat\nenforce_maincond = on\nalpha = 3\n",
    );
    for name in ["one", "two"] {
        ok(bin()
            .arg("run")
            .arg(&cfg)
            .arg(format!("--output_dir={}", tmp.path().join(name).display()))
            .output()
            .unwrap());
    }
    for file in [
        "summary.csv",
        "snapshots/step_0.csv",
        "snapshots/step_10.csv",
    ] {
        let a = fs::read(tmp.path().join("one").join(file)).unwrap();
        let b = fs::read(tmp.path().join("two").join(file)).unwrap();
        assert!(a == b, "{file} differs");
    }
}

#[test]
fn zero_end_time_writes_initial_state_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "z.cfg",
        "problem = advection\nn_cells = 10\nt_end = 0\n",
    );
    ok(bin()
        .arg("run")
        .arg(&cfg)
        .env("ADAPTIVE_FV_OUTPUT_ROOT", tmp.path().join("root"))
        .output()
        .unwrap());
    // output defaults to <root>/<config stem>
    let dir = tmp.path().join("root").join("z");
    let (_, rows) = csv(&dir.join("summary.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(snapshots(&dir), vec!["step_0.csv".to_string()]);
}

#[test]
fn enforced_shock_run_has_non_increasing_entropy() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "s.cfg",
        "problem = burgers\nn_cells = 60\nt_end = 0.3\ninitial = riemann\nriemann_ul = 1\nriemann_ur = 0\nenforce_maincond = on\nalpha = 1\n",
    );
    let dir = tmp.path().join("s");
    ok(bin()
        .args([
            "run",
            cfg.to_str().unwrap(),
            &format!("--output_dir={}", dir.display()),
        ])
        .output()
        .unwrap());
    let (_, rows) = csv(&dir.join("summary.csv"));
    let entropy = column(&rows, 5);
    for w in entropy.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    assert!(rows.iter().skip(1).all(|r| r[6] == "0"));
}

#[test]
fn advection_returns_to_initial_profile_after_one_period() {
    let tmp = tempfile::tempdir().unwrap();
    let n = 100;
    let cfg = write(
        tmp.path(),
        "adv.cfg",
        &format!("problem = advection\nadvection_speed = 1\nn_cells = {n}\nt_end = 1\ninitial = sine\nadapt = off\nsnapshot_every = 0\n"),
    );
    let dir = tmp.path().join("adv");
    ok(bin()
        .args([
            "run",
            cfg.to_str().unwrap(),
            &format!("--output_dir={}", dir.display()),
        ])
        .output()
        .unwrap());
    let (_, rows) = csv(&dir.join("summary.csv"));
    let last = rows.len() - 1;
    assert_eq!(snapshots(&dir).len(), 2);
    let (_, first) = csv(&dir.join("snapshots/step_0.csv"));
    let (_, final_cells) = csv(&dir.join(format!("snapshots/step_{last}.csv")));
    let u0 = column(&first, 4);
    let u1 = column(&final_cells, 4);
    let dx = 1.0 / n as f64;
    let l1: f64 = u0.iter().zip(&u1).map(|(a, b)| dx * (a - b).abs()).sum();
    // first-order scheme: error of order dx
    assert!(l1 < 10.0 * dx, "L1 error {l1}");
    assert!(l1 > 0.0);
}

#[test]
fn invalid_configuration_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.cfg",
        "problem = burgers\nn_cells = 2\nt_end = 1\n",
    );
    let out = bin().arg("check").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("n_cells"), "{err}");

    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--bogus=1")
        .output()
        .unwrap();
    assert!(!out.status.success());

    // a command-line value replaces the file's
    let out = ok(bin()
        .arg("check")
        .arg(&cfg)
        .arg("--n_cells=16")
        .output()
        .unwrap());
    assert!(String::from_utf8_lossy(&out.stdout).contains("n_cells = 16\n"));
}

#[test]
fn sweep_runs_every_listed_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("ra");
    let out_b = tmp.path().join("rb");
    write(
        tmp.path(),
        "a.cfg",
        &format!(
            "problem = burgers\nn_cells = 20\nt_end = 0.05\noutput_dir = {}\n",
            out_a.display()
        ),
    );
    write(
        tmp.path(),
        "b.cfg",
        &format!(
            "problem = advection\nn_cells = 25\nt_end = 0.05\noutput_dir = {}\n",
            out_b.display()
        ),
    );
    let sweep = write(tmp.path(), "all.sweep", "# two runs\na.cfg\nb.cfg\n");
    ok(bin().arg("sweep").arg(&sweep).output().unwrap());
    assert!(out_a.join("summary.csv").exists());
    assert!(out_b.join("summary.csv").exists());
}
