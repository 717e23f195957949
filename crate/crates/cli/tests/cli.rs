use std::path::Path;
use std::process::{Command, Output};

use qgl_core::synthetic::{add_gaussian_noise, natural_image};

fn qgl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_png(dir: &Path, name: &str, w: usize, h: usize, seed: u64) -> String {
    let path = dir.join(name);
    natural_image(w, h, seed).unwrap().save_png(&path).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn same_file_twice_scores_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_png(dir.path(), "a.png", 40, 30, 1);
    let o = qgl(&["score", &p, &p, "--psnr"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# config sigma=0.500000 k=0.707107 c0=1.000000 c1=0.000900"));
    assert_eq!(&lines[1..], ["mqgl=1.000000", "sqgl=0.000000", "psnr=inf"]);
}

#[test]
fn sigma_override_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_png(dir.path(), "a.png", 40, 30, 1);
    let noisy = dir.path().join("b.png");
    add_gaussian_noise(&natural_image(40, 30, 1).unwrap(), 8.0, 2)
        .unwrap()
        .save_png(&noisy)
        .unwrap();
    let o = qgl(&["score", &a, noisy.to_str().unwrap(), "--sigma", "1.0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.starts_with("# config sigma=1.000000 k=1.414214"),
        "{out}"
    );
    let mqgl: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("mqgl="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(mqgl < 1.0);
}

#[test]
fn mismatched_dimensions_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_png(dir.path(), "a.png", 40, 30, 1);
    let b = write_png(dir.path(), "b.png", 32, 30, 1);
    let o = qgl(&["score", &a, &b]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("40x30") && err.contains("32x30"), "{err}");
}

#[test]
fn usage_errors_exit_1() {
    let o = qgl(&["edge-analysis", "--sigmas", "0", "--out-dir", "/tmp/unused"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
    assert_eq!(
        qgl(&["score", "a.png", "b.png", "--sigma", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qgl(&["score", "a.png", "b.png", "--bogus"]).status.code(),
        Some(1)
    );
    assert_eq!(qgl(&["score", "a.png"]).status.code(), Some(1));
    assert_eq!(
        qgl(&["eval", "m.csv", "--out", "o.csv", "--threads", "0"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn missing_files_exit_3() {
    let o = qgl(&["score", "/nonexistent/a.png", "/nonexistent/b.png"]);
    assert_eq!(o.status.code(), Some(3));
    let o = qgl(&["eval", "/nonexistent/m.csv", "--out", "/tmp/never.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn invalid_manifest_rows_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write_png(dir.path(), "a.png", 20, 20, 1);
    write_png(dir.path(), "b.png", 24, 20, 2);
    let manifest = dir.path().join("m.csv");
    std::fs::write(
        &manifest,
        "database,distortion_type,ref_path,dist_path,subjective\n\
         X,blur,a.png,a.png,1.0\n\
         X,blur,a.png,b.png,2.0\n",
    )
    .unwrap();
    let out = dir.path().join("r.csv");
    let o = qgl(&[
        "eval",
        manifest.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn help_lists_defaults() {
    let o = qgl(&["--help"]);
    assert!(o.status.success());
    let help = stdout(&o);
    for needle in [
        "--sigma",
        "0.5",
        "--k",
        "sqrt(2) * sigma",
        "--c0",
        "--c1",
        "0.0009",
        "--norm-scale-mult",
        "--threads",
        "--metrics",
    ] {
        assert!(help.contains(needle), "missing {needle}:\n{help}");
    }
    let sub = stdout(&qgl(&["shift-bench", "--help"]));
    assert!(
        sub.contains("--max-shift") && sub.contains("[default: 10]"),
        "{sub}"
    );
}

#[test]
fn edge_analysis_writes_collapsing_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("edge");
    let o = qgl(&[
        "edge-analysis",
        "--out-dir",
        out.to_str().unwrap(),
        "--samples",
        "81",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let profiles = std::fs::read_to_string(out.join("profiles.csv")).unwrap();
    let mut lines = profiles.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sigma,k,x,x_over_sigma,d1,d2,r,r_normalized,dr"
    );
    // rows at equal x / sigma share the normalized R across the three scales
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3 * 81);
    for i in 0..81 {
        let (a, b, c) = (&rows[i], &rows[81 + i], &rows[162 + i]);
        assert_eq!(a[3], b[3]);
        assert!((a[7] - b[7]).abs() <= 1e-6 * a[7].abs().max(1e-12));
        assert!((a[7] - c[7]).abs() <= 1e-6 * a[7].abs().max(1e-12));
    }

    let ideal = std::fs::read_to_string(out.join("ideal_k.csv")).unwrap();
    let first: Vec<&str> = ideal.lines().nth(1).unwrap().split(',').collect();
    let beta: f64 = first[0].parse().unwrap();
    assert!(beta < 0.01);
    for v in &first[1..] {
        assert!((v.parse::<f64>().unwrap() - 1.0).abs() < 1e-3);
    }
}

#[test]
fn kernels_dump_all_four_filters() {
    let o = qgl(&["kernels", "--sigma", "0.5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "kernel,sigma,y,x,tap");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // radius 2 -> 25 taps per kernel
    assert_eq!(rows.len(), 100);
    let sum = |name: &str| -> f64 {
        rows.iter()
            .filter(|r| r[0] == name)
            .map(|r| r[4].parse::<f64>().unwrap())
            .sum()
    };
    assert!((sum("gaussian") - 1.0).abs() < 1e-5);
    assert!(sum("log").abs() < 1e-5);
    let dx_right = rows
        .iter()
        .find(|r| r[0] == "dx" && r[2] == "0" && r[3] == "1")
        .unwrap();
    assert!((dx_right[4].parse::<f64>().unwrap() + 0.344628).abs() < 1e-6);
}
