use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use retina_mp::io::{read_grid_csv, write_pgm};
use retina_mp::Grid;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_retina-mp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/walkthrough")
}

fn script() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/walkthrough.script")
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines().skip_while(|l| !l.starts_with("integration,"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines
        .take(3)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn energy_defaults_print_reference_table() {
    let out = run(&["energy"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for cell in [
        "2.2400 nJ",
        "0.5190 nJ",
        "345.5200 pJ",
        "4.9336 pJ",
        "0.5239 nJ",
        "2.2449 nJ",
    ] {
        assert!(text.contains(cell), "{cell} missing:\n{text}");
    }
}

#[test]
fn energy_readout_scales_with_spikes() {
    let base = String::from_utf8(run(&["energy"]).stdout).unwrap();
    let zero = String::from_utf8(run(&["energy", "--spikes", "0"]).stdout).unwrap();
    let double = String::from_utf8(run(&["energy", "--spikes", "56"]).stdout).unwrap();
    assert!(csv_column(&zero, "readout_j").iter().all(|&v| v == 0.0));
    for (a, b) in csv_column(&base, "readout_j")
        .iter()
        .zip(csv_column(&double, "readout_j"))
    {
        assert_eq!(2.0 * a, b);
    }
}

#[test]
fn energy_writes_files_when_out_given() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["energy", "--address-width", "--out", s(dir.path())])
        .status
        .success());
    let csv = fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    let readout = csv_column(&csv, "readout_j");
    assert!((readout[0] - 28.0 * 6.0 * 12.34e-12).abs() < 1e-20);
}

fn write_frames(dir: &Path, values: &[u8]) {
    for (i, &v) in values.iter().enumerate() {
        write_pgm(&dir.join(format!("frame_{i}.pgm")), &Grid::filled(4, 4, v)).unwrap();
    }
}

#[test]
fn convert_is_deterministic_with_default_threshold() {
    let frames = tempfile::tempdir().unwrap();
    write_frames(frames.path(), &[100, 150, 201]);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for out in [&a, &b] {
        let o = run(&[
            "convert",
            s(frames.path()),
            "--out",
            s(out.path()),
            "--quiet",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = fs::read(a.path().join("events.csv")).unwrap();
    assert_eq!(csv, fs::read(b.path().join("events.csv")).unwrap());
    let text = String::from_utf8(csv).unwrap();
    // +50 is not above threshold; +51 is.
    assert!(!text.lines().any(|l| l.starts_with("0,")));
    assert_eq!(text.lines().filter(|l| l.starts_with("1,")).count(), 16);
}

#[test]
fn missing_input_exits_2() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["convert", "/definitely/not/here", "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_exits_3_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(&cfg, "[retina]\nks = 4\nspeed = 9\n").unwrap();
    let o = run(&[
        "--config",
        s(&cfg),
        "run",
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn config_values_reach_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(&cfg, "retina.ks = 6\ndigital.prediction_levels = 2\n").unwrap();
    let out = dir.path().join("o");
    let o = run(&[
        "--config",
        s(&cfg),
        "--quiet",
        "run",
        "--size",
        "24",
        "--steps",
        "6",
        "--radius",
        "3",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("retina.ks = 6\n"));
    assert!(summary.contains("digital.prediction_levels = 2\n"));
}

#[test]
fn digital_script_matches_golden_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["digital", s(&script()), "--out", s(dir.path()), "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut compared = 0;
    for entry in fs::read_dir(golden_dir()).unwrap() {
        let golden = entry.unwrap().path();
        let name = golden.file_name().unwrap();
        let produced = if name == "readout.csv" {
            dir.path().join(name)
        } else {
            dir.path().join("digital").join(name)
        };
        assert_eq!(
            fs::read(&produced).unwrap(),
            fs::read(&golden).unwrap(),
            "{name:?}"
        );
        compared += 1;
    }
    assert_eq!(compared, 37);
    assert!(!dir.path().join(".lock").exists());
}

#[test]
fn run_refuses_locked_output() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(".lock"), "").unwrap();
    let o = run(&[
        "run",
        "--size",
        "16",
        "--steps",
        "4",
        "--radius",
        "2",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("summary.txt").exists());
}

#[test]
fn mirror_flag_mirrors_digital_state() {
    let base = tempfile::tempdir().unwrap();
    let mirr = tempfile::tempdir().unwrap();
    let args = [
        "--quiet",
        "run",
        "--pipeline",
        "digital",
        "--size",
        "32",
        "--steps",
        "10",
        "--radius",
        "4",
    ];
    assert!(bin()
        .args(args)
        .args(["--out", s(base.path())])
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(args)
        .args(["--mirror", "--out", s(mirr.path())])
        .status()
        .unwrap()
        .success());
    for t in 0..9 {
        for field in ["amplified_spike", "vstore"] {
            let name = format!("{field}_{t}.csv");
            let a: Grid<f64> = read_grid_csv(&base.path().join("digital").join(&name)).unwrap();
            let b: Grid<f64> = read_grid_csv(&mirr.path().join("digital").join(&name)).unwrap();
            assert_eq!(a.mirrored(), b, "{name}");
        }
    }
    assert!(!base.path().join("mp.csv").exists());
}

#[test]
fn render_reproduces_run_heatmaps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&[
        "--quiet",
        "run",
        "--pipeline",
        "retina",
        "--size",
        "24",
        "--steps",
        "8",
        "--radius",
        "3",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let rendered = dir.path().join("render");
    let o = run(&[
        "--quiet",
        "render",
        s(&out.join("mp.csv")),
        "--out",
        s(&rendered),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for entry in fs::read_dir(out.join("heatmaps")).unwrap() {
        let p = entry.unwrap().path();
        let q = rendered.join("heatmaps").join(p.file_name().unwrap());
        assert_eq!(fs::read(&p).unwrap(), fs::read(&q).unwrap());
    }
}
