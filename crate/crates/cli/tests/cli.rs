use std::path::Path;
use std::process::{Command, Output};

use poreaxis::geom::Point;
use poreaxis::io;

const FOUR_DISKS: &str = r#"{
  "dim": 2,
  "domain": { "lo": [0, 0], "hi": [100, 100], "faces": ["closed", "closed", "closed", "closed"] },
  "solids": [
    { "kind": "ball", "center": [25, 25], "radius": 20 },
    { "kind": "ball", "center": [75, 25], "radius": 20 },
    { "kind": "ball", "center": [25, 75], "radius": 20 },
    { "kind": "ball", "center": [75, 75], "radius": 20 }
  ]
}
"#;

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poreaxis")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("disks.json"), FOUR_DISKS).unwrap();
    dir
}

fn packing_doc() -> String {
    let c = [12.5, 37.5, 62.5, 87.5];
    let mut solids = Vec::new();
    for x in c {
        for y in c {
            for z in c {
                solids.push(format!(r#"{{ "kind": "ball", "center": [{x}, {y}, {z}], "radius": 12.5 }}"#));
            }
        }
    }
    format!(
        r#"{{ "dim": 3, "domain": {{ "lo": [0, 0, 0], "hi": [100, 100, 100], "faces": ["closed", "closed", "closed", "closed", "closed", "closed"] }},
  "solids": [{}] }}"#,
        solids.join(",\n")
    )
}

#[test]
fn extract_packing_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("packing.json"), packing_doc()).unwrap();
    let out = run(&["extract", "--scene", "packing.json", "--out", "out/"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["pores.csv", "throats.csv", "network.json"] {
        assert!(dir.path().join("out").join(f).is_file(), "{f}");
    }
    let vtk = run(&["render", "--scene", "packing.json", "--network", "out", "--out", "net.vtk"], dir.path());
    assert_eq!(vtk.status.code(), Some(0));
    let svg = run(&["render", "--scene", "packing.json", "--network", "out", "--out", "net.svg"], dir.path());
    assert_eq!(svg.status.code(), Some(1));
}

#[test]
fn compare_accepts_extraction_and_rejects_shifted_network() {
    let dir = setup();
    let p = dir.path();
    assert_eq!(run(&["extract", "--scene", "disks.json", "--out", "net"], p).status.code(), Some(0));
    assert_eq!(run(&["oracle", "--scene", "disks.json", "--eps", "0.25", "--out", "grid"], p).status.code(), Some(0));
    assert!(p.join("grid/dist.csv").is_file());
    let ok = run(&["compare", "--network", "net", "--ridge", "grid/ridge.csv", "--eps", "0.25"], p);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));

    let mut net = io::import_network(&p.join("net")).unwrap();
    let shift = Point::xy(3.0, 0.0);
    for pore in &mut net.pores {
        pore.center += shift;
    }
    for t in &mut net.throats {
        t.center += shift;
    }
    for path in &mut net.paths {
        for q in &mut path.points {
            *q += shift;
        }
    }
    io::export_network(&net, &p.join("shifted")).unwrap();
    let bad = run(&["compare", "--network", "shifted", "--ridge", "grid/ridge.csv", "--eps", "0.25"], p);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn bench_grid_cost_quadruples() {
    let dir = setup();
    let out = run(&["bench", "--scene", "disks.json", "--eps", "1,0.5,0.25"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let cells: Vec<f64> = text
        .lines()
        .skip(1)
        .take(3)
        .map(|l| l.split_whitespace().nth(2).unwrap().parse().unwrap())
        .collect();
    assert!((cells[1] / cells[0] - 4.0).abs() < 0.2, "{text}");
    assert!((cells[2] / cells[0] - 16.0).abs() < 0.8, "{text}");
    let evals: Vec<&str> = text.lines().skip(1).take(3).map(|l| l.split_whitespace().nth(3).unwrap()).collect();
    assert!(evals.iter().all(|e| *e == evals[0]));
    assert!(text.contains("per-center ratio (d=3, L/eps=10): 1000"));
}

#[test]
fn render_svg_draws_solids_and_axes() {
    let dir = setup();
    let p = dir.path();
    assert_eq!(run(&["extract", "--scene", "disks.json", "--out", "net"], p).status.code(), Some(0));
    assert_eq!(run(&["render", "--scene", "disks.json", "--network", "net", "--out", "net.svg"], p).status.code(), Some(0));
    let svg = std::fs::read_to_string(p.join("net.svg")).unwrap();
    assert_eq!(svg.matches(r#"<circle class="solid""#).count(), 4);
    assert!(svg.contains("<polyline"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = setup();
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["bench", "--scene", "disks.json", "--eps", "0"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["extract", "--scene", "disks.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn validation_errors_exit_1() {
    let dir = setup();
    let p = dir.path();
    let missing = run(&["extract", "--scene", "missing.json", "--out", "o"], p);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());
    std::fs::write(p.join("bad.json"), FOUR_DISKS.replace("[75, 75]", "[75, 75, 1]")).unwrap();
    let bad = run(&["extract", "--scene", "bad.json", "--out", "o"], p);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 8"));
}

#[test]
fn config_file_and_flags_override_defaults() {
    let dir = setup();
    let p = dir.path();
    std::fs::write(p.join("cfg.json"), r#"{ "trace": { "keep_dead_ends": true }, "eps": [1] }"#).unwrap();
    let out = run(
        &["extract", "--scene", "disks.json", "--config", "cfg.json", "--keep-dead-ends", "false", "--seed-point", "40,40", "--threads", "2", "--out", "net"],
        p,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let pores = std::fs::read_to_string(p.join("net/pores.csv")).unwrap();
    assert!(!pores.contains("dead-end"));
    std::fs::write(p.join("typo.json"), r#"{ "trace": { "half_angel": 30 } }"#).unwrap();
    let typo = run(&["extract", "--scene", "disks.json", "--config", "typo.json", "--out", "net2"], p);
    assert_eq!(typo.status.code(), Some(1));
}
