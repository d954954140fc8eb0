use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use inverse_spectrum::Dataset;
use reflectionless::{Execution, Grid, PrecisionPolicy, PresetKind, Reconstruction};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_inverse-spectrum"));
    c.env_remove("INVERSE_SPECTRUM_PRECISION_BITS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn csv(path: &Path) -> Dataset {
    Dataset::from_csv(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn presets_lists_every_tag() {
    let out = run(&["presets"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for tag in PresetKind::TAGS {
        assert!(text.contains(tag), "{text}");
    }
}

#[test]
fn potential_writes_levels_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = run(&["potential", "--preset", "lost", "--out", out_dir]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let levels = csv(&dir.path().join("levels.csv"));
    assert_eq!(levels.column("energy").unwrap(), &[-42.0, -23.0, -16.0, -15.0, -8.0, -4.0]);
    let v = csv(&dir.path().join("potential.csv"));
    let r = Reconstruction::from_preset(&PresetKind::Lost).unwrap();
    let want = r
        .potential_profile(&Grid::default_figure(), &PrecisionPolicy::default(), Execution::Parallel)
        .unwrap();
    for (got, want) in v.column("V").unwrap().iter().zip(&want.values) {
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300));
    }
    let svg = fs::read_to_string(dir.path().join("potential.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="level""#).count(), 6);
    assert!(dir.path().join("potential.dat").exists());
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run(&["potential", "--preset", "sho", "--grid", "-6:6:241", "--out", d.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["potential.csv", "levels.csv", "potential.dat", "potential.svg"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn verify_reports_json_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = run(&["verify", "--preset", "isw", "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert!(json["checks"].as_array().unwrap().len() > 20);

    // a grid too short for the tails to decay
    let out = run(&["verify", "--preset", "sho", "--grid", "-2:2:401"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn bound_and_scatter_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(run(&["bound", "--preset", "sho", "--out", d]).status.code(), Some(0));
    let states = csv(&dir.path().join("bound.csv"));
    assert_eq!(states.names().count(), 5);
    assert_eq!(run(&["bound", "--preset", "sho", "--raw", "--out", d]).status.code(), Some(0));
    assert!(csv(&dir.path().join("bound.csv")).column("psi_1").is_some());

    let out = run(&["scatter", "--preset", "hydrogen", "--energy", "1,5", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let s = csv(&dir.path().join("scatter_5.csv"));
    let density = s.column("density").unwrap();
    assert!((density[density.len() - 1] - 1.0).abs() < 1e-3);
    assert_eq!(run(&["scatter", "--preset", "sho", "--out", d]).status.code(), Some(1));
}

#[test]
fn spectrum_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("levels.json");
    fs::write(&file, r#"{"kappas": [2, 1]}"#).unwrap();
    let out = run(&["potential", "--spectrum", file.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv(&dir.path().join("levels.csv")).column("energy").unwrap(), &[-4.0, -1.0]);
    fs::write(&file, r#"{"energies": [-1], "kappas": [1]}"#).unwrap();
    assert_eq!(run(&["potential", "--spectrum", file.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn input_errors_exit_with_one() {
    assert_eq!(run(&["potential", "--preset", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["potential"]).status.code(), Some(1));
    assert_eq!(run(&["potential", "--preset", "sho", "--grid", "3:1:10"]).status.code(), Some(1));
    assert_eq!(run(&["potential", "--preset", "sho", "--precision", "quad"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let out = bin()
        .args(["verify", "--preset", "sho", "--precision", "extended"])
        .env("INVERSE_SPECTRUM_PRECISION_BITS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn environment_widens_extended_arithmetic() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["bound", "--preset", "sho", "--grid", "-4:4:41", "--precision", "extended"])
        .args(["--out", dir.path().to_str().unwrap()])
        .env("INVERSE_SPECTRUM_PRECISION_BITS", "160")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("extended:160"));
}
