use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dogm-threat"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn result_json(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("result.json")).unwrap()).unwrap()
}

fn rittr(dir: &Path) -> f64 {
    result_json(dir)["result"]["rittr"].as_f64().expect("rittr defined")
}

#[test]
fn turning_in_run_writes_result() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ti");
    let o = run(&["run", "--scenario", "turning-in", "--horizon", "3.0", "--phi-u", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(rittr(&out) >= 3.0);
    let csv = fs::read_to_string(out.join("frames.csv")).unwrap();
    assert!(csv.starts_with("t,threat,on_trajectory,no_threat,"));
    assert_eq!(csv.lines().count() as u64, 1 + result_json(&out)["frames"].as_u64().unwrap());
    let echoed = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(echoed.contains("scenario = turning-in\n") && echoed.contains("horizon = 3\n"));
}

#[test]
fn angle_uncertainty_raises_turning_over_gain() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("phi0"), tmp.path().join("phi10"));
    for (dir, phi) in [(&a, "0"), (&b, "10")] {
        let o = run(&["run", "--scenario", "turning-over", "--phi-u", phi, "--seed", "7", "--out", dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert!(rittr(&b) > rittr(&a));
    assert!(rittr(&a) > 0.0);
}

#[test]
fn bad_flag_is_usage_error() {
    let o = run(&["run", "--bad-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    let out = tmp.path().join("o");
    fs::write(&cfg, format!("scenario = straight-crossing\nhorizon = 2\nout = {}\n", out.display())).unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--horizon", "2.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let echoed = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(echoed.contains("horizon = 2.5\n"), "{echoed}");
    assert_eq!(result_json(&out)["scenario"], "straight-crossing");
}

#[test]
fn unknown_config_key_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "horizon = 3\nwarp_speed = 9\n").unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("warp_speed"));
}

#[test]
fn out_of_range_threshold_is_config_error() {
    let o = run(&["run", "--phi-u", "80", "--out", tempfile::tempdir().unwrap().path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("phi_u"));
}

#[test]
fn impossible_scenario_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "scenario = straight-crossing\ncrossing_offset = 500\n").unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn detect_reproduces_run_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let run_dir = tmp.path().join("run");
    let export_dir = tmp.path().join("export");
    let o = run(&["run", "--scenario", "turning-over", "--phi-u", "10", "--emit-frames", "--emit-svg", "--out", run_dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["export-scenario", "--scenario", "turning-over", "--out", export_dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(run_dir.join("frames.dogm")).unwrap(), fs::read(export_dir.join("frames.dogm")).unwrap());

    let o = run(&[
        "detect",
        "--phi-u",
        "10",
        "--frames",
        export_dir.join("frames.dogm").to_str().unwrap(),
        "--plan",
        export_dir.join("ego.plan").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), fs::read_to_string(run_dir.join("reports.jsonl")).unwrap());
    let svg = fs::read_to_string(run_dir.join("scene.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

fn exported(tmp: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let dir = tmp.join("export");
    let o = run(&["export-scenario", "--scenario", "straight-crossing", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    (dir.join("frames.dogm"), dir.join("ego.plan"))
}

#[test]
fn empty_frame_file_gives_no_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, plan) = exported(tmp.path());
    let empty = tmp.path().join("empty.dogm");
    fs::write(&empty, "").unwrap();
    let o = run(&["detect", "--frames", empty.to_str().unwrap(), "--plan", plan.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn mass_violation_exits_4_citing_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let (frames, plan) = exported(tmp.path());
    let text = fs::read_to_string(&frames).unwrap();
    let mut lines: Vec<&str> = text.lines().take(10).collect();
    lines[4] = "0.9 0.5 1 1 0 0 0";
    let bad = tmp.path().join("bad.dogm");
    fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let o = run(&["detect", "--frames", bad.to_str().unwrap(), "--plan", plan.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let err = stderr(&o);
    assert!(err.contains("bad.dogm") && err.contains("line 5") && err.contains("cell 3"), "{err}");
}

#[test]
fn detect_without_plan_is_config_error() {
    let o = run(&["detect", "--frames", "nowhere.dogm"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_reports_every_stage() {
    let parse = |o: &Output| -> Value { serde_json::from_slice(&o.stdout).unwrap() };
    let a = run(&["bench", "--bench-frames", "20"]);
    let b = run(&["bench", "--bench-frames", "20"]);
    assert!(a.status.success(), "{}", stderr(&a));
    let (a, b) = (parse(&a), parse(&b));
    let stages = |v: &Value| v["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap().to_string()).collect::<Vec<_>>();
    assert_eq!(stages(&a), ["mask", "dbscan", "plausibility", "ego_prediction", "evaluation"]);
    assert!(a["stages"].as_array().unwrap().iter().all(|s| s["median_ms"].is_number()));
    assert!(a["overhead_percent"].is_number());
    assert_eq!((a["frames"].clone(), stages(&a), a["clusters_evaluated"].clone()), (b["frames"].clone(), stages(&b), b["clusters_evaluated"].clone()));
    assert_eq!((a["grid_width"].as_u64(), a["grid_height"].as_u64()), (Some(300), Some(300)));
}
