use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use dogm_threat::bench::{run_bench, BenchConfig, BenchError};
use dogm_threat::grid::{write_frame, FrameReader};
use dogm_threat::pipeline::analyze_frame_with_plan;
use dogm_threat::prediction::{parse_plan, serialize_plan};
use dogm_threat::sim::{build_scenario, run_scenario, synthesize_frame, RunError, Scenario, ScenarioRun};
use dogm_threat::threat::DEFAULT_RASTER_MARGIN;
use dogm_threat::{attention_raster, HullPolygon, ThreatStatus};

use crate::config::RunConfig;
use crate::svg;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Scenario(String),
    Input(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Scenario(_) => 3,
            CliError::Input(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration: {m}"),
            CliError::Scenario(m) => write!(f, "scenario: {m}"),
            CliError::Input(m) => write!(f, "input: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_err(&path))
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Ok(dir)
}

fn scenario(cfg: &RunConfig) -> Result<Scenario, CliError> {
    build_scenario(cfg.scenario, cfg.params).map_err(|e| CliError::Scenario(e.to_string()))
}

fn run_error(e: RunError) -> CliError {
    match e {
        RunError::Config(e) => CliError::Config(e.to_string()),
        RunError::Noise(m) => CliError::Config(m),
        RunError::Plan(e) => CliError::Scenario(e.to_string()),
    }
}

fn hull_text(h: &HullPolygon) -> String {
    h.points().iter().map(|p| format!("{} {}", p.x, p.y)).collect::<Vec<_>>().join(";")
}

fn status_name(s: ThreatStatus) -> &'static str {
    match s {
        ThreatStatus::Threat => "threat",
        ThreatStatus::OnTrajectory => "on_trajectory",
        ThreatStatus::NoThreat => "no_threat",
    }
}

/// One row per frame: status counts and hull vertex dumps for plotting.
fn frames_csv(run: &ScenarioRun) -> String {
    let mut s = String::from("t,threat,on_trajectory,no_threat,collinear_contacts,prior_contact,actor_cluster,ego_hull,cluster_hulls\n");
    for f in &run.frames {
        let r = &f.report;
        let clusters = r
            .entries
            .iter()
            .map(|e| format!("{}:{}:{}", e.cluster_id, status_name(e.status), hull_text(&e.hull)))
            .collect::<Vec<_>>()
            .join("|");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            f.t,
            r.count(ThreatStatus::Threat),
            r.count(ThreatStatus::OnTrajectory),
            r.count(ThreatStatus::NoThreat),
            r.collinear_contacts,
            f.prior_contact,
            f.actor_cluster.map_or(String::new(), |c| c.to_string()),
            hull_text(&r.ego_hull),
            clusters
        );
    }
    s
}

fn scenario_frames(s: &Scenario, cfg: &RunConfig, count: usize) -> String {
    let mut text = String::new();
    for n in 0..count {
        write_frame(&mut text, &synthesize_frame(s, n, &cfg.noise));
    }
    text
}

/// Number of frames `run` evaluates: every frame up to the collision.
fn frames_until_toc(s: &Scenario) -> usize {
    (0..).take_while(|&n| s.frame_time(n) <= s.toc).count()
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    write_file(&dir, "config.txt", &cfg.echo())?;
    let s = scenario(cfg)?;
    let run = run_scenario(&s, &cfg.noise, &cfg.pipeline).map_err(run_error)?;

    let doc = json!({
        "scenario": cfg.scenario.name(),
        "horizon": cfg.pipeline.prediction.horizon,
        "phi_u_deg": cfg.phi_u_deg,
        "seed": cfg.noise.seed,
        "lag_gain": cfg.noise.lag_gain,
        "frames": run.frames.len(),
        "result": run.result,
    });
    let result = serde_json::to_string_pretty(&doc).expect("json") + "\n";
    write_file(&dir, "result.json", &result)?;
    write_file(&dir, "frames.csv", &frames_csv(&run))?;

    if cfg.emit_frames {
        let reports: String = run.frames.iter().map(|f| f.report.to_json_line() + "\n").collect();
        write_file(&dir, "reports.jsonl", &reports)?;
        write_file(&dir, "frames.dogm", &scenario_frames(&s, cfg, run.frames.len()))?;
        write_file(&dir, "ego.plan", &serialize_plan(&s.ego_plan))?;
    }
    if cfg.emit_svg {
        let n = run
            .frames
            .iter()
            .position(|f| f.report.has_threat())
            .unwrap_or(run.frames.len().saturating_sub(1));
        let frame = synthesize_frame(&s, n, &cfg.noise);
        let analysis = analyze_frame_with_plan(&frame, &s.ego_plan, &cfg.pipeline).map_err(|e| CliError::Scenario(e.to_string()))?;
        let raster = attention_raster(&analysis.report, &frame, DEFAULT_RASTER_MARGIN);
        let t = frame.timestamp();
        let scene = svg::Scene {
            frame: &frame,
            analysis: &analysis,
            raster: &raster,
            ego: s.ego_footprint(t),
            actor: s.actor.footprint(t),
            prior_lane: &s.prior_lane,
        };
        write_file(&dir, "scene.svg", &svg::render(&scene))?;
        write_file(&dir, "attention.attn", &raster.serialize())?;
    }
    print!("{result}");
    Ok(())
}

pub fn detect(cfg: &RunConfig) -> Result<(), CliError> {
    let frames_path = cfg.frames.as_ref().ok_or_else(|| CliError::Config("`frames` is required for detect".into()))?;
    let plan_path = cfg.plan.as_ref().ok_or_else(|| CliError::Config("`plan` is required for detect".into()))?;

    let plan_text = fs::read_to_string(plan_path).map_err(|e| CliError::Input(format!("{}: {e}", plan_path.display())))?;
    let plan = parse_plan(&plan_text).map_err(|e| CliError::Input(format!("{}: {e}", plan_path.display())))?;
    let file = File::open(frames_path).map_err(|e| CliError::Input(format!("{}: {e}", frames_path.display())))?;

    let sink: Box<dyn Write> = match &cfg.out {
        Some(p) => Box::new(File::create(p).map_err(io_err(p))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(sink);
    let write_err = |e: io::Error| CliError::Io(format!("writing reports: {e}"));
    for frame in FrameReader::new(BufReader::new(file)) {
        let frame = frame.map_err(|e| CliError::Input(format!("{}: {e}", frames_path.display())))?;
        let analysis = analyze_frame_with_plan(&frame, &plan, &cfg.pipeline)
            .map_err(|e| CliError::Input(format!("{}: t = {}: {e}", plan_path.display(), frame.timestamp())))?;
        writeln!(out, "{}", analysis.report.to_json_line()).map_err(write_err)?;
        out.flush().map_err(write_err)?;
    }
    Ok(())
}

pub fn bench(cfg: &RunConfig) -> Result<(), CliError> {
    let bench_cfg = BenchConfig { frames: cfg.bench_frames, scenario: cfg.scenario, noise: cfg.noise };
    let report = run_bench(&bench_cfg, &cfg.pipeline).map_err(|e| match e {
        BenchError::Scenario(e) => CliError::Scenario(e.to_string()),
        BenchError::Run(e) => run_error(e),
        BenchError::NoFrames => CliError::Config("bench_frames must be at least 1".into()),
    })?;
    let text = serde_json::to_string_pretty(&report).expect("json") + "\n";
    if cfg.out.is_some() {
        let dir = out_dir(cfg)?;
        write_file(&dir, "config.txt", &cfg.echo())?;
        write_file(&dir, "bench.json", &text)?;
    }
    print!("{text}");
    Ok(())
}

pub fn export(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let s = scenario(cfg)?;
    write_file(&dir, "config.txt", &cfg.echo())?;
    write_file(&dir, "frames.dogm", &scenario_frames(&s, cfg, frames_until_toc(&s)))?;
    write_file(&dir, "ego.plan", &serialize_plan(&s.ego_plan))?;
    println!("{}", dir.display());
    Ok(())
}
