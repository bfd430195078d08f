//! Per-stage wall-time benchmark over synthesized frames.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::pipeline::{analyze_frame_timed, PipelineConfig, StageTimings};
use crate::sim::{build_scenario, synthesize_frame, NoiseConfig, RunError, ScenarioError, ScenarioKind, ScenarioParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub frames: usize,
    pub scenario: ScenarioKind,
    pub noise: NoiseConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { frames: 300, scenario: ScenarioKind::TurningIn, noise: NoiseConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStat {
    pub stage: String,
    pub median_ms: f64,
    pub p95_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub frames: usize,
    pub grid_width: usize,
    pub grid_height: usize,
    pub stages: Vec<StageStat>,
    /// Mask, DBSCAN and plausibilization per frame.
    pub clustering: StageStat,
    /// Ego prediction, cluster prediction and classification per frame.
    pub threat: StageStat,
    pub total: StageStat,
    /// Median threat time over median clustering time, in percent.
    pub overhead_percent: f64,
    /// Clusters evaluated across all frames; a workload fingerprint.
    pub clusters_evaluated: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("benchmark needs at least one frame")]
    NoFrames,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Nearest-rank percentile of an unsorted sample.
fn percentile(samples: &mut [f64], q: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let rank = ((q * samples.len() as f64).ceil() as usize).clamp(1, samples.len());
    samples[rank - 1]
}

fn stat(stage: &str, mut samples: Vec<f64>) -> StageStat {
    StageStat { stage: stage.to_string(), median_ms: percentile(&mut samples, 0.5), p95_ms: percentile(&mut samples, 0.95) }
}

/// Replays `cfg.frames` frames, cycling through the scenario. Frame
/// synthesis is not timed.
pub fn run_bench(cfg: &BenchConfig, pipeline: &PipelineConfig) -> Result<BenchReport, BenchError> {
    if cfg.frames == 0 {
        return Err(BenchError::NoFrames);
    }
    pipeline.validate().map_err(RunError::from)?;
    cfg.noise.validate().map_err(RunError::Noise)?;
    let scenario = build_scenario(cfg.scenario, ScenarioParams::defaults(cfg.scenario))?;
    let cycle = scenario.frame_count();
    let mut timings: Vec<StageTimings> = Vec::with_capacity(cfg.frames);
    let mut clusters_evaluated = 0;
    for i in 0..cfg.frames {
        let frame = synthesize_frame(&scenario, i % cycle, &cfg.noise);
        let (analysis, t) = analyze_frame_timed(&frame, &scenario.ego_plan, pipeline).map_err(RunError::from)?;
        clusters_evaluated += analysis.report.entries.len();
        timings.push(t);
    }
    let series = |f: &dyn Fn(&StageTimings) -> Duration| timings.iter().map(|t| ms(f(t))).collect::<Vec<_>>();
    let stages = StageTimings::STAGES.iter().map(|&s| stat(s, series(&|t| t.get(s)))).collect();
    let clustering = stat("clustering", series(&|t| t.clustering()));
    let threat = stat("threat", series(&|t| t.threat()));
    let total = stat("total", series(&|t| t.total()));
    let overhead_percent = if clustering.median_ms > 0.0 { 100.0 * threat.median_ms / clustering.median_ms } else { f64::INFINITY };
    Ok(BenchReport {
        frames: cfg.frames,
        grid_width: scenario.grid.width,
        grid_height: scenario.grid.height,
        stages,
        clustering,
        threat,
        total,
        overhead_percent,
        clusters_evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank() {
        let mut v = vec![5.0, 1.0, 4.0, 2.0, 3.0];
        assert_eq!(percentile(&mut v, 0.5), 3.0);
        assert_eq!(percentile(&mut v, 0.95), 5.0);
        assert_eq!(percentile(&mut [7.0], 0.5), 7.0);
    }

    #[test]
    fn small_run_is_structurally_complete() {
        let cfg = BenchConfig { frames: 5, ..Default::default() };
        let r = run_bench(&cfg, &PipelineConfig::default()).unwrap();
        assert_eq!(r.frames, 5);
        assert_eq!(r.stages.iter().map(|s| s.stage.as_str()).collect::<Vec<_>>(), StageTimings::STAGES);
        assert!(r.stages.iter().all(|s| s.median_ms <= s.p95_ms));
        assert!(matches!(run_bench(&BenchConfig { frames: 0, ..cfg }, &PipelineConfig::default()), Err(BenchError::NoFrames)));
    }
}
