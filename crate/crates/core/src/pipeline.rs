//! Per-frame processing chain: mask → DBSCAN → plausibilization →
//! attributes → prediction → threat evaluation.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::clustering::{
    cluster_attributes, dbscan, plausibilize, search_mask, AttributeError, Cluster, ClusterAttributes, ConfigError,
    DbscanConfig, MaskConfig, PlausibilityConfig, RejectReason, Verdict,
};
use crate::grid::GridFrame;
use crate::geometry::HullPolygon;
use crate::prediction::{predict_ego_area, EgoPlan, PlanError, PredictionConfig};
use crate::threat::{evaluate, ThreatReport};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mask: MaskConfig,
    pub dbscan: DbscanConfig,
    pub plausibility: PlausibilityConfig,
    pub prediction: PredictionConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.mask.validate()?;
        self.dbscan.validate()?;
        self.plausibility.validate()?;
        self.prediction.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DropReason {
    Implausible(RejectReason),
    Attributes(AttributeError),
    /// Mean speed fell below the mask threshold after averaging.
    TooSlow { speed: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Detection {
    /// Plausibilized clusters with their attributes, ordered by id.
    pub clusters: Vec<(Cluster, ClusterAttributes)>,
    pub dropped: Vec<(usize, DropReason)>,
}

/// Mask, cluster, plausibilize and summarise.
pub fn detect_clusters(frame: &GridFrame, cfg: &PipelineConfig) -> Detection {
    let mask = search_mask(frame, &cfg.mask);
    let clusters = dbscan(frame, &mask, cfg.dbscan.eps_cells * frame.cell_size(), cfg.dbscan.min_pts);
    summarise(frame, clusters, cfg)
}

fn summarise(frame: &GridFrame, clusters: Vec<Cluster>, cfg: &PipelineConfig) -> Detection {
    let mut out = Detection::default();
    for c in clusters {
        if let Verdict::Reject(r) = plausibilize(&c, &cfg.plausibility) {
            out.dropped.push((c.id, DropReason::Implausible(r)));
            continue;
        }
        match cluster_attributes(&c, frame.cell_size()) {
            Ok(a) if a.speed < cfg.mask.v_min => out.dropped.push((c.id, DropReason::TooSlow { speed: a.speed })),
            Ok(a) => out.clusters.push((c, a)),
            Err(e) => out.dropped.push((c.id, DropReason::Attributes(e))),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameAnalysis {
    pub detection: Detection,
    pub report: ThreatReport,
}

/// Full chain for one frame against a precomputed ego hull.
pub fn analyze_frame(frame: &GridFrame, ego_hull: &HullPolygon, cfg: &PipelineConfig) -> FrameAnalysis {
    let detection = detect_clusters(frame, cfg);
    let report = evaluate(frame.timestamp(), &detection.clusters, ego_hull, &cfg.prediction);
    FrameAnalysis { detection, report }
}

/// Full chain including the ego prediction at the frame's timestamp.
pub fn analyze_frame_with_plan(frame: &GridFrame, plan: &EgoPlan, cfg: &PipelineConfig) -> Result<FrameAnalysis, PlanError> {
    let ego = predict_ego_area(plan, frame.timestamp(), cfg.prediction.horizon)?;
    Ok(analyze_frame(frame, &ego, cfg))
}

/// Wall time per stage for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub mask: Duration,
    pub dbscan: Duration,
    pub plausibility: Duration,
    pub ego_prediction: Duration,
    pub evaluation: Duration,
}

impl StageTimings {
    pub const STAGES: [&'static str; 5] = ["mask", "dbscan", "plausibility", "ego_prediction", "evaluation"];

    pub fn get(&self, stage: &str) -> Duration {
        match stage {
            "mask" => self.mask,
            "dbscan" => self.dbscan,
            "plausibility" => self.plausibility,
            "ego_prediction" => self.ego_prediction,
            "evaluation" => self.evaluation,
            _ => Duration::ZERO,
        }
    }

    /// Mask, DBSCAN and plausibilization: the cluster-identification
    /// baseline.
    pub fn clustering(&self) -> Duration {
        self.mask + self.dbscan + self.plausibility
    }

    /// Ego prediction plus cluster prediction and classification.
    pub fn threat(&self) -> Duration {
        self.ego_prediction + self.evaluation
    }

    pub fn total(&self) -> Duration {
        self.clustering() + self.threat()
    }
}

/// Same result as [`analyze_frame_with_plan`], with per-stage timings.
pub fn analyze_frame_timed(
    frame: &GridFrame,
    plan: &EgoPlan,
    cfg: &PipelineConfig,
) -> Result<(FrameAnalysis, StageTimings), PlanError> {
    let mut t = StageTimings::default();
    let s = Instant::now();
    let mask = search_mask(frame, &cfg.mask);
    t.mask = s.elapsed();

    let s = Instant::now();
    let clusters = dbscan(frame, &mask, cfg.dbscan.eps_cells * frame.cell_size(), cfg.dbscan.min_pts);
    t.dbscan = s.elapsed();

    let s = Instant::now();
    let detection = summarise(frame, clusters, cfg);
    t.plausibility = s.elapsed();

    let s = Instant::now();
    let ego = predict_ego_area(plan, frame.timestamp(), cfg.prediction.horizon)?;
    t.ego_prediction = s.elapsed();

    let s = Instant::now();
    let report = evaluate(frame.timestamp(), &detection.clusters, &ego, &cfg.prediction);
    t.evaluation = s.elapsed();

    Ok((FrameAnalysis { detection, report }, t))
}
