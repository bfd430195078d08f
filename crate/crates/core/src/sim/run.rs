//! Closed-form scenario runs: per-frame detection, detection times and the
//! relative time-to-react gain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::ConfigError;
use crate::geometry::{edges_cross, point_in_convex, HullPolygon};
use crate::grid::CellIndex;
use crate::pipeline::{analyze_frame_with_plan, PipelineConfig};
use crate::prediction::PlanError;
use crate::threat::ThreatReport;

use super::scenario::Scenario;
use super::synth::{synthesize_labeled, NoiseConfig};

/// Relative increase of the time to react: `ttr_ours / ttr_prior - 1`.
/// Undefined when the baseline leaves no time to react.
pub fn rittr(ttr_ours: f64, ttr_prior: f64) -> Option<f64> {
    if !(ttr_prior > 0.0) || !(ttr_ours >= 0.0) || !ttr_ours.is_finite() || !ttr_prior.is_finite() {
        return None;
    }
    Some(ttr_ours / ttr_prior - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub toc: Option<f64>,
    pub tod_prior: Option<f64>,
    pub tod_ours: Option<f64>,
    pub ttr_prior: Option<f64>,
    pub ttr_ours: Option<f64>,
    pub rittr: Option<f64>,
}

impl ScenarioResult {
    pub fn from_times(toc: f64, tod_prior: Option<f64>, tod_ours: Option<f64>) -> Self {
        let ttr_prior = tod_prior.map(|t| toc - t);
        let ttr_ours = tod_ours.map(|t| toc - t);
        let rittr = match (ttr_ours, ttr_prior) {
            (Some(o), Some(p)) => rittr(o, p),
            _ => None,
        };
        Self { toc: Some(toc), tod_prior, tod_ours, ttr_prior, ttr_ours, rittr }
    }
}

/// Per-frame record of a scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub t: f64,
    /// True actor heading, radians, unwrapped.
    pub actor_heading: f64,
    /// Id of the cluster matched to the actor, if it survived
    /// plausibilization.
    pub actor_cluster: Option<usize>,
    /// Box of the matched cluster meets the ego hull.
    pub prior_contact: bool,
    pub report: ThreatReport,
}

impl FrameRecord {
    pub fn actor_entry(&self) -> Option<&crate::threat::ThreatEntry> {
        let id = self.actor_cluster?;
        self.report.entries.iter().find(|e| e.cluster_id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub result: ScenarioResult,
    pub frames: Vec<FrameRecord>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid noise configuration: {0}")]
    Noise(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Any corner inside the ego hull, or a proper edge crossing.
pub fn box_meets_hull(b: &HullPolygon, ego: &HullPolygon) -> bool {
    b.points().iter().any(|&p| point_in_convex(p, ego)) || edges_cross(b, ego)
}

/// Runs every frame up to and including the time of collision.
pub fn run_scenario(scenario: &Scenario, noise: &NoiseConfig, cfg: &PipelineConfig) -> Result<ScenarioRun, RunError> {
    cfg.validate()?;
    noise.validate().map_err(RunError::Noise)?;
    let mut frames = Vec::new();
    let (mut tod_prior, mut tod_ours) = (None, None);
    let mut n = 0;
    loop {
        let t = scenario.frame_time(n);
        if t > scenario.toc {
            break;
        }
        let (frame, labels) = synthesize_labeled(scenario, n, noise);
        let analysis = analyze_frame_with_plan(&frame, &scenario.ego_plan, cfg)?;
        let actor_cluster = match_actor(&analysis.detection.clusters, &labels);
        let prior_contact = actor_cluster
            .and_then(|id| analysis.report.entries.iter().find(|e| e.cluster_id == id))
            .is_some_and(|e| box_meets_hull(&e.attributes.bbox.to_hull(), &analysis.report.ego_hull));
        if tod_ours.is_none() && analysis.report.has_threat() {
            tod_ours = Some(t);
        }
        if tod_prior.is_none() && prior_contact {
            tod_prior = Some(t);
        }
        frames.push(FrameRecord {
            t,
            actor_heading: scenario.actor.pose(t).1,
            actor_cluster,
            prior_contact,
            report: analysis.report,
        });
        n += 1;
    }
    Ok(ScenarioRun { result: ScenarioResult::from_times(scenario.toc, tod_prior, tod_ours), frames })
}

/// Cluster sharing the most cells with the ground-truth actor cells.
fn match_actor(clusters: &[(crate::clustering::Cluster, crate::clustering::ClusterAttributes)], labels: &[CellIndex]) -> Option<usize> {
    debug_assert!(labels.windows(2).all(|w| w[0] < w[1]));
    clusters
        .iter()
        .map(|(c, _)| (c.id, c.members.iter().filter(|m| labels.binary_search(m).is_ok()).count()))
        .filter(|&(_, k)| k > 0)
        .max_by_key(|&(id, k)| (k, std::cmp::Reverse(id)))
        .map(|(id, _)| id)
}
