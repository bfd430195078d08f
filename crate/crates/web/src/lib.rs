//! Browser bindings for the threat-region demo.
//!
//! Everything crosses the boundary as flat `f64` arrays or JSON strings, so
//! the same functions are exercised by native tests.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use dogm_threat::geometry::{convex_hull, hulls_relate, HullRelation};
use dogm_threat::pipeline::analyze_frame_with_plan;
use dogm_threat::sim::{build_scenario, run_scenario, synthesize_frame, NoiseConfig, Scenario, ScenarioKind, ScenarioParams, ScenarioRun};
use dogm_threat::threat::DEFAULT_RASTER_MARGIN;
use dogm_threat::{
    attention_raster, classify, predict_cluster_area, ClusterAttributes, HullPolygon, OrientedBox, PipelineConfig, Point2,
    PredictionConfig, ThreatStatus,
};

fn flat(points: &[Point2]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.x, p.y]).collect()
}

fn points(xy: &[f64]) -> Vec<Point2> {
    xy.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect()
}

/// Predicted occupied area of a box-shaped cluster, as `[x0, y0, x1, y1, ...]`
/// counter-clockwise. Empty when an argument is out of range.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn predict_hull(x: f64, y: f64, heading_deg: f64, speed: f64, length: f64, width: f64, horizon: f64, phi_u_deg: f64) -> Vec<f64> {
    let cfg = PredictionConfig { horizon, phi_u: phi_u_deg.to_radians() };
    if cfg.validate().is_err() || !(speed >= 0.0 && length > 0.0 && width > 0.0) || ![x, y, heading_deg, speed].iter().all(|v| v.is_finite()) {
        return Vec::new();
    }
    let position = Point2::new(x, y);
    let heading = heading_deg.to_radians();
    let attrs = ClusterAttributes {
        position,
        orientation: heading,
        speed,
        bbox: OrientedBox::new(position, heading, length, width),
    };
    flat(predict_cluster_area(&attrs, &cfg).points())
}

#[derive(Serialize)]
struct Relation {
    hull_a: Vec<f64>,
    hull_b: Vec<f64>,
    relation: &'static str,
    /// Status of `a` taken as a cluster prediction against `b` as the ego hull.
    status: &'static str,
}

/// Convex hulls of two point clouds and how they relate. Returns JSON with
/// `hull_a`, `hull_b`, `relation` and `status`, or `{"error": ...}`.
#[wasm_bindgen]
pub fn relate_point_sets(a: &[f64], b: &[f64]) -> String {
    let hull = |xy: &[f64]| convex_hull(&points(xy));
    let (ha, hb) = match (hull(a), hull(b)) {
        (Ok(ha), Ok(hb)) => (ha, hb),
        (Err(e), _) | (_, Err(e)) => return serde_json::json!({ "error": e.to_string() }).to_string(),
    };
    let relation = match hulls_relate(&ha, &hb) {
        HullRelation::Disjoint => "disjoint",
        HullRelation::EdgeIntersect => "edge-intersect",
        HullRelation::H1ContainsH2 => "a-contains-b",
        HullRelation::H2ContainsH1 => "b-contains-a",
    };
    let rel = Relation { hull_a: flat(ha.points()), hull_b: flat(hb.points()), relation, status: status_name(classify(&ha, &hb)) };
    serde_json::to_string(&rel).expect("json")
}

fn status_name(s: ThreatStatus) -> &'static str {
    match s {
        ThreatStatus::Threat => "threat",
        ThreatStatus::OnTrajectory => "on-trajectory",
        ThreatStatus::NoThreat => "no-threat",
    }
}

#[derive(Serialize)]
struct EntryView {
    id: usize,
    status: &'static str,
    hull: Vec<f64>,
    bbox: Vec<f64>,
    heading_deg: f64,
    speed: f64,
}

#[derive(Serialize)]
struct FrameView {
    t: f64,
    cell_size: f64,
    /// Cell centers of every plausibilized cluster.
    cluster_cells: Vec<f64>,
    attention_cells: Vec<f64>,
    ego_hull: Vec<f64>,
    ego_box: Vec<f64>,
    actor_box: Vec<f64>,
    actor_heading_deg: f64,
    entries: Vec<EntryView>,
    prior_contact: bool,
}

/// One simulated scenario, run once up front; frames are rendered on demand.
#[wasm_bindgen]
pub struct ScenarioDemo {
    scenario: Scenario,
    noise: NoiseConfig,
    cfg: PipelineConfig,
    run: ScenarioRun,
}

#[wasm_bindgen]
impl ScenarioDemo {
    /// `kind` is `turning-in`, `turning-over` or `straight-crossing`.
    #[wasm_bindgen(constructor)]
    pub fn new(kind: &str, horizon: f64, phi_u_deg: f64, lag_gain: f64, seed: u64) -> Result<ScenarioDemo, JsError> {
        let kind: ScenarioKind = kind.parse().map_err(|e: String| JsError::new(&e))?;
        let scenario = build_scenario(kind, ScenarioParams::defaults(kind)).map_err(|e| JsError::new(&e.to_string()))?;
        let noise = NoiseConfig { lag_gain, seed, ..NoiseConfig::default() };
        let mut cfg = PipelineConfig::default();
        cfg.prediction = PredictionConfig { horizon, phi_u: phi_u_deg.to_radians() };
        let run = run_scenario(&scenario, &noise, &cfg).map_err(|e| JsError::new(&e.to_string()))?;
        Ok(ScenarioDemo { scenario, noise, cfg, run })
    }

    pub fn frame_count(&self) -> usize {
        self.run.frames.len()
    }

    /// World rectangle covered by the grid: `[x_min, y_min, x_max, y_max]`.
    pub fn bounds(&self) -> Vec<f64> {
        let g = self.scenario.grid;
        let half = 0.5 * g.cell_size;
        vec![
            g.origin.x - half,
            g.origin.y - half,
            g.origin.x - half + g.width as f64 * g.cell_size,
            g.origin.y - half + g.height as f64 * g.cell_size,
        ]
    }

    pub fn prior_lane(&self) -> Vec<f64> {
        flat(self.scenario.prior_lane.points())
    }

    pub fn result_json(&self) -> String {
        serde_json::to_string(&self.run.result).expect("json")
    }

    /// Everything needed to draw frame `n`, as JSON.
    pub fn frame_json(&self, n: usize) -> String {
        let n = n.min(self.frame_count().saturating_sub(1));
        let frame = synthesize_frame(&self.scenario, n, &self.noise);
        let analysis = analyze_frame_with_plan(&frame, &self.scenario.ego_plan, &self.cfg).expect("plan covers the run");
        let raster = attention_raster(&analysis.report, &frame, DEFAULT_RASTER_MARGIN);
        let t = frame.timestamp();
        let g = frame.geometry();
        let attention_cells = (0..g.height)
            .flat_map(|r| (0..g.width).map(move |c| (r, c)))
            .filter(|&(r, c)| raster.get(r, c))
            .flat_map(|(r, c)| {
                let p = g.cell_center(r, c);
                [p.x, p.y]
            })
            .collect();
        let cluster_cells = analysis
            .detection
            .clusters
            .iter()
            .flat_map(|(c, _)| c.states.iter().flat_map(|s| [s.pos.x, s.pos.y]))
            .collect();
        let entries = analysis
            .report
            .entries
            .iter()
            .map(|e| EntryView {
                id: e.cluster_id,
                status: status_name(e.status),
                hull: flat(e.hull.points()),
                bbox: flat(&e.attributes.bbox.corners()),
                heading_deg: e.attributes.orientation.to_degrees(),
                speed: e.attributes.speed,
            })
            .collect();
        let view = FrameView {
            t,
            cell_size: frame.cell_size(),
            cluster_cells,
            attention_cells,
            ego_hull: flat(HullPolygon::points(&analysis.report.ego_hull)),
            ego_box: flat(&self.scenario.ego_footprint(t).corners()),
            actor_box: flat(&self.scenario.actor.footprint(t).corners()),
            actor_heading_deg: self.scenario.actor.pose(t).1.to_degrees(),
            entries,
            prior_contact: self.run.frames[n].prior_contact,
        };
        serde_json::to_string(&view).expect("json")
    }
}
