//! Threat classification of predicted cluster areas against the ego swept
//! hull, and the binary attention raster derived from threat regions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::clustering::{Cluster, ClusterAttributes};
use crate::geometry::{boundary_contact_without_crossing, hulls_relate, HullPolygon, HullRelation};
use crate::grid::{GridFrame, GridGeometry};
use crate::prediction::{predict_cluster_area, PredictionConfig};

/// Default raster margin around threat boxes, meters.
pub const DEFAULT_RASTER_MARGIN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThreatStatus {
    /// Predicted area crosses the ego hull, or engulfs it.
    Threat,
    /// Predicted area lies inside the ego hull.
    OnTrajectory,
    NoThreat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatEntry {
    pub cluster_id: usize,
    pub status: ThreatStatus,
    pub attributes: ClusterAttributes,
    pub hull: HullPolygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatReport {
    pub timestamp: f64,
    pub ego_hull: HullPolygon,
    pub entries: Vec<ThreatEntry>,
    /// Clusters whose prediction touches the ego hull boundary without a
    /// proper crossing.
    pub collinear_contacts: usize,
}

impl ThreatReport {
    pub fn threats(&self) -> impl Iterator<Item = &ThreatEntry> {
        self.entries.iter().filter(|e| e.status == ThreatStatus::Threat)
    }

    pub fn has_threat(&self) -> bool {
        self.threats().next().is_some()
    }

    pub fn count(&self, status: ThreatStatus) -> usize {
        self.entries.iter().filter(|e| e.status == status).count()
    }

    /// Single-line JSON with fixed key order.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn classify(pred: &HullPolygon, ego_hull: &HullPolygon) -> ThreatStatus {
    match hulls_relate(pred, ego_hull) {
        HullRelation::EdgeIntersect | HullRelation::H1ContainsH2 => ThreatStatus::Threat,
        HullRelation::H2ContainsH1 => ThreatStatus::OnTrajectory,
        HullRelation::Disjoint => ThreatStatus::NoThreat,
    }
}

/// Predicts each cluster's occupied area and classifies it against the ego
/// hull. Entries keep the input order, which the pipeline fixes by id.
pub fn evaluate(
    timestamp: f64,
    clusters: &[(Cluster, ClusterAttributes)],
    ego_hull: &HullPolygon,
    cfg: &PredictionConfig,
) -> ThreatReport {
    let mut collinear_contacts = 0;
    let entries = clusters
        .iter()
        .map(|(c, a)| {
            let hull = predict_cluster_area(a, cfg);
            let status = classify(&hull, ego_hull);
            if status != ThreatStatus::Threat && boundary_contact_without_crossing(&hull, ego_hull) {
                collinear_contacts += 1;
            }
            ThreatEntry {
                cluster_id: c.id,
                status,
                attributes: *a,
                hull,
            }
        })
        .collect();
    ThreatReport {
        timestamp,
        ego_hull: ego_hull.clone(),
        entries,
        collinear_contacts,
    }
}

/// Binary grid congruent with a source frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionRaster {
    pub timestamp: f64,
    pub geometry: GridGeometry,
    pub cells: Vec<bool>,
}

impl AttentionRaster {
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.geometry.width + col]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// `ATTN v1` header laid out like the frame header, then one `0`/`1`
    /// per row-major cell line.
    pub fn serialize(&self) -> String {
        let g = &self.geometry;
        let mut s = String::with_capacity(48 + 2 * self.cells.len());
        let _ = writeln!(
            s,
            "ATTN v1 {} {} {} {} {} {}",
            self.timestamp, g.origin.x, g.origin.y, g.cell_size, g.width, g.height
        );
        for &c in &self.cells {
            s.push(if c { '1' } else { '0' });
            s.push('\n');
        }
        s
    }
}

/// Marks cells whose centers fall inside any threat cluster's box grown by
/// `margin` meters per side.
pub fn attention_raster(report: &ThreatReport, frame: &GridFrame, margin: f64) -> AttentionRaster {
    let geometry = *frame.geometry();
    let mut cells = vec![false; geometry.len()];
    for e in report.threats() {
        let b = e.attributes.bbox.expanded(margin);
        let (lo, hi) = b.aabb();
        let Some((a, z)) = geometry.index_range(lo, hi) else {
            continue;
        };
        for row in a.row..=z.row {
            for col in a.col..=z.col {
                if b.contains(geometry.cell_center(row, col)) {
                    cells[row * geometry.width + col] = true;
                }
            }
        }
    }
    AttentionRaster {
        timestamp: frame.timestamp(),
        geometry,
        cells,
    }
}
