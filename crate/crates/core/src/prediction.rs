//! Occupied-area prediction for clusters and for the ego vehicle.
//!
//! A cluster's prediction is the convex hull of its object box now and the
//! same box displaced by a constant-velocity step over the horizon. A
//! non-zero angle uncertainty fans the displacement symmetrically, turning
//! the swept rectangle into a trapezoid.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{ClusterAttributes, ConfigError};
use crate::geometry::{convex_hull, wrap_angle, HullPolygon, OrientedBox, Point2};

/// Ego plan sampling step, seconds.
pub const EGO_SAMPLE_STEP: f64 = 0.1;

const TIME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionConfig {
    /// Prediction horizon T, seconds.
    pub horizon: f64,
    /// Cluster angle uncertainty, radians in [0, π/4].
    pub phi_u: f64,
}

impl Default for PredictionConfig {
    fn default() -> Self {
        Self {
            horizon: 3.0,
            phi_u: 0.0,
        }
    }
}

impl PredictionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(ConfigError::OutOfRange {
                key: "horizon",
                value: self.horizon,
                range: "> 0",
            });
        }
        if !(0.0..=std::f64::consts::FRAC_PI_4).contains(&self.phi_u) {
            return Err(ConfigError::OutOfRange {
                key: "phi_u",
                value: self.phi_u,
                range: "[0, pi/4]",
            });
        }
        Ok(())
    }
}

/// Predicted occupied area of a cluster over `cfg.horizon`.
///
/// With `phi_u > 0` the far box is displaced along `orientation ± phi_u`
/// and placed on the line `v̄·T` ahead, i.e. displacement
/// `v̄·T·(1, ±tan phi_u)` in the cluster frame. The far box keeps the
/// cluster orientation. Both hulls grow monotonically in `horizon` and in
/// `phi_u`.
pub fn predict_cluster_area(attrs: &ClusterAttributes, cfg: &PredictionConfig) -> HullPolygon {
    let corners = attrs.bbox.corners();
    let reach = attrs.speed * cfg.horizon;
    let u = Point2::from_angle(attrs.orientation);
    let w = Point2::new(-u.y, u.x);
    let mut pts: Vec<Point2> = corners.to_vec();
    if cfg.phi_u > 0.0 {
        let lateral = reach * cfg.phi_u.tan();
        for side in [-1.0, 1.0] {
            let d = u * reach + w * (side * lateral);
            pts.extend(corners.iter().map(|&c| c + d));
        }
    } else {
        pts.extend(corners.iter().map(|&c| c + u * reach));
    }
    convex_hull(&pts).expect("finite box corners")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanPose {
    pub t: f64,
    pub position: Point2,
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("plan has no poses")]
    Empty,
    #[error("pose {index}: time {t} is not strictly after its predecessor")]
    NonMonotonic { index: usize, t: f64 },
    #[error("footprint dimensions must be positive (length={length}, width={width})")]
    Footprint { length: f64, width: f64 },
    #[error("pose {index}: non-finite value")]
    NonFinite { index: usize },
    #[error("plan does not cover [{from}, {to}] s (missing interval {gap_from}..{gap_to} s)")]
    Coverage {
        from: f64,
        to: f64,
        gap_from: f64,
        gap_to: f64,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Time-stamped ego poses plus the rectangular vehicle footprint. Positions
/// are footprint centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoPlan {
    poses: Vec<PlanPose>,
    length: f64,
    width: f64,
}

impl EgoPlan {
    pub fn new(poses: Vec<PlanPose>, length: f64, width: f64) -> Result<Self, PlanError> {
        if !(length > 0.0 && width > 0.0 && length.is_finite() && width.is_finite()) {
            return Err(PlanError::Footprint { length, width });
        }
        if poses.is_empty() {
            return Err(PlanError::Empty);
        }
        for (index, p) in poses.iter().enumerate() {
            if !(p.t.is_finite() && p.position.is_finite() && p.heading.is_finite()) {
                return Err(PlanError::NonFinite { index });
            }
            if index > 0 && p.t <= poses[index - 1].t {
                return Err(PlanError::NonMonotonic { index, t: p.t });
            }
        }
        Ok(Self { poses, length, width })
    }

    pub fn poses(&self) -> &[PlanPose] {
        &self.poses
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn start(&self) -> f64 {
        self.poses[0].t
    }

    pub fn end(&self) -> f64 {
        self.poses[self.poses.len() - 1].t
    }

    /// Linearly interpolated pose; heading takes the shorter arc. `None`
    /// outside the plan's time span.
    pub fn pose_at(&self, t: f64) -> Option<PlanPose> {
        if t < self.start() - TIME_TOLERANCE || t > self.end() + TIME_TOLERANCE {
            return None;
        }
        let i = self.poses.partition_point(|p| p.t <= t);
        if i == 0 {
            return Some(PlanPose { t, ..self.poses[0] });
        }
        if i == self.poses.len() {
            return Some(PlanPose { t, ..self.poses[i - 1] });
        }
        let (a, b) = (self.poses[i - 1], self.poses[i]);
        let s = (t - a.t) / (b.t - a.t);
        Some(PlanPose {
            t,
            position: a.position + (b.position - a.position) * s,
            heading: a.heading + wrap_angle(b.heading - a.heading) * s,
        })
    }

    pub fn footprint_at(&self, t: f64) -> Option<OrientedBox> {
        self.pose_at(t)
            .map(|p| OrientedBox::new(p.position, p.heading, self.length, self.width))
    }

    fn check_coverage(&self, from: f64, to: f64) -> Result<(), PlanError> {
        let (s, e) = (self.start(), self.end());
        if s > from + TIME_TOLERANCE {
            return Err(PlanError::Coverage { from, to, gap_from: from, gap_to: s.min(to) });
        }
        if e < to - TIME_TOLERANCE {
            return Err(PlanError::Coverage { from, to, gap_from: e.max(from), gap_to: to });
        }
        Ok(())
    }
}

/// Convex hull of the ego footprint sampled every [`EGO_SAMPLE_STEP`] over
/// `[t_now, t_now + horizon]`, end point included.
pub fn predict_ego_area(plan: &EgoPlan, t_now: f64, horizon: f64) -> Result<HullPolygon, PlanError> {
    let t_end = t_now + horizon;
    plan.check_coverage(t_now, t_end)?;
    let steps = ((horizon / EGO_SAMPLE_STEP) - TIME_TOLERANCE).ceil().max(0.0) as usize;
    let mut pts = Vec::with_capacity(4 * (steps + 1));
    for k in 0..=steps {
        let t = if k == steps { t_end } else { t_now + k as f64 * EGO_SAMPLE_STEP };
        let fp = plan.footprint_at(t).expect("coverage checked");
        pts.extend_from_slice(&fp.corners());
    }
    Ok(convex_hull(&pts).expect("finite footprint corners"))
}

/// `PLAN v1 <length> <width>` followed by `<t> <x> <y> <heading>` lines.
pub fn serialize_plan(plan: &EgoPlan) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "PLAN v1 {} {}", plan.length, plan.width);
    for p in &plan.poses {
        let _ = writeln!(s, "{} {} {} {}", p.t, p.position.x, p.position.y, p.heading);
    }
    s
}

pub fn parse_plan(text: &str) -> Result<EgoPlan, PlanError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or(PlanError::Parse {
        line: 1,
        reason: "missing header".into(),
    })?;
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() != 4 || f[0] != "PLAN" || f[1] != "v1" {
        return Err(PlanError::Parse {
            line: hl + 1,
            reason: "expected `PLAN v1 <length> <width>`".into(),
        });
    }
    let num = |s: &str, line: usize| {
        s.parse::<f64>().map_err(|e| PlanError::Parse {
            line,
            reason: format!("`{s}`: {e}"),
        })
    };
    let length = num(f[2], hl + 1)?;
    let width = num(f[3], hl + 1)?;
    let mut poses = Vec::new();
    for (i, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 4 {
            return Err(PlanError::Parse {
                line: i + 1,
                reason: format!("expected 4 fields, found {}", f.len()),
            });
        }
        poses.push(PlanPose {
            t: num(f[0], i + 1)?,
            position: Point2::new(num(f[1], i + 1)?, num(f[2], i + 1)?),
            heading: num(f[3], i + 1)?,
        });
    }
    EgoPlan::new(poses, length, width)
}
