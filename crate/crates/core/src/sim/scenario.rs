//! Scripted single-actor collision scenarios.
//!
//! The ego drives along +x on the lane centered at y = 0. The actor follows a
//! path of straight and circular pieces at constant speed. Both are timed so
//! that they meet near the origin; the time of collision is then located
//! numerically from footprint overlap.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{convex_hull, HullPolygon, OrientedBox, Point2};
use crate::grid::GridGeometry;
use crate::prediction::{EgoPlan, PlanPose};

/// Lane width of the mapped ego lane, meters.
pub const LANE_WIDTH: f64 = 3.5;

const TOC_SCAN_STEP: f64 = 0.01;
const TOC_RESOLUTION: f64 = 1e-3;
/// Ego plan extends this far past the scenario end so every horizon fits.
const PLAN_TAIL: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Actor approaches perpendicular from a side road and merges ahead of
    /// the ego.
    TurningIn,
    /// Oncoming actor in the adjacent lane turns across the ego lane.
    TurningOver,
    /// Actor crosses the ego lane perpendicular without turning.
    StraightCrossing,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [ScenarioKind::TurningIn, ScenarioKind::TurningOver, ScenarioKind::StraightCrossing];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::TurningIn => "turning-in",
            ScenarioKind::TurningOver => "turning-over",
            ScenarioKind::StraightCrossing => "straight-crossing",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}` (expected turning-in, turning-over or straight-crossing)"))
    }
}

/// Scenario geometry and timing. Distances in meters, speeds in m/s, times
/// in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub ego_speed: f64,
    pub actor_speed: f64,
    pub turn_radius: f64,
    /// Time at which the actor reaches the conflict point.
    pub conflict_time: f64,
    /// Ego reaches the conflict point this much later than the actor.
    pub ego_lag: f64,
    /// Lateral offset of the adjacent lane (turning-over).
    pub lane_offset: f64,
    /// Shift of the actor's crossing line along x (straight-crossing).
    pub crossing_offset: f64,
    pub ego_length: f64,
    pub ego_width: f64,
    pub actor_length: f64,
    pub actor_width: f64,
    /// Side length of the square grid, meters.
    pub grid_extent: f64,
    pub cell_size: f64,
    pub frame_period: f64,
    /// Simulated time after the conflict time.
    pub tail: f64,
}

impl ScenarioParams {
    pub fn defaults(kind: ScenarioKind) -> Self {
        let base = Self {
            ego_speed: 10.0,
            actor_speed: 8.0,
            turn_radius: 10.0,
            conflict_time: 5.0,
            ego_lag: 0.3,
            lane_offset: LANE_WIDTH,
            crossing_offset: 0.0,
            ego_length: 4.5,
            ego_width: 1.8,
            actor_length: 4.5,
            actor_width: 1.8,
            grid_extent: 60.0,
            cell_size: 0.2,
            frame_period: 0.1,
            tail: 2.0,
        };
        match kind {
            ScenarioKind::TurningIn => base,
            ScenarioKind::TurningOver => Self {
                actor_speed: 10.0,
                turn_radius: 8.0,
                ego_lag: 0.1,
                ..base
            },
            ScenarioKind::StraightCrossing => Self { ego_lag: 0.0, ..base },
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let positive = [
            ("ego_speed", self.ego_speed),
            ("actor_speed", self.actor_speed),
            ("turn_radius", self.turn_radius),
            ("conflict_time", self.conflict_time),
            ("lane_offset", self.lane_offset),
            ("ego_length", self.ego_length),
            ("ego_width", self.ego_width),
            ("actor_length", self.actor_length),
            ("actor_width", self.actor_width),
            ("grid_extent", self.grid_extent),
            ("cell_size", self.cell_size),
            ("frame_period", self.frame_period),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ScenarioError::Param { key, value: v });
            }
        }
        for (key, v) in [("ego_lag", self.ego_lag), ("crossing_offset", self.crossing_offset)] {
            if !v.is_finite() {
                return Err(ScenarioError::Param { key, value: v });
            }
        }
        if !(self.tail >= 0.0 && self.tail.is_finite()) {
            return Err(ScenarioError::Param { key: "tail", value: self.tail });
        }
        if self.grid_extent < 10.0 * self.cell_size {
            return Err(ScenarioError::Param { key: "grid_extent", value: self.grid_extent });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("scenario parameter {key} = {value} is out of range")]
    Param { key: &'static str, value: f64 },
    #[error("actor and ego never collide within {duration} s")]
    NoCollision { duration: f64 },
    #[error("actor and ego footprints already overlap at t = 0")]
    OverlapAtStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathPiece {
    Line { start: Point2, heading: f64, length: f64 },
    /// `sweep > 0` turns counter-clockwise.
    Arc { center: Point2, radius: f64, start_angle: f64, sweep: f64 },
}

impl PathPiece {
    fn length(&self) -> f64 {
        match *self {
            PathPiece::Line { length, .. } => length,
            PathPiece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    fn start_heading(&self) -> f64 {
        match *self {
            PathPiece::Line { heading, .. } => heading,
            PathPiece::Arc { start_angle, sweep, .. } => start_angle + FRAC_PI_2.copysign(sweep),
        }
    }

    /// Pose `s` meters into the piece. Heading is continuous (unwrapped).
    fn pose(&self, s: f64, heading0: f64) -> (Point2, f64) {
        match *self {
            PathPiece::Line { start, heading, .. } => (start + Point2::from_angle(heading) * s, heading0),
            PathPiece::Arc { center, radius, start_angle, sweep } => {
                let turned = (s / radius).copysign(sweep);
                let angle = start_angle + turned;
                (center + Point2::from_angle(angle) * radius, heading0 + turned)
            }
        }
    }
}

/// Piecewise path with arc-length parametrisation. Queries before the start
/// or past the end extrapolate straight along the boundary heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pieces: Vec<PathPiece>,
}

impl Path {
    pub fn new(pieces: Vec<PathPiece>) -> Self {
        assert!(!pieces.is_empty());
        Self { pieces }
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(PathPiece::length).sum()
    }

    pub fn pose_at(&self, s: f64) -> (Point2, f64) {
        let first = &self.pieces[0];
        let mut heading = first.start_heading();
        if s < 0.0 {
            let (p0, _) = first.pose(0.0, heading);
            return (p0 + Point2::from_angle(heading) * s, heading);
        }
        let mut rest = s;
        let last = self.pieces.len() - 1;
        for (i, piece) in self.pieces.iter().enumerate() {
            let len = piece.length();
            if rest <= len {
                return piece.pose(rest, heading);
            }
            let (end, h_end) = piece.pose(len, heading);
            if i == last {
                return (end + Point2::from_angle(h_end) * (rest - len), h_end);
            }
            heading = h_end;
            rest -= len;
        }
        unreachable!("loop returns on the last piece")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorTrack {
    pub path: Path,
    pub speed: f64,
    /// Arc-length position at t = 0.
    pub s0: f64,
    pub length: f64,
    pub width: f64,
}

impl ActorTrack {
    /// Position and unwrapped heading at time `t`.
    pub fn pose(&self, t: f64) -> (Point2, f64) {
        self.path.pose_at(self.s0 + self.speed * t)
    }

    pub fn footprint(&self, t: f64) -> OrientedBox {
        let (p, h) = self.pose(t);
        OrientedBox::new(p, h, self.length, self.width)
    }

    pub fn velocity(&self, t: f64) -> Point2 {
        Point2::from_angle(self.pose(t).1) * self.speed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub params: ScenarioParams,
    pub ego_plan: EgoPlan,
    pub actor: ActorTrack,
    pub duration: f64,
    /// First footprint overlap, seconds.
    pub toc: f64,
    pub grid: GridGeometry,
    /// Mapped ego lane; reported, not used for detection.
    pub prior_lane: HullPolygon,
}

impl Scenario {
    pub fn ego_footprint(&self, t: f64) -> OrientedBox {
        self.ego_plan.footprint_at(t).expect("plan covers the scenario")
    }

    pub fn footprints_overlap(&self, t: f64) -> bool {
        self.ego_footprint(t).overlaps(&self.actor.footprint(t))
    }

    pub fn frame_count(&self) -> usize {
        (self.duration / self.params.frame_period + 1e-9).floor() as usize + 1
    }

    pub fn frame_time(&self, n: usize) -> f64 {
        n as f64 * self.params.frame_period
    }
}

fn actor_path(kind: ScenarioKind, p: &ScenarioParams) -> (Path, f64) {
    let r = p.turn_radius;
    let lead = p.actor_speed * p.conflict_time + 60.0;
    match kind {
        ScenarioKind::TurningIn => {
            // North-bound approach at x = -r, clockwise quarter arc onto the
            // ego lane ending at the origin heading east.
            let path = Path::new(vec![
                PathPiece::Line { start: Point2::new(-r, -r - lead), heading: FRAC_PI_2, length: lead },
                PathPiece::Arc { center: Point2::new(0.0, -r), radius: r, start_angle: PI, sweep: -FRAC_PI_2 },
                PathPiece::Line { start: Point2::ZERO, heading: 0.0, length: 200.0 },
            ]);
            (path, lead + FRAC_PI_2 * r)
        }
        ScenarioKind::TurningOver => {
            // West-bound in the adjacent lane, counter-clockwise quarter arc
            // to south-bound, crossing y = 0 at x = 0.
            let y0 = p.lane_offset;
            let (x_s, s_cross) = if r > y0 {
                let theta = PI - ((r - y0) / r).asin();
                (-r * theta.cos(), r * (theta - FRAC_PI_2))
            } else {
                (r, FRAC_PI_2 * r + (y0 - r))
            };
            let path = Path::new(vec![
                PathPiece::Line { start: Point2::new(x_s + lead, y0), heading: PI, length: lead },
                PathPiece::Arc { center: Point2::new(x_s, y0 - r), radius: r, start_angle: FRAC_PI_2, sweep: FRAC_PI_2 },
                PathPiece::Line { start: Point2::new(x_s - r, y0 - r), heading: 1.5 * PI, length: 200.0 },
            ]);
            (path, lead + s_cross)
        }
        ScenarioKind::StraightCrossing => {
            let x = p.crossing_offset;
            let path = Path::new(vec![PathPiece::Line {
                start: Point2::new(x, -lead),
                heading: FRAC_PI_2,
                length: 2.0 * lead + 200.0,
            }]);
            (path, lead)
        }
    }
}

/// Builds a deterministic scenario and locates its time of collision.
pub fn build_scenario(kind: ScenarioKind, params: ScenarioParams) -> Result<Scenario, ScenarioError> {
    params.validate()?;
    let (path, s_conflict) = actor_path(kind, &params);
    let actor = ActorTrack {
        path,
        speed: params.actor_speed,
        s0: s_conflict - params.actor_speed * params.conflict_time,
        length: params.actor_length,
        width: params.actor_width,
    };
    let duration = params.conflict_time + params.tail;

    let ego_x0 = -params.ego_speed * (params.conflict_time + params.ego_lag);
    let plan_steps = ((duration + PLAN_TAIL) / params.frame_period).ceil() as usize;
    let poses = (0..=plan_steps)
        .map(|k| {
            let t = k as f64 * params.frame_period;
            PlanPose { t, position: Point2::new(ego_x0 + params.ego_speed * t, 0.0), heading: 0.0 }
        })
        .collect();
    let ego_plan = EgoPlan::new(poses, params.ego_length, params.ego_width).expect("valid straight plan");

    let mut scenario = Scenario {
        kind,
        params,
        ego_plan,
        actor,
        duration,
        toc: f64::NAN,
        grid: GridGeometry { origin: Point2::ZERO, cell_size: params.cell_size, width: 0, height: 0 },
        prior_lane: convex_hull(&[Point2::ZERO]).unwrap(),
    };
    scenario.toc = locate_toc(&scenario)?;
    scenario.grid = grid_for(&scenario);
    let g = scenario.grid;
    let x_end = g.origin.x + g.width as f64 * g.cell_size;
    let half = 0.5 * LANE_WIDTH;
    scenario.prior_lane = convex_hull(&[
        Point2::new(g.origin.x, -half),
        Point2::new(x_end, -half),
        Point2::new(x_end, half),
        Point2::new(g.origin.x, half),
    ])
    .unwrap();
    Ok(scenario)
}

fn locate_toc(s: &Scenario) -> Result<f64, ScenarioError> {
    if s.footprints_overlap(0.0) {
        return Err(ScenarioError::OverlapAtStart);
    }
    let steps = (s.duration / TOC_SCAN_STEP).ceil() as usize;
    let mut prev = 0.0;
    for k in 1..=steps {
        let t = (k as f64 * TOC_SCAN_STEP).min(s.duration);
        if s.footprints_overlap(t) {
            let (mut lo, mut hi) = (prev, t);
            while hi - lo > TOC_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                if s.footprints_overlap(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(hi);
        }
        prev = t;
    }
    Err(ScenarioError::NoCollision { duration: s.duration })
}

/// Square grid centered on the actor's motion up to the collision.
fn grid_for(s: &Scenario) -> GridGeometry {
    let a = s.params.cell_size;
    let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    let n = (s.toc / s.params.frame_period).ceil() as usize;
    for k in 0..=n {
        let (p, _) = s.actor.pose((k as f64 * s.params.frame_period).min(s.toc));
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let center = (lo + hi) * 0.5;
    let cells = (s.params.grid_extent / a).round() as usize;
    let half = 0.5 * cells as f64 * a;
    GridGeometry {
        origin: Point2::new(((center.x - half) / a).round() * a, ((center.y - half) / a).round() * a),
        cell_size: a,
        width: cells,
        height: cells,
    }
}
