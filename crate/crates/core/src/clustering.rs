//! Clusters of moving occupied cells.
//!
//! The search mask drops unknown, free and slow cells. DBSCAN groups what
//! remains, plausibilization rejects artifact clusters, and the surviving
//! clusters are summarised by position, heading, speed and an oriented box.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_angle, OrientedBox, Point2, Vec2};
use crate::grid::{CellIndex, CellState, GridFrame};

/// Diagonal floor added to velocity covariances before inversion, (m/s)².
const COV_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskConfig {
    /// Minimum cell speed, m/s.
    pub v_min: f64,
    /// Minimum pignistic occupancy probability.
    pub p_occ_min: f64,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            v_min: 1.0,
            p_occ_min: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanConfig {
    /// Neighbourhood radius in cell widths.
    pub eps_cells: f64,
    /// Neighbours (including the point itself) needed for a core point.
    pub min_pts: usize,
}

impl Default for DbscanConfig {
    fn default() -> Self {
        Self {
            eps_cells: 2.0,
            min_pts: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityConfig {
    pub p_occ_min: f64,
    pub p_move_min: f64,
    /// Upper bound on the mean of `trace(vel_cov) / 2`, (m/s)².
    pub var_max: f64,
    pub n_min: usize,
    pub n_max: usize,
}

impl Default for PlausibilityConfig {
    fn default() -> Self {
        Self {
            p_occ_min: 0.6,
            p_move_min: 0.5,
            var_max: 2.0,
            n_min: 4,
            n_max: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{key} = {value} out of range ({range})")]
    OutOfRange {
        key: &'static str,
        value: f64,
        range: &'static str,
    },
}

fn check(ok: bool, key: &'static str, value: f64, range: &'static str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange { key, value, range })
    }
}

impl MaskConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.v_min > 0.0 && self.v_min.is_finite(), "v_min", self.v_min, "> 0")?;
        check(self.p_occ_min > 0.0 && self.p_occ_min < 1.0, "p_occ_min", self.p_occ_min, "(0, 1)")
    }
}

impl DbscanConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.eps_cells > 0.0 && self.eps_cells.is_finite(), "eps_cells", self.eps_cells, "> 0")?;
        check(self.min_pts >= 1, "min_pts", self.min_pts as f64, ">= 1")
    }
}

impl PlausibilityConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.p_occ_min > 0.0 && self.p_occ_min < 1.0, "p_occ_min", self.p_occ_min, "(0, 1)")?;
        check(self.p_move_min > 0.0 && self.p_move_min <= 1.0, "p_move_min", self.p_move_min, "(0, 1]")?;
        check(self.var_max > 0.0 && self.var_max.is_finite(), "var_max", self.var_max, "> 0")?;
        check(self.n_min >= 2, "n_min", self.n_min as f64, ">= 2")?;
        check(self.n_max >= self.n_min, "n_max", self.n_max as f64, ">= n_min")
    }
}

/// Indices of cells that are likely occupied and moving, in row-major order.
pub fn search_mask(frame: &GridFrame, cfg: &MaskConfig) -> Vec<CellIndex> {
    let v_min_sq = cfg.v_min * cfg.v_min;
    frame
        .iter_indexed()
        .filter(|(_, c)| c.m_occ > 0.0 && c.occupancy_probability() >= cfg.p_occ_min && c.vel.norm_sq() >= v_min_sq)
        .map(|(i, _)| i)
        .collect()
}

/// Probability that the cell is not at rest: the χ² (2 dof) CDF of the
/// squared Mahalanobis distance of `vel` from the origin.
pub fn movement_probability(cell: &CellState) -> f64 {
    let c = cell.vel_cov;
    let (a, b, d) = (c.xx + COV_FLOOR, c.xy, c.yy + COV_FLOOR);
    let det = a * d - b * b;
    if det <= 0.0 {
        return 0.0;
    }
    let v = cell.vel;
    let m2 = (d * v.x * v.x - 2.0 * b * v.x * v.y + a * v.y * v.y) / det;
    -(-0.5 * m2).exp_m1()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: usize,
    /// Member cells in row-major order.
    pub members: Vec<CellIndex>,
    pub states: Vec<CellState>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn within(a: Point2, b: Point2, eps_sq: f64) -> bool {
    // Relative slack keeps lattice distances of exactly eps inside.
    (a - b).norm_sq() <= eps_sq * (1.0 + 1e-9)
}

/// Density-based partition of `points`.
///
/// Core points have at least `min_pts` points (themselves included) within
/// `eps`. Clusters are the connected components of cores; a border point
/// joins the cluster of its lowest-index core neighbour, which keeps the
/// result independent of input order. Noise is dropped. Clusters come out
/// sorted by their smallest member, members sorted ascending.
pub fn dbscan_partition(points: &[(CellIndex, Point2)], eps: f64, min_pts: usize) -> Vec<Vec<CellIndex>> {
    let mut pts: Vec<(CellIndex, Point2)> = points.to_vec();
    pts.sort_by_key(|p| p.0);
    pts.dedup_by_key(|p| p.0);
    let n = pts.len();
    if n == 0 {
        return Vec::new();
    }
    let eps_sq = eps * eps;

    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: Point2| ((p.x / eps).floor() as i64, (p.y / eps).floor() as i64);
    for (i, &(_, p)) in pts.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(i);
    }
    // Neighbour lists come out in ascending point order. Points at exactly
    // `eps` can land two buckets apart after rounding, hence the ±2 scan.
    let neighbours: Vec<Vec<usize>> = pts
        .iter()
        .map(|&(_, p)| {
            let (kx, ky) = key(p);
            let mut out = Vec::new();
            for dx in -2..=2 {
                for dy in -2..=2 {
                    if let Some(b) = buckets.get(&(kx + dx, ky + dy)) {
                        out.extend(b.iter().copied().filter(|&j| within(p, pts[j].1, eps_sq)));
                    }
                }
            }
            out.sort_unstable();
            out
        })
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if !core[start] || label[start].is_some() {
            continue;
        }
        label[start] = Some(next);
        stack.push(start);
        while let Some(i) = stack.pop() {
            for &j in &neighbours[i] {
                if core[j] && label[j].is_none() {
                    label[j] = Some(next);
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    for i in 0..n {
        if !core[i] {
            label[i] = neighbours[i].iter().find(|&&j| core[j]).and_then(|&j| label[j]);
        }
    }

    let mut clusters: Vec<Vec<CellIndex>> = vec![Vec::new(); next];
    for (i, l) in label.iter().enumerate() {
        if let Some(l) = l {
            clusters[*l].push(pts[i].0);
        }
    }
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Runs DBSCAN over the masked cells of `frame`, with `eps` in meters.
pub fn dbscan(frame: &GridFrame, cells: &[CellIndex], eps: f64, min_pts: usize) -> Vec<Cluster> {
    let pts: Vec<(CellIndex, Point2)> = cells
        .iter()
        .map(|&i| (i, frame.cells()[frame.linear_index(i)].pos))
        .collect();
    dbscan_partition(&pts, eps, min_pts)
        .into_iter()
        .enumerate()
        .map(|(id, members)| {
            let states = members
                .iter()
                .map(|&m| frame.cells()[frame.linear_index(m)])
                .collect();
            Cluster { id, members, states }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RejectReason {
    Occupancy { mean: f64 },
    Movement { mean: f64 },
    Variance { mean: f64 },
    Size { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// Checks cluster means in a fixed order: occupancy, movement, variance,
/// then size. The first failure is reported.
pub fn plausibilize(cluster: &Cluster, cfg: &PlausibilityConfig) -> Verdict {
    let n = cluster.states.len();
    if n == 0 {
        return Verdict::Reject(RejectReason::Size { count: 0 });
    }
    let mean = |f: &dyn Fn(&CellState) -> f64| cluster.states.iter().map(f).sum::<f64>() / n as f64;
    let occ = mean(&|c| c.occupancy_probability());
    if occ < cfg.p_occ_min {
        return Verdict::Reject(RejectReason::Occupancy { mean: occ });
    }
    let mov = mean(&movement_probability);
    if mov < cfg.p_move_min {
        return Verdict::Reject(RejectReason::Movement { mean: mov });
    }
    let var = mean(&|c| 0.5 * c.vel_cov.trace());
    if var > cfg.var_max {
        return Verdict::Reject(RejectReason::Variance { mean: var });
    }
    if n < cfg.n_min || n > cfg.n_max {
        return Verdict::Reject(RejectReason::Size { count: n });
    }
    Verdict::Accept
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterAttributes {
    /// Mean member position, m.
    pub position: Point2,
    /// Heading of the mean velocity, radians in (−π, π].
    pub orientation: f64,
    /// Norm of the mean velocity, m/s.
    pub speed: f64,
    /// Object box aligned with `orientation`, covering every member footprint.
    pub bbox: OrientedBox,
}

impl ClusterAttributes {
    pub fn velocity(&self) -> Vec2 {
        Point2::from_angle(self.orientation) * self.speed
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttributeError {
    #[error("cluster has no members")]
    Empty,
    #[error("mean velocity vanishes ({speed} m/s); heading undefined")]
    ZeroVelocity { speed: f64 },
}

/// Position, heading, speed and box of a cluster. Member centers are
/// projected onto the heading axes; the box is inflated by half a cell on
/// each side to cover cell footprints.
pub fn cluster_attributes(cluster: &Cluster, cell_size: f64) -> Result<ClusterAttributes, AttributeError> {
    let n = cluster.states.len();
    if n == 0 {
        return Err(AttributeError::Empty);
    }
    let inv = 1.0 / n as f64;
    let (psum, vsum) = cluster
        .states
        .iter()
        .fold((Point2::ZERO, Vec2::ZERO), |(p, v), c| (p + c.pos, v + c.vel));
    let position = psum * inv;
    let mean_vel = vsum * inv;
    let speed = mean_vel.norm();
    if speed <= 1e-9 {
        return Err(AttributeError::ZeroVelocity { speed });
    }
    let orientation = wrap_angle(mean_vel.angle());

    let u = Point2::from_angle(orientation);
    let w = Point2::new(-u.y, u.x);
    let (mut umin, mut umax, mut wmin, mut wmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in &cluster.states {
        let d = c.pos - position;
        let (a, b) = (d.dot(u), d.dot(w));
        umin = umin.min(a);
        umax = umax.max(a);
        wmin = wmin.min(b);
        wmax = wmax.max(b);
    }
    let half = 0.5 * cell_size;
    let center = position + u * (0.5 * (umin + umax)) + w * (0.5 * (wmin + wmax));
    let bbox = OrientedBox {
        center,
        heading: orientation,
        half_length: 0.5 * (umax - umin) + half,
        half_width: 0.5 * (wmax - wmin) + half,
    };
    Ok(ClusterAttributes {
        position,
        orientation,
        speed,
        bbox,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_in_convex;
    use crate::grid::{Cov2, GridGeometry};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn neighbour_at_exact_eps_across_buckets() {
        // Rows 1 and 3 sit 0.4 m apart but hash two buckets apart at eps 0.4.
        let g = GridGeometry { origin: Point2::new(-3.0, 1.4), cell_size: 0.2, width: 20, height: 20 };
        let cells = [(0, 4), (1, 1), (1, 4), (1, 6), (2, 2), (2, 3), (3, 1), (3, 3), (3, 4)];
        let pts: Vec<_> = cells.iter().map(|&(r, c)| (CellIndex::new(r, c), g.cell_center(r, c))).collect();
        let parts = dbscan_partition(&pts, 0.4, 5);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].len(), cells.len());
    }

    fn frame_with(w: usize, h: usize, set: &[(usize, usize, CellState)]) -> GridFrame {
        let mut cells = vec![CellState::default(); w * h];
        for &(r, c, s) in set {
            cells[r * w + c] = s;
        }
        GridFrame::new(
            0.0,
            GridGeometry { origin: Point2::ZERO, cell_size: 0.2, width: w, height: h },
            cells,
        )
        .unwrap()
    }

    fn moving(vx: f64, vy: f64) -> CellState {
        CellState {
            m_occ: 0.9,
            m_free: 0.05,
            vel: Vec2::new(vx, vy),
            vel_cov: Cov2::isotropic(0.04),
            ..CellState::default()
        }
    }

    fn cluster_of(states: Vec<CellState>) -> Cluster {
        Cluster {
            id: 0,
            members: (0..states.len()).map(|i| CellIndex::new(0, i)).collect(),
            states,
        }
    }

    #[test]
    fn mask_examples() {
        let f = frame_with(4, 4, &[]);
        assert!(search_mask(&f, &MaskConfig::default()).is_empty());

        let f = frame_with(4, 4, &[(1, 2, moving(2.0, 0.0)), (3, 3, moving(0.5, 0.0))]);
        assert_eq!(search_mask(&f, &MaskConfig::default()), vec![CellIndex::new(1, 2)]);
    }

    #[test]
    fn movement_probability_values() {
        let still = CellState { vel_cov: Cov2::isotropic(1.0), ..CellState::default() };
        assert_eq!(movement_probability(&still), 0.0);
        // d² = 2 for v=(1,1), unit covariance: 1 - e^-1.
        let c = CellState { vel: Vec2::new(1.0, 1.0), vel_cov: Cov2::isotropic(1.0), ..CellState::default() };
        assert!((movement_probability(&c) - (1.0 - (-1.0f64).exp())).abs() < 1e-6);
        assert!(movement_probability(&moving(8.0, 0.0)) > 0.999);
        assert!(movement_probability(&CellState { vel: Vec2::new(1.0, 0.0), ..CellState::default() }) > 0.999);
    }

    #[test]
    fn dbscan_examples() {
        let mut set = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                set.push((r, c, moving(2.0, 0.0)));
                set.push((r, c + 10, moving(2.0, 0.0)));
            }
        }
        set.push((8, 5, moving(2.0, 0.0)));
        let f = frame_with(16, 10, &set);
        let mask = search_mask(&f, &MaskConfig::default());
        let clusters = dbscan(&f, &mask, 0.4, 3);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].id, 0);
        assert_eq!(clusters[0].members[0], CellIndex::new(0, 0));
        assert_eq!(clusters[1].members[0], CellIndex::new(0, 10));
        assert!(clusters.iter().all(|c| c.len() == 9));
    }

    #[test]
    fn dbscan_border_goes_to_lowest_core() {
        // Two cores A (index 0) and B (index 2) with a border point between
        // them that is reachable from both; B's component is separate.
        let p = |r: usize, c: usize, x: f64| (CellIndex::new(r, c), Point2::new(x, 0.0));
        let pts = vec![
            p(0, 0, 0.0), p(0, 1, -0.3), p(0, 2, -0.6), p(0, 3, -0.9), // A-side cores
            p(0, 4, 1.0),                                                // border
            p(0, 5, 2.0), p(0, 6, 2.3), p(0, 7, 2.6), p(0, 8, 2.9),     // B-side cores
        ];
        let out = dbscan_partition(&pts, 1.0, 4);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].len(), 5);
        assert!(out[0].contains(&CellIndex::new(0, 4)));
        let mut rev = pts.clone();
        rev.reverse();
        assert_eq!(dbscan_partition(&rev, 1.0, 4), out);
    }

    #[test]
    fn plausibility_examples() {
        let cfg = PlausibilityConfig::default();
        let two = cluster_of(vec![moving(2.0, 0.0); 2]);
        assert_eq!(plausibilize(&two, &cfg), Verdict::Reject(RejectReason::Size { count: 2 }));

        let noisy = cluster_of(vec![
            CellState { vel_cov: Cov2::isotropic(10.0), ..moving(20.0, 0.0) };
            6
        ]);
        assert!(matches!(plausibilize(&noisy, &cfg), Verdict::Reject(RejectReason::Variance { .. })));

        let faint = cluster_of(vec![CellState { m_occ: 0.1, m_free: 0.8, ..moving(2.0, 0.0) }; 6]);
        assert!(matches!(plausibilize(&faint, &cfg), Verdict::Reject(RejectReason::Occupancy { .. })));

        let slow = cluster_of(vec![CellState { vel_cov: Cov2::isotropic(1.0), ..moving(0.5, 0.0) }; 6]);
        assert!(matches!(plausibilize(&slow, &cfg), Verdict::Reject(RejectReason::Movement { .. })));

        assert_eq!(plausibilize(&cluster_of(vec![moving(2.0, 0.0); 6]), &cfg), Verdict::Accept);
    }

    fn square_cluster(vel: Vec2) -> Cluster {
        let pos = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        cluster_of(
            pos.iter()
                .map(|&(x, y)| CellState { pos: Point2::new(x, y), ..moving(vel.x, vel.y) })
                .collect(),
        )
    }

    #[test]
    fn attributes_axis_aligned() {
        let a = cluster_attributes(&square_cluster(Vec2::new(1.0, 0.0)), 0.2).unwrap();
        assert!((a.position.x - 0.5).abs() < 1e-12 && (a.position.y - 0.5).abs() < 1e-12);
        assert_eq!(a.orientation, 0.0);
        assert!((a.speed - 1.0).abs() < 1e-12);
        let (lo, hi) = a.bbox.aabb();
        for (got, want) in [(lo.x, -0.1), (lo.y, -0.1), (hi.x, 1.1), (hi.y, 1.1)] {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn attributes_diagonal() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = cluster_attributes(&square_cluster(Vec2::new(s, s)), 0.2).unwrap();
        assert!((a.orientation - FRAC_PI_4).abs() < 1e-12);
        assert!((a.speed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn attributes_reject_cancelling_velocity() {
        let c = cluster_of(vec![moving(1.0, 0.0), moving(-1.0, 0.0)]);
        assert!(matches!(cluster_attributes(&c, 0.2), Err(AttributeError::ZeroVelocity { .. })));
    }

    fn arb_cluster() -> impl Strategy<Value = Cluster> {
        prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, 0.5..3.0f64, -0.3..0.3f64), 1..30).prop_map(|v| {
            cluster_of(
                v.into_iter()
                    .map(|(x, y, vx, vy)| CellState { pos: Point2::new(x, y), ..moving(vx, vy) })
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn box_contains_members(c in arb_cluster()) {
            let a = cluster_attributes(&c, 0.2).unwrap();
            let hull = a.bbox.to_hull();
            for s in &c.states {
                prop_assert!(point_in_convex(s.pos, &hull));
            }
        }

        #[test]
        fn rotation_equivariance(c in arb_cluster(), theta in -3.0..3.0f64) {
            let a = cluster_attributes(&c, 0.2).unwrap();
            let mut r = c.clone();
            for s in &mut r.states {
                s.vel = s.vel.rotate(theta);
            }
            let b = cluster_attributes(&r, 0.2).unwrap();
            prop_assert!(wrap_angle(b.orientation - a.orientation - theta).abs() < 1e-9);
            prop_assert!((b.speed - a.speed).abs() < 1e-9);
        }

        #[test]
        fn translation_equivariance(c in arb_cluster(), dx in -100.0..100.0f64, dy in -100.0..100.0f64) {
            let a = cluster_attributes(&c, 0.2).unwrap();
            let mut t = c.clone();
            let d = Point2::new(dx, dy);
            for s in &mut t.states {
                s.pos = s.pos + d;
            }
            let b = cluster_attributes(&t, 0.2).unwrap();
            prop_assert!(((b.position - a.position) - d).norm() < 1e-9);
            prop_assert!(((b.bbox.center - a.bbox.center) - d).norm() < 1e-9);
            prop_assert_eq!(b.orientation, a.orientation);
            prop_assert!((b.bbox.half_length - a.bbox.half_length).abs() < 1e-9);
        }

        #[test]
        fn partition_order_independent(
            cells in prop::collection::btree_set((0usize..20, 0usize..20), 0..80),
            seed in any::<u64>(),
        ) {
            let mut pts: Vec<(CellIndex, Point2)> = cells
                .iter()
                .map(|&(r, c)| (CellIndex::new(r, c), Point2::new(c as f64 * 0.2, r as f64 * 0.2)))
                .collect();
            let base = dbscan_partition(&pts, 0.4, 3);
            // Deterministic shuffle.
            let mut s = seed;
            for i in (1..pts.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                pts.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(dbscan_partition(&pts, 0.4, 3), base);
        }
    }
}
