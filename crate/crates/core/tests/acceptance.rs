//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, Sign};
use num_traits::{Float, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dogm_threat::bench::{run_bench, BenchConfig};
use dogm_threat::clustering::{dbscan, search_mask, ClusterAttributes, MaskConfig};
use dogm_threat::geometry::{cross3, EPS_GEOM};
use dogm_threat::grid::{CellIndex, CellState, Cov2, GridFrame, GridGeometry};
use dogm_threat::sim::{build_scenario, rittr, run_scenario, synthesize_labeled, NoiseConfig, ScenarioKind, ScenarioParams};
use dogm_threat::{convex_hull, point_in_convex, predict_cluster_area, segments_intersect, OrientedBox, PipelineConfig, Point2, PredictionConfig, Segment};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within_budget(o: Outcome, elapsed: Duration, budget: Duration) -> Outcome {
    let pass = o.pass && elapsed < budget;
    outcome(pass, format!("{} ({:.2?} of {:.0?})", o.detail, elapsed, budget))
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let o = f();
    within_budget(o, t.elapsed(), budget)
}

// ---------------------------------------------------------------- riTTR

fn rittr_arithmetic() -> Outcome {
    let cases = [(2.1, 0.4, 4.25), (0.8, 0.5, 0.60), (1.1, 0.5, 1.20)];
    let worst = cases
        .iter()
        .map(|&(o, p, want)| rittr(o, p).map_or(f64::INFINITY, |v| (v - want).abs()))
        .fold(0.0, f64::max);
    outcome(worst <= 1e-9, format!("max abs error {worst:.1e}"))
}

fn scenario_rittr(kind: ScenarioKind, phi_u_deg: f64) -> dogm_threat::sim::ScenarioResult {
    let s = build_scenario(kind, ScenarioParams::defaults(kind)).unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.prediction.horizon = 3.0;
    cfg.prediction.phi_u = phi_u_deg.to_radians();
    run_scenario(&s, &NoiseConfig::default(), &cfg).unwrap().result
}

fn turning_in() -> Outcome {
    let r = scenario_rittr(ScenarioKind::TurningIn, 0.0);
    let pass = matches!((r.tod_ours, r.tod_prior), (Some(o), Some(p)) if o < p) && r.rittr.is_some_and(|v| v >= 3.0);
    outcome(pass, format!("tod_ours={:?} tod_prior={:?} toc={:?} rittr={:?}", r.tod_ours, r.tod_prior, r.toc, r.rittr))
}

fn turning_over() -> Outcome {
    let noise = NoiseConfig::default();
    assert_eq!(noise.lag_gain, 0.85);
    let r0 = scenario_rittr(ScenarioKind::TurningOver, 0.0);
    let r10 = scenario_rittr(ScenarioKind::TurningOver, 10.0);
    let pass = matches!((r10.rittr, r0.rittr), (Some(a), Some(b)) if a > b && b > 0.0);
    outcome(pass, format!("rittr(10deg)={:?} rittr(0deg)={:?}", r10.rittr, r0.rittr))
}

// ---------------------------------------------------------------- segments

/// Exact integers for a set of floats, all scaled by one power of two.
fn exact_ints<const N: usize>(values: [f64; N]) -> [BigInt; N] {
    let decoded = values.map(Float::integer_decode);
    let min_exp = decoded.iter().filter(|d| d.0 != 0).map(|d| d.1).min().unwrap_or(0);
    decoded.map(|(m, e, sign)| {
        let v = BigInt::from(m) << ((e - min_exp) as usize);
        if sign < 0 { -v } else { v }
    })
}

/// Proper crossing by solving p + t·r = q + u·s exactly and requiring both
/// parameters strictly inside (0, 1).
fn segments_oracle(s1: &Segment, s2: &Segment) -> bool {
    let [px, py, bx, by, qx, qy, dx2, dy2] = exact_ints([s1.a.x, s1.a.y, s1.b.x, s1.b.y, s2.a.x, s2.a.y, s2.b.x, s2.b.y]);
    let (rx, ry) = (&bx - &px, &by - &py);
    let (sx, sy) = (&dx2 - &qx, &dy2 - &qy);
    let denom = &rx * &sy - &ry * &sx;
    if denom.is_zero() {
        return false;
    }
    let (dx, dy) = (&qx - &px, &qy - &py);
    let t_num = &dx * &sy - &dy * &sx;
    let u_num = &dx * &ry - &dy * &rx;
    // t = t_num / denom in (0, 1), likewise u, without dividing.
    let inside = |num: &BigInt| {
        if denom.sign() == Sign::Plus {
            num.sign() == Sign::Plus && num < &denom
        } else {
            num.sign() == Sign::Minus && num > &denom
        }
    };
    inside(&t_num) && inside(&u_num)
}

fn uniform_point(rng: &mut ChaCha8Rng) -> Point2 {
    Point2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0))
}

/// Quarter-meter lattice: collinear and touching configurations occur
/// often and are exactly representable.
fn lattice_point(rng: &mut ChaCha8Rng) -> Point2 {
    Point2::new(rng.gen_range(-16..=16) as f64 * 0.25, rng.gen_range(-16..=16) as f64 * 0.25)
}

fn random_pair(rng: &mut ChaCha8Rng) -> (Segment, Segment) {
    let pt: fn(&mut ChaCha8Rng) -> Point2 = if rng.gen_bool(0.5) { uniform_point } else { lattice_point };
    let s1 = Segment::new(pt(rng), pt(rng));
    let s2 = if rng.gen_range(0..10) == 0 { Segment::new(s1.b, pt(rng)) } else { Segment::new(pt(rng), pt(rng)) };
    (s1, s2)
}

/// Endpoint placed on the line through the other segment by floating
/// arithmetic, so it lands a rounding error off the line.
fn rounded_pair(rng: &mut ChaCha8Rng) -> (Segment, Segment) {
    let s1 = Segment::new(uniform_point(rng), uniform_point(rng));
    let t: f64 = rng.gen_range(-0.5..1.5);
    let jitter = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(-1e-9..1e-9) };
    let on = s1.a + (s1.b - s1.a) * t + Point2::new(jitter, -jitter);
    (s1, Segment::new(on, uniform_point(rng)))
}

fn min_orientation(s1: &Segment, s2: &Segment) -> f64 {
    [cross3(s1.a, s1.b, s2.a), cross3(s1.a, s1.b, s2.b), cross3(s2.a, s2.b, s1.a), cross3(s2.a, s2.b, s1.b)]
        .into_iter()
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min)
}

fn segment_oracle_equivalence() -> Outcome {
    const PAIRS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e6);
    let (mut outside_mismatch, mut band_mismatch, mut band) = (0, 0, 0);
    for _ in 0..PAIRS {
        let (s1, s2) = random_pair(&mut rng);
        let min_orient = min_orientation(&s1, &s2);
        let agree = segments_intersect(&s1, &s2) == segments_oracle(&s1, &s2);
        if min_orient > EPS_GEOM {
            outside_mismatch += usize::from(!agree);
        } else {
            band += 1;
            band_mismatch += usize::from(!agree);
        }
    }
    let band_rate = band_mismatch as f64 / PAIRS as f64;
    outcome(
        outside_mismatch == 0 && band_rate <= 1e-3,
        format!("{PAIRS} pairs, {outside_mismatch} mismatches outside band, {band_mismatch}/{band} in band"),
    )
}

// ---------------------------------------------------------------- hulls

fn icross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn on_closed_segment(p: (i64, i64), a: (i64, i64), b: (i64, i64)) -> bool {
    icross(a, b, p) == 0 && p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

fn in_closed_triangle(p: (i64, i64), a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> bool {
    if icross(a, b, c) == 0 {
        return on_closed_segment(p, a, b) || on_closed_segment(p, b, c) || on_closed_segment(p, a, c);
    }
    let d = [icross(a, b, p), icross(b, c, p), icross(c, a, p)];
    d.iter().all(|&v| v >= 0) || d.iter().all(|&v| v <= 0)
}

/// Extreme points: a point survives unless it lies in a closed triangle (or
/// segment) of other distinct points.
fn hull_oracle(points: &[(i64, i64)]) -> BTreeSet<(i64, i64)> {
    let distinct: Vec<(i64, i64)> = points.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let n = distinct.len();
    let mut out = BTreeSet::new();
    for (i, &p) in distinct.iter().enumerate() {
        let others: Vec<_> = (0..n).filter(|&j| j != i).map(|j| distinct[j]).collect();
        let m = others.len();
        let mut interior = false;
        'search: for a in 0..m {
            for b in a..m {
                for c in b..m {
                    if in_closed_triangle(p, others[a], others[b], others[c]) {
                        interior = true;
                        break 'search;
                    }
                }
            }
        }
        if !interior {
            out.insert(p);
        }
    }
    out
}

fn hull_oracle_equivalence() -> Outcome {
    const SETS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x4011);
    let mut mismatches = 0;
    let mut first = None;
    for k in 0..SETS {
        let n = rng.gen_range(1..=12);
        let span = if k % 3 == 0 { 4 } else { 20 };
        let pts: Vec<(i64, i64)> = (0..n).map(|_| (rng.gen_range(-span..=span), rng.gen_range(-span..=span))).collect();
        let fpts: Vec<Point2> = pts.iter().map(|&(x, y)| Point2::new(x as f64, y as f64)).collect();
        let got: BTreeSet<(i64, i64)> =
            convex_hull(&fpts).unwrap().points().iter().map(|p| (p.x as i64, p.y as i64)).collect();
        if got != hull_oracle(&pts) {
            mismatches += 1;
            first.get_or_insert(pts);
        }
    }
    outcome(mismatches == 0, format!("{SETS} sets, {mismatches} mismatches{}", first.map_or(String::new(), |p| format!(", e.g. {p:?}"))))
}

// ---------------------------------------------------------------- DBSCAN

/// Quadratic reference: all-pairs neighbourhoods, core labels by repeated
/// min-label relaxation, border to lowest-index core neighbour.
fn dbscan_oracle(cells: &[(usize, usize)], eps_cells: f64, min_pts: usize) -> BTreeSet<BTreeSet<(usize, usize)>> {
    let n = cells.len();
    let close = |i: usize, j: usize| {
        let dr = cells[i].0 as f64 - cells[j].0 as f64;
        let dc = cells[i].1 as f64 - cells[j].1 as f64;
        dr * dr + dc * dc <= eps_cells * eps_cells
    };
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| close(i, j)).count() >= min_pts).collect();
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            if !core[i] {
                continue;
            }
            for j in 0..n {
                if core[j] && close(i, j) && label[j] < label[i] {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: std::collections::BTreeMap<usize, BTreeSet<(usize, usize)>> = Default::default();
    for i in 0..n {
        let l = if core[i] { Some(label[i]) } else { (0..n).find(|&j| core[j] && close(i, j)).map(|j| label[j]) };
        if let Some(l) = l {
            groups.entry(l).or_default().insert(cells[i]);
        }
    }
    groups.into_values().collect()
}

fn dbscan_equivalence() -> Outcome {
    const GRIDS: usize = 1_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xdb5);
    let mut mismatches = 0;
    for _ in 0..GRIDS {
        let (w, h) = (rng.gen_range(4..24), rng.gen_range(4..24));
        let density = rng.gen_range(0.05..0.6);
        let eps_cells = [1.0, 1.5, 2.0, 2.5][rng.gen_range(0..4)];
        let min_pts = rng.gen_range(2..7);
        let g = GridGeometry { origin: Point2::new(-3.0, 1.4), cell_size: 0.2, width: w, height: h };
        let cells: Vec<CellState> = (0..g.len())
            .map(|_| {
                let mut c = CellState::unknown(Point2::ZERO);
                if rng.gen_bool(density) {
                    c.m_occ = 0.9;
                    c.m_free = 0.05;
                    c.vel = Point2::new(3.0, -1.0);
                    c.vel_cov = Cov2::isotropic(0.04);
                }
                c
            })
            .collect();
        let frame = GridFrame::new(0.0, g, cells).unwrap();
        let mask = search_mask(&frame, &MaskConfig::default());
        let got: BTreeSet<BTreeSet<(usize, usize)>> = dbscan(&frame, &mask, eps_cells * g.cell_size, min_pts)
            .into_iter()
            .map(|c| c.members.iter().map(|m| (m.row, m.col)).collect())
            .collect();
        let masked: Vec<(usize, usize)> = mask.iter().map(|m| (m.row, m.col)).collect();
        let want = dbscan_oracle(&masked, eps_cells, min_pts);
        if got != want {
            if mismatches == 0 {
                eprintln!("eps={eps_cells} min_pts={min_pts}\n got={got:?}\nwant={want:?}");
            }
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{GRIDS} grids, {mismatches} mismatches"))
}

// ---------------------------------------------------------------- prediction

fn random_attrs(rng: &mut ChaCha8Rng) -> ClusterAttributes {
    let position = Point2::new(rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0));
    let orientation = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    ClusterAttributes {
        position,
        orientation,
        speed: rng.gen_range(1.0..20.0),
        bbox: OrientedBox::new(position, orientation, rng.gen_range(0.6..6.0), rng.gen_range(0.4..2.5)),
    }
}

fn hull_within(inner: &dogm_threat::HullPolygon, outer: &dogm_threat::HullPolygon) -> bool {
    inner.points().iter().all(|&p| point_in_convex(p, outer))
}

fn prediction_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9ed);
    let (mut identity_fail, mut t_fail, mut phi_fail) = (0, 0, 0);
    for _ in 0..1_000 {
        let a = random_attrs(&mut rng);
        let tiny = predict_cluster_area(&a, &PredictionConfig { horizon: 1e-15, phi_u: 0.0 });
        let same = tiny.len() == 4
            && tiny.points().iter().all(|p| a.bbox.corners().iter().any(|c| (*c - *p).norm() <= EPS_GEOM));
        identity_fail += usize::from(!same);

        let t1 = rng.gen_range(0.1..3.0);
        let t2 = t1 + rng.gen_range(0.0..3.0);
        let phi = rng.gen_range(0.0..0.7);
        let h = |horizon: f64, phi_u: f64| predict_cluster_area(&a, &PredictionConfig { horizon, phi_u });
        t_fail += usize::from(!hull_within(&h(t1, phi), &h(t2, phi)));
        let p2 = (phi + rng.gen_range(0.0..0.08)).min(std::f64::consts::FRAC_PI_4);
        phi_fail += usize::from(!hull_within(&h(t1, phi), &h(t1, p2)));
    }
    outcome(
        identity_fail + t_fail + phi_fail == 0,
        format!("1000 draws: identity {identity_fail}, T-monotone {t_fail}, phi-monotone {phi_fail} failures"),
    )
}

// ---------------------------------------------------------------- simulator

fn noiseless_round_trip() -> Outcome {
    let noise = NoiseConfig::noiseless();
    let (mut frames, mut visible, mut bad) = (0, 0, 0);
    for kind in ScenarioKind::ALL {
        let s = build_scenario(kind, ScenarioParams::defaults(kind)).unwrap();
        for n in 0..s.frame_count() {
            let (frame, labels) = synthesize_labeled(&s, n, &noise);
            let mask: Vec<CellIndex> = search_mask(&frame, &MaskConfig::default());
            frames += 1;
            visible += usize::from(!labels.is_empty());
            bad += usize::from(mask != labels);
        }
    }
    // The actor may leave the grid after the collision; every frame up to
    // it must show the actor.
    outcome(bad == 0 && visible * 10 >= frames * 9, format!("{frames} frames ({visible} with actor cells), {bad} mismatches"))
}

fn run_files(kind: ScenarioKind) -> (String, String) {
    let s = build_scenario(kind, ScenarioParams::defaults(kind)).unwrap();
    let run = run_scenario(&s, &NoiseConfig::default(), &PipelineConfig::default()).unwrap();
    let reports: String = run.frames.iter().map(|f| f.report.to_json_line() + "\n").collect();
    (serde_json::to_string(&run.result).unwrap(), reports)
}

fn determinism() -> Outcome {
    let mut same = true;
    for kind in ScenarioKind::ALL {
        same &= run_files(kind) == run_files(kind);
    }
    outcome(same, "result and report bytes identical across two runs of every scenario")
}

fn lightweightness() -> Outcome {
    let r = run_bench(&BenchConfig::default(), &PipelineConfig::default()).unwrap();
    let pass = r.grid_width == 300 && r.grid_height == 300 && r.overhead_percent <= 10.0 && r.total.median_ms <= 10.0;
    outcome(pass, format!("{} frames, overhead {:.2}%, full median {:.3} ms", r.frames, r.overhead_percent, r.total.median_ms))
}

#[test]
fn acceptance() {
    let secs = Duration::from_secs;
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("rittr arithmetic", Box::new(|| timed(Duration::from_millis(1), rittr_arithmetic))),
        ("turning-in rittr >= 3", Box::new(move || timed(secs(10), turning_in))),
        ("turning-over rittr ordering", Box::new(move || timed(secs(10), turning_over))),
        ("segment oracle equivalence", Box::new(move || timed(secs(5), segment_oracle_equivalence))),
        ("convex hull oracle", Box::new(hull_oracle_equivalence)),
        ("dbscan reference equivalence", Box::new(dbscan_equivalence)),
        ("prediction identities", Box::new(prediction_identities)),
        ("noiseless round trip", Box::new(noiseless_round_trip)),
        ("determinism", Box::new(determinism)),
        ("lightweightness", Box::new(lightweightness)),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn oracle_helpers_sanity() {
    assert!(in_closed_triangle((1, 1), (0, 0), (3, 0), (0, 3)));
    assert!(!in_closed_triangle((3, 3), (0, 0), (3, 0), (0, 3)));
    assert!(segments_oracle(
        &Segment::new(Point2::new(0.0, 0.0), Point2::new(2.0, 2.0)),
        &Segment::new(Point2::new(0.0, 2.0), Point2::new(2.0, 0.0))
    ));
}


#[test]
fn rounded_near_collinear_pairs_agree_outside_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x70ff);
    for _ in 0..20_000 {
        let (s1, s2) = rounded_pair(&mut rng);
        if min_orientation(&s1, &s2) > EPS_GEOM {
            assert_eq!(segments_intersect(&s1, &s2), segments_oracle(&s1, &s2), "{s1:?} {s2:?}");
        }
    }
}
