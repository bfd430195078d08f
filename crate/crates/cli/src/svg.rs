//! Static top-down view of one frame: cluster cells, attention raster,
//! predicted hulls, the ego hull and ground-truth footprints.

use std::fmt::Write as _;

use dogm_threat::pipeline::FrameAnalysis;
use dogm_threat::{AttentionRaster, GridFrame, HullPolygon, OrientedBox, Point2, ThreatStatus};

const PX_PER_M: f64 = 10.0;

struct View {
    origin: Point2,
    height_m: f64,
}

impl View {
    fn x(&self, p: Point2) -> f64 {
        (p.x - self.origin.x) * PX_PER_M
    }

    /// SVG y grows downward.
    fn y(&self, p: Point2) -> f64 {
        (self.height_m - (p.y - self.origin.y)) * PX_PER_M
    }

    fn points(&self, pts: &[Point2]) -> String {
        pts.iter().map(|&p| format!("{:.2},{:.2}", self.x(p), self.y(p))).collect::<Vec<_>>().join(" ")
    }
}

fn status_colour(s: ThreatStatus) -> &'static str {
    match s {
        ThreatStatus::Threat => "#d62728",
        ThreatStatus::OnTrajectory => "#ff7f0e",
        ThreatStatus::NoThreat => "#2ca02c",
    }
}

pub struct Scene<'a> {
    pub frame: &'a GridFrame,
    pub analysis: &'a FrameAnalysis,
    pub raster: &'a AttentionRaster,
    pub ego: OrientedBox,
    pub actor: OrientedBox,
    pub prior_lane: &'a HullPolygon,
}

pub fn render(scene: &Scene<'_>) -> String {
    let f = scene.frame;
    let a = f.cell_size();
    // Cell centers sit on the lattice; the drawing covers whole cells.
    let origin = f.origin() - Point2::new(0.5 * a, 0.5 * a);
    let (w_m, h_m) = (f.width() as f64 * a, f.height() as f64 * a);
    let v = View { origin, height_m: h_m };
    let cell_px = a * PX_PER_M;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}">"#,
        w_m * PX_PER_M,
        h_m * PX_PER_M,
        w_m * PX_PER_M,
        h_m * PX_PER_M
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#f7f7f7"/>"##);
    let _ = writeln!(s, r##"<polygon points="{}" fill="#dddddd" stroke="none"/>"##, v.points(scene.prior_lane.points()));

    let _ = writeln!(s, r##"<g fill="#ffbf00" fill-opacity="0.35">"##);
    for row in 0..f.height() {
        for col in 0..f.width() {
            if scene.raster.get(row, col) {
                let c = f.geometry().cell_center(row, col);
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{cell_px:.2}" height="{cell_px:.2}"/>"#,
                    v.x(c) - 0.5 * cell_px,
                    v.y(c) - 0.5 * cell_px
                );
            }
        }
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g fill="#555555">"##);
    for (cluster, _) in &scene.analysis.detection.clusters {
        for st in &cluster.states {
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{cell_px:.2}" height="{cell_px:.2}"/>"#,
                v.x(st.pos) - 0.5 * cell_px,
                v.y(st.pos) - 0.5 * cell_px
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let r = &scene.analysis.report;
    let _ = writeln!(
        s,
        r##"<polygon points="{}" fill="#1f77b4" fill-opacity="0.15" stroke="#1f77b4" stroke-width="1.5"/>"##,
        v.points(r.ego_hull.points())
    );
    for e in &r.entries {
        let colour = status_colour(e.status);
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{colour}" fill-opacity="0.15" stroke="{colour}" stroke-width="1.5"/>"#,
            v.points(e.hull.points())
        );
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="none" stroke="{colour}" stroke-width="1"/>"#,
            v.points(&e.attributes.bbox.corners())
        );
    }
    for (b, colour) in [(scene.ego, "#1f77b4"), (scene.actor, "#000000")] {
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="none" stroke="{colour}" stroke-width="1" stroke-dasharray="4 2"/>"#,
            v.points(&b.corners())
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="8" y="18" font-family="monospace" font-size="14" fill="#222222">t = {:.1} s, threats: {}</text>"##,
        r.timestamp,
        r.count(ThreatStatus::Threat)
    );
    s.push_str("</svg>\n");
    s
}
