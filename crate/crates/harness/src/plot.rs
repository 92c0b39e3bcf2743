//! Static SVG figures: trajectories, the final SEC and the M/K regions.

use std::fmt::Write;

use flock_core::coordsys::{extract_references, CommonFrame};
use flock_core::dispatch::{classify, Params};
use flock_core::verify::{for_each_change, State};
use flock_core::{EventKind, Point, Trace};

const SIZE: f64 = 800.0;
const COLORS: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

struct View {
    min: Point,
    scale: f64,
}

impl View {
    fn map(&self, p: Point) -> (f64, f64) {
        (
            20.0 + (p.x - self.min.x) * self.scale,
            SIZE - 20.0 - (p.y - self.min.y) * self.scale,
        )
    }

    fn path(&self, pts: &[Point]) -> String {
        let mut s = String::new();
        for (k, p) in pts.iter().enumerate() {
            let (x, y) = self.map(*p);
            let _ = write!(s, "{}{x:.2},{y:.2} ", if k == 0 { "M" } else { "L" });
        }
        s
    }
}

/// Renders the trace as an SVG document.
pub fn render_svg(trace: &Trace, params: &Params) -> String {
    let mut tracks: Vec<Vec<Point>> = Vec::new();
    let mut last = State::default();
    for_each_change(trace, |e, _, after| {
        if tracks.len() <= e.robot {
            tracks.resize(e.robot + 1, Vec::new());
        }
        if e.kind != EventKind::Crash {
            tracks[e.robot].push(e.to);
        }
        last = after.clone();
    });
    let (_, final_pts) = last.alive();
    let mut extent: Vec<Point> = tracks.iter().flatten().copied().collect();
    let tol = params.tolerance(&final_pts);
    let refs = if final_pts.len() >= 3 {
        extract_references(&final_pts, tol)
    } else {
        None
    };
    if let Some(r) = &refs {
        let c = r.sec;
        extent.push(c.center + Point::new(c.radius, c.radius));
        extent.push(c.center - Point::new(c.radius, c.radius));
    }
    let min = extent.iter().fold(Point::new(f64::INFINITY, f64::INFINITY), |a, p| Point::new(a.x.min(p.x), a.y.min(p.y)));
    let max = extent.iter().fold(Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |a, p| Point::new(a.x.max(p.x), a.y.max(p.y)));
    let span = (max.x - min.x).max(max.y - min.y).max(1e-12);
    let view = View {
        min,
        scale: (SIZE - 40.0) / span,
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    if let Some(r) = &refs {
        let frame = match classify(&final_pts, params).ok().and_then(|c| c.formation) {
            Some(f) => f.frame,
            None => CommonFrame::new(r, &final_pts, tol),
        };
        let y_r1 = frame.to_common(final_pts[r.r1]).y;
        let y_r2 = frame.to_common(final_pts[r.r2]).y;
        let m = &params.motion;
        let reach = 2.0 * frame.radius;
        let top = Point::new(0.0, y_r1);
        let wedge = [
            top + Point::new(-1.0, m.k) * (reach / (1.0 + m.k * m.k).sqrt()),
            top,
            top + Point::new(1.0, m.k) * (reach / (1.0 + m.k * m.k).sqrt()),
        ];
        let xk = -y_r2 / (m.h + m.h_prime);
        let lens = [
            Point::ORIGIN,
            Point::new(xk, -m.h_prime * xk),
            Point::new(0.0, y_r2),
            Point::new(-xk, -m.h_prime * xk),
        ];
        let g = |pts: &[Point]| pts.iter().map(|q| frame.from_common(*q)).collect::<Vec<_>>();
        let _ = writeln!(svg, r##"<path d="{}Z" fill="#2ca02c" fill-opacity="0.15" stroke="#2ca02c"/>"##, view.path(&g(&wedge)));
        let _ = writeln!(svg, r##"<path d="{}Z" fill="#9467bd" fill-opacity="0.15" stroke="#9467bd"/>"##, view.path(&g(&lens)));
        let (cx, cy) = view.map(r.sec.center);
        let _ = writeln!(
            svg,
            r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="#888888" stroke-dasharray="6 4"/>"##,
            r.sec.radius * view.scale
        );
    }
    for (id, t) in tracks.iter().enumerate() {
        if t.is_empty() {
            continue;
        }
        let color = COLORS[id % COLORS.len()];
        let _ = writeln!(svg, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#, view.path(t));
        let (x0, y0) = view.map(t[0]);
        let _ = writeln!(svg, r#"<circle cx="{x0:.2}" cy="{y0:.2}" r="4" fill="none" stroke="{color}"/>"#);
        let alive = last.positions.get(id).copied().flatten().is_some();
        let (x1, y1) = view.map(*t.last().unwrap());
        if alive {
            let _ = writeln!(svg, r#"<circle cx="{x1:.2}" cy="{y1:.2}" r="5" fill="{color}"/>"#);
        } else {
            let _ = writeln!(
                svg,
                r#"<path d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="{color}" stroke-width="2"/>"#,
                x1 - 5.0,
                y1 - 5.0,
                x1 + 5.0,
                y1 + 5.0,
                x1 - 5.0,
                y1 + 5.0,
                x1 + 5.0,
                y1 - 5.0
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
