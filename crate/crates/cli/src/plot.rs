//! Static SVG rendering of a diagram with optional broken lines.

use std::fmt::Write;

use num_traits::ToPrimitive;

use tropscat::affine::RatPoint;
use tropscat::broken_lines::BrokenLine;
use tropscat::scalar::Rat;
use tropscat::scattering::ScatteringDiagram;

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

struct Frame {
    radius: f64,
    size: f64,
}

impl Frame {
    fn map(&self, p: &RatPoint) -> (f64, f64) {
        let f = |r: &Rat| r.to_f64().unwrap_or(0.0);
        let s = self.size / (2.0 * self.radius);
        ((f(&p.x) + self.radius) * s, (self.radius - f(&p.y)) * s)
    }
}

pub fn render(d: &ScatteringDiagram, lines: &[BrokenLine], size: u32) -> String {
    let frame = Frame { radius: d.radius.to_f64().unwrap_or(8.0), size: size as f64 };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"##
    );
    let _ = writeln!(out, r##"<rect width="{size}" height="{size}" fill="white"/>"##);
    let _ = writeln!(out, r##"<g id="cuts" stroke="#999999" stroke-dasharray="6 4" stroke-width="1">"##);
    for s in &d.base.singularities {
        for cut in [&s.cut_plus, &s.cut_minus] {
            let far = cut.origin.along(&cut.direction.to_rat(), &(&d.radius * Rat::from_integer(4.into())));
            let (x1, y1) = frame.map(&cut.origin);
            let (x2, y2) = frame.map(&far);
            let _ = writeln!(out, r##"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"##);
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g id="rays" fill="none">"##);
    for ray in &d.rays {
        let grade = ray.min_grade().unwrap_or(1) as usize;
        let color = PALETTE[(grade - 1).min(PALETTE.len() - 1)];
        let width = (2.5 / grade as f64).max(0.4);
        for seg in &ray.segments {
            let (x1, y1) = frame.map(&seg.start);
            let (x2, y2) = frame.map(&seg.end);
            let _ = writeln!(
                out,
                r##"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{color}" stroke-width="{width:.2}"><title>ray {} grade {grade}</title></line>"##,
                ray.id
            );
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g id="broken-lines" fill="none" stroke="#1f4e9e" stroke-width="1.5">"##);
    for l in lines {
        for seg in &l.segments {
            let (x1, y1) = frame.map(&seg.start);
            let (x2, y2) = frame.map(&seg.end);
            let _ = writeln!(out, r##"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"##);
        }
    }
    if let Some(l) = lines.first() {
        let (x, y) = frame.map(&l.endpoint);
        let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#1f4e9e"/>"##);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g id="singularities" stroke="#c00000" stroke-width="2">"##);
    for s in &d.base.singularities {
        let (x, y) = frame.map(&s.position);
        let _ = writeln!(
            out,
            r##"<path d="M{:.2} {:.2} L{:.2} {:.2} M{:.2} {:.2} L{:.2} {:.2}"/>"##,
            x - 4.0,
            y - 4.0,
            x + 4.0,
            y + 4.0,
            x - 4.0,
            y + 4.0,
            x + 4.0,
            y - 4.0
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}
