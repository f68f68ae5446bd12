//! SVG frames of a running game.

use std::fmt::Write;

use mocg_core::engine::{Engine, Role};
use mocg_core::geometry::{Point2, Polygon};
use mocg_core::goalvis::{construct_gcp, is_goal_visible};

#[derive(Clone, Copy, Debug)]
pub struct RenderOptions {
    pub disks: bool,
    pub gcp: bool,
    pub paths: bool,
    pub trails: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { disks: true, gcp: true, paths: true, trails: true }
    }
}

const WIDTH: f64 = 800.0;
const PAD: f64 = 20.0;

struct Frame {
    min: Point2,
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(arena: &Polygon) -> Self {
        let (lo, hi) = arena.bbox();
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        let scale = (WIDTH - 2.0 * PAD) / span;
        Self { min: lo, scale, height: (hi.y - lo.y) * scale + 2.0 * PAD }
    }

    fn map(&self, p: Point2) -> (f64, f64) {
        (PAD + (p.x - self.min.x) * self.scale, self.height - PAD - (p.y - self.min.y) * self.scale)
    }

    fn points(&self, ps: &[Point2]) -> String {
        ps.iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn polygon(out: &mut String, f: &Frame, poly: &Polygon, style: &str) {
    let _ = writeln!(out, r#"<polygon points="{}" {style}/>"#, f.points(poly.vertices()));
}

fn circle(out: &mut String, f: &Frame, c: Point2, r: f64, style: &str) {
    let (x, y) = f.map(c);
    let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" {style}/>"#, r * f.scale);
}

fn polyline(out: &mut String, f: &Frame, ps: &[Point2], style: &str) {
    if ps.len() >= 2 {
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" {style}/>"#, f.points(ps));
    }
}

/// Renders the engine's current state.
pub fn render_frame(engine: &Engine, opts: &RenderOptions) -> String {
    let scn = engine.scenario();
    let f = Frame::new(&scn.space.arena);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{:.0}" viewBox="0 0 {WIDTH:.0} {:.0}">"#,
        f.height, f.height
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    polygon(&mut out, &f, &scn.space.arena, r##"fill="#fafafa" stroke="#333333" stroke-width="2""##);
    polygon(&mut out, &f, &scn.goal, r##"fill="#b7e4c7" stroke="#2d6a4f" stroke-width="1.5""##);
    for o in &scn.space.obstacles {
        polygon(&mut out, &f, o, r##"fill="#6c757d" stroke="#343a40" stroke-width="1""##);
    }

    let history = engine.history();
    if opts.trails && !history.is_empty() {
        for i in 0..engine.pursuers().len() {
            let mut trail: Vec<Point2> = vec![scn.pursuers[i].position];
            trail.extend(history.iter().map(|r| r.pursuers[i]));
            polyline(&mut out, &f, &trail, r##"stroke="#1d3557" stroke-width="1" stroke-opacity="0.5""##);
        }
        for j in 0..engine.evaders().len() {
            let mut trail: Vec<Point2> = vec![scn.evaders[j].position];
            trail.extend(history.iter().map(|r| r.evaders[j]));
            polyline(&mut out, &f, &trail, r##"stroke="#e63946" stroke-width="1" stroke-opacity="0.5""##);
        }
    }

    for (i, role) in engine.roles().iter().enumerate() {
        let p = engine.pursuers()[i];
        match role {
            Role::Onsite { snapshot, .. } if opts.disks => {
                circle(
                    &mut out,
                    &f,
                    snapshot.center,
                    snapshot.expanded_radius,
                    r##"fill="#457b9d" fill-opacity="0.12" stroke="#457b9d" stroke-dasharray="4 3""##,
                );
            }
            Role::GoalVisible { .. } | Role::NonVisible { .. } if opts.gcp && is_goal_visible(p, &scn.space, &scn.goal) => {
                if let Ok(g) = construct_gcp(p, &scn.space, &scn.goal) {
                    polygon(&mut out, &f, &g.polygon, r##"fill="#f4a261" fill-opacity="0.15" stroke="#f4a261""##);
                }
            }
            _ => {}
        }
        if let (true, Role::NonVisible { certificate, .. }) = (opts.paths, role) {
            polyline(&mut out, &f, &certificate.path.waypoints, r##"stroke="#f4a261" stroke-width="1.5" stroke-dasharray="6 3""##);
        }
    }

    let pr = 5.0;
    for (i, &p) in engine.pursuers().iter().enumerate() {
        let r = scn.pursuers[i].capture_radius;
        circle(&mut out, &f, p, r, r##"fill="none" stroke="#1d3557" stroke-opacity="0.4""##);
        let (x, y) = f.map(p);
        let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{y:.2}" r="{pr}" fill="#1d3557"/>"##);
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" font-size="11" fill="#1d3557">P{}</text>"##, x + 6.0, y - 6.0, i + 1);
    }
    for (j, &e) in engine.evaders().iter().enumerate() {
        if !engine.status()[j].is_active() {
            continue;
        }
        let (x, y) = f.map(e);
        let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{y:.2}" r="{pr}" fill="#e63946"/>"##);
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" font-size="11" fill="#e63946">E{}</text>"##, x + 6.0, y - 6.0, j + 1);
    }
    let _ = writeln!(out, r##"<text x="{PAD}" y="14" font-size="12" fill="#333333">step {} lower bound {}</text>"##, engine.step_index(), engine.lower_bound());
    out.push_str("</svg>\n");
    out
}
