//! Goal visibility, goal-covering polygons, and the goal-visible pursuit heading.
//!
//! A goal-covering polygon is a convex obstacle-free polygon containing both the
//! pursuer and the goal; while the pursuer moves inside it the whole goal stays
//! in sight. The admissible headings are the directions that keep it inside.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ccw_span, sigma, AngleRange, FreeSpace, Point2, Polygon, Region, EPS};

/// Goal dilation used when the pursuer already stands in the goal, relative to goal diameter.
pub const IN_GOAL_MARGIN: f64 = 1e-3;

/// The two goal vertices spanning the narrowest cone from `x` that contains the goal,
/// ordered counterclockwise (lower bearing first).
pub fn minimum_covering_points(x: Point2, goal: &Polygon) -> Result<(Point2, Point2)> {
    if goal.contains(x) {
        return Err(Error::DegenerateInput(format!("{x} lies in the goal")));
    }
    let vs = goal.vertices();
    let bearings: Vec<f64> = vs.iter().map(|&v| sigma(x, v)).collect::<Result<_>>()?;
    let mut best: Option<(f64, f64, usize, usize)> = None;
    for i in 0..vs.len() {
        for j in 0..vs.len() {
            if i == j {
                continue;
            }
            let range = AngleRange::between(bearings[i], bearings[j]);
            if range.span > PI || !bearings.iter().all(|&b| range.contains_tol(b, 1e-12)) {
                continue;
            }
            let reach = x.dist(vs[i]) + x.dist(vs[j]);
            let better = match best {
                None => true,
                Some((span, r, _, _)) => range.span < span - 1e-12 || (range.span <= span + 1e-12 && reach < r),
            };
            if better {
                best = Some((range.span, reach, i, j));
            }
        }
    }
    let (_, _, i, j) = best.ok_or_else(|| Error::DegenerateInput("no covering cone".into()))?;
    Ok((vs[i], vs[j]))
}

/// Every goal point can be reached from `x` along an obstacle-free segment.
pub fn is_goal_visible(x: Point2, space: &FreeSpace, goal: &Polygon) -> bool {
    if goal.contains(x) {
        return true;
    }
    let Ok((xl, xu)) = minimum_covering_points(x, goal) else {
        return false;
    };
    match Polygon::new(vec![x, xl, xu]) {
        Ok(tri) => space.region_free(&Region::Polygon(tri)),
        Err(_) => space.segment_free(x, xl) && space.segment_free(x, xu),
    }
}

/// Nearest visible obstacle vertices clockwise of `xl` and counterclockwise of `xu`,
/// with the reflections `2x - xu` and `2x - xl` as fallbacks.
pub fn first_visible_vertices(x: Point2, xl: Point2, xu: Point2, space: &FreeSpace) -> Result<(Point2, Point2)> {
    let tl = sigma(x, xl)?;
    let tu = sigma(x, xu)?;
    let mut yl: Option<(f64, f64, Point2)> = None;
    let mut yu: Option<(f64, f64, Point2)> = None;
    for o in &space.obstacles {
        for &y in o.vertices() {
            let Ok(ty) = sigma(x, y) else { continue };
            if !space.segment_free(x, y) {
                continue;
            }
            let d = x.dist(y);
            let lower = ccw_span(ty, tl);
            if lower > 1e-12 && lower <= PI && ccw_span(ty, tu) <= PI
                && yl.is_none_or(|(s, dd, _)| lower < s - 1e-12 || (lower <= s + 1e-12 && d < dd)) {
                    yl = Some((lower, d, y));
                }
            let upper = ccw_span(tu, ty);
            if upper > 1e-12 && upper <= PI && ccw_span(tl, ty) <= PI
                && yu.is_none_or(|(s, dd, _)| upper < s - 1e-12 || (upper <= s + 1e-12 && d < dd)) {
                    yu = Some((upper, d, y));
                }
        }
    }
    Ok((yl.map_or(x * 2.0 - xu, |t| t.2), yu.map_or(x * 2.0 - xl, |t| t.2)))
}

/// Goal-covering polygon together with the headings that keep the pursuer inside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gcp {
    pub polygon: Polygon,
    pub range: AngleRange,
}

fn intersect_lines(p: Point2, d: Point2, q: Point2, e: Point2) -> Option<(f64, f64)> {
    let den = d.cross(e);
    if den.abs() <= 1e-14 * d.norm() * e.norm() {
        return None;
    }
    let t = (q - p).cross(e) / den;
    let s = (q - p).cross(d) / den;
    Some((t, s))
}

/// Point where segment `x -> y` meets the line through `a` and `b`, else `y`.
fn cut_at_line(x: Point2, y: Point2, a: Point2, b: Point2) -> Point2 {
    match intersect_lines(x, y - x, a, b - a) {
        Some((t, _)) if t > EPS && t <= 1.0 => x + (y - x) * t,
        _ => y,
    }
}

/// Goal vertices counterclockwise from `from` to `to`, inclusive.
fn goal_chain(goal: &Polygon, from: Point2, to: Point2) -> Vec<Point2> {
    let vs = goal.vertices();
    let n = vs.len();
    let i0 = vs.iter().position(|&v| v == from).unwrap_or(0);
    let mut out = Vec::new();
    for k in 0..n {
        let v = vs[(i0 + k) % n];
        out.push(v);
        if v == to {
            break;
        }
    }
    out
}

fn clip_halfplane(poly: &[Point2], a: Point2, b: Point2) -> Vec<Point2> {
    let side = |p: Point2| (b - a).cross(p - a);
    let mut out = Vec::new();
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push(p.lerp(q, t));
        }
    }
    out
}

/// Headings at `x` that keep a step inside the convex polygon.
pub fn headings_inside(x: Point2, polygon: &Polygon) -> AngleRange {
    let n = polygon.len();
    for i in 0..n {
        let v = polygon.vertex(i);
        if v.dist(x) <= 1e-9 {
            let next = polygon.vertex(i + 1);
            let prev = polygon.vertex(i + n - 1);
            if let (Ok(a), Ok(b)) = (sigma(x, next), sigma(x, prev)) {
                return AngleRange::between(a, b);
            }
        }
    }
    for (a, b) in polygon.edges() {
        if crate::geometry::point_segment_distance(x, a, b) <= 1e-9 {
            if let Ok(t) = sigma(a, b) {
                return AngleRange::new(t, PI);
            }
        }
    }
    AngleRange::full()
}

fn valid_gcp(poly: &Polygon, x: Point2, space: &FreeSpace, goal: &Polygon) -> bool {
    poly.is_convex()
        && poly.contains(x)
        && goal.vertices().iter().all(|&v| poly.contains(v))
        && space.region_free(&Region::Polygon(poly.clone()))
}

fn finish(poly: Polygon, x: Point2, space: &FreeSpace) -> Gcp {
    let mut poly = poly;
    if space.arena.is_convex() && !poly.vertices().iter().all(|&v| space.arena.contains(v)) {
        let mut pts = poly.vertices().to_vec();
        for (a, b) in space.arena.edges() {
            pts = clip_halfplane(&pts, a, b);
        }
        if let Ok(p) = Polygon::new(pts) {
            poly = p;
        }
    }
    let range = headings_inside(x, &poly);
    Gcp { polygon: poly, range }
}

/// Builds a goal-covering polygon for a goal-visible point.
pub fn construct_gcp(x: Point2, space: &FreeSpace, goal: &Polygon) -> Result<Gcp> {
    if goal.contains(x) {
        let mut margin = IN_GOAL_MARGIN * goal.diameter();
        for _ in 0..20 {
            let grown = goal.dilate_convex(margin)?;
            if space.region_free(&Region::Polygon(grown.clone())) {
                return Ok(Gcp { polygon: grown, range: AngleRange::full() });
            }
            margin *= 0.5;
        }
        return Ok(Gcp { polygon: goal.clone(), range: headings_inside(x, goal) });
    }
    if !is_goal_visible(x, space, goal) {
        return Err(Error::DegenerateInput(format!("{x} does not see the whole goal")));
    }
    let (xl, xu) = minimum_covering_points(x, goal)?;
    let chain = goal_chain(goal, xl, xu);
    let hull = {
        let mut v = vec![x];
        v.extend(&chain);
        Polygon::new(v)?
    };
    let (yl, yu) = first_visible_vertices(x, xl, xu, space)?;
    let tl = sigma(x, yl)?;
    let tu = sigma(x, yu)?;
    let after_l = chain.get(1).copied().unwrap_or(xu);
    let before_u = chain.len().checked_sub(2).map_or(xl, |k| chain[k]);
    let pl = cut_at_line(x, yl, xl, after_l);
    let pu = cut_at_line(x, yu, xu, before_u);
    let mut candidates: Vec<Vec<Point2>> = Vec::new();
    if ccw_span(tl, tu) <= PI {
        let mut v = vec![x, pl];
        v.extend(&chain);
        v.push(pu);
        candidates.push(v);
    } else {
        let centroid_bearing = sigma(x, goal.centroid())?;
        let lower_side = {
            // x on an edge running along tl, far vertex on the upper wedge edge
            let dir = Point2::from_angle(tl + PI);
            intersect_lines(x, dir, xu, pu - xu).filter(|&(t, s)| t > EPS && (0.0..=1.0).contains(&s)).map(|(t, _)| {
                let mut v = vec![x, pl];
                v.extend(&chain);
                v.push(x + dir * t);
                v
            })
        };
        let upper_side = {
            let dir = Point2::from_angle(tu - PI);
            intersect_lines(x, dir, pl, xl - pl).filter(|&(t, s)| t > EPS && (0.0..=1.0).contains(&s)).map(|(t, _)| {
                let mut v = vec![x, x + dir * t];
                v.extend(&chain);
                v.push(pu);
                v
            })
        };
        let dl = crate::geometry::angular_distance(AngleRange::new(tl, PI).bisector(), centroid_bearing);
        let du = crate::geometry::angular_distance(AngleRange::new(tu - PI, PI).bisector(), centroid_bearing);
        let order = if dl <= du { [lower_side, upper_side] } else { [upper_side, lower_side] };
        candidates.extend(order.into_iter().flatten());
    }
    for c in candidates {
        if let Ok(poly) = Polygon::new(c) {
            if valid_gcp(&poly, x, space, goal) {
                return Ok(finish(poly, x, space));
            }
        }
    }
    Ok(finish(hull, x, space))
}

pub fn direction_range(x: Point2, space: &FreeSpace, goal: &Polygon) -> Result<AngleRange> {
    construct_gcp(x, space, goal).map(|g| g.range)
}

/// Heading toward the evasion-region witness, clamped to the admissible range.
/// Zero once the pursuer stands on the witness.
pub fn goalvis_control(pursuer: Point2, witness: Point2, range: &AngleRange) -> Point2 {
    let Ok(theta) = sigma(pursuer, witness) else {
        return Point2::ORIGIN;
    };
    Point2::from_angle(range.clamp(theta))
}
