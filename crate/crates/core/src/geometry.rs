//! Planar primitives: points, bearings, ccw angular ranges, polygons, sectors,
//! and the open-obstacle free-space predicates everything else is built on.
//!
//! Obstacles are open sets: touching an obstacle boundary is allowed, entering
//! its interior is not. Incidence tolerance is [`EPS`].

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

pub const fn pt(x: f64, y: f64) -> Point2 {
    Point2 { x, y }
}

impl Point2 {
    pub const ORIGIN: Point2 = pt(0.0, 0.0);

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    /// Clockwise quarter turn, `(y, -x)`.
    pub fn perp_cw(self) -> Self {
        Self::new(self.y, -self.x)
    }

    pub fn perp_ccw(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        wrap_angle(self.y.atan2(self.x))
    }

    /// Unit vector, or `None` for a vector shorter than `tol`.
    pub fn normalized(self, tol: f64) -> Option<Self> {
        let n = self.norm();
        (n > tol).then(|| self / n)
    }

    pub fn lerp(self, o: Self, t: f64) -> Self {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl Div<f64> for Point2 {
    type Output = Self;
    fn div(self, k: f64) -> Self {
        Self::new(self.x / k, self.y / k)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Maps an angle into `[0, 2pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Bearing of `b` seen from `a`, in `[0, 2pi)`.
pub fn sigma(a: Point2, b: Point2) -> Result<f64> {
    let d = b - a;
    if d.norm() <= EPS {
        return Err(Error::DegenerateInput(format!("bearing of coincident points {a} and {b}")));
    }
    Ok(d.angle())
}

/// Counterclockwise sweep from `from` to `to`, in `[0, 2pi)`.
pub fn ccw_span(from: f64, to: f64) -> f64 {
    wrap_angle(to - from)
}

/// Unsigned wrap-around distance between two bearings, in `[0, pi]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = ccw_span(a, b);
    d.min(TAU - d)
}

/// Counterclockwise closed range of bearings `[start, start + span]`.
/// A span of `2pi` is the full circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleRange {
    pub start: f64,
    pub span: f64,
}

impl AngleRange {
    pub fn new(start: f64, span: f64) -> Self {
        Self { start: wrap_angle(start), span: span.clamp(0.0, TAU) }
    }

    pub fn between(start: f64, end: f64) -> Self {
        Self::new(start, ccw_span(start, end))
    }

    pub fn full() -> Self {
        Self { start: 0.0, span: TAU }
    }

    pub fn is_full(&self) -> bool {
        self.span >= TAU - EPS
    }

    pub fn end(&self) -> f64 {
        wrap_angle(self.start + self.span)
    }

    pub fn bisector(&self) -> f64 {
        wrap_angle(self.start + 0.5 * self.span)
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.contains_tol(theta, EPS)
    }

    pub fn contains_tol(&self, theta: f64, tol: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let off = ccw_span(self.start, theta);
        off <= self.span + tol || off >= TAU - tol
    }

    /// `theta` itself when inside, otherwise the endpoint closest by wrap-around distance.
    pub fn clamp(&self, theta: f64) -> f64 {
        if self.contains(theta) {
            return wrap_angle(theta);
        }
        if angular_distance(theta, self.start) <= angular_distance(theta, self.end()) {
            self.start
        } else {
            self.end()
        }
    }

    /// True when `other` lies inside `self`.
    pub fn covers(&self, other: &AngleRange, tol: f64) -> bool {
        if self.is_full() {
            return true;
        }
        if other.is_full() {
            return false;
        }
        let off = ccw_span(self.start, other.start);
        let off = if off >= TAU - tol { 0.0 } else { off };
        off + other.span <= self.span + tol
    }

    /// Splits into `n` equal consecutive pieces.
    pub fn split(&self, n: usize) -> Vec<AngleRange> {
        let step = self.span / n as f64;
        (0..n).map(|k| AngleRange::new(self.start + step * k as f64, step)).collect()
    }
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    p.dist(project_onto_segment(p, a, b))
}

pub fn project_onto_segment(p: Point2, a: Point2, b: Point2) -> Point2 {
    let d = b - a;
    let l2 = d.norm_sq();
    if l2 <= 0.0 {
        return a;
    }
    let t = ((p - a).dot(d) / l2).clamp(0.0, 1.0);
    a + d * t
}

/// Simple polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    /// Drops repeated vertices and reverses clockwise input.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        let mut vs: Vec<Point2> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if !v.is_finite() {
                return Err(Error::DegenerateInput(format!("non-finite vertex {v}")));
            }
            if vs.last().is_none_or(|l: &Point2| l.dist(v) > EPS) {
                vs.push(v);
            }
        }
        while vs.len() > 1 && vs[0].dist(*vs.last().unwrap()) <= EPS {
            vs.pop();
        }
        if vs.len() < 3 {
            return Err(Error::DegenerateInput("polygon needs at least 3 distinct vertices".into()));
        }
        let area = signed_area(&vs);
        if area.abs() <= EPS {
            return Err(Error::DegenerateInput("polygon has zero area".into()));
        }
        if area < 0.0 {
            vs.reverse();
        }
        let poly = Self { vertices: vs };
        if !poly.is_simple() {
            return Err(Error::DegenerateInput("polygon edges intersect".into()));
        }
        Ok(poly)
    }

    pub fn rect(min: Point2, max: Point2) -> Result<Self> {
        Self::new(vec![min, pt(max.x, min.y), max, pt(min.x, max.y)])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[i % self.vertices.len()]
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point2 {
        let mut c = Point2::ORIGIN;
        let mut a = 0.0;
        for (p, q) in self.edges() {
            let w = p.cross(q);
            a += w;
            c += (p + q) * w;
        }
        c / (3.0 * a)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, &p) in self.vertices.iter().enumerate() {
            for &q in &self.vertices[i + 1..] {
                d = d.max(p.dist(q));
            }
        }
        d
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        let mut lo = self.vertices[0];
        let mut hi = lo;
        for v in &self.vertices {
            lo = pt(lo.x.min(v.x), lo.y.min(v.y));
            hi = pt(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    /// Convex with collinear vertices tolerated.
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        let scale = self.diameter().max(1.0);
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) >= -EPS * scale * scale
        })
    }

    fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let (a, b) = (self.vertex(i), self.vertex(i + 1));
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (c, d) = (self.vertex(j), self.vertex(j + 1));
                if adjacent {
                    let shared = if j == i + 1 { b } else { a };
                    let (other_a, other_c) = if j == i + 1 { (a, d) } else { (b, c) };
                    let u = (other_a - shared).normalized(0.0);
                    let w = (other_c - shared).normalized(0.0);
                    if let (Some(u), Some(w)) = (u, w) {
                        if u.cross(w).abs() <= EPS && u.dot(w) > 0.0 {
                            return false;
                        }
                    }
                } else if segments_touch(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.edges().map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    fn winding_inside(&self, p: Point2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn on_boundary(&self, p: Point2) -> bool {
        self.boundary_distance(p) <= EPS
    }

    /// Closed containment: boundary points count.
    pub fn contains(&self, p: Point2) -> bool {
        self.on_boundary(p) || self.winding_inside(p)
    }

    /// Open containment: strictly inside, farther than [`EPS`] from the boundary.
    pub fn contains_open(&self, p: Point2) -> bool {
        !self.on_boundary(p) && self.winding_inside(p)
    }

    /// Nearest point of a convex polygon.
    pub fn project(&self, p: Point2) -> Point2 {
        if self.contains(p) {
            return p;
        }
        let mut best = self.vertices[0];
        let mut bd = f64::INFINITY;
        for (a, b) in self.edges() {
            let q = project_onto_segment(p, a, b);
            let d = q.dist(p);
            if d < bd {
                bd = d;
                best = q;
            }
        }
        best
    }

    /// Euclidean distance to the closed polygon, zero inside.
    pub fn distance(&self, p: Point2) -> f64 {
        if self.contains(p) {
            0.0
        } else {
            self.boundary_distance(p)
        }
    }

    /// Negative inside (depth), positive outside.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        let d = self.boundary_distance(p);
        if self.winding_inside(p) {
            -d
        } else {
            d
        }
    }

    /// Smallest slack over the edge half-planes of a convex polygon; positive strictly inside.
    pub fn halfplane_slack(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| {
                let e = b - a;
                e.cross(p - a) / e.norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// A point strictly inside: centroid of an ear.
    pub fn interior_point(&self) -> Point2 {
        let n = self.vertices.len();
        if self.is_convex() {
            return self.centroid();
        }
        for i in 0..n {
            let a = self.vertex(i + n - 1);
            let b = self.vertex(i);
            let c = self.vertex(i + 1);
            if (b - a).cross(c - b) <= EPS {
                continue;
            }
            let ear_ok = (0..n).filter(|&j| j != i && j != (i + 1) % n && j != (i + n - 1) % n).all(|j| {
                let v = self.vertices[j];
                !point_in_triangle(v, a, b, c)
            });
            if ear_ok {
                return (a + b + c) / 3.0;
            }
        }
        self.centroid()
    }

    /// Outward offset of a convex polygon by `d` (mitred corners, so it contains the true dilation).
    pub fn dilate_convex(&self, d: f64) -> Result<Polygon> {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let prev = self.vertex(i + n - 1);
            let cur = self.vertex(i);
            let next = self.vertex(i + 1);
            let n1 = (cur - prev).perp_cw().normalized(0.0).unwrap_or_default();
            let n2 = (next - cur).perp_cw().normalized(0.0).unwrap_or_default();
            let bis = n1 + n2;
            let c = 1.0 + n1.dot(n2);
            let off = if c > 1e-12 { bis * (d / c) } else { n1 * d };
            out.push(cur + off);
        }
        Polygon::new(out)
    }

    pub fn translate(&self, v: Point2) -> Polygon {
        Polygon { vertices: self.vertices.iter().map(|&p| p + v).collect() }
    }
}

pub fn signed_area(vs: &[Point2]) -> f64 {
    let n = vs.len();
    0.5 * (0..n).map(|i| vs[i].cross(vs[(i + 1) % n])).sum::<f64>()
}

fn point_in_triangle(p: Point2, a: Point2, b: Point2, c: Point2) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    d1 >= -EPS && d2 >= -EPS && d3 >= -EPS
}

/// Closed segments share at least one point (within [`EPS`]).
pub fn segments_touch(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den.abs() > EPS * r.norm().max(1.0) * s.norm().max(1.0) {
        let t = (c - a).cross(s) / den;
        let u = (c - a).cross(r) / den;
        let tt = EPS / r.norm().max(EPS);
        let tu = EPS / s.norm().max(EPS);
        if (-tt..=1.0 + tt).contains(&t) && (-tu..=1.0 + tu).contains(&u) {
            return true;
        }
    }
    point_segment_distance(a, c, d) <= EPS
        || point_segment_distance(b, c, d) <= EPS
        || point_segment_distance(c, a, b) <= EPS
        || point_segment_distance(d, a, b) <= EPS
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point2,
    pub radius: f64,
}

impl Disk {
    pub fn contains(&self, p: Point2) -> bool {
        p.dist(self.center) <= self.radius + EPS
    }

    pub fn project(&self, p: Point2) -> Point2 {
        let d = p - self.center;
        let n = d.norm();
        if n <= self.radius {
            p
        } else {
            self.center + d * (self.radius / n)
        }
    }
}

/// Circular sector: the apex plus every point within `radius` whose bearing lies in `arc`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircularSector {
    pub apex: Point2,
    pub radius: f64,
    pub arc: AngleRange,
}

impl CircularSector {
    pub fn new(apex: Point2, radius: f64, arc: AngleRange) -> Result<Self> {
        if arc.span > PI + 1e-9 {
            return Err(Error::NonConvexSector(arc.span));
        }
        Ok(Self { apex, radius, arc })
    }

    pub fn arc_point(&self, theta: f64) -> Point2 {
        self.apex + Point2::from_angle(theta) * self.radius
    }

    pub fn arc_endpoints(&self) -> (Point2, Point2) {
        (self.arc_point(self.arc.start), self.arc_point(self.arc.end()))
    }

    pub fn contains(&self, p: Point2) -> bool {
        let d = p - self.apex;
        let n = d.norm();
        if n <= EPS {
            return true;
        }
        if n > self.radius + EPS {
            return false;
        }
        self.arc.contains_tol(d.angle(), EPS / n.max(EPS)) || self.distance_to_edges(p) <= EPS
    }

    fn distance_to_edges(&self, p: Point2) -> f64 {
        let (a, b) = self.arc_endpoints();
        point_segment_distance(p, self.apex, a).min(point_segment_distance(p, self.apex, b))
    }

    /// Nearest point of the (convex) sector.
    pub fn project(&self, p: Point2) -> Point2 {
        if self.contains(p) {
            return p;
        }
        let (a, b) = self.arc_endpoints();
        let mut best = project_onto_segment(p, self.apex, a);
        let q = project_onto_segment(p, self.apex, b);
        if q.dist(p) < best.dist(p) {
            best = q;
        }
        let d = p - self.apex;
        if d.norm() > EPS && self.arc.contains(d.angle()) {
            let q = self.arc_point(d.angle());
            if q.dist(p) < best.dist(p) {
                best = q;
            }
        }
        best
    }

    pub fn distance(&self, p: Point2) -> f64 {
        p.dist(self.project(p))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Polygon(Polygon),
    Disk(Disk),
    Sector(CircularSector),
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Seg(Point2, Point2),
    Arc { center: Point2, radius: f64, range: AngleRange },
}

impl Piece {
    fn at(&self, t: f64) -> Point2 {
        match *self {
            Piece::Seg(a, b) => a.lerp(b, t),
            Piece::Arc { center, radius, range } => center + Point2::from_angle(range.start + t * range.span) * radius,
        }
    }

    fn is_point(&self) -> bool {
        match *self {
            Piece::Seg(a, b) => a.dist(b) <= EPS,
            Piece::Arc { radius, range, .. } => radius * range.span <= EPS,
        }
    }

    /// Parameters in `[0, 1]` where the piece meets the polygon boundary, plus both ends.
    fn split_params(&self, poly: &Polygon) -> Vec<f64> {
        let mut ts = vec![0.0, 1.0];
        for (q0, q1) in poly.edges() {
            match *self {
                Piece::Seg(a, b) => seg_edge_params(a, b, q0, q1, &mut ts),
                Piece::Arc { center, radius, range } => arc_edge_params(center, radius, range, q0, q1, &mut ts),
            }
        }
        ts.retain(|t| t.is_finite());
        for t in ts.iter_mut() {
            *t = t.clamp(0.0, 1.0);
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        ts
    }

    fn any_sample(&self, poly: &Polygon, bad: impl Fn(Point2) -> bool) -> bool {
        if self.is_point() {
            return bad(self.at(0.0));
        }
        let ts = self.split_params(poly);
        if bad(self.at(0.0)) || bad(self.at(1.0)) {
            return true;
        }
        ts.windows(2).any(|w| w[1] - w[0] > 0.0 && bad(self.at(0.5 * (w[0] + w[1]))))
    }

    fn meets_open_interior(&self, poly: &Polygon) -> bool {
        self.any_sample(poly, |p| poly.contains_open(p))
    }

    fn leaves_closed(&self, poly: &Polygon) -> bool {
        self.any_sample(poly, |p| !poly.contains(p))
    }
}

fn seg_edge_params(a: Point2, b: Point2, q0: Point2, q1: Point2, ts: &mut Vec<f64>) {
    let r = b - a;
    let s = q1 - q0;
    let rl2 = r.norm_sq();
    if rl2 <= 0.0 {
        return;
    }
    let den = r.cross(s);
    if den.abs() > 1e-14 * rl2.sqrt() * s.norm() {
        let t = (q0 - a).cross(s) / den;
        let u = (q0 - a).cross(r) / den;
        if (-1e-9..=1.0 + 1e-9).contains(&u) {
            ts.push(t);
        }
    }
    for q in [q0, q1] {
        let t = (q - a).dot(r) / rl2;
        if point_segment_distance(q, a, b) <= 10.0 * EPS {
            ts.push(t);
        }
    }
}

fn arc_edge_params(c: Point2, radius: f64, range: AngleRange, q0: Point2, q1: Point2, ts: &mut Vec<f64>) {
    if range.span <= 0.0 {
        return;
    }
    let push_angle = |theta: f64, ts: &mut Vec<f64>| {
        let off = ccw_span(range.start, theta);
        if off <= range.span + 1e-12 {
            ts.push(off / range.span);
        } else if range.is_full() || TAU - off <= 1e-12 {
            ts.push(0.0);
        }
    };
    let d = q1 - q0;
    let f = q0 - c;
    let a = d.norm_sq();
    if a > 0.0 {
        let b = 2.0 * f.dot(d);
        let cc = f.norm_sq() - radius * radius;
        let disc = b * b - 4.0 * a * cc;
        let roots: Vec<f64> = if disc < 0.0 {
            let s = -b / (2.0 * a);
            let p = q0 + d * s;
            if (p.dist(c) - radius).abs() <= 10.0 * EPS {
                vec![s]
            } else {
                vec![]
            }
        } else {
            let sq = disc.sqrt();
            vec![(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)]
        };
        for s in roots {
            if (-1e-9..=1.0 + 1e-9).contains(&s) {
                let p = q0 + d * s.clamp(0.0, 1.0);
                if let Ok(th) = sigma(c, p) {
                    push_angle(th, ts);
                }
            }
        }
    }
    for q in [q0, q1] {
        if (q.dist(c) - radius).abs() <= 10.0 * EPS {
            if let Ok(th) = sigma(c, q) {
                push_angle(th, ts);
            }
        }
    }
}

impl Region {
    fn pieces(&self) -> Vec<Piece> {
        match self {
            Region::Polygon(p) => p.edges().map(|(a, b)| Piece::Seg(a, b)).collect(),
            Region::Disk(d) => vec![Piece::Arc { center: d.center, radius: d.radius, range: AngleRange::full() }],
            Region::Sector(s) => {
                let (a, b) = s.arc_endpoints();
                vec![
                    Piece::Seg(s.apex, a),
                    Piece::Arc { center: s.apex, radius: s.radius, range: s.arc },
                    Piece::Seg(b, s.apex),
                ]
            }
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        match self {
            Region::Polygon(poly) => poly.contains(p),
            Region::Disk(d) => d.contains(p),
            Region::Sector(s) => s.contains(p),
        }
    }

    fn interior_point(&self) -> Point2 {
        match self {
            Region::Polygon(p) => p.interior_point(),
            Region::Disk(d) => d.center,
            Region::Sector(s) => s.apex + Point2::from_angle(s.arc.bisector()) * (0.5 * s.radius),
        }
    }
}

pub fn triangle(a: Point2, b: Point2, c: Point2) -> Option<Region> {
    Polygon::new(vec![a, b, c]).ok().map(Region::Polygon)
}

/// Closed segment avoids the open interior of every obstacle.
pub fn segment_obstacle_free(a: Point2, b: Point2, obstacles: &[Polygon]) -> bool {
    let piece = Piece::Seg(a, b);
    obstacles.iter().all(|o| !bbox_overlap_seg(a, b, o) || !piece.meets_open_interior(o))
}

fn bbox_overlap_seg(a: Point2, b: Point2, o: &Polygon) -> bool {
    let (lo, hi) = o.bbox();
    a.x.max(b.x) >= lo.x - EPS && a.x.min(b.x) <= hi.x + EPS && a.y.max(b.y) >= lo.y - EPS && a.y.min(b.y) <= hi.y + EPS
}

/// Closed segment lies within the closed polygon.
pub fn segment_in_polygon(a: Point2, b: Point2, poly: &Polygon) -> bool {
    !Piece::Seg(a, b).leaves_closed(poly)
}

/// Closed region avoids the open interior of every obstacle.
pub fn region_obstacle_free(region: &Region, obstacles: &[Polygon]) -> bool {
    let pieces = region.pieces();
    let inner = region.interior_point();
    obstacles.iter().all(|o| {
        !pieces.iter().any(|pc| pc.meets_open_interior(o)) && !region.contains(o.interior_point()) && !o.contains_open(inner)
    })
}

/// Closed region lies within the closed simple polygon.
pub fn region_in_polygon(region: &Region, poly: &Polygon) -> bool {
    region.pieces().iter().all(|pc| !pc.leaves_closed(poly))
}

/// Closed arena minus open obstacles.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeSpace {
    pub arena: Polygon,
    pub obstacles: Vec<Polygon>,
    arena_convex: bool,
}

impl FreeSpace {
    pub fn new(arena: Polygon, obstacles: Vec<Polygon>) -> Self {
        let arena_convex = arena.is_convex();
        Self { arena, obstacles, arena_convex }
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.arena.contains(p) && self.obstacles.iter().all(|o| !o.contains_open(p))
    }

    pub fn segment_free(&self, a: Point2, b: Point2) -> bool {
        let inside = if self.arena_convex {
            self.arena.contains(a) && self.arena.contains(b)
        } else {
            segment_in_polygon(a, b, &self.arena)
        };
        inside && segment_obstacle_free(a, b, &self.obstacles)
    }

    pub fn region_free(&self, region: &Region) -> bool {
        region_in_polygon(region, &self.arena) && region_obstacle_free(region, &self.obstacles)
    }

    pub fn diameter(&self) -> f64 {
        self.arena.diameter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_square_obstacle() -> Polygon {
        Polygon::rect(pt(2.0, 2.0), pt(3.0, 3.0)).unwrap()
    }

    #[test]
    fn bearing_of_goal_corner() {
        let s = sigma(pt(5.0, 9.0), pt(4.0, 6.0)).unwrap();
        let expected = (-3.0f64).atan2(-1.0) + TAU;
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 4.3906).abs() < 1e-4);
    }

    #[test]
    fn bearing_of_coincident_points_fails() {
        assert!(matches!(sigma(pt(1.0, 1.0), pt(1.0, 1.0)), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = Polygon::new(vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 1.0), pt(1.0, 0.0)]).unwrap();
        assert!(p.area() > 0.0);
    }

    #[test]
    fn bow_tie_rejected() {
        let p = Polygon::new(vec![pt(0.0, 0.0), pt(1.0, 1.0), pt(1.0, 0.0), pt(0.0, 1.0)]);
        assert!(p.is_err());
    }

    #[test]
    fn edge_grazing_segment_is_free() {
        let o = [unit_square_obstacle()];
        assert!(segment_obstacle_free(pt(1.0, 2.0), pt(4.0, 2.0), &o));
        assert!(segment_obstacle_free(pt(2.0, 1.0), pt(2.0, 4.0), &o));
        assert!(segment_obstacle_free(pt(1.0, 1.0), pt(2.0, 2.0), &o));
        assert!(!segment_obstacle_free(pt(1.0, 2.5), pt(4.0, 2.5), &o));
        assert!(!segment_obstacle_free(pt(2.0, 2.0), pt(3.0, 3.0), &o));
        assert!(!segment_obstacle_free(pt(2.5, 2.5), pt(2.6, 2.6), &o));
    }

    #[test]
    fn disk_tangent_to_obstacle_is_free() {
        let o = [unit_square_obstacle()];
        let tangent = Region::Disk(Disk { center: pt(1.0, 2.5), radius: 1.0 });
        let crossing = Region::Disk(Disk { center: pt(1.0, 2.5), radius: 1.01 });
        let around = Region::Disk(Disk { center: pt(2.5, 2.5), radius: 5.0 });
        let inside = Region::Disk(Disk { center: pt(2.5, 2.5), radius: 0.1 });
        assert!(region_obstacle_free(&tangent, &o));
        assert!(!region_obstacle_free(&crossing, &o));
        assert!(!region_obstacle_free(&around, &o));
        assert!(!region_obstacle_free(&inside, &o));
    }

    #[test]
    fn sector_containment_and_projection() {
        let s = CircularSector::new(pt(0.0, 0.0), 1.0, AngleRange::new(-PI / 2.0, PI)).unwrap();
        assert!(s.contains(pt(0.5, 0.5)));
        assert!(!s.contains(pt(-0.5, 0.0)));
        assert!(s.project(pt(-1.0, 0.0)).dist(pt(0.0, 0.0)) < 1e-12);
        assert!(s.project(pt(2.0, 0.0)).dist(pt(1.0, 0.0)) < 1e-12);
        assert!(s.project(pt(-1.0, 2.0)).dist(pt(0.0, 1.0)) < 1e-12);
        assert!(CircularSector::new(pt(0.0, 0.0), 1.0, AngleRange::new(0.0, 4.0)).is_err());
    }

    #[test]
    fn angle_range_clamp_uses_wraparound_distance() {
        let r = AngleRange::between(0.1, 1.0);
        assert_eq!(r.clamp(0.5), 0.5);
        assert_eq!(r.clamp(TAU - 0.2), 0.1);
        assert_eq!(r.clamp(2.0), 1.0);
        assert!(AngleRange::between(TAU - 0.1, 0.1).contains(0.0));
    }

    fn dense_segment_hits(a: Point2, b: Point2, o: &Polygon) -> bool {
        (0..=4000).any(|k| o.contains_open(a.lerp(b, k as f64 / 4000.0)))
    }

    proptest! {
        #[test]
        fn projection_onto_convex_polygon_is_nearest(x in -5.0..15.0f64, y in -5.0..15.0f64) {
            let g = Polygon::rect(pt(4.0, 4.0), pt(6.0, 6.0)).unwrap();
            let p = pt(x, y);
            let q = g.project(p);
            prop_assert!(g.contains(q));
            for k in 0..200 {
                let t = k as f64 / 200.0;
                for (a, b) in g.edges() {
                    prop_assert!(p.dist(a.lerp(b, t)) >= p.dist(q) - 1e-9);
                }
            }
        }

        #[test]
        fn segment_test_agrees_with_dense_sampling(ax in 0.0..5.0f64, ay in 0.0..5.0f64, bx in 0.0..5.0f64, by in 0.0..5.0f64) {
            let o = unit_square_obstacle();
            let a = pt(ax, ay);
            let b = pt(bx, by);
            let free = segment_obstacle_free(a, b, std::slice::from_ref(&o));
            if dense_segment_hits(a, b, &o) {
                prop_assert!(!free);
            }
        }

        #[test]
        fn bearing_is_in_range(ax in -10.0..10.0f64, ay in -10.0..10.0f64, bx in -10.0..10.0f64, by in -10.0..10.0f64) {
            if let Ok(s) = sigma(pt(ax, ay), pt(bx, by)) {
                prop_assert!((0.0..TAU).contains(&s));
            }
        }
    }
}
