//! Euclidean shortest paths among polygonal obstacles via a visibility graph,
//! plus the wavefront and reach-sector decompositions of ESP balls.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ccw_span, sigma, AngleRange, CircularSector, FreeSpace, Point2, EPS};

pub const WAVE_EPS: f64 = 1e-6;
const SCAN_DIRECTIONS: usize = 720;
const REFINE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EspPath {
    pub waypoints: Vec<Point2>,
    pub length: f64,
}

impl EspPath {
    fn from_points(waypoints: Vec<Point2>) -> Self {
        let length = waypoints.windows(2).map(|w| w[0].dist(w[1])).sum();
        Self { waypoints, length }
    }

    /// Point reached after travelling `s` along the path (clamped to the ends).
    pub fn point_at(&self, s: f64) -> Point2 {
        let mut left = s.max(0.0);
        for w in self.waypoints.windows(2) {
            let l = w[0].dist(w[1]);
            if left <= l {
                return if l > 0.0 { w[0].lerp(w[1], left / l) } else { w[1] };
            }
            left -= l;
        }
        *self.waypoints.last().unwrap()
    }

    /// First direction of travel, if the path has positive length.
    pub fn first_heading(&self) -> Option<Point2> {
        self.waypoints.windows(2).find_map(|w| (w[1] - w[0]).normalized(EPS))
    }
}

#[derive(Clone, Debug)]
struct Node {
    pos: Point2,
    prev: Point2,
    next: Point2,
}

/// Visibility graph over the obstacle and arena vertices where shortest paths can bend.
#[derive(Clone, Debug)]
pub struct EspGraph {
    space: FreeSpace,
    nodes: Vec<Node>,
    adj: Vec<Vec<(usize, f64)>>,
}

/// Ordering key for ties: length, then hop count, then predecessor index.
#[derive(Clone, Copy, Debug)]
struct Key {
    len: f64,
    hops: u32,
    via: usize,
}

impl Key {
    fn better(&self, o: &Key) -> bool {
        let tol = 1e-12 * self.len.abs().max(o.len.abs()).max(1.0);
        if (self.len - o.len).abs() > tol {
            return self.len < o.len;
        }
        (self.hops, self.via) < (o.hops, o.via)
    }
}

impl EspGraph {
    pub fn new(space: FreeSpace) -> Self {
        let mut nodes = Vec::new();
        for o in &space.obstacles {
            let n = o.len();
            for i in 0..n {
                let (prev, cur, next) = (o.vertex(i + n - 1), o.vertex(i), o.vertex(i + 1));
                // reflex obstacle corners never carry a shortest path
                if (cur - prev).cross(next - cur) > 0.0 && space.contains(cur) {
                    nodes.push(Node { pos: cur, prev, next });
                }
            }
        }
        let a = &space.arena;
        let n = a.len();
        for i in 0..n {
            let (prev, cur, next) = (a.vertex(i + n - 1), a.vertex(i), a.vertex(i + 1));
            if (cur - prev).cross(next - cur) < 0.0 && space.contains(cur) {
                nodes.push(Node { pos: cur, prev, next });
            }
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                let (p, q) = (nodes[i].pos, nodes[j].pos);
                if space.segment_free(p, q) {
                    let d = p.dist(q);
                    adj[i].push((j, d));
                    adj[j].push((i, d));
                }
            }
        }
        Self { space, nodes, adj }
    }

    pub fn space(&self) -> &FreeSpace {
        &self.space
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, i: usize) -> Point2 {
        self.nodes[i].pos
    }

    fn check_free(&self, p: Point2) -> Result<()> {
        if p.is_finite() && self.space.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideFreeSpace(p))
        }
    }

    /// Shortest-path distances from `source` to every graph node.
    pub fn field(&self, source: Point2) -> Result<DistanceField<'_>> {
        self.check_free(source)?;
        let n = self.nodes.len();
        let mut key: Vec<Option<Key>> = vec![None; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut done = vec![false; n];
        for (i, node) in self.nodes.iter().enumerate() {
            if self.space.segment_free(source, node.pos) {
                key[i] = Some(Key { len: source.dist(node.pos), hops: 1, via: 0 });
            }
        }
        loop {
            let mut best: Option<usize> = None;
            for i in 0..n {
                if done[i] {
                    continue;
                }
                if let Some(k) = key[i] {
                    if best.is_none_or(|b| k.better(&key[b].unwrap())) {
                        best = Some(i);
                    }
                }
            }
            let Some(u) = best else { break };
            done[u] = true;
            let ku = key[u].unwrap();
            for &(v, w) in &self.adj[u] {
                if done[v] {
                    continue;
                }
                let cand = Key { len: ku.len + w, hops: ku.hops + 1, via: u + 1 };
                if key[v].is_none_or(|kv| cand.better(&kv)) {
                    key[v] = Some(cand);
                    pred[v] = Some(u);
                }
            }
        }
        Ok(DistanceField { graph: self, source, key, pred })
    }

    pub fn esp(&self, a: Point2, b: Point2) -> Result<EspPath> {
        self.check_free(b)?;
        self.field(a)?.path_to(b).ok_or(Error::Unreachable { from: a, to: b })
    }

    pub fn distance(&self, a: Point2, b: Point2) -> Result<f64> {
        self.esp(a, b).map(|p| p.length)
    }
}

/// Single-source shortest-path tree over the visibility graph.
#[derive(Clone, Debug)]
pub struct DistanceField<'g> {
    graph: &'g EspGraph,
    source: Point2,
    key: Vec<Option<Key>>,
    pred: Vec<Option<usize>>,
}

/// A point from which distances are continued: the source or a reached graph node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Center {
    pub pos: Point2,
    pub node: Option<usize>,
    pub dist: f64,
}

impl<'g> DistanceField<'g> {
    pub fn source(&self) -> Point2 {
        self.source
    }

    pub fn graph(&self) -> &'g EspGraph {
        self.graph
    }

    pub fn node_distance(&self, i: usize) -> f64 {
        self.key[i].map_or(f64::INFINITY, |k| k.len)
    }

    pub fn centers(&self) -> Vec<Center> {
        let mut out = vec![Center { pos: self.source, node: None, dist: 0.0 }];
        for (i, k) in self.key.iter().enumerate() {
            if let Some(k) = k {
                out.push(Center { pos: self.graph.nodes[i].pos, node: Some(i), dist: k.len });
            }
        }
        out
    }

    fn best_last_leg(&self, q: Point2) -> Option<(Key, Option<usize>)> {
        let space = &self.graph.space;
        let mut best: Option<(Key, Option<usize>)> = None;
        if space.segment_free(self.source, q) {
            best = Some((Key { len: self.source.dist(q), hops: 1, via: 0 }, None));
        }
        for (i, k) in self.key.iter().enumerate() {
            let Some(k) = k else { continue };
            let pos = self.graph.nodes[i].pos;
            let cand = Key { len: k.len + pos.dist(q), hops: k.hops + 1, via: i + 1 };
            if best.as_ref().is_some_and(|(b, _)| !cand.better(b)) {
                continue;
            }
            if space.segment_free(pos, q) {
                best = Some((cand, Some(i)));
            }
        }
        best
    }

    /// ESP distance from the source to `q`; infinite when unreachable or outside free space.
    pub fn distance_to(&self, q: Point2) -> f64 {
        if !self.graph.space.contains(q) {
            return f64::INFINITY;
        }
        self.best_last_leg(q).map_or(f64::INFINITY, |(k, _)| k.len)
    }

    pub fn path_to(&self, q: Point2) -> Option<EspPath> {
        if !self.graph.space.contains(q) {
            return None;
        }
        let (_, last) = self.best_last_leg(q)?;
        let mut pts = vec![q];
        let mut cur = last;
        while let Some(i) = cur {
            pts.push(self.graph.nodes[i].pos);
            cur = self.pred[i];
        }
        pts.push(self.source);
        pts.reverse();
        pts.dedup_by(|a, b| a.dist(*b) <= EPS);
        if pts.len() == 1 {
            pts.push(q);
        }
        Some(EspPath::from_points(pts))
    }
}

/// One circular arc of the wavefront together with its center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wavelet {
    pub center: Point2,
    pub radius: f64,
    pub arc: AngleRange,
}

impl Wavelet {
    pub fn sector(&self) -> Result<CircularSector> {
        CircularSector::new(self.center, self.radius, self.arc)
    }

    pub fn point(&self, theta: f64) -> Point2 {
        self.center + Point2::from_angle(theta) * self.radius
    }
}

/// Groups the owned scan directions into arcs with refined boundaries.
fn owned_arcs(owned: impl Fn(f64) -> bool, keep_owned_side: bool) -> Vec<AngleRange> {
    let step = std::f64::consts::TAU / SCAN_DIRECTIONS as f64;
    let flags: Vec<bool> = (0..SCAN_DIRECTIONS).map(|k| owned(step * k as f64)).collect();
    if flags.iter().all(|&f| f) {
        return vec![AngleRange::full()];
    }
    if flags.iter().all(|&f| !f) {
        return Vec::new();
    }
    let refine = |mut inside: f64, mut outside: f64| -> f64 {
        while (outside - inside).abs() > REFINE_TOL {
            let mid = 0.5 * (inside + outside);
            if owned(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        if keep_owned_side {
            inside
        } else {
            outside
        }
    };
    let first_off = flags.iter().position(|&f| !f).unwrap();
    let mut arcs = Vec::new();
    let mut k = 0;
    while k < SCAN_DIRECTIONS {
        let idx = (first_off + k) % SCAN_DIRECTIONS;
        if !flags[idx] {
            k += 1;
            continue;
        }
        let run_start = first_off + k;
        let mut run_end = run_start;
        while flags[(run_end + 1) % SCAN_DIRECTIONS] && run_end + 1 < first_off + SCAN_DIRECTIONS {
            run_end += 1;
        }
        let a = refine(step * run_start as f64, step * (run_start as f64 - 1.0));
        let b = refine(step * run_end as f64, step * (run_end as f64 + 1.0));
        arcs.push(AngleRange::new(a, (b - a).max(0.0)));
        k = run_end - first_off + 1;
    }
    arcs
}

fn split_convex(arc: AngleRange) -> Vec<AngleRange> {
    if arc.span > PI {
        arc.split((arc.span / PI).ceil() as usize)
    } else {
        vec![arc]
    }
}

/// Arcs of points at ESP distance exactly `ell` from the source, each owned by the
/// center it is visible from; arcs wider than pi are split evenly.
pub fn wavefront(graph: &EspGraph, source: Point2, ell: f64) -> Result<Vec<Wavelet>> {
    if !(ell.is_finite() && ell > 0.0) {
        return Err(Error::DegenerateInput(format!("wavefront distance {ell}")));
    }
    let field = graph.field(source)?;
    let space = graph.space();
    let mut out = Vec::new();
    for c in field.centers() {
        let radius = ell - c.dist;
        if radius <= 1e-12 {
            continue;
        }
        let owned = |theta: f64| {
            let p = c.pos + Point2::from_angle(theta) * radius;
            space.contains(p) && space.segment_free(c.pos, p) && field.distance_to(p) >= ell - WAVE_EPS
        };
        for arc in owned_arcs(owned, true) {
            for piece in split_convex(arc) {
                out.push(Wavelet { center: c.pos, radius, arc: piece });
            }
        }
    }
    Ok(out)
}

/// Convex sectors whose union covers every point within ESP distance `ell` of the
/// source: one fan per center, spanning the directions in which the center is the
/// last bend of a shortest path.
pub fn reach_sectors(graph: &EspGraph, source: Point2, ell: f64) -> Result<Vec<CircularSector>> {
    if !(ell.is_finite() && ell >= 0.0) {
        return Err(Error::DegenerateInput(format!("reach distance {ell}")));
    }
    let field = graph.field(source)?;
    let space = graph.space();
    let scale = space.diameter().max(1.0);
    let t0 = 1e-6 * scale;
    let tie = 1e-9 * scale;
    let mut out = Vec::new();
    if ell > 0.0 {
        for arc in AngleRange::full().split(2) {
            out.push(CircularSector::new(source, ell, arc)?);
        }
    }
    let centers = field.centers();
    for c in &centers {
        let Some(i) = c.node else { continue };
        let radius = ell - c.dist;
        if radius <= 0.0 {
            continue;
        }
        let node = &graph.nodes[i];
        let preds: Vec<Point2> = centers
            .iter()
            .filter(|w| w.node != Some(i))
            .filter(|w| (w.dist + w.pos.dist(c.pos) - c.dist).abs() <= tie && space.segment_free(w.pos, c.pos))
            .map(|w| w.pos)
            .collect();
        let mut cuts: Vec<f64> = Vec::new();
        cuts.extend(sigma(c.pos, node.prev).ok());
        cuts.extend(sigma(c.pos, node.next).ok());
        cuts.extend(preds.iter().filter_map(|w| sigma(*w, c.pos).ok()));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        let owned = |theta: f64| {
            let p = c.pos + Point2::from_angle(theta) * t0;
            space.contains(p) && space.segment_free(c.pos, p) && preds.iter().all(|w| !space.segment_free(*w, p))
        };
        let m = cuts.len();
        let mut pieces: Vec<AngleRange> = Vec::new();
        for k in 0..m {
            let a = cuts[k];
            let b = if k + 1 < m { cuts[k + 1] } else { cuts[0] };
            let span = if m == 1 { std::f64::consts::TAU } else { ccw_span(a, b) };
            if span <= 0.0 || !owned(a + 0.5 * span) {
                continue;
            }
            pieces.push(AngleRange::new(a, span));
        }
        for arc in merge_adjacent(pieces) {
            for piece in split_convex(arc) {
                out.push(CircularSector::new(c.pos, radius, piece)?);
            }
        }
    }
    Ok(out)
}

fn merge_adjacent(mut pieces: Vec<AngleRange>) -> Vec<AngleRange> {
    if pieces.len() < 2 {
        return pieces;
    }
    let mut merged: Vec<AngleRange> = Vec::new();
    for p in pieces.drain(..) {
        if let Some(last) = merged.last_mut() {
            if (last.end() - p.start).abs() <= 1e-12 || ccw_span(last.end(), p.start) <= 1e-12 {
                *last = AngleRange::new(last.start, last.span + p.span);
                continue;
            }
        }
        merged.push(p);
    }
    if merged.len() > 1 {
        let first = merged[0];
        let last = *merged.last().unwrap();
        if ccw_span(last.end(), first.start) <= 1e-12 {
            merged[0] = AngleRange::new(last.start, last.span + first.span);
            merged.pop();
        }
    }
    merged
}
