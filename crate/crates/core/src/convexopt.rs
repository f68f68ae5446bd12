//! Evasion regions `{x : |x - P| - alpha |x - E| >= r}`, their projections, and
//! signed distances between convex sets.
//!
//! Every evasion region is star-shaped about its evader with a closed-form radial
//! boundary, which gives a global boundary search that warm-starts the
//! alternating-projection polish.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CircularSector, Point2, Polygon, EPS};

pub const FEAS_EPS: f64 = 1e-7;
pub const STEP_TOL: f64 = 1e-9;
pub const MAX_ITERS: usize = 10_000;
const BOUNDARY_SAMPLES: usize = 720;

/// Points the evader reaches strictly before the pursuer can capture it there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FConstraint {
    pub pursuer: Point2,
    pub evader: Point2,
    pub alpha: f64,
    pub capture_radius: f64,
}

impl FConstraint {
    pub fn new(pursuer: Point2, evader: Point2, alpha: f64, capture_radius: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::DegenerateInput(format!("speed ratio {alpha} must exceed 1")));
        }
        if !(capture_radius >= 0.0) {
            return Err(Error::DegenerateInput(format!("capture radius {capture_radius}")));
        }
        Ok(Self { pursuer, evader, alpha, capture_radius })
    }

    pub fn value(&self, x: Point2) -> f64 {
        x.dist(self.pursuer) - self.alpha * x.dist(self.evader) - self.capture_radius
    }

    pub fn gradient(&self, x: Point2) -> Point2 {
        let a = (x - self.pursuer).normalized(0.0).unwrap_or_default();
        let b = (x - self.evader).normalized(0.0).unwrap_or_default();
        a - b * self.alpha
    }

    /// The evader already sits within capture range, so no point qualifies.
    pub fn is_empty(&self) -> bool {
        self.evader.dist(self.pursuer) <= self.capture_radius
    }

    /// Distance from the evader to the boundary along unit direction `u`.
    pub fn radial(&self, u: Point2) -> f64 {
        let w = self.evader - self.pursuer;
        let a = self.alpha * self.alpha - 1.0;
        let b = 2.0 * (self.alpha * self.capture_radius - w.dot(u));
        let c = self.capture_radius * self.capture_radius - w.norm_sq();
        if c >= 0.0 {
            return 0.0;
        }
        let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
        if b >= 0.0 {
            -2.0 * c / (b + disc)
        } else {
            (-b + disc) / (2.0 * a)
        }
    }

    /// Disk form of the region when the capture radius is zero.
    pub fn apollonius_disk(&self) -> Option<(Point2, f64)> {
        if self.capture_radius != 0.0 {
            return None;
        }
        let a2 = self.alpha * self.alpha;
        let center = (self.evader * a2 - self.pursuer) / (a2 - 1.0);
        let radius = self.alpha * self.pursuer.dist(self.evader) / (a2 - 1.0);
        Some((center, radius))
    }

    /// Nearest feasible point.
    pub fn project(&self, p: Point2) -> Point2 {
        if self.is_empty() {
            return self.evader;
        }
        if self.value(p) >= 0.0 {
            return p;
        }
        if let Some((c, r)) = self.apollonius_disk() {
            let d = p - c;
            return c + d * (r / d.norm());
        }
        let Some(u) = (p - self.evader).normalized(0.0) else {
            return p;
        };
        let z0 = self.evader + u * self.radial(u);
        match self.newton_projection(p, z0) {
            Some(z) if z.dist(p) <= z0.dist(p) + 1e-12 => z,
            _ => self.search_projection(p),
        }
    }

    /// Newton on `f(z) = 0` and `(p - z) x grad f(z) = 0`.
    fn newton_projection(&self, p: Point2, z0: Point2) -> Option<Point2> {
        let mut z = z0;
        let scale = p.dist(self.evader).max(self.pursuer.dist(self.evader)).max(1.0);
        for _ in 0..50 {
            let dp = z - self.pursuer;
            let de = z - self.evader;
            let (lp, le) = (dp.norm(), de.norm());
            if lp <= EPS || le <= EPS {
                return None;
            }
            let (np, ne) = (dp / lp, de / le);
            let g = np - ne * self.alpha;
            let hess = |i: usize, j: usize| {
                let id = if i == j { 1.0 } else { 0.0 };
                let comp = |v: Point2, k: usize| if k == 0 { v.x } else { v.y };
                (id - comp(np, i) * comp(np, j)) / lp - self.alpha * (id - comp(ne, i) * comp(ne, j)) / le
            };
            let q = p - z;
            let f1 = lp - self.alpha * le - self.capture_radius;
            let f2 = q.x * g.y - q.y * g.x;
            let j11 = g.x;
            let j12 = g.y;
            let j21 = -g.y + q.x * hess(1, 0) - q.y * hess(0, 0);
            let j22 = g.x + q.x * hess(1, 1) - q.y * hess(0, 1);
            let det = j11 * j22 - j12 * j21;
            if det.abs() < 1e-300 {
                return None;
            }
            let dx = (f1 * j22 - f2 * j12) / det;
            let dy = (j11 * f2 - j21 * f1) / det;
            z = Point2::new(z.x - dx, z.y - dy);
            if !z.is_finite() {
                return None;
            }
            if dx.hypot(dy) <= 1e-14 * scale {
                break;
            }
        }
        let ok = self.value(z).abs() <= 1e-9 * scale && (p - z).dot(self.gradient(z)) <= 0.0;
        ok.then_some(z)
    }

    fn search_projection(&self, p: Point2) -> Point2 {
        let boundary = |phi: f64| {
            let u = Point2::from_angle(phi);
            self.evader + u * self.radial(u)
        };
        let phi = minimize_periodic(|phi| boundary(phi).dist(p), BOUNDARY_SAMPLES, 1);
        boundary(phi)
    }
}

/// Global minimizer of a periodic function: coarse scan, then golden-section
/// refinement around the `keep` best samples.
fn minimize_periodic(f: impl Fn(f64) -> f64, samples: usize, keep: usize) -> f64 {
    let step = std::f64::consts::TAU / samples as f64;
    let vals: Vec<f64> = (0..samples).map(|k| f(step * k as f64)).collect();
    let mut minima: Vec<usize> = (0..samples)
        .filter(|&k| {
            let l = vals[(k + samples - 1) % samples];
            let r = vals[(k + 1) % samples];
            vals[k] <= l && vals[k] <= r
        })
        .collect();
    minima.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    minima.truncate(keep.max(1));
    let mut best = (f64::INFINITY, 0.0);
    for k in minima {
        let c = step * k as f64;
        let phi = golden(&f, c - step, c + step);
        let v = f(phi);
        if v < best.0 {
            best = (v, phi);
        }
        if vals[k] < best.0 {
            best = (vals[k], c);
        }
    }
    best.1
}

fn golden(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Intersection of evasion regions sharing one evader.
#[derive(Clone, Debug, PartialEq)]
pub struct EvasionRegion {
    pub constraints: Vec<FConstraint>,
}

impl EvasionRegion {
    pub fn new(constraints: Vec<FConstraint>) -> Result<Self> {
        let Some(first) = constraints.first() else {
            return Err(Error::DegenerateInput("no constraints".into()));
        };
        if constraints.iter().any(|c| c.evader.dist(first.evader) > EPS) {
            return Err(Error::DegenerateInput("constraints disagree on the evader".into()));
        }
        Ok(Self { constraints })
    }

    pub fn evader(&self) -> Point2 {
        self.constraints[0].evader
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.iter().any(FConstraint::is_empty)
    }

    pub fn min_value(&self, x: Point2) -> f64 {
        self.constraints.iter().map(|c| c.value(x)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: Point2) -> bool {
        self.min_value(x) >= -FEAS_EPS
    }

    pub fn radial(&self, u: Point2) -> f64 {
        self.constraints.iter().map(|c| c.radial(u)).fold(f64::INFINITY, f64::min)
    }

    pub fn boundary_point(&self, phi: f64) -> Point2 {
        let u = Point2::from_angle(phi);
        self.evader() + u * self.radial(u)
    }

    /// Nearest point of the intersection (Dykstra's method for several constraints).
    pub fn project(&self, p: Point2) -> Point2 {
        if self.constraints.len() == 1 {
            return self.constraints[0].project(p);
        }
        if self.min_value(p) >= 0.0 {
            return p;
        }
        let mut x = p;
        let mut incr = vec![Point2::ORIGIN; self.constraints.len()];
        for _ in 0..MAX_ITERS {
            let before = x;
            for (c, y) in self.constraints.iter().zip(incr.iter_mut()) {
                let z = x + *y;
                x = c.project(z);
                *y = z - x;
            }
            if x.dist(before) <= 1e-13 * p.dist(self.evader()).max(1.0) {
                break;
            }
        }
        x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetDistance {
    /// Signed distance: `-inf` when the sets overlap with interior.
    pub distance: f64,
    pub x_i: Point2,
    pub x_g: Point2,
    pub iterations: usize,
    pub converged: bool,
}

/// Signed distance between an evasion region and a convex goal polygon.
///
/// `-inf` when some common point lies strictly inside either set, `+inf` when
/// the region is empty.
pub fn convex_set_distance(region: &EvasionRegion, goal: &Polygon) -> Result<SetDistance> {
    let e = region.evader();
    if region.is_empty() {
        return Ok(SetDistance { distance: f64::INFINITY, x_i: e, x_g: goal.project(e), iterations: 0, converged: true });
    }
    let mut probes: Vec<Point2> = goal.vertices().to_vec();
    probes.push(goal.centroid());
    for v in probes {
        if region.min_value(v) > FEAS_EPS {
            return Ok(SetDistance { distance: f64::NEG_INFINITY, x_i: v, x_g: v, iterations: 0, converged: true });
        }
    }
    let phi = minimize_periodic(|phi| goal.signed_distance(region.boundary_point(phi)), BOUNDARY_SAMPLES, 3);
    let b = region.boundary_point(phi);
    let sd = goal.signed_distance(b);
    if sd < -FEAS_EPS {
        return Ok(SetDistance { distance: f64::NEG_INFINITY, x_i: b, x_g: b, iterations: 0, converged: true });
    }
    let mut best = SetDistance { distance: sd.max(0.0), x_i: b, x_g: goal.project(b), iterations: 0, converged: true };
    if sd > FEAS_EPS {
        let ap = alternate(region, goal, b, MAX_ITERS);
        if ap.distance <= best.distance && region.contains(ap.x_i) {
            best = ap;
        } else {
            best.iterations = ap.iterations;
        }
    }
    if !best.distance.is_finite() {
        return Err(Error::SolverFailure { iterations: best.iterations, last_step: f64::NAN });
    }
    Ok(best)
}

fn alternate(region: &EvasionRegion, goal: &Polygon, start: Point2, cap: usize) -> SetDistance {
    let mut x = region.project(start);
    let mut g = goal.project(x);
    for it in 1..=cap {
        let nx = region.project(g);
        let ng = goal.project(nx);
        let step = nx.dist(x).max(ng.dist(g));
        x = nx;
        g = ng;
        if step <= STEP_TOL {
            return SetDistance { distance: x.dist(g), x_i: x, x_g: g, iterations: it, converged: true };
        }
    }
    SetDistance { distance: x.dist(g), x_i: x, x_g: g, iterations: cap, converged: false }
}

/// Plain alternating projections from the evader, with the overlap sign rule applied
/// at the final witness only.
pub fn alternating_projection_distance(region: &EvasionRegion, goal: &Polygon) -> Result<SetDistance> {
    let mut r = alternate(region, goal, region.evader(), MAX_ITERS);
    if !r.converged {
        return Err(Error::SolverFailure { iterations: r.iterations, last_step: f64::NAN });
    }
    if r.distance < FEAS_EPS && (region.min_value(r.x_i) > FEAS_EPS || goal.halfplane_slack(r.x_i) > FEAS_EPS) {
        r.distance = f64::NEG_INFINITY;
    }
    Ok(r)
}

/// Safe distance of one evader against a coalition of pursuers.
pub fn safe_distance(
    pursuers: &[Point2],
    evader: Point2,
    alpha: &[f64],
    capture_radius: &[f64],
    goal: &Polygon,
) -> Result<SetDistance> {
    let cons = pursuers
        .iter()
        .zip(alpha)
        .zip(capture_radius)
        .map(|((&p, &a), &r)| FConstraint::new(p, evader, a, r))
        .collect::<Result<Vec<_>>>()?;
    convex_set_distance(&EvasionRegion::new(cons)?, goal)
}

/// Projection onto `sector (+) disk(a)`, the sector dilated by radius `a`.
pub fn project_dilated_sector(p: Point2, sector: &CircularSector, a: f64) -> Point2 {
    let q = sector.project(p);
    let d = p.dist(q);
    if d <= a {
        p
    } else {
        q + (p - q) * (a / d)
    }
}

/// Smallest goal distance of points within `(d_k - r)/(alpha - 1)` of the sector and
/// within `(alpha d_k - r)/(alpha - 1)` of the anchor `s`, with the overlap sign rule.
pub fn solve_wavelet_program(
    sector: &CircularSector,
    anchor: Point2,
    d_k: f64,
    alpha: f64,
    capture_radius: f64,
    goal: &Polygon,
) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::DegenerateInput(format!("speed ratio {alpha} must exceed 1")));
    }
    let a = (d_k - capture_radius) / (alpha - 1.0);
    let b = (alpha * d_k - capture_radius) / (alpha - 1.0);
    if a < 0.0 || b < 0.0 || sector.distance(anchor) > a + b + EPS {
        return Ok(f64::INFINITY);
    }
    let ball = crate::geometry::Disk { center: anchor, radius: b };
    let project_x = |p: Point2| -> Point2 {
        let mut x = p;
        let mut y1 = Point2::ORIGIN;
        let mut y2 = Point2::ORIGIN;
        for _ in 0..MAX_ITERS {
            let before = x;
            let z = x + y1;
            x = project_dilated_sector(z, sector, a);
            y1 = z - x;
            let z = x + y2;
            x = ball.project(z);
            y2 = z - x;
            if x.dist(before) <= 1e-13 {
                break;
            }
        }
        x
    };
    let inside_x = |x: Point2, margin: f64| sector.distance(x) < a - margin && x.dist(anchor) < b - margin;
    let mut probes: Vec<Point2> = goal.vertices().to_vec();
    probes.push(goal.centroid());
    if probes.iter().any(|&v| inside_x(v, FEAS_EPS)) {
        return Ok(f64::NEG_INFINITY);
    }
    let mut x = project_x(goal.centroid());
    let mut g = goal.project(x);
    for it in 1..=MAX_ITERS {
        let nx = project_x(g);
        let ng = goal.project(nx);
        let step = nx.dist(x).max(ng.dist(g));
        x = nx;
        g = ng;
        if step <= STEP_TOL {
            let dist = x.dist(g);
            if dist < FEAS_EPS && (inside_x(x, FEAS_EPS) || goal.halfplane_slack(x) > FEAS_EPS) {
                return Ok(f64::NEG_INFINITY);
            }
            return Ok(dist);
        }
        if it == MAX_ITERS {
            return Err(Error::SolverFailure { iterations: it, last_step: step });
        }
    }
    unreachable!()
}
