//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::{BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use mocg_core::allocation::{solve_bip, BipEdge, Certificate};
use mocg_core::convexopt::{convex_set_distance, safe_distance, EvasionRegion, FConstraint};
use mocg_core::engine::{Engine, EvaderStatus, Role};
use mocg_core::esp::{wavefront, EspGraph};
use mocg_core::evaders::check_evasion_winning;
use mocg_core::geometry::{pt, sigma, FreeSpace, Point2, Polygon};
use mocg_core::goalvis::{construct_gcp, is_goal_visible};
use mocg_core::onsite::{apollonius, check_onsite, onsite_region};
use mocg_core::scenario::{EvaderEntry, ObstacleEntry, PolicyEntry, PursuerEntry, Scenario, ScenarioFile, SimSection};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

// ---------------------------------------------------------------- fixtures

fn raw(ps: &[Point2]) -> Vec<[f64; 2]> {
    ps.iter().map(|p| [p.x, p.y]).collect()
}

fn random_walk(seed: u64) -> PolicyEntry {
    PolicyEntry { kind: "random-walk".into(), seed: Some(seed), horizon: None, headings: None }
}

fn greedy() -> PolicyEntry {
    PolicyEntry { kind: "esp-greedy".into(), seed: None, horizon: None, headings: None }
}

fn scripted(headings: Vec<f64>) -> PolicyEntry {
    PolicyEntry { kind: "scripted".into(), seed: None, horizon: None, headings: Some(headings) }
}

#[derive(Clone)]
struct Fixture {
    arena: Polygon,
    goal: Polygon,
    obstacles: Vec<Polygon>,
    pursuers: Vec<(Point2, f64, f64)>,
    evaders: Vec<(Point2, f64, PolicyEntry)>,
    max_steps: usize,
}

impl Fixture {
    fn new(goal: Polygon, obstacles: Vec<Polygon>) -> Self {
        Self {
            arena: Polygon::rect(pt(0.0, 0.0), pt(10.0, 10.0)).unwrap(),
            goal,
            obstacles,
            pursuers: Vec::new(),
            evaders: Vec::new(),
            max_steps: 2000,
        }
    }

    fn space(&self) -> FreeSpace {
        FreeSpace::new(self.arena.clone(), self.obstacles.clone())
    }

    fn scenario(&self) -> Option<Scenario> {
        let file = ScenarioFile {
            version: 1,
            name: None,
            arena: raw(self.arena.vertices()),
            goal: raw(self.goal.vertices()),
            sim: SimSection { max_steps: Some(self.max_steps), ..Default::default() },
            obstacles: self.obstacles.iter().map(|o| ObstacleEntry { vertices: raw(o.vertices()) }).collect(),
            pursuers: self
                .pursuers
                .iter()
                .map(|&(p, speed, r)| PursuerEntry { position: [p.x, p.y], speed, capture_radius: r })
                .collect(),
            evaders: self
                .evaders
                .iter()
                .map(|(p, speed, policy)| EvaderEntry { position: [p.x, p.y], speed: *speed, policy: policy.clone() })
                .collect(),
        };
        Scenario::from_file(&file).ok()
    }
}

fn rotated_rect(c: Point2, hw: f64, hh: f64, theta: f64) -> Polygon {
    let (s, co) = theta.sin_cos();
    let corners = [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)];
    Polygon::new(corners.iter().map(|&(x, y)| pt(c.x + co * x - s * y, c.y + s * x + co * y)).collect()).unwrap()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn random_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Point2 {
    pt(uniform(rng, lo, hi), uniform(rng, lo, hi))
}

/// Smallest gap between two convex polygons, zero when they meet.
fn polygon_gap(a: &Polygon, b: &Polygon) -> f64 {
    for (p, q) in a.edges() {
        for (r, s) in b.edges() {
            if mocg_core::geometry::segments_touch(p, q, r, s) {
                return 0.0;
            }
        }
    }
    let ab = a.vertices().iter().map(|&v| b.distance(v)).fold(f64::INFINITY, f64::min);
    let ba = b.vertices().iter().map(|&v| a.distance(v)).fold(f64::INFINITY, f64::min);
    ab.min(ba)
}

fn random_goal(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Polygon {
    let w = uniform(rng, 1.5, 2.5);
    let h = uniform(rng, 1.5, 2.5);
    let x = uniform(rng, lo, hi - w);
    let y = uniform(rng, lo, hi - h);
    Polygon::rect(pt(x, y), pt(x + w, y + h)).unwrap()
}

/// Up to `n` rotated rectangles clear of the arena wall, the goal and each other.
fn random_obstacles(rng: &mut ChaCha8Rng, n: usize, goal: &Polygon) -> Vec<Polygon> {
    let arena = Polygon::rect(pt(0.0, 0.0), pt(10.0, 10.0)).unwrap();
    let mut out: Vec<Polygon> = Vec::new();
    let mut tries = 0;
    while out.len() < n && tries < 200 {
        tries += 1;
        let o = rotated_rect(
            random_point(rng, 1.0, 9.0),
            uniform(rng, 0.3, 1.0),
            uniform(rng, 0.3, 1.0),
            uniform(rng, 0.0, std::f64::consts::PI),
        );
        let inside = o.vertices().iter().all(|&v| -arena.signed_distance(v) > 0.3);
        if inside && polygon_gap(&o, goal) > 0.4 && out.iter().all(|q| polygon_gap(&o, q) > 0.4) {
            out.push(o);
        }
    }
    out
}

fn free_point(rng: &mut ChaCha8Rng, space: &FreeSpace, goal: &Polygon, clearance: f64) -> Point2 {
    loop {
        let p = random_point(rng, 0.3, 9.7);
        if space.contains(p)
            && space.obstacles.iter().all(|o| o.distance(p) > clearance)
            && -space.arena.signed_distance(p) > clearance
            && !goal.contains(p)
        {
            return p;
        }
    }
}

fn alpha_of(f: &Fixture, i: usize, j: usize) -> f64 {
    f.pursuers[i].1 / f.evaders[j].1
}

// ------------------------------------------------------- criterion 1: onsite

fn onsite_fixture(rng: &mut ChaCha8Rng, k: usize) -> Fixture {
    loop {
        let goal = random_goal(rng, 0.5, 9.5);
        let n_obs = rng.gen_range(0..3);
        let obstacles = random_obstacles(rng, n_obs, &goal);
        let mut f = Fixture::new(goal, obstacles);
        let space = f.space();
        let e = free_point(rng, &space, &f.goal, 0.2);
        let ve = uniform(rng, 0.3, 0.6);
        f.evaders.push((e, ve, greedy()));
        for _ in 0..k {
            let d = uniform(rng, 0.7, 1.6);
            let th = uniform(rng, 0.0, std::f64::consts::TAU);
            f.pursuers.push((e + Point2::from_angle(th) * d, 1.0, 0.3));
        }
        let Some(scn) = f.scenario() else { continue };
        let ok = (0..k).all(|i| check_onsite(f.pursuers[i].0, e, alpha_of(&f, i, 0), scn.sim.delta, &scn.space, &scn.goal));
        if ok {
            return f;
        }
    }
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut runs = 0;
    let mut captures = 0;
    let mut worst_disk = f64::NEG_INFINITY;
    let mut worst_region = f64::NEG_INFINITY;
    let mut coalition_runs = 0;
    let mut capture_outside = 0;
    let mut problems: Vec<String> = Vec::new();
    for n in 0..50 {
        let k = 1 + n % 3;
        let base = onsite_fixture(&mut rng, k);
        let e0 = base.evaders[0].0;
        let away = {
            let c = base.pursuers.iter().fold(Point2::ORIGIN, |a, p| a + p.0) * (1.0 / k as f64);
            (e0 - c).angle()
        };
        let policies = [random_walk(rng.gen()), greedy(), scripted(vec![away; 2000])];
        for policy in policies {
            let mut f = base.clone();
            f.evaders[0].2 = policy;
            let scn = f.scenario().expect("fixture stays valid");
            let delta = scn.sim.delta;
            let regions: Vec<_> =
                (0..k).map(|i| onsite_region(f.pursuers[i].0, e0, alpha_of(&f, i, 0), delta).unwrap()).collect();
            let mut eng = Engine::new(scn).unwrap();
            runs += 1;
            if k > 1 {
                coalition_runs += 1;
            }
            let mut first = true;
            loop {
                let before = eng.roles().to_vec();
                if let Err(e) = eng.step() {
                    problems.push(format!("fixture {n}: {e}"));
                    break;
                }
                if first {
                    for (i, role) in eng.roles().iter().enumerate() {
                        match role {
                            Role::Onsite { snapshot, .. } if *snapshot == regions[i].snapshot() => {}
                            _ if !eng.status()[0].is_active() => {}
                            other => problems.push(format!("fixture {n}: P{} not engaged onsite: {other:?}", i + 1)),
                        }
                    }
                    first = false;
                }
                let e = eng.evaders()[0];
                for (i, role) in before.iter().enumerate() {
                    if !matches!(role, Role::Onsite { .. }) {
                        continue;
                    }
                    let p = eng.pursuers()[i];
                    let reg = &regions[i];
                    let now = apollonius(p, e, alpha_of(&f, i, 0));
                    if let Ok(d) = now {
                        if eng.status()[0].is_active() {
                            worst_disk = worst_disk.max(d.center.dist(reg.disk.center) + d.radius - reg.expanded_radius);
                        }
                    }
                    let tri = reg.triangle().unwrap();
                    let out = tri.distance(p).min((p.dist(reg.disk.center) - reg.expanded_radius).max(0.0));
                    worst_region = worst_region.max(out);
                }
                if let EvaderStatus::Captured { .. } = eng.status()[0] {
                    captures += 1;
                    if k > 1 && regions.iter().any(|r| e.dist(r.disk.center) > r.expanded_radius + 1e-6) {
                        capture_outside += 1;
                    }
                    break;
                }
                if eng.finished() || eng.step_index() >= f.max_steps {
                    problems.push(format!("fixture {n}: no capture within {} steps", f.max_steps));
                    break;
                }
            }
        }
    }
    let pass = captures == runs && worst_disk <= 1e-6 && worst_region <= 1e-6 && capture_outside == 0 && problems.is_empty();
    let mut detail = format!(
        "{captures}/{runs} captured; max disk excess {worst_disk:.3e}; max region exit {worst_region:.3e}; \
         coalition captures outside disk intersection {capture_outside}/{coalition_runs}"
    );
    if let Some(p) = problems.first() {
        detail += &format!("; {} problems, first: {p}", problems.len());
    }
    Outcome::new(pass, detail)
}

// ------------------------------------------------- criterion 2: goal-visible

fn certificate(scn: &Scenario, coalition: &[usize]) -> Option<Certificate> {
    Engine::new(scn.clone()).unwrap().check(coalition, 0).unwrap()
}

fn goalvis_fixture(rng: &mut ChaCha8Rng, k: usize) -> Option<Fixture> {
    for _ in 0..4000 {
        let goal = random_goal(rng, 2.5, 7.5);
        let n_obs = rng.gen_range(0..3);
        let obstacles = random_obstacles(rng, n_obs, &goal);
        let mut f = Fixture::new(goal, obstacles);
        let space = f.space();
        for _ in 0..k {
            let p = loop {
                let p = free_point(rng, &space, &f.goal, 0.1);
                let d = f.goal.distance(p);
                if (0.3..1.5).contains(&d) && is_goal_visible(p, &space, &f.goal) {
                    break p;
                }
            };
            f.pursuers.push((p, 1.0, 0.3));
        }
        let e = free_point(rng, &space, &f.goal, 0.2);
        if !(2.0..5.0).contains(&f.goal.distance(e)) {
            continue;
        }
        let ve = if k == 1 { uniform(rng, 0.3, 0.6) } else { uniform(rng, 0.7, 0.85) };
        f.evaders.push((e, ve, greedy()));
        let Some(scn) = f.scenario() else { continue };
        let ok = match k {
            1 => matches!(certificate(&scn, &[0]), Some(Certificate::GoalVisible { safe_distance }) if safe_distance >= 0.0),
            _ => {
                certificate(&scn, &[0]).is_none()
                    && certificate(&scn, &[1]).is_none()
                    && matches!(certificate(&scn, &[0, 1]), Some(Certificate::GoalVisible { safe_distance }) if safe_distance >= 0.0)
            }
        };
        if ok {
            return Some(f);
        }
    }
    None
}

#[derive(Default)]
struct GuardStats {
    min_rho: f64,
    visibility_lost: usize,
    breaches: usize,
    rho_drops: usize,
    worst_drop: f64,
    clamped_drops: usize,
    in_range_steps: usize,
    steps: usize,
    problems: Vec<String>,
}

impl GuardStats {
    fn new() -> Self {
        Self { min_rho: f64::INFINITY, ..Default::default() }
    }

    /// Observes one step of `coalition` guarding evader 0. `in_range` tells whether
    /// every member's bearing to the witness lay inside its direction range
    /// before the step; only those steps must not decrease the safe distance.
    fn observe(&mut self, eng: &Engine, coalition: &[usize], stationary: bool, in_range: bool, last: &mut Option<f64>) {
        let scn = eng.scenario();
        if matches!(eng.status()[0], EvaderStatus::Arrived { .. }) {
            self.breaches += 1;
            return;
        }
        if !eng.status()[0].is_active() {
            return;
        }
        self.steps += 1;
        for &i in coalition {
            if !is_goal_visible(eng.pursuers()[i], &scn.space, &scn.goal) {
                self.visibility_lost += 1;
            }
        }
        let ps: Vec<Point2> = coalition.iter().map(|&i| eng.pursuers()[i]).collect();
        let alphas: Vec<f64> = coalition.iter().map(|&i| scn.alpha(i, 0)).collect();
        let radii: Vec<f64> = coalition.iter().map(|&i| scn.pursuers[i].capture_radius).collect();
        match safe_distance(&ps, eng.evaders()[0], &alphas, &radii, &scn.goal) {
            Ok(d) => {
                self.min_rho = self.min_rho.min(d.distance);
                if stationary && d.distance.is_finite() {
                    if let Some(prev) = *last {
                        if d.distance < prev - 1e-9 {
                            if in_range {
                                self.rho_drops += 1;
                                self.worst_drop = self.worst_drop.max(prev - d.distance);
                            } else {
                                self.clamped_drops += 1;
                            }
                        }
                    }
                    if in_range {
                        self.in_range_steps += 1;
                    }
                    *last = Some(d.distance);
                }
            }
            Err(e) => self.problems.push(format!("safe distance: {e}")),
        }
    }
}

/// True when every member's bearing to the current witness lies inside its
/// direction range.
fn bearings_in_range(eng: &Engine, coalition: &[usize]) -> bool {
    let scn = eng.scenario();
    let ps: Vec<Point2> = coalition.iter().map(|&i| eng.pursuers()[i]).collect();
    let alphas: Vec<f64> = coalition.iter().map(|&i| scn.alpha(i, 0)).collect();
    let radii: Vec<f64> = coalition.iter().map(|&i| scn.pursuers[i].capture_radius).collect();
    let Ok(d) = safe_distance(&ps, eng.evaders()[0], &alphas, &radii, &scn.goal) else { return false };
    ps.iter().all(|&p| match (construct_gcp(p, &scn.space, &scn.goal), sigma(p, d.x_i)) {
        (Ok(g), Ok(theta)) => g.range.contains(theta),
        _ => false,
    })
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut stats = GuardStats::new();
    let mut fixtures = 0;
    let mut runs = 0;
    let mut missing = 0;
    for n in 0..50 {
        let k = if n % 5 == 4 { 2 } else { 1 };
        let Some(base) = goalvis_fixture(&mut rng, k) else {
            missing += 1;
            continue;
        };
        fixtures += 1;
        let coalition: Vec<usize> = (0..k).collect();
        let moving = if n % 2 == 0 { greedy() } else { random_walk(rng.gen()) };
        for (policy, stationary) in [(moving, false), (scripted(vec![]), true)] {
            let mut f = base.clone();
            f.evaders[0].2 = policy;
            f.max_steps = if stationary { 300 } else { 1500 };
            let mut eng = Engine::new(f.scenario().unwrap()).unwrap();
            runs += 1;
            let mut last = None;
            while !eng.finished() && eng.step_index() < f.max_steps {
                let before = eng.roles().to_vec();
                let in_range = stationary && eng.step_index() > 0 && bearings_in_range(&eng, &coalition);
                if let Err(e) = eng.step() {
                    stats.problems.push(format!("fixture {n}: {e}"));
                    break;
                }
                let guarding = coalition.iter().all(|&i| matches!(&before[i], Role::GoalVisible { .. }) || eng.step_index() == 1);
                if !guarding {
                    stats.problems.push(format!("fixture {n}: coalition left the goal-visible controller"));
                    break;
                }
                stats.observe(&eng, &coalition, stationary, in_range, &mut last);
            }
        }
    }
    let pass = missing == 0
        && stats.breaches == 0
        && stats.min_rho >= -1e-6
        && stats.visibility_lost == 0
        && stats.rho_drops == 0
        && stats.problems.is_empty();
    let mut detail = format!(
        "{fixtures} fixtures, {runs} runs, {} guarded steps; breaches {}; min safe distance {:.3e}; \
         visibility lost {}; stationary evader: {} decreases over {} steps heading straight at the witness (worst {:.2e}), \
         {} decreases on steps clamped to a range edge",
        stats.steps,
        stats.breaches,
        stats.min_rho,
        stats.visibility_lost,
        stats.rho_drops,
        stats.in_range_steps,
        stats.worst_drop,
        stats.clamped_drops
    );
    if missing > 0 {
        detail += &format!("; {missing} fixtures could not be generated");
    }
    if let Some(p) = stats.problems.first() {
        detail += &format!("; {} problems, first: {p}", stats.problems.len());
    }
    Outcome::new(pass, detail)
}

// --------------------------------------------- criterion 3: non-goal-visible

fn rotate_about(p: Point2, c: Point2, quarter: usize) -> Point2 {
    let mut d = p - c;
    for _ in 0..quarter {
        d = pt(-d.y, d.x);
    }
    c + d
}

fn rotate_polygon(poly: &Polygon, c: Point2, quarter: usize) -> Polygon {
    Polygon::new(poly.vertices().iter().map(|&v| rotate_about(v, c, quarter)).collect()).unwrap()
}

fn nonvis_fixture(rng: &mut ChaCha8Rng) -> Option<(Fixture, Box<mocg_core::nonvis::NonvisCertificate>)> {
    let c = pt(5.0, 5.0);
    for _ in 0..4000 {
        let q = rng.gen_range(0..4);
        let goal = Polygon::rect(pt(4.0, 4.0), pt(6.0, 6.0)).unwrap();
        let gap = uniform(rng, 0.3, 0.7);
        let h = uniform(rng, 0.5, 1.2);
        let (a, b) = (uniform(rng, 0.0, 0.5), uniform(rng, 0.0, 0.5));
        let slab = Polygon::rect(pt(4.0 - a, 6.0 + gap), pt(6.0 + b, 6.0 + gap + h)).unwrap();
        let p = pt(uniform(rng, 4.3, 5.7), 6.0 + gap + h + uniform(rng, 0.3, 1.0));
        let mut f = Fixture::new(rotate_polygon(&goal, c, q), vec![rotate_polygon(&slab, c, q)]);
        f.pursuers.push((rotate_about(p, c, q), 1.0, 0.3));
        let space = f.space();
        let e = free_point(rng, &space, &f.goal, 0.2);
        if f.goal.distance(e) < 2.5 {
            continue;
        }
        let policy = if rng.gen_bool(0.5) { greedy() } else { random_walk(rng.gen()) };
        f.evaders.push((e, uniform(rng, 0.2, 0.45), policy));
        f.max_steps = 3000;
        let Some(scn) = f.scenario() else { continue };
        if is_goal_visible(f.pursuers[0].0, &scn.space, &scn.goal) {
            continue;
        }
        if let Some(Certificate::NonVisible(cert)) = certificate(&scn, &[0]) {
            return Some((f, cert));
        }
    }
    None
}

/// Worst safe distance over sampled evader positions within the ESP budget, with
/// the pursuer standing on the anchor.
fn sampled_anchored_safe_distance(scn: &Scenario, cert: &mocg_core::nonvis::NonvisCertificate) -> f64 {
    let graph = EspGraph::new(scn.space.clone());
    let e0 = scn.evaders[0].position;
    let field = graph.field(e0).unwrap();
    let alpha = scn.alpha(0, 0);
    let r = scn.pursuers[0].capture_radius;
    let budget = cert.evader_budget;
    let n = 120;
    let mut worst = f64::INFINITY;
    for ix in 0..=n {
        for iy in 0..=n {
            let q = pt(e0.x - budget + 2.0 * budget * ix as f64 / n as f64, e0.y - budget + 2.0 * budget * iy as f64 / n as f64);
            if !scn.space.contains(q) || field.distance_to(q) > budget {
                continue;
            }
            if let Ok(d) = safe_distance(&[cert.anchor], q, &[alpha], &[r], &scn.goal) {
                worst = worst.min(d.distance);
            }
        }
    }
    worst
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut stats = GuardStats::new();
    let mut fixtures = 0;
    let mut missing = 0;
    let mut worst_len_err: f64 = 0.0;
    let mut len_failures = 0;
    let mut worst_rho_a = f64::INFINITY;
    let mut never_arrived = 0;
    for n in 0..20 {
        let Some((f, cert)) = nonvis_fixture(&mut rng) else {
            missing += 1;
            continue;
        };
        fixtures += 1;
        let scn = f.scenario().unwrap();
        worst_rho_a = worst_rho_a.min(sampled_anchored_safe_distance(&scn, &cert));
        let step_len = f.pursuers[0].1 * scn.sim.dt;
        let mut eng = Engine::new(scn).unwrap();
        let mut travelled = 0.0;
        let mut at_anchor = false;
        let mut last = None;
        while !eng.finished() && eng.step_index() < f.max_steps {
            let from = eng.pursuers()[0];
            let before = eng.roles()[0].clone();
            if let Err(e) = eng.step() {
                stats.problems.push(format!("fixture {n}: {e}"));
                break;
            }
            let role = eng.roles()[0].clone();
            let engaged_before = matches!(&before, Role::NonVisible { certificate, travelled, .. } if *travelled >= certificate.path.length);
            if !at_anchor {
                travelled += from.dist(eng.pursuers()[0]);
                match &role {
                    Role::NonVisible { certificate, travelled: t, .. } if *t >= certificate.path.length => {
                        at_anchor = true;
                        let err = (travelled - cert.path.length).abs();
                        worst_len_err = worst_len_err.max(err);
                        if err > step_len || eng.pursuers()[0].dist(cert.anchor) > 1e-9 {
                            len_failures += 1;
                        }
                    }
                    Role::NonVisible { .. } => {}
                    Role::Idle if !eng.status()[0].is_active() => {}
                    other => {
                        stats.problems.push(format!("fixture {n}: approach interrupted by {other:?}"));
                        break;
                    }
                }
            } else if engaged_before {
                stats.observe(&eng, &[0], false, false, &mut last);
            }
        }
        if !at_anchor {
            never_arrived += 1;
        }
        if matches!(eng.status()[0], EvaderStatus::Arrived { .. }) {
            stats.breaches += 1;
        }
    }
    let pass = missing == 0
        && len_failures == 0
        && never_arrived == 0
        && stats.breaches == 0
        && stats.min_rho >= -1e-6
        && stats.visibility_lost == 0
        && worst_rho_a >= -1e-3
        && stats.problems.is_empty();
    let mut detail = format!(
        "{fixtures} certified fixtures; stage-1 length error max {worst_len_err:.3e} ({len_failures} over v*dt, \
         {never_arrived} never reached the anchor); post-anchor min safe distance {:.3e}, visibility lost {}, breaches {}; \
         sampled anchored safe distance min {worst_rho_a:.4}",
        stats.min_rho, stats.visibility_lost, stats.breaches
    );
    if missing > 0 {
        detail += &format!("; {missing} fixtures could not be generated");
    }
    if let Some(p) = stats.problems.first() {
        detail += &format!("; {} problems, first: {p}", stats.problems.len());
    }
    Outcome::new(pass, detail)
}

// ------------------------------------------------------ criterion 4: evasion

fn evasion_fixture(rng: &mut ChaCha8Rng) -> Fixture {
    loop {
        let goal = random_goal(rng, 0.5, 9.5);
        let n_obs = rng.gen_range(0..4);
        let obstacles = random_obstacles(rng, n_obs, &goal);
        let mut f = Fixture::new(goal, obstacles);
        let space = f.space();
        let e = free_point(rng, &space, &f.goal, 0.2);
        let p = free_point(rng, &space, &f.goal, 0.2);
        if !(0.5..2.5).contains(&f.goal.distance(e)) || f.goal.distance(p) < 3.0 {
            continue;
        }
        f.pursuers.push((p, 1.0, 0.3));
        f.evaders.push((e, uniform(rng, 0.4, 0.7), greedy()));
        let Some(scn) = f.scenario() else { continue };
        let graph = EspGraph::new(scn.space.clone());
        let (pf, ef) = (graph.field(p).unwrap(), graph.field(e).unwrap());
        if check_evasion_winning(&pf, &ef, scn.alpha(0, 0), 0.3, &scn.goal).is_some() && certificate(&scn, &[0]).is_none() {
            return f;
        }
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut arrivals = 0;
    let mut non_pursuit_steps = 0;
    let mut problems = Vec::new();
    for n in 0..20 {
        let f = evasion_fixture(&mut rng);
        let mut eng = Engine::new(f.scenario().unwrap()).unwrap();
        while !eng.finished() && eng.step_index() < f.max_steps {
            if let Err(e) = eng.step() {
                problems.push(format!("fixture {n}: {e}"));
                break;
            }
            if eng.status()[0].is_active() && !matches!(eng.roles()[0], Role::Pursuit { .. }) {
                non_pursuit_steps += 1;
            }
        }
        match eng.status()[0] {
            EvaderStatus::Arrived { .. } => arrivals += 1,
            s => problems.push(format!("fixture {n}: ended {s:?}")),
        }
    }
    let pass = arrivals == 20 && problems.is_empty() && non_pursuit_steps == 0;
    let mut detail = format!("{arrivals}/20 evaders reached the goal uncaptured; steps off pure pursuit {non_pursuit_steps}");
    if let Some(p) = problems.first() {
        detail += &format!("; {} problems, first: {p}", problems.len());
    }
    Outcome::new(pass, detail)
}

// --------------------------------------------------- criterion 5: allocation

/// Best (edge count, onsite count) over every feasible assignment, by
/// enumerating for each evader either no edge or one of its edges.
fn exhaustive_bip(edges: &[BipEdge], n_evaders: usize) -> (usize, usize) {
    fn go(edges: &[BipEdge], j: usize, n: usize, used: &mut Vec<usize>, count: usize, onsite: usize, best: &mut (usize, usize)) {
        if j == n {
            *best = (*best).max((count, onsite));
            return;
        }
        go(edges, j + 1, n, used, count, onsite, best);
        for e in edges.iter().filter(|e| e.evader == j) {
            if e.coalition.iter().any(|i| used.contains(i)) {
                continue;
            }
            used.extend(&e.coalition);
            go(edges, j + 1, n, used, count + 1, onsite + (e.kind == 1) as usize, best);
            used.truncate(used.len() - e.coalition.len());
        }
    }
    let mut best = (0, 0);
    go(edges, 0, n_evaders, &mut Vec::new(), 0, 0, &mut best);
    best
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut matches = 0;
    let mut tie_matches = 0;
    let mut infeasible = 0;
    for _ in 0..200 {
        let np = rng.gen_range(1..=4);
        let ne = rng.gen_range(1..=4);
        let density = uniform(&mut rng, 0.2, 0.7);
        let mut edges = Vec::new();
        let mut single = vec![vec![false; ne]; np];
        for i in 0..np {
            for j in 0..ne {
                if rng.gen_bool(density) {
                    single[i][j] = true;
                    edges.push(BipEdge { coalition: vec![i], evader: j, kind: rng.gen_range(1..=3) });
                }
            }
        }
        for i in 0..np {
            for k in i + 1..np {
                for j in 0..ne {
                    if !single[i][j] && !single[k][j] && rng.gen_bool(density) {
                        edges.push(BipEdge { coalition: vec![i, k], evader: j, kind: 2 });
                    }
                }
            }
        }
        let sol = solve_bip(&edges, std::time::Duration::from_secs(5));
        let chosen: Vec<&BipEdge> = sol.edges.iter().map(|&k| &edges[k]).collect();
        let pursuers: Vec<usize> = chosen.iter().flat_map(|e| e.coalition.iter().copied()).collect();
        let evaders: BTreeSet<usize> = chosen.iter().map(|e| e.evader).collect();
        if pursuers.iter().collect::<BTreeSet<_>>().len() != pursuers.len() || evaders.len() != chosen.len() {
            infeasible += 1;
        }
        let want = exhaustive_bip(&edges, ne);
        if chosen.len() == want.0 {
            matches += 1;
        }
        if (chosen.len(), chosen.iter().filter(|e| e.kind == 1).count()) == want {
            tie_matches += 1;
        }
    }
    Outcome::new(
        matches == 200 && infeasible == 0,
        format!("objective matches exhaustive enumeration on {matches}/200 instances; tie-break matches {tie_matches}/200; infeasible {infeasible}"),
    )
}

// ------------------------------------------------ criterion 6: ledger monotone

fn random_game(rng: &mut ChaCha8Rng) -> Fixture {
    loop {
        let goal = random_goal(rng, 1.0, 9.0);
        let n_obs = rng.gen_range(0..4);
        let obstacles = random_obstacles(rng, n_obs, &goal);
        let mut f = Fixture::new(goal, obstacles);
        let space = f.space();
        for _ in 0..rng.gen_range(2..=5) {
            let p = free_point(rng, &space, &f.goal, 0.1);
            f.pursuers.push((p, 1.0, 0.3));
        }
        for _ in 0..rng.gen_range(2..=4) {
            let e = free_point(rng, &space, &f.goal, 0.1);
            let policy = match rng.gen_range(0..3) {
                0 => greedy(),
                1 => random_walk(rng.gen()),
                _ => scripted((0..400).map(|_| uniform(rng, 0.0, std::f64::consts::TAU)).collect()),
            };
            f.evaders.push((e, uniform(rng, 0.3, 0.7), policy));
        }
        f.max_steps = 400;
        if f.scenario().is_some() {
            return f;
        }
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut monotone = 0;
    let mut honoured = 0;
    let mut certified = 0;
    let mut broken = Vec::new();
    let mut problems = Vec::new();
    for n in 0..100 {
        let f = random_game(&mut rng);
        let mut eng = Engine::new(f.scenario().unwrap()).unwrap();
        let mut ever = BTreeSet::new();
        let mut failed = false;
        while !eng.finished() && eng.step_index() < f.max_steps {
            ever.extend(eng.defeat().iter().map(|d| d.evader));
            match eng.step() {
                Ok(r) => ever.extend(r.defeat.iter().map(|d| d.1)),
                Err(e) => {
                    problems.push(format!("game {n}: {e}"));
                    failed = true;
                    break;
                }
            }
            // members added during this step's allocation
            ever.extend(eng.history().last().into_iter().flat_map(|r| r.events.iter()).filter_map(|ev| {
                ev.strip_suffix(" broke its defeat certificate").and_then(|s| s.strip_prefix('E')).and_then(|s| s.parse::<usize>().ok()).map(|j| j - 1)
            }));
        }
        if failed {
            continue;
        }
        let series: Vec<usize> = eng.history().iter().map(|r| r.lower_bound).collect();
        if series.windows(2).all(|w| w[0] <= w[1]) {
            monotone += 1;
        }
        certified += ever.len();
        let bad: Vec<usize> = ever.iter().copied().filter(|&j| matches!(eng.status()[j], EvaderStatus::Arrived { .. })).collect();
        if bad.is_empty() {
            honoured += 1;
        } else {
            broken.push(format!("game {n}: E{:?}", bad.iter().map(|j| j + 1).collect::<Vec<_>>()));
        }
    }
    let pass = monotone == 100 && honoured == 100 && problems.is_empty();
    let mut detail = format!(
        "lower bound non-decreasing in {monotone}/100 runs; certificates honoured in {honoured}/100 runs ({certified} certified evaders)"
    );
    if let Some(b) = broken.first() {
        detail += &format!("; broken: {b}");
    }
    if let Some(p) = problems.first() {
        detail += &format!("; {} problems, first: {p}", problems.len());
    }
    Outcome::new(pass, detail)
}

// ----------------------------------------------- criterion 7: geometry oracles

/// Strictly inside a counter-clockwise convex polygon.
fn inside_open(vs: &[Point2], p: Point2) -> bool {
    (0..vs.len()).all(|k| {
        let (a, b) = (vs[k], vs[(k + 1) % vs.len()]);
        (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) > 1e-12
    })
}

struct Grid {
    n: usize,
    h: f64,
    obstacles: Vec<Vec<Point2>>,
}

impl Grid {
    fn node(&self, ix: usize, iy: usize) -> Point2 {
        pt(ix as f64 * self.h, iy as f64 * self.h)
    }

    fn blocked(&self, p: Point2) -> bool {
        self.obstacles.iter().any(|o| inside_open(o, p))
    }

    fn clear(&self, a: Point2, b: Point2) -> bool {
        let k = ((a.dist(b) / (0.25 * self.h)).ceil() as usize).max(1);
        (0..=k).all(|s| !self.blocked(a.lerp(b, s as f64 / k as f64)))
    }

    /// 32-neighbour Dijkstra from `s`, read off at `t`.
    fn distance(&self, s: Point2, t: Point2) -> f64 {
        let m = self.n + 1;
        let idx = |ix: usize, iy: usize| iy * m + ix;
        let free: Vec<bool> = (0..m * m).map(|k| !self.blocked(self.node(k % m, k / m))).collect();
        let mut dist = vec![f64::INFINITY; m * m];
        let mut heap = BinaryHeap::new();
        let near = |p: Point2| {
            let (cx, cy) = ((p.x / self.h).round() as i64, (p.y / self.h).round() as i64);
            let mut out = Vec::new();
            for dy in -3..=3 {
                for dx in -3..=3 {
                    let (ix, iy) = (cx + dx, cy + dy);
                    if ix >= 0 && iy >= 0 && (ix as usize) < m && (iy as usize) < m {
                        let q = self.node(ix as usize, iy as usize);
                        if free[idx(ix as usize, iy as usize)] && self.clear(p, q) {
                            out.push((ix as usize, iy as usize, p.dist(q)));
                        }
                    }
                }
            }
            out
        };
        for (ix, iy, d) in near(s) {
            dist[idx(ix, iy)] = d;
            heap.push(Reverse((OrdF(d), idx(ix, iy))));
        }
        let mut dirs = Vec::new();
        for dy in -3i64..=3 {
            for dx in -3i64..=3 {
                if (dx, dy) != (0, 0) && gcd(dx.unsigned_abs(), dy.unsigned_abs()) == 1 {
                    dirs.push((dx, dy));
                }
            }
        }
        while let Some(Reverse((OrdF(d), k))) = heap.pop() {
            if d > dist[k] {
                continue;
            }
            let (ix, iy) = ((k % m) as i64, (k / m) as i64);
            let p = self.node(ix as usize, iy as usize);
            for &(dx, dy) in &dirs {
                let (jx, jy) = (ix + dx, iy + dy);
                if jx < 0 || jy < 0 || jx as usize >= m || jy as usize >= m {
                    continue;
                }
                let j = idx(jx as usize, jy as usize);
                if !free[j] {
                    continue;
                }
                let q = self.node(jx as usize, jy as usize);
                let nd = d + p.dist(q);
                if nd < dist[j] && self.clear(p, q) {
                    dist[j] = nd;
                    heap.push(Reverse((OrdF(nd), j)));
                }
            }
        }
        near(t).into_iter().map(|(ix, iy, d)| dist[idx(ix, iy)] + d).fold(f64::INFINITY, f64::min)
    }
}

#[derive(PartialEq, PartialOrd)]
struct OrdF(f64);
impl Eq for OrdF {}
impl Ord for OrdF {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Point-to-convex-polygon distance computed edge by edge.
fn oracle_polygon_distance(vs: &[Point2], p: Point2) -> f64 {
    if vs.len() >= 3 && (0..vs.len()).all(|k| {
        let (a, b) = (vs[k], vs[(k + 1) % vs.len()]);
        (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0
    }) {
        return 0.0;
    }
    (0..vs.len())
        .map(|k| {
            let (a, b) = (vs[k], vs[(k + 1) % vs.len()]);
            let ab = b - a;
            let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
            p.dist(a + ab * t)
        })
        .fold(f64::INFINITY, f64::min)
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let dummy_goal = Polygon::rect(pt(-5.0, -5.0), pt(-4.0, -4.0)).unwrap();

    // shortest paths against the grid
    let mut worst_rel: f64 = 0.0;
    let mut esp_fail = 0;
    for _ in 0..20 {
        let n_obs = rng.gen_range(2..=4);
        let obstacles = random_obstacles(&mut rng, n_obs, &dummy_goal);
        let space = FreeSpace::new(Polygon::rect(pt(0.0, 0.0), pt(10.0, 10.0)).unwrap(), obstacles.clone());
        let (s, t) = loop {
            let s = free_point(&mut rng, &space, &dummy_goal, 0.1);
            let t = free_point(&mut rng, &space, &dummy_goal, 0.1);
            if s.dist(t) > 3.0 {
                break (s, t);
            }
        };
        let d = EspGraph::new(space).distance(s, t).unwrap();
        let grid = Grid { n: 400, h: 10.0 / 400.0, obstacles: obstacles.iter().map(|o| o.vertices().to_vec()).collect() };
        let g = grid.distance(s, t);
        let rel = (g - d).abs() / d;
        worst_rel = worst_rel.max(rel);
        if rel > 0.015 {
            esp_fail += 1;
        }
    }

    // wavefront samples
    let mut wave_points = 0;
    let mut worst_wave: f64 = 0.0;
    for _ in 0..20 {
        let n_obs = rng.gen_range(1..=4);
        let obstacles = random_obstacles(&mut rng, n_obs, &dummy_goal);
        let space = FreeSpace::new(Polygon::rect(pt(0.0, 0.0), pt(10.0, 10.0)).unwrap(), obstacles);
        let src = free_point(&mut rng, &space, &dummy_goal, 0.1);
        let ell = uniform(&mut rng, 1.0, 8.0);
        let graph = EspGraph::new(space.clone());
        let field = graph.field(src).unwrap();
        for w in wavefront(&graph, src, ell).unwrap() {
            for k in 1..8 {
                let q = w.point(w.arc.start + w.arc.span * k as f64 / 8.0);
                let err = if space.contains(q) { (field.distance_to(q) - ell).abs() } else { f64::INFINITY };
                worst_wave = worst_wave.max(err);
                wave_points += 1;
            }
        }
    }

    // set distance against sampling
    let mut worst_gap = f64::NEG_INFINITY;
    let mut witness_bad = 0;
    let mut cases = 0;
    while cases < 20 {
        let e = random_point(&mut rng, 2.0, 8.0);
        let k = rng.gen_range(1..=3);
        let cons: Vec<FConstraint> = (0..k)
            .map(|_| {
                let p = e + Point2::from_angle(uniform(&mut rng, 0.0, std::f64::consts::TAU)) * uniform(&mut rng, 0.8, 3.0);
                FConstraint::new(p, e, uniform(&mut rng, 1.3, 3.0), uniform(&mut rng, 0.0, 0.3)).unwrap()
            })
            .collect();
        let region = EvasionRegion::new(cons).unwrap();
        let goal = rotated_rect(random_point(&mut rng, 0.0, 10.0), uniform(&mut rng, 0.3, 1.5), uniform(&mut rng, 0.3, 1.5), uniform(&mut rng, 0.0, 3.2));
        let reach = (0..720)
            .map(|a| region.radial(Point2::from_angle(a as f64 * std::f64::consts::TAU / 720.0)))
            .fold(0.0, f64::max)
            * 1.05
            + 1e-3;
        let n = 500;
        let mut sampled = f64::INFINITY;
        for ix in 0..n {
            for iy in 0..n {
                let q = pt(e.x - reach + 2.0 * reach * ix as f64 / (n - 1) as f64, e.y - reach + 2.0 * reach * iy as f64 / (n - 1) as f64);
                if region.min_value(q) >= 0.0 {
                    sampled = sampled.min(oracle_polygon_distance(goal.vertices(), q));
                }
            }
        }
        if !(sampled > 0.05 && sampled.is_finite()) {
            continue;
        }
        cases += 1;
        let d = convex_set_distance(&region, &goal).unwrap();
        worst_gap = worst_gap.max(d.distance - sampled);
        let valid = region.min_value(d.x_i) >= -1e-6
            && oracle_polygon_distance(goal.vertices(), d.x_g) <= 1e-9
            && (d.x_i.dist(d.x_g) - d.distance).abs() <= 1e-9;
        if !valid {
            witness_bad += 1;
        }
    }

    let pass = esp_fail == 0 && worst_wave <= 1e-6 && worst_gap <= 1e-4 && witness_bad == 0;
    Outcome::new(
        pass,
        format!(
            "ESP vs grid: worst relative error {:.3}% ({esp_fail}/20 over 1.5%); wavefront: {wave_points} samples, max |d-l| {worst_wave:.2e}; \
             set distance: {cases} cases, witness minus best sample {worst_gap:.2e}, invalid witnesses {witness_bad}",
            worst_rel * 100.0
        ),
    )
}

// -------------------------------------------------- criterion 8: bundled cases

fn bundled(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"));
    Scenario::load(&path).unwrap()
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // case 1
    let scn = bundled("case1");
    let regions: Vec<_> = scn
        .pursuers
        .iter()
        .enumerate()
        .map(|(i, p)| onsite_region(p.position, scn.evaders[0].position, scn.alpha(i, 0), scn.sim.delta).unwrap())
        .collect();
    let max_steps = scn.sim.max_steps;
    let mut eng = Engine::new(scn).unwrap();
    eng.step().unwrap();
    let onsite: Vec<usize> = (0..eng.roles().len()).filter(|&i| matches!(eng.roles()[i], Role::Onsite { .. })).collect();
    eng.run(max_steps).unwrap();
    let ok1 = match eng.status()[0] {
        EvaderStatus::Captured { by, .. } => {
            let e = eng.evaders()[0];
            onsite.len() >= 2 && onsite.contains(&by) && onsite.iter().all(|&i| e.dist(regions[i].disk.center) <= regions[i].expanded_radius + 1e-6)
        }
        _ => false,
    };
    pass &= ok1;
    notes.push(format!("case1 {} ({} onsite members, {:?})", if ok1 { "ok" } else { "FAILED" }, onsite.len(), eng.status()[0]));

    // case 2
    let scn = bundled("case2");
    let max_steps = scn.sim.max_steps;
    let mut eng = Engine::new(scn).unwrap();
    eng.run(max_steps).unwrap();
    let ok2 = eng.status().iter().all(|s| matches!(s, EvaderStatus::Captured { .. }))
        && eng.history().iter().all(|r| r.status.iter().all(|s| !matches!(s, EvaderStatus::Arrived { .. })));
    pass &= ok2;
    notes.push(format!("case2 {} ({:?})", if ok2 { "ok" } else { "FAILED" }, eng.status()));

    // case 3
    let scn = bundled("case3");
    let max_steps = scn.sim.max_steps;
    let mut eng = Engine::new(scn).unwrap();
    let mut anchors = vec![None; eng.pursuers().len()];
    let mut reached = vec![false; eng.pursuers().len()];
    while !eng.finished() && eng.step_index() < max_steps {
        eng.step().unwrap();
        for (i, role) in eng.roles().iter().enumerate() {
            if let Role::NonVisible { certificate, travelled, .. } = role {
                anchors[i] = Some(certificate.anchor);
                if *travelled >= certificate.path.length && eng.pursuers()[i].dist(certificate.anchor) < 1e-9 {
                    reached[i] = true;
                }
            }
        }
    }
    let captured_all = eng.status().iter().all(|s| matches!(s, EvaderStatus::Captured { .. }));
    let ok3 = reached.iter().all(|&r| r) && captured_all;
    pass &= ok3;
    notes.push(format!("case3 {} (anchors reached {reached:?}, {:?})", if ok3 { "ok" } else { "FAILED" }, eng.status()));

    // case 4
    let scn = bundled("case4");
    let max_steps = scn.sim.max_steps;
    let mut eng = Engine::new(scn).unwrap();
    let summary = eng.run(max_steps).unwrap();
    let ok4 = summary.initial_lower_bound >= 4 && summary.final_lower_bound >= summary.initial_lower_bound;
    pass &= ok4;
    notes.push(format!(
        "case4 {} (lower bound {} -> {}, captured {}, arrived {})",
        if ok4 { "ok" } else { "FAILED" },
        summary.initial_lower_bound,
        summary.final_lower_bound,
        summary.captured,
        summary.arrived
    ));
    Outcome::new(pass, notes.join("; "))
}

// ------------------------------------------------------------------- driver

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Outcome); 8] = [
        (1, "onsite capture", criterion_1),
        (2, "goal-visible guarding", criterion_2),
        (3, "non-goal-visible anchoring", criterion_3),
        (4, "evasion certificate", criterion_4),
        (5, "capture program optimality", criterion_5),
        (6, "lower-bound ledger", criterion_6),
        (7, "geometry and shortest-path oracles", criterion_7),
        (8, "bundled case reproduction", criterion_8),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let start = Instant::now();
    let results: Vec<(usize, &str, Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .filter(|(n, _, _)| filter.is_empty() || filter.contains(n))
            .map(|&(n, name, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let out = std::panic::catch_unwind(f)
                        .unwrap_or_else(|_| Outcome::new(false, "panicked".into()));
                    (n, name, out, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (n, name, out, secs) in &results {
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} [{tag}] {name}: {} ({secs:.1}s)", out.detail);
        if !out.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} criteria passed in {:.1}s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
