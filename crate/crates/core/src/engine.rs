//! Discrete-time game loop: winning graph, capture program, the three fallback
//! matchings, controller execution, capture and arrival bookkeeping.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::allocation::{
    build_winning_graph, check_pursuit_winning, max_bipartite_matching, solve_bip, BipEdge, Certificate, GameView, WinningGraph,
};
use crate::convexopt::safe_distance;
use crate::error::{Error, Result};
use crate::esp::{DistanceField, EspGraph, EspPath};
use crate::evaders::{check_evasion_winning, EvaderBrain, EvaderView, Motion};
use crate::geometry::{point_segment_distance, project_onto_segment, FreeSpace, Point2, Polygon, EPS};
use crate::goalvis::{construct_gcp, goalvis_control, is_goal_visible};
use crate::nonvis::{goal_visible_obstacle_vertices, NonvisCertificate};
use crate::onsite::{onsite_control, OnsiteSnapshot};
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum EvaderStatus {
    Active,
    Captured { by: usize, step: usize },
    Arrived { step: usize },
}

impl EvaderStatus {
    pub fn is_active(&self) -> bool {
        matches!(self, EvaderStatus::Active)
    }
}

/// Which matching stage produced an assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Defeat,
    Enhanced,
    NonDominated,
    Closest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefeatEntry {
    pub coalition: Vec<usize>,
    pub evader: usize,
    pub certificate: Certificate,
}

impl DefeatEntry {
    pub fn kind(&self) -> u8 {
        self.certificate.kind()
    }
}

/// Controller state of one pursuer.
#[derive(Clone, Debug, PartialEq)]
pub enum Role {
    Idle,
    Onsite { evader: usize, stage: Stage, snapshot: OnsiteSnapshot },
    GoalVisible { evader: usize, coalition: Vec<usize> },
    NonVisible { evader: usize, certificate: Box<NonvisCertificate>, travelled: f64 },
    Pursuit { evader: usize, stage: Stage },
}

impl Role {
    pub fn evader(&self) -> Option<usize> {
        match self {
            Role::Idle => None,
            Role::Onsite { evader, .. }
            | Role::GoalVisible { evader, .. }
            | Role::NonVisible { evader, .. }
            | Role::Pursuit { evader, .. } => Some(*evader),
        }
    }

    fn stage(&self) -> Option<Stage> {
        match self {
            Role::Idle => None,
            Role::Onsite { stage, .. } | Role::Pursuit { stage, .. } => Some(*stage),
            Role::GoalVisible { .. } | Role::NonVisible { .. } => Some(Stage::Defeat),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Role::Idle => "idle",
            Role::Onsite { .. } => "onsite",
            Role::GoalVisible { .. } => "goal-visible",
            Role::NonVisible { certificate, travelled, .. } => {
                if *travelled < certificate.path.length {
                    "non-visible-approach"
                } else {
                    "non-visible-engage"
                }
            }
            Role::Pursuit { .. } => "esp-pursuit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub pursuer: usize,
    pub evader: Option<usize>,
    pub stage: Option<Stage>,
    pub controller: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafeDistanceRecord {
    pub coalition: Vec<usize>,
    pub evader: usize,
    pub safe_distance: f64,
}

/// One line of the trajectory log, describing the state after the step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub pursuers: Vec<Point2>,
    pub evaders: Vec<Point2>,
    pub status: Vec<EvaderStatus>,
    pub assignments: Vec<AssignmentRecord>,
    /// `(coalition, evader, winning type)` of the defeat set.
    pub defeat: Vec<(Vec<usize>, usize, u8)>,
    pub safe_distances: Vec<SafeDistanceRecord>,
    pub allocation_ran: bool,
    pub bip_optimal: bool,
    pub events: Vec<String>,
    pub lower_bound: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub initial_lower_bound: usize,
    pub final_lower_bound: usize,
    pub captured: usize,
    pub arrived: usize,
    pub status: Vec<EvaderStatus>,
    pub lower_bound_monotone: bool,
}

pub struct Engine {
    scenario: Arc<Scenario>,
    graph: Arc<EspGraph>,
    anchors: Arc<Vec<Point2>>,
    pursuers: Vec<Point2>,
    evaders: Vec<Point2>,
    status: Vec<EvaderStatus>,
    brains: Vec<EvaderBrain>,
    defeat: Vec<DefeatEntry>,
    roles: Vec<Role>,
    step: usize,
    needs_allocation: bool,
    initial_lower_bound: Option<usize>,
    last_graph: WinningGraph,
    history: Vec<StepRecord>,
}

impl Engine {
    pub fn new(scenario: Scenario) -> Result<Self> {
        let graph = EspGraph::new(scenario.space.clone());
        let anchors = goal_visible_obstacle_vertices(&scenario.space, &scenario.goal);
        let brains = scenario
            .evaders
            .iter()
            .enumerate()
            .map(|(j, e)| EvaderBrain::new(e.policy.clone(), scenario.sim.seed, j))
            .collect();
        Ok(Self {
            pursuers: scenario.pursuers.iter().map(|p| p.position).collect(),
            evaders: scenario.evaders.iter().map(|e| e.position).collect(),
            status: vec![EvaderStatus::Active; scenario.evaders.len()],
            roles: vec![Role::Idle; scenario.pursuers.len()],
            brains,
            defeat: Vec::new(),
            step: 0,
            needs_allocation: true,
            initial_lower_bound: None,
            last_graph: WinningGraph::default(),
            history: Vec::new(),
            graph: Arc::new(graph),
            anchors: Arc::new(anchors),
            scenario: Arc::new(scenario),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn graph(&self) -> &EspGraph {
        &self.graph
    }

    pub fn pursuers(&self) -> &[Point2] {
        &self.pursuers
    }

    pub fn evaders(&self) -> &[Point2] {
        &self.evaders
    }

    pub fn status(&self) -> &[EvaderStatus] {
        &self.status
    }

    pub fn defeat(&self) -> &[DefeatEntry] {
        &self.defeat
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn history(&self) -> &[StepRecord] {
        &self.history
    }

    pub fn last_graph(&self) -> &WinningGraph {
        &self.last_graph
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn finished(&self) -> bool {
        self.status.iter().all(|s| !s.is_active())
    }

    pub fn captured_count(&self) -> usize {
        self.status.iter().filter(|s| matches!(s, EvaderStatus::Captured { .. })).count()
    }

    pub fn lower_bound(&self) -> usize {
        self.captured_count() + self.defeat.len()
    }

    pub fn initial_lower_bound(&self) -> Option<usize> {
        self.initial_lower_bound
    }

    fn active(&self) -> Vec<bool> {
        self.status.iter().map(EvaderStatus::is_active).collect()
    }

    /// Winning type and certificate of a coalition against an evader at the current state.
    pub fn check(&self, coalition: &[usize], evader: usize) -> Result<Option<Certificate>> {
        let scn = self.scenario.clone();
        let graph = self.graph.clone();
        let (pf, ef, gv) = self.fields(&scn, &graph)?;
        let active = self.active();
        let view = GameView {
            scenario: &scn,
            graph: &graph,
            pursuers: &self.pursuers,
            evaders: &self.evaders,
            active: &active,
            pursuer_fields: &pf,
            evader_fields: &ef,
            goal_visible: &gv,
            anchors: &self.anchors,
        };
        if coalition.len() == 2 {
            let edge = check_pursuit_winning(&view, coalition, evader)?;
            return Ok(edge.filter(|c| c.kind() == 2));
        }
        check_pursuit_winning(&view, coalition, evader)
    }

    #[allow(clippy::type_complexity)]
    fn fields<'g>(
        &self,
        scn: &Scenario,
        graph: &'g EspGraph,
    ) -> Result<(Vec<DistanceField<'g>>, Vec<Option<DistanceField<'g>>>, Vec<bool>)> {
        let pf = self.pursuers.iter().map(|&p| graph.field(p)).collect::<Result<Vec<_>>>()?;
        let ef = self
            .evaders
            .iter()
            .zip(&self.status)
            .map(|(&e, s)| if s.is_active() { graph.field(e).ok() } else { None })
            .collect();
        let gv = self.pursuers.iter().map(|&p| is_goal_visible(p, &scn.space, &scn.goal)).collect();
        Ok((pf, ef, gv))
    }

    fn fault(&self, message: String) -> Error {
        Error::SimulationFault {
            step: self.step,
            message: format!("{message}; pursuers {:?}; evaders {:?}", self.pursuers, self.evaders),
        }
    }

    /// Advances one step and returns its log record.
    pub fn step(&mut self) -> Result<StepRecord> {
        let scn = self.scenario.clone();
        let graph = self.graph.clone();
        let anchors = self.anchors.clone();
        let dt = scn.sim.dt;
        let mut events = Vec::new();
        let (pf, ef, gv) = self.fields(&scn, &graph)?;
        let active = self.active();
        let (pursuers_now, evaders_now) = (self.pursuers.clone(), self.evaders.clone());
        let view = GameView {
            scenario: &scn,
            graph: &graph,
            pursuers: &pursuers_now,
            evaders: &evaders_now,
            active: &active,
            pursuer_fields: &pf,
            evader_fields: &ef,
            goal_visible: &gv,
            anchors: &anchors,
        };

        let due = self.needs_allocation || self.step.is_multiple_of(scn.sim.allocation_stride);
        let mut bip_optimal = true;
        if due {
            let wg = build_winning_graph(&view);
            for f in &wg.failures {
                events.push(format!("winning check failed: {f}"));
            }
            let bip_edges: Vec<BipEdge> = wg.edges.iter().map(BipEdge::from).collect();
            let sol = solve_bip(&bip_edges, Duration::from_millis(scn.sim.bip_time_cap_ms));
            bip_optimal = sol.optimal;
            if !sol.optimal {
                events.push("capture program fell back to greedy".into());
            }
            if sol.edges.len() > self.defeat.len() {
                self.defeat = sol
                    .edges
                    .iter()
                    .map(|&k| {
                        let e = &wg.edges[k];
                        DefeatEntry { coalition: e.coalition.clone(), evader: e.evader, certificate: e.certificate.clone() }
                    })
                    .collect();
                events.push(format!("defeat set grew to {}", self.defeat.len()));
            }
            self.allocate(&view, &wg);
            self.last_graph = wg;
            self.needs_allocation = false;
            if self.initial_lower_bound.is_none() {
                self.initial_lower_bound = Some(self.lower_bound());
            }
        }

        // Motions are planned against the pre-step state.
        let mut targets = self.pursuers.clone();
        let mut safe_records = Vec::new();
        let mut coalition_witness: Vec<(Vec<usize>, usize, Point2, f64)> = Vec::new();
        for i in 0..self.pursuers.len() {
            let p = self.pursuers[i];
            let speed = scn.pursuers[i].speed;
            let step_len = speed * dt;
            let role = self.roles[i].clone();
            let next = match role {
                Role::Idle => p,
                Role::Onsite { evader, snapshot, .. } => {
                    let u = onsite_control(p, self.evaders[evader], scn.alpha(i, evader), &snapshot)?;
                    let (to, clipped) = clip_move_flagged(&scn.space, p, u * step_len);
                    if clipped {
                        log::warn!("P{} onsite step clipped at {p}", i + 1);
                        events.push(format!("P{} clipped", i + 1));
                    }
                    to
                }
                Role::Pursuit { evader, .. } => match pf[i].path_to(self.evaders[evader]) {
                    Some(path) => path.point_at(step_len),
                    None => p,
                },
                Role::NonVisible { evader, certificate, travelled } if travelled < certificate.path.length => {
                    let t = (travelled + step_len).min(certificate.path.length);
                    if let Role::NonVisible { travelled, .. } = &mut self.roles[i] {
                        *travelled = t;
                    }
                    let _ = evader;
                    certificate.path.point_at(t)
                }
                Role::NonVisible { evader, .. } => {
                    self.goal_visible_move(&scn, i, &[i], evader, &mut coalition_witness, &mut safe_records, &mut events)
                }
                Role::GoalVisible { evader, coalition } => {
                    self.goal_visible_move(&scn, i, &coalition, evader, &mut coalition_witness, &mut safe_records, &mut events)
                }
            };
            targets[i] = next;
        }

        let mut evader_targets = self.evaders.clone();
        for j in 0..self.evaders.len() {
            if !self.status[j].is_active() {
                continue;
            }
            let Some(field) = &ef[j] else { continue };
            let pursuers: Vec<(&DistanceField<'_>, f64, f64)> =
                (0..self.pursuers.len()).map(|i| (&pf[i], scn.alpha(i, j), scn.pursuers[i].capture_radius)).collect();
            let view = EvaderView { goal: &scn.goal, field, pursuers: &pursuers };
            let e = self.evaders[j];
            let step_len = scn.evaders[j].speed * dt;
            evader_targets[j] = match self.brains[j].plan(&view) {
                Motion::Hold => e,
                Motion::Heading(u) => clip_move(&scn.space, e, u * step_len),
                Motion::Follow(path) => path.point_at(step_len),
            };
        }
        drop(pf);
        drop(ef);

        for (i, (&from, &to)) in self.pursuers.iter().zip(&targets).enumerate() {
            let lim = scn.pursuers[i].speed * dt * (1.0 + 1e-9) + 1e-12;
            if from.dist(to) > lim {
                return Err(self.fault(format!("pursuer {} moved {} > {}", i + 1, from.dist(to), lim)));
            }
            if !scn.space.contains(to) {
                return Err(self.fault(format!("pursuer {} left free space at {to}", i + 1)));
            }
        }
        for (j, &to) in evader_targets.iter().enumerate() {
            if !scn.space.contains(to) {
                return Err(self.fault(format!("evader {} left free space at {to}", j + 1)));
            }
        }
        self.pursuers = targets;
        self.evaders = evader_targets;
        self.step += 1;

        for i in 0..self.pursuers.len() {
            let Some(j) = self.roles[i].evader() else { continue };
            if !self.status[j].is_active() {
                continue;
            }
            let (p, e) = (self.pursuers[i], self.evaders[j]);
            if p.dist(e) <= scn.pursuers[i].capture_radius && scn.space.segment_free(p, e) {
                self.status[j] = EvaderStatus::Captured { by: i, step: self.step };
                events.push(format!("P{} captured E{}", i + 1, j + 1));
            }
        }
        for j in 0..self.evaders.len() {
            if self.status[j].is_active() && scn.goal.contains(self.evaders[j]) {
                self.status[j] = EvaderStatus::Arrived { step: self.step };
                events.push(format!("E{} reached the goal", j + 1));
                if self.defeat.iter().any(|d| d.evader == j) {
                    log::warn!("E{} reached the goal despite a defeat certificate", j + 1);
                    events.push(format!("E{} broke its defeat certificate", j + 1));
                }
            }
        }
        let before = self.defeat.len();
        let status = self.status.clone();
        self.defeat.retain(|d| status[d.evader].is_active() && !matches!(status[d.evader], EvaderStatus::Arrived { .. }));
        let resolved_changed = before != self.defeat.len();
        for role in self.roles.iter_mut() {
            if role.evader().is_some_and(|j| !status[j].is_active()) {
                *role = Role::Idle;
                self.needs_allocation = true;
            }
        }
        self.needs_allocation |= resolved_changed;

        let record = StepRecord {
            step: self.step,
            time: self.step as f64 * dt,
            pursuers: self.pursuers.clone(),
            evaders: self.evaders.clone(),
            status: self.status.clone(),
            assignments: self
                .roles
                .iter()
                .enumerate()
                .map(|(i, r)| AssignmentRecord { pursuer: i, evader: r.evader(), stage: r.stage(), controller: r.label().into() })
                .collect(),
            defeat: self.defeat.iter().map(|d| (d.coalition.clone(), d.evader, d.kind())).collect(),
            safe_distances: safe_records,
            allocation_ran: due,
            bip_optimal,
            events,
            lower_bound: self.lower_bound(),
        };
        self.history.push(record.clone());
        Ok(record)
    }

    #[allow(clippy::too_many_arguments)]
    fn goal_visible_move(
        &self,
        scn: &Scenario,
        i: usize,
        coalition: &[usize],
        evader: usize,
        cache: &mut Vec<(Vec<usize>, usize, Point2, f64)>,
        records: &mut Vec<SafeDistanceRecord>,
        events: &mut Vec<String>,
    ) -> Point2 {
        let p = self.pursuers[i];
        let step_len = scn.pursuers[i].speed * scn.sim.dt;
        let cached = cache.iter().find(|c| c.0 == coalition && c.1 == evader).map(|c| (c.2, c.3));
        let (witness, dist) = match cached {
            Some(w) => w,
            None => {
                let ps: Vec<Point2> = coalition.iter().map(|&k| self.pursuers[k]).collect();
                let alphas: Vec<f64> = coalition.iter().map(|&k| scn.alpha(k, evader)).collect();
                let radii: Vec<f64> = coalition.iter().map(|&k| scn.pursuers[k].capture_radius).collect();
                match safe_distance(&ps, self.evaders[evader], &alphas, &radii, &scn.goal) {
                    Ok(d) => {
                        cache.push((coalition.to_vec(), evader, d.x_i, d.distance));
                        records.push(SafeDistanceRecord { coalition: coalition.to_vec(), evader, safe_distance: d.distance });
                        (d.x_i, d.distance)
                    }
                    Err(e) => {
                        events.push(format!("safe distance failed for E{}: {e}", evader + 1));
                        (self.evaders[evader], f64::NAN)
                    }
                }
            }
        };
        let _ = dist;
        let gcp = match construct_gcp(p, &scn.space, &scn.goal) {
            Ok(g) => g,
            Err(_) => {
                // lost sight of the goal: fall back to a straight step toward the witness
                let u = (witness - p).normalized(EPS).unwrap_or_default();
                return clip_move(&scn.space, p, u * step_len);
            }
        };
        let u = goalvis_control(p, witness, &gcp.range);
        let reach = p.dist(witness).min(step_len);
        let len = stay_inside(&gcp.polygon, p, u, reach);
        let (to, clipped) = clip_move_flagged(&scn.space, p, u * len);
        if clipped {
            log::warn!("P{} goal-visible step clipped at {p}", i + 1);
            events.push(format!("P{} clipped", i + 1));
        }
        to
    }

    /// Builds the four matchings on top of the (possibly unchanged) defeat set.
    fn allocate(&mut self, view: &GameView<'_, '_>, wg: &WinningGraph) {
        let np = self.pursuers.len();
        let ne = self.evaders.len();
        let old = std::mem::replace(&mut self.roles, vec![Role::Idle; np]);
        let mut matched_evader = vec![false; ne];
        for d in &self.defeat {
            matched_evader[d.evader] = true;
            for &i in &d.coalition {
                let keep = match (&old[i], &d.certificate) {
                    (Role::Onsite { evader, stage: Stage::Defeat, .. }, Certificate::Onsite(_)) => *evader == d.evader,
                    (Role::NonVisible { evader, .. }, Certificate::NonVisible(_)) => *evader == d.evader,
                    (Role::GoalVisible { evader, coalition }, Certificate::GoalVisible { .. }) => {
                        *evader == d.evader && *coalition == d.coalition
                    }
                    _ => false,
                };
                self.roles[i] = if keep {
                    old[i].clone()
                } else {
                    match &d.certificate {
                        Certificate::Onsite(snaps) => {
                            let k = d.coalition.iter().position(|&m| m == i).unwrap_or(0);
                            Role::Onsite { evader: d.evader, stage: Stage::Defeat, snapshot: snaps[k] }
                        }
                        Certificate::GoalVisible { .. } => Role::GoalVisible { evader: d.evader, coalition: d.coalition.clone() },
                        Certificate::NonVisible(c) => Role::NonVisible { evader: d.evader, certificate: c.clone(), travelled: 0.0 },
                    }
                };
            }
        }

        for i in 0..np {
            if self.roles[i] != Role::Idle {
                continue;
            }
            if let Role::Onsite { evader, stage: Stage::Enhanced, .. } = &old[i] {
                if view.active[*evader] {
                    matched_evader[*evader] = true;
                    self.roles[i] = old[i].clone();
                    continue;
                }
            }
            let best = wg
                .edges
                .iter()
                .filter(|e| e.coalition == [i] && e.kind() == 1)
                .min_by(|a, b| {
                    let da = self.pursuers[i].dist(self.evaders[a.evader]);
                    let db = self.pursuers[i].dist(self.evaders[b.evader]);
                    da.total_cmp(&db).then(a.evader.cmp(&b.evader))
                });
            if let Some(e) = best {
                let Certificate::Onsite(snaps) = &e.certificate else { continue };
                self.roles[i] = Role::Onsite { evader: e.evader, stage: Stage::Enhanced, snapshot: snaps[0] };
                matched_evader[e.evader] = true;
            }
        }

        let free_p: Vec<usize> = (0..np).filter(|&i| self.roles[i] == Role::Idle).collect();
        let open_e: Vec<usize> = (0..ne).filter(|&j| view.active[j] && !matched_evader[j]).collect();
        let adj: Vec<Vec<usize>> = free_p
            .iter()
            .map(|&i| {
                open_e
                    .iter()
                    .enumerate()
                    .filter(|(_, &j)| match &view.evader_fields[j] {
                        Some(ef) => check_evasion_winning(
                            &view.pursuer_fields[i],
                            ef,
                            view.scenario.alpha(i, j),
                            view.scenario.pursuers[i].capture_radius,
                            &view.scenario.goal,
                        )
                        .is_none(),
                        None => false,
                    })
                    .map(|(k, _)| k)
                    .collect()
            })
            .collect();
        for (a, b) in max_bipartite_matching(free_p.len(), open_e.len(), &adj) {
            let (i, j) = (free_p[a], open_e[b]);
            self.roles[i] = Role::Pursuit { evader: j, stage: Stage::NonDominated };
            matched_evader[j] = true;
        }

        let actives: Vec<usize> = (0..ne).filter(|&j| view.active[j]).collect();
        for i in 0..np {
            if self.roles[i] != Role::Idle {
                continue;
            }
            let closest = |pool: &mut dyn Iterator<Item = usize>| -> Option<usize> {
                pool.map(|j| (view.pursuer_fields[i].distance_to(self.evaders[j]), j))
                    .filter(|(d, _)| d.is_finite())
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                    .map(|(_, j)| j)
            };
            let pick = closest(&mut actives.iter().copied().filter(|&j| !matched_evader[j]))
                .or_else(|| closest(&mut actives.iter().copied()));
            if let Some(j) = pick {
                self.roles[i] = Role::Pursuit { evader: j, stage: Stage::Closest };
            }
        }
    }

    /// Runs until every evader is resolved or `max_steps` have elapsed.
    pub fn run(&mut self, max_steps: usize) -> Result<RunSummary> {
        while self.step < max_steps && !self.finished() {
            self.step()?;
        }
        Ok(self.summary())
    }

    pub fn summary(&self) -> RunSummary {
        let lbs: Vec<usize> = self.history.iter().map(|r| r.lower_bound).collect();
        RunSummary {
            steps: self.step,
            initial_lower_bound: self.initial_lower_bound.unwrap_or(0),
            final_lower_bound: self.lower_bound(),
            captured: self.captured_count(),
            arrived: self.status.iter().filter(|s| matches!(s, EvaderStatus::Arrived { .. })).count(),
            status: self.status.clone(),
            lower_bound_monotone: lbs.windows(2).all(|w| w[0] <= w[1]),
        }
    }
}

/// Longest step up to `len` along unit `u` that stays in the convex polygon.
fn stay_inside(poly: &Polygon, p: Point2, u: Point2, len: f64) -> f64 {
    if poly.contains(p + u * len) {
        return len;
    }
    if !poly.contains(p) {
        return len;
    }
    let (mut lo, mut hi) = (0.0, len);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if poly.contains(p + u * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn free_prefix(space: &FreeSpace, from: Point2, d: Point2) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if space.segment_free(from, from + d * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn nearest_edge_direction(space: &FreeSpace, p: Point2) -> Option<Point2> {
    space
        .obstacles
        .iter()
        .chain(std::iter::once(&space.arena))
        .flat_map(|o| o.edges())
        .map(|(a, b)| (point_segment_distance(p, a, b), b - a))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .and_then(|(_, d)| d.normalized(0.0))
}

/// Moves by `d`, stopping at the first obstacle contact and sliding along the
/// touched edge with the remainder.
pub fn clip_move(space: &FreeSpace, from: Point2, d: Point2) -> Point2 {
    clip_move_flagged(space, from, d).0
}

/// As [`clip_move`], also reporting whether the step was shortened.
pub fn clip_move_flagged(space: &FreeSpace, from: Point2, d: Point2) -> (Point2, bool) {
    let to = from + d;
    if space.segment_free(from, to) {
        return (settle(space, to), false);
    }
    (slide(space, from, d), true)
}

fn slide(space: &FreeSpace, from: Point2, d: Point2) -> Point2 {
    let t = free_prefix(space, from, d);
    let p1 = from + d * t;
    let rest = d * (1.0 - t);
    let Some(dir) = nearest_edge_direction(space, p1) else { return p1 };
    let slide = dir * rest.dot(dir);
    let t2 = free_prefix(space, p1, slide);
    settle(space, p1 + slide * t2)
}

/// Lifts a point that rounding left marginally inside an obstacle back onto the
/// outer side of the nearest edge.
fn settle(space: &FreeSpace, mut q: Point2) -> Point2 {
    for o in &space.obstacles {
        if o.signed_distance(q) >= 0.0 {
            continue;
        }
        let Some((a, b)) = o.edges().min_by(|x, y| point_segment_distance(q, x.0, x.1).total_cmp(&point_segment_distance(q, y.0, y.1)))
        else {
            continue;
        };
        let out = (b - a).perp_cw().normalized(0.0).unwrap_or_default();
        q = project_onto_segment(q, a, b) + out * 1e-10;
    }
    q
}

/// Unique set of evaders currently certified as defeated.
pub fn defeated_evaders(defeat: &[DefeatEntry]) -> BTreeSet<usize> {
    defeat.iter().map(|d| d.evader).collect()
}

/// Path walked by a pursuer in a non-goal-visible approach, for renderers.
pub fn approach_path(role: &Role) -> Option<&EspPath> {
    match role {
        Role::NonVisible { certificate, .. } => Some(&certificate.path),
        _ => None,
    }
}
