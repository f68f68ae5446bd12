//! Winning checks over pursuer coalitions, the capture-maximising integer program,
//! and the bipartite matchings used for the leftover players.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::convexopt::safe_distance;
use crate::error::Result;
use crate::esp::{DistanceField, EspGraph};
use crate::geometry::Point2;
use crate::nonvis::{check_nonvis_winning, NonvisCertificate};
use crate::onsite::{check_onsite_coalition, onsite_region, OnsiteSnapshot};
use crate::scenario::Scenario;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Certificate {
    /// One frozen Apollonius snapshot per coalition member.
    Onsite(Vec<OnsiteSnapshot>),
    GoalVisible { safe_distance: f64 },
    NonVisible(Box<NonvisCertificate>),
}

impl Certificate {
    /// Winning type: 1 onsite, 2 goal-visible, 3 non-goal-visible.
    pub fn kind(&self) -> u8 {
        match self {
            Certificate::Onsite(_) => 1,
            Certificate::GoalVisible { .. } => 2,
            Certificate::NonVisible(_) => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinEdge {
    /// Sorted pursuer indices, one or two of them.
    pub coalition: Vec<usize>,
    pub evader: usize,
    pub certificate: Certificate,
}

impl WinEdge {
    pub fn kind(&self) -> u8 {
        self.certificate.kind()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WinningGraph {
    pub edges: Vec<WinEdge>,
    /// Checks that errored; the corresponding edges are left out.
    pub failures: Vec<String>,
}

/// Everything the winning checks read at one instant.
pub struct GameView<'a, 'g> {
    pub scenario: &'a Scenario,
    pub graph: &'g EspGraph,
    pub pursuers: &'a [Point2],
    pub evaders: &'a [Point2],
    pub active: &'a [bool],
    pub pursuer_fields: &'a [DistanceField<'g>],
    pub evader_fields: &'a [Option<DistanceField<'g>>],
    pub goal_visible: &'a [bool],
    pub anchors: &'a [Point2],
}

impl GameView<'_, '_> {
    fn alphas(&self, coalition: &[usize], evader: usize) -> Vec<f64> {
        coalition.iter().map(|&i| self.scenario.alpha(i, evader)).collect()
    }

    fn goal_visible_check(&self, coalition: &[usize], evader: usize) -> Result<Option<Certificate>> {
        if !coalition.iter().all(|&i| self.goal_visible[i]) {
            return Ok(None);
        }
        let ps: Vec<Point2> = coalition.iter().map(|&i| self.pursuers[i]).collect();
        let radii: Vec<f64> = coalition.iter().map(|&i| self.scenario.pursuers[i].capture_radius).collect();
        let d = safe_distance(&ps, self.evaders[evader], &self.alphas(coalition, evader), &radii, &self.scenario.goal)?;
        Ok((d.distance >= 0.0).then_some(Certificate::GoalVisible { safe_distance: d.distance }))
    }
}

/// Onsite, then goal-visible, then (single pursuers only) non-goal-visible.
pub fn check_pursuit_winning(view: &GameView<'_, '_>, coalition: &[usize], evader: usize) -> Result<Option<Certificate>> {
    let scn = view.scenario;
    let e = view.evaders[evader];
    let ps: Vec<Point2> = coalition.iter().map(|&i| view.pursuers[i]).collect();
    let alphas = view.alphas(coalition, evader);
    if check_onsite_coalition(&ps, e, &alphas, scn.sim.delta, &scn.space, &scn.goal) {
        let snaps = ps
            .iter()
            .zip(&alphas)
            .map(|(&p, &a)| onsite_region(p, e, a, scn.sim.delta).map(|r| r.snapshot()))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Some(Certificate::Onsite(snaps)));
    }
    if let Some(c) = view.goal_visible_check(coalition, evader)? {
        return Ok(Some(c));
    }
    if let [i] = coalition {
        if !view.goal_visible[*i] {
            if let Some(ef) = &view.evader_fields[evader] {
                let cert = check_nonvis_winning(
                    view.graph,
                    &view.pursuer_fields[*i],
                    ef,
                    alphas[0],
                    scn.pursuers[*i].capture_radius,
                    &scn.goal,
                    view.anchors,
                )?;
                return Ok(cert.map(|c| Certificate::NonVisible(Box::new(c))));
            }
        }
    }
    Ok(None)
}

/// Single-pursuer edges of every type, plus goal-visible pair edges toward
/// evaders that no member can beat alone.
pub fn build_winning_graph(view: &GameView<'_, '_>) -> WinningGraph {
    let np = view.pursuers.len();
    let ne = view.evaders.len();
    let mut g = WinningGraph::default();
    let mut single = vec![vec![false; ne]; np];
    for i in 0..np {
        for j in (0..ne).filter(|&j| view.active[j]) {
            match check_pursuit_winning(view, &[i], j) {
                Ok(Some(c)) => {
                    single[i][j] = true;
                    g.edges.push(WinEdge { coalition: vec![i], evader: j, certificate: c });
                }
                Ok(None) => {}
                Err(e) => g.failures.push(format!("P{} vs E{}: {e}", i + 1, j + 1)),
            }
        }
    }
    for i in 0..np {
        for k in i + 1..np {
            for j in (0..ne).filter(|&j| view.active[j]) {
                if single[i][j] || single[k][j] {
                    continue;
                }
                match view.goal_visible_check(&[i, k], j) {
                    Ok(Some(c)) => g.edges.push(WinEdge { coalition: vec![i, k], evader: j, certificate: c }),
                    Ok(None) => {}
                    Err(e) => g.failures.push(format!("P{},P{} vs E{}: {e}", i + 1, k + 1, j + 1)),
                }
            }
        }
    }
    for f in &g.failures {
        log::warn!("winning check failed, edge dropped: {f}");
    }
    g
}

/// Edge as seen by the integer program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipEdge {
    pub coalition: Vec<usize>,
    pub evader: usize,
    pub kind: u8,
}

impl From<&WinEdge> for BipEdge {
    fn from(e: &WinEdge) -> Self {
        Self { coalition: e.coalition.clone(), evader: e.evader, kind: e.kind() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipSolution {
    /// Chosen edge indices, ascending.
    pub edges: Vec<usize>,
    /// False when the time cap forced the greedy fallback.
    pub optimal: bool,
}

#[derive(Clone, Debug)]
struct Best {
    count: usize,
    onsite: usize,
    ids: Vec<usize>,
}

impl Best {
    fn beats(&self, o: &Best) -> bool {
        (self.count, self.onsite) > (o.count, o.onsite) || ((self.count, self.onsite) == (o.count, o.onsite) && self.ids < o.ids)
    }
}

fn compatible(edges: &[BipEdge], chosen: &[usize], cand: usize) -> bool {
    chosen.iter().all(|&c| {
        edges[c].evader != edges[cand].evader && edges[c].coalition.iter().all(|p| !edges[cand].coalition.contains(p))
    })
}

/// Maximises the number of chosen edges with every evader and every pursuer used at
/// most once. Ties prefer more onsite edges, then the lexicographically smallest ids.
pub fn solve_bip(edges: &[BipEdge], cap: Duration) -> BipSolution {
    let mut evaders: Vec<usize> = edges.iter().map(|e| e.evader).collect();
    evaders.sort_unstable();
    evaders.dedup();
    let per_evader: Vec<Vec<usize>> =
        evaders.iter().map(|&j| (0..edges.len()).filter(|&k| edges[k].evader == j).collect()).collect();
    let mut best = Best { count: 0, onsite: 0, ids: Vec::new() };
    let mut chosen = Vec::new();
    let start = Instant::now();
    let mut nodes = 0usize;
    let mut timed_out = false;
    branch(edges, &per_evader, 0, &mut chosen, &mut best, &start, cap, &mut nodes, &mut timed_out);
    if timed_out {
        log::warn!("capture program hit its {} ms cap; using greedy allocation", cap.as_millis());
        return BipSolution { edges: greedy_bip(edges), optimal: false };
    }
    BipSolution { edges: best.ids, optimal: true }
}

#[allow(clippy::too_many_arguments)]
fn branch(
    edges: &[BipEdge],
    per_evader: &[Vec<usize>],
    depth: usize,
    chosen: &mut Vec<usize>,
    best: &mut Best,
    start: &Instant,
    cap: Duration,
    nodes: &mut usize,
    timed_out: &mut bool,
) {
    if *timed_out {
        return;
    }
    *nodes += 1;
    if (*nodes).is_multiple_of(1024) && start.elapsed() > cap {
        *timed_out = true;
        return;
    }
    let onsite = chosen.iter().filter(|&&k| edges[k].kind == 1).count();
    if depth == per_evader.len() {
        let mut ids = chosen.clone();
        ids.sort_unstable();
        let cand = Best { count: chosen.len(), onsite, ids };
        if cand.beats(best) {
            *best = cand;
        }
        return;
    }
    let rest = &per_evader[depth..];
    let open = |k: &usize| compatible(edges, chosen, *k);
    let count_bound = chosen.len() + rest.iter().filter(|ks| ks.iter().any(open)).count();
    let onsite_bound = onsite + rest.iter().filter(|ks| ks.iter().any(|k| edges[*k].kind == 1 && open(k))).count();
    if (count_bound, onsite_bound) < (best.count, best.onsite) {
        return;
    }
    for &k in &per_evader[depth] {
        if compatible(edges, chosen, k) {
            chosen.push(k);
            branch(edges, per_evader, depth + 1, chosen, best, start, cap, nodes, timed_out);
            chosen.pop();
        }
    }
    branch(edges, per_evader, depth + 1, chosen, best, start, cap, nodes, timed_out);
}

/// Onsite edges first, then by id, keeping whatever stays compatible.
pub fn greedy_bip(edges: &[BipEdge]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&k| (edges[k].kind != 1, k));
    let mut chosen: Vec<usize> = Vec::new();
    for k in order {
        if compatible(edges, &chosen, k) {
            chosen.push(k);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Maximum-cardinality bipartite matching by augmenting paths; returns `(left, right)` pairs.
pub fn max_bipartite_matching(n_left: usize, n_right: usize, adj: &[Vec<usize>]) -> Vec<(usize, usize)> {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner: Vec<Option<usize>> = vec![None; n_right];
    for u in 0..n_left {
        let mut seen = vec![false; n_right];
        augment(u, adj, &mut seen, &mut owner);
    }
    let mut out: Vec<(usize, usize)> = owner.iter().enumerate().filter_map(|(v, o)| o.map(|u| (u, v))).collect();
    out.sort_unstable();
    out
}
