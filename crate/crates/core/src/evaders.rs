//! Evasion certificates, ESP pure pursuit, and the scripted evader behaviours.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::esp::{DistanceField, EspPath};
use crate::geometry::{Point2, Polygon};

pub const DEFAULT_HORIZON: usize = 10;

/// First goal vertex (in vertex order) the evader reaches strictly before the
/// pursuer can close to capture range.
pub fn check_evasion_winning(
    pursuer_field: &DistanceField<'_>,
    evader_field: &DistanceField<'_>,
    alpha: f64,
    capture_radius: f64,
    goal: &Polygon,
) -> Option<Point2> {
    goal.vertices().iter().copied().find(|&v| {
        let de = evader_field.distance_to(v);
        de.is_finite() && pursuer_field.distance_to(v) - capture_radius > alpha * de
    })
}

/// Shortest path from the pursuer to the evader; pure pursuit walks along it.
pub fn esp_pure_path(pursuer_field: &DistanceField<'_>, evader: Point2) -> Option<EspPath> {
    pursuer_field.path_to(evader)
}

/// Unit heading along the first leg of the pursuer's shortest path to the evader.
pub fn esp_pure_control(pursuer_field: &DistanceField<'_>, evader: Point2) -> Point2 {
    esp_pure_path(pursuer_field, evader).and_then(|p| p.first_heading()).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EvaderPolicy {
    /// Uniform random heading, redrawn every `horizon` steps.
    RandomWalk { seed: u64, horizon: usize },
    /// Follows shortest paths to a goal vertex: a certified one if any, else the nearest.
    EspGreedy,
    /// Replays headings (radians), one per step, then stops.
    Scripted { headings: Vec<f64> },
}

/// How a player wants to move this step.
#[derive(Clone, Debug, PartialEq)]
pub enum Motion {
    /// Unit (or shorter) heading; the step is clipped against obstacles.
    Heading(Point2),
    /// Walk along a polyline for one step's worth of arc length.
    Follow(EspPath),
    Hold,
}

/// What an evader may observe when choosing its motion.
pub struct EvaderView<'a, 'g> {
    pub goal: &'a Polygon,
    pub field: &'a DistanceField<'g>,
    /// Field, speed ratio and capture radius of every pursuer.
    pub pursuers: &'a [(&'a DistanceField<'g>, f64, f64)],
}

#[derive(Clone, Debug)]
pub struct EvaderBrain {
    policy: EvaderPolicy,
    rng: ChaCha8Rng,
    heading: Point2,
    steps: usize,
    target: Option<Point2>,
}

impl EvaderBrain {
    pub fn new(policy: EvaderPolicy, scenario_seed: u64, index: usize) -> Self {
        let seed = match &policy {
            EvaderPolicy::RandomWalk { seed, .. } => *seed,
            _ => 0,
        };
        let mixed = seed ^ scenario_seed.rotate_left(17) ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Self { policy, rng: ChaCha8Rng::seed_from_u64(mixed), heading: Point2::ORIGIN, steps: 0, target: None }
    }

    pub fn policy(&self) -> &EvaderPolicy {
        &self.policy
    }

    pub fn target(&self) -> Option<Point2> {
        self.target
    }

    pub fn plan(&mut self, view: &EvaderView<'_, '_>) -> Motion {
        let k = self.steps;
        self.steps += 1;
        match &self.policy {
            EvaderPolicy::RandomWalk { horizon, .. } => {
                if k.is_multiple_of((*horizon).max(1)) {
                    let theta: f64 = self.rng.gen_range(0.0..std::f64::consts::TAU);
                    self.heading = Point2::from_angle(theta);
                }
                Motion::Heading(self.heading)
            }
            EvaderPolicy::Scripted { headings } => match headings.get(k) {
                Some(&theta) => Motion::Heading(Point2::from_angle(theta)),
                None => Motion::Hold,
            },
            EvaderPolicy::EspGreedy => {
                if self.target.is_none() {
                    self.target = choose_target(view);
                }
                match self.target.and_then(|t| view.field.path_to(t)) {
                    Some(path) => Motion::Follow(path),
                    None => Motion::Hold,
                }
            }
        }
    }
}

fn choose_target(view: &EvaderView<'_, '_>) -> Option<Point2> {
    let certified = view.goal.vertices().iter().copied().find(|&v| {
        let de = view.field.distance_to(v);
        de.is_finite() && view.pursuers.iter().all(|(pf, alpha, r)| pf.distance_to(v) - r > alpha * de)
    });
    certified.or_else(|| {
        view.goal
            .vertices()
            .iter()
            .copied()
            .map(|v| (view.field.distance_to(v), v))
            .filter(|(d, _)| d.is_finite())
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, v)| v)
    })
}
