//! Scenario files (versioned TOML) and the validated in-memory scenario.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaders::{EvaderPolicy, DEFAULT_HORIZON};
use crate::geometry::{pt, segments_touch, FreeSpace, Point2, Polygon};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_MAX_STEPS: usize = 2000;
pub const DEFAULT_BIP_CAP_MS: u64 = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub arena: Vec<[f64; 2]>,
    pub goal: Vec<[f64; 2]>,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub obstacles: Vec<ObstacleEntry>,
    pub pursuers: Vec<PursuerEntry>,
    pub evaders: Vec<EvaderEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allocation_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bip_time_cap_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleEntry {
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PursuerEntry {
    pub position: [f64; 2],
    pub speed: f64,
    pub capture_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaderEntry {
    pub position: [f64; 2],
    pub speed: f64,
    pub policy: PolicyEntry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyEntry {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub headings: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PursuerSpec {
    pub position: Point2,
    pub speed: f64,
    pub capture_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaderSpec {
    pub position: Point2,
    pub speed: f64,
    pub policy: EvaderPolicy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Integration step.
    pub dt: f64,
    /// Onsite margin added to the Apollonius radius.
    pub delta: f64,
    pub max_steps: usize,
    pub seed: u64,
    /// Re-run the winning check and allocation every this many steps.
    pub allocation_stride: usize,
    pub bip_time_cap_ms: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub space: FreeSpace,
    pub goal: Polygon,
    pub pursuers: Vec<PursuerSpec>,
    pub evaders: Vec<EvaderSpec>,
    pub sim: SimConfig,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidScenario(msg.into())
}

fn points(raw: &[[f64; 2]]) -> Vec<Point2> {
    raw.iter().map(|p| pt(p[0], p[1])).collect()
}

fn raw(p: Point2) -> [f64; 2] {
    [p.x, p.y]
}

fn polygon(raw: &[[f64; 2]], what: &str) -> Result<Polygon> {
    Polygon::new(points(raw)).map_err(|e| invalid(format!("{what}: {e}")))
}

fn polygons_overlap(a: &Polygon, b: &Polygon) -> bool {
    a.edges().any(|(p, q)| b.edges().any(|(r, s)| segments_touch(p, q, r, s)))
        || b.contains(a.vertex(0))
        || a.contains(b.vertex(0))
}

impl Scenario {
    pub fn alpha(&self, pursuer: usize, evader: usize) -> f64 {
        self.pursuers[pursuer].speed / self.evaders[evader].speed
    }

    pub fn max_speed(&self) -> f64 {
        self.pursuers.iter().map(|p| p.speed).chain(self.evaders.iter().map(|e| e.speed)).fold(0.0, f64::max)
    }

    pub fn from_file(file: &ScenarioFile) -> Result<Self> {
        if file.version != FORMAT_VERSION {
            return Err(invalid(format!("unsupported scenario version {} (expected {FORMAT_VERSION})", file.version)));
        }
        let arena = polygon(&file.arena, "arena")?;
        let goal = polygon(&file.goal, "goal")?;
        if !goal.is_convex() {
            return Err(invalid("goal polygon not convex"));
        }
        if !goal.vertices().iter().all(|&v| arena.contains(v)) {
            return Err(invalid("goal polygon leaves the arena"));
        }
        let mut obstacles = Vec::new();
        for (i, o) in file.obstacles.iter().enumerate() {
            let poly = polygon(&o.vertices, &format!("obstacles[{i}]"))?;
            if !poly.vertices().iter().all(|&v| arena.contains(v)) {
                return Err(invalid(format!("obstacles[{i}] leaves the arena")));
            }
            if polygons_overlap(&poly, &goal) {
                return Err(invalid(format!("obstacles[{i}] touches the goal")));
            }
            for (j, other) in obstacles.iter().enumerate() {
                if polygons_overlap(&poly, other) {
                    return Err(invalid(format!("obstacles[{i}] touches obstacles[{j}]")));
                }
            }
            obstacles.push(poly);
        }
        let space = FreeSpace::new(arena, obstacles);
        if file.pursuers.is_empty() || file.evaders.is_empty() {
            return Err(invalid("need at least one pursuer and one evader"));
        }
        let pursuers: Vec<PursuerSpec> = file
            .pursuers
            .iter()
            .map(|p| PursuerSpec { position: pt(p.position[0], p.position[1]), speed: p.speed, capture_radius: p.capture_radius })
            .collect();
        let mut evaders = Vec::new();
        for (j, e) in file.evaders.iter().enumerate() {
            let policy = match e.policy.kind.as_str() {
                "random-walk" => EvaderPolicy::RandomWalk {
                    seed: e.policy.seed.unwrap_or(j as u64),
                    horizon: e.policy.horizon.unwrap_or(DEFAULT_HORIZON),
                },
                "esp-greedy" => EvaderPolicy::EspGreedy,
                "scripted" => EvaderPolicy::Scripted { headings: e.policy.headings.clone().unwrap_or_default() },
                other => return Err(invalid(format!("evaders[{j}].policy.kind: unknown policy \"{other}\""))),
            };
            if matches!(policy, EvaderPolicy::RandomWalk { horizon: 0, .. }) {
                return Err(invalid(format!("evaders[{j}].policy.horizon must be positive")));
            }
            evaders.push(EvaderSpec { position: pt(e.position[0], e.position[1]), speed: e.speed, policy });
        }
        for (i, p) in pursuers.iter().enumerate() {
            if !(p.speed > 0.0 && p.speed.is_finite()) {
                return Err(invalid(format!("pursuers[{i}].speed must be positive")));
            }
            if !space.contains(p.position) {
                return Err(invalid(format!("pursuers[{i}].position {} is not in free space", p.position)));
            }
        }
        for (j, e) in evaders.iter().enumerate() {
            if !(e.speed > 0.0 && e.speed.is_finite()) {
                return Err(invalid(format!("evaders[{j}].speed must be positive")));
            }
            if !space.contains(e.position) {
                return Err(invalid(format!("evaders[{j}].position {} is not in free space", e.position)));
            }
            if goal.contains(e.position) {
                return Err(invalid(format!("evaders[{j}].position {} starts in the goal", e.position)));
            }
            for (i, p) in pursuers.iter().enumerate() {
                if p.speed <= e.speed {
                    return Err(invalid(format!("speed ratio of pursuers[{i}] to evaders[{j}] must exceed 1")));
                }
            }
        }
        let v_max = pursuers.iter().map(|p| p.speed).chain(evaders.iter().map(|e| e.speed)).fold(0.0, f64::max);
        let dt = file.sim.dt.unwrap_or(0.01 * space.diameter() / v_max);
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("sim.dt must be positive"));
        }
        let min_radius = 2.0 * v_max * dt;
        for (i, p) in pursuers.iter().enumerate() {
            if !(p.capture_radius > 0.0) {
                return Err(invalid(format!("pursuers[{i}].capture_radius must be positive")));
            }
            if p.capture_radius < min_radius * (1.0 - 1e-9) {
                return Err(invalid(format!(
                    "pursuers[{i}].capture_radius {} is below 2 * max speed * dt = {min_radius}",
                    p.capture_radius
                )));
            }
        }
        let delta = file.sim.delta.unwrap_or(0.05 * goal.diameter());
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("sim.delta must be positive"));
        }
        let sim = SimConfig {
            dt,
            delta,
            max_steps: file.sim.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
            seed: file.sim.seed.unwrap_or(0),
            allocation_stride: file.sim.allocation_stride.unwrap_or(1),
            bip_time_cap_ms: file.sim.bip_time_cap_ms.unwrap_or(DEFAULT_BIP_CAP_MS),
        };
        if sim.allocation_stride == 0 {
            return Err(invalid("sim.allocation_stride must be positive"));
        }
        Ok(Self { name: file.name.clone().unwrap_or_default(), space, goal, pursuers, evaders, sim })
    }

    /// File form with every default spelled out.
    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            version: FORMAT_VERSION,
            name: (!self.name.is_empty()).then(|| self.name.clone()),
            arena: self.space.arena.vertices().iter().map(|&p| raw(p)).collect(),
            goal: self.goal.vertices().iter().map(|&p| raw(p)).collect(),
            sim: SimSection {
                dt: Some(self.sim.dt),
                delta: Some(self.sim.delta),
                max_steps: Some(self.sim.max_steps),
                seed: Some(self.sim.seed),
                allocation_stride: Some(self.sim.allocation_stride),
                bip_time_cap_ms: Some(self.sim.bip_time_cap_ms),
            },
            obstacles: self
                .space
                .obstacles
                .iter()
                .map(|o| ObstacleEntry { vertices: o.vertices().iter().map(|&p| raw(p)).collect() })
                .collect(),
            pursuers: self
                .pursuers
                .iter()
                .map(|p| PursuerEntry { position: raw(p.position), speed: p.speed, capture_radius: p.capture_radius })
                .collect(),
            evaders: self
                .evaders
                .iter()
                .map(|e| EvaderEntry {
                    position: raw(e.position),
                    speed: e.speed,
                    policy: match &e.policy {
                        EvaderPolicy::RandomWalk { seed, horizon } => PolicyEntry {
                            kind: "random-walk".into(),
                            seed: Some(*seed),
                            horizon: Some(*horizon),
                            headings: None,
                        },
                        EvaderPolicy::EspGreedy => {
                            PolicyEntry { kind: "esp-greedy".into(), seed: None, horizon: None, headings: None }
                        }
                        EvaderPolicy::Scripted { headings } => PolicyEntry {
                            kind: "scripted".into(),
                            seed: None,
                            horizon: None,
                            headings: Some(headings.clone()),
                        },
                    },
                })
                .collect(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(&self.to_file()).expect("scenario files always serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidScenario(m) => invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
