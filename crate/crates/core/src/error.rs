use thiserror::Error;

use crate::geometry::Point2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("point {0} is not in free space")]
    OutsideFreeSpace(Point2),
    #[error("no obstacle-free path from {from} to {to}")]
    Unreachable { from: Point2, to: Point2 },
    #[error("sector span {0} exceeds pi")]
    NonConvexSector(f64),
    #[error("solver stopped after {iterations} iterations without converging (last step {last_step:e})")]
    SolverFailure { iterations: usize, last_step: f64 },
    #[error("winning region is degenerate")]
    RegionDegenerate,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("simulation fault at step {step}: {message}")]
    SimulationFault { step: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
