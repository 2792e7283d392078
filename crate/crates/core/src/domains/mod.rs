//! The two experiment domains and their domain-specific pieces.

pub mod blockwords;
pub mod dkg;
pub mod ff;

pub use blockwords::{corrupt_goal, WordGoal, WordPermutation};
pub use dkg::{dkg_corrupt, GridSpec, MazeDistance};
pub use ff::FfHeuristic;

use thiserror::Error;

use crate::rng::SimRng;
use crate::task::GoalSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("invalid grid: {0}")]
    Layout(String),
    #[error("invalid word goal: {0}")]
    Word(String),
}

/// Goal-confusion channel used by the agent's goal transition.
pub trait GoalCorruption: Send + Sync {
    fn corrupt(&self, g0: &GoalSpec, rng: &mut SimRng) -> GoalSpec;

    /// The corruptions of `g0` (each equally likely), when small enough to list.
    fn support(&self, g0: &GoalSpec) -> Option<Vec<GoalSpec>>;
}

/// Identity corruption, for domains without goal confusion.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCorruption;

impl GoalCorruption for NoCorruption {
    fn corrupt(&self, g0: &GoalSpec, _: &mut SimRng) -> GoalSpec {
        dkg_corrupt(g0)
    }

    fn support(&self, g0: &GoalSpec) -> Option<Vec<GoalSpec>> {
        Some(vec![g0.clone()])
    }
}
