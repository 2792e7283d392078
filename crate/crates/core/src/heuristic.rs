use crate::task::{GoalSpec, State};

/// Returned when a goal cannot be reached even optimistically.
pub const UNREACHABLE: f64 = f64::INFINITY;

/// Goal-distance estimate guiding the agent's search.
pub trait Heuristic: Send + Sync {
    fn estimate(&self, s: &State, g: &GoalSpec) -> f64;
}

/// Zero everywhere; turns A* into uniform-cost search.
#[derive(Debug, Clone, Copy, Default)]
pub struct Blind;

impl Heuristic for Blind {
    fn estimate(&self, _: &State, _: &GoalSpec) -> f64 {
        0.0
    }
}
