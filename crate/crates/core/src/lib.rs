//! Boundedly rational agents (goal confusion, budgeted noisy planning,
//! execution slips) and online Bayesian inference of their goals.

pub mod agent;
pub mod domains;
pub mod heuristic;
pub mod inference;
pub mod pddl;
pub mod planner;
pub mod presets;
pub mod rng;
pub mod stimulus;
pub mod task;
