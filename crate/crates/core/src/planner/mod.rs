//! The agent's internal planner: budgeted probabilistic A*, its exact
//! unbounded limit, budget sampling, and the state-space value function.

mod astar;
mod budget;
mod plan;
mod value;

pub use astar::{expand_distribution, optimal_astar, probabilistic_astar, SearchOutcome, TraceRecord};
pub use budget::{nb_pmf, sample_budget, BudgetDist};
pub use plan::PartialPlan;
pub use value::{value_function, StateSpace, DEFAULT_STATE_LIMIT};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("goal `{0}` is unreachable from the start state")]
    Unreachable(String),
    #[error("reachable state space exceeds the limit of {limit} states")]
    StateSpaceTooLarge { limit: usize },
    #[error("invalid search parameters: {0}")]
    InvalidParams(String),
}

/// Node-expansion budget for one search call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Budget {
    Limited(u32),
    Unbounded,
}

impl Budget {
    fn allows(self, expansions: u32) -> bool {
        match self {
            Budget::Limited(n) => expansions < n,
            Budget::Unbounded => true,
        }
    }
}

/// How the next frontier node is chosen.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Expansion {
    /// Sample with probability proportional to `exp(-f / gamma)`.
    Boltzmann { gamma: f64 },
    /// Lowest f, then highest path cost, then state order.
    Argmin,
}

impl Expansion {
    pub fn validate(self) -> Result<(), PlanError> {
        match self {
            Expansion::Boltzmann { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(PlanError::InvalidParams(format!("gamma must be positive, got {gamma}")))
            }
            _ => Ok(()),
        }
    }
}

/// Search settings of the agent's planner. `budget` says how each call's
/// expansion budget is obtained.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SearchParams {
    pub expansion: Expansion,
    pub budget: BudgetDist,
}

impl SearchParams {
    pub fn bounded(gamma: f64, r: u32, q: f64) -> Self {
        SearchParams {
            expansion: Expansion::Boltzmann { gamma },
            budget: BudgetDist::NegBinomial { r, q },
        }
    }

    /// Exact-argmin search without a budget.
    pub fn optimal() -> Self {
        SearchParams {
            expansion: Expansion::Argmin,
            budget: BudgetDist::Unbounded,
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        self.expansion.validate()?;
        self.budget.validate()
    }
}
