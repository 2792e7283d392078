use std::sync::Arc;

use rayon::prelude::*;

use crate::planner::{value_function, PlanError, StateSpace, DEFAULT_STATE_LIMIT};
use crate::task::{ActionId, GoalSpec, State, Task};

/// Softmax of `alpha * (-1 + V(s'))` over successor values. If every value
/// is `-inf` the result is uniform.
pub fn boltzmann_weights(successor_values: &[f64], alpha: f64) -> Vec<f64> {
    let n = successor_values.len();
    let vmax = successor_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if vmax == f64::NEG_INFINITY {
        return vec![1.0 / n as f64; n];
    }
    if alpha.is_infinite() {
        let best = successor_values.iter().filter(|&&v| v == vmax).count() as f64;
        return successor_values.iter().map(|&v| if v == vmax { 1.0 / best } else { 0.0 }).collect();
    }
    let w: Vec<f64> = successor_values.iter().map(|&v| (alpha * (v - vmax)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Exact values for every goal over the reachable state graph.
#[derive(Debug, Clone)]
pub struct ValueTables {
    space: Arc<StateSpace>,
    /// goal index -> value per state index
    values: Vec<Vec<f64>>,
}

impl ValueTables {
    pub fn build(task: &Task) -> Result<Self, PlanError> {
        Self::build_with_limit(task, DEFAULT_STATE_LIMIT)
    }

    pub fn build_with_limit(task: &Task, limit: usize) -> Result<Self, PlanError> {
        let space = Arc::new(StateSpace::enumerate(task, task.initial_state(), limit)?);
        let values = task.goals().par_iter().map(|g| value_function(task, &space, g)).collect();
        Ok(ValueTables { space, values })
    }

    pub fn value(&self, goal: usize, s: &State) -> f64 {
        self.space
            .index_of(s)
            .map_or(f64::NEG_INFINITY, |i| self.values[goal][i])
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }
}

/// Boltzmann action distribution at `s` for goal number `goal`. Goal states
/// are terminal, so a trajectory that continues past one is treated as
/// uniform.
pub fn boltzmann_policy(
    task: &Task,
    s: &State,
    goal: usize,
    g: &GoalSpec,
    alpha: f64,
    tables: &ValueTables,
) -> Vec<(ActionId, f64)> {
    let actions = task.available_actions(s);
    if task.satisfies(s, g) {
        let n = actions.len() as f64;
        return actions.into_iter().map(|a| (a, 1.0 / n)).collect();
    }
    let values: Vec<f64> = actions
        .iter()
        .map(|&a| tables.value(goal, &task.apply_unchecked(s, a)))
        .collect();
    actions.into_iter().zip(boltzmann_weights(&values, alpha)).collect()
}
