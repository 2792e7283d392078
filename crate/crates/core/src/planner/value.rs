use std::collections::{HashMap, VecDeque};

use super::PlanError;
use crate::task::{ActionId, GoalSpec, State, Task};

/// Guard on forward enumeration of the reachable states.
pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

/// Explicit reachable state graph of a task.
#[derive(Debug, Clone)]
pub struct StateSpace {
    states: Vec<State>,
    index: HashMap<State, usize>,
    successors: Vec<Vec<(ActionId, usize)>>,
}

impl StateSpace {
    pub fn enumerate(task: &Task, from: &State, limit: usize) -> Result<Self, PlanError> {
        let mut states = vec![from.clone()];
        let mut index = HashMap::from([(from.clone(), 0)]);
        let mut successors = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let s = states[i].clone();
            let mut out = Vec::new();
            for a in task.available_actions(&s) {
                let n = task.apply_unchecked(&s, a);
                let j = match index.get(&n) {
                    Some(&j) => j,
                    None => {
                        if states.len() >= limit {
                            return Err(PlanError::StateSpaceTooLarge { limit });
                        }
                        states.push(n.clone());
                        index.insert(n, states.len() - 1);
                        states.len() - 1
                    }
                };
                out.push((a, j));
            }
            successors.push(out);
            i += 1;
        }
        Ok(StateSpace {
            states,
            index,
            successors,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn index_of(&self, s: &State) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn successors(&self, i: usize) -> &[(ActionId, usize)] {
        &self.successors[i]
    }
}

/// `V(s) = -(steps to the nearest goal state)` for every enumerated state,
/// `-inf` where no goal state is reachable. Computed by a backward
/// breadth-first search from the goal states.
pub fn value_function(task: &Task, space: &StateSpace, g: &GoalSpec) -> Vec<f64> {
    let n = space.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &(_, j) in space.successors(i) {
            preds[j].push(i);
        }
    }
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for (i, s) in space.states().iter().enumerate() {
        if task.satisfies(s, g) {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(j) = queue.pop_front() {
        for &i in &preds[j] {
            if dist[i] == u32::MAX {
                dist[i] = dist[j] + 1;
                queue.push_back(i);
            }
        }
    }
    dist.into_iter()
        .map(|d| if d == u32::MAX { f64::NEG_INFINITY } else { -(d as f64) })
        .collect()
}
