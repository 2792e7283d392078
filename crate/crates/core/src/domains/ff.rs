//! Relaxed-plan (FF) distance: build the delete-relaxed planning graph from
//! the current state, then extract a relaxed plan backwards, preferring the
//! achiever whose preconditions appear earliest.

use std::sync::Arc;

use crate::heuristic::{Heuristic, UNREACHABLE};
use crate::task::{ActionId, AtomId, GoalSpec, State, Task};

#[derive(Debug, Clone)]
pub struct FfHeuristic {
    task: Arc<Task>,
    /// atom -> actions with that atom as a positive precondition
    consumers: Vec<Vec<u32>>,
    /// atom -> actions adding it
    achievers: Vec<Vec<u32>>,
}

const INF: u32 = u32::MAX;

impl FfHeuristic {
    pub fn new(task: Arc<Task>) -> Self {
        let n = task.num_atoms();
        let mut consumers = vec![Vec::new(); n];
        let mut achievers = vec![Vec::new(); n];
        for a in 0..task.num_actions() as u32 {
            for &p in task.positive_preconditions(ActionId(a)) {
                consumers[p as usize].push(a);
            }
            for &p in task.add_effects(ActionId(a)) {
                achievers[p as usize].push(a);
            }
        }
        FfHeuristic {
            task,
            consumers,
            achievers,
        }
    }

    /// A relaxed plan ordered by graph layer, or `None` if the goal is not
    /// reachable even when deletes are ignored.
    pub fn relaxed_plan(&self, s: &State, g: &GoalSpec) -> Option<Vec<ActionId>> {
        let task = &*self.task;
        let n_atoms = task.num_atoms();
        let n_actions = task.num_actions();
        let mut atom_level = vec![INF; n_atoms];
        let mut action_level = vec![INF; n_actions];
        let mut missing: Vec<u32> = (0..n_actions as u32)
            .map(|a| task.positive_preconditions(ActionId(a)).len() as u32)
            .collect();

        let mut layer: Vec<AtomId> = s.facts.iter().collect();
        for &p in &layer {
            atom_level[p as usize] = 0;
        }
        let mut ready: Vec<u32> = (0..n_actions as u32).filter(|&a| missing[a as usize] == 0).collect();
        let goal_reached =
            |lvl: &[u32]| g.atoms().iter().all(|&p| lvl[p as usize] != INF);
        let mut depth = 0u32;
        loop {
            if goal_reached(&atom_level) {
                break;
            }
            // actions enabled by the atoms that first appeared in `layer`
            for &p in &layer {
                for &a in &self.consumers[p as usize] {
                    missing[a as usize] -= 1;
                    if missing[a as usize] == 0 {
                        ready.push(a);
                    }
                }
            }
            let mut next = Vec::new();
            for a in ready.drain(..) {
                if action_level[a as usize] != INF {
                    continue;
                }
                action_level[a as usize] = depth;
                for &q in task.add_effects(ActionId(a)) {
                    if atom_level[q as usize] == INF {
                        atom_level[q as usize] = depth + 1;
                        next.push(q);
                    }
                }
            }
            if next.is_empty() {
                return None;
            }
            layer = next;
            depth += 1;
        }

        let top = g.atoms().iter().map(|&p| atom_level[p as usize]).max().unwrap_or(0);
        let mut goals_at: Vec<Vec<AtomId>> = vec![Vec::new(); top as usize + 1];
        for &p in g.atoms() {
            goals_at[atom_level[p as usize] as usize].push(p);
        }
        // mark[p]: lowest layer at which p is made true by a chosen action
        let mut mark = vec![INF; n_atoms];
        let mut chosen = vec![false; n_actions];
        let mut plan: Vec<(u32, ActionId)> = Vec::new();
        for i in (1..=top).rev() {
            let goals = std::mem::take(&mut goals_at[i as usize]);
            for p in goals {
                if mark[p as usize] <= i {
                    continue;
                }
                let best = self.achievers[p as usize]
                    .iter()
                    .copied()
                    .filter(|&a| action_level[a as usize] == i - 1)
                    .min_by_key(|&a| {
                        task.positive_preconditions(ActionId(a))
                            .iter()
                            .map(|&q| atom_level[q as usize] as u64)
                            .sum::<u64>()
                    })
                    .expect("atom first reached at layer i has an achiever at layer i-1");
                if !chosen[best as usize] {
                    chosen[best as usize] = true;
                    plan.push((i - 1, ActionId(best)));
                }
                for &q in task.positive_preconditions(ActionId(best)) {
                    let l = atom_level[q as usize];
                    if l != 0 && mark[q as usize] > i - 1 {
                        goals_at[l as usize].push(q);
                    }
                }
                for &q in task.add_effects(ActionId(best)) {
                    mark[q as usize] = mark[q as usize].min(i - 1);
                }
            }
        }
        plan.sort_by_key(|(l, a)| (*l, *a));
        Some(plan.into_iter().map(|(_, a)| a).collect())
    }
}

impl Heuristic for FfHeuristic {
    fn estimate(&self, s: &State, g: &GoalSpec) -> f64 {
        match self.relaxed_plan(s, g) {
            Some(p) => p.len() as f64,
            None => UNREACHABLE,
        }
    }
}
