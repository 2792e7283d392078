use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use super::{Budget, Expansion, PlanError};
use crate::heuristic::Heuristic;
use crate::task::{ActionId, GoalSpec, State, Task};

/// One line of the optional expansion trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub expansion: u32,
    pub cost: u32,
    pub heuristic: f64,
    pub frontier: usize,
    pub state: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchOutcome {
    /// `(state, action)` pairs from the root to the returned node.
    pub plan: Vec<(State, ActionId)>,
    pub expansions: u32,
    pub reached_goal: bool,
    pub trace: Vec<TraceRecord>,
}

/// Selection probabilities over frontier f-values. In argmin mode the first
/// minimal entry gets all the mass, so callers order ties beforehand.
pub fn expand_distribution(f: &[f64], expansion: Expansion) -> Vec<f64> {
    assert!(!f.is_empty(), "frontier must be nonempty");
    let fmin = f.iter().copied().fold(f64::INFINITY, f64::min);
    match expansion {
        Expansion::Argmin => {
            let i = f.iter().position(|&x| x == fmin).unwrap_or(0);
            (0..f.len()).map(|j| if j == i { 1.0 } else { 0.0 }).collect()
        }
        Expansion::Boltzmann { gamma } => {
            let w: Vec<f64> = f.iter().map(|&x| (-(x - fmin) / gamma).exp()).collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|x| x / z).collect()
        }
    }
}

const ROOT: usize = usize::MAX;

struct Node {
    state: State,
    parent: usize,
    action: ActionId,
    cost: u32,
    h: f64,
}

impl Node {
    fn f(&self) -> f64 {
        self.cost as f64 + self.h
    }
}

/// Heap entry ordered so that the max is the lowest f, then the highest
/// cost, then the smallest state.
struct Entry {
    f: f64,
    cost: u32,
    state: State,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.cost.cmp(&other.cost))
            .then_with(|| other.state.cmp(&self.state))
            .then(other.node.cmp(&self.node))
    }
}

enum Frontier {
    Heap(BinaryHeap<Entry>),
    Pool { gamma: f64, live: Vec<usize> },
}

impl Frontier {
    fn len(&self) -> usize {
        match self {
            Frontier::Heap(h) => h.len(),
            Frontier::Pool { live, .. } => live.len(),
        }
    }

    fn push(&mut self, nodes: &[Node], i: usize) {
        match self {
            Frontier::Heap(h) => h.push(Entry {
                f: nodes[i].f(),
                cost: nodes[i].cost,
                state: nodes[i].state.clone(),
                node: i,
            }),
            Frontier::Pool { live, .. } => live.push(i),
        }
    }

    /// Re-announces a node whose cost dropped.
    fn update(&mut self, nodes: &[Node], i: usize) {
        if let Frontier::Heap(_) = self {
            self.push(nodes, i);
        }
    }

    fn pop<R: Rng + ?Sized>(&mut self, nodes: &[Node], rng: &mut R) -> Option<usize> {
        match self {
            Frontier::Heap(h) => {
                while let Some(e) = h.pop() {
                    // stale entries are left behind when a node's cost drops
                    if nodes[e.node].cost == e.cost {
                        return Some(e.node);
                    }
                }
                None
            }
            Frontier::Pool { gamma, live } => {
                if live.is_empty() {
                    return None;
                }
                let f: Vec<f64> = live.iter().map(|&i| nodes[i].f()).collect();
                let p = expand_distribution(&f, Expansion::Boltzmann { gamma: *gamma });
                let k = WeightedIndex::new(&p).map(|d| d.sample(rng)).unwrap_or(0);
                Some(live.swap_remove(k))
            }
        }
    }
}

fn path_to(nodes: &[Node], mut i: usize) -> Vec<(State, ActionId)> {
    let mut out = Vec::new();
    while nodes[i].parent != ROOT {
        let p = nodes[i].parent;
        out.push((nodes[p].state.clone(), nodes[i].action));
        i = p;
    }
    out.reverse();
    out
}

/// Budgeted A* whose next expansion is drawn from the frontier.
///
/// A popped node that satisfies `g`, or that would exceed the budget if
/// expanded, ends the search and the plan to it is returned. Exhausting the
/// frontier returns an empty plan. States with infinite heuristic value are
/// never added and closed states are never reopened.
#[allow(clippy::too_many_arguments)]
pub fn probabilistic_astar<R: Rng + ?Sized>(
    task: &Task,
    s0: &State,
    g: &GoalSpec,
    heuristic: &dyn Heuristic,
    expansion: Expansion,
    budget: Budget,
    rng: &mut R,
    trace: bool,
) -> SearchOutcome {
    let mut out = SearchOutcome::default();
    let h0 = heuristic.estimate(s0, g);
    if !h0.is_finite() {
        return out;
    }
    let mut nodes = vec![Node {
        state: s0.clone(),
        parent: ROOT,
        action: ActionId(0),
        cost: 0,
        h: h0,
    }];
    let mut frontier = match expansion {
        Expansion::Argmin => Frontier::Heap(BinaryHeap::new()),
        Expansion::Boltzmann { gamma } => Frontier::Pool {
            gamma,
            live: Vec::new(),
        },
    };
    frontier.push(&nodes, 0);
    let mut open: HashMap<State, usize> = HashMap::from([(s0.clone(), 0)]);
    let mut closed: HashSet<State> = HashSet::new();

    while let Some(i) = frontier.pop(&nodes, rng) {
        open.remove(&nodes[i].state);
        if task.satisfies(&nodes[i].state, g) {
            out.plan = path_to(&nodes, i);
            out.reached_goal = true;
            return out;
        }
        if !budget.allows(out.expansions) {
            out.plan = path_to(&nodes, i);
            return out;
        }
        out.expansions += 1;
        if trace {
            out.trace.push(TraceRecord {
                expansion: out.expansions,
                cost: nodes[i].cost,
                heuristic: nodes[i].h,
                frontier: frontier.len(),
                state: task.describe(&nodes[i].state),
            });
        }
        let state = nodes[i].state.clone();
        let cost = nodes[i].cost + 1;
        for a in task.available_actions(&state) {
            let next = task.apply_unchecked(&state, a);
            if closed.contains(&next) || next == state {
                continue;
            }
            if let Some(&m) = open.get(&next) {
                if nodes[m].cost > cost {
                    nodes[m].cost = cost;
                    nodes[m].parent = i;
                    nodes[m].action = a;
                    frontier.update(&nodes, m);
                }
                continue;
            }
            let h = heuristic.estimate(&next, g);
            if !h.is_finite() {
                continue;
            }
            nodes.push(Node {
                state: next.clone(),
                parent: i,
                action: a,
                cost,
                h,
            });
            let j = nodes.len() - 1;
            open.insert(next, j);
            frontier.push(&nodes, j);
        }
        closed.insert(state);
    }
    out
}

/// Exact-argmin A* without a budget.
pub fn optimal_astar(
    task: &Task,
    s0: &State,
    g: &GoalSpec,
    heuristic: &dyn Heuristic,
) -> Result<Vec<(State, ActionId)>, PlanError> {
    // argmin mode never draws from the rng
    let mut rng = crate::rng::stream(0, &[]);
    let out = probabilistic_astar(task, s0, g, heuristic, Expansion::Argmin, Budget::Unbounded, &mut rng, false);
    if out.reached_goal {
        Ok(out.plan)
    } else {
        Err(PlanError::Unreachable(g.label.clone()))
    }
}
