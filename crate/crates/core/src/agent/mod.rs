//! The boundedly rational agent: goal noise, budgeted replanning, action
//! slips, deterministic environment steps and noisy observations.

mod observe;
mod trajectory;

pub use observe::{obs_loglik, observe, ObsNoise, Observation};
pub use trajectory::{StepLatent, Trajectory, TrajectoryError};

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domains::GoalCorruption;
use crate::heuristic::Heuristic;
use crate::planner::{probabilistic_astar, PartialPlan, PlanError, SearchParams};
use crate::rng::SimRng;
use crate::task::{ActionId, GoalSpec, State, Task};

/// Noise and search settings of the agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    /// Per-step probability of goal corruption or correction.
    pub goal_noise: f64,
    /// Probability of executing an unplanned action.
    pub action_noise: f64,
    pub search: SearchParams,
    pub obs: ObsNoise,
}

impl AgentParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        for (name, p) in [("goal_noise", self.goal_noise), ("action_noise", self.action_noise), ("obs.flip", self.obs.flip)]
        {
            if !(0.0..=1.0).contains(&p) {
                return Err(PlanError::InvalidParams(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.obs.sigma >= 0.0) {
            return Err(PlanError::InvalidParams(format!("obs.sigma must be >= 0, got {}", self.obs.sigma)));
        }
        self.search.validate()
    }
}

/// Everything needed to run the agent on one task.
#[derive(Clone)]
pub struct AgentModel {
    pub task: Arc<Task>,
    pub heuristic: Arc<dyn Heuristic>,
    pub corruption: Arc<dyn GoalCorruption>,
    pub params: AgentParams,
}

/// Latent state of the agent after `t` steps. `goal` is the goal that
/// drives the next plan update.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub t: usize,
    pub g0: GoalSpec,
    pub goal: GoalSpec,
    pub plan: PartialPlan,
    pub world: State,
}

impl AgentState {
    pub fn new(g0: GoalSpec, s0: State) -> Self {
        AgentState {
            t: 0,
            goal: g0.clone(),
            g0,
            plan: PartialPlan::empty(1),
            world: s0,
        }
    }
}

/// With probability `eps`: corrupt `g0` if the agent currently pursues it,
/// otherwise fall back to `g0`. Else keep `g_prev`.
pub fn goal_transition(
    g_prev: &GoalSpec,
    g0: &GoalSpec,
    eps: f64,
    corruption: &dyn GoalCorruption,
    rng: &mut SimRng,
) -> GoalSpec {
    if eps > 0.0 && rng.random::<f64>() < eps {
        if g_prev == g0 {
            corruption.corrupt(g0, rng)
        } else {
            g0.clone()
        }
    } else {
        g_prev.clone()
    }
}

/// Keeps `prev` when it covers step `t` from state `s`; otherwise samples a
/// budget, searches from `s` and appends the result at `t`. The flag reports
/// whether a search ran.
pub fn plan_update(
    model: &AgentModel,
    t: usize,
    s: &State,
    prev: &PartialPlan,
    g: &GoalSpec,
    rng: &mut SimRng,
) -> (PartialPlan, bool) {
    if prev.action_at(t, s).is_some() {
        return (prev.clone(), false);
    }
    let budget = model.params.search.budget.sample(rng);
    let out = probabilistic_astar(
        &model.task,
        s,
        g,
        model.heuristic.as_ref(),
        model.params.search.expansion,
        budget,
        rng,
        false,
    );
    (prev.extended(t, out.plan), true)
}

/// `P(a | s, plan)`: the planned action with probability `1 - eps`, the
/// rest spread evenly over the other available actions. Without a planned
/// action the choice is uniform. Entries follow `available_actions` order.
pub fn action_distribution(task: &Task, t: usize, s: &State, plan: &PartialPlan, eps: f64) -> Vec<(ActionId, f64)> {
    let available = task.available_actions(s);
    let n = available.len();
    match plan.action_at(t, s) {
        Some(planned) if n > 1 => {
            let other = eps / (n - 1) as f64;
            available
                .into_iter()
                .map(|a| (a, if a == planned { 1.0 - eps } else { other }))
                .collect()
        }
        Some(planned) => vec![(planned, 1.0)],
        None => available.into_iter().map(|a| (a, 1.0 / n as f64)).collect(),
    }
}

/// Draws an action per the plan-and-slip rule above.
pub fn select_action(task: &Task, t: usize, s: &State, plan: &PartialPlan, eps: f64, rng: &mut SimRng) -> ActionId {
    let available = task.available_actions(s);
    match plan.action_at(t, s) {
        Some(planned) => {
            if available.len() > 1 && eps > 0.0 && rng.random::<f64>() < eps {
                let others: Vec<ActionId> = available.into_iter().filter(|&a| a != planned).collect();
                *others.choose(rng).expect("at least one other action")
            } else {
                planned
            }
        }
        None => *available
            .choose(rng)
            .expect("domains always offer at least one action"),
    }
}

/// Goal transition (from step 2 on) and plan update for step `t = state.t + 1`.
/// Returns the step's latent record; the action is left to the caller.
pub fn advance_latents(model: &AgentModel, state: &mut AgentState, rng: &mut SimRng) -> StepLatent {
    let t = state.t + 1;
    if t >= 2 {
        state.goal = goal_transition(
            &state.goal,
            &state.g0,
            model.params.goal_noise,
            model.corruption.as_ref(),
            rng,
        );
    }
    let (plan, replanned) = plan_update(model, t, &state.world, &state.plan, &state.goal, rng);
    state.plan = plan;
    StepLatent {
        goal: state.goal.label.clone(),
        replanned,
        planned: state.plan.action_at(t, &state.world).map(|a| model.task.action(a).to_string()),
    }
}

/// Runs the agent from `s0` toward `g0` for at most `horizon` steps,
/// stopping once `g0` holds.
pub fn simulate(model: &AgentModel, g0: &GoalSpec, s0: &State, horizon: usize, rng: &mut SimRng) -> Trajectory {
    let task = &model.task;
    let mut state = AgentState::new(g0.clone(), s0.clone());
    let mut traj = Trajectory::new(s0.clone());
    let mut latents = Vec::new();
    while state.t < horizon && !task.satisfies(&state.world, g0) {
        let latent = advance_latents(model, &mut state, rng);
        let t = state.t + 1;
        let a = select_action(task, t, &state.world, &state.plan, model.params.action_noise, rng);
        state.world = task.apply_unchecked(&state.world, a);
        state.t = t;
        traj.push(a, state.world.clone());
        latents.push(latent);
    }
    traj.latents = Some(latents);
    traj
}
