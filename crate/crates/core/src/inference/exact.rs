use std::collections::HashMap;

use super::{boltzmann_policy, InferenceError, ModelKind, ObserverConfig, ValueTables};
use crate::agent::{action_distribution, obs_loglik, AgentModel, Observation};
use crate::planner::{probabilistic_astar, BudgetDist, Expansion, PartialPlan};
use crate::rng::stream;
use crate::task::{ActionId, State};

/// Cap on tracked (state, plan) hypotheses per step.
const HYPOTHESIS_LIMIT: usize = 100_000;

/// Exact `P(g0 | o_1..t)` for every prefix by forward filtering over
/// (goal, world state, remaining plan).
///
/// Available when the only latent besides the goal is the action noise:
/// the Boltzmann observer, or exact unbounded planning without goal noise.
pub fn exact_posterior(
    model: &AgentModel,
    cfg: &ObserverConfig,
    observations: &[Observation],
    tables: Option<&ValueTables>,
) -> Result<Vec<Vec<f64>>, InferenceError> {
    let params = &cfg.params;
    let boltzmann = cfg.kind == ModelKind::Boltzmann;
    if !boltzmann {
        if params.goal_noise != 0.0 {
            return Err(InferenceError::Intractable("goal noise must be zero".into()));
        }
        if params.search.expansion != Expansion::Argmin || params.search.budget != BudgetDist::Unbounded {
            return Err(InferenceError::Intractable("planning must be exact and unbounded".into()));
        }
    }
    let built;
    let tables = match (boltzmann, tables) {
        (true, Some(t)) => Some(t),
        (true, None) => {
            built = ValueTables::build(&model.task)?;
            Some(&built)
        }
        (false, _) => None,
    };
    let task = &model.task;
    let goals = task.goals();
    let n_atoms = task.num_atoms();
    // per goal: (world, remaining plan) -> probability mass
    let mut belief: Vec<HashMap<(State, PartialPlan), f64>> = goals
        .iter()
        .enumerate()
        .map(|(i, _)| HashMap::from([((task.initial_state().clone(), PartialPlan::empty(1)), task.goal_prior()[i])]))
        .collect();
    let mut plans: Vec<HashMap<State, Vec<(State, ActionId)>>> = vec![HashMap::new(); goals.len()];
    let mut rng = stream(0, &[]);
    let mut out = vec![marginal(&belief)];
    for (k, o) in observations.iter().enumerate() {
        let t = k + 1;
        let mut next: Vec<HashMap<(State, PartialPlan), f64>> = vec![HashMap::new(); goals.len()];
        for (gi, g) in goals.iter().enumerate() {
            for ((s, plan), mass) in &belief[gi] {
                let (plan, dist) = if boltzmann {
                    let tables = tables.expect("built above");
                    (plan.clone(), boltzmann_policy(task, s, gi, g, cfg.alpha, tables))
                } else {
                    let plan = if plan.action_at(t, s).is_some() {
                        plan.clone()
                    } else {
                        let tail = plans[gi].entry(s.clone()).or_insert_with(|| {
                            probabilistic_astar(
                                task,
                                s,
                                g,
                                model.heuristic.as_ref(),
                                Expansion::Argmin,
                                crate::planner::Budget::Unbounded,
                                &mut rng,
                                false,
                            )
                            .plan
                        });
                        plan.extended(t, tail.clone())
                    };
                    let dist = action_distribution(task, t, s, &plan, params.action_noise);
                    (plan, dist)
                };
                let rest = plan.tail_from(t + 1);
                for (a, pa) in dist {
                    if pa <= 0.0 {
                        continue;
                    }
                    let s2 = task.apply_unchecked(s, a);
                    let lik = obs_loglik(o, &s2, n_atoms, params.obs).exp();
                    if lik == 0.0 {
                        continue;
                    }
                    *next[gi].entry((s2, rest.clone())).or_default() += mass * pa * lik;
                }
            }
        }
        let total: f64 = next.iter().flat_map(|m| m.values()).sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(InferenceError::Degenerate { t });
        }
        let size: usize = next.iter().map(HashMap::len).sum();
        if size > HYPOTHESIS_LIMIT {
            return Err(InferenceError::Intractable(format!(
                "{size} hypotheses at step {t} exceed the limit of {HYPOTHESIS_LIMIT}"
            )));
        }
        for m in &mut next {
            m.values_mut().for_each(|v| *v /= total);
        }
        belief = next;
        out.push(marginal(&belief));
    }
    Ok(out)
}

fn marginal(belief: &[HashMap<(State, PartialPlan), f64>]) -> Vec<f64> {
    let mass: Vec<f64> = belief.iter().map(|m| m.values().sum()).collect();
    let z: f64 = mass.iter().sum();
    mass.into_iter().map(|m| m / z).collect()
}
