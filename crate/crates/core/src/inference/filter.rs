use std::collections::HashMap;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use super::{boltzmann_policy, InferenceError, ModelKind, ObserverConfig, ValueTables};
use crate::agent::{action_distribution, obs_loglik, plan_update, AgentModel, AgentState, Observation};
use crate::rng::{derive_seed, stream, SimRng};
use crate::task::{ActionId, GoalSpec, State};

/// Sharpness of the goal-corruption proposal.
const PROPOSAL_SHARPNESS: f64 = 2.0;
/// Share of the goal-corruption proposal that stays uniform.
const PROPOSAL_UNIFORM_SHARE: f64 = 0.5;

/// One hypothesised history of the agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    /// Index of the hypothesised true goal among the task's goals.
    pub goal: usize,
    pub agent: AgentState,
    pub log_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
    /// Number of observations assimilated so far.
    pub t: usize,
    /// Running estimate of the log marginal likelihood of the observations.
    pub log_evidence: f64,
}

impl ParticleSet {
    /// Normalised weight of each goal.
    pub fn posterior(&self, num_goals: usize) -> Vec<f64> {
        let max = self
            .particles
            .iter()
            .map(|p| p.log_weight)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut post = vec![0.0; num_goals];
        if max == f64::NEG_INFINITY {
            return post;
        }
        for p in &self.particles {
            post[p.goal] += (p.log_weight - max).exp();
        }
        let z: f64 = post.iter().sum();
        post.iter_mut().for_each(|x| *x /= z);
        post
    }

    fn normalised_weights(&self) -> Vec<f64> {
        let max = self
            .particles
            .iter()
            .map(|p| p.log_weight)
            .fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.particles.iter().map(|p| (p.log_weight - max).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }
}

/// `(sum w)^2 / sum w^2` of normalised weights.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    s * s / s2
}

/// Systematic resampling: `n` ancestor indices from normalised `weights`
/// using one uniform offset.
pub fn systematic_resample<R: Rng + ?Sized>(weights: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let step = 1.0 / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut out = Vec::with_capacity(n);
    let mut cum = weights[0];
    let mut i = 0;
    for _ in 0..n {
        while u > cum && i + 1 < weights.len() {
            i += 1;
            cum += weights[i];
        }
        out.push(i);
        u += step;
    }
    out
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn observed_state(o: &Observation) -> State {
    State {
        facts: o.facts.clone(),
        fluents: o.fluents.iter().map(|v| v.round() as i64).collect(),
    }
}

/// Particle-filter observer for one task and model configuration.
pub struct Observer {
    model: AgentModel,
    cfg: ObserverConfig,
    tables: Option<Arc<ValueTables>>,
    /// goal index -> listed corruptions of that goal
    supports: Vec<Option<Vec<GoalSpec>>>,
}

impl Observer {
    /// `model.params` is replaced by the configuration's parameters.
    pub fn new(model: AgentModel, cfg: ObserverConfig) -> Result<Self, InferenceError> {
        let tables = if cfg.kind == ModelKind::Boltzmann {
            Some(Arc::new(ValueTables::build(&model.task)?))
        } else {
            None
        };
        Self::build(model, cfg, tables)
    }

    /// Reuses value tables built for the same task.
    pub fn with_tables(model: AgentModel, cfg: ObserverConfig, tables: Arc<ValueTables>) -> Result<Self, InferenceError> {
        Self::build(model, cfg, Some(tables))
    }

    fn build(mut model: AgentModel, cfg: ObserverConfig, tables: Option<Arc<ValueTables>>) -> Result<Self, InferenceError> {
        cfg.validate()?;
        model.params = cfg.params;
        let supports = model.task.goals().iter().map(|g| model.corruption.support(g)).collect();
        Ok(Observer {
            model,
            cfg,
            tables,
            supports,
        })
    }

    pub fn config(&self) -> &ObserverConfig {
        &self.cfg
    }

    pub fn model(&self) -> &AgentModel {
        &self.model
    }

    pub fn num_goals(&self) -> usize {
        self.model.task.goals().len()
    }

    /// Equal particle counts per goal, weighted by the goal prior.
    pub fn init(&self) -> Result<ParticleSet, InferenceError> {
        let task = &self.model.task;
        let k = task.goals().len();
        let n = self.cfg.particles;
        if n % k != 0 {
            return Err(InferenceError::Config(format!(
                "particle count {n} is not a multiple of the {k} goals"
            )));
        }
        let mut particles = Vec::with_capacity(n);
        for (gi, g) in task.goals().iter().enumerate() {
            let lw = task.goal_prior()[gi].ln();
            for _ in 0..n / k {
                particles.push(Particle {
                    goal: gi,
                    agent: AgentState::new(g.clone(), task.initial_state().clone()),
                    log_weight: lw,
                });
            }
        }
        Ok(ParticleSet {
            particles,
            t: 0,
            log_evidence: 0.0,
        })
    }

    /// Proposal over the listed corruptions of a goal, favouring those the
    /// observed step made progress toward.
    fn corruption_proposal(&self, support: &[GoalSpec], prev: &State, observed: &State) -> Vec<f64> {
        let h = &self.model.heuristic;
        let scores: Vec<f64> = support
            .iter()
            .map(|c| {
                let d = h.estimate(prev, c) - h.estimate(observed, c);
                if d.is_nan() { 0.0 } else { d.clamp(-10.0, 10.0) }
            })
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = scores.iter().map(|s| (PROPOSAL_SHARPNESS * (s - max)).exp()).collect();
        let z: f64 = w.iter().sum();
        let n = support.len() as f64;
        w.iter()
            .map(|x| PROPOSAL_UNIFORM_SHARE / n + (1.0 - PROPOSAL_UNIFORM_SHARE) * x / z)
            .collect()
    }

    fn propagate(
        &self,
        p: &mut Particle,
        t: usize,
        o: &Observation,
        proposals: &HashMap<(usize, State), Vec<f64>>,
        rng: &mut SimRng,
    ) {
        let task = &self.model.task;
        let params = &self.cfg.params;
        let agent = &mut p.agent;
        let dist: Vec<(ActionId, f64)> = if self.cfg.kind == ModelKind::Boltzmann {
            let tables = self.tables.as_ref().expect("tables built for the Boltzmann observer");
            boltzmann_policy(task, &agent.world, p.goal, &agent.g0, self.cfg.alpha, tables)
        } else {
            if t >= 2 && params.goal_noise > 0.0 && rng.random::<f64>() < params.goal_noise {
                if agent.goal == agent.g0 {
                    match (&self.supports[p.goal], proposals.get(&(p.goal, agent.world.clone()))) {
                        (Some(support), Some(q)) => {
                            let k = WeightedIndex::new(q).expect("positive proposal").sample(rng);
                            agent.goal = support[k].clone();
                            p.log_weight += -(support.len() as f64).ln() - q[k].ln();
                        }
                        _ => agent.goal = self.model.corruption.corrupt(&agent.g0, rng),
                    }
                } else {
                    agent.goal = agent.g0.clone();
                }
            }
            let (plan, _) = plan_update(&self.model, t, &agent.world, &agent.plan, &agent.goal, rng);
            agent.plan = plan;
            action_distribution(task, t, &agent.world, &agent.plan, params.action_noise)
        };
        // choose the action in proportion to prior times observation likelihood
        let n_atoms = task.num_atoms();
        let mut next = Vec::with_capacity(dist.len());
        let mut logw = Vec::with_capacity(dist.len());
        for (a, pa) in dist {
            if pa <= 0.0 {
                continue;
            }
            let s = task.apply_unchecked(&agent.world, a);
            logw.push(pa.ln() + obs_loglik(o, &s, n_atoms, params.obs));
            next.push(s);
        }
        let z = log_sum_exp(&logw);
        agent.t = t;
        if z == f64::NEG_INFINITY {
            p.log_weight = f64::NEG_INFINITY;
            return;
        }
        let w: Vec<f64> = logw.iter().map(|l| (l - z).exp()).collect();
        let k = WeightedIndex::new(&w).expect("finite weights").sample(rng);
        agent.world = next.swap_remove(k);
        p.log_weight += z;
    }

    /// Assimilates the observation for step `ps.t + 1`.
    pub fn step(&self, ps: &mut ParticleSet, o: &Observation, seed: u64) -> Result<(), InferenceError> {
        let t = ps.t + 1;
        let mut proposals = HashMap::new();
        if self.cfg.goal_proposal && t >= 2 && self.cfg.params.goal_noise > 0.0 && self.cfg.kind != ModelKind::Boltzmann {
            let observed = observed_state(o);
            for p in &ps.particles {
                if p.agent.goal != p.agent.g0 {
                    continue;
                }
                if let Some(support) = &self.supports[p.goal] {
                    let key = (p.goal, p.agent.world.clone());
                    if !proposals.contains_key(&key) {
                        let q = self.corruption_proposal(support, &p.agent.world, &observed);
                        proposals.insert(key, q);
                    }
                }
            }
        }
        let before = log_sum_exp(&ps.particles.iter().map(|p| p.log_weight).collect::<Vec<_>>());
        ps.particles.par_iter_mut().enumerate().for_each(|(i, p)| {
            if p.log_weight == f64::NEG_INFINITY {
                return;
            }
            let mut rng = stream(seed, &[t as u64, i as u64]);
            self.propagate(p, t, o, &proposals, &mut rng);
        });
        ps.t = t;
        let max = ps
            .particles
            .iter()
            .map(|p| p.log_weight)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(InferenceError::Degenerate { t });
        }
        ps.log_evidence += log_sum_exp(&ps.particles.iter().map(|p| p.log_weight).collect::<Vec<_>>()) - before;
        for p in &mut ps.particles {
            p.log_weight -= max;
        }
        let w = ps.normalised_weights();
        let n = ps.particles.len();
        if effective_sample_size(&w) < self.cfg.ess_threshold * n as f64 {
            let mut rng = stream(seed, &[t as u64, u64::MAX]);
            let idx = systematic_resample(&w, n, &mut rng);
            ps.particles = idx
                .into_iter()
                .map(|j| {
                    let mut q = ps.particles[j].clone();
                    q.log_weight = 0.0;
                    if self.cfg.rejuvenate {
                        q.agent.plan = q.agent.plan.truncated(t + 1);
                    }
                    q
                })
                .collect();
        }
        Ok(())
    }

    pub fn posterior(&self, ps: &ParticleSet) -> Vec<f64> {
        ps.posterior(self.num_goals())
    }

    /// Goal posterior before any observation and after each one.
    pub fn filter(&self, observations: &[Observation], seed: u64) -> Result<Vec<Vec<f64>>, InferenceError> {
        let mut ps = self.init()?;
        let mut out = vec![self.posterior(&ps)];
        for o in observations {
            self.step(&mut ps, o, seed)?;
            out.push(self.posterior(&ps));
        }
        Ok(out)
    }

    /// Average of the configured number of independent filter runs.
    pub fn infer(&self, observations: &[Observation], seed: u64) -> Result<Vec<Vec<f64>>, InferenceError> {
        let runs = self.runs(observations, seed)?;
        Ok(average(&runs))
    }

    /// Each run's posterior sequence, seeded by `derive_seed(seed, [run])`.
    pub fn runs(&self, observations: &[Observation], seed: u64) -> Result<Vec<Vec<Vec<f64>>>, InferenceError> {
        (0..self.cfg.runs as u64)
            .into_par_iter()
            .map(|r| self.filter(observations, derive_seed(seed, &[r])))
            .collect()
    }
}

/// Elementwise mean of equally shaped posterior sequences.
pub fn average(runs: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let n = runs.len() as f64;
    let mut out = runs[0].clone();
    for r in &runs[1..] {
        for (a, b) in out.iter_mut().zip(r) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
    for v in &mut out {
        v.iter_mut().for_each(|x| *x /= n);
    }
    out
}
