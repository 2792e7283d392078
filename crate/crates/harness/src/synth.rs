//! Synthetic data for closed-loop checks: simulated participants answering
//! from a model table, and agent trajectories that contain slips.

use std::collections::BTreeMap;

use btom::agent::simulate;
use btom::inference::ObserverConfig;
use btom::rng::{stream, SimRng};
use btom::stimulus::Stimulus;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::judgments::{Judgment, Selection};
use crate::{HarnessError, Key};

/// How a simulated participant turns a goal distribution into a response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseModel {
    /// Standard deviation of Gaussian noise added to log probabilities.
    pub logit_noise: f64,
    /// Probability of answering "don't know".
    pub dont_know: f64,
    /// Goals within this fraction of the noisy maximum are all selected.
    pub ratio: f64,
}

impl Default for ResponseModel {
    fn default() -> Self {
        ResponseModel {
            logit_noise: 0.5,
            dont_know: 0.05,
            ratio: 0.5,
        }
    }
}

impl ResponseModel {
    pub fn respond(&self, goals: &[String], probs: &[f64], rng: &mut SimRng) -> Selection {
        if rng.random::<f64>() < self.dont_know {
            return Selection::DontKnow;
        }
        let noisy: Vec<f64> = probs
            .iter()
            .map(|p| {
                let z: f64 = StandardNormal.sample(rng);
                (p + 1e-3).ln() + self.logit_noise * z
            })
            .collect();
        let max = noisy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cut = max + self.ratio.ln();
        Selection::Goals(
            goals
                .iter()
                .zip(&noisy)
                .filter(|(_, &l)| l >= cut)
                .map(|(g, _)| g.clone())
                .collect(),
        )
    }
}

/// Goal labels and probabilities per (stimulus, point).
pub fn points_of(values: &BTreeMap<Key, f64>) -> BTreeMap<(String, usize), (Vec<String>, Vec<f64>)> {
    let mut out: BTreeMap<(String, usize), (Vec<String>, Vec<f64>)> = BTreeMap::new();
    for ((s, p, g), &v) in values {
        let e = out.entry((s.clone(), *p)).or_default();
        e.0.push(g.clone());
        e.1.push(v);
    }
    out
}

/// `n` participants answering every point of `model` independently.
pub fn synthesize_cohort(model: &BTreeMap<Key, f64>, n: usize, response: &ResponseModel, seed: u64) -> Vec<Judgment> {
    let points = points_of(model);
    let width = n.to_string().len().max(2);
    let mut out = Vec::with_capacity(n * points.len());
    for i in 0..n {
        let mut rng = stream(seed, &[i as u64]);
        let participant = format!("p{:0width$}", i + 1);
        for ((stimulus, point), (goals, probs)) in &points {
            out.push(Judgment {
                participant: participant.clone(),
                stimulus: stimulus.clone(),
                point: *point,
                selection: response.respond(goals, probs, &mut rng),
                comprehension_failures: 0,
            });
        }
    }
    out
}

/// Six roughly evenly spaced points over a run of `len` steps.
pub fn even_points(len: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=6)
        .map(|i| ((i * len) as f64 / 6.0).round() as usize)
        .filter(|&p| p >= 1)
        .collect();
    v.dedup();
    v
}

/// Trajectories simulated under `cfg` on the layouts of `bases`, kept only
/// if the agent slipped at least once and still reached its goal within
/// `horizon` steps. True goals cycle through each layout's goals.
pub fn mistake_stimuli(
    bases: &[Stimulus],
    cfg: &ObserverConfig,
    per_base: usize,
    horizon: usize,
    seed: u64,
) -> Result<Vec<Stimulus>, HarnessError> {
    const ATTEMPTS: u64 = 500;
    let mut out = Vec::new();
    for (bi, base) in bases.iter().enumerate() {
        let model = base.model(cfg.params);
        let task = &base.task;
        for k in 0..per_base {
            let goal = &task.goals()[k % task.goals().len()];
            let mut found = None;
            for attempt in 0..ATTEMPTS {
                let mut rng = stream(seed, &[bi as u64, k as u64, attempt]);
                let traj = simulate(&model, goal, task.initial_state(), horizon, &mut rng);
                let done = traj.states.last().is_some_and(|s| task.satisfies(s, goal));
                let slipped = traj.latents.as_ref().is_some_and(|ls| {
                    ls.iter().zip(&traj.actions).any(|(l, &a)| {
                        l.planned.as_ref().is_some_and(|p| *p != task.action(a).to_string())
                    })
                });
                if done && slipped && traj.len() >= 3 {
                    found = Some(traj);
                    break;
                }
            }
            let mut traj = found.ok_or_else(|| {
                HarnessError::Synthesis(format!(
                    "no slip trajectory toward `{}` on {} in {ATTEMPTS} attempts",
                    goal.label, base.id
                ))
            })?;
            traj.judgment_points = even_points(traj.len());
            out.push(Stimulus {
                id: format!("{}-synth{}", base.id, k + 1),
                domain: base.domain,
                category: "mistaken-action".into(),
                true_goal: goal.label.clone(),
                task: base.task.clone(),
                action_texts: traj.actions.iter().map(|&a| task.action(a).to_string()).collect(),
                trajectory: traj,
                grid: base.grid.clone(),
            });
        }
    }
    Ok(out)
}
