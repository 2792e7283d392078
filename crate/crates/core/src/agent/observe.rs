use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::rng::SimRng;
use crate::task::{FactSet, State};

/// Observation corruption: each Boolean atom flips with probability `flip`,
/// each numeric fluent gets Gaussian noise with standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObsNoise {
    pub flip: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub facts: FactSet,
    pub fluents: Vec<f64>,
}

impl Observation {
    /// The state itself, read without corruption.
    pub fn exact(s: &State) -> Self {
        Observation {
            facts: s.facts.clone(),
            fluents: s.fluents.iter().map(|&v| v as f64).collect(),
        }
    }
}

pub fn observe(s: &State, num_atoms: usize, noise: ObsNoise, rng: &mut SimRng) -> Observation {
    let mut o = Observation::exact(s);
    if noise.flip > 0.0 {
        for p in 0..num_atoms as u32 {
            if rng.random::<f64>() < noise.flip {
                o.facts.set(p, !s.holds(p));
            }
        }
    }
    if noise.sigma > 0.0 {
        let normal = Normal::new(0.0, noise.sigma).expect("sigma checked positive");
        for v in &mut o.fluents {
            *v += normal.sample(rng);
        }
    }
    o
}

/// `log P(o | s)` under [`observe`].
pub fn obs_loglik(o: &Observation, s: &State, num_atoms: usize, noise: ObsNoise) -> f64 {
    let m = o.facts.hamming(&s.facts);
    let n = num_atoms;
    let mut ll = 0.0;
    if n > m {
        ll += (n - m) as f64 * (1.0 - noise.flip).ln();
    }
    if m > 0 {
        ll += m as f64 * noise.flip.ln();
    }
    let sigma = noise.sigma;
    for (&x, &v) in o.fluents.iter().zip(s.fluents.iter()) {
        let d = x - v as f64;
        if sigma > 0.0 {
            ll += -0.5 * (d / sigma).powi(2) - (sigma * (2.0 * std::f64::consts::PI).sqrt()).ln();
        } else if d != 0.0 {
            return f64::NEG_INFINITY;
        }
    }
    ll
}
