//! Domain identifiers and the best-fitting parameters per model kind.

use serde::{Deserialize, Serialize};

use crate::agent::{AgentParams, ObsNoise};
use crate::inference::{ModelKind, ObserverConfig};
use crate::planner::SearchParams;

/// Particles allotted to each candidate goal.
pub const PARTICLES_PER_GOAL: usize = 100;
/// Independent filter runs averaged per reported posterior.
pub const RUNS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Dkg,
    Blockwords,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Dkg => "dkg",
            DomainKind::Blockwords => "blockwords",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dkg" => Some(DomainKind::Dkg),
            "blockwords" => Some(DomainKind::Blockwords),
            _ => None,
        }
    }

    /// Observation noise held fixed during fitting.
    pub fn obs_noise(self) -> ObsNoise {
        match self {
            DomainKind::Dkg => ObsNoise { flip: 0.05, sigma: 0.25 },
            DomainKind::Blockwords => ObsNoise { flip: 0.1, sigma: 0.0 },
        }
    }

    /// Points a participant must reach to be kept.
    pub fn score_threshold(self) -> f64 {
        match self {
            DomainKind::Dkg => 10.0,
            DomainKind::Blockwords => 20.0,
        }
    }
}

impl std::fmt::Display for DomainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn params(goal_noise: f64, action_noise: f64, search: SearchParams, obs: ObsNoise) -> AgentParams {
    AgentParams {
        goal_noise,
        action_noise,
        search,
        obs,
    }
}

/// Best-fitting parameters for `kind` in `domain`, before any lesion. The
/// returned configuration applies the lesion implied by `kind`.
pub fn fitted(domain: DomainKind, kind: ModelKind) -> ObserverConfig {
    let obs = domain.obs_noise();
    let (p, alpha) = match (domain, kind) {
        (DomainKind::Dkg, ModelKind::Full | ModelKind::GLesioned) => {
            (params(0.0, 0.05, SearchParams::bounded(0.5, 2, 0.9), obs), 1.0)
        }
        (DomainKind::Dkg, ModelKind::PLesioned) => (params(0.0, 0.05, SearchParams::optimal(), obs), 1.0),
        (DomainKind::Dkg, ModelKind::ALesioned) => (params(0.0, 0.0, SearchParams::bounded(0.5, 2, 0.9), obs), 1.0),
        (DomainKind::Dkg, ModelKind::Boltzmann) => (params(0.0, 0.0, SearchParams::optimal(), obs), 0.125),
        (DomainKind::Blockwords, ModelKind::Full) => (params(0.2, 0.05, SearchParams::bounded(0.02, 2, 0.9), obs), 1.0),
        (DomainKind::Blockwords, ModelKind::GLesioned) => {
            (params(0.0, 0.2, SearchParams::bounded(0.5, 2, 0.9), obs), 1.0)
        }
        (DomainKind::Blockwords, ModelKind::PLesioned) => (params(0.2, 0.2, SearchParams::optimal(), obs), 1.0),
        (DomainKind::Blockwords, ModelKind::ALesioned) => {
            (params(0.2, 0.0, SearchParams::bounded(0.02, 4, 0.9), obs), 1.0)
        }
        (DomainKind::Blockwords, ModelKind::Boltzmann) => (params(0.0, 0.0, SearchParams::optimal(), obs), 2.0),
    };
    ObserverConfig::new(kind, p, alpha).with_runs(RUNS)
}
