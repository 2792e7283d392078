//! Online goal inference: a particle filter over the agent model, exact
//! forward filtering where the latent space is small, and the Boltzmann
//! baseline observer.

mod boltzmann;
mod exact;
mod filter;

pub use boltzmann::{boltzmann_policy, boltzmann_weights, ValueTables};
pub use exact::exact_posterior;
pub use filter::{average, effective_sample_size, systematic_resample, Observer, Particle, ParticleSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::AgentParams;
use crate::planner::{PlanError, SearchParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("invalid observer configuration: {0}")]
    Config(String),
    #[error("all particle weights vanished at step {t}; increase the particle count or the observation noise")]
    Degenerate { t: usize },
    #[error("exact inference is not available: {0}")]
    Intractable(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Full,
    GLesioned,
    PLesioned,
    ALesioned,
    Boltzmann,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Full,
        ModelKind::GLesioned,
        ModelKind::PLesioned,
        ModelKind::ALesioned,
        ModelKind::Boltzmann,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::GLesioned => "g-lesioned",
            ModelKind::PLesioned => "p-lesioned",
            ModelKind::ALesioned => "a-lesioned",
            ModelKind::Boltzmann => "boltzmann",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lesion {
    /// No goal mistakes.
    G,
    /// Exact, unbounded planning.
    P,
    /// No action mistakes.
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserverConfig {
    pub kind: ModelKind,
    pub params: AgentParams,
    /// Inverse temperature of the Boltzmann policy.
    pub alpha: f64,
    pub particles: usize,
    pub runs: usize,
    /// Resample when the effective sample size drops below this fraction.
    pub ess_threshold: f64,
    /// Propose goal corruptions that explain the next observation.
    pub goal_proposal: bool,
    /// Drop each particle's plan suffix after resampling so it is redrawn.
    pub rejuvenate: bool,
}

impl ObserverConfig {
    /// Configuration for `kind` with the lesion it implies applied to `params`.
    pub fn new(kind: ModelKind, params: AgentParams, alpha: f64) -> Self {
        let base = ObserverConfig {
            kind,
            params,
            alpha,
            particles: 300,
            runs: 10,
            ess_threshold: 0.25,
            goal_proposal: true,
            rejuvenate: false,
        };
        match kind {
            ModelKind::GLesioned => lesion(&base, Lesion::G),
            ModelKind::PLesioned => lesion(&base, Lesion::P),
            ModelKind::ALesioned => lesion(&base, Lesion::A),
            ModelKind::Full | ModelKind::Boltzmann => base,
        }
    }

    pub fn with_particles(mut self, n: usize) -> Self {
        self.particles = n;
        self
    }

    pub fn with_runs(mut self, n: usize) -> Self {
        self.runs = n;
        self
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        if self.particles == 0 {
            return Err(InferenceError::Config("particle count must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(InferenceError::Config("run count must be at least 1".into()));
        }
        if !(self.params.obs.flip > 0.0 && self.params.obs.flip < 1.0) {
            return Err(InferenceError::Config(format!(
                "observation flip probability must lie strictly between 0 and 1 for filtering, got {}",
                self.params.obs.flip
            )));
        }
        if self.kind == ModelKind::Boltzmann && !(self.alpha > 0.0) {
            return Err(InferenceError::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.ess_threshold) {
            return Err(InferenceError::Config("ess threshold must lie in [0, 1]".into()));
        }
        self.params.validate()?;
        Ok(())
    }
}

/// Switches off one mistake channel, leaving everything else untouched.
pub fn lesion(cfg: &ObserverConfig, which: Lesion) -> ObserverConfig {
    let mut out = *cfg;
    match which {
        Lesion::G => out.params.goal_noise = 0.0,
        Lesion::P => out.params.search = SearchParams::optimal(),
        Lesion::A => out.params.action_noise = 0.0,
    }
    out
}
