//! Stimulus files: a trajectory, its judgment points and the task it runs in.
//!
//! Doors, Keys & Gems stimuli are an ASCII `.map` plus a TOML sidecar:
//!
//! ```toml
//! domain = "dkg"
//! id = "dkg-lockout"
//! category = "irreversible-failure"
//! true_goal = "red"
//! map = "dkg-lockout.map"          # defaults to <id>.map
//! gems = { "1" = "red", "2" = "yellow", "3" = "blue" }
//! actions = ["down", "down", "pickup-key", "up"]
//! judgment_points = [2, 4]
//! ```
//!
//! Block Words stimuli are a single TOML file with `towers` (each read
//! top-down) and `words` in place of `map` and `gems`. Actions use the
//! shorthand accepted by [`Task::resolve_action`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::agent::{AgentModel, AgentParams, Observation, Trajectory};
use crate::domains::blockwords::problem_pddl;
use crate::domains::{DomainError, FfHeuristic, GridSpec, MazeDistance, NoCorruption, WordPermutation};
use crate::pddl::{BLOCK_WORDS_DOMAIN, DOORS_KEYS_GEMS_DOMAIN};
use crate::presets::{DomainKind, PARTICLES_PER_GOAL};
use crate::task::{Task, TaskError};

#[derive(Debug, Error)]
pub enum StimulusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("{id}: {source}")]
    Domain { id: String, source: DomainError },
    #[error("{id}: {source}")]
    Task { id: String, source: TaskError },
    #[error("{id}: step {step} `{action}`: {source}")]
    Action {
        id: String,
        step: usize,
        action: String,
        source: TaskError,
    },
    #[error("{id}: {message}")]
    Invalid { id: String, message: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StimulusFile {
    domain: DomainKind,
    id: String,
    category: String,
    true_goal: String,
    #[serde(default)]
    map: Option<String>,
    #[serde(default)]
    gems: BTreeMap<char, String>,
    #[serde(default)]
    towers: Vec<String>,
    #[serde(default)]
    words: Vec<String>,
    actions: Vec<String>,
    judgment_points: Vec<usize>,
}

/// A loaded stimulus with its grounded task and replayed trajectory.
#[derive(Clone)]
pub struct Stimulus {
    pub id: String,
    pub domain: DomainKind,
    pub category: String,
    pub true_goal: String,
    pub task: Arc<Task>,
    pub trajectory: Trajectory,
    /// Action texts as written in the file.
    pub action_texts: Vec<String>,
    pub grid: Option<GridSpec>,
}

impl std::fmt::Debug for Stimulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stimulus")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .field("category", &self.category)
            .field("steps", &self.trajectory.len())
            .finish()
    }
}

impl Stimulus {
    pub fn load(path: &Path) -> Result<Self, StimulusError> {
        let text = std::fs::read_to_string(path).map_err(|source| StimulusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: StimulusFile = toml::from_str(&text).map_err(|source| StimulusError::Toml {
            path: path.to_path_buf(),
            source,
        })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let id = file.id.clone();
        let (task, grid) = match file.domain {
            DomainKind::Dkg => {
                let map_path = dir.join(file.map.clone().unwrap_or_else(|| format!("{id}.map")));
                let ascii = std::fs::read_to_string(&map_path).map_err(|source| StimulusError::Io {
                    path: map_path.clone(),
                    source,
                })?;
                let grid = GridSpec::parse(&ascii, &file.gems).map_err(|source| StimulusError::Domain {
                    id: id.clone(),
                    source,
                })?;
                let problem = grid.to_problem_pddl(&id, None);
                let task = Task::from_texts(DOORS_KEYS_GEMS_DOMAIN, &problem)
                    .map_err(|source| StimulusError::Task { id: id.clone(), source })?;
                (task, Some(grid))
            }
            DomainKind::Blockwords => {
                let problem = problem_pddl(&id, &file.towers, &file.words)
                    .map_err(|source| StimulusError::Domain { id: id.clone(), source })?;
                let task = Task::from_texts(BLOCK_WORDS_DOMAIN, &problem)
                    .map_err(|source| StimulusError::Task { id: id.clone(), source })?;
                (task, None)
            }
        };
        Self::assemble(file, task, grid)
    }

    fn assemble(file: StimulusFile, task: Task, grid: Option<GridSpec>) -> Result<Self, StimulusError> {
        let id = file.id;
        if task.goal_by_label(&file.true_goal).is_none() {
            return Err(StimulusError::Invalid {
                id,
                message: format!("true goal `{}` is not a candidate goal", file.true_goal),
            });
        }
        let mut s = task.initial_state().clone();
        let mut actions = Vec::with_capacity(file.actions.len());
        for (k, text) in file.actions.iter().enumerate() {
            let a = task.resolve_action(&s, text).map_err(|source| StimulusError::Action {
                id: id.clone(),
                step: k + 1,
                action: text.clone(),
                source,
            })?;
            s = task.apply_unchecked(&s, a);
            actions.push(a);
        }
        let mut trajectory = Trajectory::from_actions(&task, task.initial_state(), &actions).map_err(|e| {
            StimulusError::Invalid {
                id: id.clone(),
                message: e.to_string(),
            }
        })?;
        let mut points = file.judgment_points;
        points.sort_unstable();
        points.dedup();
        if points.is_empty() || points.iter().any(|&p| p == 0 || p > actions.len()) {
            return Err(StimulusError::Invalid {
                id,
                message: format!("judgment points must lie in 1..={}", actions.len()),
            });
        }
        trajectory.judgment_points = points;
        Ok(Stimulus {
            id,
            domain: file.domain,
            category: file.category,
            true_goal: file.true_goal,
            task: Arc::new(task),
            trajectory,
            action_texts: file.actions,
            grid,
        })
    }

    /// Every `*.toml` stimulus in `dir`, sorted by id.
    pub fn load_dir(dir: &Path) -> Result<Vec<Self>, StimulusError> {
        let entries = std::fs::read_dir(dir).map_err(|source| StimulusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut out = Vec::new();
        for e in entries {
            let e = e.map_err(|source| StimulusError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            let p = e.path();
            if p.extension().is_some_and(|x| x == "toml") {
                out.push(Self::load(&p)?);
            }
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    pub fn judgment_points(&self) -> &[usize] {
        &self.trajectory.judgment_points
    }

    pub fn goal_labels(&self) -> Vec<String> {
        self.task.goals().iter().map(|g| g.label.clone()).collect()
    }

    pub fn particles(&self) -> usize {
        PARTICLES_PER_GOAL * self.task.goals().len()
    }

    /// The states after each action, read without corruption.
    pub fn observations(&self) -> Vec<Observation> {
        self.trajectory.states[1..].iter().map(Observation::exact).collect()
    }

    /// Agent model for this stimulus's domain with the given parameters.
    pub fn model(&self, params: AgentParams) -> AgentModel {
        match self.domain {
            DomainKind::Dkg => {
                let grid = self.grid.as_ref().expect("grid stimuli carry their layout");
                AgentModel {
                    heuristic: Arc::new(MazeDistance::new(&self.task, grid).expect("task built from this grid")),
                    corruption: Arc::new(NoCorruption),
                    task: self.task.clone(),
                    params,
                }
            }
            DomainKind::Blockwords => AgentModel {
                heuristic: Arc::new(FfHeuristic::new(self.task.clone())),
                corruption: Arc::new(WordPermutation::new(self.task.clone())),
                task: self.task.clone(),
                params,
            },
        }
    }
}

/// Directory of the stimuli shipped with this crate.
pub fn shipped_dir(domain: DomainKind) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join("stimuli")
        .join(domain.name())
}

pub fn shipped(domain: DomainKind) -> Result<Vec<Stimulus>, StimulusError> {
    Stimulus::load_dir(&shipped_dir(domain))
}
