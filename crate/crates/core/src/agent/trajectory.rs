use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::task::{ActionId, GroundAction, State, Task};

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: action {action} is not applicable")]
    Inapplicable { line: usize, action: String },
    #[error("line {line}: recorded state change does not match {action}")]
    Mismatch { line: usize, action: String },
}

/// Latent annotations of one simulated step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLatent {
    /// Goal driving the plan at this step.
    pub goal: String,
    pub replanned: bool,
    pub planned: Option<String>,
}

/// A replay-consistent run: `states[k + 1] = apply(states[k], actions[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub actions: Vec<ActionId>,
    pub latents: Option<Vec<StepLatent>>,
    pub judgment_points: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    problem: String,
    steps: usize,
    judgment_points: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct StepRecord {
    t: usize,
    action: String,
    added: Vec<String>,
    deleted: Vec<String>,
    fluents: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    latent: Option<StepLatent>,
}

impl Trajectory {
    pub fn new(s0: State) -> Self {
        Trajectory {
            states: vec![s0],
            actions: Vec::new(),
            latents: None,
            judgment_points: Vec::new(),
        }
    }

    pub fn push(&mut self, a: ActionId, next: State) {
        self.actions.push(a);
        self.states.push(next);
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Replays the actions from the first state through `task`.
    pub fn from_actions(task: &Task, s0: &State, actions: &[ActionId]) -> Result<Self, TrajectoryError> {
        let mut traj = Trajectory::new(s0.clone());
        for (k, &a) in actions.iter().enumerate() {
            let s = traj.states.last().expect("nonempty");
            let next = task.apply(s, a).map_err(|_| TrajectoryError::Inapplicable {
                line: k + 1,
                action: task.action(a).to_string(),
            })?;
            traj.push(a, next);
        }
        Ok(traj)
    }

    pub fn is_consistent(&self, task: &Task) -> bool {
        self.states.len() == self.actions.len() + 1
            && self
                .actions
                .iter()
                .enumerate()
                .all(|(k, &a)| task.apply(&self.states[k], a).is_ok_and(|n| n == self.states[k + 1]))
    }

    /// One JSON header line, then one record per step with the action and
    /// the state change it caused.
    pub fn to_jsonl(&self, task: &Task) -> String {
        let header = Header {
            problem: task.problem().name.clone(),
            steps: self.len(),
            judgment_points: self.judgment_points.clone(),
        };
        let mut out = serde_json::to_string(&header).expect("serialisable") + "\n";
        for (k, &a) in self.actions.iter().enumerate() {
            let (s, n) = (&self.states[k], &self.states[k + 1]);
            let rec = StepRecord {
                t: k + 1,
                action: task.action(a).to_string(),
                added: n.facts.iter().filter(|&p| !s.holds(p)).map(|p| task.atom(p).to_string()).collect(),
                deleted: s.facts.iter().filter(|&p| !n.holds(p)).map(|p| task.atom(p).to_string()).collect(),
                fluents: n.fluents.to_vec(),
                latent: self.latents.as_ref().and_then(|l| l.get(k).cloned()),
            };
            out += &serde_json::to_string(&rec).expect("serialisable");
            out.push('\n');
        }
        out
    }

    /// Reads [`Trajectory::to_jsonl`] output, replaying from the task's
    /// initial state and checking every recorded change.
    pub fn from_jsonl(task: &Task, text: &str) -> Result<Self, TrajectoryError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(TrajectoryError::Format {
            line: 1,
            message: "missing header".into(),
        })?;
        let header: Header = serde_json::from_str(first).map_err(|e| TrajectoryError::Format {
            line: 1,
            message: e.to_string(),
        })?;
        let mut traj = Trajectory::new(task.initial_state().clone());
        traj.judgment_points = header.judgment_points;
        let mut latents = Vec::new();
        for (i, l) in lines {
            let line = i + 1;
            let rec: StepRecord = serde_json::from_str(l).map_err(|e| TrajectoryError::Format {
                line,
                message: e.to_string(),
            })?;
            let ga = parse_action(&rec.action).ok_or_else(|| TrajectoryError::Format {
                line,
                message: format!("bad action `{}`", rec.action),
            })?;
            let a = task.action_id(&ga).ok_or_else(|| TrajectoryError::Format {
                line,
                message: format!("unknown action `{}`", rec.action),
            })?;
            let s = traj.states.last().expect("nonempty");
            let next = task.apply(s, a).map_err(|_| TrajectoryError::Inapplicable {
                line,
                action: rec.action.clone(),
            })?;
            let added: Vec<String> = next.facts.iter().filter(|&p| !s.holds(p)).map(|p| task.atom(p).to_string()).collect();
            let deleted: Vec<String> = s.facts.iter().filter(|&p| !next.holds(p)).map(|p| task.atom(p).to_string()).collect();
            if added != rec.added || deleted != rec.deleted || next.fluents[..] != rec.fluents[..] {
                return Err(TrajectoryError::Mismatch { line, action: rec.action });
            }
            traj.push(a, next);
            if let Some(l) = rec.latent {
                latents.push(l);
            }
        }
        if traj.len() != header.steps {
            return Err(TrajectoryError::Format {
                line: 1,
                message: format!("header declares {} steps, found {}", header.steps, traj.len()),
            });
        }
        if !latents.is_empty() {
            traj.latents = Some(latents);
        }
        Ok(traj)
    }
}

fn parse_action(text: &str) -> Option<GroundAction> {
    let inner = text.trim().strip_prefix('(')?.strip_suffix(')')?;
    let mut parts = inner.split_whitespace();
    let schema = parts.next()?.to_string();
    Some(GroundAction {
        schema,
        args: parts.map(str::to_string).collect(),
    })
}
