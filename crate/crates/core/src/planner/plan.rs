use crate::task::{ActionId, State, Task};

/// Time-indexed intended actions. Entry `t` holds the state the agent
/// expects to be in before acting at step `t` and the action it means to take.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PartialPlan {
    base: usize,
    entries: Vec<(State, ActionId)>,
}

impl PartialPlan {
    pub fn empty(base: usize) -> Self {
        PartialPlan {
            base,
            entries: Vec::new(),
        }
    }

    pub fn new(base: usize, entries: Vec<(State, ActionId)>) -> Self {
        PartialPlan { base, entries }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// First timestep the plan does not cover.
    pub fn end(&self) -> usize {
        self.base + self.entries.len()
    }

    pub fn entries(&self) -> &[(State, ActionId)] {
        &self.entries
    }

    pub fn get(&self, t: usize) -> Option<&(State, ActionId)> {
        t.checked_sub(self.base).and_then(|i| self.entries.get(i))
    }

    /// The planned action at `t`, if the plan covers `t` and expected `s`.
    pub fn action_at(&self, t: usize, s: &State) -> Option<ActionId> {
        self.get(t).filter(|(e, _)| e == s).map(|&(_, a)| a)
    }

    /// Keeps the entries before `t` and appends `tail` starting at `t`. If
    /// the kept entries do not reach `t`, the plan restarts at `t`.
    pub fn extended(&self, t: usize, tail: Vec<(State, ActionId)>) -> PartialPlan {
        if t < self.base || t > self.end() {
            return PartialPlan::new(t, tail);
        }
        let mut entries = self.entries[..t - self.base].to_vec();
        entries.extend(tail);
        PartialPlan {
            base: self.base,
            entries,
        }
    }

    /// The plan without its entries from `end` on.
    pub fn truncated(&self, end: usize) -> PartialPlan {
        let keep = end.saturating_sub(self.base).min(self.entries.len());
        PartialPlan {
            base: self.base,
            entries: self.entries[..keep].to_vec(),
        }
    }

    /// The entries from `t` on, rebased at `t`.
    pub fn tail_from(&self, t: usize) -> PartialPlan {
        let skip = t.saturating_sub(self.base).min(self.entries.len());
        PartialPlan {
            base: t.max(self.base),
            entries: self.entries[skip..].to_vec(),
        }
    }

    /// Replays every entry through `apply` and checks that each expected
    /// state follows from the previous entry.
    pub fn is_consistent(&self, task: &Task) -> bool {
        self.entries.iter().all(|(s, a)| task.is_applicable(s, *a))
            && self
                .entries
                .windows(2)
                .all(|w| task.apply_unchecked(&w[0].0, w[0].1) == w[1].0)
    }

    /// State reached after the last entry.
    pub fn final_state(&self, task: &Task) -> Option<State> {
        self.entries.last().map(|(s, a)| task.apply_unchecked(s, *a))
    }
}
