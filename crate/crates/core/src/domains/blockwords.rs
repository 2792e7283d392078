//! Block Words: lettered blocks whose towers spell words top-down, plus the
//! letter-permutation goal corruption.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DomainError, GoalCorruption};
use crate::pddl::GroundAtom;
use crate::rng::SimRng;
use crate::task::{GoalSpec, Task, TaskError};

/// Longest word the planner is asked to spell.
pub const MAX_WORD_LEN: usize = 8;

/// Above this many distinct corruptions the support is not enumerated.
const ENUMERATION_LIMIT: usize = 720;

/// Tower letters read top-down.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WordGoal {
    letters: Vec<char>,
}

impl WordGoal {
    pub fn new(word: &str) -> Result<Self, DomainError> {
        let letters: Vec<char> = word.chars().collect();
        if letters.is_empty() {
            return Err(DomainError::Word("empty word".into()));
        }
        if letters.len() > MAX_WORD_LEN {
            return Err(DomainError::Word(format!(
                "`{word}` is longer than {MAX_WORD_LEN} letters"
            )));
        }
        let distinct: BTreeSet<char> = letters.iter().copied().collect();
        if distinct.len() != letters.len() {
            return Err(DomainError::Word(format!("`{word}` repeats a letter")));
        }
        if !letters.iter().all(|c| c.is_ascii_lowercase()) {
            return Err(DomainError::Word(format!("`{word}` must be lowercase ascii")));
        }
        Ok(WordGoal { letters })
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    /// `(clear top) (on top next) ... (ontable bottom)`.
    pub fn atoms(&self) -> Vec<GroundAtom> {
        let l = &self.letters;
        let name = |c: char| c.to_string();
        let mut v = vec![GroundAtom::new("clear", &[&name(l[0])])];
        for w in l.windows(2) {
            v.push(GroundAtom::new("on", &[&name(w[0]), &name(w[1])]));
        }
        v.push(GroundAtom::new("ontable", &[&name(l[l.len() - 1])]));
        v
    }

    pub fn to_goal(&self, task: &Task) -> Result<GoalSpec, TaskError> {
        task.goal(&self.to_string(), &self.atoms())
    }

    /// Every distinct rearrangement of the letters other than the word itself.
    pub fn permutations(&self) -> Vec<WordGoal> {
        fn rec(prefix: &mut Vec<char>, rest: &mut Vec<char>, out: &mut Vec<Vec<char>>) {
            if rest.is_empty() {
                out.push(prefix.clone());
                return;
            }
            for i in 0..rest.len() {
                let c = rest.remove(i);
                prefix.push(c);
                rec(prefix, rest, out);
                prefix.pop();
                rest.insert(i, c);
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut self.letters.clone(), &mut out);
        out.into_iter()
            .filter(|p| *p != self.letters)
            .map(|letters| WordGoal { letters })
            .collect()
    }
}

impl fmt::Display for WordGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.letters {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Uniform draw over the permutations of `g` that differ from `g`.
pub fn corrupt_goal<R: Rng + ?Sized>(g: &WordGoal, rng: &mut R) -> Result<WordGoal, DomainError> {
    if g.letters.len() < 2 {
        return Err(DomainError::Word(format!(
            "`{g}` has no distinct permutation"
        )));
    }
    // rejection keeps the draw uniform over the non-identity permutations
    let mut letters = g.letters.clone();
    loop {
        letters.shuffle(rng);
        if letters != g.letters {
            return Ok(WordGoal { letters });
        }
    }
}

/// Problem text for a block arrangement. `towers` are read top-down; blocks
/// are named by their letter.
pub fn problem_pddl(name: &str, towers: &[String], words: &[String]) -> Result<String, DomainError> {
    let mut seen = BTreeSet::new();
    for t in towers {
        if t.is_empty() {
            return Err(DomainError::Word("empty tower".into()));
        }
        for c in t.chars() {
            if !c.is_ascii_lowercase() || !seen.insert(c) {
                return Err(DomainError::Word(format!("block `{c}` invalid or repeated")));
            }
        }
    }
    for w in words {
        let wg = WordGoal::new(w)?;
        if let Some(c) = wg.letters.iter().find(|c| !seen.contains(c)) {
            return Err(DomainError::Word(format!("word `{w}` needs missing block `{c}`")));
        }
    }
    let mut s = String::new();
    let _ = write!(s, "(define (problem {name})\n  (:domain block-words)\n  (:objects");
    for c in &seen {
        let _ = write!(s, " {c}");
    }
    s.push_str(" - block)\n  (:init\n    (handempty)\n");
    for t in towers {
        let l: Vec<char> = t.chars().collect();
        let _ = writeln!(s, "    (clear {})", l[0]);
        for w in l.windows(2) {
            let _ = writeln!(s, "    (on {} {})", w[0], w[1]);
        }
        let _ = writeln!(s, "    (ontable {})", l[l.len() - 1]);
    }
    s.push_str("  )\n  (:goals");
    for w in words {
        let atoms = WordGoal::new(w)?.atoms();
        let _ = write!(s, "\n    ({w} (and");
        for a in atoms {
            let _ = write!(s, " {a}");
        }
        s.push_str("))");
    }
    s.push_str("))\n");
    Ok(s)
}

/// Replaces a word goal by a random permutation of its letters.
#[derive(Debug, Clone)]
pub struct WordPermutation {
    task: Arc<Task>,
}

impl WordPermutation {
    pub fn new(task: Arc<Task>) -> Self {
        WordPermutation { task }
    }
}

impl GoalCorruption for WordPermutation {
    fn corrupt(&self, g0: &GoalSpec, rng: &mut SimRng) -> GoalSpec {
        let Ok(word) = WordGoal::new(&g0.label) else {
            return g0.clone();
        };
        match corrupt_goal(&word, rng) {
            Ok(w) => w.to_goal(&self.task).unwrap_or_else(|_| g0.clone()),
            Err(_) => g0.clone(),
        }
    }

    fn support(&self, g0: &GoalSpec) -> Option<Vec<GoalSpec>> {
        let word = WordGoal::new(&g0.label).ok()?;
        let n: usize = (1..=word.letters.len()).product();
        if n - 1 > ENUMERATION_LIMIT {
            return None;
        }
        word.permutations()
            .into_iter()
            .map(|w| w.to_goal(&self.task).ok())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::BLOCK_WORDS_DOMAIN;
    use crate::rng::stream;
    use std::collections::HashMap;

    #[test]
    fn word_validation() {
        assert!(WordGoal::new("").is_err());
        assert!(WordGoal::new("peer").is_err());
        assert!(WordGoal::new("abcdefghi").is_err());
        assert!(WordGoal::new("Pear").is_err());
        assert!(WordGoal::new("pear").is_ok());
    }

    #[test]
    fn single_letter_cannot_be_corrupted() {
        let mut rng = stream(1, &[]);
        assert!(corrupt_goal(&WordGoal::new("a").unwrap(), &mut rng).is_err());
    }

    #[test]
    fn two_letters_always_swap() {
        let mut rng = stream(2, &[]);
        let w = WordGoal::new("ab").unwrap();
        for _ in 0..100 {
            assert_eq!(corrupt_goal(&w, &mut rng).unwrap().to_string(), "ba");
        }
    }

    #[test]
    fn paer_is_a_possible_corruption_of_pear() {
        let w = WordGoal::new("pear").unwrap();
        let perms: Vec<String> = w.permutations().iter().map(|p| p.to_string()).collect();
        assert_eq!(perms.len(), 23);
        assert!(perms.contains(&"paer".to_string()));
        let mut rng = stream(3, &[]);
        let hit = (0..2000).any(|_| corrupt_goal(&w, &mut rng).unwrap().to_string() == "paer");
        assert!(hit);
    }

    #[test]
    fn corruption_is_uniform_over_non_identity_permutations() {
        // enumerate the 3! orderings; all but the identity are equally likely
        let w = WordGoal::new("abc").unwrap();
        let support: Vec<String> = w.permutations().iter().map(|p| p.to_string()).collect();
        assert_eq!(support.len(), 5);
        let mut rng = stream(4, &[]);
        let n = 100_000;
        let mut counts: HashMap<String, usize> = HashMap::new();
        for _ in 0..n {
            *counts.entry(corrupt_goal(&w, &mut rng).unwrap().to_string()).or_default() += 1;
        }
        assert!(!counts.contains_key("abc"));
        for s in &support {
            let f = counts[s] as f64 / n as f64;
            assert!((f - 0.2).abs() <= 0.01, "{s}: {f}");
        }
    }

    #[test]
    fn word_goal_atoms_spell_top_down() {
        let atoms: Vec<String> = WordGoal::new("pear")
            .unwrap()
            .atoms()
            .iter()
            .map(|a| a.to_string())
            .collect();
        assert_eq!(
            atoms,
            vec!["(clear p)", "(on p e)", "(on e a)", "(on a r)", "(ontable r)"]
        );
    }

    #[test]
    fn satisfies_reads_towers_top_down() {
        let words = ["pear".to_string(), "reap".to_string()];
        let t = Task::from_texts(
            BLOCK_WORDS_DOMAIN,
            &problem_pddl("t", &["pear".into()], &words).unwrap(),
        )
        .unwrap();
        assert!(t.satisfies(t.initial_state(), t.goal_by_label("pear").unwrap()));
        assert!(!t.satisfies(t.initial_state(), t.goal_by_label("reap").unwrap()));
        let t2 = Task::from_texts(
            BLOCK_WORDS_DOMAIN,
            &problem_pddl("t", &["reap".into()], &words).unwrap(),
        )
        .unwrap();
        assert!(t2.satisfies(t2.initial_state(), t2.goal_by_label("reap").unwrap()));
        assert!(!t2.satisfies(t2.initial_state(), t2.goal_by_label("pear").unwrap()));
    }

    #[test]
    fn missing_block_rejected() {
        assert!(problem_pddl("t", &["ab".into()], &["abc".into()]).is_err());
        assert!(problem_pddl("t", &["ab".into(), "a".into()], &["ab".into()]).is_err());
    }

    #[test]
    fn permutation_corruptor_enumerates_support() {
        let t = Arc::new(
            Task::from_texts(
                BLOCK_WORDS_DOMAIN,
                &problem_pddl("t", &["p".into(), "e".into(), "a".into(), "r".into()], &["pear".into()]).unwrap(),
            )
            .unwrap(),
        );
        let c = WordPermutation::new(t.clone());
        let g0 = &t.goals()[0];
        let support = c.support(g0).unwrap();
        assert_eq!(support.len(), 23);
        assert!(support.iter().all(|g| g != g0));
        let mut rng = stream(5, &[]);
        let g = c.corrupt(g0, &mut rng);
        assert!(support.contains(&g));
    }
}
