use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use btom::domains::blockwords::problem_pddl;
use btom::domains::GridSpec;
use btom::pddl::{GroundAtom, BLOCK_WORDS_DOMAIN, DOORS_KEYS_GEMS_DOMAIN};
use btom::task::{State, Task, TaskError};
use proptest::prelude::*;

fn labels() -> BTreeMap<char, String> {
    [('1', "red"), ('2', "yellow"), ('3', "blue")]
        .into_iter()
        .map(|(c, l)| (c, l.to_string()))
        .collect()
}

fn dkg(ascii: &str) -> Task {
    let g = GridSpec::parse(ascii, &labels()).unwrap();
    Task::from_texts(DOORS_KEYS_GEMS_DOMAIN, &g.to_problem_pddl("t", None)).unwrap()
}

fn bw(towers: &[&str], words: &[&str]) -> Task {
    let towers: Vec<String> = towers.iter().map(|s| s.to_string()).collect();
    let words: Vec<String> = words.iter().map(|s| s.to_string()).collect();
    Task::from_texts(BLOCK_WORDS_DOMAIN, &problem_pddl("t", &towers, &words).unwrap()).unwrap()
}

fn names(t: &Task, s: &State) -> Vec<String> {
    t.available_actions(s).iter().map(|&a| t.action(a).to_string()).collect()
}

fn reachable(t: &Task) -> Vec<State> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([t.initial_state().clone()]);
    seen.insert(t.initial_state().clone());
    let mut out = Vec::new();
    while let Some(s) = queue.pop_front() {
        for a in t.available_actions(&s) {
            let n = t.apply(&s, a).unwrap();
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
        out.push(s);
    }
    out
}

#[test]
fn corner_of_open_grid_moves_down_right_or_waits() {
    let t = dkg("@..\n...\n..1");
    assert_eq!(names(&t, t.initial_state()), vec!["(down c0_0 c0_1)", "(right c0_0 c1_0)", "(wait)"]);
}

#[test]
fn holding_a_block_allows_only_put_down_stack_or_wait() {
    let t = bw(&["a", "b", "c"], &["abc"]);
    let s = t.apply(t.initial_state(), t.resolve_action(t.initial_state(), "pick-up a").unwrap()).unwrap();
    assert_eq!(names(&t, &s), vec!["(put-down a)", "(stack a b)", "(stack a c)", "(wait)"]);
}

#[test]
fn domain_without_wait_can_have_no_actions() {
    let domain = "(define (domain d) (:predicates (p))
        (:action go :parameters () :precondition (p) :effect (not (p))))";
    let problem = "(define (problem q) (:domain d) (:init) (:goal (not-used)))";
    assert!(Task::from_texts(domain, problem).is_err());
    let problem = "(define (problem q) (:domain d) (:init (p)) (:goal (p)))";
    let t = Task::from_texts(domain, problem).unwrap();
    let s = t.apply(t.initial_state(), t.resolve_action(t.initial_state(), "go").unwrap()).unwrap();
    assert!(t.available_actions(&s).is_empty());
}

#[test]
fn unlocking_consumes_the_key_and_opens_the_door() {
    let t = dkg("@kD1");
    let mut s = t.initial_state().clone();
    assert!(t.resolve_action(&s, "unlock-door").is_err());
    for step in ["right", "pickup-key", "unlock-door", "right", "right", "pickup-gem"] {
        s = t.apply(&s, t.resolve_action(&s, step).unwrap()).unwrap();
        if step == "unlock-door" {
            let key = t.atom_id(&GroundAtom::new("has-key", &["k1"])).unwrap();
            let locked = t.atom_id(&GroundAtom::new("locked", &["c2_0"])).unwrap();
            assert!(!s.holds(key));
            assert!(!s.holds(locked));
        }
    }
    assert!(t.satisfies(&s, t.goal_by_label("red").unwrap()));
}

#[test]
fn locked_door_blocks_movement() {
    let t = dkg("@D1");
    assert!(matches!(
        t.resolve_action(t.initial_state(), "right"),
        Err(TaskError::NoMatchingAction(_))
    ));
}

#[test]
fn moves_shift_position_fluents_by_one() {
    let t = dkg("...\n.@.\n..1");
    let (x, y) = (t.fluent_id("xpos", &[]).unwrap(), t.fluent_id("ypos", &[]).unwrap());
    let s0 = t.initial_state();
    assert_eq!((s0.fluents[x], s0.fluents[y]), (1, 1));
    for (dir, dx, dy) in [("up", 0, -1), ("down", 0, 1), ("left", -1, 0), ("right", 1, 0)] {
        let s = t.apply(s0, t.resolve_action(s0, dir).unwrap()).unwrap();
        assert_eq!((s.fluents[x], s.fluents[y]), (1 + dx, 1 + dy), "{dir}");
    }
}

#[test]
fn inapplicable_action_is_an_error() {
    let t = bw(&["ab"], &["ab"]);
    let s = t.initial_state();
    let stack = t
        .action_id(&btom::task::GroundAction { schema: "stack".into(), args: vec!["a".into(), "b".into()] })
        .unwrap();
    assert!(matches!(t.apply(s, stack), Err(TaskError::Inapplicable(_))));
}

#[test]
fn ambiguous_and_unknown_actions_are_reported() {
    let t = bw(&["a", "b", "c"], &["abc"]);
    let s = t.initial_state();
    assert!(matches!(t.resolve_action(s, "pick-up"), Err(TaskError::AmbiguousAction(..))));
    assert!(matches!(t.resolve_action(s, "fly a"), Err(TaskError::UnknownAction(_))));
}

#[test]
fn static_predicates_are_compiled_away() {
    let t = dkg("@.1");
    assert!(t.is_static("step-right"));
    assert!(t.is_static("adjacent"));
    assert!(!t.is_static("at"));
    assert!(t.atom_id(&GroundAtom::new("step-right", &["c0_0", "c1_0"])).is_none());
}

/// Independent Block Words applicability rules written directly in terms of
/// the block configuration.
fn bw_oracle(t: &Task, s: &State, blocks: &[&str]) -> BTreeSet<String> {
    let holds = |p: &str, args: &[&str]| {
        t.atom_id(&GroundAtom::new(p, args)).is_some_and(|id| s.holds(id))
    };
    let mut out = BTreeSet::from(["(wait)".to_string()]);
    let empty = holds("handempty", &[]);
    for &x in blocks {
        if empty && holds("clear", &[x]) && holds("ontable", &[x]) {
            out.insert(format!("(pick-up {x})"));
        }
        if holds("holding", &[x]) {
            out.insert(format!("(put-down {x})"));
        }
        for &y in blocks {
            if x == y {
                continue;
            }
            if holds("holding", &[x]) && holds("clear", &[y]) {
                out.insert(format!("(stack {x} {y})"));
            }
            if empty && holds("clear", &[x]) && holds("on", &[x, y]) {
                out.insert(format!("(unstack {x} {y})"));
            }
        }
    }
    out
}

#[test]
fn available_actions_match_hand_written_rules_in_every_reachable_state() {
    let blocks = ["a", "b", "c", "d"];
    let t = bw(&["ab", "c", "d"], &["abcd"]);
    let states = reachable(&t);
    assert!(states.len() > 50);
    for s in &states {
        let got: BTreeSet<String> = names(&t, s).into_iter().collect();
        assert_eq!(got, bw_oracle(&t, s, &blocks), "{}", t.describe(s));
        for a in 0..t.num_actions() as u32 {
            let a = btom::task::ActionId(a);
            assert_eq!(t.is_applicable(s, a), got.contains(&t.action(a).to_string()));
        }
    }
}

#[test]
fn available_actions_are_in_lexicographic_order() {
    let t = bw(&["a", "b", "c"], &["abc"]);
    for s in reachable(&t) {
        let v: Vec<_> = t.available_actions(&s).iter().map(|&a| t.action(a).clone()).collect();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}

fn walk(t: &Task, choices: &[usize]) -> State {
    let mut s = t.initial_state().clone();
    for &c in choices {
        let av = t.available_actions(&s);
        s = t.apply(&s, av[c % av.len()]).unwrap();
    }
    s
}

proptest! {
    #[test]
    fn frame_property_holds(choices in prop::collection::vec(0usize..16, 0..12), pick in 0usize..16) {
        for t in [dkg("@.k.\n.WD.\n1..2"), bw(&["ab", "c", "d"], &["abcd"])] {
            let s = walk(&t, &choices);
            let av = t.available_actions(&s);
            let a = av[pick % av.len()];
            let n = t.apply(&s, a).unwrap();
            let atoms: HashSet<u32> = t.touched_atoms(a).collect();
            let fluents: HashSet<usize> = t.touched_fluents(a).collect();
            for p in 0..t.num_atoms() as u32 {
                if !atoms.contains(&p) {
                    prop_assert_eq!(s.holds(p), n.holds(p));
                }
            }
            for i in 0..t.num_fluents() {
                if !fluents.contains(&i) {
                    prop_assert_eq!(s.fluents[i], n.fluents[i]);
                }
            }
        }
    }

    #[test]
    fn apply_is_deterministic_and_extensional(choices in prop::collection::vec(0usize..16, 0..12), pick in 0usize..16) {
        let t = dkg("@.k.\n.WD.\n1..2");
        let s = walk(&t, &choices);
        let s2 = walk(&t, &choices);
        prop_assert_eq!(&s, &s2);
        let av = t.available_actions(&s);
        let a = av[pick % av.len()];
        prop_assert_eq!(t.apply(&s, a).unwrap(), t.apply(&s2, a).unwrap());
        let w = t.resolve_action(&s, "wait").unwrap();
        prop_assert_eq!(t.apply(&s, w).unwrap(), s.clone());
    }

    #[test]
    fn exactly_one_agent_position(choices in prop::collection::vec(0usize..16, 0..20)) {
        let t = dkg("@.k.\n.WD.\n1..2");
        let s = walk(&t, &choices);
        let at: Vec<String> = s.facts.iter().map(|p| t.atom(p).clone()).filter(|a| a.predicate == "at").map(|a| a.args[0].clone()).collect();
        prop_assert_eq!(at.len(), 1);
        let x = s.fluents[t.fluent_id("xpos", &[]).unwrap()];
        let y = s.fluents[t.fluent_id("ypos", &[]).unwrap()];
        prop_assert_eq!(&at[0], &format!("c{x}_{y}"));
    }
}
