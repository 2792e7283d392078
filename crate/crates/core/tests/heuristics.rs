use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use btom::domains::blockwords::problem_pddl;
use btom::domains::{FfHeuristic, GridSpec, MazeDistance};
use btom::heuristic::{Heuristic, UNREACHABLE};
use btom::pddl::{BLOCK_WORDS_DOMAIN, DOORS_KEYS_GEMS_DOMAIN};
use btom::task::{GoalSpec, State, Task};
use proptest::prelude::*;

fn bw(towers: &[&str], words: &[&str]) -> Arc<Task> {
    let towers: Vec<String> = towers.iter().map(|s| s.to_string()).collect();
    let words: Vec<String> = words.iter().map(|s| s.to_string()).collect();
    Arc::new(Task::from_texts(BLOCK_WORDS_DOMAIN, &problem_pddl("t", &towers, &words).unwrap()).unwrap())
}

/// Optimal delete-relaxed plan length by breadth-first search over relaxed
/// states (atom sets only grow).
fn relaxed_optimum(t: &Task, s: &State, g: &GoalSpec) -> Option<usize> {
    let mut seen = HashSet::from([s.clone()]);
    let mut queue = VecDeque::from([(s.clone(), 0)]);
    while let Some((x, d)) = queue.pop_front() {
        if t.satisfies(&x, g) {
            return Some(d);
        }
        for a in t.available_actions(&x) {
            let n = t.apply_relaxed(&x, a);
            if seen.insert(n.clone()) {
                queue.push_back((n, d + 1));
            }
        }
    }
    None
}

/// True goal distance by breadth-first search over the real state space.
fn true_distance(t: &Task, s: &State, g: &GoalSpec) -> Option<usize> {
    let mut seen = HashSet::from([s.clone()]);
    let mut queue = VecDeque::from([(s.clone(), 0)]);
    while let Some((x, d)) = queue.pop_front() {
        if t.satisfies(&x, g) {
            return Some(d);
        }
        for a in t.available_actions(&x) {
            let n = t.apply(&x, a).unwrap();
            if seen.insert(n.clone()) {
                queue.push_back((n, d + 1));
            }
        }
    }
    None
}

#[test]
fn two_letter_word_from_table_needs_two_relaxed_steps() {
    let t = bw(&["a", "b"], &["ab"]);
    let ff = FfHeuristic::new(t.clone());
    let g = &t.goals()[0];
    assert_eq!(relaxed_optimum(&t, t.initial_state(), g), Some(2));
    assert_eq!(ff.estimate(t.initial_state(), g), 2.0);
    let plan: Vec<String> = ff
        .relaxed_plan(t.initial_state(), g)
        .unwrap()
        .iter()
        .map(|&a| t.action(a).to_string())
        .collect();
    assert_eq!(plan, vec!["(pick-up a)", "(stack a b)"]);
}

#[test]
fn ff_is_zero_exactly_at_goal_states() {
    let t = bw(&["ab", "c"], &["abc", "cab"]);
    let ff = FfHeuristic::new(t.clone());
    let mut seen = HashSet::from([t.initial_state().clone()]);
    let mut queue = VecDeque::from([t.initial_state().clone()]);
    while let Some(s) = queue.pop_front() {
        for g in t.goals() {
            assert_eq!(ff.estimate(&s, g) == 0.0, t.satisfies(&s, g));
        }
        for a in t.available_actions(&s) {
            let n = t.apply(&s, a).unwrap();
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
}

#[test]
fn ff_is_unreachable_for_goal_needing_an_impossible_atom() {
    // `p` is consumed by `a` and nothing adds it back
    let domain = "(define (domain d) (:predicates (p) (q) (r))
        (:action a :parameters () :precondition (p) :effect (and (q) (not (p))))
        (:action c :parameters () :precondition (q) :effect (r)))";
    let problem = "(define (problem x) (:domain d) (:init (p)) (:goals (one (r)) (two (and (p) (r)))))";
    let t = Arc::new(Task::from_texts(domain, problem).unwrap());
    let ff = FfHeuristic::new(t.clone());
    let s0 = t.initial_state();
    assert_eq!(ff.estimate(s0, t.goal_by_label("one").unwrap()), 2.0);
    assert_eq!(ff.estimate(s0, t.goal_by_label("two").unwrap()), 2.0);
    let s1 = t.apply(s0, t.resolve_action(s0, "a").unwrap()).unwrap();
    assert_eq!(ff.estimate(&s1, t.goal_by_label("one").unwrap()), 1.0);
    assert_eq!(ff.estimate(&s1, t.goal_by_label("two").unwrap()), UNREACHABLE);
}

#[test]
fn ff_never_undercuts_the_relaxed_optimum_on_small_towers() {
    let t = bw(&["dab", "c"], &["abcd", "cab", "bd"]);
    let ff = FfHeuristic::new(t.clone());
    let mut seen = HashSet::from([t.initial_state().clone()]);
    let mut queue = VecDeque::from([t.initial_state().clone()]);
    let mut n = 0;
    while let Some(s) = queue.pop_front() {
        if n % 7 == 0 {
            for g in t.goals() {
                let opt = relaxed_optimum(&t, &s, g).unwrap() as f64;
                assert!(ff.estimate(&s, g) >= opt);
            }
        }
        n += 1;
        for a in t.available_actions(&s) {
            let x = t.apply(&s, a).unwrap();
            if seen.insert(x.clone()) {
                queue.push_back(x);
            }
        }
    }
}

proptest! {
    #[test]
    fn ff_decreases_along_its_own_relaxed_plan(choices in prop::collection::vec(0usize..8, 0..10), word in 0usize..3) {
        let t = bw(&["dab", "c"], &["abcd", "cab", "bd"]);
        let ff = FfHeuristic::new(t.clone());
        let mut s = t.initial_state().clone();
        for c in choices {
            let av = t.available_actions(&s);
            s = t.apply(&s, av[c % av.len()]).unwrap();
        }
        let g = &t.goals()[word];
        let plan = ff.relaxed_plan(&s, g).unwrap();
        prop_assert_eq!(plan.len() as f64, ff.estimate(&s, g));
        let mut r = s.clone();
        let mut h = ff.estimate(&r, g);
        for a in plan {
            prop_assert!(t.is_applicable(&r, a));
            r = t.apply_relaxed(&r, a);
            let h2 = ff.estimate(&r, g);
            prop_assert!(h2 < h);
            h = h2;
        }
        prop_assert!(t.satisfies(&r, g));
    }
}

fn labels() -> BTreeMap<char, String> {
    [('1', "red"), ('2', "yellow"), ('3', "blue")]
        .into_iter()
        .map(|(c, l)| (c, l.to_string()))
        .collect()
}

#[test]
fn maze_distance_equals_bfs_on_open_seven_by_seven() {
    let ascii = "@......\n.WWW...\n...W...\n.W.W.W.\n.W...W.\n.WWWWW.\n......1";
    let g = GridSpec::parse(ascii, &labels()).unwrap();
    let t = Task::from_texts(DOORS_KEYS_GEMS_DOMAIN, &g.to_problem_pddl("t", None)).unwrap();
    let h = MazeDistance::new(&t, &g).unwrap();
    let goal = &t.goals()[0];
    // BFS oracle over cells, independent of the task encoding
    let mut dist: HashMap<(i64, i64), usize> = HashMap::from([((6, 6), 0)]);
    let mut queue = VecDeque::from([(6i64, 6i64)]);
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in [(0, 1), (0, -1), (1, 0), (-1, 0)] {
            let n = (x + dx, y + dy);
            if g.is_open(n) && !dist.contains_key(&n) {
                dist.insert(n, dist[&(x, y)] + 1);
                queue.push_back(n);
            }
        }
    }
    let mut seen = HashSet::from([t.initial_state().clone()]);
    let mut queue = VecDeque::from([t.initial_state().clone()]);
    while let Some(s) = queue.pop_front() {
        let cell = h.agent_cell(&s);
        if !t.satisfies(&s, goal) {
            assert_eq!(h.estimate(&s, goal), dist[&cell] as f64);
            // plus one for picking the gem up
            assert_eq!(true_distance(&t, &s, goal), Some(dist[&cell] + 1));
        }
        for a in t.available_actions(&s) {
            let n = t.apply(&s, a).unwrap();
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
}

fn grid_strategy() -> impl Strategy<Value = String> {
    (2usize..=8, 2usize..=8).prop_flat_map(|(w, h)| {
        let n = w * h;
        (
            prop::collection::vec(prop::sample::select(vec!['.', '.', '.', 'W', 'D', 'k']), n),
            0..n,
            0..n,
        )
            .prop_filter_map("start and gem coincide", move |(mut cells, s, g)| {
                if s == g {
                    return None;
                }
                cells[s] = '@';
                cells[g] = '1';
                Some(cells.chunks(w).map(|r| r.iter().collect::<String>()).collect::<Vec<_>>().join("\n"))
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn maze_distance_is_admissible(ascii in grid_strategy()) {
        let g = GridSpec::parse(&ascii, &labels()).unwrap();
        let t = Task::from_texts(DOORS_KEYS_GEMS_DOMAIN, &g.to_problem_pddl("t", None)).unwrap();
        let h = MazeDistance::new(&t, &g).unwrap();
        let goal = &t.goals()[0];
        let s = t.initial_state();
        let est = h.estimate(s, goal);
        match true_distance(&t, s, goal) {
            Some(d) => prop_assert!(est <= d as f64, "{} > {}", est, d),
            None => {}
        }
        if est == UNREACHABLE {
            prop_assert!(true_distance(&t, s, goal).is_none());
        }
    }
}
