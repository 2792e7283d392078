use std::collections::{BTreeMap, HashSet, VecDeque};

use btom::domains::blockwords::problem_pddl;
use btom::domains::{GridSpec, MazeDistance};
use btom::heuristic::Blind;
use btom::pddl::{BLOCK_WORDS_DOMAIN, DOORS_KEYS_GEMS_DOMAIN};
use btom::planner::{
    expand_distribution, optimal_astar, probabilistic_astar, sample_budget, value_function, Budget, Expansion,
    PartialPlan, PlanError, StateSpace,
};
use btom::rng::stream;
use btom::task::{GoalSpec, State, Task};
use proptest::prelude::*;

fn labels() -> BTreeMap<char, String> {
    [('1', "red"), ('2', "yellow"), ('3', "blue")]
        .into_iter()
        .map(|(c, l)| (c, l.to_string()))
        .collect()
}

fn dkg(ascii: &str) -> (Task, MazeDistance) {
    let g = GridSpec::parse(ascii, &labels()).unwrap();
    let t = Task::from_texts(DOORS_KEYS_GEMS_DOMAIN, &g.to_problem_pddl("t", None)).unwrap();
    let h = MazeDistance::new(&t, &g).unwrap();
    (t, h)
}

/// Uniform-cost (breadth-first) distance over the real state graph.
fn bfs_distance(t: &Task, s: &State, g: &GoalSpec) -> Option<usize> {
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

fn replay_ends_at(t: &Task, s0: &State, plan: &[(State, btom::task::ActionId)]) -> State {
    let mut s = s0.clone();
    for (e, a) in plan {
        assert_eq!(&s, e);
        s = t.apply(&s, *a).unwrap();
    }
    s
}

#[test]
fn symmetric_frontier_is_uniform() {
    let p = expand_distribution(&[4.0, 4.0], Expansion::Boltzmann { gamma: 3.0 });
    assert_eq!(p, vec![0.5, 0.5]);
}

#[test]
fn softmax_over_two_f_values() {
    let p = expand_distribution(&[2.0, 4.0], Expansion::Boltzmann { gamma: 0.5 });
    let e = (-4.0f64).exp();
    assert!((p[0] - 1.0 / (1.0 + e)).abs() < 1e-12);
    assert!((p[1] - e / (1.0 + e)).abs() < 1e-12);
    assert!((p[0] - 0.9820).abs() < 5e-5 && (p[1] - 0.0180).abs() < 5e-5);
    assert_eq!(expand_distribution(&[2.0, 4.0], Expansion::Argmin), vec![1.0, 0.0]);
}

proptest! {
    #[test]
    fn expansion_weights_normalise_and_ignore_shifts(
        f in prop::collection::vec(0.0f64..50.0, 1..20),
        gamma in 0.01f64..10.0,
        shift in -100.0f64..100.0,
    ) {
        let p = expand_distribution(&f, Expansion::Boltzmann { gamma });
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let shifted: Vec<f64> = f.iter().map(|x| x + shift).collect();
        let q = expand_distribution(&shifted, Expansion::Boltzmann { gamma });
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn budget_mean_matches_negative_binomial() {
    // the clamp moves mass 0.01 from 0 to 1, shifting the mean by 0.01
    let mut rng = stream(21, &[]);
    let n = 100_000;
    let mean = (0..n).map(|_| sample_budget(2, 0.9, &mut rng) as f64).sum::<f64>() / n as f64;
    assert!((mean - 18.0).abs() <= 0.5, "{mean}");
}

#[test]
fn corridor_plan_is_the_shortest_path() {
    let (t, h) = dkg("@...1");
    let s0 = t.initial_state();
    let g = &t.goals()[0];
    let plan = optimal_astar(&t, s0, g, &h).unwrap();
    let names: Vec<String> = plan.iter().map(|(_, a)| t.action(*a).schema.clone()).collect();
    // four moves along the corridor, then the gem is picked up
    assert_eq!(names, vec!["right", "right", "right", "right", "pickup-gem"]);
    assert_eq!(Some(plan.len()), bfs_distance(&t, s0, g));
    let mut rng = stream(1, &[]);
    let out = probabilistic_astar(&t, s0, g, &h, Expansion::Argmin, Budget::Unbounded, &mut rng, false);
    assert!(out.reached_goal);
    assert_eq!(out.plan, plan);
    assert!(t.satisfies(&replay_ends_at(&t, s0, &plan), g));
}

#[test]
fn unit_budget_returns_at_most_one_action() {
    let (t, h) = dkg("..\n@.\n.1");
    let mut rng = stream(2, &[]);
    for _ in 0..50 {
        let out = probabilistic_astar(
            &t,
            t.initial_state(),
            &t.goals()[0],
            &h,
            Expansion::Boltzmann { gamma: 0.5 },
            Budget::Limited(1),
            &mut rng,
            false,
        );
        assert!(out.plan.len() <= 1);
        assert!(out.expansions <= 1);
    }
}

#[test]
fn partial_plans_extend_two_then_three_more() {
    let (t, h) = dkg("@.....1");
    let g = &t.goals()[0];
    let mut rng = stream(3, &[]);
    let s0 = t.initial_state();
    let first = probabilistic_astar(&t, s0, g, &h, Expansion::Argmin, Budget::Limited(2), &mut rng, false);
    assert_eq!(first.plan.len(), 2);
    let p1 = PartialPlan::new(1, first.plan);
    let s2 = p1.final_state(&t).unwrap();
    // plan is exhausted at t = 3
    assert!(p1.get(3).is_none());
    let more = probabilistic_astar(&t, &s2, g, &h, Expansion::Argmin, Budget::Limited(3), &mut rng, false);
    assert_eq!(more.plan.len(), 3);
    let p3 = p1.extended(3, more.plan);
    assert_eq!(p3.len(), 5);
    assert_eq!(p3.base(), 1);
    assert!(p3.is_consistent(&t));
    assert_eq!(&p3.entries()[..2], p1.entries());
}

#[test]
fn plan_extension_after_divergence_roots_at_actual_state() {
    let (t, h) = dkg("@...1\n.....");
    let g = &t.goals()[0];
    let s0 = t.initial_state();
    let plan = PartialPlan::new(1, optimal_astar(&t, s0, g, &h).unwrap());
    // a slip moves the agent down instead of right
    let slip = t.resolve_action(s0, "down").unwrap();
    let s1 = t.apply(s0, slip).unwrap();
    assert!(plan.action_at(2, &s1).is_none());
    let tail = optimal_astar(&t, &s1, g, &h).unwrap();
    let p2 = plan.extended(2, tail);
    assert_eq!(p2.get(2).unwrap().0, s1);
    assert_eq!(p2.get(1), plan.get(1));
}

#[test]
fn already_satisfied_goal_gives_empty_plan() {
    let t = Task::from_texts(BLOCK_WORDS_DOMAIN, &problem_pddl("t", &["ab".into()], &["ab".into(), "ba".into()]).unwrap())
        .unwrap();
    let plan = optimal_astar(&t, t.initial_state(), t.goal_by_label("ab").unwrap(), &Blind).unwrap();
    assert!(plan.is_empty());
    let plan = optimal_astar(&t, t.initial_state(), t.goal_by_label("ba").unwrap(), &Blind).unwrap();
    assert_eq!(plan.len(), 4);
}

#[test]
fn gem_behind_door_without_key_is_unreachable() {
    let (t, h) = dkg("@.D1\nWWWW");
    let r = optimal_astar(&t, t.initial_state(), &t.goals()[0], &h);
    assert_eq!(r, Err(PlanError::Unreachable("red".into())));
    let mut rng = stream(4, &[]);
    let out = probabilistic_astar(
        &t,
        t.initial_state(),
        &t.goals()[0],
        &h,
        Expansion::Boltzmann { gamma: 0.5 },
        Budget::Unbounded,
        &mut rng,
        false,
    );
    assert!(out.plan.is_empty() && !out.reached_goal);
}

#[test]
fn same_seed_same_plan() {
    let (t, h) = dkg("@....\n.WWW.\n.k.D.\n.WWW1");
    let g = &t.goals()[0];
    let run = |seed| {
        let mut rng = stream(seed, &[]);
        probabilistic_astar(&t, t.initial_state(), g, &h, Expansion::Boltzmann { gamma: 0.5 }, Budget::Limited(12), &mut rng, false)
    };
    assert_eq!(run(9).plan, run(9).plan);
    let distinct: HashSet<Vec<_>> = (0..30).map(|s| run(s).plan).collect();
    assert!(distinct.len() > 1);
}

#[test]
fn trace_has_one_record_per_expansion() {
    let (t, h) = dkg("@...1");
    let mut rng = stream(5, &[]);
    let out = probabilistic_astar(&t, t.initial_state(), &t.goals()[0], &h, Expansion::Argmin, Budget::Unbounded, &mut rng, true);
    assert_eq!(out.trace.len(), out.expansions as usize);
    assert_eq!(out.trace[0].cost, 0);
    assert_eq!(out.trace[0].heuristic, 4.0);
}

fn grid_strategy() -> impl Strategy<Value = String> {
    (2usize..=6, 2usize..=6).prop_flat_map(|(w, h)| {
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
    fn exact_search_is_cost_optimal(ascii in grid_strategy()) {
        let (t, h) = dkg(&ascii);
        let g = &t.goals()[0];
        let s0 = t.initial_state();
        match (optimal_astar(&t, s0, g, &h), bfs_distance(&t, s0, g)) {
            (Ok(plan), Some(d)) => {
                prop_assert_eq!(plan.len(), d);
                prop_assert!(t.satisfies(&replay_ends_at(&t, s0, &plan), g));
            }
            (Err(PlanError::Unreachable(_)), None) => {}
            (r, d) => prop_assert!(false, "search {:?} vs bfs {:?}", r.map(|p| p.len()), d),
        }
    }

    #[test]
    fn budget_respected_and_plans_replay(ascii in grid_strategy(), eta in 1u32..30, seed in 0u64..1000, gamma in 0.02f64..2.0) {
        let (t, h) = dkg(&ascii);
        let g = &t.goals()[0];
        let s0 = t.initial_state();
        let mut rng = stream(seed, &[]);
        let out = probabilistic_astar(&t, s0, g, &h, Expansion::Boltzmann { gamma }, Budget::Limited(eta), &mut rng, false);
        prop_assert!(out.expansions <= eta);
        prop_assert!(out.plan.len() <= eta as usize);
        let end = replay_ends_at(&t, s0, &out.plan);
        prop_assert_eq!(out.reached_goal, t.satisfies(&end, g));
        prop_assert!(PartialPlan::new(1, out.plan).is_consistent(&t));
    }
}

#[test]
fn value_function_is_negative_bfs_distance_on_five_by_five() {
    let (t, _) = dkg("@...W\n.WW.k\n.D...\n..W.W\n1..D2");
    let space = StateSpace::enumerate(&t, t.initial_state(), 1_000_000).unwrap();
    assert!(space.len() > 100);
    for g in t.goals() {
        let v = value_function(&t, &space, g);
        for (i, s) in space.states().iter().enumerate() {
            let expected = bfs_distance(&t, s, g).map_or(f64::NEG_INFINITY, |d| -(d as f64));
            assert_eq!(v[i], expected, "{}", t.describe(s));
        }
    }
}

#[test]
fn value_is_zero_at_goal_and_minus_one_next_to_it() {
    let (t, _) = dkg("@1");
    let space = StateSpace::enumerate(&t, t.initial_state(), 100).unwrap();
    let g = &t.goals()[0];
    let v = value_function(&t, &space, g);
    let s0 = t.initial_state();
    let s1 = t.apply(s0, t.resolve_action(s0, "right").unwrap()).unwrap();
    let s2 = t.apply(&s1, t.resolve_action(&s1, "pickup-gem").unwrap()).unwrap();
    assert_eq!(v[space.index_of(&s2).unwrap()], 0.0);
    assert_eq!(v[space.index_of(&s1).unwrap()], -1.0);
    assert_eq!(v[space.index_of(s0).unwrap()], -2.0);
}

#[test]
fn state_space_guard_names_its_limit() {
    let (t, _) = dkg("@....\n.....\n....1");
    assert_eq!(
        StateSpace::enumerate(&t, t.initial_state(), 5).unwrap_err(),
        PlanError::StateSpaceTooLarge { limit: 5 }
    );
}
