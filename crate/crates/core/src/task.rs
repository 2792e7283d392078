//! Eagerly grounded planning task: the atom universe, ground actions and the
//! deterministic transition function.
//!
//! Predicates that no action ever adds or deletes are compiled away at
//! grounding time, so [`State`] only stores atoms that can change. Ground
//! actions are kept in lexicographic `(schema, args)` order and
//! [`ActionId`]s follow that order, which makes every action listing stable.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::pddl::{
    self, ActionSchema, AtomForm, Comparison, Condition, DomainDef, Effect, FluentRef, GroundAtom,
    NumExpr, NumOp, ParseError, ProblemDef, Term,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaskError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("fluent {0} is used but never initialised")]
    UninitialisedFluent(String),
    #[error("action {0} is not applicable in this state")]
    Inapplicable(String),
    #[error("unknown atom {0}")]
    UnknownAtom(String),
    #[error("goal `{0}` mentions a static atom that is false in every state")]
    ImpossibleGoal(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("action `{0}` is ambiguous here: {1}")]
    AmbiguousAction(String, String),
    #[error("no applicable action matches `{0}`")]
    NoMatchingAction(String),
}

pub type AtomId = u32;

/// Index of a ground action in its task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub u32);

/// Fixed-width bit set over a task's atom universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactSet(Box<[u64]>);

impl FactSet {
    pub fn empty(universe: usize) -> Self {
        FactSet(vec![0; universe.div_ceil(64)].into_boxed_slice())
    }

    #[inline]
    pub fn contains(&self, atom: AtomId) -> bool {
        let i = atom as usize;
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, atom: AtomId) {
        let i = atom as usize;
        self.0[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, atom: AtomId) {
        let i = atom as usize;
        self.0[i / 64] &= !(1 << (i % 64));
    }

    pub fn set(&mut self, atom: AtomId, value: bool) {
        if value {
            self.insert(atom)
        } else {
            self.remove(atom)
        }
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    /// Number of atoms on which the two sets disagree.
    pub fn hamming(&self, other: &FactSet) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.0.iter().enumerate().flat_map(|(w, bits)| {
            let mut bits = *bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some((w * 64) as u32 + b)
            })
        })
    }
}

/// World state: the true dynamic atoms plus integer fluent values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    pub facts: FactSet,
    pub fluents: Box<[i64]>,
}

impl State {
    #[inline]
    pub fn holds(&self, atom: AtomId) -> bool {
        self.facts.contains(atom)
    }
}

/// Identity of a ground action, e.g. `(unstack p a)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAction {
    pub schema: String,
    pub args: Vec<String>,
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.schema)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// A labelled conjunction of ground atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GoalSpec {
    pub label: String,
    atoms: Vec<AtomId>,
}

impl GoalSpec {
    pub fn atoms(&self) -> &[AtomId] {
        &self.atoms
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Const(i64),
    Fluent(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn eval(&self, fluents: &[i64]) -> i64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Fluent(i) => fluents[*i],
            Expr::Add(a, b) => a.eval(fluents) + b.eval(fluents),
            Expr::Sub(a, b) => a.eval(fluents) - b.eval(fluents),
        }
    }
}

#[derive(Debug, Clone)]
struct ActionDef {
    name: GroundAction,
    pre_pos: Vec<AtomId>,
    pre_neg: Vec<AtomId>,
    pre_num: Vec<(Comparison, Expr, Expr)>,
    add: Vec<AtomId>,
    del: Vec<AtomId>,
    num: Vec<(NumOp, usize, Expr)>,
}

/// Grounded domain + problem.
#[derive(Debug, Clone)]
pub struct Task {
    domain: DomainDef,
    problem: ProblemDef,
    atoms: Vec<GroundAtom>,
    atom_index: HashMap<GroundAtom, AtomId>,
    fluents: Vec<GroundAtom>,
    fluent_index: HashMap<GroundAtom, usize>,
    static_true: HashSet<GroundAtom>,
    static_preds: HashSet<String>,
    actions: Vec<ActionDef>,
    action_index: HashMap<GroundAction, ActionId>,
    init: State,
    goals: Vec<GoalSpec>,
}

/// Atom-level view of an action used during grounding, before interning.
struct RawAction {
    name: GroundAction,
    pre_pos: Vec<GroundAtom>,
    pre_neg: Vec<GroundAtom>,
    pre_num: Vec<(Comparison, NumExpr, NumExpr)>,
    add: Vec<GroundAtom>,
    del: Vec<GroundAtom>,
    num: Vec<(NumOp, GroundAtom, NumExpr)>,
    binding: HashMap<String, String>,
}

fn bind_atom(a: &AtomForm, binding: &HashMap<String, String>) -> GroundAtom {
    GroundAtom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| bind_term(t, binding)).collect(),
    }
}

fn bind_fluent(f: &FluentRef, binding: &HashMap<String, String>) -> GroundAtom {
    GroundAtom {
        predicate: f.function.clone(),
        args: f.args.iter().map(|t| bind_term(t, binding)).collect(),
    }
}

fn bind_term(t: &Term, binding: &HashMap<String, String>) -> String {
    match t {
        Term::Var(v) => binding[v].clone(),
        Term::Const(c) => c.clone(),
    }
}

impl Task {
    pub fn from_texts(domain: &str, problem: &str) -> Result<Self, TaskError> {
        let d = pddl::parse_domain(domain)?;
        let p = pddl::parse_problem(problem, &d)?;
        Self::ground(d, p)
    }

    pub fn ground(domain: DomainDef, problem: ProblemDef) -> Result<Self, TaskError> {
        let mut changing: HashSet<&str> = HashSet::new();
        let mut added: HashSet<&str> = HashSet::new();
        for a in &domain.actions {
            for e in &a.effect {
                match e {
                    Effect::Add(x) => {
                        changing.insert(&x.predicate);
                        added.insert(&x.predicate);
                    }
                    Effect::Delete(x) => {
                        changing.insert(&x.predicate);
                    }
                    Effect::Numeric(..) => {}
                }
            }
        }
        let static_preds: HashSet<String> = domain
            .predicates
            .iter()
            .filter(|p| !changing.contains(p.name.as_str()))
            .map(|p| p.name.clone())
            .collect();
        let init: HashSet<GroundAtom> = problem.init.iter().cloned().collect();

        let mut raw = Vec::new();
        for schema in &domain.actions {
            ground_schema(&domain, &problem, schema, &static_preds, &added, &init, &mut raw);
        }

        // delete-relaxed reachability from the initial state
        let mut reach: HashSet<GroundAtom> = init
            .iter()
            .filter(|a| !static_preds.contains(&a.predicate))
            .cloned()
            .collect();
        let mut live = vec![false; raw.len()];
        loop {
            let mut changed = false;
            for (i, r) in raw.iter().enumerate() {
                if !live[i] && r.pre_pos.iter().all(|a| reach.contains(a)) {
                    live[i] = true;
                    changed = true;
                    reach.extend(r.add.iter().cloned());
                }
            }
            if !changed {
                break;
            }
        }
        let mut raw: Vec<RawAction> = raw
            .into_iter()
            .zip(live)
            .filter_map(|(r, l)| l.then_some(r))
            .collect();
        for g in &problem.goals {
            for a in &g.atoms {
                if !static_preds.contains(&a.predicate) {
                    reach.insert(a.clone());
                }
            }
        }
        for r in &raw {
            reach.extend(r.del.iter().cloned());
        }

        let mut atoms: Vec<GroundAtom> = reach.into_iter().collect();
        atoms.sort();
        let atom_index: HashMap<GroundAtom, AtomId> = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i as AtomId))
            .collect();

        let mut fluents: Vec<GroundAtom> = problem.init_fluents.iter().map(|(a, _)| a.clone()).collect();
        fluents.sort();
        fluents.dedup();
        let fluent_index: HashMap<GroundAtom, usize> = fluents
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();

        let compile = |e: &NumExpr, binding: &HashMap<String, String>| -> Result<Expr, TaskError> {
            fn go(
                e: &NumExpr,
                b: &HashMap<String, String>,
                idx: &HashMap<GroundAtom, usize>,
            ) -> Result<Expr, TaskError> {
                Ok(match e {
                    NumExpr::Const(c) => Expr::Const(*c),
                    NumExpr::Fluent(f) => {
                        let g = bind_fluent(f, b);
                        Expr::Fluent(
                            *idx.get(&g)
                                .ok_or_else(|| TaskError::UninitialisedFluent(g.to_string()))?,
                        )
                    }
                    NumExpr::Add(x, y) => Expr::Add(Box::new(go(x, b, idx)?), Box::new(go(y, b, idx)?)),
                    NumExpr::Sub(x, y) => Expr::Sub(Box::new(go(x, b, idx)?), Box::new(go(y, b, idx)?)),
                })
            }
            go(e, binding, &fluent_index)
        };

        raw.sort_by(|a, b| a.name.cmp(&b.name));
        let mut actions = Vec::with_capacity(raw.len());
        for r in &raw {
            let ids = |v: &[GroundAtom]| -> Vec<AtomId> {
                let mut out: Vec<AtomId> = v.iter().filter_map(|a| atom_index.get(a).copied()).collect();
                out.sort_unstable();
                out.dedup();
                out
            };
            let mut pre_num = Vec::new();
            for (op, l, rr) in &r.pre_num {
                pre_num.push((*op, compile(l, &r.binding)?, compile(rr, &r.binding)?));
            }
            let mut num = Vec::new();
            for (op, f, e) in &r.num {
                let fi = *fluent_index
                    .get(f)
                    .ok_or_else(|| TaskError::UninitialisedFluent(f.to_string()))?;
                num.push((*op, fi, compile(e, &r.binding)?));
            }
            actions.push(ActionDef {
                name: r.name.clone(),
                pre_pos: ids(&r.pre_pos),
                // negative literals over never-true atoms hold trivially
                pre_neg: ids(&r.pre_neg),
                pre_num,
                add: ids(&r.add),
                del: ids(&r.del),
                num,
            });
        }
        let action_index = actions
            .iter()
            .enumerate()
            .map(|(i, a)| (a.name.clone(), ActionId(i as u32)))
            .collect();

        let mut facts = FactSet::empty(atoms.len());
        for a in &problem.init {
            if let Some(&id) = atom_index.get(a) {
                facts.insert(id);
            }
        }
        let mut values = vec![0i64; fluents.len()];
        for (a, v) in &problem.init_fluents {
            values[fluent_index[a]] = *v;
        }
        let static_true = init
            .iter()
            .filter(|a| static_preds.contains(&a.predicate))
            .cloned()
            .collect();

        let mut task = Task {
            domain,
            problem,
            atoms,
            atom_index,
            fluents,
            fluent_index,
            static_true,
            static_preds,
            actions,
            action_index,
            init: State {
                facts,
                fluents: values.into_boxed_slice(),
            },
            goals: Vec::new(),
        };
        let goals = task
            .problem
            .goals
            .iter()
            .map(|g| task.goal(&g.label, &g.atoms))
            .collect::<Result<Vec<_>, _>>()?;
        task.goals = goals;
        Ok(task)
    }

    pub fn domain(&self) -> &DomainDef {
        &self.domain
    }

    pub fn problem(&self) -> &ProblemDef {
        &self.problem
    }

    pub fn initial_state(&self) -> &State {
        &self.init
    }

    pub fn goals(&self) -> &[GoalSpec] {
        &self.goals
    }

    pub fn goal_prior(&self) -> &[f64] {
        &self.problem.goal_prior
    }

    pub fn goal_by_label(&self, label: &str) -> Option<&GoalSpec> {
        self.goals.iter().find(|g| g.label == label)
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn num_fluents(&self) -> usize {
        self.fluents.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn atom(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id as usize]
    }

    pub fn atom_id(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.atom_index.get(atom).copied()
    }

    pub fn fluent(&self, i: usize) -> &GroundAtom {
        &self.fluents[i]
    }

    pub fn fluent_id(&self, name: &str, args: &[&str]) -> Option<usize> {
        self.fluent_index.get(&GroundAtom::new(name, args)).copied()
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id.0 as usize].name
    }

    pub fn action_id(&self, action: &GroundAction) -> Option<ActionId> {
        self.action_index.get(action).copied()
    }

    pub fn is_static(&self, predicate: &str) -> bool {
        self.static_preds.contains(predicate)
    }

    /// Builds a goal from ground atoms. Static atoms that hold initially are
    /// dropped; static atoms that do not hold make the goal impossible.
    pub fn goal(&self, label: &str, atoms: &[GroundAtom]) -> Result<GoalSpec, TaskError> {
        let mut ids = Vec::new();
        for a in atoms {
            if self.static_preds.contains(&a.predicate) {
                if !self.static_true.contains(a) {
                    return Err(TaskError::ImpossibleGoal(label.to_string()));
                }
                continue;
            }
            ids.push(
                self.atom_id(a)
                    .ok_or_else(|| TaskError::UnknownAtom(a.to_string()))?,
            );
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(GoalSpec {
            label: label.to_string(),
            atoms: ids,
        })
    }

    #[inline]
    pub fn is_applicable(&self, s: &State, a: ActionId) -> bool {
        let def = &self.actions[a.0 as usize];
        def.pre_pos.iter().all(|&p| s.facts.contains(p))
            && def.pre_neg.iter().all(|&p| !s.facts.contains(p))
            && def
                .pre_num
                .iter()
                .all(|(op, l, r)| op.holds(l.eval(&s.fluents), r.eval(&s.fluents)))
    }

    /// Applicable ground actions in lexicographic order.
    pub fn available_actions(&self, s: &State) -> Vec<ActionId> {
        (0..self.actions.len() as u32)
            .map(ActionId)
            .filter(|&a| self.is_applicable(s, a))
            .collect()
    }

    /// Successor state; deletes are applied before adds and numeric effects
    /// read the pre-state.
    pub fn apply(&self, s: &State, a: ActionId) -> Result<State, TaskError> {
        if !self.is_applicable(s, a) {
            return Err(TaskError::Inapplicable(self.action(a).to_string()));
        }
        Ok(self.apply_unchecked(s, a))
    }

    pub fn apply_unchecked(&self, s: &State, a: ActionId) -> State {
        let def = &self.actions[a.0 as usize];
        let mut facts = s.facts.clone();
        for &d in &def.del {
            facts.remove(d);
        }
        for &p in &def.add {
            facts.insert(p);
        }
        let fluents = if def.num.is_empty() {
            s.fluents.clone()
        } else {
            let mut v = s.fluents.to_vec();
            for (op, i, e) in &def.num {
                let x = e.eval(&s.fluents);
                match op {
                    NumOp::Assign => v[*i] = x,
                    NumOp::Increase => v[*i] += x,
                    NumOp::Decrease => v[*i] -= x,
                }
            }
            v.into_boxed_slice()
        };
        State { facts, fluents }
    }

    /// Adds of an action without its deletes (delete relaxation).
    pub fn apply_relaxed(&self, s: &State, a: ActionId) -> State {
        let mut t = s.clone();
        for &p in &self.actions[a.0 as usize].add {
            t.facts.insert(p);
        }
        t
    }

    pub fn satisfies(&self, s: &State, g: &GoalSpec) -> bool {
        g.atoms.iter().all(|&a| s.facts.contains(a))
    }

    pub(crate) fn positive_preconditions(&self, a: ActionId) -> &[AtomId] {
        &self.actions[a.0 as usize].pre_pos
    }

    pub(crate) fn add_effects(&self, a: ActionId) -> &[AtomId] {
        &self.actions[a.0 as usize].add
    }

    pub fn delete_effects(&self, a: ActionId) -> &[AtomId] {
        &self.actions[a.0 as usize].del
    }

    /// Atoms whose truth value the action's effects mention.
    pub fn touched_atoms(&self, a: ActionId) -> impl Iterator<Item = AtomId> + '_ {
        let d = &self.actions[a.0 as usize];
        d.add.iter().chain(&d.del).copied()
    }

    pub fn touched_fluents(&self, a: ActionId) -> impl Iterator<Item = usize> + '_ {
        self.actions[a.0 as usize].num.iter().map(|(_, i, _)| *i)
    }

    /// Resolves a written action against the applicable actions in `s`.
    ///
    /// Accepts `schema arg...` with or without parentheses; the arguments
    /// given must be a prefix of the ground arguments and the match must be
    /// unique among applicable actions.
    pub fn resolve_action(&self, s: &State, text: &str) -> Result<ActionId, TaskError> {
        let cleaned = text.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = cleaned.split_whitespace().map(str::to_ascii_lowercase);
        let schema = parts
            .next()
            .ok_or_else(|| TaskError::UnknownAction(text.to_string()))?;
        if self.domain.action(&schema).is_none() {
            return Err(TaskError::UnknownAction(schema));
        }
        let args: Vec<String> = parts.collect();
        let matches: Vec<ActionId> = self
            .available_actions(s)
            .into_iter()
            .filter(|&a| {
                let g = self.action(a);
                g.schema == schema && g.args.len() >= args.len() && g.args[..args.len()] == args[..]
            })
            .collect();
        match matches.as_slice() {
            [one] => Ok(*one),
            [] => Err(TaskError::NoMatchingAction(text.to_string())),
            many => Err(TaskError::AmbiguousAction(
                text.to_string(),
                many.iter()
                    .map(|&a| self.action(a).to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
            )),
        }
    }

    /// Human-readable list of the true atoms and fluent values.
    pub fn describe(&self, s: &State) -> String {
        let mut parts: Vec<String> = s.facts.iter().map(|a| self.atom(a).to_string()).collect();
        for (i, v) in s.fluents.iter().enumerate() {
            parts.push(format!("(= {} {v})", self.fluents[i]));
        }
        parts.join(" ")
    }
}

fn ground_schema(
    domain: &DomainDef,
    problem: &ProblemDef,
    schema: &ActionSchema,
    static_preds: &HashSet<String>,
    added: &HashSet<&str>,
    init: &HashSet<GroundAtom>,
    out: &mut Vec<RawAction>,
) {
    let candidates: Vec<Vec<&str>> = schema
        .params
        .iter()
        .map(|p| {
            problem
                .objects
                .iter()
                .filter(|o| domain.is_subtype(&o.ty, &p.ty))
                .map(|o| o.name.as_str())
                .collect()
        })
        .collect();
    // literals checkable at grounding time, keyed by the deepest parameter they use
    let mut checks: Vec<Vec<(&AtomForm, bool)>> = vec![Vec::new(); schema.params.len() + 1];
    for c in &schema.precondition {
        let (atom, positive) = match c {
            Condition::Atom(a) => (a, true),
            Condition::Not(a) => (a, false),
            Condition::Compare(..) => continue,
        };
        let is_static = static_preds.contains(&atom.predicate);
        let never_added = !added.contains(atom.predicate.as_str());
        if is_static || (positive && never_added) {
            let depth = atom
                .args
                .iter()
                .filter_map(|t| match t {
                    Term::Var(v) => schema.params.iter().position(|p| &p.name == v),
                    Term::Const(_) => None,
                })
                .map(|i| i + 1)
                .max()
                .unwrap_or(0);
            checks[depth].push((atom, positive));
        }
    }
    let mut binding: HashMap<String, String> = HashMap::new();
    let ok = |depth: usize, binding: &HashMap<String, String>| {
        checks[depth]
            .iter()
            .all(|(a, positive)| init.contains(&bind_atom(a, binding)) == *positive)
    };
    if !ok(0, &binding) {
        return;
    }
    fn rec<'a>(
        depth: usize,
        schema: &'a ActionSchema,
        candidates: &[Vec<&'a str>],
        binding: &mut HashMap<String, String>,
        ok: &dyn Fn(usize, &HashMap<String, String>) -> bool,
        static_preds: &HashSet<String>,
        out: &mut Vec<RawAction>,
    ) {
        if depth == schema.params.len() {
            out.push(instantiate(schema, binding, static_preds));
            return;
        }
        for obj in &candidates[depth] {
            binding.insert(schema.params[depth].name.clone(), obj.to_string());
            if ok(depth + 1, binding) {
                rec(depth + 1, schema, candidates, binding, ok, static_preds, out);
            }
        }
        binding.remove(&schema.params[depth].name);
    }
    rec(0, schema, &candidates, &mut binding, &ok, static_preds, out);
}

fn instantiate(
    schema: &ActionSchema,
    binding: &HashMap<String, String>,
    static_preds: &HashSet<String>,
) -> RawAction {
    let mut r = RawAction {
        name: GroundAction {
            schema: schema.name.clone(),
            args: schema.params.iter().map(|p| binding[&p.name].clone()).collect(),
        },
        pre_pos: Vec::new(),
        pre_neg: Vec::new(),
        pre_num: Vec::new(),
        add: Vec::new(),
        del: Vec::new(),
        num: Vec::new(),
        binding: binding.clone(),
    };
    for c in &schema.precondition {
        match c {
            Condition::Atom(a) if !static_preds.contains(&a.predicate) => {
                r.pre_pos.push(bind_atom(a, binding))
            }
            Condition::Not(a) if !static_preds.contains(&a.predicate) => {
                r.pre_neg.push(bind_atom(a, binding))
            }
            Condition::Compare(op, l, rr) => r.pre_num.push((*op, l.clone(), rr.clone())),
            _ => {}
        }
    }
    for e in &schema.effect {
        match e {
            Effect::Add(a) => r.add.push(bind_atom(a, binding)),
            Effect::Delete(a) => r.del.push(bind_atom(a, binding)),
            Effect::Numeric(op, f, x) => r.num.push((*op, bind_fluent(f, binding), x.clone())),
        }
    }
    r
}
