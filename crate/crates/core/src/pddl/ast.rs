//! Syntax tree for the supported PDDL subset.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedParam {
    pub name: String,
    pub ty: String,
}

/// Predicate or numeric-function signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub params: Vec<TypedParam>,
}

impl Signature {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomForm {
    pub predicate: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentRef {
    pub function: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumExpr {
    Const(i64),
    Fluent(FluentRef),
    Add(Box<NumExpr>, Box<NumExpr>),
    Sub(Box<NumExpr>, Box<NumExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Eq => "=",
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Comparison::Eq => lhs == rhs,
            Comparison::Lt => lhs < rhs,
            Comparison::Le => lhs <= rhs,
            Comparison::Gt => lhs > rhs,
            Comparison::Ge => lhs >= rhs,
        }
    }
}

/// One conjunct of a precondition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Atom(AtomForm),
    Not(AtomForm),
    Compare(Comparison, NumExpr, NumExpr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumOp {
    Assign,
    Increase,
    Decrease,
}

impl NumOp {
    pub fn keyword(self) -> &'static str {
        match self {
            NumOp::Assign => "assign",
            NumOp::Increase => "increase",
            NumOp::Decrease => "decrease",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Effect {
    Add(AtomForm),
    Delete(AtomForm),
    Numeric(NumOp, FluentRef, NumExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedParam>,
    pub precondition: Vec<Condition>,
    pub effect: Vec<Effect>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainDef {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<TypeDecl>,
    pub predicates: Vec<Signature>,
    pub functions: Vec<Signature>,
    pub actions: Vec<ActionSchema>,
}

impl DomainDef {
    pub fn predicate(&self, name: &str) -> Option<&Signature> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&Signature> {
        self.functions.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn has_type(&self, name: &str) -> bool {
        name == "object" || self.types.iter().any(|t| t.name == name)
    }

    /// True if `ty` equals `ancestor` or inherits from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty;
        // bounded walk guards against cyclic declarations
        for _ in 0..=self.types.len() {
            if cur == ancestor {
                return true;
            }
            match self.types.iter().find(|t| t.name == cur) {
                Some(t) => cur = &t.parent,
                None => return false,
            }
        }
        false
    }
}

/// A fully ground atom, e.g. `(on a b)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoalDef {
    pub label: String,
    pub atoms: Vec<GroundAtom>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDef {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedParam>,
    pub init: Vec<GroundAtom>,
    pub init_fluents: Vec<(GroundAtom, i64)>,
    pub goals: Vec<GoalDef>,
    pub goal_prior: Vec<f64>,
}

impl ProblemDef {
    pub fn goal_index(&self, label: &str) -> Option<usize> {
        self.goals.iter().position(|g| g.label == label)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

fn write_call(f: &mut fmt::Formatter<'_>, head: &str, args: &[Term]) -> fmt::Result {
    write!(f, "({head}")?;
    for a in args {
        write!(f, " {a}")?;
    }
    write!(f, ")")
}

impl fmt::Display for AtomForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_call(f, &self.predicate, &self.args)
    }
}

impl fmt::Display for FluentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_call(f, &self.function, &self.args)
    }
}

impl fmt::Display for NumExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumExpr::Const(c) => write!(f, "{c}"),
            NumExpr::Fluent(r) => write!(f, "{r}"),
            NumExpr::Add(a, b) => write!(f, "(+ {a} {b})"),
            NumExpr::Sub(a, b) => write!(f, "(- {a} {b})"),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Atom(a) => write!(f, "{a}"),
            Condition::Not(a) => write!(f, "(not {a})"),
            Condition::Compare(op, l, r) => write!(f, "({} {l} {r})", op.symbol()),
        }
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effect::Add(a) => write!(f, "{a}"),
            Effect::Delete(a) => write!(f, "(not {a})"),
            Effect::Numeric(op, r, e) => write!(f, "({} {r} {e})", op.keyword()),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

fn write_params(f: &mut fmt::Formatter<'_>, params: &[TypedParam]) -> fmt::Result {
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        write!(f, "{} - {}", p.name, p.ty)?;
    }
    Ok(())
}

fn write_signature(f: &mut fmt::Formatter<'_>, s: &Signature) -> fmt::Result {
    write!(f, "({}", s.name)?;
    if !s.params.is_empty() {
        write!(f, " ")?;
        write_params(f, &s.params)?;
    }
    write!(f, ")")
}

fn write_conj<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    write!(f, "(and")?;
    for it in items {
        write!(f, " {it}")?;
    }
    write!(f, ")")
}

impl fmt::Display for DomainDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            writeln!(f, "  (:requirements {})", self.requirements.join(" "))?;
        }
        if !self.types.is_empty() {
            write!(f, "  (:types")?;
            for t in &self.types {
                write!(f, " {} - {}", t.name, t.parent)?;
            }
            writeln!(f, ")")?;
        }
        write!(f, "  (:predicates")?;
        for p in &self.predicates {
            write!(f, " ")?;
            write_signature(f, p)?;
        }
        writeln!(f, ")")?;
        if !self.functions.is_empty() {
            write!(f, "  (:functions")?;
            for p in &self.functions {
                write!(f, " ")?;
                write_signature(f, p)?;
            }
            writeln!(f, ")")?;
        }
        for a in &self.actions {
            write!(f, "  (:action {}\n    :parameters (", a.name)?;
            write_params(f, &a.params)?;
            write!(f, ")\n    :precondition ")?;
            write_conj(f, &a.precondition)?;
            write!(f, "\n    :effect ")?;
            write_conj(f, &a.effect)?;
            writeln!(f, ")")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for ProblemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain)?;
        write!(f, "  (:objects")?;
        for o in &self.objects {
            write!(f, " {} - {}", o.name, o.ty)?;
        }
        writeln!(f, ")")?;
        write!(f, "  (:init")?;
        for a in &self.init {
            write!(f, "\n    {a}")?;
        }
        for (a, v) in &self.init_fluents {
            write!(f, "\n    (= {a} {v})")?;
        }
        writeln!(f, ")")?;
        write!(f, "  (:goals")?;
        for g in &self.goals {
            write!(f, "\n    ({} ", g.label)?;
            write_conj(f, &g.atoms)?;
            write!(f, ")")?;
        }
        writeln!(f, ")")?;
        write!(f, "  (:goal-prior")?;
        for (g, p) in self.goals.iter().zip(&self.goal_prior) {
            write!(f, " ({} {p:?})", g.label)?;
        }
        write!(f, "))")
    }
}
