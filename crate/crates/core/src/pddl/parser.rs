use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::sexpr::{read_one, syntax, SExpr};
use super::ParseError;

const SUPPORTED_REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":numeric-fluents",
    ":fluents",
];

/// Constructs outside the subset; reported by name rather than as syntax errors.
const UNSUPPORTED_CONNECTIVES: &[&str] = &[
    "or", "imply", "exists", "forall", "when", "either", "*", "/",
];

fn unsupported(feature: &str) -> ParseError {
    ParseError::Unsupported {
        feature: feature.to_string(),
    }
}

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], ParseError> {
    e.as_list()
        .ok_or_else(|| syntax(e.pos(), format!("expected {what} list")))
}

fn expect_atom<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, ParseError> {
    e.as_atom()
        .ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

fn check_name(e: &SExpr, what: &str) -> Result<String, ParseError> {
    let s = expect_atom(e, what)?;
    if s.starts_with('?') || s.starts_with(':') || s.parse::<f64>().is_ok() {
        return Err(syntax(e.pos(), format!("invalid {what} `{s}`")));
    }
    Ok(s.to_string())
}

/// Parses `a b - t c - u d` into typed names; untyped names default to `object`.
fn parse_typed_list(items: &[SExpr], vars: bool) -> Result<Vec<TypedParam>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let tok = expect_atom(&items[i], "name")?;
        if tok == "-" {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| syntax(items[i].pos(), "missing type after `-`"))?;
            if ty_expr.head() == Some("either") {
                return Err(unsupported("either"));
            }
            let ty = check_name(ty_expr, "type name")?;
            if pending.is_empty() {
                return Err(syntax(items[i].pos(), "`-` without preceding names"));
            }
            out.extend(pending.drain(..).map(|name| TypedParam {
                name,
                ty: ty.clone(),
            }));
            i += 2;
            continue;
        }
        if vars && !tok.starts_with('?') {
            return Err(syntax(items[i].pos(), format!("expected variable, found `{tok}`")));
        }
        if !vars {
            check_name(&items[i], "name")?;
        }
        pending.push(tok.to_string());
        i += 1;
    }
    out.extend(pending.into_iter().map(|name| TypedParam {
        name,
        ty: "object".to_string(),
    }));
    Ok(out)
}

fn parse_term(e: &SExpr) -> Result<Term, ParseError> {
    let s = expect_atom(e, "term")?;
    if let Some(v) = s.strip_prefix('?') {
        if v.is_empty() {
            return Err(syntax(e.pos(), "empty variable name"));
        }
        Ok(Term::Var(s.to_string()))
    } else {
        Ok(Term::Const(check_name(e, "constant")?))
    }
}

fn parse_atom_form(e: &SExpr) -> Result<AtomForm, ParseError> {
    let items = expect_list(e, "atom")?;
    let head = items
        .first()
        .ok_or_else(|| syntax(e.pos(), "empty atom"))?;
    let predicate = check_name(head, "predicate name")?;
    if UNSUPPORTED_CONNECTIVES.contains(&predicate.as_str()) {
        return Err(unsupported(&predicate));
    }
    let args = items[1..].iter().map(parse_term).collect::<Result<_, _>>()?;
    Ok(AtomForm { predicate, args })
}

fn parse_fluent_ref(e: &SExpr) -> Result<FluentRef, ParseError> {
    let a = parse_atom_form(e)?;
    Ok(FluentRef {
        function: a.predicate,
        args: a.args,
    })
}

fn parse_num_expr(e: &SExpr) -> Result<NumExpr, ParseError> {
    if let Some(s) = e.as_atom() {
        return s
            .parse::<i64>()
            .map(NumExpr::Const)
            .map_err(|_| syntax(e.pos(), format!("expected integer or fluent, found `{s}`")));
    }
    let items = expect_list(e, "numeric expression")?;
    match e.head() {
        Some(op @ ("+" | "-")) => {
            if items.len() != 3 {
                return Err(syntax(e.pos(), format!("`{op}` takes two operands")));
            }
            let a = Box::new(parse_num_expr(&items[1])?);
            let b = Box::new(parse_num_expr(&items[2])?);
            Ok(if op == "+" {
                NumExpr::Add(a, b)
            } else {
                NumExpr::Sub(a, b)
            })
        }
        Some(op @ ("*" | "/")) => Err(unsupported(op)),
        _ => Ok(NumExpr::Fluent(parse_fluent_ref(e)?)),
    }
}

fn comparison(head: &str) -> Option<Comparison> {
    Some(match head {
        "=" => Comparison::Eq,
        "<" => Comparison::Lt,
        "<=" => Comparison::Le,
        ">" => Comparison::Gt,
        ">=" => Comparison::Ge,
        _ => return None,
    })
}

fn flatten_and<'a>(e: &'a SExpr, out: &mut Vec<&'a SExpr>) -> Result<(), ParseError> {
    if e.head() == Some("and") {
        for item in &expect_list(e, "conjunction")?[1..] {
            flatten_and(item, out)?;
        }
    } else {
        expect_list(e, "formula")?;
        out.push(e);
    }
    Ok(())
}

fn parse_precondition(e: &SExpr) -> Result<Vec<Condition>, ParseError> {
    let mut parts = Vec::new();
    flatten_and(e, &mut parts)?;
    parts
        .into_iter()
        .map(|p| {
            let items = p.as_list().unwrap_or_default();
            match p.head() {
                None => Err(syntax(p.pos(), "empty condition")),
                Some("not") => {
                    if items.len() != 2 {
                        return Err(syntax(p.pos(), "`not` takes one argument"));
                    }
                    if let Some(h) = items[1].head() {
                        if comparison(h).is_some() || UNSUPPORTED_CONNECTIVES.contains(&h) || h == "and" || h == "not" {
                            return Err(unsupported("non-literal negation"));
                        }
                    }
                    Ok(Condition::Not(parse_atom_form(&items[1])?))
                }
                Some(h) if comparison(h).is_some() => {
                    if items.len() != 3 {
                        return Err(syntax(p.pos(), format!("`{h}` takes two operands")));
                    }
                    Ok(Condition::Compare(
                        comparison(h).unwrap(),
                        parse_num_expr(&items[1])?,
                        parse_num_expr(&items[2])?,
                    ))
                }
                Some(_) => Ok(Condition::Atom(parse_atom_form(p)?)),
            }
        })
        .collect()
}

fn parse_effect(e: &SExpr) -> Result<Vec<Effect>, ParseError> {
    let mut parts = Vec::new();
    flatten_and(e, &mut parts)?;
    parts
        .into_iter()
        .map(|p| {
            let items = p.as_list().unwrap_or_default();
            match p.head() {
                None => Err(syntax(p.pos(), "empty effect")),
                Some("not") => {
                    if items.len() != 2 {
                        return Err(syntax(p.pos(), "`not` takes one argument"));
                    }
                    Ok(Effect::Delete(parse_atom_form(&items[1])?))
                }
                Some(op @ ("assign" | "increase" | "decrease")) => {
                    if items.len() != 3 {
                        return Err(syntax(p.pos(), format!("`{op}` takes two operands")));
                    }
                    let kind = match op {
                        "assign" => NumOp::Assign,
                        "increase" => NumOp::Increase,
                        _ => NumOp::Decrease,
                    };
                    Ok(Effect::Numeric(
                        kind,
                        parse_fluent_ref(&items[1])?,
                        parse_num_expr(&items[2])?,
                    ))
                }
                Some(op @ ("scale-up" | "scale-down")) => Err(unsupported(op)),
                Some(_) => Ok(Effect::Add(parse_atom_form(p)?)),
            }
        })
        .collect()
}

fn parse_signatures(items: &[SExpr]) -> Result<Vec<Signature>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let l = expect_list(&items[i], "signature")?;
        let head = l
            .first()
            .ok_or_else(|| syntax(items[i].pos(), "empty signature"))?;
        let name = check_name(head, "signature name")?;
        let params = parse_typed_list(&l[1..], true)?;
        out.push(Signature { name, params });
        i += 1;
        // `(f ...) - number` return-type annotations
        if items.get(i).and_then(SExpr::as_atom) == Some("-") {
            match items.get(i + 1).and_then(SExpr::as_atom) {
                Some("number") => i += 2,
                Some(other) => return Err(unsupported(&format!("function type {other}"))),
                None => return Err(syntax(items[i].pos(), "missing function type")),
            }
        }
    }
    Ok(out)
}

fn parse_action(items: &[SExpr], pos: super::sexpr::Pos) -> Result<ActionSchema, ParseError> {
    let name = check_name(
        items.get(1).ok_or_else(|| syntax(pos, "action without name"))?,
        "action name",
    )?;
    let mut params = Vec::new();
    let mut precondition = Vec::new();
    let mut effect = Vec::new();
    let mut i = 2;
    while i < items.len() {
        let key = expect_atom(&items[i], "action keyword")?;
        let val = items
            .get(i + 1)
            .ok_or_else(|| syntax(items[i].pos(), format!("missing value for `{key}`")))?;
        match key {
            ":parameters" => params = parse_typed_list(expect_list(val, "parameter")?, true)?,
            ":precondition" => precondition = parse_precondition(val)?,
            ":effect" => effect = parse_effect(val)?,
            ":duration" | ":condition" => return Err(unsupported(":durative-actions")),
            other => return Err(syntax(items[i].pos(), format!("unknown action keyword `{other}`"))),
        }
        i += 2;
    }
    Ok(ActionSchema {
        name,
        params,
        precondition,
        effect,
    })
}

/// Parses a domain definition and validates it structurally.
pub fn parse_domain(text: &str) -> Result<DomainDef, ParseError> {
    let root = read_one(text)?;
    let items = expect_list(&root, "define")?;
    if root.head() != Some("define") {
        return Err(syntax(root.pos(), "expected `(define ...)`"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax(root.pos(), "missing domain header"))?;
    let h = expect_list(header, "domain header")?;
    if header.head() != Some("domain") || h.len() != 2 {
        return Err(syntax(header.pos(), "expected `(domain NAME)`"));
    }
    let mut dom = DomainDef {
        name: check_name(&h[1], "domain name")?,
        requirements: Vec::new(),
        types: Vec::new(),
        predicates: Vec::new(),
        functions: Vec::new(),
        actions: Vec::new(),
    };
    for section in &items[2..] {
        let s = expect_list(section, "section")?;
        match section.head() {
            Some(":requirements") => {
                for r in &s[1..] {
                    let r = expect_atom(r, "requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(unsupported(r));
                    }
                    dom.requirements.push(r.to_string());
                }
            }
            Some(":types") => {
                dom.types = parse_typed_list(&s[1..], false)?
                    .into_iter()
                    .map(|p| TypeDecl {
                        name: p.name,
                        parent: p.ty,
                    })
                    .collect()
            }
            Some(":predicates") => dom.predicates = parse_signatures(&s[1..])?,
            Some(":functions") => dom.functions = parse_signatures(&s[1..])?,
            Some(":action") => dom.actions.push(parse_action(s, section.pos())?),
            Some(":constants") => return Err(unsupported(":constants")),
            Some(":derived") => return Err(unsupported(":derived-predicates")),
            Some(":durative-action") => return Err(unsupported(":durative-actions")),
            Some(other) => {
                return Err(syntax(section.pos(), format!("unknown domain section `{other}`")))
            }
            None => return Err(syntax(section.pos(), "empty section")),
        }
    }
    validate_domain(&dom)?;
    Ok(dom)
}

fn invalid(msg: impl Into<String>) -> ParseError {
    ParseError::Invalid(msg.into())
}

fn validate_domain(dom: &DomainDef) -> Result<(), ParseError> {
    let mut seen = HashSet::new();
    for t in &dom.types {
        if !seen.insert(&t.name) {
            return Err(invalid(format!("type `{}` declared twice", t.name)));
        }
    }
    for t in &dom.types {
        if !dom.has_type(&t.parent) {
            return Err(ParseError::UnknownType(t.parent.clone()));
        }
        if !dom.is_subtype(&t.name, "object") {
            return Err(invalid(format!("type `{}` has a cyclic hierarchy", t.name)));
        }
    }
    for sig in dom.predicates.iter().chain(&dom.functions) {
        for p in &sig.params {
            if !dom.has_type(&p.ty) {
                return Err(ParseError::UnknownType(p.ty.clone()));
            }
        }
    }
    let mut names = HashSet::new();
    for a in &dom.actions {
        if !names.insert(&a.name) {
            return Err(invalid(format!("action `{}` declared twice", a.name)));
        }
        validate_action(dom, a)?;
    }
    Ok(())
}

fn validate_terms(
    dom: &DomainDef,
    action: &ActionSchema,
    params: &HashMap<&str, &str>,
    args: &[Term],
    sig: &Signature,
) -> Result<(), ParseError> {
    if args.len() != sig.arity() {
        return Err(invalid(format!(
            "`{}` used with {} arguments in action `{}`, declared with {}",
            sig.name,
            args.len(),
            action.name,
            sig.arity()
        )));
    }
    for (arg, p) in args.iter().zip(&sig.params) {
        match arg {
            Term::Var(v) => {
                let ty = params.get(v.as_str()).ok_or_else(|| {
                    invalid(format!("unbound variable `{v}` in action `{}`", action.name))
                })?;
                if !dom.is_subtype(ty, &p.ty) && !dom.is_subtype(&p.ty, ty) {
                    return Err(invalid(format!(
                        "variable `{v}` of type `{ty}` used where `{}` expected in action `{}`",
                        p.ty, action.name
                    )));
                }
            }
            Term::Const(c) => {
                return Err(unsupported(&format!("constant `{c}` in action `{}`", action.name)))
            }
        }
    }
    Ok(())
}

fn validate_atom(
    dom: &DomainDef,
    action: &ActionSchema,
    params: &HashMap<&str, &str>,
    a: &AtomForm,
) -> Result<(), ParseError> {
    let sig = dom
        .predicate(&a.predicate)
        .ok_or_else(|| ParseError::UndeclaredPredicate(a.predicate.clone()))?;
    validate_terms(dom, action, params, &a.args, sig)
}

fn validate_fluent(
    dom: &DomainDef,
    action: &ActionSchema,
    params: &HashMap<&str, &str>,
    f: &FluentRef,
) -> Result<(), ParseError> {
    let sig = dom
        .function(&f.function)
        .ok_or_else(|| ParseError::UndeclaredFunction(f.function.clone()))?;
    validate_terms(dom, action, params, &f.args, sig)
}

fn validate_expr(
    dom: &DomainDef,
    action: &ActionSchema,
    params: &HashMap<&str, &str>,
    e: &NumExpr,
) -> Result<(), ParseError> {
    match e {
        NumExpr::Const(_) => Ok(()),
        NumExpr::Fluent(f) => validate_fluent(dom, action, params, f),
        NumExpr::Add(a, b) | NumExpr::Sub(a, b) => {
            validate_expr(dom, action, params, a)?;
            validate_expr(dom, action, params, b)
        }
    }
}

fn validate_action(dom: &DomainDef, a: &ActionSchema) -> Result<(), ParseError> {
    let mut params = HashMap::new();
    for p in &a.params {
        if !dom.has_type(&p.ty) {
            return Err(ParseError::UnknownType(p.ty.clone()));
        }
        if params.insert(p.name.as_str(), p.ty.as_str()).is_some() {
            return Err(invalid(format!(
                "parameter `{}` repeated in action `{}`",
                p.name, a.name
            )));
        }
    }
    for c in &a.precondition {
        match c {
            Condition::Atom(x) | Condition::Not(x) => validate_atom(dom, a, &params, x)?,
            Condition::Compare(_, l, r) => {
                validate_expr(dom, a, &params, l)?;
                validate_expr(dom, a, &params, r)?;
            }
        }
    }
    for e in &a.effect {
        match e {
            Effect::Add(x) | Effect::Delete(x) => validate_atom(dom, a, &params, x)?,
            Effect::Numeric(_, f, x) => {
                validate_fluent(dom, a, &params, f)?;
                validate_expr(dom, a, &params, x)?;
            }
        }
    }
    for e in &a.effect {
        if let Effect::Add(x) = e {
            if a.effect.contains(&Effect::Delete(x.clone())) {
                return Err(invalid(format!(
                    "action `{}` both adds and deletes {x}",
                    a.name
                )));
            }
        }
    }
    Ok(())
}

fn parse_ground_atom(e: &SExpr) -> Result<GroundAtom, ParseError> {
    let a = parse_atom_form(e)?;
    let args = a
        .args
        .into_iter()
        .map(|t| match t {
            Term::Const(c) => Ok(c),
            Term::Var(v) => Err(syntax(e.pos(), format!("variable `{v}` in ground atom"))),
        })
        .collect::<Result<_, _>>()?;
    Ok(GroundAtom {
        predicate: a.predicate,
        args,
    })
}

fn parse_goal_atoms(e: &SExpr) -> Result<Vec<GroundAtom>, ParseError> {
    let mut parts = Vec::new();
    flatten_and(e, &mut parts)?;
    parts
        .into_iter()
        .map(|p| match p.head() {
            Some("not") => Err(unsupported("negative goals")),
            _ => parse_ground_atom(p),
        })
        .collect()
}

/// Parses a problem against an already parsed domain.
///
/// Besides the standard `(:goal ...)`, the extension sections
/// `(:goals (LABEL FORMULA) ...)` and `(:goal-prior (LABEL P) ...)`
/// declare a labelled goal set and its prior. Without a prior the goal
/// set is weighted uniformly.
pub fn parse_problem(text: &str, domain: &DomainDef) -> Result<ProblemDef, ParseError> {
    let root = read_one(text)?;
    let items = expect_list(&root, "define")?;
    if root.head() != Some("define") {
        return Err(syntax(root.pos(), "expected `(define ...)`"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax(root.pos(), "missing problem header"))?;
    let h = expect_list(header, "problem header")?;
    if header.head() != Some("problem") || h.len() != 2 {
        return Err(syntax(header.pos(), "expected `(problem NAME)`"));
    }
    let mut prob = ProblemDef {
        name: check_name(&h[1], "problem name")?,
        domain: String::new(),
        objects: Vec::new(),
        init: Vec::new(),
        init_fluents: Vec::new(),
        goals: Vec::new(),
        goal_prior: Vec::new(),
    };
    let mut prior: Option<Vec<(String, f64)>> = None;
    for section in &items[2..] {
        let s = expect_list(section, "section")?;
        match section.head() {
            Some(":domain") => {
                prob.domain = check_name(
                    s.get(1).ok_or_else(|| syntax(section.pos(), "missing domain name"))?,
                    "domain name",
                )?
            }
            Some(":requirements") => {
                for r in &s[1..] {
                    let r = expect_atom(r, "requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(unsupported(r));
                    }
                }
            }
            Some(":objects") => prob.objects = parse_typed_list(&s[1..], false)?,
            Some(":init") => {
                for item in &s[1..] {
                    if item.head() == Some("=") {
                        let l = expect_list(item, "fluent assignment")?;
                        if l.len() != 3 {
                            return Err(syntax(item.pos(), "`=` takes two operands"));
                        }
                        let atom = parse_ground_atom(&l[1])?;
                        let v = expect_atom(&l[2], "integer")?;
                        let v = v
                            .parse::<i64>()
                            .map_err(|_| syntax(l[2].pos(), format!("expected integer, found `{v}`")))?;
                        prob.init_fluents.push((atom, v));
                    } else {
                        prob.init.push(parse_ground_atom(item)?);
                    }
                }
            }
            Some(":goal") => {
                let f = s.get(1).ok_or_else(|| syntax(section.pos(), "empty goal"))?;
                prob.goals.push(GoalDef {
                    label: "goal".to_string(),
                    atoms: parse_goal_atoms(f)?,
                });
            }
            Some(":goals") => {
                for g in &s[1..] {
                    let l = expect_list(g, "labelled goal")?;
                    if l.len() != 2 {
                        return Err(syntax(g.pos(), "expected `(LABEL FORMULA)`"));
                    }
                    prob.goals.push(GoalDef {
                        label: check_name(&l[0], "goal label")?,
                        atoms: parse_goal_atoms(&l[1])?,
                    });
                }
            }
            Some(":goal-prior") => {
                let mut entries = Vec::new();
                for g in &s[1..] {
                    let l = expect_list(g, "prior entry")?;
                    if l.len() != 2 {
                        return Err(syntax(g.pos(), "expected `(LABEL PROBABILITY)`"));
                    }
                    let p = expect_atom(&l[1], "probability")?;
                    let p = p
                        .parse::<f64>()
                        .map_err(|_| syntax(l[1].pos(), format!("expected number, found `{p}`")))?;
                    entries.push((check_name(&l[0], "goal label")?, p));
                }
                prior = Some(entries);
            }
            Some(":metric") => return Err(unsupported(":metric")),
            Some(other) => {
                return Err(syntax(section.pos(), format!("unknown problem section `{other}`")))
            }
            None => return Err(syntax(section.pos(), "empty section")),
        }
    }
    if prob.goals.is_empty() {
        return Err(invalid("problem declares no goals"));
    }
    prob.goal_prior = match prior {
        None => vec![1.0 / prob.goals.len() as f64; prob.goals.len()],
        Some(entries) => {
            let mut p = vec![f64::NAN; prob.goals.len()];
            for (label, v) in entries {
                let i = prob
                    .goal_index(&label)
                    .ok_or_else(|| invalid(format!("prior names unknown goal `{label}`")))?;
                p[i] = v;
            }
            p
        }
    };
    validate_problem(&prob, domain)?;
    Ok(prob)
}

fn validate_problem(prob: &ProblemDef, dom: &DomainDef) -> Result<(), ParseError> {
    if !prob.domain.is_empty() && prob.domain != dom.name {
        return Err(invalid(format!(
            "problem targets domain `{}`, not `{}`",
            prob.domain, dom.name
        )));
    }
    let mut objects: HashMap<&str, &str> = HashMap::new();
    for o in &prob.objects {
        if !dom.has_type(&o.ty) {
            return Err(ParseError::UnknownType(o.ty.clone()));
        }
        if objects.insert(&o.name, &o.ty).is_some() {
            return Err(invalid(format!("object `{}` declared twice", o.name)));
        }
    }
    let check = |sig: Option<&Signature>, a: &GroundAtom, fluent: bool| -> Result<(), ParseError> {
        let sig = sig.ok_or_else(|| {
            if fluent {
                ParseError::UndeclaredFunction(a.predicate.clone())
            } else {
                ParseError::UndeclaredPredicate(a.predicate.clone())
            }
        })?;
        if sig.arity() != a.args.len() {
            return Err(invalid(format!("{a} has wrong arity")));
        }
        for (arg, p) in a.args.iter().zip(&sig.params) {
            let ty = objects
                .get(arg.as_str())
                .ok_or_else(|| invalid(format!("unknown object `{arg}` in {a}")))?;
            if !dom.is_subtype(ty, &p.ty) {
                return Err(invalid(format!("object `{arg}` is not a `{}` in {a}", p.ty)));
            }
        }
        Ok(())
    };
    for a in &prob.init {
        check(dom.predicate(&a.predicate), a, false)?;
    }
    for (a, _) in &prob.init_fluents {
        check(dom.function(&a.predicate), a, true)?;
    }
    let mut labels = HashSet::new();
    for g in &prob.goals {
        if !labels.insert(&g.label) {
            return Err(invalid(format!("goal label `{}` repeated", g.label)));
        }
        if g.atoms.is_empty() {
            return Err(invalid(format!("goal `{}` is empty", g.label)));
        }
        for a in &g.atoms {
            check(dom.predicate(&a.predicate), a, false)?;
        }
    }
    if prob.goal_prior.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(invalid("goal prior must give every goal a non-negative probability"));
    }
    let total: f64 = prob.goal_prior.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("goal prior sums to {total}, expected 1")));
    }
    Ok(())
}
