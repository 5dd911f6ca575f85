//! Typed STRIPS export and import.
//!
//! Schema metadata PDDL cannot express (action description, provenance,
//! supporting clusters) travels in `; @meta` comment lines so an exported
//! domain imports back to the same schema set. Other planners ignore them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::hierarchy::{EntityType, TypeHierarchy};
use crate::logic::{Atom, Effect, Object, State, Term, Variable};
use crate::schema::{ActionSchema, Provenance};
use crate::task::PlanningTask;

fn parse_err(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse { input: input.chars().take(80).collect(), reason: reason.into() }
}

fn lifted(a: &Atom) -> String {
    let mut s = format!("({}", a.predicate);
    for t in &a.args {
        match t {
            Term::Variable(v) => write!(s, " ?x{}", v.index).unwrap(),
            Term::Object(o) => write!(s, " {}", o.name).unwrap(),
        }
    }
    s.push(')');
    s
}

fn conjunction(atoms: impl IntoIterator<Item = String>) -> String {
    let parts: Vec<String> = atoms.into_iter().collect();
    match parts.len() {
        0 => "(and)".into(),
        _ => format!("(and {})", parts.join(" ")),
    }
}

/// Predicate signatures: per argument position, the LCA of every type seen
/// there.
fn predicate_types(schemas: &[ActionSchema], h: &TypeHierarchy) -> BTreeMap<String, Vec<String>> {
    let mut sig: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let atoms = schemas.iter().flat_map(|s| s.pre.iter().chain(s.effect.atoms()));
    for a in atoms {
        let types: Vec<&str> = a.args.iter().map(Term::ty).collect();
        let entry = sig.entry(a.predicate.clone()).or_insert_with(|| types.iter().map(|t| t.to_string()).collect());
        for (slot, t) in entry.iter_mut().zip(&types) {
            *slot = h.lca(slot, t).unwrap_or(h.root()).to_string();
        }
    }
    sig
}

pub fn export_domain(name: &str, schemas: &[ActionSchema], h: &TypeHierarchy) -> String {
    let mut out = String::new();
    writeln!(out, "(define (domain {name})").unwrap();
    writeln!(out, "  (:requirements :strips :typing)").unwrap();
    let mut by_parent: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for t in h.types() {
        if let Some(p) = t.parent {
            by_parent.entry(p).or_default().push(t.name);
        }
    }
    writeln!(out, "  (:types").unwrap();
    // Parents before children keeps the declaration readable top-down.
    let mut order = vec![h.root().to_string()];
    let mut i = 0;
    while i < order.len() {
        if let Some(children) = by_parent.get(&order[i]) {
            writeln!(out, "    {} - {}", children.join(" "), order[i]).unwrap();
            order.extend(children.iter().cloned());
        }
        i += 1;
    }
    writeln!(out, "  )").unwrap();
    writeln!(out, "  (:predicates").unwrap();
    for (p, types) in predicate_types(schemas, h) {
        let args: Vec<String> = types.iter().enumerate().map(|(i, t)| format!("?a{i} - {t}")).collect();
        if args.is_empty() {
            writeln!(out, "    ({p})").unwrap();
        } else {
            writeln!(out, "    ({p} {})", args.join(" ")).unwrap();
        }
    }
    writeln!(out, "  )").unwrap();
    for s in schemas {
        let clusters: Vec<String> = s.clusters.iter().map(ToString::to_string).collect();
        writeln!(
            out,
            "  ; @meta {} description={} provenance={} clusters={}",
            s.name,
            lifted(&s.description),
            s.provenance,
            clusters.join(",")
        )
        .unwrap();
        writeln!(out, "  (:action {}", s.name).unwrap();
        let params: Vec<String> = s.params.iter().map(|v| format!("?x{} - {}", v.index, v.ty)).collect();
        writeln!(out, "    :parameters ({})", params.join(" ")).unwrap();
        writeln!(out, "    :precondition {}", conjunction(s.pre.iter().map(lifted))).unwrap();
        let eff = s.effect.add.iter().map(lifted).chain(s.effect.del.iter().map(|a| format!("(not {})", lifted(a))));
        writeln!(out, "    :effect {})", conjunction(eff)).unwrap();
    }
    writeln!(out, ")").unwrap();
    out
}

pub fn export_problem(domain: &str, t: &PlanningTask) -> String {
    let ground = |a: &Atom| {
        let names: Vec<&str> = a.objects().map(|o| o.name.as_str()).collect();
        if names.is_empty() {
            format!("({})", a.predicate)
        } else {
            format!("({} {})", a.predicate, names.join(" "))
        }
    };
    let mut out = String::new();
    writeln!(out, "(define (problem {})", t.name).unwrap();
    writeln!(out, "  (:domain {domain})").unwrap();
    let mut by_type: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for o in &t.objects {
        by_type.entry(o.ty.as_str()).or_default().push(o.name.as_str());
    }
    writeln!(out, "  (:objects").unwrap();
    for (ty, names) in by_type {
        writeln!(out, "    {} - {ty}", names.join(" ")).unwrap();
    }
    writeln!(out, "  )").unwrap();
    writeln!(out, "  (:init").unwrap();
    for a in t.init.iter() {
        writeln!(out, "    {}", ground(a)).unwrap();
    }
    writeln!(out, "  )").unwrap();
    writeln!(out, "  (:goal {})", conjunction(t.goal.iter().map(ground))).unwrap();
    writeln!(out, ")").unwrap();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(v) => Some(v),
            Sexp::Atom(_) => None,
        }
    }

    fn word(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s) => Some(s),
            Sexp::List(_) => None,
        }
    }

    fn head(&self) -> Option<&str> {
        self.list()?.first()?.word()
    }
}

/// Parses one s-expression, skipping `;` comments.
pub fn parse_sexp(text: &str) -> Result<Sexp> {
    let mut tokens = vec![];
    for line in text.lines() {
        let line = line.split(';').next().unwrap_or("");
        let spaced = line.replace('(', " ( ").replace(')', " ) ");
        tokens.extend(spaced.split_whitespace().map(str::to_string));
    }
    let mut pos = 0;
    let e = read(&tokens, &mut pos, text)?;
    if pos != tokens.len() {
        return Err(parse_err(text, "trailing tokens"));
    }
    Ok(e)
}

fn read(tokens: &[String], pos: &mut usize, text: &str) -> Result<Sexp> {
    let tok = tokens.get(*pos).ok_or_else(|| parse_err(text, "unexpected end of input"))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = vec![];
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(read(tokens, pos, text)?),
                    None => return Err(parse_err(text, "unbalanced parentheses")),
                }
            }
        }
        ")" => Err(parse_err(text, "unexpected `)`")),
        w => Ok(Sexp::Atom(w.to_string())),
    }
}

/// `a b - t c - u` → `[(a, t), (b, t), (c, u)]`; untyped names get `default`.
fn typed_list(items: &[Sexp], default: &str, text: &str) -> Result<Vec<(String, String)>> {
    let mut out = vec![];
    let mut pending = vec![];
    let mut i = 0;
    while i < items.len() {
        let w = items[i].word().ok_or_else(|| parse_err(text, "expected a name"))?;
        if w == "-" {
            let ty = items.get(i + 1).and_then(Sexp::word).ok_or_else(|| parse_err(text, "`-` without a type"))?;
            out.extend(pending.drain(..).map(|n: String| (n, ty.to_string())));
            i += 2;
        } else {
            pending.push(w.to_string());
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|n| (n, default.to_string())));
    Ok(out)
}

fn section<'a>(items: &'a [Sexp], key: &str) -> Option<&'a [Sexp]> {
    items.iter().find(|s| s.head() == Some(key)).and_then(Sexp::list)
}

fn var_index(w: &str, text: &str) -> Result<usize> {
    w.strip_prefix("?x")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| parse_err(text, format!("expected variable ?x<n>, found {w}")))
}

fn lifted_atom(e: &Sexp, params: &[Variable], text: &str) -> Result<Atom> {
    let items = e.list().ok_or_else(|| parse_err(text, "expected an atom"))?;
    let (pred, args) = items.split_first().ok_or_else(|| parse_err(text, "empty atom"))?;
    let pred = pred.word().ok_or_else(|| parse_err(text, "bad predicate"))?;
    let args = args
        .iter()
        .map(|a| {
            let w = a.word().ok_or_else(|| parse_err(text, "nested term"))?;
            let i = var_index(w, text)?;
            params
                .iter()
                .find(|p| p.index == i)
                .map(|p| Term::Variable(p.clone()))
                .ok_or_else(|| parse_err(text, format!("undeclared parameter {w}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Atom::new(pred, args))
}

fn conjuncts(e: &Sexp) -> Vec<&Sexp> {
    if e.head() == Some("and") {
        e.list().unwrap()[1..].iter().collect()
    } else if e.list().is_some_and(|l| l.is_empty()) {
        vec![]
    } else {
        vec![e]
    }
}

/// Parses a domain written by [`export_domain`] (or any typed STRIPS domain
/// using `?x<n>` parameter names) back into a hierarchy and schemas.
pub fn import_domain(text: &str) -> Result<(TypeHierarchy, Vec<ActionSchema>)> {
    let mut meta: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for line in text.lines() {
        if let Some(rest) = line.trim().strip_prefix("; @meta ") {
            let mut parts = rest.split_whitespace();
            let name = parts.next().unwrap_or_default().to_string();
            let mut fields = BTreeMap::new();
            // The description contains spaces; rejoin until the next key.
            let mut current: Option<(String, String)> = None;
            for p in parts {
                match p.split_once('=') {
                    Some((k, v)) if ["description", "provenance", "clusters"].contains(&k) => {
                        if let Some((k, v)) = current.take() {
                            fields.insert(k, v);
                        }
                        current = Some((k.to_string(), v.to_string()));
                    }
                    _ => {
                        if let Some((_, v)) = current.as_mut() {
                            v.push(' ');
                            v.push_str(p);
                        }
                    }
                }
            }
            if let Some((k, v)) = current {
                fields.insert(k, v);
            }
            meta.insert(name, fields);
        }
    }

    let root = parse_sexp(text)?;
    let items = root.list().ok_or_else(|| parse_err(text, "expected (define ...)"))?;
    if items.first().and_then(Sexp::word) != Some("define") {
        return Err(parse_err(text, "expected (define ...)"));
    }
    let types = section(items, ":types").ok_or_else(|| parse_err(text, "missing :types"))?;
    let pairs = typed_list(&types[1..], "object", text)?;
    let mut declared: Vec<EntityType> = vec![];
    let children: BTreeSet<&str> = pairs.iter().map(|(c, _)| c.as_str()).collect();
    for (_, p) in &pairs {
        if !children.contains(p.as_str()) && !declared.iter().any(|t| t.name == *p) {
            declared.push(EntityType { name: p.clone(), parent: None });
        }
    }
    declared.extend(pairs.iter().map(|(c, p)| EntityType { name: c.clone(), parent: Some(p.clone()) }));
    let h = TypeHierarchy::new(declared)?;

    let mut schemas = vec![];
    for action in items.iter().filter(|s| s.head() == Some(":action")) {
        let a = action.list().unwrap();
        let name = a.get(1).and_then(Sexp::word).ok_or_else(|| parse_err(text, "unnamed action"))?;
        let key = |k: &str| -> Option<&Sexp> { a.iter().position(|s| s.word() == Some(k)).and_then(|i| a.get(i + 1)) };
        let params = typed_list(key(":parameters").and_then(Sexp::list).unwrap_or_default(), h.root(), text)?
            .into_iter()
            .map(|(n, t)| Ok(Variable::new(var_index(&n, text)?, t)))
            .collect::<Result<Vec<_>>>()?;
        let pre = match key(":precondition") {
            Some(e) => conjuncts(e).into_iter().map(|x| lifted_atom(x, &params, text)).collect::<Result<_>>()?,
            None => BTreeSet::new(),
        };
        let mut add = BTreeSet::new();
        let mut del = BTreeSet::new();
        if let Some(e) = key(":effect") {
            for x in conjuncts(e) {
                if x.head() == Some("not") {
                    let inner = x.list().unwrap().get(1).ok_or_else(|| parse_err(text, "empty (not)"))?;
                    del.insert(lifted_atom(inner, &params, text)?);
                } else {
                    add.insert(lifted_atom(x, &params, text)?);
                }
            }
        }
        let m = meta.get(name).cloned().unwrap_or_default();
        let description = match m.get("description") {
            Some(d) => lifted_atom(&parse_sexp(d)?, &params, text)?,
            None => Atom::new(name, params.iter().cloned().map(Term::Variable).collect()),
        };
        let provenance = match m.get("provenance").map(String::as_str) {
            Some("generalized") => Provenance::Generalized,
            Some("imagined") => Provenance::Imagined,
            _ => Provenance::Individual,
        };
        let clusters = m
            .get("clusters")
            .map(|c| c.split(',').filter(|x| !x.is_empty()).map(|x| x.parse().unwrap_or(0)).collect())
            .unwrap_or_default();
        let schema = ActionSchema {
            name: name.to_string(),
            description,
            params,
            pre,
            effect: Effect::new(add, del),
            provenance,
            clusters,
        };
        schema.validate()?;
        schemas.push(schema);
    }
    Ok((h, schemas))
}

pub fn import_problem(text: &str, h: &TypeHierarchy) -> Result<PlanningTask> {
    let root = parse_sexp(text)?;
    let items = root.list().ok_or_else(|| parse_err(text, "expected (define ...)"))?;
    let name = items
        .get(1)
        .and_then(Sexp::list)
        .and_then(|l| l.get(1))
        .and_then(Sexp::word)
        .ok_or_else(|| parse_err(text, "missing problem name"))?;
    let objects: Vec<Object> = typed_list(&section(items, ":objects").unwrap_or_default()[1..], h.root(), text)?
        .into_iter()
        .map(|(n, t)| Object::new(n, t))
        .collect();
    let by_name: BTreeMap<&str, &Object> = objects.iter().map(|o| (o.name.as_str(), o)).collect();
    let ground = |e: &Sexp| -> Result<Atom> {
        let l = e.list().ok_or_else(|| parse_err(text, "expected an atom"))?;
        let (p, args) = l.split_first().ok_or_else(|| parse_err(text, "empty atom"))?;
        let args = args
            .iter()
            .map(|a| {
                let w = a.word().unwrap_or_default();
                by_name
                    .get(w)
                    .map(|o| Term::Object((*o).clone()))
                    .ok_or_else(|| parse_err(text, format!("undeclared object {w}")))
            })
            .collect::<Result<_>>()?;
        Ok(Atom::new(p.word().unwrap_or_default(), args))
    };
    let init = section(items, ":init").unwrap_or_default().iter().skip(1).map(ground).collect::<Result<Vec<_>>>()?;
    let goal = match section(items, ":goal").and_then(|g| g.get(1)) {
        Some(g) => conjuncts(g).into_iter().map(ground).collect::<Result<_>>()?,
        None => BTreeSet::new(),
    };
    let t = PlanningTask { name: name.to_string(), objects, init: State::new(init)?, goal };
    t.validate(h)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h() -> TypeHierarchy {
        TypeHierarchy::from_edges(
            "entity",
            &[("agent", "entity"), ("tool", "entity"), ("food", "entity"), ("cutboard", "tool"), ("tomato", "food")],
        )
        .unwrap()
    }

    fn chop() -> ActionSchema {
        let atoms = |v: &[&str]| -> BTreeSet<Atom> { v.iter().map(|s| s.parse().unwrap()).collect() };
        ActionSchema {
            name: "USE_g0".into(),
            description: "USE(?x0:agent, ?x1:cutboard)".parse().unwrap(),
            params: vec![Variable::new(0, "agent"), Variable::new(1, "cutboard"), Variable::new(2, "food")],
            pre: atoms(&["content_holds(?x1:cutboard, ?x2:food)", "chop_state_Fresh(?x2:food)"]),
            effect: Effect::new(atoms(&["chop_state_Chopped(?x2:food)"]), atoms(&["chop_state_Fresh(?x2:food)"])),
            provenance: Provenance::Generalized,
            clusters: vec![0, 4],
        }
    }

    #[test]
    fn domain_round_trip() {
        let text = export_domain("kitchen", &[chop()], &h());
        assert!(text.contains(":parameters (?x0 - agent ?x1 - cutboard ?x2 - food)"));
        assert!(text.contains("agent tool food - entity"));
        assert!(text.contains("cutboard - tool"));
        let (h2, schemas) = import_domain(&text).unwrap();
        assert_eq!(schemas, vec![chop()]);
        assert!(h2.is_subtype("tomato", "entity").unwrap());
        assert_eq!(h2.parent("cutboard").unwrap(), Some("tool"));
    }

    #[test]
    fn problem_round_trip() {
        let t = PlanningTask {
            name: "cut_tomato".into(),
            objects: vec![Object::new("agent_1", "agent"), Object::new("tomato_1", "tomato")],
            init: State::new(["chop_state_Fresh(tomato_1:tomato)".parse().unwrap()]).unwrap(),
            goal: ["chop_state_Chopped(tomato_1:tomato)".parse().unwrap()].into(),
        };
        let text = export_problem("kitchen", &t);
        let back = import_problem(&text, &h()).unwrap();
        assert_eq!(back.init, t.init);
        assert_eq!(back.goal, t.goal);
        assert_eq!(back.name, t.name);
    }

    #[test]
    fn malformed_input_is_an_error() {
        assert!(parse_sexp("(define (domain x)").is_err());
        assert!(parse_sexp(")").is_err());
        assert!(import_domain("(define (domain x))").is_err());
    }
}
