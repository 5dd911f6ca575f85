//! Imagined actions: when a goal atom is unreachable with the current
//! schemas, widen the parameter types of schemas that produce its predicate
//! and propagate the widening to schemas with the same parameter list.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::ground::{ground_all, Compiled};
use crate::hierarchy::TypeHierarchy;
use crate::logic::{Atom, Object, Term};
use crate::schema::{ActionSchema, Provenance};
use crate::task::{PlanningTask, Restrictions};

/// A parameter generalization: the types before and after widening.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamGeneralization {
    pub from: Vec<String>,
    pub to: Vec<String>,
}

impl ParamGeneralization {
    pub fn is_identity(&self) -> bool {
        self.from == self.to
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImaginedAction {
    pub schema: ActionSchema,
    pub source: String,
    pub generalization: ParamGeneralization,
    /// The unreachable atom that triggered the proposal.
    pub target: Atom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImaginationResult {
    pub actions: Vec<ActionSchema>,
    pub added: Vec<ImaginedAction>,
    pub unreachable: BTreeSet<Atom>,
}

fn reachability(schemas: &[ActionSchema], t: &PlanningTask, h: &TypeHierarchy, r: &Restrictions) -> BTreeSet<Atom> {
    let arcs: Vec<Arc<ActionSchema>> = schemas.iter().cloned().map(Arc::new).collect();
    Compiled::new(t, ground_all(&arcs, t, h, r)).reachable_atoms()
}

pub fn get_unreachable_goals(t: &PlanningTask, reachable: &BTreeSet<Atom>) -> BTreeSet<Atom> {
    t.goal.iter().filter(|g| !reachable.contains(*g)).cloned().collect()
}

/// Schemas with an add-effect atom of `u`'s predicate and arity, in input
/// order.
pub fn get_potential_actions<'a>(schemas: &'a [ActionSchema], u: &Atom) -> Vec<&'a ActionSchema> {
    schemas.iter().filter(|a| matching_effect(a, u).is_some()).collect()
}

fn matching_effect<'a>(a: &'a ActionSchema, u: &Atom) -> Option<&'a Atom> {
    a.effect.add.iter().find(|e| e.predicate == u.predicate && e.arity() == u.arity())
}

/// Name of an imagined schema: the source's base name tagged with the new
/// parameter types.
fn imagined_name(source: &str, types: &[String]) -> String {
    let base = source.split("__").next().unwrap_or(source);
    format!("{base}__{}", types.join("-"))
}

fn imagined(a: &ActionSchema, types: &[String]) -> ActionSchema {
    let mut s = a.retyped(types);
    s.name = imagined_name(&a.name, types);
    s.provenance = Provenance::Imagined;
    s
}

/// Widens `a` so one of its groundings produces `u`. Parameters matched
/// against `u` take the LCA with `u`'s object types. Any other parameter
/// that no available object fits is widened to its deepest common ancestor
/// with some available object. Widening to the hierarchy root is refused.
pub fn create_imagined_action(
    a: &ActionSchema,
    u: &Atom,
    available: &[&Object],
    h: &TypeHierarchy,
) -> Option<(ActionSchema, ParamGeneralization)> {
    let e = matching_effect(a, u)?;
    let from: Vec<String> = a.params.iter().map(|p| p.ty.clone()).collect();
    let mut to = from.clone();
    let mut matched = BTreeSet::new();
    for (term, obj) in e.args.iter().zip(&u.args) {
        let (Term::Variable(v), Term::Object(o)) = (term, obj) else { return None };
        let ty = h.lca(&to[v.index], &o.ty).ok()?;
        if ty == h.root() {
            return None;
        }
        to[v.index] = ty.to_string();
        matched.insert(v.index);
    }
    for i in 0..to.len() {
        if matched.contains(&i) {
            continue;
        }
        let fits = |ty: &str| available.iter().any(|o| h.is_subtype(&o.ty, ty).unwrap_or(false));
        if fits(&to[i]) {
            continue;
        }
        let widened = available.iter().filter_map(|o| h.lca(&to[i], &o.ty).ok()).filter(|ty| *ty != h.root()).max_by(
            |x, y| {
                let (dx, dy) = (h.depth(x).unwrap_or(0), h.depth(y).unwrap_or(0));
                dx.cmp(&dy).then_with(|| y.cmp(x))
            },
        )?;
        to[i] = widened.to_string();
    }
    let p = ParamGeneralization { from, to };
    Some((imagined(a, &p.to), p))
}

/// Precondition atoms that block the imagined action from producing `u`.
/// Groundings consistent with `u` are tried; if one has all preconditions
/// reachable the result is empty, otherwise the unreachable atoms of the
/// groundings missing the fewest are returned.
pub fn get_unreachable_preconds(
    a: &ActionSchema,
    u: &Atom,
    available: &[&Object],
    h: &TypeHierarchy,
    reachable: &BTreeSet<Atom>,
) -> BTreeSet<Atom> {
    let Some(e) = matching_effect(a, u) else { return BTreeSet::new() };
    let mut fixed: BTreeMap<usize, &Object> = BTreeMap::new();
    for (term, obj) in e.args.iter().zip(&u.args) {
        if let (Term::Variable(v), Term::Object(o)) = (term, obj) {
            if fixed.insert(v.index, o).is_some_and(|prev| prev != o) {
                return BTreeSet::new();
            }
        }
    }
    let arc = Arc::new(a.clone());
    let objects: Vec<Object> = available.iter().map(|o| (*o).clone()).collect();
    let mut best: Option<(usize, BTreeSet<Atom>)> = None;
    for g in crate::schema::ground_schema(&arc, &objects, h) {
        if fixed.iter().any(|(i, o)| g.binding[*i] != **o) {
            continue;
        }
        let missing: BTreeSet<Atom> = g.pre().into_iter().filter(|p| !reachable.contains(p)).collect();
        match &mut best {
            _ if missing.is_empty() => return BTreeSet::new(),
            Some((n, acc)) if missing.len() == *n => acc.extend(missing),
            Some((n, _)) if missing.len() > *n => {}
            _ => best = Some((missing.len(), missing)),
        }
    }
    best.map(|(_, m)| m).unwrap_or_default()
}

/// Copies of every other schema whose ordered parameter types equal `p.from`,
/// retyped to `p.to`. Copies that behave like an existing schema are skipped.
pub fn create_substituted_actions(
    schemas: &[ActionSchema],
    source: &ActionSchema,
    p: &ParamGeneralization,
) -> Vec<ActionSchema> {
    if p.is_identity() {
        return vec![];
    }
    let mut out: Vec<ActionSchema> = vec![];
    for b in schemas {
        if b.name == source.name || b.param_types() != p.from {
            continue;
        }
        let copy = imagined(b, &p.to);
        if schemas.iter().chain(&out).any(|s| s.same_behavior(&copy)) {
            continue;
        }
        out.push(copy);
    }
    out
}

/// Enhances `schemas` until every goal atom of `t` is relaxed-reachable or
/// no further proposal can be made. Never removes or alters input schemas.
pub fn imagine(schemas: &[ActionSchema], h: &TypeHierarchy, t: &PlanningTask, r: &Restrictions) -> ImaginationResult {
    let mut actions: Vec<ActionSchema> = schemas.to_vec();
    let mut added: Vec<ImaginedAction> = vec![];
    let available = r.available(t);
    let mut reachable = reachability(&actions, t, h, r);
    loop {
        let unreachable = get_unreachable_goals(t, &reachable);
        if unreachable.is_empty() {
            break;
        }
        let before = added.len();
        let mut queue: VecDeque<Atom> = unreachable.into_iter().collect();
        let mut visited: BTreeSet<Atom> = BTreeSet::new();
        while let Some(u) = queue.pop_front() {
            if !visited.insert(u.clone()) || reachable.contains(&u) {
                continue;
            }
            let potential: Vec<ActionSchema> = get_potential_actions(&actions, &u).into_iter().cloned().collect();
            let mut changed = false;
            for a in &potential {
                let Some((a_i, p_i)) = create_imagined_action(a, &u, &available, h) else { continue };
                let mut proposals = vec![];
                if !actions.iter().any(|s| s.same_behavior(&a_i)) {
                    proposals.push(a_i.clone());
                }
                proposals.extend(create_substituted_actions(&actions, a, &p_i));
                for s in proposals {
                    if actions.iter().any(|x| x.same_behavior(&s)) {
                        continue;
                    }
                    debug!("imagined {} from {} for {}", s.name, a.name, u);
                    added.push(ImaginedAction {
                        schema: s.clone(),
                        source: a.name.clone(),
                        generalization: p_i.clone(),
                        target: u.clone(),
                    });
                    actions.push(s);
                    changed = true;
                }
                queue.extend(get_unreachable_preconds(&a_i, &u, &available, h, &reachable));
            }
            if changed {
                reachable = reachability(&actions, t, h, r);
            }
        }
        if added.len() == before {
            break;
        }
    }
    let unreachable = get_unreachable_goals(t, &reachable);
    ImaginationResult { actions, added, unreachable }
}
