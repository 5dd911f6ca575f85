//! Grounding a schema set for a task and compiling the result into integer
//! atom ids for reachability analysis and search.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::hierarchy::TypeHierarchy;
use crate::logic::{Atom, Object, State, Term};
use crate::schema::{ground_with, ActionSchema, GroundedAction};
use crate::task::{PlanningTask, Restrictions};

/// All groundings of `schemas` over the task's available objects that the
/// restrictions allow, schema by schema in input order.
pub fn ground_all(
    schemas: &[Arc<ActionSchema>],
    t: &PlanningTask,
    h: &TypeHierarchy,
    r: &Restrictions,
) -> Vec<GroundedAction> {
    let mut objects = r.available(t);
    objects.sort();
    let mut by_type: HashMap<&str, Vec<&Object>> = HashMap::new();
    for s in schemas {
        for p in &s.params {
            by_type.entry(p.ty.as_str()).or_insert_with(|| {
                objects.iter().copied().filter(|o| h.is_subtype(&o.ty, &p.ty).unwrap_or(false)).collect()
            });
        }
    }
    let mut out = vec![];
    for s in schemas {
        let fits: Vec<&[&Object]> = s.params.iter().map(|p| by_type[p.ty.as_str()].as_slice()).collect();
        out.extend(ground_with(s, &fits).into_iter().filter(|g| r.allows(g)));
    }
    out
}

fn intern_grounded<'a>(
    table: &mut AtomTable,
    seen: &mut HashMap<(&'a str, Vec<&'a str>), u32>,
    g: &'a GroundedAction,
    a: &'a Atom,
) -> u32 {
    let names = a
        .args
        .iter()
        .map(|x| match x {
            Term::Variable(v) => g.object_for(v).map_or("", |o| o.name.as_str()),
            Term::Object(o) => o.name.as_str(),
        })
        .collect();
    *seen.entry((a.predicate.as_str(), names)).or_insert_with(|| table.intern(&g.ground_atom(a)))
}

#[derive(Debug, Clone, Default)]
pub struct AtomTable {
    ids: HashMap<Atom, u32>,
    atoms: Vec<Atom>,
}

impl AtomTable {
    pub fn intern(&mut self, a: &Atom) -> u32 {
        if let Some(&id) = self.ids.get(a) {
            return id;
        }
        let id = self.atoms.len() as u32;
        self.ids.insert(a.clone(), id);
        self.atoms.push(a.clone());
        id
    }

    pub fn id(&self, a: &Atom) -> Option<u32> {
        self.ids.get(a).copied()
    }

    pub fn atom(&self, id: u32) -> &Atom {
        &self.atoms[id as usize]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct CompiledAction {
    pub pre: Vec<u32>,
    pub add: Vec<u32>,
    pub del: Vec<u32>,
}

/// A grounded task: every atom in init, goal and the actions gets an id.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub table: AtomTable,
    pub actions: Vec<GroundedAction>,
    pub ops: Vec<CompiledAction>,
    pub init: Vec<u32>,
    pub goal: Vec<u32>,
}

impl Compiled {
    pub fn new(t: &PlanningTask, actions: Vec<GroundedAction>) -> Self {
        let mut table = AtomTable::default();
        let init = t.init.iter().map(|a| table.intern(a)).collect();
        let goal = t.goal.iter().map(|a| table.intern(a)).collect();
        // Ground atoms keyed by predicate and object names, so that atoms
        // seen before are found without being built.
        let mut seen: HashMap<(&str, Vec<&str>), u32> = HashMap::new();
        let mut ops = Vec::with_capacity(actions.len());
        for g in &actions {
            let s = &g.schema;
            let mut id = |a| intern_grounded(&mut table, &mut seen, g, a);
            ops.push(CompiledAction {
                pre: s.pre.iter().map(&mut id).collect(),
                add: s.effect.add.iter().map(&mut id).collect(),
                del: s.effect.del.iter().map(&mut id).collect(),
            });
        }
        drop(seen);
        Compiled { table, actions, ops, init, goal }
    }

    /// Delete-relaxed reachability from `start`, ignoring actions for which
    /// `skip` holds. Counter-based, linear in the size of the actions.
    pub fn relaxed_reachable(&self, start: &[u32], skip: impl Fn(usize) -> bool) -> Vec<bool> {
        let n = self.table.len();
        let mut reached = vec![false; n];
        let mut waiting: Vec<Vec<usize>> = vec![vec![]; n];
        let mut missing: Vec<usize> = vec![0; self.ops.len()];
        let mut stack: Vec<u32> = vec![];
        let fire = |i: usize, stack: &mut Vec<u32>, reached: &mut Vec<bool>| {
            for &a in &self.ops[i].add {
                if !reached[a as usize] {
                    reached[a as usize] = true;
                    stack.push(a);
                }
            }
        };
        for &a in start {
            if !reached[a as usize] {
                reached[a as usize] = true;
                stack.push(a);
            }
        }
        for (i, op) in self.ops.iter().enumerate() {
            if skip(i) {
                continue;
            }
            let mut pre = op.pre.clone();
            pre.sort_unstable();
            pre.dedup();
            missing[i] = pre.len();
            for &p in &pre {
                waiting[p as usize].push(i);
            }
            if pre.is_empty() {
                fire(i, &mut stack, &mut reached);
            }
        }
        while let Some(a) = stack.pop() {
            for &i in &waiting[a as usize] {
                missing[i] -= 1;
                if missing[i] == 0 {
                    fire(i, &mut stack, &mut reached);
                }
            }
        }
        reached
    }

    pub fn reachable_atoms(&self) -> BTreeSet<Atom> {
        self.relaxed_reachable(&self.init, |_| false)
            .iter()
            .enumerate()
            .filter(|(_, r)| **r)
            .map(|(i, _)| self.table.atom(i as u32).clone())
            .collect()
    }
}

/// Least fixpoint of delete-relaxed application starting from `init`.
pub fn reachable_atoms(init: &State, actions: &[GroundedAction]) -> BTreeSet<Atom> {
    let t = PlanningTask { name: String::new(), objects: vec![], init: init.clone(), goal: BTreeSet::new() };
    Compiled::new(&t, actions.to_vec()).reachable_atoms()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Effect, Object, Variable};
    use crate::schema::Provenance;

    fn h() -> TypeHierarchy {
        TypeHierarchy::from_edges("thing", &[("node", "thing")]).unwrap()
    }

    fn step(name: &str, from: &str, to: &str) -> Arc<ActionSchema> {
        let x: Atom = "at(?x0:node)".parse().unwrap();
        Arc::new(ActionSchema {
            name: name.into(),
            description: "GO(?x0:node)".parse().unwrap(),
            params: vec![Variable::new(0, "node")],
            pre: [format!("{from}(?x0:node)").parse().unwrap()].into(),
            effect: Effect::new([format!("{to}(?x0:node)").parse().unwrap()], [x]),
            provenance: Provenance::Individual,
            clusters: vec![],
        })
    }

    fn task(objects: &[&str]) -> PlanningTask {
        PlanningTask {
            name: "chain".into(),
            objects: objects.iter().map(|n| Object::new(*n, "node")).collect(),
            init: State::new(["a(n1:node)".parse().unwrap()]).unwrap(),
            goal: BTreeSet::new(),
        }
    }

    #[test]
    fn no_actions_reach_only_init() {
        let t = task(&["n1"]);
        assert_eq!(reachable_atoms(&t.init, &[]), t.init.atoms().clone());
    }

    #[test]
    fn chain_reaches_all_effects() {
        let t = task(&["n1", "n2"]);
        let schemas = [step("ab", "a", "b"), step("bc", "b", "c"), step("cd", "c", "d")];
        let acts = ground_all(&schemas, &t, &h(), &Restrictions::default());
        assert_eq!(acts.len(), 6);
        let r = reachable_atoms(&t.init, &acts);
        for p in ["a", "b", "c", "d"] {
            assert!(r.contains(&format!("{p}(n1:node)").parse().unwrap()));
            assert!(!r.contains(&format!("{p}(n2:node)").parse().unwrap()));
        }
    }

    #[test]
    fn exclusions_and_failures_filter_groundings() {
        let t = task(&["n1", "n2", "n3"]);
        let schemas = [step("ab", "a", "b")];
        let mut r = Restrictions::default();
        r.excluded.insert("n2".into());
        let acts = ground_all(&schemas, &t, &h(), &r);
        assert_eq!(acts.len(), 2);
        r.failures.record(&acts[0]);
        let acts = ground_all(&schemas, &t, &h(), &r);
        assert_eq!(acts.len(), 1);
        assert_eq!(acts[0].binding[0].name, "n3");
        assert!(ground_all(&schemas, &task(&[]), &h(), &Restrictions::default()).is_empty());
    }
}
