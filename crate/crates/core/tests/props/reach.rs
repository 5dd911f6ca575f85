//! Delete-relaxed reachability and grounding checked against exhaustive
//! state-space search and enumeration.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use typegen::ground::reachable_atoms;
use typegen::{
    applicable, apply, ground_schema, ActionSchema, Atom, Effect, GroundedAction, Object, Provenance, State, Term,
    TypeHierarchy, Variable,
};

const PREDICATES: [&str; 4] = ["p", "q", "r", "s"];

fn hierarchy() -> TypeHierarchy {
    TypeHierarchy::from_edges("thing", &[("red", "thing"), ("blue", "thing")]).unwrap()
}

fn world() -> Vec<Object> {
    vec![Object::new("o0", "red"), Object::new("o1", "red"), Object::new("o2", "blue")]
}

/// `(predicate, parameter)` pairs over two parameters.
type Lits = Vec<(usize, usize)>;

fn schema(i: usize, pre: Lits, add: Lits, del: Lits, types: [&str; 2]) -> ActionSchema {
    let params: Vec<Variable> = types.iter().enumerate().map(|(k, t)| Variable::new(k, *t)).collect();
    let lift = |ls: &Lits| -> BTreeSet<Atom> {
        ls.iter().map(|(p, k)| Atom::new(PREDICATES[*p], vec![Term::Variable(params[*k].clone())])).collect()
    };
    let add = lift(&add);
    let del: BTreeSet<Atom> = lift(&del).difference(&add).cloned().collect();
    let pre = lift(&pre);
    ActionSchema {
        name: format!("A{i}"),
        description: Atom::new("ACT", params.iter().cloned().map(Term::Variable).collect()),
        params,
        pre,
        effect: Effect::new(add, del),
        provenance: Provenance::Individual,
        clusters: vec![],
    }
}

fn lits(max: usize) -> impl Strategy<Value = Lits> {
    prop::collection::vec((0..4usize, 0..2usize), 0..=max)
}

pub fn problem() -> impl Strategy<Value = (State, Vec<ActionSchema>)> {
    let types = prop::sample::select(vec![["thing", "thing"], ["red", "thing"], ["red", "red"], ["blue", "red"]]);
    (
        prop::collection::vec((0..4usize, 0..3usize), 0..4),
        prop::collection::vec((lits(3), lits(2), lits(2), types), 1..5),
    )
        .prop_map(|(init, specs)| {
            let objs = world();
            let init = State::new(init.into_iter().map(|(p, o)| Atom::grounded(PREDICATES[p], &[&objs[o]]))).unwrap();
            let schemas =
                specs.into_iter().enumerate().map(|(i, (pre, add, del, ty))| schema(i, pre, add, del, ty)).collect();
            (init, schemas)
        })
}

fn ground(schemas: &[ActionSchema]) -> Vec<GroundedAction> {
    let h = hierarchy();
    schemas.iter().flat_map(|s| ground_schema(&Arc::new(s.clone()), &world(), &h)).collect()
}

/// Every atom true in some state reachable under the real semantics.
fn bfs_atoms(init: &State, actions: &[GroundedAction]) -> BTreeSet<Atom> {
    let mut seen: BTreeSet<BTreeSet<Atom>> = BTreeSet::from([init.atoms().clone()]);
    let mut queue = VecDeque::from([init.clone()]);
    while let Some(s) = queue.pop_front() {
        for g in actions.iter().filter(|g| applicable(&s, g)) {
            let next = apply(&s, g).unwrap();
            if seen.insert(next.atoms().clone()) {
                queue.push_back(next);
            }
        }
    }
    assert!(seen.len() <= 1 << 12);
    seen.into_iter().flatten().collect()
}

/// Naive delete-relaxed fixpoint.
fn relaxed_fixpoint(init: &State, actions: &[GroundedAction]) -> BTreeSet<Atom> {
    let mut reached: BTreeSet<Atom> = init.iter().cloned().collect();
    loop {
        let before = reached.len();
        for g in actions {
            if g.pre().is_subset(&reached) {
                reached.extend(g.effect().add);
            }
        }
        if reached.len() == before {
            return reached;
        }
    }
}

fn injective_fits(s: &ActionSchema, objs: &[Object], h: &TypeHierarchy) -> usize {
    let fit = |o: &Object, k: usize| h.is_subtype(&o.ty, &s.params[k].ty).unwrap();
    let mut n = 0;
    for a in objs {
        for b in objs {
            if a != b && fit(a, 0) && fit(b, 1) {
                n += 1;
            }
        }
    }
    n
}

pub fn check<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&s, f).map_err(|e| e.to_string())
}

pub fn covers_true_reachability((init, schemas): (State, Vec<ActionSchema>)) -> Result<(), TestCaseError> {
    let actions = ground(&schemas);
    let relaxed = reachable_atoms(&init, &actions);
    let real = bfs_atoms(&init, &actions);
    prop_assert!(real.is_subset(&relaxed), "missing {:?}", real.difference(&relaxed).collect::<Vec<_>>());
    Ok(())
}

pub fn is_the_relaxed_fixpoint((init, schemas): (State, Vec<ActionSchema>)) -> Result<(), TestCaseError> {
    let actions = ground(&schemas);
    prop_assert_eq!(reachable_atoms(&init, &actions), relaxed_fixpoint(&init, &actions));
    Ok(())
}

pub fn grounding_is_exhaustive((_, schemas): (State, Vec<ActionSchema>)) -> Result<(), TestCaseError> {
    let h = hierarchy();
    for s in &schemas {
        let got = ground_schema(&Arc::new(s.clone()), &world(), &h);
        prop_assert_eq!(got.len(), injective_fits(s, &world(), &h));
        let keys: BTreeSet<_> = got.iter().map(GroundedAction::key).collect();
        prop_assert_eq!(keys.len(), got.len());
    }
    Ok(())
}

pub fn suite(cases: u32) -> Result<(), String> {
    check(cases, problem(), covers_true_reachability)?;
    check(cases, problem(), is_the_relaxed_fixpoint)
}
