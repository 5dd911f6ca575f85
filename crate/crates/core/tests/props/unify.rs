//! Effect unification checked against exhaustive bijection search.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use typegen::{unify_effects, Atom, Effect, Object, Substitution, Term};

const PREDICATES: [(&str, usize); 4] = [("p", 1), ("q", 1), ("r", 2), ("s", 2)];

type Spec = (usize, usize, usize);

fn atom(spec: Spec, objects: &[Object]) -> Atom {
    let (p, a, b) = spec;
    let (name, arity) = PREDICATES[p];
    let n = objects.len();
    let mut args = vec![Term::Object(objects[a % n].clone())];
    if arity == 2 {
        args.push(Term::Object(objects[b % n].clone()));
    }
    Atom::new(name, args)
}

fn objects(prefix: &str, types: &[usize]) -> Vec<Object> {
    types.iter().enumerate().map(|(i, t)| Object::new(format!("{prefix}{i}"), format!("t{t}"))).collect()
}

fn mentioned(e: &Effect) -> Vec<Object> {
    let set: BTreeSet<Object> = e.atoms().flat_map(|a| a.objects().cloned()).collect();
    set.into_iter().collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Tries every bijection between the mentioned objects.
fn brute_force(e1: &Effect, e2: &Effect) -> bool {
    let (l, r) = (mentioned(e1), mentioned(e2));
    if l.len() != r.len() {
        return false;
    }
    permutations(l.len()).into_iter().any(|perm| {
        let sigma: Substitution =
            l.iter().zip(&perm).map(|(o, &i)| (Term::Object(o.clone()), Term::Object(r[i].clone()))).collect();
        sigma.apply_effect(e1) == *e2
    })
}

pub fn effects() -> impl Strategy<Value = (Effect, Effect)> {
    let spec = (0..4usize, 0..5usize, 0..5usize);
    (
        1..=5usize,
        prop::collection::vec(0..2usize, 5),
        prop::collection::vec(0..2usize, 5),
        prop::collection::vec(spec.clone(), 0..5),
        prop::collection::vec(spec.clone(), 0..4),
        Just((0..5).collect::<Vec<usize>>()).prop_shuffle(),
        0..4u8,
        spec,
    )
        .prop_map(|(n, t1, t2, add, del, perm, mutation, extra)| {
            let left = objects("a", &t1[..n]);
            let right = objects("b", &t2[..n]);
            let add: BTreeSet<Atom> = add.into_iter().map(|s| atom(s, &left)).collect();
            let del: BTreeSet<Atom> = del.into_iter().map(|s| atom(s, &left)).filter(|a| !add.contains(a)).collect();
            let e1 = Effect::new(add, del);
            let perm = perm.into_iter().filter(|&p| p < n);
            let renaming: Substitution =
                left.iter().zip(perm).map(|(o, i)| (Term::Object(o.clone()), Term::Object(right[i].clone()))).collect();
            let mut e2 = renaming.apply_effect(&e1);
            match mutation {
                0 => {
                    e2.add.insert(atom(extra, &right));
                }
                1 => {
                    if let Some(a) = e2.add.pop_first() {
                        e2.del.insert(a);
                    }
                }
                _ => {}
            }
            (e1, e2)
        })
}

pub fn check<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&s, f).map_err(|e| e.to_string())
}

pub fn agrees_with_bijection_search((e1, e2): (Effect, Effect)) -> Result<(), TestCaseError> {
    let found = unify_effects(&e1, &e2);
    prop_assert_eq!(found.is_some(), brute_force(&e1, &e2));
    if let Some(sigma) = found {
        prop_assert_eq!(sigma.apply_effect(&e1), e2.clone());
        let images: BTreeSet<Term> = sigma.iter().map(|(_, v)| v.clone()).collect();
        prop_assert_eq!(images.len(), sigma.len());
    }
    Ok(())
}

pub fn is_symmetric((e1, e2): (Effect, Effect)) -> Result<(), TestCaseError> {
    prop_assert_eq!(unify_effects(&e1, &e2).is_some(), unify_effects(&e2, &e1).is_some());
    Ok(())
}

pub fn suite(cases: u32) -> Result<(), String> {
    check(cases, effects(), agrees_with_bijection_search)?;
    check(cases, effects(), is_symmetric)
}
