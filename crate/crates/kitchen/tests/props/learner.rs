//! Learner invariants over every subset of the recorded demonstrations.
#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use typegen::learn::generalize_schemas;
use typegen::{ground_schema, learn, ActionSchema, Demonstration, Transition, TypeHierarchy};
use typegen_kitchen::{builtin_demos, hierarchy, record_all};

fn demos() -> Vec<Demonstration> {
    record_all(&builtin_demos()).unwrap()
}

fn subset(all: &[Demonstration], mask: u8) -> Vec<Demonstration> {
    all.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, d)| d.clone()).collect()
}

/// Some grounding of some schema is applicable before `t` and yields exactly
/// its observed change.
fn explains(schemas: &[ActionSchema], t: &Transition, h: &TypeHierarchy) -> bool {
    let objects: Vec<_> = t.before.objects().into_iter().collect();
    schemas.iter().any(|s| {
        ground_schema(&Arc::new(s.clone()), &objects, h).iter().any(|g| {
            g.description() == t.action
                && t.before.is_superset_of(&g.pre())
                && g.effect().effective_in(&t.before) == t.effect()
        })
    })
}

pub fn check<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&s, f).map_err(|e| e.to_string())
}

pub fn masks() -> impl Strategy<Value = u8> {
    1u8..=255
}

pub fn generalization_is_a_fixpoint(mask: u8) -> Result<(), TestCaseError> {
    let h = hierarchy();
    let m = learn(&subset(&demos(), mask), &h, true).unwrap();
    let again = generalize_schemas(&m.clusters, m.schemas.clone(), &h).unwrap();
    prop_assert_eq!(again, m.schemas);
    Ok(())
}

pub fn learning_is_deterministic(mask: u8) -> Result<(), TestCaseError> {
    let h = hierarchy();
    let d = subset(&demos(), mask);
    prop_assert_eq!(learn(&d, &h, true).unwrap().schemas, learn(&d, &h, true).unwrap().schemas);
    Ok(())
}

pub fn schemas_explain_their_demonstrations(mask: u8) -> Result<(), TestCaseError> {
    let h = hierarchy();
    let d = subset(&demos(), mask);
    let observed: usize = d.iter().map(|x| x.transitions.len()).sum();
    for generalize in [false, true] {
        let m = learn(&d, &h, generalize).unwrap();
        prop_assert!(m.schemas.len() <= observed);
        for t in d.iter().flat_map(|x| &x.transitions) {
            prop_assert!(explains(&m.schemas, t, &h), "{} unexplained", t.action);
        }
    }
    Ok(())
}

pub fn generalization_never_grows_the_model(mask: u8) -> Result<(), TestCaseError> {
    let h = hierarchy();
    let d = subset(&demos(), mask);
    prop_assert!(learn(&d, &h, true).unwrap().schemas.len() <= learn(&d, &h, false).unwrap().schemas.len());
    Ok(())
}

/// Every subset, not a sample.
pub fn suite() -> Result<(), String> {
    for mask in 1u8..=255 {
        generalization_is_a_fixpoint(mask).map_err(|e| format!("subset {mask:#010b}: {e}"))?;
    }
    Ok(())
}
