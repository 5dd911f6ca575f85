//! Executor sessions and imagination on perturbed built-in tasks.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use typegen::execute::{solve, SolveConfig};
use typegen::imagine::imagine;
use typegen::plan::validate_plan;
use typegen::{ActionSchema, Provenance, Restrictions, TypeHierarchy};
use typegen_bench::eval::replay;
use typegen_bench::{builtin_scenarios, builtin_sets, Models, TaskSpec, Variant};
use typegen_kitchen::{builtin_demos, hierarchy, record_all};

fn models() -> &'static Models {
    static M: OnceLock<Models> = OnceLock::new();
    M.get_or_init(|| Models::learn(&record_all(&builtin_demos()).unwrap(), &hierarchy()).unwrap())
}

fn tasks() -> &'static [TaskSpec] {
    static T: OnceLock<Vec<TaskSpec>> = OnceLock::new();
    T.get_or_init(|| {
        let mut all: Vec<TaskSpec> = builtin_sets().into_iter().flat_map(|s| s.tasks).collect();
        all.extend(builtin_scenarios().into_iter().map(|s| s.task));
        all
    })
}

fn is_tool(ty: &str, h: &TypeHierarchy) -> bool {
    h.is_subtype(ty, "tool").unwrap()
}

/// A built-in task with a random subset of its tools broken and possibly
/// one (tool, food) exception.
pub fn perturbed() -> impl Strategy<Value = (TaskSpec, Variant)> {
    (any::<prop::sample::Index>(), 0..4usize, any::<u8>(), any::<Option<(prop::sample::Index, prop::sample::Index)>>())
        .prop_map(|(i, v, broken, exception)| {
            let h = hierarchy();
            let mut t = i.get(tasks()).clone();
            let tools: Vec<(String, String)> = t.entities.iter().filter(|(_, ty)| is_tool(ty, &h)).cloned().collect();
            let foods: Vec<String> = t
                .entities
                .iter()
                .filter(|(_, ty)| h.is_subtype(ty, "food").unwrap())
                .map(|(_, ty)| ty.clone())
                .collect();
            for (k, (name, _)) in tools.iter().enumerate() {
                if broken & (1 << k) != 0 && !t.broken.contains(name) {
                    t.broken.push(name.clone());
                }
            }
            if let (Some((a, b)), false, false) = (exception, tools.is_empty(), foods.is_empty()) {
                t.exceptions.push((a.get(&tools).1.clone(), b.get(&foods).clone()));
            }
            (t, Variant::ALL[v])
        })
}

pub fn excluded_subset() -> impl Strategy<Value = (TaskSpec, Variant, u16)> {
    (any::<prop::sample::Index>(), 0..4usize, any::<u16>())
        .prop_map(|(i, v, mask)| (i.get(tasks()).clone(), Variant::ALL[v], mask))
}

pub fn check<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&s, f).map_err(|e| e.to_string())
}

/// Failed groundings and excluded objects never reappear, every proposal is
/// symbolically valid, and the final plan replays in a fresh simulator.
pub fn session_invariants((spec, variant): (TaskSpec, Variant)) -> Result<(), TestCaseError> {
    let m = models();
    let h = &m.hierarchy;
    let schemas = m.schemas(variant);
    let (t, mut env) = spec.instantiate(h).unwrap();
    let cfg = SolveConfig { imagine: variant.imagine(), ..SolveConfig::default() };
    let report = solve(&t, schemas, h, &mut env, &cfg);
    let trace = &report.trace;
    let mut all: Vec<ActionSchema> = schemas.to_vec();
    all.extend(trace.imagined.iter().cloned());

    let mismatches = trace.attempts.iter().filter(|a| a.outcome.mismatch.is_some()).count();
    if report.solved() {
        prop_assert_eq!(report.proposals, 1 + mismatches);
    }
    let mut failed: BTreeSet<(String, Vec<String>)> = BTreeSet::new();
    let mut excluded: BTreeSet<String> = BTreeSet::new();
    for a in &trace.attempts {
        for s in &a.plan.steps {
            let key = (s.action.clone(), s.binding.iter().map(|o| o.name.clone()).collect::<Vec<_>>());
            prop_assert!(!failed.contains(&key), "{:?} reappeared", key);
            prop_assert!(s.binding.iter().all(|o| !excluded.contains(&o.name)));
        }
        let steps = a.plan.resolve(&all, h).unwrap();
        prop_assert!(validate_plan(&t, &steps).is_ok());
        if let Some(mm) = &a.outcome.mismatch {
            let s = &a.plan.steps[mm.step];
            failed.insert((s.action.clone(), s.binding.iter().map(|o| o.name.clone()).collect()));
        }
        excluded.extend(a.excluded.iter().cloned());
    }
    prop_assert_eq!(trace.failures.len(), failed.len());
    if let Some(plan) = &report.plan {
        prop_assert!(replay(&spec, &t, plan, &all, h).is_ok());
    }
    Ok(())
}

pub fn imagination_widens_only((spec, variant, mask): (TaskSpec, Variant, u16)) -> Result<(), TestCaseError> {
    let m = models();
    let h = &m.hierarchy;
    let schemas = m.schemas(variant);
    let (t, _) = spec.instantiate(h).unwrap();
    let goal: BTreeSet<&str> = t.goal_objects().into_iter().map(|o| o.name.as_str()).collect();
    let r = Restrictions {
        excluded: t
            .objects
            .iter()
            .enumerate()
            .filter(|(i, o)| mask & (1 << (i % 16)) != 0 && !goal.contains(o.name.as_str()) && o.ty != "agent")
            .map(|(_, o)| o.name.clone())
            .collect(),
        ..Restrictions::default()
    };
    let res = imagine(schemas, h, &t, &r);
    prop_assert_eq!(&res.actions[..schemas.len()], schemas);
    prop_assert_eq!(res.actions.len(), schemas.len() + res.added.len());
    for a in &res.added {
        let s = &a.schema;
        prop_assert_eq!(s.provenance, Provenance::Imagined);
        let base = s.name.split("__").next().unwrap();
        let original = schemas.iter().find(|o| o.name == base).unwrap();
        let from = original.param_types();
        let to = s.param_types();
        prop_assert!(from.iter().zip(&to).all(|(f, w)| h.is_subtype(f, w).unwrap() && *w != h.root()));
        prop_assert!(from != to);
        let to: Vec<String> = to.iter().map(|x| x.to_string()).collect();
        prop_assert!(s.same_behavior(&original.retyped(&to)));
    }
    let again = imagine(&res.actions, h, &t, &r);
    prop_assert!(again.added.is_empty());
    prop_assert_eq!(again.actions, res.actions);
    prop_assert_eq!(again.unreachable, res.unreachable);
    Ok(())
}

pub fn suite(cases: u32) -> Result<(), String> {
    check(cases, perturbed(), session_invariants)?;
    check(cases, excluded_subset(), imagination_widens_only)
}
