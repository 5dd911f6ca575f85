//! Learning variants, per-task evaluation with replay checks, and
//! aggregation into result rows.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use typegen::execute::{solve, SolveConfig, Status};
use typegen::ground::ground_all;
use typegen::plan::{validate_plan, PlanRecord};
use typegen::{learn, ActionSchema, Demonstration, Environment, LearnedModel, PlanningTask, TypeHierarchy};

use crate::tasks::{TaskError, TaskSet, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "individual")]
    Individual,
    #[serde(rename = "individual+imagined")]
    IndividualImagined,
    #[serde(rename = "generalized")]
    Generalized,
    #[serde(rename = "generalized+imagined")]
    GeneralizedImagined,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::Individual, Variant::IndividualImagined, Variant::Generalized, Variant::GeneralizedImagined];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Individual => "individual",
            Variant::IndividualImagined => "individual+imagined",
            Variant::Generalized => "generalized",
            Variant::GeneralizedImagined => "generalized+imagined",
        }
    }

    pub fn generalize(self) -> bool {
        matches!(self, Variant::Generalized | Variant::GeneralizedImagined)
    }

    pub fn imagine(self) -> bool {
        matches!(self, Variant::IndividualImagined | Variant::GeneralizedImagined)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant {s}; expected one of individual, individual+imagined, generalized, generalized+imagined"))
    }
}

/// Both learned models over one set of demonstrations.
#[derive(Debug, Clone)]
pub struct Models {
    pub hierarchy: TypeHierarchy,
    pub individual: LearnedModel,
    pub generalized: LearnedModel,
}

impl Models {
    pub fn learn(demos: &[Demonstration], h: &TypeHierarchy) -> typegen::Result<Models> {
        Ok(Models { hierarchy: h.clone(), individual: learn(demos, h, false)?, generalized: learn(demos, h, true)? })
    }

    pub fn schemas(&self, v: Variant) -> &[ActionSchema] {
        if v.generalize() {
            &self.generalized.schemas
        } else {
            &self.individual.schemas
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub solve: SolveConfig,
    /// Planning time is the median over this many identical runs.
    pub repetitions: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { solve: SolveConfig::default(), repetitions: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub set: String,
    pub task: String,
    pub variant: Variant,
    pub status: Status,
    pub solved: bool,
    pub plan_length: Option<usize>,
    pub proposals: usize,
    pub planning_ms: f64,
    /// Lifted schemas given to the planner.
    pub lifted: usize,
    /// Groundings of those schemas over the task's objects.
    pub grounded: usize,
    /// Symbolic and simulator replay of the final plan both reached the goal.
    pub replay_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Replays `plan` symbolically from the task's initial state and in a fresh
/// simulator; both must reach the goal.
pub fn replay(
    spec: &TaskSpec,
    t: &PlanningTask,
    plan: &PlanRecord,
    schemas: &[ActionSchema],
    h: &TypeHierarchy,
) -> Result<(), String> {
    let steps = plan.resolve(schemas, h).map_err(|e| e.to_string())?;
    let end = validate_plan(t, &steps).map_err(|e| e.to_string())?;
    if !t.goal_reached(&end) {
        return Err("symbolic replay misses the goal".into());
    }
    let mut env = spec.env().map_err(|e| e.to_string())?;
    for s in &plan.steps {
        env.execute(&s.description).map_err(|e| e.to_string())?;
    }
    if !env.observe().is_superset_of(&t.goal) {
        return Err("simulator replay misses the goal".into());
    }
    Ok(())
}

pub fn run_task(
    set: &str,
    spec: &TaskSpec,
    schemas: &[ActionSchema],
    variant: Variant,
    h: &TypeHierarchy,
    cfg: &EvalConfig,
) -> TaskResult {
    let mut result = TaskResult {
        set: set.to_string(),
        task: spec.name.clone(),
        variant,
        status: Status::Exhausted,
        solved: false,
        plan_length: None,
        proposals: 0,
        planning_ms: 0.0,
        lifted: schemas.len(),
        grounded: 0,
        replay_ok: None,
        error: None,
    };
    let (t, mut env) = match spec.instantiate(h) {
        Ok(x) => x,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    let arcs: Vec<Arc<ActionSchema>> = schemas.iter().cloned().map(Arc::new).collect();
    result.grounded = ground_all(&arcs, &t, h, &Default::default()).len();
    let solve_cfg = SolveConfig { imagine: variant.imagine(), ..cfg.solve.clone() };
    let mut times = vec![];
    let mut report = None;
    for _ in 0..cfg.repetitions.max(1) {
        let r = solve(&t, schemas, h, &mut env, &solve_cfg);
        times.push(r.planning_ms);
        report.get_or_insert(r);
    }
    let report = report.expect("at least one repetition");
    result.status = report.status;
    result.solved = report.solved();
    result.proposals = report.proposals;
    result.planning_ms = median(&mut times);
    result.error = report.trace.planner_error.clone().filter(|_| !result.solved);
    if let Some(plan) = &report.plan {
        result.plan_length = Some(plan.steps.len());
        let mut all = schemas.to_vec();
        all.extend(report.trace.imagined.iter().cloned());
        let check = replay(spec, &t, plan, &all, h);
        if let Err(e) = &check {
            result.error = Some(e.clone());
        }
        result.replay_ok = Some(check.is_ok());
    }
    result
}

/// Runs every task of `sets` under every variant, in parallel. Results
/// come back in set, task, variant order.
pub fn evaluate(sets: &[TaskSet], models: &Models, variants: &[Variant], cfg: &EvalConfig) -> Vec<TaskResult> {
    let jobs: Vec<(&str, &TaskSpec, Variant)> = sets
        .iter()
        .flat_map(|s| s.tasks.iter().flat_map(move |t| variants.iter().map(move |v| (s.id.as_str(), t, *v))))
        .collect();
    jobs.par_iter().map(|(set, t, v)| run_task(set, t, models.schemas(*v), *v, &models.hierarchy, cfg)).collect()
}

/// One row of the comparison table: a task set under a variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub set: String,
    pub variant: Variant,
    pub tasks: usize,
    pub solved: usize,
    pub solved_fraction: f64,
    pub mean_length: f64,
    pub max_length: usize,
    pub mean_proposals: f64,
    pub mean_planning_ms: f64,
    pub lifted: f64,
    pub grounded: f64,
}

pub fn aggregate(results: &[TaskResult]) -> Vec<ResultRow> {
    let mut keys: Vec<(String, Variant)> = vec![];
    for r in results {
        let k = (r.set.clone(), r.variant);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    keys.into_iter()
        .map(|(set, variant)| {
            let rs: Vec<&TaskResult> = results.iter().filter(|r| r.set == set && r.variant == variant).collect();
            let solved: Vec<&&TaskResult> = rs.iter().filter(|r| r.solved).collect();
            let mean = |xs: Vec<f64>| if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 };
            ResultRow {
                tasks: rs.len(),
                solved: solved.len(),
                solved_fraction: solved.len() as f64 / rs.len().max(1) as f64,
                mean_length: mean(solved.iter().filter_map(|r| r.plan_length).map(|l| l as f64).collect()),
                max_length: solved.iter().filter_map(|r| r.plan_length).max().unwrap_or(0),
                mean_proposals: mean(solved.iter().map(|r| r.proposals as f64).collect()),
                mean_planning_ms: mean(rs.iter().map(|r| r.planning_ms).collect()),
                lifted: mean(rs.iter().map(|r| r.lifted as f64).collect()),
                grounded: mean(rs.iter().map(|r| r.grounded as f64).collect()),
                set,
                variant,
            }
        })
        .collect()
}

/// Instantiates every task once, reporting the first malformed one.
pub fn check_sets(sets: &[TaskSet], h: &TypeHierarchy) -> Result<(), TaskError> {
    for s in sets {
        for t in &s.tasks {
            t.instantiate(h)?;
        }
    }
    Ok(())
}
