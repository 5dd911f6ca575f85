//! Running plans in an environment, monitoring effects, and replanning with
//! exclusions after a mismatch.

use std::collections::BTreeSet;

use log::info;
use serde::{Deserialize, Serialize};

use crate::hierarchy::TypeHierarchy;
use crate::learn::Transition;
use crate::logic::{diff, Atom, Effect, Object, State};
use crate::plan::{Plan, PlanRecord, PlannerConfig, PlanningSession};
use crate::schema::{ActionSchema, GroundedAction, Provenance};
use crate::task::{FailureMemory, PlanningTask};

/// A world the executor can act in. Actions are given by their grounded
/// description, e.g. `USE(agent_1, cutboard_1)`.
pub trait Environment {
    type Error: std::fmt::Display;

    /// Restores the initial configuration of the current task.
    fn reset(&mut self);

    fn observe(&self) -> State;

    fn execute(&mut self, action: &Atom) -> Result<(), Self::Error>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Success,
    Mismatch,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MismatchReport {
    pub step: usize,
    pub action: String,
    pub expected: Effect,
    pub observed: Effect,
    /// Environment error message, when the action could not be carried out.
    pub error: Option<String>,
    pub involved: Vec<Object>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionOutcome {
    pub status: Status,
    pub executed: usize,
    pub mismatch: Option<MismatchReport>,
    /// Observed transitions of imagined actions, available for re-learning.
    pub validated: Vec<Transition>,
}

/// Executes `steps` from the environment's current state. Stops at the
/// first step whose observed change differs from the expected one.
pub fn run_plan<E: Environment>(steps: &[GroundedAction], goal: &BTreeSet<Atom>, env: &mut E) -> ExecutionOutcome {
    let mut validated = vec![];
    for (i, g) in steps.iter().enumerate() {
        let before = env.observe();
        let expected = g.effect().effective_in(&before);
        let description = g.description();
        let (observed, error) = match env.execute(&description) {
            Ok(()) => (diff(&before, &env.observe()), None),
            Err(e) => (Effect::default(), Some(e.to_string())),
        };
        if observed != expected {
            return ExecutionOutcome {
                status: Status::Mismatch,
                executed: i,
                mismatch: Some(MismatchReport {
                    step: i,
                    action: g.to_string(),
                    expected,
                    observed,
                    error,
                    involved: g.binding.clone(),
                }),
                validated,
            };
        }
        if g.schema.provenance == Provenance::Imagined {
            validated.push(Transition { before, action: description, after: env.observe() });
        }
    }
    let status = if env.observe().is_superset_of(goal) { Status::Success } else { Status::Exhausted };
    ExecutionOutcome { status, executed: steps.len(), mismatch: None, validated }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub planner: PlannerConfig,
    pub imagine: bool,
    pub max_proposals: usize,
    /// Objects of these types (or subtypes) are never excluded after a
    /// mismatch.
    pub protected_types: Vec<String>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            planner: PlannerConfig::default(),
            imagine: true,
            max_proposals: 10,
            protected_types: vec!["agent".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub plan: PlanRecord,
    pub outcome: ExecutionOutcome,
    pub excluded: Vec<String>,
}

/// Per-session record of everything the executor did.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionTrace {
    pub task: String,
    pub attempts: Vec<Attempt>,
    pub imagined: Vec<ActionSchema>,
    pub failures: FailureMemory,
    pub planner_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: Status,
    /// Number of plans proposed.
    pub proposals: usize,
    pub plan: Option<PlanRecord>,
    /// Total planning time over all proposals.
    pub planning_ms: f64,
    pub trace: SessionTrace,
}

impl SolveReport {
    pub fn solved(&self) -> bool {
        self.status == Status::Success
    }
}

/// Objects to exclude after `g` failed: everything it binds except goal
/// objects and protected types.
pub fn involved_objects(g: &GroundedAction, t: &PlanningTask, h: &TypeHierarchy, protected: &[String]) -> Vec<String> {
    let goal: BTreeSet<&str> = t.goal_objects().into_iter().map(|o| o.name.as_str()).collect();
    g.binding
        .iter()
        .filter(|o| !goal.contains(o.name.as_str()))
        .filter(|o| !protected.iter().any(|p| h.is_subtype(&o.ty, p).unwrap_or(false)))
        .map(|o| o.name.clone())
        .collect()
}

/// Plan, execute, and replan until the goal is observed, the planner gives
/// up, or `max_proposals` plans have been tried.
pub fn solve<E: Environment>(
    t: &PlanningTask,
    schemas: &[ActionSchema],
    h: &TypeHierarchy,
    env: &mut E,
    cfg: &SolveConfig,
) -> SolveReport {
    let mut session = PlanningSession::new(t.clone(), schemas.to_vec(), h.clone(), cfg.planner.clone(), cfg.imagine);
    let mut trace = SessionTrace { task: t.name.clone(), ..SessionTrace::default() };
    let mut exclusions: Vec<String> = vec![];
    let mut planning_ms = 0.0;
    let mut status = Status::Exhausted;
    let mut last: Option<Plan> = None;
    while trace.attempts.len() < cfg.max_proposals.max(1) {
        let plan = match session.next_plan(std::mem::take(&mut exclusions)) {
            Ok(p) => p,
            Err(e) => {
                trace.planner_error = Some(e.to_string());
                break;
            }
        };
        planning_ms += plan.stats.time_ms;
        if let Some(res) = session.imagination() {
            for a in &res.added {
                if !trace.imagined.iter().any(|s| s.name == a.schema.name) {
                    trace.imagined.push(a.schema.clone());
                }
            }
        }
        env.reset();
        let outcome = run_plan(&plan.steps, &t.goal, env);
        let mut excluded = vec![];
        if let Some(m) = &outcome.mismatch {
            let failed = &plan.steps[m.step];
            info!("{}: {} failed at step {}", t.name, failed, m.step);
            session.record_failure(failed);
            excluded = involved_objects(failed, t, h, &cfg.protected_types);
            exclusions = excluded.clone();
        }
        let done = outcome.status == Status::Success;
        trace.attempts.push(Attempt { plan: plan.record(), outcome, excluded });
        last = Some(plan);
        if done {
            status = Status::Success;
            break;
        }
        if trace.attempts.last().is_some_and(|a| a.outcome.mismatch.is_none()) {
            // Executed as expected but the goal did not hold: the model is
            // wrong in a way exclusions cannot fix.
            break;
        }
    }
    trace.failures = session.restrictions().failures.clone();
    SolveReport {
        status,
        proposals: trace.attempts.len(),
        plan: last.filter(|_| status == Status::Success).map(|p| p.record()),
        planning_ms,
        trace,
    }
}
