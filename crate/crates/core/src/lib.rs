pub mod error;
pub mod execute;
pub mod ground;
pub mod hierarchy;
pub mod imagine;
pub mod learn;
pub mod logic;
pub mod pddl;
pub mod plan;
pub mod schema;
pub mod task;
pub mod unify;

pub use error::{Error, Result};
pub use execute::{solve, Environment, SolveConfig, SolveReport, Status};
pub use hierarchy::{EntityType, TypeHierarchy};
pub use learn::{learn, learn_individual, Demonstration, LearnedModel, Transition};
pub use logic::{diff, Atom, Effect, Object, State, Substitution, Term, Variable};
pub use plan::{Plan, PlanError, PlannerConfig, PlanningSession};
pub use schema::{applicable, apply, ground_schema, ActionSchema, GroundedAction, Provenance};
pub use task::{FailureMemory, PlanningTask, Restrictions};
pub use unify::unify_effects;
