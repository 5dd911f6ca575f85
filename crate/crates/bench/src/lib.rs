//! Benchmark harness for the kitchen domain: task sets, the four-variant
//! comparison, the demonstration-subset study, and report formatting.

pub mod eval;
pub mod report;
pub mod subset;
pub mod tasks;

pub use eval::{aggregate, evaluate, EvalConfig, Models, ResultRow, TaskResult, Variant};
pub use tasks::{builtin_scenarios, builtin_sets, Coverage, Scenario, TaskSet, TaskSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/types.md")]
    mod types {}
    #[doc = include_str!("../../../book/src/kitchen.md")]
    mod kitchen {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/imagination.md")]
    mod imagination {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
}
