//! A grid kitchen simulator: entities on counters, an agent that moves and
//! interacts, and a parser that turns the low-level state into symbolic
//! atoms.

pub mod demos;
pub mod domain;
pub mod env;
pub mod layout;
pub mod sim;

pub use demos::{builtin as builtin_demos, record_all, DemoScript};
pub use domain::{hierarchy, AttributeSchema, ToolRule};
pub use env::KitchenEnv;
pub use layout::{Direction, Layout, SimConfig};
pub use sim::{Kitchen, Primitive, SimError, Simulator};
