//! Benchmark task sets S1 to S6 and the failure scenarios, loaded from JSON.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use typegen::{Atom, Object, PlanningTask, Term, TypeHierarchy};
use typegen_kitchen::demos::{DemoScript, DEFAULT_AGENT};
use typegen_kitchen::{KitchenEnv, Layout, SimConfig, SimError};

const TASKSETS: &str = include_str!("../data/tasksets.json");
const SCENARIOS: &str = include_str!("../data/scenarios.json");

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error("task {task}: {reason}")]
    Invalid { task: String, reason: String },
    #[error("task {0}: {1}")]
    Sim(String, SimError),
    #[error("malformed task file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    #[serde(default)]
    pub variant: usize,
    pub entities: Vec<(String, String)>,
    /// Goal atoms written without types, e.g. `served_holds(plate_1, tomato_1)`.
    pub goal: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub broken: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exceptions: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSet {
    pub id: String,
    pub description: String,
    pub tasks: Vec<TaskSpec>,
}

/// A task with a known number of plan proposals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub task: TaskSpec,
    pub expected_proposals: usize,
}

pub fn builtin_sets() -> Vec<TaskSet> {
    serde_json::from_str(TASKSETS).expect("embedded task sets parse")
}

pub fn builtin_scenarios() -> Vec<Scenario> {
    serde_json::from_str(SCENARIOS).expect("embedded scenarios parse")
}

pub fn parse_sets(text: &str) -> Result<Vec<TaskSet>, TaskError> {
    Ok(serde_json::from_str(text)?)
}

/// Finds a task by name across sets and scenarios.
pub fn find_task<'a>(sets: &'a [TaskSet], scenarios: &'a [Scenario], name: &str) -> Option<&'a TaskSpec> {
    sets.iter().flat_map(|s| &s.tasks).chain(scenarios.iter().map(|s| &s.task)).find(|t| t.name == name)
}

fn parse_untyped(text: &str, types: &BTreeMap<&str, &str>) -> Result<Atom, String> {
    let text = text.trim();
    let open = text.find('(').ok_or_else(|| format!("{text}: missing '('"))?;
    let inner = text[open + 1..].strip_suffix(')').ok_or_else(|| format!("{text}: missing ')'"))?;
    let args = inner
        .split(',')
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .map(|a| {
            types
                .get(a)
                .map(|ty| Term::Object(Object::new(a, *ty)))
                .ok_or_else(|| format!("{text}: unknown object {a}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Atom::new(text[..open].trim(), args))
}

impl TaskSpec {
    pub fn config(&self) -> SimConfig {
        let mut c = SimConfig::new(Layout::room(DEFAULT_AGENT, &self.entities, self.variant));
        c.broken = self.broken.iter().cloned().collect();
        c.exceptions = self.exceptions.clone();
        c
    }

    pub fn env(&self) -> Result<KitchenEnv, TaskError> {
        KitchenEnv::new(self.config()).map_err(|e| TaskError::Sim(self.name.clone(), e))
    }

    pub fn goal_atoms(&self) -> Result<BTreeSet<Atom>, TaskError> {
        let mut types: BTreeMap<&str, &str> = self.entities.iter().map(|(n, t)| (n.as_str(), t.as_str())).collect();
        types.insert(DEFAULT_AGENT, "agent");
        self.goal
            .iter()
            .map(|g| parse_untyped(g, &types))
            .collect::<Result<_, _>>()
            .map_err(|reason| TaskError::Invalid { task: self.name.clone(), reason })
    }

    /// The planning task and a simulator configured for it.
    pub fn instantiate(&self, h: &TypeHierarchy) -> Result<(PlanningTask, KitchenEnv), TaskError> {
        let env = self.env()?;
        let t = env.task(&self.name, self.goal_atoms()?).map_err(|e| TaskError::Sim(self.name.clone(), e))?;
        t.validate(h).map_err(|e| TaskError::Invalid { task: self.name.clone(), reason: e.to_string() })?;
        Ok((t, env))
    }

    /// Food entities named in the goal.
    pub fn goal_foods(&self, h: &TypeHierarchy) -> Vec<(&str, &str)> {
        let named: BTreeSet<&str> =
            self.goal.iter().flat_map(|g| g.split(['(', ')', ',']).skip(1).map(str::trim)).collect();
        self.entities
            .iter()
            .filter(|(n, t)| named.contains(n.as_str()) && h.is_subtype(t, "food").unwrap_or(false))
            .map(|(n, t)| (n.as_str(), t.as_str()))
            .collect()
    }
}

/// What the demonstrations cover: entity names, entity types, and the sets
/// of foods prepared together.
#[derive(Debug, Clone, Default)]
pub struct Coverage {
    pub names: BTreeSet<String>,
    pub types: BTreeSet<String>,
    pub menus: BTreeSet<BTreeSet<String>>,
}

impl Coverage {
    pub fn of(scripts: &[DemoScript], h: &TypeHierarchy) -> Coverage {
        let mut c = Coverage::default();
        for s in scripts {
            let mut menu = BTreeSet::new();
            for (n, t) in &s.entities {
                c.names.insert(n.clone());
                c.types.insert(t.clone());
                if h.is_subtype(t, "food").unwrap_or(false) {
                    menu.insert(n.clone());
                }
            }
            c.menus.insert(menu);
        }
        c
    }

    /// Checks a task against the membership rule of set `id`.
    pub fn check(&self, id: &str, t: &TaskSpec, h: &TypeHierarchy) -> Result<(), String> {
        let foods = t.goal_foods(h);
        let menu: BTreeSet<String> = foods.iter().map(|(n, _)| n.to_string()).collect();
        // Foods outside the goal are distractors and do not count.
        let used: Vec<&(String, String)> = t
            .entities
            .iter()
            .filter(|(n, ty)| !h.is_subtype(ty, "food").unwrap_or(false) || menu.contains(n))
            .collect();
        let known_types = used.iter().all(|(_, ty)| self.types.contains(ty));
        let known_names = used.iter().all(|(n, _)| self.names.contains(n));
        let ok = match id {
            "S1" => self.menus.contains(&menu) && known_types && known_names,
            "S2" => foods.len() == 2 && !self.menus.contains(&menu) && known_types && known_names,
            "S3" => foods.len() >= 3 && known_types && known_names,
            "S4" => foods.len() < 3 && !known_types,
            "S5" => known_types && !known_names,
            "S6" => foods.len() >= 3 && !known_types,
            other => return Err(format!("unknown task set {other}")),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("{} does not satisfy the membership rule of {id}", t.name))
        }
    }
}
