use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::TypeHierarchy;
use crate::logic::{Atom, Object, State};
use crate::schema::GroundedAction;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanningTask {
    pub name: String,
    pub objects: Vec<Object>,
    pub init: State,
    pub goal: BTreeSet<Atom>,
}

impl PlanningTask {
    /// Objects are declared with hierarchy types, and init and goal only
    /// mention declared objects.
    pub fn validate(&self, h: &TypeHierarchy) -> Result<()> {
        let declared: BTreeSet<&Object> = self.objects.iter().collect();
        for o in &self.objects {
            if !h.contains(&o.ty) {
                return Err(Error::UnknownType(o.ty.clone()));
            }
        }
        if declared.len() != self.objects.len() {
            return Err(Error::Parse { input: self.name.clone(), reason: "duplicate object".into() });
        }
        for a in self.init.iter().chain(&self.goal) {
            if !a.is_grounded() {
                return Err(Error::Parse { input: a.to_string(), reason: "goal atoms must be grounded".into() });
            }
            if let Some(o) = a.objects().find(|o| !declared.contains(o)) {
                return Err(Error::Parse { input: a.to_string(), reason: format!("undeclared object {o}") });
            }
        }
        Ok(())
    }

    /// Every object mentioned by a goal atom.
    pub fn goal_objects(&self) -> BTreeSet<&Object> {
        self.goal.iter().flat_map(Atom::objects).collect()
    }

    pub fn goal_reached(&self, s: &State) -> bool {
        s.is_superset_of(&self.goal)
    }
}

/// Groundings that failed during execution, keyed by schema name and the
/// bound object names. Entries are never removed within a session.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureMemory {
    entries: BTreeSet<(String, Vec<String>)>,
}

impl FailureMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, g: &GroundedAction) -> bool {
        self.entries.insert(g.key())
    }

    pub fn blocks(&self, g: &GroundedAction) -> bool {
        !self.entries.is_empty() && self.entries.contains(&g.key())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, Vec<String>)> {
        self.entries.iter()
    }
}

/// What grounding must leave out: excluded objects and remembered failures.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restrictions {
    pub excluded: BTreeSet<String>,
    pub failures: FailureMemory,
}

impl Restrictions {
    pub fn available<'a>(&self, t: &'a PlanningTask) -> Vec<&'a Object> {
        t.objects.iter().filter(|o| !self.excluded.contains(&o.name)).collect()
    }

    pub fn allows(&self, g: &GroundedAction) -> bool {
        !g.binding.iter().any(|o| self.excluded.contains(&o.name)) && !self.failures.blocks(g)
    }
}
