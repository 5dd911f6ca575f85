//! Scripted demonstrations. Each script lists interaction steps such as
//! `PLACE tomato_1 cutboard_1`; recording navigates to each target and
//! keeps one transition per interaction.

use serde::{Deserialize, Serialize};
use typegen::{Atom, Demonstration, Object, Term, Transition};

use crate::layout::{Layout, SimConfig};
use crate::sim::{SimError, Simulator};

pub const DEFAULT_AGENT: &str = "agent_1";

const BUILTIN: &str = include_str!("../data/demos.json");

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("demo {demo}, step {index} ({step}): {reason}")]
    Step { demo: String, index: usize, step: String, reason: String },
    #[error("demo {0}: {1}")]
    Sim(String, SimError),
    #[error("malformed demo file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoScript {
    pub name: String,
    #[serde(default)]
    pub variant: usize,
    pub entities: Vec<(String, String)>,
    pub steps: Vec<String>,
}

pub fn builtin() -> Vec<DemoScript> {
    serde_json::from_str(BUILTIN).expect("embedded demos parse")
}

pub fn parse_scripts(text: &str) -> Result<Vec<DemoScript>, DemoError> {
    Ok(serde_json::from_str(text)?)
}

impl DemoScript {
    pub fn config(&self) -> SimConfig {
        SimConfig::new(Layout::room(DEFAULT_AGENT, &self.entities, self.variant))
    }

    fn object(&self, name: &str) -> Option<Object> {
        if name == DEFAULT_AGENT {
            return Some(Object::new(name, "agent"));
        }
        self.entities.iter().find(|(n, _)| n == name).map(|(n, t)| Object::new(n.clone(), t.clone()))
    }

    /// Turns `VERB arg...` into the action description atom with the agent
    /// as first argument.
    pub fn describe(&self, step: &str) -> Result<Atom, String> {
        let mut words = step.split_whitespace();
        let verb = words.next().ok_or("empty step")?;
        if !matches!(verb, "PICK" | "PLACE" | "USE") {
            return Err(format!("unknown verb {verb}"));
        }
        let mut args = vec![Term::Object(Object::new(DEFAULT_AGENT, "agent"))];
        for w in words {
            let o = self.object(w).ok_or_else(|| format!("unknown entity {w}"))?;
            args.push(Term::Object(o));
        }
        Ok(Atom::new(verb, args))
    }

    pub fn record(&self) -> Result<Demonstration, DemoError> {
        let mut sim = Simulator::new(self.config()).map_err(|e| DemoError::Sim(self.name.clone(), e))?;
        let mut transitions = vec![];
        for (index, step) in self.steps.iter().enumerate() {
            let fail = |reason: String| DemoError::Step { demo: self.name.clone(), index, step: step.clone(), reason };
            let action = self.describe(step).map_err(fail)?;
            let before = sim.observe();
            let effect = sim.execute_symbolic(&action).map_err(|e| fail(e.to_string()))?;
            if effect.is_empty() {
                return Err(fail("no symbolic effect".into()));
            }
            transitions.push(Transition { before, action, after: sim.observe() });
        }
        Ok(Demonstration { task: self.name.clone(), transitions })
    }
}

pub fn record_all(scripts: &[DemoScript]) -> Result<Vec<Demonstration>, DemoError> {
    scripts.iter().map(DemoScript::record).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_demos_record() {
        let demos = record_all(&builtin()).unwrap();
        assert_eq!(demos.len(), 8);
        let total: usize = demos.iter().map(|d| d.transitions.len()).sum();
        assert_eq!(total, 59);
        for d in &demos {
            d.validate().unwrap();
        }
    }

    #[test]
    fn recording_is_deterministic() {
        assert_eq!(record_all(&builtin()).unwrap(), record_all(&builtin()).unwrap());
    }

    #[test]
    fn ineffective_step_is_rejected() {
        let mut s = builtin().remove(0);
        s.steps.insert(1, "USE cutboard_1".into());
        assert!(matches!(s.record(), Err(DemoError::Step { index: 1, .. })));
        s.steps[1] = "STIR cutboard_1".into();
        assert!(s.record().is_err());
    }
}
