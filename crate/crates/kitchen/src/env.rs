//! The simulator as a symbolic execution environment.

use std::collections::BTreeSet;

use typegen::{Atom, Environment, Object, PlanningTask, State};

use crate::layout::SimConfig;
use crate::sim::{SimError, Simulator};

#[derive(Debug, Clone)]
pub struct KitchenEnv {
    pub sim: Simulator,
    /// Number of symbolic actions executed since construction.
    pub executed: usize,
}

impl KitchenEnv {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        Ok(KitchenEnv { sim: Simulator::new(config)?, executed: 0 })
    }

    /// Objects of the initial configuration: the agent and every entity.
    pub fn objects(&self) -> Vec<Object> {
        let k = &self.sim.state;
        let mut out = vec![Object::new(k.agent.name.clone(), "agent")];
        out.extend(k.entities.values().map(|e| Object::new(e.name.clone(), e.ty.clone())));
        out
    }

    /// Planning task starting from the initial configuration.
    pub fn task(&self, name: &str, goal: BTreeSet<Atom>) -> Result<PlanningTask, SimError> {
        let init = self.sim.parse(&self.sim.initial_state()?)?;
        Ok(PlanningTask { name: name.to_string(), objects: self.objects(), init, goal })
    }
}

impl Environment for KitchenEnv {
    type Error = SimError;

    fn reset(&mut self) {
        self.sim.reset();
    }

    fn observe(&self) -> State {
        self.sim.observe()
    }

    fn execute(&mut self, action: &Atom) -> Result<(), SimError> {
        self.executed += 1;
        self.sim.execute_symbolic(action).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Layout;

    #[test]
    fn reset_restores_initial_state() {
        let l = Layout::room("agent_1", &[("tomato_1".into(), "tomato".into())], 0);
        let mut env = KitchenEnv::new(SimConfig::new(l)).unwrap();
        let init = env.observe();
        env.execute(&"PICK(agent_1:agent, tomato_1:tomato)".parse().unwrap()).unwrap();
        assert_ne!(env.observe(), init);
        env.reset();
        assert_eq!(env.observe(), init);
        let t = env.task("t", BTreeSet::new()).unwrap();
        assert_eq!(t.init, init);
        assert_eq!(t.objects.len(), 2);
    }
}
