//! Heuristic forward search with a clustered ordered-landmark heuristic.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::sync::Arc;
use std::time::Instant;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ground::{ground_all, Compiled};
use crate::hierarchy::TypeHierarchy;
use crate::imagine::{imagine, ImaginationResult};
use crate::logic::{Atom, Object, State};
use crate::schema::{apply, ActionSchema, GroundedAction};
use crate::task::{PlanningTask, Restrictions};

pub const DEFAULT_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub penalty_non_goal_object: f64,
    pub penalty_no_new_landmark: f64,
    /// Maximum node expansions per search call.
    pub budget: usize,
    pub excluded: BTreeSet<String>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            penalty_non_goal_object: 1.0,
            penalty_no_new_landmark: 1.0,
            budget: DEFAULT_BUDGET,
            excluded: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("goal atoms unreachable: {}", fmt_atoms(.0))]
    Unreachable(Vec<Atom>),
    #[error("node budget exhausted after {0} expansions")]
    BudgetExhausted(usize),
    #[error("search space exhausted without a (new) plan")]
    Unsolvable,
}

fn fmt_atoms(atoms: &[Atom]) -> String {
    atoms.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Landmark {
    pub atom: Atom,
    /// Indices of landmarks that must be reached first.
    pub predecessors: BTreeSet<usize>,
}

/// Backchains from the goal over the delete relaxation. An atom required by
/// every achiever of a landmark that can occur before it is itself a
/// landmark, ordered before it. Landmarks come back topologically sorted.
pub fn extract_landmarks(c: &Compiled) -> Result<Vec<Landmark>, PlanError> {
    let reach = c.relaxed_reachable(&c.init, |_| false);
    let missing: Vec<Atom> = c.goal.iter().filter(|g| !reach[**g as usize]).map(|g| c.table.atom(*g).clone()).collect();
    if !missing.is_empty() {
        return Err(PlanError::Unreachable(missing));
    }
    let init: BTreeSet<u32> = c.init.iter().copied().collect();
    let mut achievers: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, op) in c.ops.iter().enumerate() {
        for &a in &op.add {
            achievers.entry(a).or_default().push(i);
        }
    }

    let mut ids: Vec<u32> = vec![];
    let mut index: HashMap<u32, usize> = HashMap::new();
    let mut preds: Vec<BTreeSet<usize>> = vec![];
    let mut queue: Vec<usize> = vec![];
    let mut goal: Vec<u32> = c.goal.clone();
    goal.sort_unstable();
    goal.dedup();
    for g in goal {
        index.insert(g, ids.len());
        queue.push(ids.len());
        ids.push(g);
        preds.push(BTreeSet::new());
    }
    let mut next = 0;
    while next < queue.len() {
        let l = queue[next];
        next += 1;
        let atom = ids[l];
        if init.contains(&atom) {
            continue;
        }
        let adders = achievers.get(&atom).cloned().unwrap_or_default();
        let before = c.relaxed_reachable(&c.init, |i| c.ops[i].add.contains(&atom));
        let mut shared: Option<BTreeSet<u32>> = None;
        for &i in &adders {
            if c.ops[i].pre.iter().all(|p| before[*p as usize]) {
                let pre: BTreeSet<u32> = c.ops[i].pre.iter().copied().collect();
                shared = Some(match shared {
                    None => pre,
                    Some(s) => s.intersection(&pre).copied().collect(),
                });
            }
        }
        for p in shared.unwrap_or_default() {
            let pi = *index.entry(p).or_insert_with(|| {
                ids.push(p);
                preds.push(BTreeSet::new());
                queue.push(ids.len() - 1);
                ids.len() - 1
            });
            if pi != l && !depends_on(&preds, pi, l) {
                preds[l].insert(pi);
            }
        }
    }

    // Kahn's algorithm, lowest index first.
    let n = ids.len();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let ready =
            (0..n).find(|&i| !placed[i] && preds[i].iter().all(|p| placed[*p])).expect("landmark ordering is acyclic");
        placed[ready] = true;
        order.push(ready);
    }
    let rank: HashMap<usize, usize> = order.iter().enumerate().map(|(r, i)| (*i, r)).collect();
    Ok(order
        .iter()
        .map(|&i| Landmark {
            atom: c.table.atom(ids[i]).clone(),
            predecessors: preds[i].iter().map(|p| rank[p]).collect(),
        })
        .collect())
}

/// Whether `from` transitively requires `to`.
fn depends_on(preds: &[BTreeSet<usize>], from: usize, to: usize) -> bool {
    let mut stack = vec![from];
    let mut seen = BTreeSet::new();
    while let Some(x) = stack.pop() {
        if x == to {
            return true;
        }
        if seen.insert(x) {
            stack.extend(preds[x].iter().copied());
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LandmarkCluster {
    pub key: Option<Object>,
    /// Landmark indices in topological order.
    pub landmarks: Vec<usize>,
}

/// Objects that key the clusters: those of unary goal atoms, or every goal
/// object if the goal has no unary atom.
pub fn cluster_keys(t: &PlanningTask) -> BTreeSet<Object> {
    let unary: BTreeSet<Object> = t.goal.iter().filter(|a| a.arity() == 1).flat_map(|a| a.objects().cloned()).collect();
    if unary.is_empty() {
        t.goal_objects().into_iter().cloned().collect()
    } else {
        unary
    }
}

/// One sequence per key object. Landmarks mentioning no key object join
/// every sequence.
pub fn cluster_landmarks(lms: &[Landmark], t: &PlanningTask) -> Vec<LandmarkCluster> {
    let keys = cluster_keys(t);
    if keys.is_empty() {
        return vec![LandmarkCluster { key: None, landmarks: (0..lms.len()).collect() }];
    }
    keys.iter()
        .map(|k| LandmarkCluster {
            key: Some(k.clone()),
            landmarks: (0..lms.len())
                .filter(|&i| {
                    let mentioned: Vec<&Object> = lms[i].atom.objects().filter(|o| keys.contains(o)).collect();
                    mentioned.is_empty() || mentioned.contains(&k)
                })
                .collect(),
        })
        .collect()
}

type Bits = Vec<u64>;

fn has(b: &[u64], i: u32) -> bool {
    b[(i / 64) as usize] >> (i % 64) & 1 == 1
}

fn set(b: &mut [u64], i: u32, v: bool) {
    let w = &mut b[(i / 64) as usize];
    if v {
        *w |= 1 << (i % 64);
    } else {
        *w &= !(1 << (i % 64));
    }
}

/// Landmark bookkeeping for one search problem.
#[derive(Debug, Clone)]
pub struct LandmarkHeuristic {
    pub landmarks: Vec<Landmark>,
    pub clusters: Vec<LandmarkCluster>,
    atom_ids: Vec<u32>,
    weights: Vec<f64>,
}

impl LandmarkHeuristic {
    pub fn new(c: &Compiled, t: &PlanningTask, landmarks: Vec<Landmark>) -> Self {
        let clusters = cluster_landmarks(&landmarks, t);
        let mut weights = vec![0.0; landmarks.len()];
        for cl in &clusters {
            for &l in &cl.landmarks {
                weights[l] += 1.0;
            }
        }
        let atom_ids = landmarks.iter().map(|l| c.table.id(&l.atom).expect("interned")).collect();
        LandmarkHeuristic { landmarks, clusters, atom_ids, weights }
    }

    /// Marks landmarks that hold in `state` and whose predecessors are
    /// reached, in topological order so chains may complete in one step.
    /// Returns the number of newly reached landmarks.
    pub fn update(&self, reached: &mut [bool], state: &[u64]) -> usize {
        let mut new = 0;
        for (i, l) in self.landmarks.iter().enumerate() {
            if !reached[i] && has(state, self.atom_ids[i]) && l.predecessors.iter().all(|p| reached[*p]) {
                reached[i] = true;
                new += 1;
            }
        }
        new
    }

    /// Sum over clusters of their unreached landmarks.
    pub fn count(&self, reached: &[bool]) -> f64 {
        reached.iter().zip(&self.weights).filter(|(r, _)| !**r).map(|(_, w)| w).sum()
    }
}

#[derive(Debug, Clone)]
struct Node {
    state: Bits,
    reached: Vec<bool>,
    parent: Option<usize>,
    action: Option<usize>,
    g: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    f: f64,
    h: f64,
    seq: usize,
    node: usize,
}

impl Eq for Key {}

impl Ord for Key {
    // Reversed: BinaryHeap pops the smallest f, then h, then oldest.
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f).then_with(|| o.h.total_cmp(&self.h)).then_with(|| o.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub expansions: usize,
    pub generated: usize,
    pub time_ms: f64,
    /// Number of lifted schemas searched with, imagined ones included.
    pub schemas: usize,
    /// Number of grounded actions.
    pub grounded: usize,
    pub landmarks: usize,
    pub length: usize,
    /// 1-based index of this plan within its session.
    pub proposal: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub steps: Vec<GroundedAction>,
    pub stats: PlanStats,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn keys(&self) -> Vec<(String, Vec<String>)> {
        self.steps.iter().map(GroundedAction::key).collect()
    }

    pub fn record(&self) -> PlanRecord {
        PlanRecord {
            steps: self
                .steps
                .iter()
                .map(|g| PlanStep {
                    action: g.schema.name.clone(),
                    binding: g.binding.clone(),
                    description: g.description(),
                })
                .collect(),
            stats: self.stats.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub action: String,
    pub binding: Vec<Object>,
    pub description: Atom,
}

/// Serialized form of a plan: schema names with bindings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub steps: Vec<PlanStep>,
    #[serde(default)]
    pub stats: PlanStats,
}

impl PlanRecord {
    /// Rebinds the steps to schemas by name.
    pub fn resolve(&self, schemas: &[ActionSchema], h: &TypeHierarchy) -> crate::Result<Vec<GroundedAction>> {
        self.steps
            .iter()
            .map(|s| {
                let schema = schemas.iter().find(|a| a.name == s.action).ok_or_else(|| Error::InvalidSchema {
                    name: s.action.clone(),
                    reason: "no schema with this name".into(),
                })?;
                GroundedAction::new(Arc::new(schema.clone()), s.binding.clone(), h)
            })
            .collect()
    }
}

/// Symbolic replay: every step applicable in turn and the goal holds at the
/// end. Returns the final state.
pub fn validate_plan(t: &PlanningTask, steps: &[GroundedAction]) -> crate::Result<State> {
    let mut s = t.init.clone();
    for g in steps {
        s = apply(&s, g)?;
    }
    if !t.goal_reached(&s) {
        return Err(Error::NotApplicable(format!("plan for {} ends without reaching the goal", t.name)));
    }
    Ok(s)
}

/// A* over one grounded problem. Kept alive between calls so a session can
/// continue past plans it already returned.
struct Search {
    c: Compiled,
    heur: LandmarkHeuristic,
    goal_objects: BTreeSet<String>,
    goal: Vec<u32>,
    nodes: Vec<Node>,
    open: BinaryHeap<Key>,
    best_g: HashMap<Bits, usize>,
    seq: usize,
    schemas: usize,
}

impl Search {
    fn new(t: &PlanningTask, c: Compiled, schemas: usize) -> Result<Self, PlanError> {
        let landmarks = extract_landmarks(&c)?;
        let heur = LandmarkHeuristic::new(&c, t, landmarks);
        let words = c.table.len().div_ceil(64).max(1);
        let mut state = vec![0u64; words];
        for &a in &c.init {
            set(&mut state, a, true);
        }
        let mut reached = vec![false; heur.landmarks.len()];
        heur.update(&mut reached, &state);
        let h0 = heur.count(&reached);
        let goal = c.goal.clone();
        let mut s = Search {
            goal_objects: t.goal_objects().into_iter().map(|o| o.name.clone()).collect(),
            c,
            heur,
            goal,
            nodes: vec![],
            open: BinaryHeap::new(),
            best_g: HashMap::new(),
            seq: 0,
            schemas,
        };
        s.best_g.insert(state.clone(), 0);
        s.push(Node { state, reached, parent: None, action: None, g: 0 }, h0);
        Ok(s)
    }

    fn push(&mut self, n: Node, h: f64) {
        let key = Key { f: n.g as f64 + h, h, seq: self.seq, node: self.nodes.len() };
        self.seq += 1;
        self.nodes.push(n);
        self.open.push(key);
    }

    fn is_goal(&self, state: &[u64]) -> bool {
        self.goal.iter().all(|g| has(state, *g))
    }

    fn extract(&self, mut i: usize) -> Vec<GroundedAction> {
        let mut steps = vec![];
        while let Some(a) = self.nodes[i].action {
            steps.push(self.c.actions[a].clone());
            i = self.nodes[i].parent.expect("non-root node has a parent");
        }
        steps.reverse();
        steps
    }

    /// Pops nodes until a goal node whose plan `accept` takes.
    fn run(
        &mut self,
        cfg: &PlannerConfig,
        accept: impl Fn(&[GroundedAction]) -> bool,
    ) -> Result<(Vec<GroundedAction>, usize, usize), PlanError> {
        let mut expansions = 0;
        let mut generated = 0;
        while let Some(key) = self.open.pop() {
            let i = key.node;
            if self.is_goal(&self.nodes[i].state) {
                let steps = self.extract(i);
                if accept(&steps) {
                    return Ok((steps, expansions, generated));
                }
                continue;
            }
            if self.best_g.get(&self.nodes[i].state).is_some_and(|g| *g < self.nodes[i].g) {
                continue;
            }
            if expansions >= cfg.budget {
                self.open.push(key);
                return Err(PlanError::BudgetExhausted(expansions));
            }
            expansions += 1;
            let g = self.nodes[i].g + 1;
            let mut children = vec![];
            for (a, op) in self.c.ops.iter().enumerate() {
                if !op.pre.iter().all(|p| has(&self.nodes[i].state, *p)) {
                    continue;
                }
                let mut state = self.nodes[i].state.clone();
                for &d in &op.del {
                    set(&mut state, d, false);
                }
                for &x in &op.add {
                    set(&mut state, x, true);
                }
                if state == self.nodes[i].state {
                    continue;
                }
                let goal = self.is_goal(&state);
                if !goal {
                    match self.best_g.get(&state) {
                        Some(&old) if old <= g => continue,
                        _ => {
                            self.best_g.insert(state.clone(), g);
                        }
                    }
                }
                let mut reached = self.nodes[i].reached.clone();
                let new = self.heur.update(&mut reached, &state);
                let mut h = self.heur.count(&reached);
                let action = &self.c.actions[a];
                if !action.binding.iter().any(|o| self.goal_objects.contains(&o.name)) {
                    h += cfg.penalty_non_goal_object;
                }
                if new == 0 {
                    h += cfg.penalty_no_new_landmark;
                }
                children.push((Node { state, reached, parent: Some(i), action: Some(a), g }, h));
            }
            generated += children.len();
            for (n, h) in children {
                self.push(n, h);
            }
        }
        Err(PlanError::Unsolvable)
    }
}

/// One-shot planning without imagination or continuation.
pub fn plan(
    t: &PlanningTask,
    schemas: &[ActionSchema],
    h: &TypeHierarchy,
    cfg: &PlannerConfig,
) -> Result<Plan, PlanError> {
    let mut s = PlanningSession::new(t.clone(), schemas.to_vec(), h.clone(), cfg.clone(), false);
    s.next_plan([])
}

/// Repeated planning for one task: each call returns a plan not returned
/// before, re-grounding (and re-imagining) whenever the restrictions grow.
pub struct PlanningSession {
    task: PlanningTask,
    schemas: Vec<Arc<ActionSchema>>,
    h: TypeHierarchy,
    cfg: PlannerConfig,
    imagine: bool,
    restrictions: Restrictions,
    search: Option<Search>,
    returned: BTreeSet<Vec<(String, Vec<String>)>>,
    imagination: Option<ImaginationResult>,
}

impl PlanningSession {
    pub fn new(
        task: PlanningTask,
        schemas: Vec<ActionSchema>,
        h: TypeHierarchy,
        cfg: PlannerConfig,
        imagine: bool,
    ) -> Self {
        let restrictions = Restrictions { excluded: cfg.excluded.clone(), ..Restrictions::default() };
        PlanningSession {
            task,
            schemas: schemas.into_iter().map(Arc::new).collect(),
            h,
            cfg,
            imagine,
            restrictions,
            search: None,
            returned: BTreeSet::new(),
            imagination: None,
        }
    }

    pub fn task(&self) -> &PlanningTask {
        &self.task
    }

    pub fn hierarchy(&self) -> &TypeHierarchy {
        &self.h
    }

    pub fn restrictions(&self) -> &Restrictions {
        &self.restrictions
    }

    /// Result of the most recent imagination run, if imagination is on.
    pub fn imagination(&self) -> Option<&ImaginationResult> {
        self.imagination.as_ref()
    }

    pub fn proposals(&self) -> usize {
        self.returned.len()
    }

    /// Blocks this exact grounding in every later search.
    pub fn record_failure(&mut self, g: &GroundedAction) {
        if self.restrictions.failures.record(g) {
            self.search = None;
        }
    }

    /// The schema set used for grounding: learned schemas plus, with
    /// imagination on, the proposals for the current restrictions.
    pub fn actions(&mut self) -> Vec<Arc<ActionSchema>> {
        if !self.imagine {
            self.imagination = None;
            return self.schemas.clone();
        }
        let learned: Vec<ActionSchema> = self.schemas.iter().map(|s| (**s).clone()).collect();
        let res = imagine(&learned, &self.h, &self.task, &self.restrictions);
        let mut actions = self.schemas.clone();
        actions.extend(res.added.iter().map(|a| Arc::new(a.schema.clone())));
        if !res.added.is_empty() {
            debug!("{}: imagined {} schemas", self.task.name, res.added.len());
        }
        self.imagination = Some(res);
        actions
    }

    /// Next plan after excluding `exclusions`. The first call plans from
    /// scratch.
    pub fn next_plan(&mut self, exclusions: impl IntoIterator<Item = String>) -> Result<Plan, PlanError> {
        let start = Instant::now();
        for e in exclusions {
            if self.restrictions.excluded.insert(e) {
                self.search = None;
            }
        }
        if self.search.is_none() {
            let actions = self.actions();
            let grounded = ground_all(&actions, &self.task, &self.h, &self.restrictions);
            let c = Compiled::new(&self.task, grounded);
            self.search = Some(Search::new(&self.task, c, actions.len())?);
        }
        let search = self.search.as_mut().expect("search initialized");
        let returned = &self.returned;
        let (steps, expansions, generated) =
            search.run(&self.cfg, |p| !returned.contains(&p.iter().map(GroundedAction::key).collect::<Vec<_>>()))?;
        let stats = PlanStats {
            expansions,
            generated,
            time_ms: start.elapsed().as_secs_f64() * 1e3,
            schemas: search.schemas,
            grounded: search.c.actions.len(),
            landmarks: search.heur.landmarks.len(),
            length: steps.len(),
            proposal: self.returned.len() + 1,
        };
        self.returned.insert(steps.iter().map(GroundedAction::key).collect());
        Ok(Plan { steps, stats })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Effect, Variable};
    use crate::schema::Provenance;

    fn h() -> TypeHierarchy {
        TypeHierarchy::from_edges(
            "entity",
            &[
                ("agent", "entity"),
                ("tool", "entity"),
                ("food", "entity"),
                ("plate", "entity"),
                ("cutboard", "tool"),
                ("machete", "tool"),
                ("tomato", "food"),
                ("onion", "food"),
            ],
        )
        .unwrap()
    }

    fn atoms(v: &[&str]) -> BTreeSet<Atom> {
        v.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn schema(name: &str, desc: &str, types: &[&str], pre: &[&str], add: &[&str], del: &[&str]) -> ActionSchema {
        ActionSchema {
            name: name.into(),
            description: desc.parse().unwrap(),
            params: types.iter().enumerate().map(|(i, t)| Variable::new(i, *t)).collect(),
            pre: atoms(pre),
            effect: Effect::new(atoms(add), atoms(del)),
            provenance: Provenance::Generalized,
            clusters: vec![],
        }
    }

    /// Pick from the counter, place onto a tool, chop, pick from the tool,
    /// serve onto a plate.
    fn kitchen() -> Vec<ActionSchema> {
        vec![
            schema(
                "PICK_0",
                "PICK(?x0:agent, ?x1:food)",
                &["agent", "food"],
                &["hand_state_Empty(?x0:agent)", "on_counter(?x1:food)"],
                &["holding(?x0:agent, ?x1:food)", "hand_state_Full(?x0:agent)"],
                &["hand_state_Empty(?x0:agent)", "on_counter(?x1:food)"],
            ),
            schema(
                "PLACE_1",
                "PLACE(?x0:agent, ?x1:food, ?x2:tool)",
                &["agent", "food", "tool"],
                &["holding(?x0:agent, ?x1:food)", "fill_state_Empty(?x2:tool)"],
                &["content_holds(?x2:tool, ?x1:food)", "hand_state_Empty(?x0:agent)", "fill_state_Filled(?x2:tool)"],
                &["holding(?x0:agent, ?x1:food)", "hand_state_Full(?x0:agent)", "fill_state_Empty(?x2:tool)"],
            ),
            schema(
                "USE_2",
                "USE(?x0:agent, ?x1:tool)",
                &["agent", "tool", "food"],
                &["content_holds(?x1:tool, ?x2:food)", "chop_state_Fresh(?x2:food)", "hand_state_Empty(?x0:agent)"],
                &["chop_state_Chopped(?x2:food)"],
                &["chop_state_Fresh(?x2:food)"],
            ),
            schema(
                "PICK_3",
                "PICK(?x0:agent, ?x1:food)",
                &["agent", "food", "tool"],
                &["hand_state_Empty(?x0:agent)", "content_holds(?x2:tool, ?x1:food)"],
                &["holding(?x0:agent, ?x1:food)", "hand_state_Full(?x0:agent)", "fill_state_Empty(?x2:tool)"],
                &["hand_state_Empty(?x0:agent)", "content_holds(?x2:tool, ?x1:food)", "fill_state_Filled(?x2:tool)"],
            ),
            schema(
                "PLACE_4",
                "PLACE(?x0:agent, ?x1:food, ?x2:plate)",
                &["agent", "food", "plate"],
                &["holding(?x0:agent, ?x1:food)"],
                &["served_holds(?x2:plate, ?x1:food)", "hand_state_Empty(?x0:agent)"],
                &["holding(?x0:agent, ?x1:food)", "hand_state_Full(?x0:agent)"],
            ),
        ]
    }

    fn task(foods: &[(&str, &str)], tools: &[(&str, &str)]) -> PlanningTask {
        let mut objects = vec![Object::new("agent_1", "agent"), Object::new("plate_1", "plate")];
        let mut init = vec!["hand_state_Empty(agent_1:agent)".to_string()];
        let mut goal = vec![];
        for (n, t) in foods {
            objects.push(Object::new(*n, *t));
            init.push(format!("on_counter({n}:{t})"));
            init.push(format!("chop_state_Fresh({n}:{t})"));
            goal.push(format!("chop_state_Chopped({n}:{t})"));
            goal.push(format!("served_holds(plate_1:plate, {n}:{t})"));
        }
        for (n, t) in tools {
            objects.push(Object::new(*n, *t));
            init.push(format!("fill_state_Empty({n}:{t})"));
        }
        PlanningTask {
            name: "serve".into(),
            objects,
            init: State::new(init.iter().map(|s| s.parse().unwrap())).unwrap(),
            goal: goal.iter().map(|s| s.parse().unwrap()).collect(),
        }
    }

    fn compiled(t: &PlanningTask) -> Compiled {
        let arcs: Vec<_> = kitchen().into_iter().map(Arc::new).collect();
        Compiled::new(t, ground_all(&arcs, t, &h(), &Restrictions::default()))
    }

    #[test]
    fn landmark_chain_for_serving_chopped_food() {
        let t = task(&[("tomato_1", "tomato")], &[("cutboard_1", "cutboard")]);
        let lms = extract_landmarks(&compiled(&t)).unwrap();
        let pos = |s: &str| lms.iter().position(|l| l.atom.to_string() == s).unwrap_or_else(|| panic!("{s}"));
        let holding = pos("holding(agent_1:agent, tomato_1:tomato)");
        let content = pos("content_holds(cutboard_1:cutboard, tomato_1:tomato)");
        let chopped = pos("chop_state_Chopped(tomato_1:tomato)");
        assert!(holding < content && content < chopped);
        assert!(lms[content].predecessors.contains(&holding));
        assert!(lms[chopped].predecessors.contains(&content));
        for (i, l) in lms.iter().enumerate() {
            assert!(l.predecessors.iter().all(|p| *p < i));
        }
    }

    #[test]
    fn goal_in_init_is_a_single_landmark() {
        let mut t = task(&[], &[]);
        t.goal = atoms(&["hand_state_Empty(agent_1:agent)"]);
        let lms = extract_landmarks(&compiled(&t)).unwrap();
        assert_eq!(lms.len(), 1);
        let p = plan(&t, &kitchen(), &h(), &PlannerConfig::default()).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn clusters_share_plate_and_agent_landmarks() {
        let t = task(&[("tomato_1", "tomato"), ("onion_1", "onion")], &[("cutboard_1", "cutboard")]);
        let lms = extract_landmarks(&compiled(&t)).unwrap();
        let cl = cluster_landmarks(&lms, &t);
        assert_eq!(cl.len(), 2);
        let names =
            |c: &LandmarkCluster| -> Vec<String> { c.landmarks.iter().map(|i| lms[*i].atom.to_string()).collect() };
        assert!(names(&cl[0]).iter().all(|a| !a.contains("tomato_1")));
        assert!(names(&cl[1]).iter().all(|a| !a.contains("onion_1")));
        for i in 0..lms.len() {
            assert!(cl.iter().any(|c| c.landmarks.contains(&i)));
        }
    }

    #[test]
    fn plans_are_valid_and_deterministic() {
        let t = task(&[("tomato_1", "tomato"), ("onion_1", "onion")], &[("cutboard_1", "cutboard")]);
        let p = plan(&t, &kitchen(), &h(), &PlannerConfig::default()).unwrap();
        validate_plan(&t, &p.steps).unwrap();
        assert_eq!(p.len(), 10);
        let q = plan(&t, &kitchen(), &h(), &PlannerConfig::default()).unwrap();
        assert_eq!(p.keys(), q.keys());
    }

    #[test]
    fn unreachable_and_budget_errors_differ() {
        let t = task(&[("tomato_1", "tomato")], &[]);
        assert!(matches!(plan(&t, &kitchen(), &h(), &PlannerConfig::default()), Err(PlanError::Unreachable(_))));
        let t = task(&[("tomato_1", "tomato")], &[("cutboard_1", "cutboard")]);
        let cfg = PlannerConfig { budget: 1, ..PlannerConfig::default() };
        assert!(matches!(plan(&t, &kitchen(), &h(), &cfg), Err(PlanError::BudgetExhausted(1))));
    }

    #[test]
    fn continuation_respects_exclusions_and_distinctness() {
        let t = task(&[("tomato_1", "tomato")], &[("cutboard_1", "cutboard"), ("machete_1", "machete")]);
        let mut s = PlanningSession::new(t.clone(), kitchen(), h(), PlannerConfig::default(), false);
        let first = s.next_plan([]).unwrap();
        let tool = first.steps.iter().find(|g| g.schema.name == "USE_2").unwrap().binding[1].name.clone();
        let second = s.next_plan([tool.clone()]).unwrap();
        validate_plan(&t, &second.steps).unwrap();
        assert_eq!(second.stats.proposal, 2);
        assert!(second.steps.iter().all(|g| !g.binds(&tool)));
        // Only one way remains, and it was already returned.
        assert_eq!(s.next_plan([]), Err(PlanError::Unsolvable));
        let other = if tool == "cutboard_1" { "machete_1" } else { "cutboard_1" };
        assert!(matches!(s.next_plan([other.to_string()]), Err(PlanError::Unreachable(_))));
    }

    #[test]
    fn continuation_without_exclusions_never_repeats() {
        let t = task(
            &[("tomato_1", "tomato"), ("onion_1", "onion")],
            &[("cutboard_1", "cutboard"), ("machete_1", "machete")],
        );
        let mut s = PlanningSession::new(t.clone(), kitchen(), h(), PlannerConfig::default(), false);
        let mut seen = BTreeSet::new();
        let end = loop {
            match s.next_plan([]) {
                Ok(p) => {
                    validate_plan(&t, &p.steps).unwrap();
                    assert!(seen.insert(p.keys()));
                }
                Err(e) => break e,
            }
        };
        assert_eq!(end, PlanError::Unsolvable);
        assert!(seen.len() >= 2);
    }

    #[test]
    fn plan_record_round_trip() {
        let t = task(&[("tomato_1", "tomato")], &[("cutboard_1", "cutboard")]);
        let p = plan(&t, &kitchen(), &h(), &PlannerConfig::default()).unwrap();
        let json = serde_json::to_string(&p.record()).unwrap();
        let back: PlanRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.resolve(&kitchen(), &h()).unwrap(), p.steps);
    }
}
