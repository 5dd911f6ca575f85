//! Low-level kitchen state, primitive dynamics, navigation, and the parser
//! from low-level state to symbolic state.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};
use typegen::{diff, Atom, Effect, Object, State, Term, TypeHierarchy};

use crate::domain::{self, AttributeSchema, ToolRule, AGENT, CONTENT, FOOD, HOLDING, PLATE, SERVED};
use crate::layout::{Direction, Layout, SimConfig};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("no path to {0}")]
    Unreachable(String),
    #[error("cannot carry out {0}")]
    BadAction(String),
    #[error("attribute {attribute} of {entity} has value {value} outside its domain")]
    InvalidValue { entity: String, attribute: String, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Primitive {
    #[serde(rename = "MOVE_N")]
    MoveN,
    #[serde(rename = "MOVE_E")]
    MoveE,
    #[serde(rename = "MOVE_S")]
    MoveS,
    #[serde(rename = "MOVE_W")]
    MoveW,
    #[serde(rename = "PICK")]
    Pick,
    #[serde(rename = "PLACE")]
    Place,
    #[serde(rename = "USE")]
    Use,
}

impl Primitive {
    pub fn toward(d: Direction) -> Primitive {
        match d {
            Direction::N => Primitive::MoveN,
            Direction::E => Primitive::MoveE,
            Direction::S => Primitive::MoveS,
            Direction::W => Primitive::MoveW,
        }
    }

    pub fn direction(self) -> Option<Direction> {
        match self {
            Primitive::MoveN => Some(Direction::N),
            Primitive::MoveE => Some(Direction::E),
            Primitive::MoveS => Some(Direction::S),
            Primitive::MoveW => Some(Direction::W),
            _ => None,
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Primitive::MoveN => "MOVE_N",
            Primitive::MoveE => "MOVE_E",
            Primitive::MoveS => "MOVE_S",
            Primitive::MoveW => "MOVE_W",
            Primitive::Pick => "PICK",
            Primitive::Place => "PLACE",
            Primitive::Use => "USE",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Wall,
    Counter,
    Floor,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entity {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    /// Counter cell, or `None` while held or inside a container.
    pub pos: Option<[usize; 2]>,
    pub attrs: BTreeMap<String, String>,
    /// Contained entities, most recently placed last.
    pub contents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Agent {
    pub name: String,
    pub pos: [usize; 2],
    pub facing: Direction,
    pub held: Option<String>,
    pub attrs: BTreeMap<String, String>,
}

/// The low-level state: grid, entities and the agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Kitchen {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Cell>,
    pub entities: BTreeMap<String, Entity>,
    pub agent: Agent,
}

impl Kitchen {
    pub fn cell(&self, [x, y]: [usize; 2]) -> Cell {
        self.cells[y * self.width + x]
    }

    fn neighbor(&self, [x, y]: [usize; 2], d: Direction) -> Option<[usize; 2]> {
        let (dx, dy) = d.offset();
        let nx = x.checked_add_signed(dx)?;
        let ny = y.checked_add_signed(dy)?;
        (nx < self.width && ny < self.height).then_some([nx, ny])
    }

    pub fn front(&self) -> Option<[usize; 2]> {
        self.neighbor(self.agent.pos, self.agent.facing)
    }

    /// The entity standing directly on `cell`.
    pub fn entity_at(&self, cell: [usize; 2]) -> Option<&Entity> {
        self.entities.values().find(|e| e.pos == Some(cell))
    }

    pub fn container_of(&self, name: &str) -> Option<&Entity> {
        self.entities.values().find(|e| e.contents.iter().any(|c| c == name))
    }

    /// Counter cell an entity can be reached at: its own, or its
    /// container's.
    pub fn location(&self, name: &str) -> Option<[usize; 2]> {
        let e = self.entities.get(name)?;
        e.pos.or_else(|| self.container_of(name).and_then(|c| c.pos))
    }
}

/// Kitchen state plus the rules that drive it.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub config: SimConfig,
    pub hierarchy: TypeHierarchy,
    pub attributes: AttributeSchema,
    pub rules: Vec<ToolRule>,
    pub state: Kitchen,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        Self::with_domain(config, domain::hierarchy(), AttributeSchema::default(), domain::tool_rules())
    }

    pub fn with_domain(
        config: SimConfig,
        hierarchy: TypeHierarchy,
        attributes: AttributeSchema,
        rules: Vec<ToolRule>,
    ) -> Result<Self, SimError> {
        let mut sim = Simulator {
            state: Kitchen {
                width: 0,
                height: 0,
                cells: vec![],
                entities: BTreeMap::new(),
                agent: Agent {
                    name: String::new(),
                    pos: [0, 0],
                    facing: Direction::N,
                    held: None,
                    attrs: BTreeMap::new(),
                },
            },
            config,
            hierarchy,
            attributes,
            rules,
        };
        sim.state = sim.initial_state()?;
        Ok(sim)
    }

    /// Builds the layout's initial state, validating it.
    pub fn initial_state(&self) -> Result<Kitchen, SimError> {
        let layout: &Layout = &self.config.layout;
        let height = layout.grid.len();
        let width = layout.grid.first().map_or(0, |r| r.chars().count());
        let mut cells = Vec::with_capacity(width * height);
        for row in &layout.grid {
            if row.chars().count() != width {
                return Err(SimError::Layout("grid rows differ in length".into()));
            }
            for c in row.chars() {
                cells.push(match c {
                    '#' => Cell::Wall,
                    '=' => Cell::Counter,
                    '.' => Cell::Floor,
                    other => return Err(SimError::Layout(format!("unknown grid character {other:?}"))),
                });
            }
        }
        let mut k = Kitchen {
            width,
            height,
            cells,
            entities: BTreeMap::new(),
            agent: Agent {
                name: layout.agent.name.clone(),
                pos: layout.agent.pos,
                facing: layout.agent.facing,
                held: None,
                attrs: BTreeMap::new(),
            },
        };
        let inside = |[x, y]: [usize; 2]| x < width && y < height;
        if !inside(k.agent.pos) || k.cell(k.agent.pos) != Cell::Floor {
            return Err(SimError::Layout("agent must start on floor".into()));
        }
        k.agent.attrs = self.default_attrs(AGENT);
        for spec in &layout.entities {
            if !self.hierarchy.contains(&spec.ty) || self.hierarchy.is_subtype(&spec.ty, AGENT).unwrap_or(false) {
                return Err(SimError::Layout(format!("{} has unusable type {}", spec.name, spec.ty)));
            }
            if !inside(spec.pos) || k.cell(spec.pos) != Cell::Counter {
                return Err(SimError::Layout(format!("{} is not on a counter", spec.name)));
            }
            if k.entity_at(spec.pos).is_some() {
                return Err(SimError::Layout(format!("{} shares a counter", spec.name)));
            }
            if spec.name == k.agent.name || k.entities.contains_key(&spec.name) {
                return Err(SimError::Layout(format!("duplicate entity name {}", spec.name)));
            }
            let mut attrs = self.default_attrs(&spec.ty);
            for (a, v) in &spec.attrs {
                attrs.insert(a.clone(), v.clone());
            }
            k.entities.insert(
                spec.name.clone(),
                Entity { name: spec.name.clone(), ty: spec.ty.clone(), pos: Some(spec.pos), attrs, contents: vec![] },
            );
        }
        self.sync(&mut k);
        Ok(k)
    }

    fn default_attrs(&self, ty: &str) -> BTreeMap<String, String> {
        self.attributes
            .attributes_of(ty, &self.hierarchy)
            .into_iter()
            .map(|(a, d)| (a.to_string(), d[0].clone()))
            .collect()
    }

    fn is(&self, ty: &str, ancestor: &str) -> bool {
        self.hierarchy.is_subtype(ty, ancestor).unwrap_or(false)
    }

    fn rule(&self, ty: &str) -> Option<&ToolRule> {
        self.rules.iter().find(|r| self.is(ty, &r.tool))
    }

    fn is_container(&self, ty: &str) -> bool {
        self.is(ty, PLATE) || self.rule(ty).is_some()
    }

    fn capacity(&self, ty: &str) -> usize {
        self.rule(ty).map_or(usize::MAX, |r| r.capacity)
    }

    /// Recomputes the attributes that mirror occupancy.
    fn sync(&self, k: &mut Kitchen) {
        let hand = if k.agent.held.is_some() { "Full" } else { "Empty" };
        if k.agent.attrs.contains_key("hand_state") {
            k.agent.attrs.insert("hand_state".into(), hand.into());
        }
        let served: BTreeSet<String> =
            k.entities.values().filter(|e| self.is(&e.ty, PLATE)).flat_map(|e| e.contents.iter().cloned()).collect();
        for e in k.entities.values_mut() {
            if e.attrs.contains_key("serve_state") {
                let v = if served.contains(&e.name) { "Served" } else { "Unserved" };
                e.attrs.insert("serve_state".into(), v.into());
            }
            if e.attrs.contains_key("fill_state") {
                let fill = if e.contents.is_empty() { "Empty" } else { "Filled" };
                e.attrs.insert("fill_state".into(), fill.into());
            }
        }
    }

    pub fn reset(&mut self) {
        self.state = self.initial_state().expect("layout validated at construction");
    }

    /// Symbolic state of `k`: one atom per attribute value, one per held
    /// relation.
    pub fn parse(&self, k: &Kitchen) -> Result<State, SimError> {
        let mut atoms = vec![];
        let agent = Object::new(k.agent.name.clone(), AGENT);
        let object = |e: &Entity| Object::new(e.name.clone(), e.ty.clone());
        let mut attribute = |o: &Object, attrs: &BTreeMap<String, String>| -> Result<(), SimError> {
            let domains = self.attributes.attributes_of(&o.ty, &self.hierarchy);
            for (a, v) in attrs {
                if !domains.get(a.as_str()).is_some_and(|d| d.contains(v)) {
                    return Err(SimError::InvalidValue {
                        entity: o.name.clone(),
                        attribute: a.clone(),
                        value: v.clone(),
                    });
                }
                atoms.push(Atom::new(format!("{a}_{v}"), vec![Term::Object(o.clone())]));
            }
            Ok(())
        };
        attribute(&agent, &k.agent.attrs)?;
        for e in k.entities.values() {
            attribute(&object(e), &e.attrs)?;
        }
        if let Some(held) = &k.agent.held {
            let e = k.entities.get(held).ok_or_else(|| SimError::UnknownEntity(held.clone()))?;
            atoms.push(Atom::grounded(HOLDING, &[&agent, &object(e)]));
        }
        for e in k.entities.values() {
            let rel = if self.is(&e.ty, PLATE) { SERVED } else { CONTENT };
            for c in &e.contents {
                let inner = k.entities.get(c).ok_or_else(|| SimError::UnknownEntity(c.clone()))?;
                atoms.push(Atom::grounded(rel, &[&object(e), &object(inner)]));
            }
        }
        Ok(State::new(atoms).expect("parsed atoms are grounded"))
    }

    pub fn observe(&self) -> State {
        self.parse(&self.state).expect("simulator keeps attributes in their domains")
    }

    /// Applies one primitive. Interactions act on the cell the agent faces;
    /// PICK takes `target` when it is there, otherwise the most recently
    /// placed content, otherwise the entity itself.
    pub fn step(&self, k: &Kitchen, prim: Primitive, target: Option<&str>) -> Kitchen {
        let mut next = k.clone();
        if let Some(d) = prim.direction() {
            if let Some(cell) = k.neighbor(k.agent.pos, d) {
                match k.cell(cell) {
                    Cell::Wall => {}
                    Cell::Counter => next.agent.facing = d,
                    Cell::Floor => {
                        next.agent.facing = d;
                        next.agent.pos = cell;
                    }
                }
            }
            return next;
        }
        let Some(front) = k.front() else { return next };
        let front_entity = k.entity_at(front).cloned();
        match prim {
            Primitive::Pick => {
                if k.agent.held.is_some() {
                    return next;
                }
                let Some(e) = front_entity else { return next };
                let picked = match target {
                    Some(t) if e.contents.iter().any(|c| c == t) => Some(t.to_string()),
                    Some(t) if t == e.name && e.contents.is_empty() => Some(t.to_string()),
                    Some(_) => None,
                    None => e.contents.last().cloned().or_else(|| Some(e.name.clone())),
                };
                let Some(p) = picked else { return next };
                if p == e.name {
                    next.entities.get_mut(&p).unwrap().pos = None;
                } else {
                    next.entities.get_mut(&e.name).unwrap().contents.retain(|c| *c != p);
                }
                next.agent.held = Some(p);
            }
            Primitive::Place => {
                let Some(held) = k.agent.held.clone() else { return next };
                let held_ty = k.entities[&held].ty.clone();
                match front_entity {
                    None if k.cell(front) == Cell::Counter => {
                        next.entities.get_mut(&held).unwrap().pos = Some(front);
                    }
                    Some(e) if self.is_container(&e.ty) && self.is(&held_ty, FOOD) => {
                        if e.contents.len() >= self.capacity(&e.ty) {
                            return next;
                        }
                        next.entities.get_mut(&e.name).unwrap().contents.push(held);
                    }
                    _ => return next,
                }
                next.agent.held = None;
            }
            Primitive::Use => {
                let Some(e) = front_entity else { return next };
                let Some(rule) = self.rule(&e.ty) else { return next };
                if k.agent.held.is_some() || self.config.broken.contains(&e.name) {
                    return next;
                }
                for c in &e.contents {
                    let food = next.entities.get_mut(c).unwrap();
                    let excepted = self
                        .config
                        .exceptions
                        .iter()
                        .any(|(tool, target)| self.is(&e.ty, tool) && self.is(&food.ty, target));
                    if !excepted && food.attrs.get(&rule.attribute) == Some(&rule.from) {
                        food.attrs.insert(rule.attribute.clone(), rule.to.clone());
                    }
                }
            }
            _ => unreachable!("moves handled above"),
        }
        self.sync(&mut next);
        next
    }

    /// Shortest sequence of moves that ends next to `cell` facing it.
    /// Breadth-first with neighbors tried in N, E, S, W order.
    pub fn navigate(&self, k: &Kitchen, cell: [usize; 2]) -> Option<Vec<Primitive>> {
        let idx = |[x, y]: [usize; 2]| y * k.width + x;
        let mut prev: Vec<Option<([usize; 2], Direction)>> = vec![None; k.cells.len()];
        let mut seen = vec![false; k.cells.len()];
        let mut queue = VecDeque::from([k.agent.pos]);
        seen[idx(k.agent.pos)] = true;
        while let Some(p) = queue.pop_front() {
            let facing = Direction::ALL.into_iter().find(|d| k.neighbor(p, *d) == Some(cell));
            if let Some(d) = facing {
                let mut path = vec![];
                let mut cur = p;
                while let Some((from, step)) = prev[idx(cur)] {
                    path.push(Primitive::toward(step));
                    cur = from;
                }
                path.reverse();
                let final_facing = path.last().and_then(|m| m.direction()).unwrap_or(k.agent.facing);
                if final_facing != d {
                    path.push(Primitive::toward(d));
                }
                return Some(path);
            }
            for d in Direction::ALL {
                if let Some(n) = k.neighbor(p, d) {
                    if !seen[idx(n)] && k.cell(n) == Cell::Floor {
                        seen[idx(n)] = true;
                        prev[idx(n)] = Some((p, d));
                        queue.push_back(n);
                    }
                }
            }
        }
        None
    }

    fn first_free_counter(&self, k: &Kitchen) -> Option<[usize; 2]> {
        (0..k.height)
            .flat_map(|y| (0..k.width).map(move |x| [x, y]))
            .filter(|c| k.cell(*c) == Cell::Counter && k.entity_at(*c).is_none())
            .filter_map(|c| self.navigate(k, c).map(|p| (p.len(), c)))
            .min_by_key(|(len, c)| (*len, c[1], c[0]))
            .map(|(_, c)| c)
    }

    /// Primitive sequence carrying out an action description such as
    /// `PLACE(agent_1, tomato_1, cutboard_1)` from state `k`.
    pub fn plan_primitives(&self, k: &Kitchen, action: &Atom) -> Result<(Vec<Primitive>, Option<String>), SimError> {
        let names: Vec<&str> = action.objects().map(|o| o.name.as_str()).collect();
        if names.first() != Some(&k.agent.name.as_str()) {
            return Err(SimError::BadAction(format!("{action}: first argument must be the agent")));
        }
        let locate = |n: &str| -> Result<[usize; 2], SimError> {
            if !k.entities.contains_key(n) {
                return Err(SimError::UnknownEntity(n.to_string()));
            }
            k.location(n).ok_or_else(|| SimError::BadAction(format!("{n} is not on a counter")))
        };
        let (cell, prim, target) = match (action.predicate.as_str(), names.as_slice()) {
            ("PICK", [_, obj]) => (locate(obj)?, Primitive::Pick, Some(obj.to_string())),
            ("PLACE", [_, _, dest]) => (locate(dest)?, Primitive::Place, None),
            ("PLACE", [_, _]) => (
                self.first_free_counter(k).ok_or_else(|| SimError::Unreachable("a free counter".into()))?,
                Primitive::Place,
                None,
            ),
            ("USE", [_, tool]) => (locate(tool)?, Primitive::Use, None),
            _ => return Err(SimError::BadAction(action.to_string())),
        };
        let mut prims =
            self.navigate(k, cell).ok_or_else(|| SimError::Unreachable(names[names.len() - 1].to_string()))?;
        prims.push(prim);
        Ok((prims, target))
    }

    /// Navigates and interacts to carry out `action`, returning the
    /// observed symbolic effect.
    pub fn execute_symbolic(&mut self, action: &Atom) -> Result<Effect, SimError> {
        let before = self.observe();
        let (prims, target) = self.plan_primitives(&self.state, action)?;
        for p in prims {
            self.state = self.step(&self.state, p, target.as_deref());
        }
        Ok(diff(&before, &self.observe()))
    }

    /// ASCII picture of the grid: `@` is the agent, lower-case letters are
    /// entities on counters, explained in the legend below the grid.
    pub fn dump(&self, k: &Kitchen) -> String {
        let mut rows: Vec<Vec<char>> = (0..k.height)
            .map(|y| {
                (0..k.width)
                    .map(|x| match k.cell([x, y]) {
                        Cell::Wall => '#',
                        Cell::Counter => '=',
                        Cell::Floor => '.',
                    })
                    .collect()
            })
            .collect();
        let mut legend = String::new();
        let placed = k.entities.values().filter(|e| e.pos.is_some());
        for (e, c) in placed.zip(('a'..='z').cycle()) {
            let [x, y] = e.pos.unwrap();
            rows[y][x] = c;
            write!(legend, "{c}: {} ({})", e.name, e.ty).unwrap();
            if !e.contents.is_empty() {
                write!(legend, " holding {}", e.contents.join(", ")).unwrap();
            }
            legend.push('\n');
        }
        let [ax, ay] = k.agent.pos;
        rows[ay][ax] = '@';
        let mut out: String = rows.into_iter().map(|r| r.into_iter().collect::<String>() + "\n").collect();
        write!(out, "@: {} facing {:?}", k.agent.name, k.agent.facing).unwrap();
        if let Some(h) = &k.agent.held {
            write!(out, " carrying {h}").unwrap();
        }
        out.push('\n');
        out + &legend
    }
}
