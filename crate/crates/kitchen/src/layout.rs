//! Grid layouts and simulator configuration, both JSON-serializable.
//!
//! Grid rows use `#` for walls, `=` for counters and `.` for floor.
//! Entities stand on counters; the agent stands on floor.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    N,
    E,
    S,
    W,
}

impl Direction {
    /// Search order used for navigation ties.
    pub const ALL: [Direction; 4] = [Direction::N, Direction::E, Direction::S, Direction::W];

    pub fn offset(self) -> (isize, isize) {
        match self {
            Direction::N => (0, -1),
            Direction::E => (1, 0),
            Direction::S => (0, 1),
            Direction::W => (-1, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub name: String,
    pub pos: [usize; 2],
    #[serde(default = "default_facing")]
    pub facing: Direction,
}

fn default_facing() -> Direction {
    Direction::N
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpec {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub pos: [usize; 2],
    /// Initial attribute values that differ from the defaults.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub grid: Vec<String>,
    pub agent: AgentSpec,
    pub entities: Vec<EntitySpec>,
}

impl Layout {
    /// A square room of counters around a floor area, corners walled. The
    /// entities go on counters clockwise from the top-left, every other
    /// counter, starting `variant` counters in. The agent starts in the
    /// middle facing north.
    pub fn room(agent: &str, entities: &[(String, String)], variant: usize) -> Layout {
        let mut side = 5;
        while Self::ring(side).len() < 2 * entities.len() {
            side += 1;
        }
        let ring = Self::ring(side);
        let mut grid = vec![];
        for y in 0..side {
            let row: String = (0..side)
                .map(|x| {
                    let corner = (x == 0 || x == side - 1) && (y == 0 || y == side - 1);
                    let border = x == 0 || y == 0 || x == side - 1 || y == side - 1;
                    match (corner, border) {
                        (true, _) => '#',
                        (false, true) => '=',
                        _ => '.',
                    }
                })
                .collect();
            grid.push(row);
        }
        let entities = entities
            .iter()
            .enumerate()
            .map(|(i, (name, ty))| EntitySpec {
                name: name.clone(),
                ty: ty.clone(),
                pos: ring[(variant + 2 * i) % ring.len()],
                attrs: BTreeMap::new(),
            })
            .collect();
        Layout {
            grid,
            agent: AgentSpec { name: agent.to_string(), pos: [side / 2, side / 2], facing: Direction::N },
            entities,
        }
    }

    /// Counter cells of a `side`×`side` room, clockwise from the top-left.
    fn ring(side: usize) -> Vec<[usize; 2]> {
        let m = side - 1;
        let mut out = vec![];
        out.extend((1..m).map(|x| [x, 0]));
        out.extend((1..m).map(|y| [m, y]));
        out.extend((1..m).rev().map(|x| [x, m]));
        out.extend((1..m).rev().map(|y| [0, y]));
        out
    }
}

/// Layout plus failure injection. `broken` names entities whose USE does
/// nothing; `exceptions` lists (tool type, food type) pairs that do not
/// interact, matched up the hierarchy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub layout: Layout,
    #[serde(default)]
    pub broken: BTreeSet<String>,
    #[serde(default)]
    pub exceptions: Vec<(String, String)>,
}

impl SimConfig {
    pub fn new(layout: Layout) -> Self {
        SimConfig { layout, broken: BTreeSet::new(), exceptions: vec![] }
    }
}
