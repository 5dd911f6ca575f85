//! The kitchen's entity hierarchy, observable attributes, and the table of
//! what each tool does to its contents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use typegen::TypeHierarchy;

pub const AGENT: &str = "agent";
pub const PLATE: &str = "plate";
pub const TOOL: &str = "tool";
pub const FOOD: &str = "food";

pub const HOLDING: &str = "holding";
pub const CONTENT: &str = "content_holds";
pub const SERVED: &str = "served_holds";

const EDGES: &[(&str, &str)] = &[
    ("agent", "entity"),
    ("plate", "entity"),
    ("tool", "entity"),
    ("food", "entity"),
    ("cutboard", "tool"),
    ("machete", "tool"),
    ("breadslicer", "tool"),
    ("blender", "tool"),
    ("toaster", "tool"),
    ("vegetable", "food"),
    ("fruit", "food"),
    ("bread", "food"),
    ("lettuce", "vegetable"),
    ("tomato", "vegetable"),
    ("onion", "vegetable"),
    ("carrot", "vegetable"),
    ("cucumber", "vegetable"),
    ("banana", "fruit"),
    ("coconut", "fruit"),
    ("apple", "fruit"),
];

pub fn hierarchy() -> TypeHierarchy {
    TypeHierarchy::from_edges("entity", EDGES).expect("built-in hierarchy is well formed")
}

/// Finite attribute domains per entity type (inherited by subtypes) and the
/// arity of each relation. The first value of a domain is the initial one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub attributes: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    pub relations: BTreeMap<String, usize>,
}

impl Default for AttributeSchema {
    fn default() -> Self {
        let domain = |pairs: &[(&str, &[&str])]| -> BTreeMap<String, Vec<String>> {
            pairs.iter().map(|(a, vs)| (a.to_string(), vs.iter().map(|v| v.to_string()).collect())).collect()
        };
        let fill = domain(&[("fill_state", &["Empty", "Filled"])]);
        AttributeSchema {
            attributes: BTreeMap::from([
                (AGENT.into(), domain(&[("hand_state", &["Empty", "Full"])])),
                (PLATE.into(), fill.clone()),
                (TOOL.into(), fill),
                (
                    FOOD.into(),
                    domain(&[
                        ("chop_state", &["Fresh", "Chopped"]),
                        ("blend_state", &["Fresh", "Blended"]),
                        ("toast_state", &["Fresh", "Toasted"]),
                        ("serve_state", &["Unserved", "Served"]),
                    ]),
                ),
            ]),
            relations: BTreeMap::from([(HOLDING.into(), 2), (CONTENT.into(), 2), (SERVED.into(), 2)]),
        }
    }
}

impl AttributeSchema {
    /// Attributes of `ty` including inherited ones, sorted by name.
    pub fn attributes_of(&self, ty: &str, h: &TypeHierarchy) -> BTreeMap<&str, &[String]> {
        let mut out = BTreeMap::new();
        for anc in h.ancestors(ty).unwrap_or_default() {
            if let Some(attrs) = self.attributes.get(anc) {
                for (a, d) in attrs {
                    out.entry(a.as_str()).or_insert(d.as_slice());
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), String> {
        for (ty, attrs) in &self.attributes {
            for (a, d) in attrs {
                if d.is_empty() {
                    return Err(format!("attribute {a} of {ty} has an empty domain"));
                }
            }
        }
        match self.relations.iter().find(|(_, k)| **k < 2) {
            Some((r, _)) => Err(format!("relation {r} must have arity at least 2")),
            None => Ok(()),
        }
    }
}

/// What USE on a tool of `tool` type does to each food inside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolRule {
    pub tool: String,
    pub attribute: String,
    pub from: String,
    pub to: String,
    pub capacity: usize,
}

pub fn tool_rules() -> Vec<ToolRule> {
    let rule = |tool: &str, attribute: &str, to: &str, capacity| ToolRule {
        tool: tool.into(),
        attribute: attribute.into(),
        from: "Fresh".into(),
        to: to.into(),
        capacity,
    };
    vec![
        rule("cutboard", "chop_state", "Chopped", 1),
        rule("machete", "chop_state", "Chopped", 1),
        rule("breadslicer", "chop_state", "Chopped", 1),
        rule("blender", "blend_state", "Blended", 2),
        rule("toaster", "toast_state", "Toasted", 1),
    ]
}
