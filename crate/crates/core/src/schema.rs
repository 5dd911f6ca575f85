//! Lifted action schemas and their groundings.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::TypeHierarchy;
use crate::logic::{Atom, Effect, Object, State, Substitution, Term, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Individual,
    Generalized,
    Imagined,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Individual => "individual",
            Provenance::Generalized => "generalized",
            Provenance::Imagined => "imagined",
        })
    }
}

/// A lifted action. `description` is the lifted action description: the
/// primitive name applied to the parameters the primitive interacts with,
/// e.g. `PLACE(?x0:agent, ?x1:food, ?x2:plate)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: String,
    pub description: Atom,
    pub params: Vec<Variable>,
    pub pre: BTreeSet<Atom>,
    pub effect: Effect,
    pub provenance: Provenance,
    #[serde(default)]
    pub clusters: Vec<usize>,
}

impl ActionSchema {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidSchema { name: self.name.clone(), reason };
        if self.params.is_empty() {
            return Err(bad("no parameters".into()));
        }
        for (i, p) in self.params.iter().enumerate() {
            if p.index != i {
                return Err(bad(format!("parameter {i} has index {}", p.index)));
            }
        }
        let atoms = self.pre.iter().chain(self.effect.atoms()).chain(std::iter::once(&self.description));
        for a in atoms {
            for t in &a.args {
                match t {
                    Term::Variable(v) => {
                        if self.params.get(v.index) != Some(v) {
                            return Err(bad(format!("{a} uses undeclared or mistyped {t}")));
                        }
                    }
                    Term::Object(_) => return Err(bad(format!("{a} is not lifted"))),
                }
            }
        }
        if let Some(a) = self.effect.add.intersection(&self.effect.del).next() {
            return Err(bad(format!("{a} is both added and deleted")));
        }
        Ok(())
    }

    /// The primitive this schema executes (the description's predicate).
    pub fn primitive(&self) -> &str {
        &self.description.predicate
    }

    pub fn param_types(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.ty.as_str()).collect()
    }

    /// Copy with every parameter retyped; atoms follow their variables.
    pub fn retyped(&self, types: &[String]) -> ActionSchema {
        assert_eq!(types.len(), self.params.len());
        let sigma: Substitution = self
            .params
            .iter()
            .zip(types)
            .map(|(p, t)| (Term::Variable(p.clone()), Term::Variable(Variable::new(p.index, t.clone()))))
            .collect();
        ActionSchema {
            name: self.name.clone(),
            description: sigma.apply_atom(&self.description),
            params: types.iter().enumerate().map(|(i, t)| Variable::new(i, t.clone())).collect(),
            pre: sigma.apply_atoms(&self.pre),
            effect: sigma.apply_effect(&self.effect),
            provenance: self.provenance,
            clusters: self.clusters.clone(),
        }
    }

    /// Structural identity ignoring name, provenance and support.
    pub fn same_behavior(&self, other: &ActionSchema) -> bool {
        self.description == other.description
            && self.params == other.params
            && self.pre == other.pre
            && self.effect == other.effect
    }

    /// Type-checked substitution into preconditions, effect and description.
    pub fn substitute(&self, sigma: &Substitution, h: &TypeHierarchy) -> Result<ActionSchema> {
        sigma.check_types(h)?;
        Ok(ActionSchema {
            name: self.name.clone(),
            description: sigma.apply_atom(&self.description),
            params: self.params.clone(),
            pre: sigma.apply_atoms(&self.pre),
            effect: sigma.apply_effect(&self.effect),
            provenance: self.provenance,
            clusters: self.clusters.clone(),
        })
    }
}

impl fmt::Display for ActionSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<_> = self.params.iter().map(|p| Term::Variable(p.clone()).to_string()).collect();
        writeln!(f, "{}({}) [{}]", self.name, params.join(", "), self.provenance)?;
        writeln!(f, "  description: {}", self.description)?;
        let pre: Vec<_> = self.pre.iter().map(ToString::to_string).collect();
        writeln!(f, "  pre: {}", pre.join(", "))?;
        write!(f, "  eff: {}", self.effect)
    }
}

/// A schema with every parameter bound to an object.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundedAction {
    pub schema: Arc<ActionSchema>,
    pub binding: Vec<Object>,
}

impl GroundedAction {
    pub fn new(schema: Arc<ActionSchema>, binding: Vec<Object>, h: &TypeHierarchy) -> Result<Self> {
        if binding.len() != schema.params.len() {
            return Err(Error::InvalidSchema {
                name: schema.name.clone(),
                reason: format!("binding has {} objects for {} parameters", binding.len(), schema.params.len()),
            });
        }
        let g = GroundedAction { schema, binding };
        g.substitution().check_types(h)?;
        Ok(g)
    }

    pub fn substitution(&self) -> Substitution {
        self.schema
            .params
            .iter()
            .zip(&self.binding)
            .map(|(p, o)| (Term::Variable(p.clone()), Term::Object(o.clone())))
            .collect()
    }

    pub fn pre(&self) -> BTreeSet<Atom> {
        self.substitution().apply_atoms(&self.schema.pre)
    }

    pub fn effect(&self) -> Effect {
        self.substitution().apply_effect(&self.schema.effect)
    }

    pub fn description(&self) -> Atom {
        self.substitution().apply_atom(&self.schema.description)
    }

    /// Object bound to `v`, if `v` is a parameter.
    pub fn object_for(&self, v: &Variable) -> Option<&Object> {
        self.schema.params.iter().position(|p| p == v).map(|i| &self.binding[i])
    }

    pub fn ground_atom(&self, a: &Atom) -> Atom {
        let args = a
            .args
            .iter()
            .map(|t| match t {
                Term::Variable(v) => {
                    Term::Object(self.object_for(v).cloned().unwrap_or_else(|| panic!("{v} is not a parameter")))
                }
                other => other.clone(),
            })
            .collect();
        Atom::new(a.predicate.clone(), args)
    }

    pub fn binds(&self, name: &str) -> bool {
        self.binding.iter().any(|o| o.name == name)
    }

    /// `(schema name, object names)` identity used for failure memory and
    /// plan serialization.
    pub fn key(&self) -> (String, Vec<String>) {
        (self.schema.name.clone(), self.binding.iter().map(|o| o.name.clone()).collect())
    }
}

impl fmt::Display for GroundedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<_> = self.binding.iter().map(|o| o.name.as_str()).collect();
        write!(f, "{}({})", self.schema.name, args.join(", "))
    }
}

pub fn applicable(s: &State, g: &GroundedAction) -> bool {
    s.is_superset_of(&g.pre())
}

/// `(s \ del) ∪ add`, or an error if the preconditions do not hold.
pub fn apply(s: &State, g: &GroundedAction) -> Result<State> {
    if !applicable(s, g) {
        return Err(Error::NotApplicable(g.to_string()));
    }
    let eff = g.effect();
    let mut next = s.clone();
    for a in &eff.del {
        next.remove(a);
    }
    for a in eff.add {
        next.insert(a);
    }
    Ok(next)
}

/// Every injective, type-respecting assignment of `objects` to the schema's
/// parameters, in lexicographic order of object names.
pub fn ground_schema(schema: &Arc<ActionSchema>, objects: &[Object], h: &TypeHierarchy) -> Vec<GroundedAction> {
    let mut sorted: Vec<&Object> = objects.iter().collect();
    sorted.sort();
    let fits: Vec<Vec<&Object>> = schema
        .params
        .iter()
        .map(|p| sorted.iter().copied().filter(|o| h.is_subtype(&o.ty, &p.ty).unwrap_or(false)).collect())
        .collect();
    let fits: Vec<&[&Object]> = fits.iter().map(Vec::as_slice).collect();
    ground_with(schema, &fits)
}

/// Groundings given the sorted candidate objects of each parameter.
pub(crate) fn ground_with(schema: &Arc<ActionSchema>, fits: &[&[&Object]]) -> Vec<GroundedAction> {
    fn rec<'a>(i: usize, fits: &[&[&'a Object]], current: &mut Vec<&'a Object>, out: &mut Vec<Vec<Object>>) {
        if i == fits.len() {
            out.push(current.iter().map(|o| (*o).clone()).collect());
            return;
        }
        for o in fits[i] {
            if current.iter().any(|c| c.name == o.name) {
                continue;
            }
            current.push(o);
            rec(i + 1, fits, current, out);
            current.pop();
        }
    }
    if fits.iter().any(|f| f.is_empty()) {
        return vec![];
    }
    let mut bindings = vec![];
    rec(0, fits, &mut Vec::with_capacity(fits.len()), &mut bindings);
    bindings.into_iter().map(|binding| GroundedAction { schema: Arc::clone(schema), binding }).collect()
}
