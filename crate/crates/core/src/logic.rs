//! Typed first-order atoms, states, effects and substitutions.
//!
//! Terms carry their type inline and render as `name:type` (objects) or
//! `?x<i>:type` (variables), so an atom prints as
//! `content_holds(cutboard_1:cutboard, tomato_1:tomato)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hierarchy::TypeHierarchy;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Object {
    pub name: String,
    pub ty: String,
}

impl Object {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        Object { name: name.into(), ty: ty.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub index: usize,
    pub ty: String,
}

impl Variable {
    pub fn new(index: usize, ty: impl Into<String>) -> Self {
        Variable { index, ty: ty.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Object(Object),
    Variable(Variable),
}

impl Term {
    pub fn ty(&self) -> &str {
        match self {
            Term::Object(o) => &o.ty,
            Term::Variable(v) => &v.ty,
        }
    }

    pub fn as_object(&self) -> Option<&Object> {
        match self {
            Term::Object(o) => Some(o),
            Term::Variable(_) => None,
        }
    }

    pub fn as_variable(&self) -> Option<&Variable> {
        match self {
            Term::Variable(v) => Some(v),
            Term::Object(_) => None,
        }
    }
}

impl From<Object> for Term {
    fn from(o: Object) -> Self {
        Term::Object(o)
    }
}

impl From<Variable> for Term {
    fn from(v: Variable) -> Self {
        Term::Variable(v)
    }
}

/// A predicate applied to terms. Grounded iff every argument is an object.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { predicate: predicate.into(), args }
    }

    pub fn grounded(predicate: impl Into<String>, args: &[&Object]) -> Self {
        Atom::new(predicate, args.iter().map(|o| Term::Object((*o).clone())).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_grounded(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Object(_)))
    }

    pub fn objects(&self) -> impl Iterator<Item = &Object> {
        self.args.iter().filter_map(Term::as_object)
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.args.iter().filter_map(Term::as_variable)
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.objects().any(|o| o.name == name)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Object(o) => o.fmt(f),
            Term::Variable(v) => v.fmt(f),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

fn parse_err(input: &str, reason: &str) -> Error {
    Error::Parse { input: input.to_string(), reason: reason.to_string() }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, ty) = s.split_once(':').ok_or_else(|| parse_err(s, "expected `name:type`"))?;
        let (name, ty) = (name.trim(), ty.trim());
        if !is_ident(ty) {
            return Err(parse_err(s, "bad type name"));
        }
        if let Some(idx) = name.strip_prefix("?x") {
            let index = idx.parse().map_err(|_| parse_err(s, "bad variable index"))?;
            Ok(Term::Variable(Variable::new(index, ty)))
        } else if is_ident(name) {
            Ok(Term::Object(Object::new(name, ty)))
        } else {
            Err(parse_err(s, "bad object name"))
        }
    }
}

impl FromStr for Atom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| parse_err(s, "missing `(`"))?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(|| parse_err(s, "missing `)`"))?;
        let predicate = s[..open].trim();
        if !is_ident(predicate) {
            return Err(parse_err(s, "bad predicate name"));
        }
        let args =
            if inner.trim().is_empty() { vec![] } else { inner.split(',').map(str::parse).collect::<Result<_>>()? };
        Ok(Atom::new(predicate, args))
    }
}

macro_rules! serde_via_display {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.ty)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?x{}:{}", self.index, self.ty)
    }
}

impl FromStr for Object {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse()? {
            Term::Object(o) => Ok(o),
            Term::Variable(_) => Err(parse_err(s, "expected an object")),
        }
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse()? {
            Term::Variable(v) => Ok(v),
            Term::Object(_) => Err(parse_err(s, "expected a variable")),
        }
    }
}

serde_via_display!(Object);
serde_via_display!(Variable);
serde_via_display!(Term);
serde_via_display!(Atom);

/// A finite set of grounded atoms; anything absent is false.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State {
    atoms: BTreeSet<Atom>,
}

impl State {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Result<Self> {
        let atoms: BTreeSet<Atom> = atoms.into_iter().collect();
        if let Some(a) = atoms.iter().find(|a| !a.is_grounded()) {
            return Err(parse_err(&a.to_string(), "state atoms must be grounded"));
        }
        Ok(State { atoms })
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn insert(&mut self, atom: Atom) {
        debug_assert!(atom.is_grounded());
        self.atoms.insert(atom);
    }

    pub fn remove(&mut self, atom: &Atom) -> bool {
        self.atoms.remove(atom)
    }

    pub fn objects(&self) -> BTreeSet<Object> {
        self.atoms.iter().flat_map(|a| a.objects().cloned()).collect()
    }

    pub fn is_superset_of<'a>(&self, atoms: impl IntoIterator<Item = &'a Atom>) -> bool {
        atoms.into_iter().all(|a| self.atoms.contains(a))
    }
}

impl FromIterator<Atom> for State {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        let s = State { atoms: iter.into_iter().collect() };
        debug_assert!(s.atoms.iter().all(Atom::is_grounded));
        s
    }
}

/// Add and delete sets. Either grounded (an observed change) or lifted
/// (part of a schema).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Effect {
    pub add: BTreeSet<Atom>,
    pub del: BTreeSet<Atom>,
}

impl Effect {
    pub fn new(add: impl IntoIterator<Item = Atom>, del: impl IntoIterator<Item = Atom>) -> Self {
        Effect { add: add.into_iter().collect(), del: del.into_iter().collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.add.is_empty() && self.del.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.add.iter().chain(self.del.iter())
    }

    /// Sorted `(predicate, arity, is_add)` signature; two effects with
    /// different signatures can never be unified.
    pub fn signature(&self) -> Vec<(&str, usize, bool)> {
        let mut sig: Vec<_> = self
            .add
            .iter()
            .map(|a| (a.predicate.as_str(), a.arity(), true))
            .chain(self.del.iter().map(|a| (a.predicate.as_str(), a.arity(), false)))
            .collect();
        sig.sort_unstable();
        sig
    }

    /// The part of this effect that actually changes `s`.
    pub fn effective_in(&self, s: &State) -> Effect {
        Effect {
            add: self.add.iter().filter(|a| !s.contains(a)).cloned().collect(),
            del: self.del.iter().filter(|a| s.contains(a)).cloned().collect(),
        }
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let add: Vec<_> = self.add.iter().map(|a| format!("+{a}")).collect();
        let del: Vec<_> = self.del.iter().map(|a| format!("-{a}")).collect();
        write!(f, "{{{}}}", add.into_iter().chain(del).collect::<Vec<_>>().join(", "))
    }
}

/// `add = next \ s`, `del = s \ next`.
pub fn diff(s: &State, next: &State) -> Effect {
    Effect {
        add: next.atoms.difference(&s.atoms).cloned().collect(),
        del: s.atoms.difference(&next.atoms).cloned().collect(),
    }
}

/// Term-to-term bindings. Used both for grounding (variable to object) and
/// for renaming (object to object, variable to variable).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    map: BTreeMap<Term, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, from: impl Into<Term>, to: impl Into<Term>) -> &mut Self {
        self.map.insert(from.into(), to.into());
        self
    }

    pub fn with(mut self, from: impl Into<Term>, to: impl Into<Term>) -> Self {
        self.bind(from, to);
        self
    }

    pub fn get(&self, t: &Term) -> Option<&Term> {
        self.map.get(t)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Term)> {
        self.map.iter()
    }

    /// Swaps domain and image. Only meaningful for bijections.
    pub fn inverse(&self) -> Substitution {
        Substitution { map: self.map.iter().map(|(k, v)| (v.clone(), k.clone())).collect() }
    }

    /// Rejects variable-to-object bindings whose object type is not a
    /// descendant-or-equal of the variable type.
    pub fn check_types(&self, h: &TypeHierarchy) -> Result<()> {
        for (from, to) in &self.map {
            if let (Term::Variable(v), Term::Object(o)) = (from, to) {
                if !h.is_subtype(&o.ty, &v.ty)? {
                    return Err(Error::TypeMismatch {
                        var: format!("?x{}", v.index),
                        var_type: v.ty.clone(),
                        object: o.name.clone(),
                        object_type: o.ty.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        self.map.get(t).cloned().unwrap_or_else(|| t.clone())
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom { predicate: a.predicate.clone(), args: a.args.iter().map(|t| self.apply_term(t)).collect() }
    }

    pub fn apply_atoms<'a>(&self, atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Atom> {
        atoms.into_iter().map(|a| self.apply_atom(a)).collect()
    }

    pub fn apply_effect(&self, e: &Effect) -> Effect {
        Effect { add: self.apply_atoms(&e.add), del: self.apply_atoms(&e.del) }
    }

    /// Type-checked substitution into a single atom.
    pub fn substitute(&self, a: &Atom, h: &TypeHierarchy) -> Result<Atom> {
        self.check_types(h)?;
        Ok(self.apply_atom(a))
    }
}

impl FromIterator<(Term, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Term, Term)>>(iter: I) -> Self {
        Substitution { map: iter.into_iter().collect() }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.map.iter().map(|(k, v)| format!("{k}->{v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(n: &str, t: &str) -> Object {
        Object::new(n, t)
    }

    fn atom(s: &str) -> Atom {
        s.parse().unwrap()
    }

    fn hierarchy() -> TypeHierarchy {
        TypeHierarchy::from_edges(
            "entity",
            &[("agent", "entity"), ("tool", "entity"), ("food", "entity"), ("cutboard", "tool"), ("tomato", "food")],
        )
        .unwrap()
    }

    #[test]
    fn render_and_parse() {
        let a = atom("content_holds(?x0:cutboard, ?x1:food)");
        assert_eq!(a.to_string(), "content_holds(?x0:cutboard, ?x1:food)");
        assert!(!a.is_grounded());
        let g = atom("content_holds(cutboard_1:cutboard, tomato_1:tomato)");
        assert!(g.is_grounded());
        assert_eq!(g.to_string(), "content_holds(cutboard_1:cutboard, tomato_1:tomato)");
        assert_eq!(atom("flag()").arity(), 0);
        assert!("holding(agent_1)".parse::<Atom>().is_err());
        assert!("holding agent_1:agent".parse::<Atom>().is_err());
    }

    #[test]
    fn substitute_grounds_lifted_atom() {
        let h = hierarchy();
        let a = atom("content_holds(?x0:cutboard, ?x1:food)");
        let sigma = Substitution::new()
            .with(Variable::new(0, "cutboard"), obj("cutboard_1", "cutboard"))
            .with(Variable::new(1, "food"), obj("tomato_1", "tomato"));
        assert_eq!(sigma.substitute(&a, &h).unwrap(), atom("content_holds(cutboard_1:cutboard, tomato_1:tomato)"));
        assert_eq!(Substitution::new().substitute(&a, &h).unwrap(), a);
    }

    #[test]
    fn substitute_rejects_type_violation() {
        let h = hierarchy();
        let a = atom("holding(?x0:agent, ?x1:food)");
        let sigma = Substitution::new().with(Variable::new(1, "food"), obj("cutboard_1", "cutboard"));
        assert!(matches!(sigma.substitute(&a, &h), Err(Error::TypeMismatch { .. })));
    }

    #[test]
    fn diff_is_set_difference() {
        let a = atom("p(a:t)");
        let b = atom("q(b:t)");
        let c = atom("r(c:t)");
        let s: State = [a.clone(), b.clone()].into_iter().collect();
        let next: State = [a, c.clone()].into_iter().collect();
        let e = diff(&s, &next);
        assert_eq!(e.add, [c].into_iter().collect());
        assert_eq!(e.del, [b].into_iter().collect());
        assert!(diff(&s, &s).is_empty());
    }

    #[test]
    fn state_json_uses_textual_atoms() {
        let s: State = [atom("chop_state_Fresh(tomato_1:tomato)")].into_iter().collect();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"["chop_state_Fresh(tomato_1:tomato)"]"#);
        let back: State = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(State::new([atom("p(?x0:t)")]).is_err());
    }
}
