//! Rooted entity-type tree with subtype and lowest-common-ancestor queries.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One node of the hierarchy. `parent` is `None` only for the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityType {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "HierarchySpec", try_from = "HierarchySpec")]
pub struct TypeHierarchy {
    names: Vec<String>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    index: HashMap<String, usize>,
    root: usize,
}

/// JSON shape: a flat node list with parent links.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HierarchySpec {
    pub types: Vec<EntityType>,
}

impl TypeHierarchy {
    pub fn new(types: Vec<EntityType>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, t) in types.iter().enumerate() {
            if index.insert(t.name.clone(), i).is_some() {
                return Err(Error::InvalidHierarchy(format!("duplicate type `{}`", t.name)));
            }
        }
        let mut parent = Vec::with_capacity(types.len());
        let mut root = None;
        for t in &types {
            match &t.parent {
                None => {
                    if root.replace(index[&t.name]).is_some() {
                        return Err(Error::InvalidHierarchy("more than one root".into()));
                    }
                    parent.push(None);
                }
                Some(p) => match index.get(p) {
                    Some(&pi) => parent.push(Some(pi)),
                    None => {
                        return Err(Error::InvalidHierarchy(format!("parent `{p}` of `{}` is not declared", t.name)))
                    }
                },
            }
        }
        let root = root.ok_or_else(|| Error::InvalidHierarchy("no root type".into()))?;

        let mut depth = vec![usize::MAX; types.len()];
        for start in 0..types.len() {
            let mut chain = vec![];
            let mut cur = start;
            while depth[cur] == usize::MAX {
                if chain.contains(&cur) {
                    return Err(Error::InvalidHierarchy(format!("cycle through `{}`", types[cur].name)));
                }
                chain.push(cur);
                match parent[cur] {
                    Some(p) => cur = p,
                    None => {
                        depth[cur] = 0;
                        chain.pop();
                        break;
                    }
                }
            }
            while let Some(n) = chain.pop() {
                depth[n] = depth[parent[n].unwrap()] + 1;
            }
        }

        Ok(TypeHierarchy { names: types.into_iter().map(|t| t.name).collect(), parent, depth, index, root })
    }

    /// Builds a hierarchy from `(child, parent)` pairs plus a root name.
    pub fn from_edges(root: &str, edges: &[(&str, &str)]) -> Result<Self> {
        let mut types = vec![EntityType { name: root.to_string(), parent: None }];
        types.extend(edges.iter().map(|(c, p)| EntityType { name: c.to_string(), parent: Some(p.to_string()) }));
        Self::new(types)
    }

    fn id(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownType(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn root(&self) -> &str {
        &self.names[self.root]
    }

    pub fn parent(&self, name: &str) -> Result<Option<&str>> {
        Ok(self.parent[self.id(name)?].map(|p| self.names[p].as_str()))
    }

    pub fn depth(&self, name: &str) -> Result<usize> {
        Ok(self.depth[self.id(name)?])
    }

    pub fn types(&self) -> impl Iterator<Item = EntityType> + '_ {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| EntityType { name: n.clone(), parent: self.parent[i].map(|p| self.names[p].clone()) })
    }

    pub fn is_leaf(&self, name: &str) -> Result<bool> {
        let id = self.id(name)?;
        Ok(!self.parent.contains(&Some(id)))
    }

    /// True iff `ancestor` lies on the path from `child` to the root, inclusive.
    pub fn is_subtype(&self, child: &str, ancestor: &str) -> Result<bool> {
        let mut cur = self.id(child)?;
        let target = self.id(ancestor)?;
        loop {
            if cur == target {
                return Ok(true);
            }
            match self.parent[cur] {
                Some(p) => cur = p,
                None => return Ok(false),
            }
        }
    }

    pub fn lca<'a>(&'a self, a: &str, b: &str) -> Result<&'a str> {
        let (mut x, mut y) = (self.id(a)?, self.id(b)?);
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].unwrap();
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].unwrap();
        }
        while x != y {
            x = self.parent[x].unwrap();
            y = self.parent[y].unwrap();
        }
        Ok(&self.names[x])
    }

    /// Path from `name` up to the root, starting with `name` itself.
    pub fn ancestors(&self, name: &str) -> Result<Vec<&str>> {
        let mut out = vec![];
        let mut cur = Some(self.id(name)?);
        while let Some(c) = cur {
            out.push(self.names[c].as_str());
            cur = self.parent[c];
        }
        Ok(out)
    }
}

impl From<TypeHierarchy> for HierarchySpec {
    fn from(h: TypeHierarchy) -> Self {
        HierarchySpec { types: h.types().collect() }
    }
}

impl TryFrom<HierarchySpec> for TypeHierarchy {
    type Error = Error;

    fn try_from(spec: HierarchySpec) -> Result<Self> {
        TypeHierarchy::new(spec.types)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kitchen() -> TypeHierarchy {
        TypeHierarchy::from_edges(
            "entity",
            &[
                ("agent", "entity"),
                ("plate", "entity"),
                ("tool", "entity"),
                ("food", "entity"),
                ("cutboard", "tool"),
                ("blender", "tool"),
                ("vegetable", "food"),
                ("fruit", "food"),
                ("tomato", "vegetable"),
                ("onion", "vegetable"),
                ("lettuce", "vegetable"),
                ("banana", "fruit"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn subtype_queries() {
        let h = kitchen();
        assert!(h.is_subtype("tomato", "food").unwrap());
        assert!(h.is_subtype("food", "food").unwrap());
        assert!(!h.is_subtype("cutboard", "food").unwrap());
        assert!(h.is_subtype("cutboard", "entity").unwrap());
        assert_eq!(h.is_subtype("spoon", "food"), Err(Error::UnknownType("spoon".into())));
    }

    #[test]
    fn lca_queries() {
        let h = kitchen();
        assert_eq!(h.lca("tomato", "tomato").unwrap(), "tomato");
        assert_eq!(h.lca("tomato", "onion").unwrap(), "vegetable");
        assert_eq!(h.lca("lettuce", "banana").unwrap(), "food");
        assert_eq!(h.lca("cutboard", "banana").unwrap(), "entity");
        assert_eq!(h.lca("vegetable", "tomato").unwrap(), "vegetable");
        assert!(h.lca("tomato", "spoon").is_err());
    }

    #[test]
    fn rejects_malformed_trees() {
        let two_roots =
            vec![EntityType { name: "a".into(), parent: None }, EntityType { name: "b".into(), parent: None }];
        assert!(TypeHierarchy::new(two_roots).is_err());

        let cycle = vec![
            EntityType { name: "r".into(), parent: None },
            EntityType { name: "a".into(), parent: Some("b".into()) },
            EntityType { name: "b".into(), parent: Some("a".into()) },
        ];
        assert!(matches!(TypeHierarchy::new(cycle), Err(Error::InvalidHierarchy(_))));

        let dangling = vec![
            EntityType { name: "r".into(), parent: None },
            EntityType { name: "a".into(), parent: Some("nope".into()) },
        ];
        assert!(TypeHierarchy::new(dangling).is_err());
    }

    #[test]
    fn json_round_trip() {
        let h = kitchen();
        let text = serde_json::to_string(&h).unwrap();
        let back: TypeHierarchy = serde_json::from_str(&text).unwrap();
        assert_eq!(back.lca("tomato", "banana").unwrap(), "food");
        assert_eq!(back.types().count(), h.types().count());
    }
}
