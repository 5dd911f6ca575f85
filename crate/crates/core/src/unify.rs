//! Bijective renaming between two sets of atoms.
//!
//! Two grounded effects unify when some bijection between their objects
//! maps one onto the other. The same search, run on lifted atoms, maps the
//! variables of one schema onto another's.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::logic::{Atom, Effect, Substitution, Term};

/// How a term is used inside a group list: `(group, predicate, position)`
/// occurrences. Terms with different profiles can never map to each other.
fn profiles(groups: &[&BTreeSet<Atom>]) -> BTreeMap<Term, Vec<(usize, String, usize)>> {
    let mut out: BTreeMap<Term, Vec<(usize, String, usize)>> = BTreeMap::new();
    for (g, atoms) in groups.iter().enumerate() {
        for a in atoms.iter() {
            for (pos, t) in a.args.iter().enumerate() {
                out.entry(t.clone()).or_default().push((g, a.predicate.clone(), pos));
            }
        }
    }
    for p in out.values_mut() {
        p.sort();
    }
    out
}

/// Enumerates bijections `φ` from the terms of `left` to the terms of
/// `right` with `φ(left[k]) == right[k]` for every group `k`, in
/// lexicographic order: domain terms are taken sorted and each is tried
/// against sorted candidate images. `visit` returns `true` to stop.
/// `compatible` may veto individual term pairs.
pub fn for_each_unifier<F, V>(left: &[&BTreeSet<Atom>], right: &[&BTreeSet<Atom>], compatible: F, mut visit: V)
where
    F: Fn(&Term, &Term) -> bool,
    V: FnMut(Substitution) -> bool,
{
    if left.len() != right.len() || left.iter().zip(right).any(|(l, r)| l.len() != r.len()) {
        return;
    }
    let lp = profiles(left);
    let rp = profiles(right);
    if lp.len() != rp.len() {
        return;
    }
    let domain: Vec<&Term> = lp.keys().collect();
    let candidates: Vec<Vec<&Term>> = domain
        .iter()
        .map(|d| rp.iter().filter(|(r, p)| **p == lp[*d] && compatible(d, r)).map(|(r, _)| r).collect())
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return;
    }

    // Atoms become checkable once their last domain term is assigned.
    let position: HashMap<&Term, usize> = domain.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let mut ready: Vec<Vec<(usize, &Atom)>> = vec![vec![]; domain.len()];
    for (g, atoms) in left.iter().enumerate() {
        for a in atoms.iter() {
            match a.args.iter().map(|t| position[t]).max() {
                Some(last) => ready[last].push((g, a)),
                None => {
                    if !right[g].contains(a) {
                        return;
                    }
                }
            }
        }
    }

    struct Search<'a, V> {
        domain: &'a [&'a Term],
        candidates: &'a [Vec<&'a Term>],
        ready: &'a [Vec<(usize, &'a Atom)>],
        right: &'a [&'a BTreeSet<Atom>],
        image: Vec<Option<&'a Term>>,
        used: BTreeSet<&'a Term>,
        position: &'a HashMap<&'a Term, usize>,
        visit: V,
    }

    impl<'a, V: FnMut(Substitution) -> bool> Search<'a, V> {
        fn mapped(&self, a: &Atom) -> Atom {
            Atom {
                predicate: a.predicate.clone(),
                args: a.args.iter().map(|t| self.image[self.position[t]].unwrap().clone()).collect(),
            }
        }

        /// Returns `true` once the visitor asked to stop.
        fn run(&mut self, i: usize) -> bool {
            if i == self.domain.len() {
                let sub =
                    self.domain.iter().zip(&self.image).map(|(d, r)| ((*d).clone(), r.unwrap().clone())).collect();
                return (self.visit)(sub);
            }
            for c in self.candidates[i].iter().copied() {
                if self.used.contains(c) {
                    continue;
                }
                self.image[i] = Some(c);
                let consistent = self.ready[i].iter().all(|(g, a)| self.right[*g].contains(&self.mapped(a)));
                if consistent {
                    self.used.insert(c);
                    if self.run(i + 1) {
                        return true;
                    }
                    self.used.remove(c);
                }
            }
            self.image[i] = None;
            false
        }
    }

    let mut search = Search {
        domain: &domain,
        candidates: &candidates,
        ready: &ready,
        right,
        image: vec![None; domain.len()],
        used: BTreeSet::new(),
        position: &position,
        visit: &mut visit,
    };
    search.run(0);
}

/// The lexicographically smallest unifier, if any.
pub fn unify_groups_with<F>(left: &[&BTreeSet<Atom>], right: &[&BTreeSet<Atom>], compatible: F) -> Option<Substitution>
where
    F: Fn(&Term, &Term) -> bool,
{
    let mut found = None;
    for_each_unifier(left, right, compatible, |s| {
        found = Some(s);
        true
    });
    found
}

pub fn unify_groups(left: &[&BTreeSet<Atom>], right: &[&BTreeSet<Atom>]) -> Option<Substitution> {
    unify_groups_with(left, right, |_, _| true)
}

/// Bijection between the objects of two grounded effects under which both
/// add and delete sets coincide.
pub fn unify_effects(e1: &Effect, e2: &Effect) -> Option<Substitution> {
    unify_groups(&[&e1.add, &e1.del], &[&e2.add, &e2.del])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Object;

    fn eff(add: &[&str], del: &[&str]) -> Effect {
        Effect::new(add.iter().map(|s| s.parse().unwrap()), del.iter().map(|s| s.parse().unwrap()))
    }

    fn o(n: &str, t: &str) -> Term {
        Term::Object(Object::new(n, t))
    }

    #[test]
    fn single_object_renaming() {
        let a = eff(&["chop_state_Chopped(tomato_1:tomato)"], &["chop_state_Fresh(tomato_1:tomato)"]);
        let b = eff(&["chop_state_Chopped(tomato_2:tomato)"], &["chop_state_Fresh(tomato_2:tomato)"]);
        let s = unify_effects(&a, &b).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(&o("tomato_1", "tomato")), Some(&o("tomato_2", "tomato")));
    }

    #[test]
    fn different_predicates_do_not_unify() {
        let a = eff(&["chop_state_Chopped(tomato_1:tomato)"], &["chop_state_Fresh(tomato_1:tomato)"]);
        let b = eff(&["blend_state_Blended(carrot_1:carrot)"], &["blend_state_Fresh(carrot_1:carrot)"]);
        assert!(unify_effects(&a, &b).is_none());
    }

    #[test]
    fn two_object_serve() {
        let a = eff(&["served_holds(plate_1:plate, tomato_1:tomato)"], &["holding(agent_1:agent, tomato_1:tomato)"]);
        let b = eff(&["served_holds(plate_2:plate, onion_1:onion)"], &["holding(agent_1:agent, onion_1:onion)"]);
        let s = unify_effects(&a, &b).unwrap();
        assert_eq!(s.get(&o("plate_1", "plate")), Some(&o("plate_2", "plate")));
        assert_eq!(s.get(&o("tomato_1", "tomato")), Some(&o("onion_1", "onion")));
        assert_eq!(s.get(&o("agent_1", "agent")), Some(&o("agent_1", "agent")));
        let back = unify_effects(&b, &a).unwrap();
        assert_eq!(back, s.inverse());
    }

    #[test]
    fn picks_smallest_of_symmetric_bijections() {
        let a = eff(&["p(a:t)", "p(b:t)"], &[]);
        let b = eff(&["p(c:t)", "p(d:t)"], &[]);
        let s = unify_effects(&a, &b).unwrap();
        assert_eq!(s.get(&o("a", "t")), Some(&o("c", "t")));
        assert_eq!(s.get(&o("b", "t")), Some(&o("d", "t")));
    }

    #[test]
    fn compatibility_filter_is_respected() {
        let a = eff(&["p(a:x)", "p(b:y)"], &[]);
        let b = eff(&["p(c:y)", "p(d:x)"], &[]);
        let s = unify_groups_with(&[&a.add], &[&b.add], |l, r| l.ty() == r.ty()).unwrap();
        assert_eq!(s.get(&o("a", "x")), Some(&o("d", "x")));
    }

    #[test]
    fn empty_effects_unify_trivially() {
        assert_eq!(unify_effects(&Effect::default(), &Effect::default()), Some(Substitution::new()));
    }
}
