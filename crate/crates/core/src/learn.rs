//! Learning lifted actions from demonstrations, then merging actions with
//! the same lifted effect into type-generalized actions until nothing
//! changes.

use std::collections::{BTreeMap, BTreeSet};

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::TypeHierarchy;
use crate::logic::{diff, Atom, Effect, Object, State, Substitution, Term, Variable};
use crate::schema::{ActionSchema, Provenance};
use crate::unify::{for_each_unifier, unify_groups, unify_groups_with};

/// Largest precondition difference whose powerset is enumerated.
pub const MAX_PRECONDITION_DIFF: usize = 20;

/// One observed `(s, a_d, s')` tuple. `action` is the grounded action
/// description: primitive name applied to the entities it interacted with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub before: State,
    pub action: Atom,
    pub after: State,
}

impl Transition {
    pub fn effect(&self) -> Effect {
        diff(&self.before, &self.after)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    pub task: String,
    pub transitions: Vec<Transition>,
}

impl Demonstration {
    /// Consecutive transitions chain and every effect is non-empty.
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.transitions.iter().enumerate() {
            if t.effect().is_empty() {
                return Err(Error::Parse {
                    input: self.task.clone(),
                    reason: format!("transition {i} has an empty effect"),
                });
            }
            if let Some(next) = self.transitions.get(i + 1) {
                if next.before != t.after {
                    return Err(Error::Parse {
                        input: self.task.clone(),
                        reason: format!("transition {} does not start where {i} ended", i + 1),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A clustered observation: the original transition plus the objects bound
/// to the cluster's variables (`binding[i]` is the object behind `?x<i>`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub transition: Transition,
    pub binding: Vec<Object>,
}

impl Member {
    fn lifting(&self, params: &[Variable]) -> Substitution {
        self.binding.iter().zip(params).map(|(o, v)| (Term::Object(o.clone()), Term::Variable(v.clone()))).collect()
    }

    /// The state before the action, restricted to atoms over the member's
    /// bound objects and lifted to the cluster's variables.
    pub fn lifted_state(&self, params: &[Variable]) -> BTreeSet<Atom> {
        let names: BTreeSet<&str> = self.binding.iter().map(|o| o.name.as_str()).collect();
        let lift = self.lifting(params);
        self.transition
            .before
            .iter()
            .filter(|a| a.objects().all(|o| names.contains(o.name.as_str())))
            .map(|a| lift.apply_atom(a))
            .collect()
    }
}

/// Transitions of one primitive whose effects unify under a type-preserving
/// object bijection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationCluster {
    pub id: usize,
    pub action: String,
    pub description: Atom,
    pub params: Vec<Variable>,
    pub effect: Effect,
    pub members: Vec<Member>,
}

/// Variables for a transition: description arguments first, then the
/// remaining effect objects in sorted order.
fn variables_for(t: &Transition, effect: &Effect) -> Vec<Object> {
    let mut order: Vec<Object> = vec![];
    let mut push = |o: &Object| {
        if !order.contains(o) {
            order.push(o.clone());
        }
    };
    t.action.objects().for_each(&mut push);
    let rest: BTreeSet<&Object> = effect.atoms().flat_map(Atom::objects).collect();
    rest.into_iter().for_each(push);
    order
}

pub fn cluster_lifted_effects(demos: &[Demonstration]) -> Vec<ObservationCluster> {
    let mut clusters: Vec<ObservationCluster> = vec![];
    for t in demos.iter().flat_map(|d| &d.transitions) {
        let effect = t.effect();
        let description = BTreeSet::from([t.action.clone()]);
        let mut placed = false;
        for c in clusters.iter_mut().filter(|c| c.action == t.action.predicate) {
            let canon = &c.members[0];
            let canon_effect = canon.transition.effect();
            let canon_desc = BTreeSet::from([canon.transition.action.clone()]);
            let phi = unify_groups_with(
                &[&canon_effect.add, &canon_effect.del, &canon_desc],
                &[&effect.add, &effect.del, &description],
                |l, r| l.ty() == r.ty(),
            );
            if let Some(phi) = phi {
                let binding = canon
                    .binding
                    .iter()
                    .map(|o| phi.apply_term(&Term::Object(o.clone())).as_object().unwrap().clone())
                    .collect();
                c.members.push(Member { transition: t.clone(), binding });
                placed = true;
                break;
            }
        }
        if !placed {
            let objects = variables_for(t, &effect);
            let params: Vec<Variable> =
                objects.iter().enumerate().map(|(i, o)| Variable::new(i, o.ty.clone())).collect();
            let member = Member { transition: t.clone(), binding: objects };
            let lift = member.lifting(&params);
            clusters.push(ObservationCluster {
                id: clusters.len(),
                action: t.action.predicate.clone(),
                description: lift.apply_atom(&t.action),
                effect: lift.apply_effect(&effect),
                params,
                members: vec![member],
            });
        }
    }
    clusters
}

/// Intersection of the members' lifted, parameter-scoped states.
pub fn extract_preconditions(c: &ObservationCluster) -> BTreeSet<Atom> {
    let mut states = c.members.iter().map(|m| m.lifted_state(&c.params));
    let first = states.next().unwrap_or_default();
    states.fold(first, |acc, s| acc.intersection(&s).cloned().collect())
}

pub fn create_action(c: &ObservationCluster, pre: BTreeSet<Atom>) -> ActionSchema {
    ActionSchema {
        name: format!("{}_{}", c.action, c.id),
        description: c.description.clone(),
        params: c.params.clone(),
        pre,
        effect: c.effect.clone(),
        provenance: Provenance::Individual,
        clusters: vec![c.id],
    }
}

fn schema_groups(a: &ActionSchema) -> [BTreeSet<Atom>; 3] {
    [a.effect.add.clone(), a.effect.del.clone(), BTreeSet::from([a.description.clone()])]
}

/// Groundings of `a` that reproduce the member's action description and
/// observed effect exactly, respecting parameter types.
fn member_bindings(a: &ActionSchema, m: &Member, h: &TypeHierarchy) -> Vec<Substitution> {
    let effect = m.transition.effect();
    let desc = BTreeSet::from([m.transition.action.clone()]);
    let [add, del, d] = schema_groups(a);
    let mut out = vec![];
    for_each_unifier(
        &[&add, &del, &d],
        &[&effect.add, &effect.del, &desc],
        |l, r| match (l, r) {
            (Term::Variable(v), Term::Object(o)) => h.is_subtype(&o.ty, &v.ty).unwrap_or(false),
            _ => false,
        },
        |s| {
            out.push(s);
            false
        },
    );
    out
}

/// Fraction of member transitions for which some consistent grounding of
/// `a` is applicable and reproduces the observed effect.
pub fn score_action(a: &ActionSchema, clusters: &[&ObservationCluster], h: &TypeHierarchy) -> f64 {
    let members: Vec<&Member> = clusters.iter().flat_map(|c| &c.members).collect();
    if members.is_empty() {
        return 0.0;
    }
    let hits = members
        .iter()
        .filter(|m| member_bindings(a, m, h).iter().any(|s| m.transition.before.is_superset_of(&s.apply_atoms(&a.pre))))
        .count();
    hits as f64 / members.len() as f64
}

/// Generalized parameter types for a pair of schemas, plus the renaming
/// that maps `a_j`'s variables onto `a_i`'s (already retyped).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenPars {
    pub types: Vec<String>,
    pub rename_j: Substitution,
}

/// Parameter correspondence comes from the smallest bijection between the
/// lifted effects and descriptions; each pair is typed by its LCA.
pub fn create_gen_pars(a_i: &ActionSchema, a_j: &ActionSchema, h: &TypeHierarchy) -> Option<GenPars> {
    if a_i.params.len() != a_j.params.len() || a_i.effect.signature() != a_j.effect.signature() {
        return None;
    }
    let gi = schema_groups(a_i);
    let gj = schema_groups(a_j);
    let phi = unify_groups(&[&gi[0], &gi[1], &gi[2]], &[&gj[0], &gj[1], &gj[2]])?;
    let mut types = Vec::with_capacity(a_i.params.len());
    let mut pairs = vec![];
    for p in &a_i.params {
        let q = phi.get(&Term::Variable(p.clone()))?.as_variable()?.clone();
        types.push(h.lca(&p.ty, &q.ty).ok()?.to_string());
        pairs.push((p.index, q));
    }
    let rename_j = pairs
        .into_iter()
        .map(|(i, q)| (Term::Variable(q), Term::Variable(Variable::new(i, types[i].clone()))))
        .collect();
    Some(GenPars { types, rename_j })
}

/// `{ (pre_i ∩ pre_j) ∪ e | e ∈ P(d) }` with `d` the symmetric difference,
/// ordered by `|e|` then lexicographically.
pub fn candidate_preconditions(pre_i: &BTreeSet<Atom>, pre_j: &BTreeSet<Atom>) -> Result<Vec<BTreeSet<Atom>>> {
    let common: BTreeSet<Atom> = pre_i.intersection(pre_j).cloned().collect();
    let d: Vec<&Atom> = pre_i.symmetric_difference(pre_j).collect::<BTreeSet<_>>().into_iter().collect();
    if d.len() > MAX_PRECONDITION_DIFF {
        return Err(Error::PreconditionBlowup(d.len()));
    }
    let mut out = Vec::with_capacity(1 << d.len());
    for k in 0..=d.len() {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let mut cand = common.clone();
            cand.extend(idx.iter().map(|&i| d[i].clone()));
            out.push(cand);
            // next k-combination in lexicographic order
            let mut pos = k;
            while pos > 0 && idx[pos - 1] == d.len() - k + pos - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            idx[pos - 1] += 1;
            for q in pos..k {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSchema {
    pub schema: ActionSchema,
    pub score: f64,
    pub clusters: Vec<usize>,
}

/// Builds the generalized schema with the best-scoring candidate
/// preconditions. Ties prefer more preconditions, then enumeration order.
pub fn create_gen_action(
    a_i: &ActionSchema,
    a_j: &ActionSchema,
    pars: &GenPars,
    clusters: &[&ObservationCluster],
    h: &TypeHierarchy,
) -> Result<ScoredSchema> {
    let gi = a_i.retyped(&pars.types);
    let pre_j = pars.rename_j.apply_atoms(&a_j.pre);
    let candidates = candidate_preconditions(&gi.pre, &pre_j)?;

    let mut support: Vec<usize> = a_i.clusters.iter().chain(&a_j.clusters).copied().collect();
    support.sort_unstable();
    support.dedup();
    let mut template =
        ActionSchema { provenance: Provenance::Generalized, clusters: support.clone(), pre: BTreeSet::new(), ..gi };

    // Bindings do not depend on the preconditions; compute them once.
    let members: Vec<&Member> = clusters.iter().flat_map(|c| &c.members).collect();
    let sigmas: Vec<Vec<Substitution>> = members.iter().map(|m| member_bindings(&template, m, h)).collect();

    let total = sigmas.len().max(1) as f64;
    let mut best: Option<(f64, usize, usize)> = None;
    for (ci, cand) in candidates.iter().enumerate() {
        let hits = members
            .iter()
            .zip(&sigmas)
            .filter(|(m, ss)| ss.iter().any(|s| cand.iter().all(|a| m.transition.before.contains(&s.apply_atom(a)))))
            .count();
        let score = hits as f64 / total;
        let better = match best {
            None => true,
            Some((bs, blen, _)) => score > bs || (score == bs && cand.len() > blen),
        };
        if better {
            best = Some((score, cand.len(), ci));
        }
    }
    let (score, _, ci) = best.expect("at least one candidate");
    template.pre = candidates[ci].clone();
    Ok(ScoredSchema { schema: template, score, clusters: support })
}

/// Output of [`learn`]: the clusters (needed for later re-scoring) and the
/// final schema set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnedModel {
    pub clusters: Vec<ObservationCluster>,
    pub schemas: Vec<ActionSchema>,
}

impl LearnedModel {
    pub fn cluster_refs(&self, ids: &[usize]) -> Vec<&ObservationCluster> {
        ids.iter().map(|&i| &self.clusters[i]).collect()
    }
}

/// One individual schema per cluster.
pub fn learn_individual(demos: &[Demonstration]) -> LearnedModel {
    let clusters = cluster_lifted_effects(demos);
    let schemas = clusters.iter().map(|c| create_action(c, extract_preconditions(c))).collect();
    LearnedModel { clusters, schemas }
}

/// Full two-phase learning. With `generalize = false` only the individual
/// schemas are returned.
pub fn learn(demos: &[Demonstration], h: &TypeHierarchy, generalize: bool) -> Result<LearnedModel> {
    let mut model = learn_individual(demos);
    if generalize {
        model.schemas = generalize_schemas(&model.clusters, model.schemas, h)?;
    }
    Ok(model)
}

/// Pairwise merging until fixpoint. After an accepted merge the scan
/// restarts from the beginning so merged schemas can merge again.
pub fn generalize_schemas(
    clusters: &[ObservationCluster],
    mut schemas: Vec<ActionSchema>,
    h: &TypeHierarchy,
) -> Result<Vec<ActionSchema>> {
    let by_id: BTreeMap<usize, &ObservationCluster> = clusters.iter().map(|c| (c.id, c)).collect();
    let support = |a: &ActionSchema| -> Vec<&ObservationCluster> {
        a.clusters.iter().filter_map(|i| by_id.get(i).copied()).collect()
    };
    let mut merges = schemas.iter().filter(|s| s.provenance == Provenance::Generalized).count();
    'scan: loop {
        for i in 0..schemas.len() {
            for j in i + 1..schemas.len() {
                let (a_i, a_j) = (&schemas[i], &schemas[j]);
                if a_i.primitive() != a_j.primitive() {
                    continue;
                }
                let Some(pars) = create_gen_pars(a_i, a_j, h) else { continue };
                let both: Vec<&ObservationCluster> = support(a_i).into_iter().chain(support(a_j)).collect();
                let g = create_gen_action(a_i, a_j, &pars, &both, h)?;
                let v_i = score_action(a_i, &support(a_i), h);
                let v_j = score_action(a_j, &support(a_j), h);
                if g.score + 1e-12 >= (v_i + v_j) / 2.0 {
                    debug!(
                        "merge {} + {} -> score {:.3} (v_i {:.3}, v_j {:.3})",
                        a_i.name, a_j.name, g.score, v_i, v_j
                    );
                    let mut merged = g.schema;
                    merged.name = format!("{}_g{}", merged.primitive(), merges);
                    merges += 1;
                    schemas.remove(j);
                    schemas[i] = merged;
                    continue 'scan;
                }
            }
        }
        return Ok(schemas);
    }
}
