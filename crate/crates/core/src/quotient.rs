//! Equivalence relations on closed classes, quotient graphs and the groups
//! of `M_n`-equivariant bijections whose orbits are the classes.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explore::{Exploration, Level, Member};
use crate::graph::LabelledGraph;
use crate::group::GroupElement;
use crate::perm::Perm;
use crate::quiver::Quiver;
use crate::seed::{self, LabelledSeed, SeedError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuotientError {
    #[error("the exploration did not close")]
    NotClosed,
    #[error("relation {0} needs a seed-level exploration")]
    RequiresSeedLevel(Relation),
    #[error("relation is not homogeneous: member {member} and its class disagree on label {label}")]
    NotHomogeneous { member: usize, label: usize },
    #[error("propagation conflict from seed {base} to seed {target}: the relation is not regular")]
    PropagationConflict { base: usize, target: usize },
    #[error("automorphism {base} -> {target} leaves the class of seed {moved}")]
    NotClassPreserving { base: usize, target: usize, moved: usize },
    #[error("seed index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("quiver does not occur in the class")]
    QuiverAbsent,
    #[error("target quivers differ")]
    TargetMismatch,
    #[error(transparent)]
    Seed(#[from] SeedError),
}

pub type Result<T> = std::result::Result<T, QuotientError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// Equal quivers.
    SameQuiver,
    /// Quivers equal after reversing some connected components.
    Similar,
    /// Equal stabilizers in `M_n`.
    SameStabilizer,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::SameQuiver => "same-quiver",
            Relation::Similar => "similar",
            Relation::SameStabilizer => "same-stabilizer",
        })
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "same-quiver" => Ok(Relation::SameQuiver),
            "similar" => Ok(Relation::Similar),
            "same-stabilizer" => Ok(Relation::SameStabilizer),
            _ => Err(format!("unknown relation {s:?}; expected same-quiver, similar or same-stabilizer")),
        }
    }
}

/// Classes numbered by their least member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub class_of: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
}

impl Partition {
    fn from_keys<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>) -> Self {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let mut class_of = Vec::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (v, k) in keys.enumerate() {
            let next = ids.len();
            let c = *ids.entry(k).or_insert(next);
            if c == classes.len() {
                classes.push(Vec::new());
            }
            classes[c].push(v);
            class_of.push(c);
        }
        Partition { class_of, classes }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

fn require_closed<T: Member>(ex: &Exploration<T>) -> Result<()> {
    if ex.is_closed() && ex.is_action_complete() {
        Ok(())
    } else {
        Err(QuotientError::NotClosed)
    }
}

pub fn partition<T: Member>(ex: &Exploration<T>, rel: Relation) -> Result<Partition> {
    require_closed(ex)?;
    match rel {
        Relation::SameQuiver => Ok(Partition::from_keys(ex.members.iter().map(|m| m.quiver().clone()))),
        Relation::Similar => Ok(Partition::from_keys(ex.members.iter().map(|m| m.quiver().similarity_key()))),
        Relation::SameStabilizer => {
            if ex.level != Level::Seed {
                return Err(QuotientError::RequiresSeedLevel(rel));
            }
            let mut reps: Vec<usize> = Vec::new();
            let mut keys = Vec::with_capacity(ex.len());
            for v in 0..ex.len() {
                match reps.iter().position(|&r| same_stabilizer_unchecked(ex, r, v)) {
                    Some(c) => keys.push(c),
                    None => {
                        keys.push(reps.len());
                        reps.push(v);
                    }
                }
            }
            Ok(Partition::from_keys(keys.into_iter()))
        }
    }
}

/// The quotient labelled graph: one vertex per class, an `i`-edge from `[s]`
/// to `[s·μ_i]`. Fails if members of one class disagree on a neighbour class.
pub fn quotient_graph<T: Member>(ex: &Exploration<T>, rel: Relation) -> Result<(LabelledGraph, Partition)> {
    let part = partition(ex, rel)?;
    let mut g = LabelledGraph::new();
    for class in &part.classes {
        let rep = &ex.members[class[0]];
        let q = rep.quiver();
        let digest = match rel {
            Relation::SameQuiver => seed::quiver_digest_hex(q),
            Relation::Similar => seed::quiver_digest_hex(&q.similarity_key()),
            Relation::SameStabilizer => seed::hex(&rep.key()),
        };
        g.add_vertex(digest, q.to_string());
    }
    for (c, class) in part.classes.iter().enumerate() {
        for (k, gen) in ex.generators.iter().enumerate() {
            let crate::group::Generator::Mutation(i) = gen else { continue };
            let target = part.class_of[ex.action[class[0]][k].expect("closed")];
            for &m in class {
                if part.class_of[ex.action[m][k].expect("closed")] != target {
                    return Err(QuotientError::NotHomogeneous { member: m, label: i + 1 });
                }
            }
            if c <= target {
                g.add_edge(c, target, i + 1);
            }
        }
    }
    Ok((g, part))
}

fn same_stabilizer_unchecked<T: Member>(ex: &Exploration<T>, s1: usize, s2: usize) -> bool {
    if s1 == s2 {
        return true;
    }
    let n = ex.len();
    let mut seen = vec![false; n * n];
    let mut queue = VecDeque::from([(s1, s2)]);
    seen[s1 * n + s2] = true;
    while let Some((a, b)) = queue.pop_front() {
        for k in 0..ex.generators.len() {
            let a2 = ex.action[a][k].expect("closed");
            let b2 = ex.action[b][k].expect("closed");
            if (a2 == s1) != (b2 == s2) {
                return false;
            }
            if !std::mem::replace(&mut seen[a2 * n + b2], true) {
                queue.push_back((a2, b2));
            }
        }
    }
    true
}

/// Whether `s1` and `s2` have the same stabilizer, by reachability in the
/// product of the action graph with itself.
pub fn same_stabilizer(ex: &Exploration<LabelledSeed>, s1: usize, s2: usize) -> Result<bool> {
    require_closed(ex)?;
    for s in [s1, s2] {
        if s >= ex.len() {
            return Err(QuotientError::IndexOutOfRange(s));
        }
    }
    Ok(same_stabilizer_unchecked(ex, s1, s2))
}

/// Pairs where stabilizer equality and quiver similarity disagree, over all
/// ordered pairs of the class.
pub fn stabilizer_similarity_mismatches(ex: &Exploration<LabelledSeed>) -> Result<Vec<(usize, usize)>> {
    require_closed(ex)?;
    let n = ex.len();
    let keys: Vec<Quiver> = ex.members.iter().map(|m| m.quiver().similarity_key()).collect();
    Ok((0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let keys = &keys;
            (0..n).filter_map(move |b| {
                let same = same_stabilizer_unchecked(ex, a, b);
                (same != (keys[a] == keys[b])).then_some((a, b))
            })
        })
        .collect())
}

/// The equivariant bijection with `base ↦ target`, built by
/// `φ(s·g) = φ(s)·g`. `None` when that rule is inconsistent or not injective.
fn propagate<T: Member>(ex: &Exploration<T>, base: usize, target: usize) -> Option<Perm> {
    let n = ex.len();
    let mut phi = vec![usize::MAX; n];
    let mut hit = vec![false; n];
    phi[base] = target;
    hit[target] = true;
    let mut queue = VecDeque::from([base]);
    while let Some(s) = queue.pop_front() {
        for k in 0..ex.generators.len() {
            let s2 = ex.action[s][k]?;
            let t2 = ex.action[phi[s]][k]?;
            if phi[s2] == usize::MAX {
                if std::mem::replace(&mut hit[t2], true) {
                    return None;
                }
                phi[s2] = t2;
                queue.push_back(s2);
            } else if phi[s2] != t2 {
                return None;
            }
        }
    }
    if phi.contains(&usize::MAX) {
        return None;
    }
    Perm::from_images(phi).ok()
}

/// The group of equivariant bijections sending `base` to each member of its
/// class. Its orbits are the classes of `rel` when `rel` is regular.
pub fn compute_group<T: Member>(ex: &Exploration<T>, rel: Relation, base: usize) -> Result<PermGroup> {
    let part = partition(ex, rel)?;
    if base >= ex.len() {
        return Err(QuotientError::IndexOutOfRange(base));
    }
    let class = &part.classes[part.class_of[base]];
    let mut elements = Vec::with_capacity(class.len());
    for &target in class {
        let phi = propagate(ex, base, target).ok_or(QuotientError::PropagationConflict { base, target })?;
        if let Some(moved) = (0..ex.len()).find(|&s| part.class_of[phi.apply(s)] != part.class_of[s]) {
            return Err(QuotientError::NotClassPreserving { base, target, moved });
        }
        elements.push(phi);
    }
    Ok(PermGroup::new(elements))
}

/// The point group at `q`: the same-quiver group based at any seed with quiver `q`.
pub fn point_group(ex: &Exploration<LabelledSeed>, q: &Quiver) -> Result<PermGroup> {
    require_closed(ex)?;
    let base = ex.members.iter().position(|s| s.quiver() == q).ok_or(QuotientError::QuiverAbsent)?;
    compute_group(ex, Relation::SameQuiver, base)
}

/// Whether `[q, g]` and `[q, h]` are the same morphism, i.e. both elements
/// send `q` to the same quiver and the α-tuples agree.
pub fn cmg_morphism_equal(q: &Quiver, g: &GroupElement, h: &GroupElement) -> Result<bool> {
    let s = LabelledSeed::initial(q.clone());
    let sg = s.apply(g)?;
    let sh = s.apply(h)?;
    if sg.quiver() != sh.quiver() {
        return Err(QuotientError::TargetMismatch);
    }
    Ok(sg.cluster() == sh.cluster())
}

/// A finite group of permutations of the explored members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermGroup {
    elements: Vec<Perm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupReport {
    pub order: usize,
    pub abelian: bool,
    pub cyclic: bool,
    /// element order -> number of elements of that order
    pub element_orders: BTreeMap<usize, usize>,
    /// generating set, each as the list of images of member indices
    pub generators: Vec<Vec<usize>>,
}

impl PermGroup {
    /// Elements are kept sorted so equal groups compare equal.
    pub fn new(mut elements: Vec<Perm>) -> Self {
        elements.sort();
        elements.dedup();
        PermGroup { elements }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn degree(&self) -> usize {
        self.elements.first().map(Perm::len).unwrap_or(0)
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.elements.binary_search(p).is_ok()
    }

    pub fn is_closed(&self) -> bool {
        let has_identity = self.elements.iter().any(Perm::is_identity);
        has_identity
            && self.elements.iter().all(|a| {
                self.contains(&a.inverse()) && self.elements.iter().all(|b| self.contains(&a.compose(b)))
            })
    }

    pub fn is_abelian(&self) -> bool {
        let gens = self.generators();
        gens.iter().all(|a| gens.iter().all(|b| a.compose(b) == b.compose(a)))
    }

    pub fn element_order(p: &Perm) -> usize {
        let mut k = 1;
        let mut acc = p.clone();
        while !acc.is_identity() {
            acc = acc.compose(p);
            k += 1;
        }
        k
    }

    pub fn element_orders(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for p in &self.elements {
            *out.entry(Self::element_order(p)).or_insert(0) += 1;
        }
        out
    }

    pub fn is_cyclic(&self) -> bool {
        self.elements.iter().any(|p| Self::element_order(p) == self.order())
    }

    /// No non-identity element fixes a point.
    pub fn acts_freely(&self) -> bool {
        self.elements.iter().all(|p| p.is_identity() || (0..p.len()).all(|i| p.apply(i) != i))
    }

    /// Orbits on member indices, each sorted, ordered by least member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for s in 0..self.degree() {
            if seen[s] {
                continue;
            }
            let orbit: BTreeSet<usize> = self.elements.iter().map(|p| p.apply(s)).collect();
            for &t in &orbit {
                seen[t] = true;
            }
            out.push(orbit.into_iter().collect());
        }
        out
    }

    /// A generating set chosen greedily in element order.
    pub fn generators(&self) -> Vec<Perm> {
        let mut gens: Vec<Perm> = Vec::new();
        let mut span: BTreeSet<Perm> = self.elements.iter().filter(|p| p.is_identity()).cloned().collect();
        for p in &self.elements {
            if span.contains(p) {
                continue;
            }
            gens.push(p.clone());
            let mut queue: VecDeque<Perm> = span.iter().cloned().collect();
            while let Some(x) = queue.pop_front() {
                for g in &gens {
                    let y = x.compose(g);
                    if span.insert(y.clone()) {
                        queue.push_back(y);
                    }
                }
            }
        }
        gens
    }

    /// `table[a][b]` is the index of `elements[a] ∘ elements[b]`.
    pub fn composition_table(&self) -> Vec<Vec<usize>> {
        self.elements
            .iter()
            .map(|a| {
                self.elements
                    .iter()
                    .map(|b| self.elements.binary_search(&a.compose(b)).expect("closed under composition"))
                    .collect()
            })
            .collect()
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.elements.iter().all(|p| other.contains(p))
    }

    /// `[other : self]`, when `self` is a subgroup.
    pub fn index_in(&self, other: &PermGroup) -> Option<usize> {
        (self.is_subgroup_of(other) && other.order().is_multiple_of(self.order())).then(|| other.order() / self.order())
    }

    pub fn is_normal_in(&self, other: &PermGroup) -> bool {
        self.is_subgroup_of(other)
            && other.generators().iter().all(|g| {
                let gi = g.inverse();
                self.elements.iter().all(|h| self.contains(&g.compose(h).compose(&gi)))
            })
    }

    pub fn report(&self) -> GroupReport {
        GroupReport {
            order: self.order(),
            abelian: self.is_abelian(),
            cyclic: self.is_cyclic(),
            element_orders: self.element_orders(),
            generators: self.generators().iter().map(|p| p.images().to_vec()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::{explore_quivers, explore_seeds, ExploreOptions};

    fn class(q: Quiver) -> Exploration<LabelledSeed> {
        explore_seeds(&LabelledSeed::initial(q), ExploreOptions::default()).unwrap()
    }

    fn a2() -> Quiver {
        Quiver::from_arrows(2, &[(0, 1, 1)]).unwrap()
    }

    #[test]
    fn a2_quotients() {
        let ex = class(a2());
        let (g, p) = quotient_graph(&ex, Relation::SameQuiver).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.edges.iter().filter(|e| e.u != e.v).count(), 2);
        let (g, _) = quotient_graph(&ex, Relation::Similar).unwrap();
        assert_eq!(g.num_vertices(), 1);
        assert_eq!(g.loops().count(), 2);
        let (s, _) = quotient_graph(&ex, Relation::SameStabilizer).unwrap();
        assert_eq!((s.num_vertices(), &s.edges), (1, &g.edges));
    }

    #[test]
    fn a2_groups() {
        let ex = class(a2());
        let w_plus = compute_group(&ex, Relation::SameQuiver, 0).unwrap();
        let w = compute_group(&ex, Relation::Similar, 0).unwrap();
        assert_eq!((w_plus.order(), w_plus.is_cyclic()), (5, true));
        assert_eq!((w.order(), w.is_abelian()), (10, false));
        assert_eq!(w.element_orders(), BTreeMap::from([(1, 1), (2, 5), (5, 4)]));
        assert!(w.is_closed() && w.acts_freely());
        assert_eq!(w_plus.index_in(&w), Some(2));
        assert!(w_plus.is_normal_in(&w));
        assert_eq!(w.composition_table().len(), 10);
        assert_eq!(point_group(&ex, &a2()).unwrap(), w_plus);
    }

    #[test]
    fn stabilizers_in_a2_and_a3() {
        let ex = class(a2());
        let mu1 = ex.action[0][ex.mutation_slot(0).unwrap()].unwrap();
        // the two quivers of A2 are similar, so every pair shares a stabilizer
        assert!(same_stabilizer(&ex, 0, mu1).unwrap());
        assert!(stabilizer_similarity_mismatches(&ex).unwrap().is_empty());

        let a3 = class(Quiver::from_arrows(3, &[(0, 1, 1), (1, 2, 1)]).unwrap());
        let s2 = a3.action[0][a3.mutation_slot(1).unwrap()].unwrap();
        assert!(!a3.members[0].quiver().similar(a3.members[s2].quiver()));
        assert!(!same_stabilizer(&a3, 0, s2).unwrap());
    }

    #[test]
    fn a1_point_group() {
        let ex = class(Quiver::from_arrows(1, &[]).unwrap());
        let g = point_group(&ex, ex.members[0].quiver()).unwrap();
        assert_eq!(g.order(), 2);
    }

    #[test]
    fn morphism_equality() {
        let id = GroupElement::identity(2);
        let five = GroupElement::parse("m1 m2", 2).unwrap().pow(5);
        assert!(cmg_morphism_equal(&a2(), &id, &five).unwrap());
        assert!(cmg_morphism_equal(&a2(), &id, &GroupElement::from_word(2, &[0, 0])).unwrap());
        let twice = GroupElement::parse("m1 m2", 2).unwrap().pow(2);
        assert!(!cmg_morphism_equal(&a2(), &id, &twice).unwrap());
        let mu = GroupElement::parse("m1 m2", 2).unwrap();
        assert!(!cmg_morphism_equal(&a2(), &mu, &id).unwrap());
        let m1 = GroupElement::mutation(2, 0);
        assert_eq!(cmg_morphism_equal(&a2(), &m1, &id), Err(QuotientError::TargetMismatch));
    }

    #[test]
    fn precondition_errors() {
        let markov = Quiver::from_arrows(3, &[(0, 1, 3), (1, 2, 3), (2, 0, 3)]).unwrap();
        let ex = explore_seeds(&LabelledSeed::initial(markov), ExploreOptions::with_budget(20)).unwrap();
        assert_eq!(same_stabilizer(&ex, 0, 1), Err(QuotientError::NotClosed));
        let qx = explore_quivers(&a2(), ExploreOptions::default()).unwrap();
        assert_eq!(
            partition(&qx, Relation::SameStabilizer),
            Err(QuotientError::RequiresSeedLevel(Relation::SameStabilizer))
        );
        assert_eq!("similar".parse::<Relation>(), Ok(Relation::Similar));
        assert!("nope".parse::<Relation>().is_err());
    }
}
