//! Breadth-first enumeration of mutation classes.
//!
//! The generators are the mutations at mutable vertices followed by the
//! adjacent transpositions of the mutable vertices, so the whole `M_n`-orbit
//! is reached, not only one component of the seed graph. Images within a BFS
//! layer are computed in parallel; discovery is merged sequentially so the
//! numbering never depends on scheduling.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::LabelledGraph;
use crate::group::Generator;
use crate::laurent::LaurentError;
use crate::perm::Perm;
use crate::quiver::{Quiver, QuiverError};
use crate::seed::{self, LabelledSeed, Limits, SeedError, SpecializedSeed};
use crate::specialize::Specialization;

pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExploreError {
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error(transparent)]
    Seed(#[from] SeedError),
}

/// Something the mutation group acts on.
pub trait Member: Clone + Send + Sync {
    fn quiver(&self) -> &Quiver;
    fn key(&self) -> [u8; 32];
    fn annotation(&self) -> String;
    fn act(&self, g: &Generator, limits: Limits) -> Result<Self, SeedError>;
}

impl Member for LabelledSeed {
    fn quiver(&self) -> &Quiver {
        LabelledSeed::quiver(self)
    }

    fn key(&self) -> [u8; 32] {
        self.digest()
    }

    fn annotation(&self) -> String {
        self.render()
    }

    fn act(&self, g: &Generator, limits: Limits) -> Result<Self, SeedError> {
        self.apply_generator(g, limits)
    }
}

impl Member for Quiver {
    fn quiver(&self) -> &Quiver {
        self
    }

    fn key(&self) -> [u8; 32] {
        let mut h = <sha2::Sha256 as sha2::Digest>::new();
        seed::feed_quiver(&mut h, self);
        sha2::Digest::finalize(h).into()
    }

    fn annotation(&self) -> String {
        self.to_string()
    }

    fn act(&self, g: &Generator, _limits: Limits) -> Result<Self, SeedError> {
        Ok(match g {
            Generator::Mutation(i) => self.mutate(*i)?,
            Generator::Permutation(p) => self.permute(p)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Seed,
    Quiver,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Closed,
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Halt {
    /// The vertex budget was reached.
    VertexBudget,
    /// A cluster variable grew past the term-work limit.
    TermLimit,
    /// An arrow multiplicity left the 64-bit range.
    Overflow,
}

#[derive(Clone, Copy, Debug)]
pub struct ExploreOptions {
    pub budget: usize,
    pub limits: Limits,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions { budget: DEFAULT_BUDGET, limits: Limits::default() }
    }
}

impl ExploreOptions {
    pub fn with_budget(budget: usize) -> Self {
        ExploreOptions { budget, ..Self::default() }
    }
}

/// Serializable summary of an exploration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationReport {
    pub level: Level,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halt: Option<Halt>,
    pub seed_count: usize,
    pub max_arrow_multiplicity: i64,
    pub frontier_depth: usize,
    pub graph: LabelledGraph,
}

/// Full exploration result: the members in discovery order, the action of
/// every generator, and the labelled graph of mutation edges.
#[derive(Clone, Debug)]
pub struct Exploration<T> {
    pub members: Vec<T>,
    pub generators: Vec<Generator>,
    /// `action[v][k]` is the index of `members[v] · generators[k]`, when known.
    pub action: Vec<Vec<Option<usize>>>,
    pub graph: LabelledGraph,
    pub status: Status,
    pub halt: Option<Halt>,
    pub depth: usize,
    pub level: Level,
}

/// The exploration generators for `q`: mutations, then adjacent transpositions
/// of consecutive mutable vertices.
pub fn generators(q: &Quiver) -> Vec<Generator> {
    let mutable = q.mutable_vertices();
    let mut out: Vec<Generator> = mutable.iter().map(|&i| Generator::Mutation(i)).collect();
    for w in mutable.windows(2) {
        out.push(Generator::Permutation(Perm::transposition(q.n(), w[0], w[1])));
    }
    out
}

pub fn explore_seeds(s0: &LabelledSeed, opts: ExploreOptions) -> Result<Exploration<LabelledSeed>, ExploreError> {
    explore(s0.clone(), opts, Level::Seed)
}

pub fn explore_quivers(q0: &Quiver, opts: ExploreOptions) -> Result<Exploration<Quiver>, ExploreError> {
    explore(q0.clone(), opts, Level::Quiver)
}

fn explore<T: Member>(start: T, opts: ExploreOptions, level: Level) -> Result<Exploration<T>, ExploreError> {
    if opts.budget == 0 {
        return Err(ExploreError::ZeroBudget);
    }
    let gens = generators(start.quiver());
    let mut index: HashMap<[u8; 32], usize> = HashMap::new();
    index.insert(start.key(), 0);
    let mut members = vec![start];
    let mut action: Vec<Vec<Option<usize>>> = vec![vec![None; gens.len()]];
    let mut layer: Vec<usize> = vec![0];
    let mut depth = 0;
    let mut halt = None;

    'layers: while !layer.is_empty() {
        let images: Vec<Vec<Result<(T, [u8; 32]), SeedError>>> = layer
            .par_iter()
            .map(|&v| {
                gens.iter()
                    .map(|g| members[v].act(g, opts.limits).map(|m| {
                        let k = m.key();
                        (m, k)
                    }))
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        for (&v, row) in layer.iter().zip(images) {
            for (k, img) in row.into_iter().enumerate() {
                let (m, key) = match img {
                    Ok(x) => x,
                    Err(SeedError::Laurent(LaurentError::TermLimit { .. })) => {
                        halt = Some(Halt::TermLimit);
                        break 'layers;
                    }
                    Err(SeedError::Quiver(QuiverError::Overflow(_))) => {
                        halt = Some(Halt::Overflow);
                        break 'layers;
                    }
                    Err(e) => return Err(e.into()),
                };
                let w = match index.get(&key) {
                    Some(&w) => w,
                    None => {
                        if members.len() >= opts.budget {
                            halt = Some(Halt::VertexBudget);
                            break 'layers;
                        }
                        let w = members.len();
                        index.insert(key, w);
                        members.push(m);
                        action.push(vec![None; gens.len()]);
                        next.push(w);
                        w
                    }
                };
                action[v][k] = Some(w);
            }
        }
        layer = next;
        if !layer.is_empty() {
            depth += 1;
        }
    }

    let status = if halt.is_some() { Status::BudgetExhausted } else { Status::Closed };
    let graph = mutation_graph(&members, &gens, &action);
    Ok(Exploration { members, generators: gens, action, graph, status, halt, depth, level })
}

fn mutation_graph<T: Member>(members: &[T], gens: &[Generator], action: &[Vec<Option<usize>>]) -> LabelledGraph {
    let mut g = LabelledGraph::new();
    for m in members {
        g.add_vertex(crate::seed::hex(&m.key()), m.annotation());
    }
    for (u, row) in action.iter().enumerate() {
        for (k, gen) in gens.iter().enumerate() {
            if let (Generator::Mutation(i), Some(v)) = (gen, row[k]) {
                if u <= v {
                    g.add_edge(u, v, i + 1);
                }
            }
        }
    }
    g
}

impl<T: Member> Exploration<T> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.status == Status::Closed
    }

    pub fn rank(&self) -> usize {
        self.members[0].quiver().n()
    }

    /// One-based labels carried by mutation edges.
    pub fn mutation_labels(&self) -> Vec<usize> {
        self.members[0].quiver().mutable_vertices().iter().map(|i| i + 1).collect()
    }

    pub fn max_arrow_multiplicity(&self) -> i64 {
        self.members.iter().map(|m| m.quiver().max_multiplicity()).max().unwrap_or(0)
    }

    /// Index of the generator `μ_i`, if `i` is mutable.
    pub fn mutation_slot(&self, i: usize) -> Option<usize> {
        self.generators.iter().position(|g| g == &Generator::Mutation(i))
    }

    pub fn find(&self, key: &[u8; 32]) -> Option<usize> {
        self.members.iter().position(|m| &m.key() == key)
    }

    /// Every action entry present and every image in range.
    pub fn is_action_complete(&self) -> bool {
        self.action.iter().all(|row| row.iter().all(|x| matches!(x, Some(w) if *w < self.members.len())))
    }

    pub fn report(&self) -> ExplorationReport {
        ExplorationReport {
            level: self.level,
            status: self.status,
            halt: self.halt,
            seed_count: self.members.len(),
            max_arrow_multiplicity: self.max_arrow_multiplicity(),
            frontier_depth: self.depth,
            graph: self.graph.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smallness {
    Small,
    NotSmall,
    Unknown,
}

/// Decides whether only finitely many quivers occur in the class of `q0`.
///
/// Two mutable vertices always give a small class. With three or more, an
/// arrow of multiplicity above 2 anywhere in the class rules it out; a closed
/// quiver exploration settles it the other way.
pub fn is_small(q0: &Quiver, budget: usize) -> Smallness {
    if q0.mutable_vertices().len() <= 2 {
        return Smallness::Small;
    }
    if q0.max_multiplicity() > 2 {
        return Smallness::NotSmall;
    }
    match explore_quivers(q0, ExploreOptions::with_budget(budget.max(1))) {
        Ok(ex) if ex.max_arrow_multiplicity() > 2 => Smallness::NotSmall,
        Ok(ex) if ex.is_closed() => Smallness::Small,
        _ => Smallness::Unknown,
    }
}

impl From<QuiverError> for ExploreError {
    fn from(e: QuiverError) -> Self {
        ExploreError::Seed(SeedError::Quiver(e))
    }
}

/// Result of [`count_specialized`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedLowerBound {
    /// Distinct specialized seeds found; the class has at least this many seeds.
    pub at_least: usize,
    /// The search ran out of new images before reaching the limit. This is
    /// not a proof of finiteness, since distinct seeds may share an image.
    pub exhausted: bool,
    pub depth: usize,
}

/// Breadth-first search over specialized seeds, stopping at `limit` distinct
/// images. Distinct images certify distinct seeds, so the count is a lower
/// bound on the class size that stays cheap where exact variables grow.
pub fn count_specialized(s0: &LabelledSeed, spec: &Specialization, limit: usize) -> Result<SeedLowerBound, ExploreError> {
    if limit == 0 {
        return Err(ExploreError::ZeroBudget);
    }
    let gens = generators(s0.quiver());
    let root = SpecializedSeed::new(s0, spec);
    let mut seen: HashSet<SpecializedSeed> = HashSet::from([root.clone()]);
    let mut layer = vec![root];
    let mut depth = 0;
    while !layer.is_empty() && seen.len() < limit {
        let mut next = Vec::new();
        'layer: for s in &layer {
            for g in &gens {
                let t = match g {
                    Generator::Mutation(i) => match s.mutate(*i).map_err(SeedError::from)? {
                        Some(t) => t,
                        // a vanishing value: skip, the count stays a lower bound
                        None => continue,
                    },
                    Generator::Permutation(p) => s.permute(p),
                };
                if seen.insert(t.clone()) {
                    next.push(t);
                    if seen.len() >= limit {
                        break 'layer;
                    }
                }
            }
        }
        if !next.is_empty() {
            depth += 1;
        }
        layer = next;
    }
    Ok(SeedLowerBound { at_least: seen.len(), exhausted: seen.len() < limit, depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::LaurentPoly;

    fn a2() -> Quiver {
        Quiver::from_arrows(2, &[(0, 1, 1)]).unwrap()
    }

    #[test]
    fn a2_seed_class_is_a_decagon() {
        let ex = explore_seeds(&LabelledSeed::initial(a2()), ExploreOptions::default()).unwrap();
        assert!(ex.is_closed());
        assert_eq!(ex.len(), 10);
        assert_eq!(ex.graph.num_edges(), 10);
        assert!(ex.graph.is_regular(&[1, 2]));
        assert_eq!(ex.graph.components().len(), 1);
        assert!(ex.is_action_complete());
    }

    #[test]
    fn a1_has_two_seeds() {
        let q = Quiver::from_arrows(1, &[]).unwrap();
        let ex = explore_seeds(&LabelledSeed::initial(q), ExploreOptions::default()).unwrap();
        assert_eq!(ex.len(), 2);
        assert_eq!(ex.members[1].cluster()[0], LaurentPoly::parse("2*x1^-1", 1).unwrap());
    }

    #[test]
    fn quiver_level() {
        let ex = explore_quivers(&a2(), ExploreOptions::default()).unwrap();
        assert_eq!(ex.len(), 2);
        let markov = Quiver::from_arrows(3, &[(0, 1, 3), (1, 2, 3), (2, 0, 3)]).unwrap();
        let ex = explore_quivers(&markov, ExploreOptions::with_budget(1000)).unwrap();
        assert_eq!(ex.status, Status::BudgetExhausted);
        // multiplicities leave i64 within a few layers
        assert!(matches!(ex.halt, Some(Halt::VertexBudget | Halt::Overflow)));
        assert!(ex.max_arrow_multiplicity() > 1000);
        let ex = explore_quivers(&markov, ExploreOptions::with_budget(50)).unwrap();
        assert_eq!(ex.halt, Some(Halt::VertexBudget));
    }

    #[test]
    fn deterministic_numbering() {
        let q = Quiver::from_arrows(3, &[(0, 1, 1), (1, 2, 1)]).unwrap();
        let a = explore_seeds(&LabelledSeed::initial(q.clone()), ExploreOptions::default()).unwrap();
        let b = explore_seeds(&LabelledSeed::initial(q), ExploreOptions::default()).unwrap();
        assert_eq!(a.report(), b.report());
        assert_eq!(a.len(), 84);
    }

    #[test]
    fn smallness() {
        let a3 = Quiver::from_arrows(3, &[(0, 1, 1), (1, 2, 1)]).unwrap();
        assert_eq!(is_small(&a3, 1000), Smallness::Small);
        let markov = Quiver::from_arrows(3, &[(0, 1, 3), (1, 2, 3), (2, 0, 3)]).unwrap();
        assert_eq!(is_small(&markov, 1000), Smallness::NotSmall);
        let kronecker = Quiver::from_arrows(2, &[(0, 1, 2)]).unwrap();
        assert_eq!(is_small(&kronecker, 1), Smallness::Small);
    }

    #[test]
    fn zero_budget() {
        assert!(matches!(explore_quivers(&a2(), ExploreOptions::with_budget(0)), Err(ExploreError::ZeroBudget)));
    }

    #[test]
    fn specialized_lower_bounds() {
        let spec = Specialization::standard(2, 5);
        let a2 = LabelledSeed::initial(crate::io::preset("A2").unwrap());
        let b = count_specialized(&a2, &spec, 1000).unwrap();
        assert_eq!((b.at_least, b.exhausted), (10, true));
        let kr = LabelledSeed::initial(crate::io::preset("kronecker2").unwrap());
        let b = count_specialized(&kr, &spec, 3000).unwrap();
        assert_eq!((b.at_least, b.exhausted), (3000, false));
    }
}
