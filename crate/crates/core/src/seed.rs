//! Labelled seeds and the right action of `M_n` on them.

use num_bigint::BigInt;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{Generator, GroupElement};
use crate::laurent::{LaurentError, LaurentPoly, UNLIMITED};
use crate::perm::Perm;
use crate::quiver::{mutate_exchange, Quiver, QuiverError};
use crate::specialize::{self, Specialization, Values};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeedError {
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error("cluster has {got} entries, quiver has {expected} vertices")]
    ClusterLength { expected: usize, got: usize },
    #[error("cluster entry {0} is zero")]
    ZeroEntry(usize),
    #[error("cluster entries live in different rings")]
    AmbientMismatch,
    #[error("group element has rank {got}, seed has rank {expected}")]
    Rank { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, SeedError>;

/// Bounds the cost of computing exchange binomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest number of coefficient multiplications allowed in one product.
    pub max_work: usize,
}

impl Limits {
    pub const NONE: Limits = Limits { max_work: UNLIMITED };
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_work: 2_000_000 }
    }
}

/// A quiver on `{1..n}` together with an `n`-tuple of cluster variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelledSeed {
    quiver: Quiver,
    cluster: Vec<LaurentPoly>,
}

impl LabelledSeed {
    pub fn new(quiver: Quiver, cluster: Vec<LaurentPoly>) -> Result<Self> {
        if cluster.len() != quiver.n() {
            return Err(SeedError::ClusterLength { expected: quiver.n(), got: cluster.len() });
        }
        if let Some(i) = cluster.iter().position(LaurentPoly::is_zero) {
            return Err(SeedError::ZeroEntry(i));
        }
        if let Some(first) = cluster.first() {
            if cluster.iter().any(|p| p.nvars() != first.nvars()) {
                return Err(SeedError::AmbientMismatch);
            }
        }
        Ok(LabelledSeed { quiver, cluster })
    }

    /// The seed `(Q, (x_1, ..., x_n))`.
    pub fn initial(quiver: Quiver) -> Self {
        let n = quiver.n();
        let cluster = (0..n).map(|i| LaurentPoly::variable(n, i)).collect();
        LabelledSeed { quiver, cluster }
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn cluster(&self) -> &[LaurentPoly] {
        &self.cluster
    }

    pub fn rank(&self) -> usize {
        self.quiver.n()
    }

    pub fn ambient(&self) -> usize {
        self.cluster.first().map(|p| p.nvars()).unwrap_or(0)
    }

    /// The two monomials `prod_k β_k^{a_ki}` and `prod_k β_k^{a_ik}`.
    pub fn exchange_monomials(&self, i: usize, limits: Limits) -> Result<(LaurentPoly, LaurentPoly)> {
        let m = self.ambient();
        let mut inward = LaurentPoly::one(m);
        let mut outward = LaurentPoly::one(m);
        for k in 0..self.rank() {
            let a_in = self.quiver.arrows(k, i);
            let a_out = self.quiver.arrows(i, k);
            if a_in > 0 {
                let p = self.cluster[k].pow_limited(a_in as u32, limits.max_work)?;
                inward = inward.mul_limited(&p, limits.max_work)?;
            }
            if a_out > 0 {
                let p = self.cluster[k].pow_limited(a_out as u32, limits.max_work)?;
                outward = outward.mul_limited(&p, limits.max_work)?;
            }
        }
        Ok((inward, outward))
    }

    pub fn mutate(&self, i: usize) -> Result<Self> {
        self.mutate_limited(i, Limits::NONE)
    }

    /// `β'_i = (prod β_k^{a_ki} + prod β_k^{a_ik}) / β_i`, quiver mutated at `i`.
    pub fn mutate_limited(&self, i: usize, limits: Limits) -> Result<Self> {
        let quiver = self.quiver.mutate(i)?;
        let (inward, outward) = self.exchange_monomials(i, limits)?;
        let numerator = inward.add(&outward)?;
        let fresh = numerator.exact_div_limited(&self.cluster[i], limits.max_work)?;
        let mut cluster = self.cluster.clone();
        cluster[i] = fresh;
        Ok(LabelledSeed { quiver, cluster })
    }

    /// `(Q^σ, β^σ)` with `β^σ_i = β_{σ(i)}`.
    pub fn permute(&self, sigma: &Perm) -> Result<Self> {
        let quiver = self.quiver.permute(sigma)?;
        let cluster = (0..self.rank()).map(|i| self.cluster[sigma.apply(i)].clone()).collect();
        Ok(LabelledSeed { quiver, cluster })
    }

    pub fn apply_generator(&self, g: &Generator, limits: Limits) -> Result<Self> {
        match g {
            Generator::Mutation(i) => self.mutate_limited(*i, limits),
            Generator::Permutation(p) => self.permute(p),
        }
    }

    /// Right action of a group element: mutations in word order, then the permutation.
    pub fn apply(&self, g: &GroupElement) -> Result<Self> {
        self.apply_limited(g, Limits::NONE)
    }

    pub fn apply_limited(&self, g: &GroupElement, limits: Limits) -> Result<Self> {
        if g.rank() != self.rank() {
            return Err(SeedError::Rank { expected: self.rank(), got: g.rank() });
        }
        self.quiver.check_perm(g.perm())?;
        let mut s = self.clone();
        for &i in g.word() {
            s = s.mutate_limited(i, limits)?;
        }
        if !g.perm().is_identity() {
            s = s.permute(g.perm())?;
        }
        Ok(s)
    }

    /// SHA-256 over the exchange matrix, frozen set and cluster term streams.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        feed_quiver(&mut h, &self.quiver);
        for p in &self.cluster {
            p.feed_digest(&mut h);
        }
        h.finalize().into()
    }

    pub fn digest_hex(&self) -> String {
        hex(&self.digest())
    }

    /// Human-readable `(quiver, (β_1, ..., β_n))`.
    pub fn render(&self) -> String {
        let cl: Vec<String> = self.cluster.iter().map(|p| p.to_string()).collect();
        format!("({}, ({}))", self.quiver, cl.join(", "))
    }
}

pub(crate) fn feed_quiver(h: &mut Sha256, q: &Quiver) {
    h.update((q.n() as u64).to_le_bytes());
    for x in q.matrix() {
        h.update(x.to_le_bytes());
    }
    for v in 0..q.n() {
        h.update([q.is_frozen(v) as u8]);
    }
}

pub fn quiver_digest_hex(q: &Quiver) -> String {
    let mut h = Sha256::new();
    feed_quiver(&mut h, q);
    hex(&h.finalize())
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Variable images of `α_g^Q`: the cluster of `(Q, (x_1..x_n)) · g`.
pub fn alpha_tuple(quiver: &Quiver, g: &GroupElement) -> Result<Vec<LaurentPoly>> {
    Ok(LabelledSeed::initial(quiver.clone()).apply(g)?.cluster)
}

/// A seed whose cluster is replaced by its images under a [`Specialization`]
/// and whose exchange matrix uses big integers, so arbitrarily long words can
/// be followed. Different images certify different seeds; equal images do not.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpecializedSeed {
    n: usize,
    b: Vec<BigInt>,
    frozen: Vec<bool>,
    values: Vec<Values>,
}

impl SpecializedSeed {
    pub fn new(seed: &LabelledSeed, spec: &Specialization) -> Self {
        let q = seed.quiver();
        SpecializedSeed {
            n: q.n(),
            b: q.matrix().iter().map(|&x| BigInt::from(x)).collect(),
            frozen: (0..q.n()).map(|v| q.is_frozen(v)).collect(),
            values: seed.cluster().iter().map(|p| spec.eval(p)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.b[i * self.n + j]
    }

    pub fn values(&self) -> &[Values] {
        &self.values
    }

    /// `None` when the old variable vanishes at an evaluation point.
    pub fn mutate(&self, i: usize) -> std::result::Result<Option<Self>, QuiverError> {
        if i >= self.n {
            return Err(QuiverError::VertexOutOfRange(i, self.n));
        }
        if self.frozen[i] {
            return Err(QuiverError::FrozenVertex(i));
        }
        let zero = BigInt::from(0);
        let inward: Vec<BigInt> =
            (0..self.n).map(|k| self.entry(k, i).clone().max(zero.clone())).collect();
        let outward: Vec<BigInt> =
            (0..self.n).map(|k| self.entry(i, k).clone().max(zero.clone())).collect();
        let Some(fresh) = specialize::exchange(&self.values, i, &inward, &outward) else {
            return Ok(None);
        };
        let b = mutate_exchange(&self.b, self.n, i).expect("big integers do not overflow");
        let mut values = self.values.clone();
        values[i] = fresh;
        Ok(Some(SpecializedSeed { n: self.n, b, frozen: self.frozen.clone(), values }))
    }

    pub fn permute(&self, sigma: &Perm) -> Self {
        let n = self.n;
        let mut b = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                b.push(self.entry(sigma.apply(i), sigma.apply(j)).clone());
            }
        }
        SpecializedSeed {
            n,
            b,
            frozen: self.frozen.clone(),
            values: (0..n).map(|i| self.values[sigma.apply(i)]).collect(),
        }
    }

    /// Follows `g`; `None` if some exchange hit a vanishing value.
    pub fn apply(&self, g: &GroupElement) -> std::result::Result<Option<Self>, QuiverError> {
        let mut s = self.clone();
        for &i in g.word() {
            match s.mutate(i)? {
                Some(t) => s = t,
                None => return Ok(None),
            }
        }
        Ok(Some(if g.perm().is_identity() { s } else { s.permute(g.perm()) }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> Quiver {
        Quiver::from_arrows(2, &[(0, 1, 1)]).unwrap()
    }

    fn lp(s: &str, m: usize) -> LaurentPoly {
        LaurentPoly::parse(s, m).unwrap()
    }

    #[test]
    fn mutate_seed_examples() {
        let s = LabelledSeed::initial(a2());
        let t = s.mutate(0).unwrap();
        assert_eq!(t.quiver(), &a2().opposite());
        assert_eq!(t.cluster(), &[lp("x1^-1 + x1^-1*x2", 2), lp("x2", 2)]);

        let empty = Quiver::from_arrows(2, &[]).unwrap();
        let t = LabelledSeed::initial(empty.clone()).mutate(0).unwrap();
        assert_eq!(t.quiver(), &empty);
        assert_eq!(t.cluster(), &[lp("2*x1^-1", 2), lp("x2", 2)]);
    }

    #[test]
    fn exchange_identity_holds() {
        let q = Quiver::from_arrows(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap();
        let mut s = LabelledSeed::initial(q);
        for &i in &[0, 1, 2, 0, 2, 1, 0] {
            let t = s.mutate(i).unwrap();
            let (a, b) = s.exchange_monomials(i, Limits::NONE).unwrap();
            assert_eq!(s.cluster()[i].mul(&t.cluster()[i]).unwrap(), a.add(&b).unwrap());
            s = t;
        }
    }

    #[test]
    fn permute_seed_examples() {
        let s = LabelledSeed::initial(a2());
        let t = s.permute(&Perm::transposition(2, 0, 1)).unwrap();
        assert_eq!(t.quiver(), &a2().opposite());
        assert_eq!(t.cluster(), &[lp("x2", 2), lp("x1", 2)]);
        assert_eq!(s.permute(&Perm::identity(2)).unwrap(), s);
    }

    #[test]
    fn a2_relations() {
        let s = LabelledSeed::initial(a2());
        let five = GroupElement::parse("m1 m2", 2).unwrap().pow(5);
        assert_eq!(s.apply(&five).unwrap(), s);
        let swap = GroupElement::parse("(1 2)", 2).unwrap();
        let word = GroupElement::parse("m1 m2 m1 m2 m1", 2).unwrap();
        assert_eq!(s.apply(&swap).unwrap(), s.apply(&word).unwrap());
        assert_eq!(s.apply(&GroupElement::identity(2)).unwrap(), s);
    }

    #[test]
    fn alpha_tuple_examples() {
        assert_eq!(
            alpha_tuple(&a2(), &GroupElement::identity(2)).unwrap(),
            vec![lp("x1", 2), lp("x2", 2)]
        );
        assert_eq!(
            alpha_tuple(&a2(), &GroupElement::mutation(2, 0)).unwrap(),
            vec![lp("x1^-1 + x1^-1*x2", 2), lp("x2", 2)]
        );
        let g = GroupElement::parse("m1 m2 m1", 2).unwrap();
        assert_eq!(alpha_tuple(&a2(), &g).unwrap(), alpha_tuple(&a2().opposite(), &g).unwrap());
    }

    #[test]
    fn errors() {
        let s = LabelledSeed::initial(a2());
        assert!(matches!(s.mutate(2), Err(SeedError::Quiver(QuiverError::VertexOutOfRange(2, 2)))));
        assert!(matches!(
            LabelledSeed::new(a2(), vec![lp("x1", 2)]),
            Err(SeedError::ClusterLength { expected: 2, got: 1 })
        ));
        assert!(matches!(
            LabelledSeed::new(a2(), vec![lp("x1", 2), LaurentPoly::zero(2)]),
            Err(SeedError::ZeroEntry(1))
        ));
        // a non-Laurent cluster is rejected at mutation time
        let bad = LabelledSeed::new(a2(), vec![lp("1 + x1", 2), lp("x2", 2)]).unwrap();
        assert!(matches!(bad.mutate(0), Err(SeedError::Laurent(LaurentError::InexactDivision))));
        let ice = LabelledSeed::initial(a2().principal_coefficients());
        assert!(matches!(ice.mutate(3), Err(SeedError::Quiver(QuiverError::FrozenVertex(3)))));
        let mv = GroupElement::parse("(1 3)", 4).unwrap();
        assert!(matches!(ice.apply(&mv), Err(SeedError::Quiver(QuiverError::MovesFrozen(2)))));
    }

    #[test]
    fn specialized_seed_tracks_exact_seed() {
        let q = Quiver::from_arrows(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap();
        let s = LabelledSeed::initial(q);
        let spec = Specialization::standard(3, 11);
        let g = GroupElement::parse("m1 m2 m3 m1 m3 | (1 3 2)", 3).unwrap();
        let exact = s.apply(&g).unwrap();
        let shadow = SpecializedSeed::new(&s, &spec).apply(&g).unwrap().unwrap();
        assert_eq!(shadow, SpecializedSeed::new(&exact, &spec));
    }
}
