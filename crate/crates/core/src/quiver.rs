//! Quivers without loops or 2-cycles, stored as skew-symmetric exchange
//! matrices, optionally with frozen vertices (ice quivers).
//!
//! Vertices are zero-based in the API; every text and JSON form is one-based.

use std::fmt;

use num_traits::{CheckedAdd, CheckedMul, Signed, Zero};
use thiserror::Error;

use crate::perm::Perm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuiverError {
    #[error("vertex {0} out of range for a quiver on {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("vertex {0} is frozen")]
    FrozenVertex(usize),
    #[error("exchange matrix is not skew-symmetric at ({0}, {1})")]
    NotSkewSymmetric(usize, usize),
    #[error("exchange matrix must be {0}x{0}")]
    Shape(usize),
    #[error("permutation has length {got}, quiver has {expected} vertices")]
    PermLength { expected: usize, got: usize },
    #[error("permutation moves frozen vertex {0}")]
    MovesFrozen(usize),
    #[error("arrow between frozen vertices {0} and {1}")]
    FrozenArrow(usize, usize),
    #[error("arrow multiplicity overflow while mutating at {0}")]
    Overflow(usize),
}

/// Fomin–Zelevinsky mutation of a row-major `n x n` skew-symmetric matrix at `k`:
/// `b'[i][j] = -b[i][j]` if `k ∈ {i, j}`, else
/// `b[i][j] + sgn(b[i][k]) * max(b[i][k] * b[k][j], 0)`.
/// Returns `None` on overflow.
pub fn mutate_exchange<T>(b: &[T], n: usize, k: usize) -> Option<Vec<T>>
where
    T: Clone + Signed + CheckedMul + CheckedAdd + PartialOrd,
{
    let mut out = b.to_vec();
    for i in 0..n {
        for j in 0..n {
            let idx = i * n + j;
            if i == k || j == k {
                out[idx] = -b[idx].clone();
                continue;
            }
            let bik = &b[i * n + k];
            let bkj = &b[k * n + j];
            let prod = bik.checked_mul(bkj)?;
            if prod > T::zero() {
                let delta = if bik.is_negative() { -prod } else { prod };
                out[idx] = b[idx].checked_add(&delta)?;
            }
        }
    }
    Some(out)
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Quiver {
    n: usize,
    b: Vec<i64>,
    frozen: Vec<bool>,
}

impl Quiver {
    /// Validates skew-symmetry of `rows`.
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, QuiverError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(QuiverError::Shape(n));
        }
        let b: Vec<i64> = rows.into_iter().flatten().collect();
        for i in 0..n {
            for j in 0..n {
                if b[i * n + j] != -b[j * n + i] {
                    return Err(QuiverError::NotSkewSymmetric(i, j));
                }
            }
        }
        Ok(Quiver { n, b, frozen: vec![false; n] })
    }

    /// Quiver with `(tail, head, multiplicity)` arrows, zero-based.
    pub fn from_arrows(n: usize, arrows: &[(usize, usize, i64)]) -> Result<Self, QuiverError> {
        let mut b = vec![0i64; n * n];
        for &(t, h, m) in arrows {
            if t >= n {
                return Err(QuiverError::VertexOutOfRange(t, n));
            }
            if h >= n {
                return Err(QuiverError::VertexOutOfRange(h, n));
            }
            if t == h {
                return Err(QuiverError::NotSkewSymmetric(t, h));
            }
            b[t * n + h] += m;
            b[h * n + t] -= m;
        }
        Ok(Quiver { n, b, frozen: vec![false; n] })
    }

    /// Marks `frozen` (zero-based) as frozen; arrows among them must be absent.
    pub fn with_frozen(mut self, frozen: &[usize]) -> Result<Self, QuiverError> {
        let mut mask = vec![false; self.n];
        for &f in frozen {
            if f >= self.n {
                return Err(QuiverError::VertexOutOfRange(f, self.n));
            }
            mask[f] = true;
        }
        for i in 0..self.n {
            for j in 0..self.n {
                if mask[i] && mask[j] && self.b[i * self.n + j] != 0 {
                    return Err(QuiverError::FrozenArrow(i, j));
                }
            }
        }
        self.frozen = mask;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.b[i * self.n + j]
    }

    /// Number of arrows `i -> j`.
    pub fn arrows(&self, i: usize, j: usize) -> i64 {
        self.entry(i, j).max(0)
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.b.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn matrix(&self) -> &[i64] {
        &self.b
    }

    pub fn is_frozen(&self, v: usize) -> bool {
        self.frozen[v]
    }

    pub fn frozen_vertices(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.frozen[v]).collect()
    }

    pub fn mutable_vertices(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| !self.frozen[v]).collect()
    }

    pub fn has_frozen(&self) -> bool {
        self.frozen.iter().any(|&f| f)
    }

    pub fn max_multiplicity(&self) -> i64 {
        self.b.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn check_mutable(&self, k: usize) -> Result<(), QuiverError> {
        if k >= self.n {
            return Err(QuiverError::VertexOutOfRange(k, self.n));
        }
        if self.frozen[k] {
            return Err(QuiverError::FrozenVertex(k));
        }
        Ok(())
    }

    pub fn mutate(&self, k: usize) -> Result<Self, QuiverError> {
        self.check_mutable(k)?;
        let b = mutate_exchange(&self.b, self.n, k).ok_or(QuiverError::Overflow(k))?;
        Ok(Quiver { n: self.n, b, frozen: self.frozen.clone() })
    }

    pub fn check_perm(&self, sigma: &Perm) -> Result<(), QuiverError> {
        if sigma.len() != self.n {
            return Err(QuiverError::PermLength { expected: self.n, got: sigma.len() });
        }
        if let Some(v) = (0..self.n).find(|&v| self.frozen[v] && sigma.apply(v) != v) {
            return Err(QuiverError::MovesFrozen(v));
        }
        Ok(())
    }

    /// `b'[i][j] = b[σ(i)][σ(j)]`.
    pub fn permute(&self, sigma: &Perm) -> Result<Self, QuiverError> {
        self.check_perm(sigma)?;
        let n = self.n;
        let mut b = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                b[i * n + j] = self.b[sigma.apply(i) * n + sigma.apply(j)];
            }
        }
        Ok(Quiver { n, b, frozen: self.frozen.clone() })
    }

    pub fn opposite(&self) -> Self {
        Quiver { n: self.n, b: self.b.iter().map(|x| -x).collect(), frozen: self.frozen.clone() }
    }

    /// Connected components of the underlying graph, each sorted, ordered by
    /// smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![s];
            let mut members = Vec::new();
            comp[s] = id;
            while let Some(v) = stack.pop() {
                members.push(v);
                for w in 0..n {
                    if self.b[v * n + w] != 0 && comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Equal after reversing all arrows in some set of connected components.
    pub fn similar(&self, other: &Quiver) -> bool {
        if self.n != other.n || self.frozen != other.frozen {
            return false;
        }
        let comps = self.components();
        if comps != other.components() {
            return false;
        }
        comps.iter().all(|c| {
            let same = c.iter().all(|&i| c.iter().all(|&j| self.entry(i, j) == other.entry(i, j)));
            let flipped = c.iter().all(|&i| c.iter().all(|&j| self.entry(i, j) == -other.entry(i, j)));
            same || flipped
        })
    }

    /// Representative of the similarity class: each component is oriented so
    /// its first nonzero upper-triangular entry is positive.
    pub fn similarity_key(&self) -> Quiver {
        let mut b = self.b.clone();
        let n = self.n;
        for c in self.components() {
            let first = c
                .iter()
                .flat_map(|&i| c.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
                .map(|(i, j)| self.b[i * n + j])
                .find(|x| !x.is_zero());
            if matches!(first, Some(x) if x < 0) {
                for &i in &c {
                    for &j in &c {
                        b[i * n + j] = -self.b[i * n + j];
                    }
                }
            }
        }
        Quiver { n, b, frozen: self.frozen.clone() }
    }

    /// Full subquiver on the mutable vertices `J`, plus a frozen copy `j'`
    /// of each with one arrow `j' -> j`. Vertices `0..|J|` are `J` in order,
    /// `|J|..2|J|` are the copies.
    pub fn principal_coefficients(&self) -> Quiver {
        let j = self.mutable_vertices();
        let m = j.len();
        let mut arrows = Vec::new();
        for (a, &va) in j.iter().enumerate() {
            for (c, &vc) in j.iter().enumerate() {
                let x = self.entry(va, vc);
                if x > 0 {
                    arrows.push((a, c, x));
                }
            }
            arrows.push((m + a, a, 1));
        }
        Quiver::from_arrows(2 * m, &arrows)
            .and_then(|q| q.with_frozen(&(m..2 * m).collect::<Vec<_>>()))
            .expect("principal extension is a valid ice quiver")
    }

    /// Full subquiver on the mutable vertices.
    pub fn trivial_coefficients(&self) -> Quiver {
        let j = self.mutable_vertices();
        let rows = j.iter().map(|&a| j.iter().map(|&c| self.entry(a, c)).collect()).collect();
        Quiver::new(rows).expect("restriction of a skew-symmetric matrix")
    }

    /// One-based arrow list `(tail, head, multiplicity)`.
    pub fn arrow_list(&self) -> Vec<(usize, usize, i64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.entry(i, j) > 0 {
                    out.push((i + 1, j + 1, self.entry(i, j)));
                }
            }
        }
        out
    }
}

impl fmt::Display for Quiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))?;
        let fr = self.frozen_vertices();
        if !fr.is_empty() {
            let parts: Vec<String> = fr.iter().map(|v| (v + 1).to_string()).collect();
            write!(f, " frozen {{{}}}", parts.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> Quiver {
        Quiver::from_arrows(3, &[(0, 1, 1), (1, 2, 1)]).unwrap()
    }

    #[test]
    fn mutation_examples() {
        let a2 = Quiver::from_arrows(2, &[(0, 1, 1)]).unwrap();
        assert_eq!(a2.mutate(0).unwrap(), Quiver::from_arrows(2, &[(1, 0, 1)]).unwrap());

        // 1->2->3 at 2 gives 2->1, 3->2, 1->3
        let expected = Quiver::from_arrows(3, &[(1, 0, 1), (2, 1, 1), (0, 2, 1)]).unwrap();
        assert_eq!(path3().mutate(1).unwrap(), expected);

        let markov = Quiver::from_arrows(3, &[(0, 1, 3), (1, 2, 3), (2, 0, 3)]).unwrap();
        let m = markov.mutate(0).unwrap();
        let mut triple = [m.entry(0, 1).abs(), m.entry(1, 2).abs(), m.entry(0, 2).abs()];
        triple.sort();
        assert_eq!(triple, [3, 3, 6]);
        assert_eq!(m.entry(1, 2), -6);
    }

    #[test]
    fn mutation_errors() {
        assert_eq!(path3().mutate(3), Err(QuiverError::VertexOutOfRange(3, 3)));
        let ice = path3().principal_coefficients();
        assert_eq!(ice.mutate(4), Err(QuiverError::FrozenVertex(4)));
        let huge = Quiver::from_arrows(3, &[(0, 1, i64::MAX / 2), (1, 2, i64::MAX / 2)]).unwrap();
        assert_eq!(huge.mutate(1), Err(QuiverError::Overflow(1)));
    }

    #[test]
    fn permutation_examples() {
        let a2 = Quiver::from_arrows(2, &[(0, 1, 1)]).unwrap();
        let swap = Perm::transposition(2, 0, 1);
        assert_eq!(a2.permute(&swap).unwrap(), a2.opposite());
        assert_eq!(a2.permute(&Perm::identity(2)).unwrap(), a2);
        let cyc = Quiver::from_arrows(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap();
        assert_eq!(cyc.permute(&Perm::parse("(1 2 3)", 3).unwrap()).unwrap(), cyc);
        assert_eq!(a2.permute(&Perm::identity(3)), Err(QuiverError::PermLength { expected: 2, got: 3 }));
        let ice = a2.principal_coefficients();
        assert_eq!(ice.permute(&Perm::parse("(1 3)", 4).unwrap()), Err(QuiverError::MovesFrozen(2)));
        assert!(ice.permute(&Perm::parse("(3 4)", 4).unwrap()).is_err());
    }

    #[test]
    fn similarity_examples() {
        let a2 = Quiver::from_arrows(2, &[(0, 1, 1)]).unwrap();
        assert!(a2.similar(&a2.opposite()));
        assert!(a2.similar(&a2));
        let sink = Quiver::from_arrows(3, &[(0, 1, 1), (2, 1, 1)]).unwrap();
        assert!(!path3().similar(&sink));
        assert!(!a2.similar(&path3()));
        // two components flipped independently
        let two = Quiver::from_arrows(4, &[(0, 1, 1), (2, 3, 2)]).unwrap();
        let flipped = Quiver::from_arrows(4, &[(0, 1, 1), (3, 2, 2)]).unwrap();
        assert!(two.similar(&flipped));
        assert_eq!(two.similarity_key(), flipped.similarity_key());
        let moved = Quiver::from_arrows(4, &[(0, 2, 1), (1, 3, 2)]).unwrap();
        assert!(!two.similar(&moved));
    }

    #[test]
    fn coefficient_constructions() {
        let a2 = Quiver::from_arrows(2, &[(0, 1, 1)]).unwrap();
        let p = a2.principal_coefficients();
        let expected = Quiver::from_arrows(4, &[(0, 1, 1), (2, 0, 1), (3, 1, 1)])
            .unwrap()
            .with_frozen(&[2, 3])
            .unwrap();
        assert_eq!(p, expected);
        assert_eq!(p.trivial_coefficients(), a2);

        let p3 = path3().principal_coefficients();
        assert_eq!(p3.n(), 6);
        assert_eq!(p3.frozen_vertices(), vec![3, 4, 5]);
        assert_eq!(p3.arrow_list(), vec![(1, 2, 1), (2, 3, 1), (4, 1, 1), (5, 2, 1), (6, 3, 1)]);
        assert_eq!(p3.trivial_coefficients(), path3());
    }

    #[test]
    fn rejects_bad_matrices() {
        assert_eq!(Quiver::new(vec![vec![0, 1], vec![1, 0]]), Err(QuiverError::NotSkewSymmetric(0, 1)));
        assert_eq!(Quiver::new(vec![vec![0, 1]]), Err(QuiverError::Shape(1)));
        let q = Quiver::from_arrows(2, &[(0, 1, 1)]).unwrap();
        assert_eq!(q.with_frozen(&[0, 1]), Err(QuiverError::FrozenArrow(0, 1)));
    }

    fn quiver(max_n: usize) -> impl Strategy<Value = Quiver> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec(-2i64..=2, n * (n - 1) / 2).prop_map(move |upper| {
                let mut arrows = Vec::new();
                let mut it = upper.into_iter();
                for i in 0..n {
                    for j in i + 1..n {
                        let x = it.next().unwrap();
                        if x > 0 {
                            arrows.push((i, j, x));
                        } else if x < 0 {
                            arrows.push((j, i, -x));
                        }
                    }
                }
                Quiver::from_arrows(n, &arrows).unwrap()
            })
        })
    }

    fn perm_of(n: usize) -> impl Strategy<Value = Perm> {
        Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| Perm::from_images(v).unwrap())
    }

    fn is_skew(q: &Quiver) -> bool {
        (0..q.n()).all(|i| (0..q.n()).all(|j| q.entry(i, j) == -q.entry(j, i)))
    }

    proptest! {
        #[test]
        fn mutation_is_an_involution(q in quiver(5), k in 0usize..5) {
            prop_assume!(k < q.n());
            let m = q.mutate(k).unwrap();
            prop_assert!(is_skew(&m));
            prop_assert_eq!(m.mutate(k).unwrap(), q);
        }

        #[test]
        fn mutation_is_permutation_equivariant(
            (q, sigma) in quiver(5).prop_flat_map(|q| { let n = q.n(); (Just(q), perm_of(n)) }),
            i in 0usize..5,
        ) {
            prop_assume!(i < q.n());
            let lhs = q.permute(&sigma).unwrap().mutate(i).unwrap();
            let rhs = q.mutate(sigma.apply(i)).unwrap().permute(&sigma).unwrap();
            prop_assert!(is_skew(&lhs));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn similarity_is_an_equivalence(
            a in quiver(4), b in quiver(4), c in quiver(4), flips in prop::collection::vec(any::<bool>(), 4)
        ) {
            prop_assert!(a.similar(&a));
            prop_assert_eq!(a.similar(&b), b.similar(&a));
            if a.similar(&b) && b.similar(&c) {
                prop_assert!(a.similar(&c));
            }
            // flipping any set of components stays similar
            let mut flipped = a.clone();
            for (comp, &f) in a.components().iter().zip(&flips) {
                if f {
                    for &i in comp {
                        for &j in comp {
                            flipped.b[i * a.n + j] = -a.entry(i, j);
                        }
                    }
                }
            }
            prop_assert!(a.similar(&flipped));
            prop_assert_eq!(a.similarity_key(), flipped.similarity_key());
        }
    }
}
