//! Elements of the global mutation group `M_n = S_n ⋉ <μ_1, ..., μ_n | μ_i^2>`.
//!
//! Every element has a unique normal form `w·σ`: a reduced word `w` in the
//! mutations (no letter repeated consecutively) followed by a permutation.
//! Moving a permutation to the right uses `σ μ_i = μ_{σ(i)} σ`.

use std::fmt;

use thiserror::Error;

use crate::perm::{Perm, PermError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("mutation index {0} out of range for rank {1}")]
    IndexOutOfRange(usize, usize),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("cannot parse group element: {0}")]
    Parse(String),
}

/// A single generator of `M_n`. Mutation indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    Mutation(usize),
    Permutation(Perm),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Mutation(i) => write!(f, "m{}", i + 1),
            Generator::Permutation(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    word: Vec<usize>,
    perm: Perm,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        GroupElement { word: Vec::new(), perm: Perm::identity(n) }
    }

    pub fn mutation(n: usize, i: usize) -> Self {
        let mut g = Self::identity(n);
        g.push_mutation(i);
        g
    }

    pub fn permutation(p: Perm) -> Self {
        GroupElement { word: Vec::new(), perm: p }
    }

    /// The mutation word `μ_{i1} μ_{i2} ...` (zero-based letters), reduced.
    pub fn from_word(n: usize, letters: &[usize]) -> Self {
        let mut g = Self::identity(n);
        for &i in letters {
            g.push_mutation(i);
        }
        g
    }

    /// Normal form of a raw product of generators.
    pub fn normal_form<'a, I>(n: usize, generators: I) -> Result<Self, GroupError>
    where
        I: IntoIterator<Item = &'a Generator>,
    {
        let mut g = Self::identity(n);
        for x in generators {
            g.push(x)?;
        }
        Ok(g)
    }

    pub fn rank(&self) -> usize {
        self.perm.len()
    }

    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn perm(&self) -> &Perm {
        &self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty() && self.perm.is_identity()
    }

    fn push_letter(&mut self, i: usize) {
        if self.word.last() == Some(&i) {
            self.word.pop();
        } else {
            self.word.push(i);
        }
    }

    /// Right-multiplies by `μ_i`: `w σ μ_i = w μ_{σ(i)} σ`.
    pub fn push_mutation(&mut self, i: usize) {
        assert!(i < self.rank(), "mutation index out of range");
        let j = self.perm.apply(i);
        self.push_letter(j);
    }

    pub fn push_perm(&mut self, p: &Perm) {
        self.perm = self.perm.compose(p);
    }

    pub fn push(&mut self, x: &Generator) -> Result<(), GroupError> {
        match x {
            Generator::Mutation(i) => {
                if *i >= self.rank() {
                    return Err(GroupError::IndexOutOfRange(*i, self.rank()));
                }
                self.push_mutation(*i);
            }
            Generator::Permutation(p) => {
                if p.len() != self.rank() {
                    return Err(GroupError::Perm(PermError::NotBijection(self.rank())));
                }
                self.push_perm(p);
            }
        }
        Ok(())
    }

    /// `self · other`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.rank(), other.rank());
        let mut out = self.clone();
        for &i in &other.word {
            // w1 σ1 μ_i = w1 μ_{σ1(i)} σ1
            let j = self.perm.apply(i);
            out.push_letter(j);
        }
        out.perm = self.perm.compose(&other.perm);
        out
    }

    /// `(w σ)^{-1} = σ^{-1} w^{-1}`, normalised.
    pub fn inverse(&self) -> GroupElement {
        let inv = self.perm.inverse();
        let word = self.word.iter().rev().map(|&i| inv.apply(i)).collect();
        GroupElement { word, perm: inv }
    }

    pub fn pow(&self, k: usize) -> GroupElement {
        let mut acc = Self::identity(self.rank());
        for _ in 0..k {
            acc = acc.compose(self);
        }
        acc
    }

    /// Generators of the normal form, mutations first.
    pub fn generators(&self) -> Vec<Generator> {
        let mut out: Vec<Generator> = self.word.iter().map(|&i| Generator::Mutation(i)).collect();
        if !self.perm.is_identity() {
            out.push(Generator::Permutation(self.perm.clone()));
        }
        out
    }

    /// Parses raw generator sequences such as `m1 m2 m1 | (1 2)`,
    /// `(1 2) m1`, or `id`, and returns the normal form.
    pub fn parse(s: &str, n: usize) -> Result<Self, GroupError> {
        Self::normal_form(n, &parse_generators(s, n)?)
    }
}

/// Tokenises a raw generator sequence without normalising it.
pub fn parse_generators(s: &str, n: usize) -> Result<Vec<Generator>, GroupError> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix('|') {
            rest = r.trim_start();
        } else if rest.starts_with('(') {
            let mut end = 0;
            let bytes = rest.as_bytes();
            while end < bytes.len() && bytes[end] == b'(' {
                let close = rest[end..].find(')').ok_or_else(|| GroupError::Parse(s.to_string()))?;
                end += close + 1;
                while end < bytes.len() && bytes[end] == b' ' && rest[end..].trim_start().starts_with('(') {
                    end += 1;
                }
            }
            out.push(Generator::Permutation(Perm::parse(&rest[..end], n)?));
            rest = rest[end..].trim_start();
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let tok = &rest[..end];
            if tok == "id" || tok == "1" {
                // identity
            } else if let Some(idx) = tok.strip_prefix('m') {
                let i: usize = idx.trim_start_matches('u').parse().map_err(|_| GroupError::Parse(tok.to_string()))?;
                if i == 0 || i > n {
                    return Err(GroupError::IndexOutOfRange(i.wrapping_sub(1), n));
                }
                out.push(Generator::Mutation(i - 1));
            } else {
                return Err(GroupError::Parse(tok.to_string()));
            }
            rest = rest[end..].trim_start();
        }
    }
    Ok(out)
}

impl fmt::Display for GroupElement {
    /// `m1 m2 | (1 2)`; `id` for the identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word: Vec<String> = self.word.iter().map(|i| format!("m{}", i + 1)).collect();
        match (word.is_empty(), self.perm.is_identity()) {
            (true, true) => f.write_str("id"),
            (false, true) => f.write_str(&word.join(" ")),
            (true, false) => write!(f, "| {}", self.perm),
            (false, false) => write!(f, "{} | {}", word.join(" "), self.perm),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normal_form_examples() {
        let m = |i| Generator::Mutation(i);
        assert!(GroupElement::normal_form(2, &[m(0), m(0)]).unwrap().is_identity());
        let swap = Generator::Permutation(Perm::transposition(2, 0, 1));
        let g = GroupElement::normal_form(2, &[swap, m(0)]).unwrap();
        assert_eq!(g.word(), &[1]);
        assert_eq!(g.perm(), &Perm::transposition(2, 0, 1));
        assert!(GroupElement::normal_form(2, &[m(0), m(1), m(1), m(0)]).unwrap().is_identity());
    }

    #[test]
    fn text_forms() {
        let g = GroupElement::parse("m1 | (1 2)", 2).unwrap();
        assert_eq!(g.to_string(), "m1 | (1 2)");
        assert_eq!(GroupElement::parse("(1 2) m1", 2).unwrap().to_string(), "m2 | (1 2)");
        assert_eq!(GroupElement::parse("id", 3).unwrap().to_string(), "id");
        assert_eq!(GroupElement::parse("m1 m2 m3", 3).unwrap().to_string(), "m1 m2 m3");
        assert_eq!(GroupElement::parse("(1 2)(2 3)", 3).unwrap().to_string(), "| (1 2 3)");
        assert!(GroupElement::parse("m4", 3).is_err());
        assert!(GroupElement::parse("q1", 3).is_err());
        assert!(GroupElement::parse("(1 4)", 3).is_err());
    }

    #[test]
    fn inverse_and_compose() {
        let g = GroupElement::parse("m1 m2 | (1 2 3) m3", 3).unwrap();
        assert!(g.compose(&g.inverse()).is_identity());
        assert!(g.inverse().compose(&g).is_identity());
        assert_eq!(GroupElement::parse("m1 m2", 2).unwrap().pow(5).word().len(), 10);
    }

    fn raw(n: usize) -> impl Strategy<Value = Vec<Generator>> {
        let gen = prop_oneof![
            (0..n).prop_map(Generator::Mutation),
            Just((0..n).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|v| Generator::Permutation(Perm::from_images(v).unwrap())),
        ];
        prop::collection::vec(gen, 0..12)
    }

    proptest! {
        #[test]
        fn normal_form_is_a_homomorphism(a in raw(3), b in raw(3)) {
            let ga = GroupElement::normal_form(3, &a).unwrap();
            let gb = GroupElement::normal_form(3, &b).unwrap();
            let joined: Vec<Generator> = a.iter().chain(b.iter()).cloned().collect();
            let gab = GroupElement::normal_form(3, &joined).unwrap();
            prop_assert_eq!(ga.compose(&gb), gab.clone());
            prop_assert!(gab.word().windows(2).all(|w| w[0] != w[1]));
            prop_assert_eq!(GroupElement::parse(&gab.to_string(), 3).unwrap(), gab);
        }
    }
}
