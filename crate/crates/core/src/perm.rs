//! Permutations of the vertex labels `{0, ..., n-1}`.
//!
//! Composition follows function composition: `a.compose(&b)` is `a ∘ b`,
//! which is also the product `ab` acting on labelled seeds from the right.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("not a bijection on {{1..{0}}}")]
    NotBijection(usize),
    #[error("permutation parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    /// `images[i]` is the image of `i`.
    pub fn from_images(images: Vec<usize>) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(PermError::NotBijection(n));
            }
            seen[i] = true;
        }
        Ok(Perm(images))
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p: Vec<usize> = (0..n).collect();
        p.swap(a, b);
        Perm(p)
    }

    /// Builds from disjoint or overlapping cycles (zero-based), composed left to right.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self, PermError> {
        let mut acc = Perm::identity(n);
        for c in cycles {
            let mut seen = std::collections::HashSet::new();
            if c.iter().any(|&x| x >= n || !seen.insert(x)) {
                return Err(PermError::NotBijection(n));
            }
            let mut images: Vec<usize> = (0..n).collect();
            for k in 0..c.len() {
                images[c[k]] = c[(k + 1) % c.len()];
            }
            acc = acc.compose(&Perm(images));
        }
        Ok(acc)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.len(), other.len());
        Perm(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut r = vec![0; self.len()];
        for (i, &j) in self.0.iter().enumerate() {
            r[j] = i;
        }
        Perm(r)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Nontrivial cycles, each starting at its smallest element, sorted.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] || self.0[start] == start {
                continue;
            }
            let mut c = vec![start];
            seen[start] = true;
            let mut j = self.0[start];
            while j != start {
                seen[j] = true;
                c.push(j);
                j = self.0[j];
            }
            out.push(c);
        }
        out
    }

    /// Parses `()`, `(1 2)(3 4)` cycle notation or a bracketed image list
    /// `[2, 1, 3]`, all one-based.
    pub fn parse(s: &str, n: usize) -> Result<Self, PermError> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let images = inner
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|x| !x.is_empty())
                .map(|x| {
                    x.parse::<usize>()
                        .ok()
                        .filter(|&v| v >= 1)
                        .map(|v| v - 1)
                        .ok_or_else(|| PermError::Parse(format!("bad image {x:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if images.len() != n {
                return Err(PermError::NotBijection(n));
            }
            return Perm::from_images(images);
        }
        let mut cycles = Vec::new();
        let mut rest = t;
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| PermError::Parse(format!("expected '(' in {s:?}")))?;
            let close = open.find(')').ok_or_else(|| PermError::Parse(format!("unclosed cycle in {s:?}")))?;
            let cycle = open[..close]
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|x| !x.is_empty())
                .map(|x| {
                    x.parse::<usize>()
                        .ok()
                        .filter(|&v| v >= 1 && v <= n)
                        .map(|v| v - 1)
                        .ok_or_else(|| PermError::Parse(format!("bad point {x:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            cycles.push(cycle);
            rest = open[close + 1..].trim_start();
        }
        Perm::from_cycles(n, &cycles)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}
