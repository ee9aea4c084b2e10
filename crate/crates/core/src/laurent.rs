//! Sparse Laurent polynomials over the integers.
//!
//! A [`LaurentPoly`] is an element of `Z[x1^±1, ..., xm^±1]` stored as a
//! sorted map from exponent vectors to nonzero big-integer coefficients.
//! Terms iterate in lexicographic order of their exponent vectors, so equality,
//! hashing, rendering and digests are all canonical.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("ambient variable counts differ ({0} vs {1})")]
    AmbientMismatch(usize, usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("division is not exact")]
    InexactDivision,
    #[error("product needs {work} term multiplications, limit is {limit}")]
    TermLimit { work: usize, limit: usize },
    #[error("expected {expected} substitution images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("cannot invert the zero polynomial")]
    ZeroImage,
    #[error("exponent vector has length {got}, expected {expected}")]
    ExponentLength { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LaurentError>;

/// Exponents of a single Laurent monomial. Ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExponentVector(Box<[i64]>);

impl ExponentVector {
    pub fn new(entries: Vec<i64>) -> Self {
        ExponentVector(entries.into_boxed_slice())
    }

    pub fn zero(len: usize) -> Self {
        ExponentVector(vec![0; len].into_boxed_slice())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    fn add(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    fn sub(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect())
    }

    fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&e| e >= 0)
    }
}

/// An element of `Z[x1^±1, ..., xm^±1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    nvars: usize,
    terms: BTreeMap<ExponentVector, BigInt>,
}

/// Upper bound on term-pair multiplications for a single product.
pub const UNLIMITED: usize = usize::MAX;

impl LaurentPoly {
    pub fn zero(nvars: usize) -> Self {
        LaurentPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigInt::one())
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        Self::monomial(nvars, c, ExponentVector::zero(nvars))
    }

    /// The variable `x_{index+1}` (indices are zero-based).
    pub fn variable(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index {index} out of range for {nvars} variables");
        let mut e = vec![0; nvars];
        e[index] = 1;
        Self::monomial(nvars, 1, ExponentVector::new(e))
    }

    pub fn monomial(nvars: usize, c: impl Into<BigInt>, exponents: ExponentVector) -> Self {
        assert_eq!(exponents.len(), nvars);
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exponents, c);
        }
        LaurentPoly { nvars, terms }
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging repeats.
    pub fn from_terms<I, C>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(LaurentError::ExponentLength { expected: nvars, got: e.len() });
            }
            p.add_term(ExponentVector::new(e), c.into());
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(e, c)| c.is_one() && e.entries().iter().all(|&x| x == 0))
                .unwrap_or(false)
    }

    /// Single term with coefficient ±1, i.e. a unit of the ring.
    pub fn is_unit_monomial(&self) -> bool {
        self.terms.len() == 1 && self.terms.values().all(|c| c.abs().is_one())
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in lexicographic order of exponent vectors.
    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exponents: &[i64]) -> BigInt {
        self.terms
            .get(&ExponentVector::new(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    fn add_term(&mut self, e: ExponentVector, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_ambient(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(LaurentError::AmbientMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_limited(other, UNLIMITED)
    }

    /// Product, refusing up front when it would need more than `max_work`
    /// coefficient multiplications.
    pub fn mul_limited(&self, other: &Self, max_work: usize) -> Result<Self> {
        self.check_ambient(other)?;
        let work = self.terms.len().saturating_mul(other.terms.len());
        if work > max_work {
            return Err(LaurentError::TermLimit { work, limit: max_work });
        }
        if self.is_one() {
            return Ok(other.clone());
        }
        if other.is_one() {
            return Ok(self.clone());
        }
        let mut acc: HashMap<ExponentVector, BigInt> = HashMap::with_capacity(work.min(1 << 16));
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                *acc.entry(e1.add(e2)).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        Ok(LaurentPoly {
            nvars: self.nvars,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn pow(&self, exp: u32) -> Self {
        self.pow_limited(exp, UNLIMITED).expect("unlimited power cannot fail")
    }

    pub fn pow_limited(&self, mut exp: u32, max_work: usize) -> Result<Self> {
        if exp == 0 {
            return Ok(Self::one(self.nvars));
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            let e = ExponentVector(e.0.iter().map(|x| x * exp as i64).collect());
            return Ok(Self::monomial(self.nvars, num_traits::pow(c.clone(), exp as usize), e));
        }
        let mut base = self.clone();
        let mut acc: Option<LaurentPoly> = None;
        loop {
            if exp & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul_limited(&base, max_work)?,
                });
            }
            exp >>= 1;
            if exp == 0 {
                break;
            }
            base = base.mul_limited(&base, max_work)?;
        }
        Ok(acc.unwrap())
    }

    /// Multiplies by the monomial `x^shift`.
    pub fn shift(&self, shift: &[i64]) -> Self {
        assert_eq!(shift.len(), self.nvars);
        let s = ExponentVector::new(shift.to_vec());
        LaurentPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.add(&s), c.clone())).collect(),
        }
    }

    /// Componentwise minimum exponent over all terms (zero vector for 0).
    pub fn min_exponents(&self) -> Vec<i64> {
        let mut mins: Option<Vec<i64>> = None;
        for e in self.terms.keys() {
            match &mut mins {
                None => mins = Some(e.entries().to_vec()),
                Some(m) => {
                    for (a, &b) in m.iter_mut().zip(e.entries()) {
                        *a = (*a).min(b);
                    }
                }
            }
        }
        mins.unwrap_or_else(|| vec![0; self.nvars])
    }

    /// Shifts so that every variable has minimum exponent zero; returns the
    /// shifted polynomial and the removed monomial's exponents.
    fn normalized(&self) -> (Self, Vec<i64>) {
        let mins = self.min_exponents();
        let neg: Vec<i64> = mins.iter().map(|m| -m).collect();
        (self.shift(&neg), mins)
    }

    /// Returns `q` with `q * divisor == self`, or [`LaurentError::InexactDivision`].
    ///
    /// Both operands are moved into the polynomial ring by monomial shifts and
    /// divided by repeated leading-term elimination (lexicographic order).
    pub fn exact_div(&self, divisor: &Self) -> Result<Self> {
        self.exact_div_limited(divisor, UNLIMITED)
    }

    /// [`Self::exact_div`], giving up once more than `max_work` coefficient
    /// multiplications have been spent.
    pub fn exact_div_limited(&self, divisor: &Self, max_work: usize) -> Result<Self> {
        self.check_ambient(divisor)?;
        if divisor.is_zero() {
            return Err(LaurentError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero(self.nvars));
        }
        if divisor.terms.len() == 1 {
            let (de, dc) = divisor.terms.iter().next().unwrap();
            let mut terms = BTreeMap::new();
            for (e, c) in &self.terms {
                let (q, r) = c.div_rem(dc);
                if !r.is_zero() {
                    return Err(LaurentError::InexactDivision);
                }
                terms.insert(e.sub(de), q);
            }
            return Ok(LaurentPoly { nvars: self.nvars, terms });
        }

        let (num, num_shift) = self.normalized();
        let (den, den_shift) = divisor.normalized();
        let (lead_e, lead_c) = den.terms.iter().next_back().map(|(e, c)| (e.clone(), c.clone())).unwrap();

        let mut rem = num.terms;
        let mut quot = BTreeMap::new();
        let mut work = 0usize;
        while let Some((e, c)) = rem.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
            work = work.saturating_add(den.terms.len());
            if work > max_work {
                return Err(LaurentError::TermLimit { work, limit: max_work });
            }
            let qe = e.sub(&lead_e);
            if !qe.is_nonnegative() {
                return Err(LaurentError::InexactDivision);
            }
            let (qc, r) = c.div_rem(&lead_c);
            if !r.is_zero() {
                return Err(LaurentError::InexactDivision);
            }
            for (de, dc) in &den.terms {
                let key = qe.add(de);
                let delta = &qc * dc;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(-delta);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        *o.get_mut() -= delta;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                }
            }
            quot.insert(qe, qc);
        }
        let shift: Vec<i64> = num_shift.iter().zip(&den_shift).map(|(a, b)| a - b).collect();
        Ok(LaurentPoly { nvars: self.nvars, terms: quot }.shift(&shift))
    }

    /// Image under the ring map `x_i -> images[i]`.
    ///
    /// Negative exponents are handled by clearing a common denominator and
    /// dividing exactly at the end, so non-monomial images must make the
    /// result a Laurent polynomial.
    pub fn substitute(&self, images: &[LaurentPoly]) -> Result<Self> {
        if images.len() != self.nvars {
            return Err(LaurentError::ImageCount { expected: self.nvars, got: images.len() });
        }
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        for img in images {
            if img.nvars != target {
                return Err(LaurentError::AmbientMismatch(target, img.nvars));
            }
        }
        if self.is_zero() {
            return Ok(Self::zero(target));
        }
        let mins = self.min_exponents();
        let lift: Vec<u32> = mins.iter().map(|&m| if m < 0 { (-m) as u32 } else { 0 }).collect();
        for (i, &l) in lift.iter().enumerate() {
            if l > 0 && images[i].is_zero() {
                return Err(LaurentError::ZeroImage);
            }
        }

        let mut powers: HashMap<(usize, u32), LaurentPoly> = HashMap::new();
        let mut power = |i: usize, k: u32| -> LaurentPoly {
            powers.entry((i, k)).or_insert_with(|| images[i].pow(k)).clone()
        };

        let mut numerator = Self::zero(target);
        for (e, c) in &self.terms {
            let mut term = Self::constant(target, c.clone());
            for (i, &x) in e.entries().iter().enumerate() {
                let k = (x + lift[i] as i64) as u32;
                if k > 0 {
                    term = term.mul(&power(i, k))?;
                }
            }
            numerator = numerator.add(&term)?;
        }
        let mut denominator = Self::one(target);
        for (i, &l) in lift.iter().enumerate() {
            if l > 0 {
                denominator = denominator.mul(&power(i, l))?;
            }
        }
        numerator.exact_div(&denominator)
    }

    /// Renders with variable names produced by `name(index)`.
    pub fn render_with<F: Fn(usize) -> String>(&self, name: F) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            if k == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mag = c.abs();
            let factors: Vec<String> = e
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(i, &x)| if x == 1 { name(i) } else { format!("{}^{}", name(i), x) })
                .collect();
            if factors.is_empty() {
                out.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    out.push_str(&mag.to_string());
                    out.push('*');
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }

    /// Parses the grammar produced by [`fmt::Display`], e.g. `x1^-1*x2 + 2`.
    pub fn parse(s: &str, nvars: usize) -> Result<Self> {
        Parser { chars: s.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0, nvars }.parse()
    }

    /// SHA-256 of the canonical term stream.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        self.feed_digest(&mut h);
        h.finalize().into()
    }

    pub(crate) fn feed_digest(&self, h: &mut Sha256) {
        h.update((self.nvars as u64).to_le_bytes());
        h.update((self.terms.len() as u64).to_le_bytes());
        for (e, c) in &self.terms {
            for x in e.entries() {
                h.update(x.to_le_bytes());
            }
            let (sign, mag) = c.to_bytes_le();
            h.update([match sign {
                Sign::Minus => 0u8,
                Sign::NoSign => 1,
                Sign::Plus => 2,
            }]);
            h.update((mag.len() as u64).to_le_bytes());
            h.update(&mag);
        }
    }

    /// Sum of coefficients at the all-ones point; cheap sanity value.
    pub fn value_at_ones(&self) -> BigInt {
        self.terms.values().sum()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(|i| format!("x{}", i + 1)))
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    nvars: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(LaurentError::Parse(format!("{msg} at offset {}", self.pos)))
    }

    fn parse(mut self) -> Result<LaurentPoly> {
        if self.chars.is_empty() {
            return self.err("empty input");
        }
        let mut out = LaurentPoly::zero(self.nvars);
        let mut first = true;
        loop {
            let negative = match self.peek() {
                Some('+') if !first => {
                    self.pos += 1;
                    false
                }
                Some('-') => {
                    self.pos += 1;
                    true
                }
                None => break,
                _ if first => false,
                _ => return self.err("expected '+' or '-'"),
            };
            first = false;
            let (e, mut c) = self.term()?;
            if negative {
                c = -c;
            }
            out.add_term(e, c);
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(ExponentVector, BigInt)> {
        let mut coeff = BigInt::one();
        let mut exps = vec![0i64; self.nvars];
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => coeff *= self.integer()?,
                Some('x') => {
                    self.pos += 1;
                    let idx = self.integer()?;
                    let idx: usize = idx.try_into().map_err(|_| LaurentError::Parse("bad variable index".into()))?;
                    if idx == 0 || idx > self.nvars {
                        return self.err(&format!("variable x{idx} outside x1..x{}", self.nvars));
                    }
                    let mut power = 1i64;
                    if self.peek() == Some('^') {
                        self.pos += 1;
                        let neg = if self.peek() == Some('-') {
                            self.pos += 1;
                            true
                        } else {
                            false
                        };
                        let p: i64 = self
                            .integer()?
                            .try_into()
                            .map_err(|_| LaurentError::Parse("exponent too large".into()))?;
                        power = if neg { -p } else { p };
                    }
                    exps[idx - 1] += power;
                }
                _ => return self.err("expected integer or variable"),
            }
            if self.peek() == Some('*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((ExponentVector::new(exps), coeff))
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Ok(s.parse::<BigInt>().expect("digits parse"))
    }
}
