//! Evaluation of Laurent polynomials at points of `F_p`, p = 2^61 - 1.
//!
//! Evaluation at a point with nonzero coordinates is a ring homomorphism
//! `Z[x^±1] -> F_p`, so two polynomials with different images are different.
//! This gives exact inequality certificates for cluster variables far too large
//! to expand (deep Markov mutations, long Kronecker words). Equal images prove
//! nothing and callers fall back to exact arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::laurent::LaurentPoly;

pub const MODULUS: u64 = (1 << 61) - 1;

/// Number of independent evaluation points carried by a [`Specialization`].
pub const POINTS: usize = 2;

pub type Values = [u64; POINTS];

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MODULUS as u128) as u64
}

fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

fn powmod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base);
        }
        base = mulmod(base, base);
        exp >>= 1;
    }
    acc
}

fn invmod(a: u64) -> Option<u64> {
    (a != 0).then(|| powmod(a, MODULUS - 2))
}

/// `base^exp` in `F_p` for an arbitrary integer exponent.
/// `None` when `base == 0` and `exp < 0`.
pub fn pow_big(base: u64, exp: &BigInt) -> Option<u64> {
    if exp.is_zero() {
        return Some(1);
    }
    if base == 0 {
        return if exp.is_negative() { None } else { Some(0) };
    }
    let order = BigInt::from(MODULUS - 1);
    let e = exp.mod_floor(&order).to_u64().expect("reduced exponent fits");
    Some(powmod(base, e))
}

/// A fixed tuple of evaluation points in `(F_p^*)^m`.
#[derive(Clone, Debug)]
pub struct Specialization {
    points: Vec<Values>,
}

impl Specialization {
    /// Deterministic points for `nvars` variables derived from `salt`.
    pub fn standard(nvars: usize, salt: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c1a5 ^ salt);
        let points = (0..nvars)
            .map(|_| {
                let mut v = [0u64; POINTS];
                for x in v.iter_mut() {
                    *x = rng.gen_range(2..MODULUS);
                }
                v
            })
            .collect();
        Specialization { points }
    }

    pub fn nvars(&self) -> usize {
        self.points.len()
    }

    /// The images of the variables themselves.
    pub fn variables(&self) -> Vec<Values> {
        self.points.clone()
    }

    pub fn eval(&self, p: &LaurentPoly) -> Values {
        assert_eq!(p.nvars(), self.points.len());
        let mut out = [0u64; POINTS];
        for (e, c) in p.terms() {
            let c = c.mod_floor(&BigInt::from(MODULUS)).to_u64().unwrap();
            for (k, slot) in out.iter_mut().enumerate() {
                let mut t = c;
                for (i, &x) in e.entries().iter().enumerate() {
                    let v = pow_big(self.points[i][k], &BigInt::from(x)).expect("points are nonzero");
                    t = mulmod(t, v);
                }
                *slot = addmod(*slot, t);
            }
        }
        out
    }
}

/// Image of the exchange relation: `(prod_in + prod_out) / old`, coordinatewise.
/// `None` when `old` vanishes at some point.
pub fn exchange(values: &[Values], i: usize, inward: &[BigInt], outward: &[BigInt]) -> Option<Values> {
    let mut out = [0u64; POINTS];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut a = 1u64;
        let mut b = 1u64;
        for (j, v) in values.iter().enumerate() {
            a = mulmod(a, pow_big(v[k], &inward[j])?);
            b = mulmod(b, pow_big(v[k], &outward[j])?);
        }
        *slot = mulmod(addmod(a, b), invmod(values[i][k])?);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_is_a_ring_map() {
        let s = Specialization::standard(2, 7);
        let a = LaurentPoly::parse("x1^-1 + 3*x2 - 5", 2).unwrap();
        let b = LaurentPoly::parse("x1*x2^-2 + 1", 2).unwrap();
        let (ea, eb) = (s.eval(&a), s.eval(&b));
        let prod = s.eval(&a.mul(&b).unwrap());
        let sum = s.eval(&a.add(&b).unwrap());
        for k in 0..POINTS {
            assert_eq!(prod[k], mulmod(ea[k], eb[k]));
            assert_eq!(sum[k], addmod(ea[k], eb[k]));
        }
    }

    #[test]
    fn exchange_matches_exact_division() {
        let s = Specialization::standard(2, 1);
        let vars = s.variables();
        let got = exchange(&vars, 0, &[BigInt::from(0), BigInt::from(0)], &[BigInt::from(0), BigInt::from(1)]).unwrap();
        let exact = LaurentPoly::parse("x1^-1 + x1^-1*x2", 2).unwrap();
        assert_eq!(got, s.eval(&exact));
    }

    #[test]
    fn negative_power_of_zero() {
        assert_eq!(pow_big(0, &BigInt::from(-1)), None);
        assert_eq!(pow_big(0, &BigInt::from(3)), Some(0));
        assert_eq!(pow_big(0, &BigInt::from(0)), Some(1));
        assert_eq!(pow_big(5, &BigInt::from(-1)).map(|v| mulmod(v, 5)), Some(1));
    }
}
