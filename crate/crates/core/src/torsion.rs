//! Uniform torsion bounds.
//!
//! A connected commutative algebraic group of dimension `g` over `F_q` is an
//! extension of an abelian variety by a torus times a unipotent group, so it
//! has at most `floor((sqrt(q) + 1)^(2g))` rational points. Reducing a
//! torsion section modulo two good primes `p`, `l` bounds its order by the
//! product of the two point-count bounds.

use std::ops::Mul;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Pow, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TorsionError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("{0} must be at least 1")]
    NonPositive(&'static str),
    #[error("exhaustive splitting check supports g <= {limit}, got {g}")]
    TooLarge { g: u64, limit: u64 },
    #[error("residue field size {0}^{1} overflows")]
    Overflow(u64, u32),
}

/// `a + b * sqrt(q)` for a fixed positive integer `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticInteger {
    pub a: BigInt,
    pub b: BigInt,
    q: BigUint,
}

impl QuadraticInteger {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, q: impl Into<BigUint>) -> Self {
        QuadraticInteger {
            a: a.into(),
            b: b.into(),
            q: q.into(),
        }
    }

    pub fn one(q: impl Into<BigUint>) -> Self {
        QuadraticInteger::new(1, 0, q)
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    /// `a^2 - q b^2`, multiplicative.
    pub fn norm(&self) -> BigInt {
        &self.a * &self.a - BigInt::from(self.q.clone()) * &self.b * &self.b
    }

    pub fn pow(&self, mut e: u64) -> QuadraticInteger {
        let mut base = self.clone();
        let mut acc = QuadraticInteger::one(self.q.clone());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Exact `floor(a + b sqrt(q))`.
    pub fn floor(&self) -> BigInt {
        let b2q = BigInt::from(self.q.clone()) * &self.b * &self.b;
        let s = b2q.magnitude().sqrt();
        match self.b.sign() {
            Sign::NoSign => self.a.clone(),
            Sign::Plus => &self.a + BigInt::from(s),
            Sign::Minus => {
                // -ceil(|b| sqrt(q))
                let exact = &s * &s == *b2q.magnitude();
                let ceil = if exact { s } else { s + 1u8 };
                &self.a - BigInt::from(ceil)
            }
        }
    }
}

impl Mul for &QuadraticInteger {
    type Output = QuadraticInteger;

    fn mul(self, rhs: &QuadraticInteger) -> QuadraticInteger {
        assert_eq!(self.q, rhs.q, "quadratic integers over different radicands");
        let q = BigInt::from(self.q.clone());
        QuadraticInteger {
            a: &self.a * &rhs.a + q * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
            q: self.q.clone(),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d: &u64| d.saturating_mul(*d) <= n).all(|d| !n.is_multiple_of(d))
}

/// `Some((p, k))` with `q = p^k`, `k >= 1`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..)
        .take_while(|d: &u64| d.saturating_mul(*d) <= q)
        .find(|d| q.is_multiple_of(*d))
        .unwrap_or(q);
    let (mut rest, mut k) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

/// `floor((sqrt(q) + 1)^(2g))`, the largest number of `F_q`-points of a
/// connected commutative algebraic group of dimension `g`.
pub fn bound_b(g: u64, q: u64) -> Result<BigUint, TorsionError> {
    if prime_power(q).is_none() {
        return Err(TorsionError::NotPrimePower(q));
    }
    let x = QuadraticInteger::new(1, 1, q).pow(2 * g);
    Ok(x.floor().to_biguint().expect("positive"))
}

/// Checks that the pure abelian splitting dominates: the maximum over
/// `g_u + g_t + g_a = g` of `q^g_u (q+1)^g_t floor((sqrt(q)+1)^(2 g_a))`
/// equals [`bound_b`].
pub fn dominance_check(g: u64, q: u64) -> Result<bool, TorsionError> {
    const LIMIT: u64 = 6;
    if g > LIMIT {
        return Err(TorsionError::TooLarge { g, limit: LIMIT });
    }
    let target = bound_b(g, q)?;
    let mut best = BigUint::zero();
    for gu in 0..=g {
        for gt in 0..=g - gu {
            let ga = g - gu - gt;
            let v = BigUint::from(q).pow(gu as u32)
                * BigUint::from(q + 1).pow(gt as u32)
                * bound_b(ga, q)?;
            best = best.max(v);
        }
    }
    Ok(best == target)
}

/// Input to [`torsion_order_bound`]: group dimension, a level `N` such that
/// everything has good reduction away from `N`, and a degree bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundQuery {
    pub g: u64,
    pub level: u64,
    pub degree: u32,
}

impl BoundQuery {
    pub fn new(g: u64, level: u64, degree: u32) -> Result<Self, TorsionError> {
        if level == 0 {
            return Err(TorsionError::NonPositive("N"));
        }
        if degree == 0 {
            return Err(TorsionError::NonPositive("d"));
        }
        Ok(BoundQuery { g, level, degree })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TorsionBound {
    pub p: u64,
    pub l: u64,
    #[serde(serialize_with = "crate::json::serialize_uint")]
    pub bound_p: BigUint,
    #[serde(serialize_with = "crate::json::serialize_uint")]
    pub bound_l: BigUint,
    #[serde(serialize_with = "crate::json::serialize_uint")]
    pub bound: BigUint,
}

/// Bound on the order of torsion values of a section at points of degree at
/// most `d`: the two smallest primes `p < l` not dividing `N` give
/// `b(g, p^d) * b(g, l^d)`.
pub fn torsion_order_bound(query: &BoundQuery) -> Result<TorsionBound, TorsionError> {
    let mut good = (2u64..).filter(|&n| is_prime(n) && !query.level.is_multiple_of(n));
    let p = good.next().expect("infinitely many primes");
    let l = good.next().expect("infinitely many primes");
    let field = |r: u64| r.checked_pow(query.degree).ok_or(TorsionError::Overflow(r, query.degree));
    let bound_p = bound_b(query.g, field(p)?)?;
    let bound_l = bound_b(query.g, field(l)?)?;
    Ok(TorsionBound {
        p,
        l,
        bound: &bound_p * &bound_l,
        bound_p,
        bound_l,
    })
}
