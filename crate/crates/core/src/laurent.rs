//! Exact Laurent polynomials in one variable with arbitrary precision
//! integer coefficients.
//!
//! The same type carries plucking polynomials in `q` and bracket
//! coefficients in `A`; the variable name only matters when rendering or
//! parsing.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("substitution exponent must be nonzero")]
    ZeroExponent,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("non-divisible: remainder is nonzero")]
    NotDivisible,
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

/// Sparse map from exponent to nonzero coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Laurent {
    terms: BTreeMap<i64, BigInt>,
}

impl Laurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn monomial<C: Into<BigInt>>(c: C, e: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c.into());
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<C, I>(terms: I) -> Self
    where
        C: Into<BigInt>,
        I: IntoIterator<Item = (i64, C)>,
    {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c.into());
        }
        p
    }

    /// Coefficients listed from exponent `lo` upward.
    pub fn from_coeffs(lo: i64, coeffs: &[i64]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(i, &c)| (lo + i as i64, c)))
    }

    fn add_term(&mut self, e: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        self.terms.get(&e).cloned().unwrap_or_default()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// `Some((c, e))` when the polynomial is the single term `c*x^e`.
    pub fn as_monomial(&self) -> Option<(&BigInt, i64)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(&e, c)| (c, e))
        } else {
            None
        }
    }

    pub fn monomial_shift(&self, e: i64) -> Self {
        Self { terms: self.terms.iter().map(|(&k, c)| (k + e, c.clone())).collect() }
    }

    pub fn mul_scalar<C: Into<BigInt>>(&self, c: C) -> Self {
        let c = c.into();
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(&k, v)| (k, v * &c)).collect() }
    }

    /// `q^{-min deg} p`, and 0 for 0.
    pub fn star_normalize(&self) -> Self {
        match self.min_degree() {
            Some(lo) => self.monomial_shift(-lo),
            None => Self::zero(),
        }
    }

    /// Replaces the variable `q` by `A^e`.
    pub fn substitute_power(&self, e: i64) -> Result<Self, LaurentError> {
        if e == 0 {
            return Err(LaurentError::ZeroExponent);
        }
        Ok(Self { terms: self.terms.iter().map(|(&k, c)| (k * e, c.clone())).collect() })
    }

    /// `p(x^{-1})`.
    pub fn reversed(&self) -> Self {
        self.substitute_power(-1).expect("nonzero exponent")
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Gaussian binomial coefficient via the Pascal recurrence
    /// `[n,k] = [n-1,k-1] + q^k [n-1,k]`.
    pub fn q_binomial(n: u32, k: i64) -> Self {
        if k < 0 || k > n as i64 {
            return Self::zero();
        }
        let k = k as usize;
        let mut row: Vec<Laurent> = vec![Self::one()];
        for i in 1..=n as usize {
            let mut next = Vec::with_capacity(i + 1);
            for j in 0..=i {
                let mut v = Self::zero();
                if j >= 1 {
                    v = &v + &row[j - 1];
                }
                if j < i {
                    v = &v + &row[j].monomial_shift(j as i64);
                }
                next.push(v);
            }
            row = next;
        }
        row.swap_remove(k)
    }

    /// `[n]_q = 1 + q + ... + q^{n-1}`.
    pub fn q_integer(n: u32) -> Self {
        Self::from_terms((0..n as i64).map(|e| (e, 1)))
    }

    /// Exact quotient `self / d`, or an error when `d` does not divide.
    pub fn div_exact(&self, d: &Laurent) -> Result<Self, LaurentError> {
        let (d_lo, d_hi) = match (d.min_degree(), d.max_degree()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(LaurentError::DivisionByZero),
        };
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let lead = &d.terms[&d_hi];
        let mut rem = self.clone();
        let mut quot = Self::zero();
        let p_lo = self.min_degree().expect("nonzero");
        while let Some(r_hi) = rem.max_degree() {
            // every quotient term lands at or above p_lo - d_lo
            if r_hi - d_hi < p_lo - d_lo {
                return Err(LaurentError::NotDivisible);
            }
            let c = &rem.terms[&r_hi];
            if !(c % lead).is_zero() {
                return Err(LaurentError::NotDivisible);
            }
            let t = Self::monomial(c / lead, r_hi - d_hi);
            rem = &rem - &(&t * d);
            quot = &quot + &t;
        }
        debug_assert_eq!(&(&quot * d), self);
        Ok(quot)
    }

    /// Evaluates at an integer point; exponents must be nonnegative unless
    /// `x` is a unit.
    pub fn eval_i64(&self, x: i64) -> BigInt {
        let mut acc = BigInt::zero();
        for (&e, c) in &self.terms {
            let v = if e >= 0 {
                num_traits::pow(BigInt::from(x), e as usize)
            } else {
                assert!(x == 1 || x == -1, "negative exponent at a non-unit");
                num_traits::pow(BigInt::from(x), (-e) as usize)
            };
            acc += c * v;
        }
        acc
    }

    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (&e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            if e == 0 {
                out.push_str(&a.to_string());
                continue;
            }
            if !a.is_one() {
                out.push_str(&a.to_string());
                out.push('*');
            }
            out.push_str(var);
            if e != 1 {
                out.push('^');
                out.push_str(&e.to_string());
            }
        }
        out
    }

    pub fn parse(s: &str, var: &str) -> Result<Self, LaurentError> {
        let err = |m: &str| LaurentError::Parse(format!("{m} in {s:?}"));
        let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return Err(err("empty input"));
        }
        let bytes = src.as_bytes();
        let mut p = Self::zero();
        let mut i = 0;
        while i < bytes.len() {
            let mut sign = BigInt::one();
            if bytes[i] == b'+' || bytes[i] == b'-' {
                if bytes[i] == b'-' {
                    sign = -sign;
                }
                i += 1;
            } else if i != 0 {
                return Err(err("expected '+' or '-'"));
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let coef = if i > start {
                src[start..i].parse::<BigInt>().map_err(|_| err("bad coefficient"))?
            } else {
                BigInt::one()
            };
            let has_coef = i > start;
            if has_coef {
                if i < bytes.len() && bytes[i] == b'*' {
                    i += 1;
                    if !src[i..].starts_with(var) {
                        return Err(err("expected variable after '*'"));
                    }
                } else if src[i..].starts_with(var) {
                    return Err(err("missing '*' between coefficient and variable"));
                }
            }
            let mut e = 0i64;
            if src[i..].starts_with(var) {
                i += var.len();
                e = 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let es = i;
                    if i < bytes.len() && bytes[i] == b'-' {
                        i += 1;
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    e = src[es..i].parse().map_err(|_| err("bad exponent"))?;
                }
            } else if !has_coef {
                return Err(err("empty term"));
            }
            p.add_term(e, sign * coef);
        }
        Ok(p)
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("A"))
    }
}

impl<'a> Add<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&Laurent> for Laurent {
    fn add_assign(&mut self, rhs: &Laurent) {
        for (&e, c) in &rhs.terms {
            self.add_term(e, c.clone());
        }
    }
}

impl<'a> Sub<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(e, -c);
        }
        out
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        Laurent { terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect() }
    }
}

impl<'a> Mul<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &Laurent) -> Laurent {
        let mut out = Laurent::zero();
        for (&e1, c1) in &self.terms {
            for (&e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Laurent> for Laurent {
            type Output = Laurent;
            fn $m(self, rhs: Laurent) -> Laurent {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Laurent> for Laurent {
            type Output = Laurent;
            fn $m(self, rhs: &Laurent) -> Laurent {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl std::iter::Product for Laurent {
    fn product<I: Iterator<Item = Laurent>>(iter: I) -> Laurent {
        iter.fold(Laurent::one(), |acc, p| &acc * &p)
    }
}

impl<'a> std::iter::Product<&'a Laurent> for Laurent {
    fn product<I: Iterator<Item = &'a Laurent>>(iter: I) -> Laurent {
        iter.fold(Laurent::one(), |acc, p| &acc * p)
    }
}

impl std::iter::Sum for Laurent {
    fn sum<I: Iterator<Item = Laurent>>(iter: I) -> Laurent {
        iter.fold(Laurent::zero(), |mut acc, p| {
            acc += &p;
            acc
        })
    }
}

/// `-A^2 - A^{-2}`, the value of a trivial loop.
pub fn loop_value() -> Laurent {
    Laurent::from_terms([(2, -1), (-2, -1)])
}
