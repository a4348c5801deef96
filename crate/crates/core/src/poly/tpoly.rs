use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::SparsePoly;
use crate::error::{Error, Result};

/// Exponent of `t = 1 + r^2`. Every exponent that occurs is dyadic.
pub type Exponent = Ratio<i64>;

/// A finite sum `sum_e c_e t^e` with rational coefficients and rational exponents,
/// where `t = 1 + r^2`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TPoly {
    terms: BTreeMap<Exponent, BigRational>,
}

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Converts a dyadic exponent to an exact rational coefficient.
pub fn exp_to_q(e: Exponent) -> BigRational {
    q_frac(*e.numer(), *e.denom())
}

impl TPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, Exponent::zero())
    }

    pub fn int(c: i64) -> Self {
        Self::constant(q(c))
    }

    pub fn monomial(c: BigRational, e: Exponent) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    /// `t^e`.
    pub fn t_pow(e: Exponent) -> Self {
        Self::monomial(BigRational::one(), e)
    }

    /// `r^2 = t - 1`.
    pub fn s() -> Self {
        let mut p = Self::t_pow(Exponent::one());
        p.add_term(Exponent::zero(), &q(-1));
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: Exponent) -> BigRational {
        self.terms.get(&e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, e: Exponent, c: &BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    pub fn shift(&self, by: Exponent) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, v)| (*e + by, v.clone())).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn min_exponent(&self) -> Option<Exponent> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<Exponent> {
        self.terms.keys().next_back().copied()
    }

    /// Least common multiple of all exponent denominators (1 for the zero polynomial).
    pub fn root_denominator(&self) -> i64 {
        self.terms.keys().fold(1i64, |acc, e| acc.lcm(e.denom()))
    }

    /// Floating evaluation at `t`.
    pub fn eval_t(&self, t: f64) -> f64 {
        let lt = t.ln();
        self.terms
            .iter()
            .map(|(e, c)| {
                let ef = *e.numer() as f64 / *e.denom() as f64;
                q_to_f64(c) * (ef * lt).exp()
            })
            .sum()
    }

    /// Floating evaluation at radius `r`.
    pub fn eval_r(&self, r: f64) -> f64 {
        self.eval_t(1.0 + r * r)
    }

    /// Substitutes `t = u^root` after multiplying by `t^shift`; every resulting exponent
    /// must be a nonnegative integer.
    pub fn to_upoly(&self, root: u64, shift: Exponent) -> Result<SparsePoly> {
        let mut out = SparsePoly::zero();
        for (e, c) in &self.terms {
            let scaled = (*e + shift) * Exponent::from_integer(root as i64);
            if !scaled.is_integer() {
                return Err(Error::ExponentDenominator {
                    exponent: e.to_string(),
                    root,
                });
            }
            let k = scaled.to_integer();
            if k < 0 {
                return Err(Error::Degree(format!(
                    "negative power u^{k} after shift by {shift}"
                )));
            }
            out.add_term(k as u64, c);
        }
        Ok(out)
    }
}

pub fn q_to_f64(c: &BigRational) -> f64 {
    match (c.numer().to_f64(), c.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            let sign = if c.is_negative() { -1.0 } else { 1.0 };
            sign * ln_abs(c).exp()
        }
    }
}

/// Natural log of `|c|`, robust for very large numerators and denominators.
pub fn ln_abs(c: &BigRational) -> f64 {
    ln_abs_int(c.numer()) - ln_abs_int(c.denom())
}

pub fn ln_abs_int(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().unwrap_or(1.0).ln() + shift as f64 * std::f64::consts::LN_2
}

impl Add for &TPoly {
    type Output = TPoly;
    fn add(self, rhs: &TPoly) -> TPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c);
        }
        out
    }
}

impl Sub for &TPoly {
    type Output = TPoly;
    fn sub(self, rhs: &TPoly) -> TPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, &-c);
        }
        out
    }
}

impl Neg for &TPoly {
    type Output = TPoly;
    fn neg(self) -> TPoly {
        self.scale(&q(-1))
    }
}

impl Mul for &TPoly {
    type Output = TPoly;
    fn mul(self, rhs: &TPoly) -> TPoly {
        let mut out = TPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(*e1 + *e2, &(c1 * c2));
            }
        }
        out
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format!("({c})t^({e})"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
