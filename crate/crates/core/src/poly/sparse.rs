use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::tpoly::{ln_abs, q_to_f64};
use super::IntPoly;

/// Sparse univariate polynomial with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparsePoly {
    terms: BTreeMap<u64, BigRational>,
}

impl SparsePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigRational::one(), 0)
    }

    pub fn monomial(c: BigRational, k: u64) -> Self {
        let mut p = Self::zero();
        p.add_term(k, &c);
        p
    }

    /// `u^root - 1`, i.e. `r^2` after the substitution.
    pub fn r_squared(root: u64) -> Self {
        let mut p = Self::monomial(BigRational::one(), root);
        p.add_term(0, &-BigRational::one());
        p
    }

    pub fn add_term(&mut self, k: u64, c: &BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(k).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u64, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, k: u64) -> BigRational {
        self.terms.get(&k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().next_back().copied()
    }

    pub fn leading(&self) -> Option<(u64, &BigRational)> {
        self.terms.iter().next_back().map(|(k, c)| (*k, c))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Floating evaluation; fine for moderate `u` and degree.
    pub fn eval(&self, u: f64) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| q_to_f64(c) * u.powf(*k as f64))
            .sum()
    }

    /// `ln |p(u)|` together with the sign, evaluated by summing in log space relative
    /// to the largest term. Usable where `u^degree` overflows `f64`.
    pub fn eval_log(&self, ln_u: f64) -> (f64, f64) {
        let logs: Vec<(f64, f64)> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let s = if c.is_negative() { -1.0 } else { 1.0 };
                (s, ln_abs(c) + *k as f64 * ln_u)
            })
            .collect();
        let top = logs.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return (0.0, f64::NEG_INFINITY);
        }
        let sum: f64 = logs.iter().map(|(s, l)| s * (l - top).exp()).sum();
        (sum.signum(), top + sum.abs().ln())
    }

    /// Primitive integer polynomial with the same sign as `self` everywhere.
    pub fn to_int_poly(&self) -> IntPoly {
        let Some(deg) = self.degree() else {
            return IntPoly::zero();
        };
        let lcm = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut coeffs = vec![BigInt::zero(); deg as usize + 1];
        for (k, c) in &self.terms {
            coeffs[*k as usize] = c.numer() * (&lcm / c.denom());
        }
        IntPoly::new(coeffs).primitive()
    }
}

impl Add for &SparsePoly {
    type Output = SparsePoly;
    fn add(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c);
        }
        out
    }
}

impl Sub for &SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, &-c);
        }
        out
    }
}

impl Mul for &SparsePoly {
    type Output = SparsePoly;
    fn mul(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &rhs.terms {
                out.add_term(k1 + k2, &(c1 * c2));
            }
        }
        out
    }
}
