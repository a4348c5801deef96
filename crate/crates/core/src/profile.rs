//! Warping functions `f(r) = r (1+r^2)^{-1/4}`, `h_i(r) = (1+r^2)^{-alpha_i}`, their
//! derivative ratios, and exact radial expressions that reduce to polynomials.

use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{
    exp_to_q, positive_from_one, q, q_frac, q_to_f64, Exponent, HalfLineVerdict, IntPoly,
    SparsePoly, SturmOptions, TPoly,
};

pub const MAX_N: usize = 6;

/// `alpha_i = 2^{n-i+1} + 2^{-1-i} - 1/2` for `i = 1..=n`.
pub fn alphas(n: usize) -> Result<Vec<Exponent>> {
    if n == 0 || n > MAX_N {
        return Err(Error::OutOfRange(format!("n = {n}, expected 1..={MAX_N}")));
    }
    Ok((1..=n)
        .map(|i| {
            Exponent::from_integer(1 << (n - i + 1)) + Exponent::new(1, 1 << (i + 1))
                - Exponent::new(1, 2)
        })
        .collect())
}

/// `2^{n+1}`; also `2 alpha_1 + 1/2`.
pub fn big_n(n: usize) -> i64 {
    1 << (n + 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WarpProfile {
    pub n: usize,
    pub alphas: Vec<Exponent>,
}

impl WarpProfile {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self { n, alphas: alphas(n)? })
    }

    /// 1-based.
    pub fn alpha(&self, i: usize) -> Exponent {
        self.alphas[i - 1]
    }

    pub fn alpha_q(&self, i: usize) -> BigRational {
        exp_to_q(self.alpha(i))
    }

    pub fn alpha_f64(&self, i: usize) -> f64 {
        let a = self.alpha(i);
        *a.numer() as f64 / *a.denom() as f64
    }

    pub fn alphas_f64(&self) -> Vec<f64> {
        (1..=self.n).map(|i| self.alpha_f64(i)).collect()
    }

    pub fn eval(&self, r: f64) -> RadialEval {
        RadialEval::new(self.alphas_f64(), r)
    }
}

/// Values of the warping functions at one radius. Derivative ratios come from the
/// closed forms, so they are finite at `r = 0` where `f` vanishes.
#[derive(Clone, Debug, Serialize)]
pub struct RadialEval {
    pub r: f64,
    pub alphas: Vec<f64>,
    pub f: f64,
    pub df: f64,
    pub ddf: f64,
    pub h: Vec<f64>,
    pub dh: Vec<f64>,
    pub ddh: Vec<f64>,
}

pub fn radial_eval(n: usize, r: f64) -> Result<RadialEval> {
    Ok(WarpProfile::new(n)?.eval(r))
}

impl RadialEval {
    pub fn new(alphas: Vec<f64>, r: f64) -> Self {
        let s = r * r;
        let t = 1.0 + s;
        let lt = s.ln_1p();
        let f = r * (-0.25 * lt).exp();
        // f' = (1 + s/2) t^{-5/4}, f'' = -r (3/2 + s/4) t^{-9/4}
        let df = (1.0 + 0.5 * s) * (-1.25 * lt).exp();
        let ddf = -r * (1.5 + 0.25 * s) * (-2.25 * lt).exp();
        let h: Vec<f64> = alphas.iter().map(|a| (-a * lt).exp()).collect();
        let dh = alphas
            .iter()
            .zip(&h)
            .map(|(a, hi)| -2.0 * a * r / t * hi)
            .collect();
        let ddh = alphas
            .iter()
            .zip(&h)
            .map(|(a, hi)| 2.0 * a * ((2.0 * a + 1.0) * s - 1.0) / (t * t) * hi)
            .collect();
        Self { r, alphas, f, df, ddf, h, dh, ddh }
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn s(&self) -> f64 {
        self.r * self.r
    }

    pub fn t(&self) -> f64 {
        1.0 + self.s()
    }

    /// `f'/f`; infinite at the origin.
    pub fn f_ratio1(&self) -> f64 {
        (1.0 + 0.5 * self.s()) / (self.r * self.t())
    }

    /// `f''/f`.
    pub fn f_ratio2(&self) -> f64 {
        -(1.5 + 0.25 * self.s()) / (self.t() * self.t())
    }

    /// `h_i'/h_i`, 1-based.
    pub fn h_ratio1(&self, i: usize) -> f64 {
        -2.0 * self.alphas[i - 1] * self.r / self.t()
    }

    /// `h_i''/h_i`.
    pub fn h_ratio2(&self, i: usize) -> f64 {
        let a = self.alphas[i - 1];
        let t = self.t();
        2.0 * a * ((2.0 * a + 1.0) * self.s() - 1.0) / (t * t)
    }

    /// `(h_i' f')/(h_i f)`, limit `-2 alpha_i` at the origin.
    pub fn hf_ratio(&self, i: usize) -> f64 {
        let t = self.t();
        -2.0 * self.alphas[i - 1] * (1.0 + 0.5 * self.s()) / (t * t)
    }

    /// `(1 - f'^2)/f^2`, limit `3/2` at the origin.
    pub fn fiber_curvature(&self) -> f64 {
        fiber_curvature(self.s())
    }
}

/// `(1 - f'^2)/f^2 = (t^{5/2} - (1+s/2)^2)/(s t^2)` without cancellation at small `s`.
pub fn fiber_curvature(s: f64) -> f64 {
    if s == 0.0 {
        return 1.5;
    }
    let t = 1.0 + s;
    let num = (2.5 * s.ln_1p()).exp_m1() - s - 0.25 * s * s;
    num / (s * t * t)
}

/// Positive denominator `t^t_pow * s^s_pow * D^w_pow` where `D` is a weight polynomial in
/// `t` that is positive on `t >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Den {
    pub t_pow: Exponent,
    pub s_pow: u32,
    pub w_pow: u32,
}

/// A rational radial function `num(t) / (t^a s^b D^c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadialFn {
    pub num: TPoly,
    pub den: Den,
    /// The weight `D`; empty when no power of it has appeared yet.
    pub weight: TPoly,
}

impl RadialFn {
    pub fn zero() -> Self {
        Self::from_tpoly(TPoly::zero())
    }

    pub fn from_tpoly(num: TPoly) -> Self {
        Self {
            num,
            den: Den::default(),
            weight: TPoly::zero(),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_tpoly(TPoly::constant(c))
    }

    pub fn new(num: TPoly, t_pow: Exponent, s_pow: u32) -> Self {
        Self {
            num,
            den: Den {
                t_pow,
                s_pow,
                w_pow: 0,
            },
            weight: TPoly::zero(),
        }
    }

    /// `num / (t^a s^b D^c)` with explicit weight `D`.
    pub fn with_weight(num: TPoly, t_pow: Exponent, s_pow: u32, weight: &TPoly, w_pow: u32) -> Self {
        Self {
            num,
            den: Den {
                t_pow,
                s_pow,
                w_pow,
            },
            weight: if w_pow > 0 { weight.clone() } else { TPoly::zero() },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self {
            num: self.num.scale(c),
            ..self.clone()
        }
    }

    fn merged_weight(&self, other: &Self) -> TPoly {
        match (self.den.w_pow, other.den.w_pow) {
            (0, _) => other.weight.clone(),
            (_, 0) => self.weight.clone(),
            _ => {
                assert_eq!(self.weight, other.weight, "mixing different weights");
                self.weight.clone()
            }
        }
    }

    /// Rewrites `self` over the denominator `den`, which must be a multiple of the own one.
    fn lift(&self, den: &Den, weight: &TPoly) -> TPoly {
        let mut num = self.num.shift(den.t_pow - self.den.t_pow);
        let ds = den.s_pow - self.den.s_pow;
        if ds > 0 {
            num = &num * &TPoly::s().pow(ds);
        }
        let dw = den.w_pow - self.den.w_pow;
        if dw > 0 {
            num = &num * &weight.pow(dw);
        }
        num
    }

    fn common_den(&self, other: &Self) -> Den {
        Den {
            t_pow: self.den.t_pow.max(other.den.t_pow),
            s_pow: self.den.s_pow.max(other.den.s_pow),
            w_pow: self.den.w_pow.max(other.den.w_pow),
        }
    }

    /// Value at radius `r`, straight from the representation. Overflows for large `r`
    /// when the weight has high degree; numerics at scale use the stable forms instead.
    pub fn eval(&self, r: f64) -> f64 {
        let t = 1.0 + r * r;
        let s = r * r;
        let mut den = t.powf(q_exp(self.den.t_pow)) * s.powi(self.den.s_pow as i32);
        if self.den.w_pow > 0 {
            den *= self.weight.eval_t(t).powi(self.den.w_pow as i32);
        }
        self.num.eval_t(t) / den
    }

    /// Smallest `q` such that all exponents are multiples of `1/q`.
    pub fn root(&self) -> u64 {
        let mut q = self.num.root_denominator().max(1);
        q = num_integer::lcm(q, *self.den.t_pow.denom());
        if self.den.w_pow > 0 {
            q = num_integer::lcm(q, self.weight.root_denominator());
        }
        q as u64
    }

    /// Numerator as a polynomial in `u = t^{1/root}`, multiplied by the smallest power of
    /// `u` that clears negative exponents. Returns the polynomial and that power.
    pub fn numerator_poly(&self, root: u64) -> Result<(SparsePoly, i64)> {
        let Some(lo) = self.num.min_exponent() else {
            return Ok((SparsePoly::zero(), 0));
        };
        let shift = if lo < Exponent::zero() { -lo } else { Exponent::zero() };
        let p = self.num.to_upoly(root, shift)?;
        let k = shift * Exponent::from_integer(root as i64);
        Ok((p, k.to_integer()))
    }

    /// Exact decision of `self(r) > 0` for all `r >= 0`.
    pub fn certify_positive(&self, opts: &SturmOptions) -> RowVerdict {
        if self.num.is_zero() {
            return RowVerdict::NotPositive { witness_r: 0.0 };
        }
        let root = self.root();
        let (poly, _) = match self.numerator_poly(root) {
            Ok(v) => v,
            Err(e) => return RowVerdict::Inconclusive(e.to_string()),
        };
        if poly.degree().unwrap_or(0) as usize > opts.max_degree {
            return RowVerdict::Inconclusive(format!(
                "numerator degree {} exceeds {}",
                poly.degree().unwrap_or(0),
                opts.max_degree
            ));
        }
        let ip = poly.to_int_poly();
        certify_int_numerator(&ip, root, self.den.s_pow as usize, opts)
    }
}

impl RadialFn {
    /// Exact decision of `self(r) >= 0` for all `r >= 0`, with equality allowed only at
    /// the origin: every factor `(u - 1)` is divided out before the half-line check.
    pub fn certify_nonnegative(&self, opts: &SturmOptions) -> RowVerdict {
        if self.num.is_zero() {
            return RowVerdict::NotPositive { witness_r: 0.0 };
        }
        let root = self.root();
        let poly = match self.numerator_poly(root) {
            Ok((p, _)) => p.to_int_poly(),
            Err(e) => return RowVerdict::Inconclusive(e.to_string()),
        };
        let (mult, rest) = poly.strip_root_at_one();
        if mult < self.den.s_pow as usize {
            return RowVerdict::Inconclusive("pole at the origin".into());
        }
        let degree = rest.degree().unwrap_or(0);
        match positive_from_one(&rest, opts) {
            HalfLineVerdict::Positive(method) => RowVerdict::Positive { degree, method },
            HalfLineVerdict::NotPositive { witness_u } => RowVerdict::NotPositive {
                witness_r: u_to_r(witness_u, root),
            },
            HalfLineVerdict::Inconclusive(why) => RowVerdict::Inconclusive(why),
        }
    }
}

fn q_exp(e: Exponent) -> f64 {
    *e.numer() as f64 / *e.denom() as f64
}

/// `u` to `r` for `u = t^{1/root}`.
pub fn u_to_r(u: f64, root: u64) -> f64 {
    let t = u.powf(root as f64);
    (t - 1.0).max(0.0).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub enum RowVerdict {
    Positive { degree: usize, method: crate::poly::PositivityMethod },
    NotPositive { witness_r: f64 },
    Inconclusive(String),
}

impl RowVerdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, RowVerdict::Positive { .. })
    }
}

/// Positivity of `P(u) / (u^root - 1)^b` times a positive factor on `u >= 1`, where `P`
/// is the integer numerator. At `u = 1` the value is the limit.
pub fn certify_int_numerator(p: &IntPoly, root: u64, s_pow: usize, opts: &SturmOptions) -> RowVerdict {
    let (mult, rest) = p.strip_root_at_one();
    if mult > s_pow {
        return RowVerdict::NotPositive { witness_r: 0.0 };
    }
    if mult < s_pow {
        return RowVerdict::Inconclusive(format!(
            "pole of order {} at the origin",
            s_pow - mult
        ));
    }
    let degree = rest.degree().unwrap_or(0);
    match positive_from_one(&rest, opts) {
        HalfLineVerdict::Positive(method) => RowVerdict::Positive { degree, method },
        HalfLineVerdict::NotPositive { witness_u } => RowVerdict::NotPositive {
            witness_r: u_to_r(witness_u, root),
        },
        HalfLineVerdict::Inconclusive(why) => RowVerdict::Inconclusive(why),
    }
}

impl Add for &RadialFn {
    type Output = RadialFn;
    fn add(self, rhs: &RadialFn) -> RadialFn {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let den = self.common_den(rhs);
        let weight = self.merged_weight(rhs);
        let num = &self.lift(&den, &weight) + &rhs.lift(&den, &weight);
        RadialFn { num, den, weight }
    }
}

impl Sub for &RadialFn {
    type Output = RadialFn;
    fn sub(self, rhs: &RadialFn) -> RadialFn {
        self + &(-rhs)
    }
}

impl Neg for &RadialFn {
    type Output = RadialFn;
    fn neg(self) -> RadialFn {
        self.scale(&q(-1))
    }
}

impl Mul for &RadialFn {
    type Output = RadialFn;
    fn mul(self, rhs: &RadialFn) -> RadialFn {
        let weight = self.merged_weight(rhs);
        RadialFn {
            num: &self.num * &rhs.num,
            den: Den {
                t_pow: self.den.t_pow + rhs.den.t_pow,
                s_pow: self.den.s_pow + rhs.den.s_pow,
                w_pow: self.den.w_pow + rhs.den.w_pow,
            },
            weight,
        }
    }
}

/// Exact building blocks in terms of `t` and `s = t - 1`.
pub mod exact {
    use super::*;

    pub fn t_pow(e: Exponent) -> TPoly {
        TPoly::t_pow(e)
    }

    pub fn half_plus(s_coeff: BigRational, c: BigRational) -> TPoly {
        // c + s_coeff * s
        &TPoly::constant(c) + &TPoly::s().scale(&s_coeff)
    }

    /// `1 + s/2`.
    pub fn one_plus_half_s() -> TPoly {
        half_plus(q_frac(1, 2), q(1))
    }

    /// `(1 - f'^2)/f^2`.
    pub fn fiber_curvature() -> RadialFn {
        let num = &t_pow(Exponent::new(5, 2)) - &one_plus_half_s().pow(2);
        RadialFn::new(num, Exponent::from_integer(2), 1)
    }

    /// `f''/f`.
    pub fn f_ratio2() -> RadialFn {
        RadialFn::new(-&half_plus(q_frac(1, 4), q_frac(3, 2)), Exponent::from_integer(2), 0)
    }

    /// `h''/h` for exponent `alpha`.
    pub fn h_ratio2(alpha: &BigRational) -> RadialFn {
        let two_a = alpha * q(2);
        let num = half_plus(&two_a * (&two_a + q(1)), -two_a);
        RadialFn::new(num, Exponent::from_integer(2), 0)
    }

    /// `(h' f')/(h f)` for exponent `alpha`.
    pub fn hf_ratio(alpha: &BigRational) -> RadialFn {
        let num = one_plus_half_s().scale(&(alpha * q(-2)));
        RadialFn::new(num, Exponent::from_integer(2), 0)
    }

    /// `(h_i' h_j')/(h_i h_j) = 4 alpha_i alpha_j s / t^2`.
    pub fn hh_ratio(ai: &BigRational, aj: &BigRational) -> RadialFn {
        RadialFn::new(TPoly::s().scale(&(ai * aj * q(4))), Exponent::from_integer(2), 0)
    }

    /// `(f/h_1)^2 = s t^{N-1}`.
    pub fn f_over_h1_squared(n: usize) -> TPoly {
        &TPoly::s() * &t_pow(Exponent::from_integer(big_n(n) - 1))
    }
}

/// Named radial expressions that convert to polynomials in `u`.
#[derive(Clone, Debug)]
pub enum RadialExpr {
    /// `1 + r^2`.
    OnePlusRSquared,
    RSquared,
    /// `(f/h_1)^2`.
    FOverH1Squared,
    /// `(1 - f'^2)/f^2`.
    FiberCurvature,
    /// `f''/f`.
    FRatio2,
    /// `h_i''/h_i`, 1-based.
    HRatio2(usize),
    /// `(h_i' f')/(h_i f)`.
    HfRatio(usize),
    /// Any function assembled by the curvature modules.
    Fn(RadialFn),
}

impl RadialExpr {
    pub fn to_fn(&self, n: usize) -> Result<RadialFn> {
        let prof = WarpProfile::new(n)?;
        let check = |i: usize| {
            if i == 0 || i > n {
                Err(Error::IndexOutOfRange { index: i, min: 1, max: n })
            } else {
                Ok(())
            }
        };
        Ok(match self {
            RadialExpr::OnePlusRSquared => RadialFn::from_tpoly(TPoly::t_pow(Exponent::one())),
            RadialExpr::RSquared => RadialFn::from_tpoly(TPoly::s()),
            RadialExpr::FOverH1Squared => RadialFn::from_tpoly(exact::f_over_h1_squared(n)),
            RadialExpr::FiberCurvature => exact::fiber_curvature(),
            RadialExpr::FRatio2 => exact::f_ratio2(),
            RadialExpr::HRatio2(i) => {
                check(*i)?;
                exact::h_ratio2(&prof.alpha_q(*i))
            }
            RadialExpr::HfRatio(i) => {
                check(*i)?;
                exact::hf_ratio(&prof.alpha_q(*i))
            }
            RadialExpr::Fn(f) => f.clone(),
        })
    }
}

/// A radial expression as a polynomial in `u = (1+r^2)^{1/2^{n+1}}`, `u >= 1`:
/// `expr = poly(u) / (u^u_shift * s^s_pow * D^w_pow)`.
#[derive(Clone, Debug)]
pub struct RadialPoly {
    pub n: usize,
    pub root: u64,
    pub poly: SparsePoly,
    pub u_shift: i64,
    pub den: Den,
    pub weight: TPoly,
}

pub fn to_poly(expr: &RadialExpr, n: usize) -> Result<RadialPoly> {
    let f = expr.to_fn(n)?;
    let root = big_n(n) as u64;
    let den_root = f.root();
    if root % den_root != 0 {
        return Err(Error::ExponentDenominator {
            exponent: format!("1/{den_root}"),
            root,
        });
    }
    let (poly, num_shift) = f.numerator_poly(root)?;
    let t_shift = f.den.t_pow * Exponent::from_integer(root as i64);
    Ok(RadialPoly {
        n,
        root,
        poly,
        u_shift: num_shift + t_shift.to_integer(),
        den: Den {
            t_pow: Exponent::zero(),
            ..f.den
        },
        weight: f.weight,
    })
}

impl RadialPoly {
    pub fn u_of_r(&self, r: f64) -> f64 {
        (r * r).ln_1p().mul_add(1.0 / self.root as f64, 0.0).exp()
    }

    pub fn eval_u(&self, u: f64) -> f64 {
        let s = u.powf(self.root as f64) - 1.0;
        let mut den = u.powf(self.u_shift as f64) * s.powi(self.den.s_pow as i32);
        if self.den.w_pow > 0 {
            den *= self.weight.eval_t(1.0 + s).powi(self.den.w_pow as i32);
        }
        self.poly.eval(u) / den
    }

    pub fn eval_r(&self, r: f64) -> f64 {
        self.eval_u(self.u_of_r(r))
    }
}

/// Radius beyond which the leading monomial of `p` dominates the rest: every other term
/// is at most `1/(2(d+1))` of it, so the sign equals the leading sign. Returned in `u`.
pub fn tail_bound_u(p: &IntPoly) -> f64 {
    let Some(d) = p.degree() else { return 1.0 };
    let lead = crate::poly::tpoly::ln_abs_int(p.lead().unwrap());
    let mut ln_b: f64 = 0.0;
    for (j, c) in p.coeffs().iter().enumerate().take(d) {
        if c.is_zero() {
            continue;
        }
        let v = ((2.0 * (d as f64 + 1.0)).ln() + crate::poly::tpoly::ln_abs_int(c) - lead)
            / (d - j) as f64;
        ln_b = ln_b.max(v);
    }
    ln_b.exp().max(1.0)
}

pub fn q_value(c: &BigRational) -> f64 {
    q_to_f64(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alphas(1).unwrap(), vec![Exponent::new(7, 4)]);
        assert_eq!(
            alphas(3).unwrap(),
            vec![Exponent::new(31, 4), Exponent::new(29, 8), Exponent::new(25, 16)]
        );
        for n in 1..=MAX_N {
            let a = alphas(n).unwrap();
            assert_eq!(a[0], Exponent::from_integer(1 << n) - Exponent::new(1, 4));
            assert!(a.windows(2).all(|w| w[0] > w[1]));
            assert!(*a.last().unwrap() > Exponent::zero());
            assert_eq!(a[0] * 2 + Exponent::new(1, 2), Exponent::from_integer(big_n(n)));
        }
        assert!(alphas(0).is_err());
        assert!(alphas(7).is_err());
    }

    #[test]
    fn origin_values() {
        let e = radial_eval(3, 0.0).unwrap();
        assert_eq!(e.f, 0.0);
        assert_eq!(e.df, 1.0);
        assert_eq!(e.ddf, 0.0);
        for i in 0..3 {
            assert_eq!(e.h[i], 1.0);
            assert_eq!(e.dh[i], 0.0);
            assert_eq!(e.ddh[i], -2.0 * e.alphas[i]);
        }
        assert_eq!(e.fiber_curvature(), 1.5);
        assert_eq!(e.hf_ratio(1), -2.0 * e.alphas[0]);
    }

    #[test]
    fn unit_radius_values() {
        let e = radial_eval(1, 1.0).unwrap();
        assert!((e.f - 2f64.powf(-0.25)).abs() < 1e-15);
        assert!((e.df / e.f - 0.75).abs() < 1e-14);
        assert!((e.f_ratio1() - 0.75).abs() < 1e-15);
        assert!((e.h_ratio1(1) + 1.75).abs() < 1e-15);
        assert!(((e.f / e.h[0]).powi(2) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn fiber_curvature_continuous() {
        // series: (3/2 + 13/8 s + ...)/t^2
        for s in [1e-12, 1e-9, 1e-6] {
            let t = 1.0 + s;
            let series = (1.5 + 13.0 / 8.0 * s) / (t * t);
            assert!((fiber_curvature(s) - series).abs() < 1e-9, "{s}");
        }
        for s in [0.5f64, 3.0, 40.0] {
            let t = 1.0 + s;
            let direct = (t.powf(2.5) - (1.0 + s / 2.0).powi(2)) / (s * t * t);
            assert!((fiber_curvature(s) - direct).abs() < 1e-13 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn poly_examples() {
        let p = to_poly(&RadialExpr::OnePlusRSquared, 1).unwrap();
        assert_eq!(p.poly, SparsePoly::monomial(q(1), 4));
        assert_eq!(p.u_shift, 0);
        let p = to_poly(&RadialExpr::RSquared, 1).unwrap();
        assert_eq!(p.poly, SparsePoly::r_squared(4));
        let p = to_poly(&RadialExpr::FOverH1Squared, 1).unwrap();
        let expect = &SparsePoly::r_squared(4) * &SparsePoly::monomial(q(1), 12);
        assert_eq!(p.poly, expect);
        assert!((p.eval_r(1.0) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn fiber_curvature_inequality_certified() {
        // (1-f'^2)/f^2 - (3/2 + s)/t^2 > 0 is false at r = 0 (equality); >= holds.
        let lower = RadialFn::new(exact::half_plus(q(1), q_frac(3, 2)), Exponent::from_integer(2), 0);
        let diff = &exact::fiber_curvature() - &lower;
        // zero at the origin, so not strictly positive, but nonnegative
        assert_eq!(
            diff.certify_positive(&SturmOptions::default()),
            RowVerdict::NotPositive { witness_r: 0.0 }
        );
        assert!(diff.certify_nonnegative(&SturmOptions::default()).is_positive());
        let worse = &diff - &RadialFn::new(TPoly::s(), Exponent::from_integer(3), 0);
        assert!(!worse.certify_nonnegative(&SturmOptions::default()).is_positive());
    }

    proptest! {
        #[test]
        fn derivatives_match_differences(r in 0.05f64..20.0, n in 1usize..=3) {
            let prof = WarpProfile::new(n).unwrap();
            let h = 1e-5 * (1.0 + r);
            let e = prof.eval(r);
            let fd = central(|x| prof.eval(x).f, r, h);
            prop_assert!((e.df - fd).abs() <= 1e-6 * (1.0 + e.df.abs()));
            let fdd = central(|x| prof.eval(x).df, r, h);
            prop_assert!((e.ddf - fdd).abs() <= 1e-6 * (1.0 + e.ddf.abs()));
            for i in 0..n {
                let dh = central(|x| prof.eval(x).h[i], r, h);
                prop_assert!((e.dh[i] - dh).abs() <= 1e-6 * (1.0 + e.dh[i].abs()));
                let ddh = central(|x| prof.eval(x).dh[i], r, h);
                prop_assert!((e.ddh[i] - ddh).abs() <= 1e-6 * (1.0 + e.ddh[i].abs()));
                prop_assert!(e.dh[i] < 0.0);
            }
        }

        #[test]
        fn poly_round_trip(r in 0.01f64..3.0, n in 1usize..=3, which in 0usize..6) {
            let expr = match which {
                0 => RadialExpr::OnePlusRSquared,
                1 => RadialExpr::RSquared,
                2 => RadialExpr::FOverH1Squared,
                3 => RadialExpr::FiberCurvature,
                4 => RadialExpr::HRatio2(n),
                _ => RadialExpr::HfRatio(1),
            };
            let p = to_poly(&expr, n).unwrap();
            let direct = expr.to_fn(n).unwrap().eval(r);
            let e = WarpProfile::new(n).unwrap().eval(r);
            let closed = match which {
                0 => e.t(),
                1 => e.s(),
                2 => (e.f / e.h[0]).powi(2),
                3 => e.fiber_curvature(),
                4 => e.h_ratio2(n),
                _ => e.hf_ratio(1),
            };
            let via = p.eval_r(r);
            prop_assert!((via - closed).abs() <= 1e-10 * (1.0 + closed.abs()), "{via} {closed}");
            prop_assert!((direct - closed).abs() <= 1e-10 * (1.0 + closed.abs()));
        }
    }
}
