use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense univariate polynomial with integer coefficients, lowest degree first.
/// The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    /// Divides out the (positive) content; signs are preserved.
    pub fn primitive(self) -> Self {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self;
        }
        Self::new(self.coeffs.into_iter().map(|c| c / &g).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn value_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    /// Exact division by `(u - 1)` when `p(1) = 0`.
    pub fn div_by_u_minus_one(&self) -> Option<Self> {
        if self.is_zero() || !self.value_at_one().is_zero() {
            return None;
        }
        // Synthetic division from the top.
        let d = self.coeffs.len() - 1;
        let mut q = vec![BigInt::zero(); d];
        let mut carry = BigInt::zero();
        for i in (1..=d).rev() {
            carry += &self.coeffs[i];
            q[i - 1] = carry.clone();
        }
        Some(Self::new(q))
    }

    /// Multiplicity of the root `u = 1` and the cofactor.
    pub fn strip_root_at_one(&self) -> (usize, Self) {
        let mut p = self.clone();
        let mut k = 0;
        while let Some(next) = p.div_by_u_minus_one() {
            p = next;
            k += 1;
        }
        (k, p)
    }

    /// Coefficients of `p(1 + v)`.
    pub fn taylor_shift_one(&self) -> Self {
        let mut a = self.coeffs.clone();
        let n = a.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let next = a[j + 1].clone();
                a[j] += next;
            }
        }
        Self::new(a)
    }

    /// Sign of `p(num/den)` for `den > 0`.
    pub fn sign_at(&self, x: &BigRational) -> Sign {
        if self.is_zero() {
            return Sign::NoSign;
        }
        let (num, den) = (x.numer(), x.denom());
        let d = self.coeffs.len() - 1;
        let mut den_pow = BigInt::one();
        let mut acc = self.coeffs[d].clone();
        for i in (0..d).rev() {
            den_pow *= den;
            acc = acc * num + &self.coeffs[i] * &den_pow;
        }
        acc.sign()
    }

    pub fn sign_at_infinity(&self) -> Sign {
        self.lead().map_or(Sign::NoSign, |c| c.sign())
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Pseudo-remainder `lc(b)^(deg a - deg b + 1) * a mod b` and the sign of the
    /// multiplier.
    pub fn pseudo_rem(&self, b: &Self) -> (Self, Sign) {
        let db = b.degree().expect("pseudo_rem by zero polynomial");
        let lb = b.lead().unwrap().clone();
        let Some(da) = self.degree() else {
            return (Self::zero(), Sign::Plus);
        };
        if da < db {
            return (self.clone(), Sign::Plus);
        }
        let mut r = self.coeffs.clone();
        let mut e = da - db + 1;
        while r.len() > db && !r.is_empty() {
            let dr = r.len() - 1;
            let lr = r[dr].clone();
            for c in r.iter_mut() {
                *c *= &lb;
            }
            let off = dr - db;
            for (i, bc) in b.coeffs.iter().enumerate() {
                r[off + i] -= &lr * bc;
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
            e -= 1;
        }
        let mult = num_traits::pow(lb.clone(), e);
        let r = Self::new(r.into_iter().map(|c| c * &mult).collect());
        let sign = if lb.is_negative() && (da - db + 1) % 2 == 1 {
            Sign::Minus
        } else {
            Sign::Plus
        };
        (r, sign)
    }

    /// Cauchy bound: every real root has absolute value below the returned power of two.
    pub fn root_bound_pow2(&self) -> u64 {
        let Some(lead) = self.lead() else { return 1 };
        let la = lead.abs();
        let max = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero);
        let ratio_bits = max.bits().saturating_sub(la.bits()) + 2;
        ratio_bits.max(1)
    }
}

pub fn sign_variations(seq: impl IntoIterator<Item = Sign>) -> usize {
    let mut last = Sign::NoSign;
    let mut count = 0;
    for s in seq {
        if s == Sign::NoSign {
            continue;
        }
        if last != Sign::NoSign && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_and_shift() {
        // (u-1)^2 (u+2)
        let p = IntPoly::from_i64(&[2, -3, 0, 1]);
        let (k, rest) = p.strip_root_at_one();
        assert_eq!(k, 2);
        assert_eq!(rest, IntPoly::from_i64(&[2, 1]));
        // p(1+v) = v^2 (v+3) = 3v^2 + v^3
        assert_eq!(p.taylor_shift_one(), IntPoly::from_i64(&[0, 0, 3, 1]));
    }

    #[test]
    fn pseudo_remainder_sign() {
        let a = IntPoly::from_i64(&[1, 0, 1]); // u^2 + 1
        let b = IntPoly::from_i64(&[0, -2]); // -2u
        let (r, s) = a.pseudo_rem(&b);
        // (-2)^2 (u^2+1) mod -2u = 4
        assert_eq!(r, IntPoly::from_i64(&[4]));
        assert_eq!(s, Sign::Plus);
        let c = IntPoly::from_i64(&[1, 0, 0, 1]);
        let (_, s) = c.pseudo_rem(&b);
        assert_eq!(s, Sign::Minus);
    }

    #[test]
    fn exact_sign_at_rational() {
        let p = IntPoly::from_i64(&[-2, 0, 1]); // u^2 - 2
        let x = BigRational::new(BigInt::from(141), BigInt::from(100));
        assert_eq!(p.sign_at(&x), Sign::Minus);
        let y = BigRational::new(BigInt::from(142), BigInt::from(100));
        assert_eq!(p.sign_at(&y), Sign::Plus);
    }
}
