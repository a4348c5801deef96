//! Exact positivity of integer polynomials on the half line `u >= 1`.
//!
//! The decision procedure is Sturm root counting on `(1, inf)` together with the sign
//! at `u = 1`. Two cheap exact checks run first and only ever shortcut to a verdict
//! the Sturm count would also reach: a negative sign found at a sample point, and
//! Descartes' rule on `p(1 + v)` with zero sign changes.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::intpoly::sign_variations;
use super::IntPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityMethod {
    /// `p(1 + v)` has only nonnegative coefficients and `p(1) > 0`.
    Descartes,
    /// Sturm sequence shows no root in `(1, inf)` and `p(1) > 0`.
    Sturm,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HalfLineVerdict {
    Positive(PositivityMethod),
    /// `witness_u` is a point where `p <= 0` (or an approximation to a root where `p`
    /// touches zero without changing sign).
    NotPositive { witness_u: f64 },
    Inconclusive(String),
}

#[derive(Clone, Debug)]
pub struct SturmOptions {
    pub max_degree: usize,
    /// Skip the Descartes shortcut and always build the Sturm sequence.
    pub force_sturm: bool,
    pub bisection_steps: usize,
}

impl Default for SturmOptions {
    fn default() -> Self {
        Self {
            max_degree: 6000,
            force_sturm: false,
            bisection_steps: 80,
        }
    }
}

/// Sturm sequence `p, p', -rem(p, p'), ...` built with sign-corrected primitive
/// pseudo-remainders.
pub fn sturm_sequence(p: &IntPoly) -> Vec<IntPoly> {
    let mut seq = vec![p.clone()];
    if p.is_zero() {
        return seq;
    }
    let d = p.derivative().primitive();
    if d.is_zero() {
        return seq;
    }
    seq.push(d);
    loop {
        let n = seq.len();
        let (r, mult_sign) = seq[n - 2].pseudo_rem(&seq[n - 1]);
        if r.is_zero() {
            break;
        }
        let next = if mult_sign == Sign::Minus {
            r
        } else {
            IntPoly::new(r.coeffs().iter().map(|c| -c).collect())
        };
        seq.push(next.primitive());
    }
    seq
}

fn variations_at(seq: &[IntPoly], x: &BigRational) -> usize {
    sign_variations(seq.iter().map(|p| p.sign_at(x)))
}

fn variations_at_infinity(seq: &[IntPoly]) -> usize {
    sign_variations(seq.iter().map(|p| p.sign_at_infinity()))
}

/// Number of distinct real roots in `(a, b]` (`b = None` means `+inf`).
pub fn count_roots(seq: &[IntPoly], a: &BigRational, b: Option<&BigRational>) -> usize {
    let va = variations_at(seq, a);
    let vb = match b {
        Some(b) => variations_at(seq, b),
        None => variations_at_infinity(seq),
    };
    va.saturating_sub(vb)
}

fn dyadic(num: BigInt, exp: u64) -> BigRational {
    BigRational::new(num, BigInt::one() << exp)
}

fn to_f64(x: &BigRational) -> f64 {
    super::tpoly::q_to_f64(x)
}

/// Decides `p(u) > 0` for every `u >= 1`.
pub fn positive_from_one(p: &IntPoly, opts: &SturmOptions) -> HalfLineVerdict {
    let Some(deg) = p.degree() else {
        return HalfLineVerdict::NotPositive { witness_u: 1.0 };
    };
    if deg > opts.max_degree {
        return HalfLineVerdict::Inconclusive(format!(
            "degree {deg} exceeds the certification limit {}",
            opts.max_degree
        ));
    }
    let at_one = p.value_at_one();
    if at_one.sign() != Sign::Plus {
        return HalfLineVerdict::NotPositive { witness_u: 1.0 };
    }
    if p.sign_at_infinity() == Sign::Minus {
        // Walk outwards until the sign flips.
        let mut k = 1u64;
        loop {
            let x = BigRational::from_integer(BigInt::one() << k);
            if p.sign_at(&x) != Sign::Plus {
                return HalfLineVerdict::NotPositive {
                    witness_u: to_f64(&x),
                };
            }
            k += 1;
        }
    }
    if deg == 0 {
        return HalfLineVerdict::Positive(PositivityMethod::Sturm);
    }
    if !opts.force_sturm {
        let shifted = p.taylor_shift_one();
        if shifted.coeffs().iter().all(|c| c.sign() != Sign::Minus) {
            return HalfLineVerdict::Positive(PositivityMethod::Descartes);
        }
        // Sample 1 + 2^j; any nonpositive value is a witness.
        for j in -12i64..=24 {
            let x = if j < 0 {
                BigRational::one() + dyadic(BigInt::one(), (-j) as u64)
            } else {
                BigRational::one() + BigRational::from_integer(BigInt::one() << (j as u64))
            };
            if p.sign_at(&x) != Sign::Plus {
                return HalfLineVerdict::NotPositive {
                    witness_u: to_f64(&x),
                };
            }
        }
    }
    let seq = sturm_sequence(p);
    let one = BigRational::one();
    let roots = count_roots(&seq, &one, None);
    if roots == 0 {
        return HalfLineVerdict::Positive(PositivityMethod::Sturm);
    }
    HalfLineVerdict::NotPositive {
        witness_u: largest_root_above_one(p, &seq, opts.bisection_steps),
    }
}

/// Bisection on Sturm counts towards the largest root in `(1, bound]`.
fn largest_root_above_one(p: &IntPoly, seq: &[IntPoly], steps: usize) -> f64 {
    let mut lo = BigRational::one();
    let mut hi = BigRational::from_integer(BigInt::one() << p.root_bound_pow2());
    let two = BigRational::from_integer(BigInt::from(2));
    for _ in 0..steps {
        let mid = (&lo + &hi) / &two;
        if count_roots(seq, &mid, Some(&hi)) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    to_f64(&((&lo + &hi) / &two))
}

/// Number of sign changes in the coefficient sequence of `p(1 + v)`: an upper bound on
/// the number of roots in `(1, inf)` with the same parity.
pub fn descartes_bound_above_one(p: &IntPoly) -> usize {
    sign_variations(p.taylor_shift_one().coeffs().iter().map(|c| c.sign()))
}

pub fn is_zero_poly(p: &IntPoly) -> bool {
    p.coeffs().iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn roots_poly(roots: &[i64]) -> IntPoly {
        // prod (u - r)
        let mut c = vec![BigInt::one()];
        for &r in roots {
            let mut next = vec![BigInt::zero(); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * BigInt::from(r);
            }
            c = next;
        }
        IntPoly::new(c)
    }

    #[test]
    fn counts_known_roots() {
        let p = roots_poly(&[-3, 2, 5, 9]);
        let seq = sturm_sequence(&p);
        let one = BigRational::one();
        assert_eq!(count_roots(&seq, &one, None), 3);
        let six = BigRational::from_integer(BigInt::from(6));
        assert_eq!(count_roots(&seq, &one, Some(&six)), 2);
    }

    #[test]
    fn double_root_counts_once_and_is_not_positive() {
        // (u-3)^2 (u^2+1): nonnegative, touches zero at 3.
        let p = IntPoly::from_i64(&[9, -6, 10, -6, 1]);
        let seq = sturm_sequence(&p);
        assert_eq!(count_roots(&seq, &BigRational::one(), None), 1);
        let opts = SturmOptions {
            force_sturm: true,
            ..Default::default()
        };
        match positive_from_one(&p, &opts) {
            HalfLineVerdict::NotPositive { witness_u } => assert!((witness_u - 3.0).abs() < 1e-9),
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn positive_polynomial_certified_both_ways() {
        // u^2 - u + 1 > 0 everywhere; p(1+v) = v^2 + v + 1.
        let p = IntPoly::from_i64(&[1, -1, 1]);
        assert_eq!(
            positive_from_one(&p, &SturmOptions::default()),
            HalfLineVerdict::Positive(PositivityMethod::Descartes)
        );
        let forced = SturmOptions {
            force_sturm: true,
            ..Default::default()
        };
        assert_eq!(
            positive_from_one(&p, &forced),
            HalfLineVerdict::Positive(PositivityMethod::Sturm)
        );
    }

    #[test]
    fn positive_without_descartes_shortcut() {
        // (u - 2)^2 + 1/100 scaled: 100u^2 - 400u + 401; shifted has sign changes.
        let p = IntPoly::from_i64(&[401, -400, 100]);
        assert!(descartes_bound_above_one(&p) > 0);
        assert_eq!(
            positive_from_one(&p, &SturmOptions::default()),
            HalfLineVerdict::Positive(PositivityMethod::Sturm)
        );
    }

    #[test]
    fn negative_at_one_or_infinity() {
        assert!(matches!(
            positive_from_one(&IntPoly::from_i64(&[-1, 0, 1]), &SturmOptions::default()),
            HalfLineVerdict::NotPositive { witness_u } if witness_u == 1.0
        ));
        assert!(matches!(
            positive_from_one(&IntPoly::from_i64(&[5, 0, -1]), &SturmOptions::default()),
            HalfLineVerdict::NotPositive { witness_u } if witness_u > 2.0
        ));
    }

    proptest! {
        // Sturm counts agree with the number of distinct integer roots planted above 1.
        #[test]
        fn sturm_matches_planted_roots(roots in proptest::collection::vec(-20i64..20, 1..7)) {
            // the count is over (a, inf) and needs p(a) != 0
            prop_assume!(!roots.contains(&1));
            let p = roots_poly(&roots);
            let seq = sturm_sequence(&p);
            let mut distinct: Vec<i64> = roots.iter().copied().filter(|&r| r > 1).collect();
            distinct.sort();
            distinct.dedup();
            prop_assert_eq!(count_roots(&seq, &BigRational::one(), None), distinct.len());
        }

        // Descartes shortcut and forced Sturm never disagree on positivity.
        #[test]
        fn shortcut_agrees_with_sturm(c in proptest::collection::vec(-30i64..30, 1..8)) {
            let p = IntPoly::from_i64(&c);
            if p.is_zero() { return Ok(()); }
            let fast = positive_from_one(&p, &SturmOptions::default());
            let slow = positive_from_one(&p, &SturmOptions { force_sturm: true, ..Default::default() });
            let pos = |v: &HalfLineVerdict| matches!(v, HalfLineVerdict::Positive(_));
            prop_assert_eq!(pos(&fast), pos(&slow));
        }
    }
}
