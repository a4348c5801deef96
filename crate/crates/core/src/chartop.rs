//! Integer cohomology of tori as free exterior rings: cup products, Gysin maps and the
//! Pontryagin classes of the bundles `L_m^{⊕k}` over them.
//!
//! A monomial `x_{i_1} ... x_{i_p}` with `i_1 < ... < i_p` is stored as the bitmask with
//! bits `i_j - 1` set.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Generators are limited so monomials fit a `u32` mask.
pub const MAX_GENERATORS: usize = 31;

/// Element of `Λ(x_1, ..., x_d)` over the integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtClass {
    d: usize,
    terms: BTreeMap<u32, BigInt>,
}

/// Sign of `x_A ∧ x_B` relative to the sorted monomial, for disjoint masks.
fn wedge_sign(a: u32, b: u32) -> i32 {
    // each generator of b passes the generators of a above it
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

/// Lexicographically ordered monomials of degree `p` in `d` generators.
pub fn basis(d: usize, p: usize) -> Vec<u32> {
    fn rec(start: usize, d: usize, left: usize, mask: u32, out: &mut Vec<u32>) {
        if left == 0 {
            out.push(mask);
            return;
        }
        for i in start..d {
            if d - i < left {
                break;
            }
            rec(i + 1, d, left - 1, mask | 1 << i, out);
        }
    }
    let mut out = Vec::new();
    if p <= d {
        rec(0, d, p, 0, &mut out);
    }
    out
}

impl ExtClass {
    pub fn zero(d: usize) -> Self {
        assert!(d <= MAX_GENERATORS, "at most {MAX_GENERATORS} generators");
        Self {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(d: usize) -> Self {
        Self::monomial(d, &[], BigInt::one()).expect("empty monomial")
    }

    /// `x_i`, 1-based.
    pub fn generator(d: usize, i: usize) -> Result<Self> {
        Self::monomial(d, &[i], BigInt::one())
    }

    /// `c · x_{i_1} ∧ ... ∧ x_{i_p}` in any order; repeated generators give zero.
    pub fn monomial(d: usize, indices: &[usize], c: BigInt) -> Result<Self> {
        let mut out = Self::one_term(d, 0, c);
        for &i in indices {
            if i == 0 || i > d {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    min: 1,
                    max: d,
                });
            }
            out = out.wedge(&Self::one_term(d, 1 << (i - 1), BigInt::one()));
        }
        Ok(out)
    }

    fn one_term(d: usize, mask: u32, c: BigInt) -> Self {
        let mut out = Self::zero(d);
        out.add_term(mask, c);
        out
    }

    fn add_term(&mut self, mask: u32, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(mask).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn generators(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree when homogeneous; `None` for zero or mixed classes.
    pub fn degree(&self) -> Option<usize> {
        let mut degs = self.terms.keys().map(|m| m.count_ones() as usize);
        let first = degs.next()?;
        degs.all(|p| p == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree().is_some()
    }

    /// Coefficient of the sorted monomial with these indices.
    pub fn coefficient(&self, indices: &[usize]) -> BigInt {
        let mask = indices.iter().fold(0u32, |m, &i| m | 1 << (i - 1));
        self.terms.get(&mask).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &BigInt)> {
        self.terms.iter().map(|(m, c)| (mask_indices(*m), c))
    }

    pub fn part(&self, p: usize) -> Self {
        Self {
            d: self.d,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.count_ones() as usize == p)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut out = Self::zero(self.d);
        for (m, v) in &self.terms {
            out.add_term(*m, v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d, "generator counts differ");
        let mut out = self.clone();
        for (m, v) in &other.terms {
            out.add_term(*m, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d, "generator counts differ");
        let mut out = Self::zero(self.d);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                let v = ca * cb;
                out.add_term(a | b, if wedge_sign(*a, *b) > 0 { v } else { -v });
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.d), |acc, _| acc.wedge(self))
    }

    /// Coordinates in the lexicographic basis of degree `p`.
    pub fn coordinates(&self, p: usize) -> Vec<BigInt> {
        basis(self.d, p)
            .into_iter()
            .map(|m| self.terms.get(&m).cloned().unwrap_or_default())
            .collect()
    }

    /// Parses `"x1^x2 + x3^x4"`, `"2*x1^x2 - x1^x3"`, `"3 x2"` or `"1"`. The generator
    /// count defaults to the largest index used.
    pub fn parse(expr: &str, d: Option<usize>) -> Result<Self> {
        let mut terms: Vec<(BigInt, Vec<usize>)> = Vec::new();
        let cleaned = expr.replace('-', "+-");
        let leading_minus = expr.trim_start().starts_with('-');
        for (pos, raw) in cleaned.split('+').enumerate() {
            let term = raw.trim();
            if term.is_empty() {
                // only the split before a leading minus is empty
                if pos == 0 && leading_minus {
                    continue;
                }
                return Err(Error::Parse(format!("missing term in `{expr}`")));
            }
            let (neg, body) = match term.strip_prefix('-') {
                Some(b) => (true, b.trim()),
                None => (false, term),
            };
            let split = body
                .find(|c: char| !c.is_ascii_digit())
                .unwrap_or(body.len());
            let (num, rest) = body.split_at(split);
            let mut coeff: BigInt = if num.is_empty() {
                BigInt::one()
            } else {
                num.parse().map_err(|_| Error::Parse(format!("bad coefficient `{num}`")))?
            };
            if neg {
                coeff = -coeff;
            }
            let rest = rest.trim();
            let rest = match rest.strip_prefix('*') {
                Some(r) if r.trim().is_empty() => {
                    return Err(Error::Parse(format!("dangling `*` in `{expr}`")))
                }
                Some(r) => r.trim(),
                None => rest,
            };
            let mut idx = Vec::new();
            if !rest.is_empty() {
                for g in rest.split('^') {
                    let g = g.trim();
                    let i = g
                        .strip_prefix('x')
                        .and_then(|n| n.parse::<usize>().ok())
                        .filter(|&i| i >= 1)
                        .ok_or_else(|| Error::Parse(format!("bad generator `{g}` in `{expr}`")))?;
                    idx.push(i);
                }
            } else if num.is_empty() {
                return Err(Error::Parse(format!("empty term in `{expr}`")));
            }
            terms.push((coeff, idx));
        }
        if terms.is_empty() {
            return Err(Error::Parse("empty class".into()));
        }
        let used = terms.iter().flat_map(|(_, i)| i.iter().copied()).max().unwrap_or(0);
        let d = d.unwrap_or(used);
        if used > d {
            return Err(Error::IndexOutOfRange {
                index: used,
                min: 1,
                max: d,
            });
        }
        if d > MAX_GENERATORS {
            return Err(Error::OutOfRange(format!("at most {MAX_GENERATORS} generators")));
        }
        let mut out = Self::zero(d);
        for (c, idx) in terms {
            out = out.add(&Self::monomial(d, &idx, c)?);
        }
        Ok(out)
    }
}

impl fmt::Display for ExtClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // degree-then-lexicographic order
        let mut keys: Vec<u32> = self.terms.keys().copied().collect();
        keys.sort_by_key(|m| (m.count_ones(), mask_indices(*m)));
        for (n, m) in keys.iter().enumerate() {
            let c = &self.terms[m];
            let mono = mask_indices(*m)
                .iter()
                .map(|i| format!("x{i}"))
                .collect::<Vec<_>>()
                .join("^");
            let sign = if c.is_negative() { "-" } else { "+" };
            if n == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            match (mono.is_empty(), a.is_one()) {
                (true, _) => write!(f, "{a}")?,
                (false, true) => write!(f, "{mono}")?,
                (false, false) => write!(f, "{a}*{mono}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for ExtClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Matrix of `x -> c ∧ x` from degree `from` to degree `from + deg c`, columns indexed
/// by the source basis.
pub fn multiplication_matrix(c: &ExtClass, from: usize) -> Result<IntMatrix> {
    let p = c
        .degree()
        .ok_or_else(|| Error::Degree("multiplier must be a nonzero homogeneous class".into()))?;
    let d = c.d;
    let src = basis(d, from);
    let dst = basis(d, from + p);
    let mut m = vec![vec![BigInt::zero(); src.len()]; dst.len()];
    for (j, &b) in src.iter().enumerate() {
        let img = c.wedge(&ExtClass::one_term(d, b, BigInt::one()));
        for (i, v) in img.coordinates(from + p).into_iter().enumerate() {
            m[i][j] = v;
        }
    }
    Ok(m)
}

/// Matrix of cup product with a degree-2 class.
pub fn cup_matrix(e: &ExtClass, from_degree: usize) -> Result<IntMatrix> {
    match e.degree() {
        Some(2) => multiplication_matrix(e, from_degree),
        _ => Err(Error::Degree(format!("cup_matrix needs a homogeneous degree-2 class, got `{e}`"))),
    }
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &IntMatrix) -> Result<BigInt> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.iter().map(Vec::len).find(|&l| l != n).unwrap_or(0),
        });
    }
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Ok(BigInt::zero());
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v.div_floor(&prev);
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    Ok(sign * &a[n - 1][n - 1])
}

/// Characteristic classes of `ξ_{k,m} = L_m^{⊕k}` with `c_1(L_m) = m α`.
#[derive(Clone, Debug, Serialize)]
pub struct BundleClasses {
    pub c1: ExtClass,
    pub k: u32,
    pub m: i64,
    /// `(1 - c_1^2)^k`; the exterior ring truncates it at the top degree.
    pub total_p: ExtClass,
    pub p1: ExtClass,
}

pub fn pontryagin(alpha: &ExtClass, k: u32, m: i64) -> Result<BundleClasses> {
    if alpha.degree() != Some(2) {
        return Err(Error::Degree(format!("alpha must be homogeneous of degree 2, got `{alpha}`")));
    }
    if k == 0 {
        return Err(Error::OutOfRange("k must be at least 1".into()));
    }
    let c1 = alpha.scale(&BigInt::from(m));
    let sq = c1.wedge(&c1);
    let total_p = ExtClass::one(alpha.d).sub(&sq).pow(k);
    let p1 = total_p.part(4);
    let expected = sq.scale(&-BigInt::from(k));
    if p1 != expected {
        return Err(Error::Degree(format!("p1 = {p1} differs from -k c1^2 = {expected}")));
    }
    Ok(BundleClasses {
        c1,
        k,
        m,
        total_p,
        p1,
    })
}

/// `α ∧ α ≠ 0`; torus cohomology is torsion-free.
pub fn has_nontorsion_square(alpha: &ExtClass) -> bool {
    !alpha.wedge(alpha).is_zero()
}

/// `x1^x2 + x3^x4` on four generators.
pub fn torus_euler_class() -> ExtClass {
    ExtClass::parse("x1^x2 + x3^x4", Some(4)).expect("literal parses")
}

#[derive(Clone, Debug, Serialize)]
pub struct GysinReport {
    pub euler_class: ExtClass,
    pub cup_matrix: Vec<Vec<String>>,
    pub determinant: String,
    pub euler_square: ExtClass,
    pub isomorphism: bool,
}

/// Cup product with the Euler class `x1^x2 + x3^x4` from `H^1` to `H^3` of `T^4`.
pub fn gysin_demo() -> GysinReport {
    let e = torus_euler_class();
    let m = cup_matrix(&e, 1).expect("degree 2");
    let det = determinant(&m).expect("square");
    GysinReport {
        euler_square: e.wedge(&e),
        cup_matrix: m
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect(),
        isomorphism: det.abs().is_one(),
        determinant: det.to_string(),
        euler_class: e,
    }
}
