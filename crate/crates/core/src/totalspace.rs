//! Ricci curvature of `g = g_r + dr^2 + f(r)^2 ds^2_{2k-1}` on `G x C^k` in the frame
//! `Y_i = X_i / h_i`, `d/dr`, `U_j = V_j / f`, and the smallest fiber rank making it
//! positive definite.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nilalg::{a_term_diag, algebra_bound_c, ricci_entry, scaled_ricci, AlgebraBound, NilpotentAlgebra};
use crate::poly::{q, q_frac, q_to_f64, Exponent, SturmOptions, TPoly};
use crate::profile::{exact, fiber_curvature, RadialEval, RadialFn, RowVerdict, WarpProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiagMode {
    /// `Ric_G(Y_i, Y_i)` exactly.
    Exact,
    /// `Ric_G(Y_i, Y_i)` replaced by the certified lower bound `-c_diag/(1+r^2)`.
    #[default]
    Bound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubmersionParams {
    pub algebra: NilpotentAlgebra,
    pub n: usize,
    pub k: u32,
    pub m: i64,
}

impl SubmersionParams {
    pub fn new(algebra: NilpotentAlgebra, k: u32, m: i64) -> Result<Self> {
        if k == 0 {
            return Err(Error::OutOfRange("fiber rank k must be >= 1".into()));
        }
        if m == 0 {
            return Err(Error::OutOfRange("twist m must be nonzero".into()));
        }
        WarpProfile::new(algebra.dim)?;
        Ok(Self {
            n: algebra.dim,
            algebra,
            k,
            m,
        })
    }

    pub fn with_k(&self, k: u32) -> Self {
        Self { k, ..self.clone() }
    }

    pub fn with_m(&self, m: i64) -> Self {
        Self { m, ..self.clone() }
    }
}

/// Precomputed algebra data shared by every radius.
#[derive(Clone, Debug)]
pub struct AlgebraData {
    pub algebra: NilpotentAlgebra,
    pub profile: WarpProfile,
    pub bound: AlgebraBound,
    /// Exact `Ric_G(Y_i, Y_i)` for `i = 1..=n`.
    pub ricci_diag: Vec<TPoly>,
    /// Numerators of the base A-terms `2|A_{Y_i} W|^2`, `i = 1..=n`.
    pub a_terms: Vec<TPoly>,
}

impl AlgebraData {
    pub fn new(a: &NilpotentAlgebra) -> Result<Self> {
        let bound = algebra_bound_c(a)?;
        let ricci_diag = (1..=a.dim)
            .map(|i| ricci_entry(a, i, i))
            .collect::<Result<Vec<_>>>()?;
        let a_terms = (1..=a.dim)
            .map(|i| a_term_diag(a, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            algebra: a.clone(),
            profile: a.profile()?,
            bound,
            ricci_diag,
            a_terms,
        })
    }

    pub fn n(&self) -> usize {
        self.algebra.dim
    }

    pub fn c(&self) -> f64 {
        q_to_f64(&self.bound.c)
    }

    pub fn c_diag(&self) -> f64 {
        q_to_f64(&self.bound.c_diag)
    }

    pub fn c_a(&self) -> f64 {
        q_to_f64(&self.bound.c_a)
    }

    /// `Ric_G(Y_i, Y_i)` (exact) or its lower bound, at `r`.
    pub fn group_diag(&self, i: usize, r: f64, mode: DiagMode) -> f64 {
        match mode {
            DiagMode::Exact => self.ricci_diag[i - 1].eval_r(r),
            DiagMode::Bound => -self.c_diag() / (1.0 + r * r),
        }
    }

    pub fn group_diag_fn(&self, i: usize, mode: DiagMode) -> RadialFn {
        match mode {
            DiagMode::Exact => RadialFn::from_tpoly(self.ricci_diag[i - 1].clone()),
            DiagMode::Bound => RadialFn::new(
                TPoly::constant(-self.bound.c_diag.clone()),
                Exponent::from_integer(1),
                0,
            ),
        }
    }
}

fn two_k_minus_one(k: u32) -> f64 {
    2.0 * k as f64 - 1.0
}

/// `Ric(d/dr, d/dr) = -sum_i h_i''/h_i - (2k-1) f''/f`.
pub fn ric_rr(e: &RadialEval, k: u32) -> f64 {
    let sum: f64 = (1..=e.n()).map(|i| e.h_ratio2(i)).sum();
    -sum - two_k_minus_one(k) * e.f_ratio2()
}

/// `Ric(U, U) = -f''/f + (2k-2)(1-f'^2)/f^2 - sum_i h_i'f'/(h_i f)`.
pub fn ric_uu(e: &RadialEval, k: u32) -> f64 {
    let sum: f64 = (1..=e.n()).map(|i| e.hf_ratio(i)).sum();
    -e.f_ratio2() + (2.0 * k as f64 - 2.0) * fiber_curvature(e.s()) - sum
}

/// `Ric(Y_i, Y_i)` given the group part `Ric_G(Y_i, Y_i)`.
pub fn ric_yy(e: &RadialEval, k: u32, i: usize, group: f64) -> f64 {
    let others: f64 = (1..=e.n())
        .filter(|&j| j != i)
        .map(|j| e.h_ratio1(i) * e.h_ratio1(j))
        .sum();
    -e.h_ratio2(i) - two_k_minus_one(k) * e.hf_ratio(i) + group - others
}

pub fn total_ric_rr(p: &SubmersionParams, r: f64) -> f64 {
    let e = WarpProfile::new(p.n).expect("validated n").eval(r);
    ric_rr(&e, p.k)
}

pub fn total_ric_uu(p: &SubmersionParams, r: f64) -> f64 {
    let e = WarpProfile::new(p.n).expect("validated n").eval(r);
    ric_uu(&e, p.k)
}

pub fn total_ric_yy(p: &SubmersionParams, i: usize, r: f64, mode: DiagMode) -> Result<f64> {
    if i == 0 || i > p.n {
        return Err(Error::IndexOutOfRange {
            index: i,
            min: 1,
            max: p.n,
        });
    }
    let data = AlgebraData::new(&p.algebra)?;
    let e = data.profile.eval(r);
    Ok(ric_yy(&e, p.k, i, data.group_diag(i, r, mode)))
}

#[derive(Clone, Debug, Serialize)]
pub struct TotalRicci {
    pub r: f64,
    pub k: u32,
    pub ric_rr: f64,
    pub ric_yy: Vec<f64>,
    pub ric_uu: f64,
    pub offdiag_bound: f64,
    /// Exact `Ric_G(Y_i, Y_j)`, used when assembling the full matrix.
    #[serde(skip)]
    pub group_offdiag: Vec<Vec<f64>>,
}

pub fn total_ricci(data: &AlgebraData, k: u32, r: f64, mode: DiagMode) -> TotalRicci {
    let n = data.n();
    let e = data.profile.eval(r);
    let group = scaled_ricci(&data.algebra, n, r).expect("dimension matches");
    TotalRicci {
        r,
        k,
        ric_rr: ric_rr(&e, k),
        ric_yy: (1..=n)
            .map(|i| ric_yy(&e, k, i, data.group_diag(i, r, mode)))
            .collect(),
        ric_uu: ric_uu(&e, k),
        offdiag_bound: data.c() / (1.0 + r * r),
        group_offdiag: group,
    }
}

impl TotalRicci {
    /// Frame labels of [`TotalRicci::matrix`].
    pub fn labels(&self) -> Vec<String> {
        let mut v: Vec<String> = (1..=self.ric_yy.len()).map(|i| format!("Y{i}")).collect();
        v.push("dr".into());
        v.extend((1..=2 * self.k - 1).map(|j| format!("U{j}")));
        v
    }

    /// Full Ricci matrix in the frame `Y_1..Y_n, d/dr, U_1..U_{2k-1}`. Mixed blocks are
    /// zero by construction.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.ric_yy.len();
        let d = n + 1 + (2 * self.k as usize - 1);
        let mut m = vec![vec![0.0; d]; d];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = if i == j {
                    self.ric_yy[i]
                } else {
                    self.group_offdiag[i][j]
                };
            }
        }
        m[n][n] = self.ric_rr;
        for j in (n + 1)..d {
            m[j][j] = self.ric_uu;
        }
        m
    }

    /// Gershgorin lower bound using the certified off-diagonal decay.
    pub fn gershgorin_min(&self) -> f64 {
        let n = self.ric_yy.len();
        let y = self
            .ric_yy
            .iter()
            .map(|v| v - (n as f64 - 1.0) * self.offdiag_bound)
            .fold(f64::INFINITY, f64::min);
        y.min(self.ric_rr).min(self.ric_uu)
    }
}

/// `base + k * slope`.
#[derive(Clone, Debug)]
pub struct AffineRow {
    pub label: String,
    pub base: RadialFn,
    pub slope: RadialFn,
}

impl AffineRow {
    pub fn at(&self, k: u32) -> RadialFn {
        &self.base + &self.slope.scale(&q(k as i64))
    }
}

fn over_t2(num: TPoly) -> RadialFn {
    RadialFn::new(num, Exponent::from_integer(2), 0)
}

/// Exact `Ric(d/dr, d/dr)`, affine in `k`.
pub fn rr_row(prof: &WarpProfile) -> AffineRow {
    // (2k - 1)(s + 6)/4 / t^2 = k (s+6)/2 / t^2 - (s+6)/4 / t^2
    let s6 = exact::half_plus(q(1), q(6));
    let mut base = over_t2(s6.scale(&q_frac(-1, 4)));
    for i in 1..=prof.n {
        base = &base - &exact::h_ratio2(&prof.alpha_q(i));
    }
    AffineRow {
        label: "dr".into(),
        base,
        slope: over_t2(s6.scale(&q_frac(1, 2))),
    }
}

/// Exact `Ric(U, U)`, affine in `k`.
pub fn uu_row(prof: &WarpProfile) -> AffineRow {
    let fc = exact::fiber_curvature();
    let mut base = &(-&exact::f_ratio2()) - &fc.scale(&q(2));
    for i in 1..=prof.n {
        base = &base - &exact::hf_ratio(&prof.alpha_q(i));
    }
    AffineRow {
        label: "U".into(),
        base,
        slope: fc.scale(&q(2)),
    }
}

/// Exact `Ric(Y_i, Y_i)` with the group part chosen by `mode`, affine in `k`.
pub fn yy_row(data: &AlgebraData, i: usize, mode: DiagMode) -> AffineRow {
    let prof = &data.profile;
    let ai = prof.alpha_q(i);
    let hf = exact::hf_ratio(&ai);
    let mut base = &(&(-&exact::h_ratio2(&ai)) + &hf) + &data.group_diag_fn(i, mode);
    for j in 1..=prof.n {
        if j != i {
            base = &base - &exact::hh_ratio(&ai, &prof.alpha_q(j));
        }
    }
    AffineRow {
        label: format!("Y{i}"),
        base,
        slope: hf.scale(&q(-2)),
    }
}

/// `c / (1+r^2)` as an exact radial function.
pub fn decay_fn(c: &BigRational) -> RadialFn {
    RadialFn::new(TPoly::constant(c.clone()), Exponent::from_integer(1), 0)
}

/// Gershgorin rows of the total-space Ricci form: `d/dr`, `U` and
/// `Y_i - (n-1) c/(1+r^2)`.
pub fn total_rows(data: &AlgebraData, mode: DiagMode) -> Vec<AffineRow> {
    let n = data.n();
    let mut rows = vec![rr_row(&data.profile), uu_row(&data.profile)];
    let off = decay_fn(&(&data.bound.c * q(n as i64 - 1)));
    for i in 1..=n {
        let mut row = yy_row(data, i, mode);
        if !off.is_zero() {
            row.base = &row.base - &off;
        }
        rows.push(row);
    }
    rows
}

/// Floating value and magnitude scale of each total-space Gershgorin row.
pub fn total_rows_f64(data: &AlgebraData, k: u32, r: f64, mode: DiagMode) -> Vec<(f64, f64)> {
    let t = total_ricci(data, k, r, mode);
    let n = data.n() as f64;
    let mut out = vec![(t.ric_rr, t.ric_rr.abs()), (t.ric_uu, t.ric_uu.abs())];
    for y in &t.ric_yy {
        let off = (n - 1.0) * t.offdiag_bound;
        out.push((y - off, y.abs() + off));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct K0Search {
    pub k0: u32,
    /// False when some row needed the sampling fallback.
    pub rigorous: bool,
    /// `k0 - 1` failed with this row and radius (absent when `k0 = 1`).
    pub failing_row: Option<String>,
    pub failing_r: Option<f64>,
}

/// Result of checking every row at one `k`.
#[derive(Clone, Debug)]
pub struct RowsCheck {
    pub positive: bool,
    pub rigorous: bool,
    pub failing: Option<(String, f64)>,
}

/// Certifies all rows at `k` exactly, falling back to sampling for rows whose
/// polynomial is out of reach. `sample` evaluates row `idx` at radius `r` as
/// `(value, scale)`.
pub fn check_rows<F>(rows: &[AffineRow], k: u32, opts: &SturmOptions, sample: F) -> RowsCheck
where
    F: Fn(usize, f64) -> (f64, f64) + Sync,
{
    let verdicts: Vec<RowVerdict> = rows
        .par_iter()
        .map(|row| row.at(k).certify_positive(opts))
        .collect();
    let mut rigorous = true;
    for (idx, (row, v)) in rows.iter().zip(&verdicts).enumerate() {
        match v {
            RowVerdict::Positive { .. } => {}
            RowVerdict::NotPositive { witness_r } => {
                return RowsCheck {
                    positive: false,
                    rigorous: true,
                    failing: Some((row.label.clone(), *witness_r)),
                }
            }
            RowVerdict::Inconclusive(_) => {
                rigorous = false;
                let r_max = crate::quotient::tail_radius(&row.at(k));
                let g = crate::quotient::grid_scan(|r| sample(idx, r), r_max);
                if let crate::quotient::GridOutcome::Negative { r } | crate::quotient::GridOutcome::Tiny { r } = g {
                    return RowsCheck {
                        positive: false,
                        rigorous: false,
                        failing: Some((row.label.clone(), r)),
                    };
                }
            }
        }
    }
    RowsCheck {
        positive: true,
        rigorous,
        failing: None,
    }
}

/// Smallest `k >= start` with `ok(check(k))`, assuming the predicate is monotone in `k`.
/// Exponential then binary search; returns `k`, its check, and the check at `k - 1` when
/// `k > start`.
pub fn monotone_search<T, F, P>(start: u32, limit: u32, check: F, ok: P) -> Result<(u32, T, Option<T>)>
where
    F: Fn(u32) -> T,
    P: Fn(&T) -> bool,
{
    let first = check(start);
    if ok(&first) {
        return Ok((start, first, None));
    }
    let mut lo = start;
    let mut lo_check = first;
    let mut hi = start.max(1) * 2;
    let mut hi_check = loop {
        if hi > limit {
            return Err(Error::OutOfRange(format!("no admissible k up to {limit}")));
        }
        let c = check(hi);
        if ok(&c) {
            break c;
        }
        lo = hi;
        lo_check = c;
        hi *= 2;
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let c = check(mid);
        if ok(&c) {
            hi = mid;
            hi_check = c;
        } else {
            lo = mid;
            lo_check = c;
        }
    }
    Ok((hi, hi_check, Some(lo_check)))
}

pub const K_LIMIT: u32 = 1 << 24;

pub fn find_k0_detailed(a: &NilpotentAlgebra, mode: DiagMode) -> Result<K0Search> {
    let data = AlgebraData::new(a)?;
    let rows = total_rows(&data, mode);
    let opts = SturmOptions::default();
    let (k0, pass, failing) = monotone_search(
        1,
        K_LIMIT,
        |k| check_rows(&rows, k, &opts, |idx, r| total_rows_f64(&data, k, r, mode)[idx]),
        |c| c.positive,
    )?;
    let rigorous = pass.rigorous && failing.as_ref().is_none_or(|c| c.rigorous);
    let (failing_row, failing_r) = match failing.and_then(|c| c.failing) {
        Some((row, r)) => (Some(row), Some(r)),
        None => (None, None),
    };
    Ok(K0Search {
        k0,
        rigorous,
        failing_row,
        failing_r,
    })
}

/// Smallest `k` making the Gershgorin-bounded total-space Ricci form positive for all `r`.
pub fn find_k0(a: &NilpotentAlgebra, mode: DiagMode) -> Result<u32> {
    Ok(find_k0_detailed(a, mode)?.k0)
}

/// The threshold `ceil(k0 + 2^{n+1}/3 + 4/3)`.
pub fn threshold_k(k0: u32, n: usize) -> u32 {
    // (3 k0 + 2^{n+1} + 4) / 3 rounded up
    let num = 3 * k0 as i64 + crate::profile::big_n(n) + 4;
    ((num + 2) / 3) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilalg::catalog_by_name;
    use proptest::prelude::*;

    fn params(name: &str, k: u32) -> SubmersionParams {
        SubmersionParams::new(catalog_by_name(name).unwrap(), k, 1).unwrap()
    }

    #[test]
    fn rr_examples() {
        assert!((total_ric_rr(&params("abelian1", 2), 0.0) - 8.0).abs() < 1e-14);
        let p = params("abelian1", 32);
        for r in [0.0, 0.5, 3.0, 40.0] {
            let t = 1.0 + r * r;
            assert!((total_ric_rr(&p, r) * t * t - 98.0).abs() < 1e-9);
        }
        assert!(total_ric_rr(&params("abelian1", 1), 100.0) < 0.0);
    }

    #[test]
    fn yy_and_uu_examples() {
        let p = params("abelian1", 2);
        for mode in [DiagMode::Exact, DiagMode::Bound] {
            assert!((total_ric_yy(&p, 1, 0.0, mode).unwrap() - 14.0).abs() < 1e-13);
        }
        assert!((total_ric_uu(&p, 0.0) - 8.0).abs() < 1e-14);
        assert!(total_ric_yy(&p, 2, 0.0, DiagMode::Exact).is_err());

        let h = params("heisenberg3", 10);
        let ex = total_ric_yy(&h, 1, 1.0, DiagMode::Exact).unwrap();
        let bd = total_ric_yy(&h, 1, 1.0, DiagMode::Bound).unwrap();
        let group = scaled_ricci(&h.algebra, 3, 1.0).unwrap()[0][0];
        assert!(((ex - bd) - (group + 0.5 / 2.0)).abs() < 1e-12);
        assert!(ex >= bd);
    }

    #[test]
    fn abelian_cross_term_matches_display() {
        let p = params("abelian3", 4);
        let prof = WarpProfile::new(3).unwrap();
        let r: f64 = 1.3;
        let e = prof.eval(r);
        let (s, t) = (r * r, 1.0 + r * r);
        for i in 1..=3 {
            let direct = -e.h_ratio2(i) - 7.0 * e.hf_ratio(i);
            let cross: f64 = (1..=3)
                .filter(|&j| j != i)
                .map(|j| 4.0 * e.alphas[i - 1] * e.alphas[j - 1] * s / (t * t))
                .sum();
            let v = total_ric_yy(&p, i, r, DiagMode::Exact).unwrap();
            assert!((v - (direct - cross)).abs() < 1e-12);
        }
    }

    #[test]
    fn fiber_curvature_lower_bound_on_grid() {
        for k in 0..200 {
            let r = 0.05 * k as f64;
            let t = 1.0 + r * r;
            assert!(fiber_curvature(r * r) >= (1.5 + r * r) / (t * t) - 1e-15);
        }
    }

    #[test]
    fn k_one_uu_positive() {
        for name in ["abelian1", "abelian3", "heisenberg3"] {
            let p = params(name, 1);
            for j in 0..100 {
                assert!(total_ric_uu(&p, j as f64 * 0.3) > 0.0);
            }
        }
    }

    #[test]
    fn abelian1_k0() {
        let a = catalog_by_name("abelian1").unwrap();
        let s = find_k0_detailed(&a, DiagMode::Bound).unwrap();
        assert_eq!(s.k0, 32);
        assert!(s.rigorous);
        assert_eq!(s.failing_row.as_deref(), Some("dr"));
        assert_eq!(find_k0(&a, DiagMode::Exact).unwrap(), 32);
        assert_eq!(threshold_k(32, 1), 35);
        // the Y row alone only needs 2k - 1 >= 9
        let data = AlgebraData::new(&a).unwrap();
        let y = yy_row(&data, 1, DiagMode::Exact);
        let opts = SturmOptions::default();
        assert!(y.at(5).certify_positive(&opts).is_positive());
        assert!(!y.at(4).certify_positive(&opts).is_positive());
    }

    #[test]
    fn mixed_blocks_are_zero() {
        let data = AlgebraData::new(&catalog_by_name("heisenberg3").unwrap()).unwrap();
        let t = total_ricci(&data, 2, 0.9, DiagMode::Exact);
        let m = t.matrix();
        let n = 3;
        assert_eq!(m.len(), n + 1 + 3);
        for i in 0..n {
            for j in n..m.len() {
                assert_eq!(m[i][j], 0.0);
                assert_eq!(m[j][i], 0.0);
            }
        }
        for i in n..m.len() {
            for j in n..m.len() {
                if i != j {
                    assert_eq!(m[i][j], 0.0);
                }
            }
        }
    }

    #[test]
    fn symbolic_rows_match_floating() {
        for name in ["abelian2", "heisenberg3", "twisted4"] {
            let data = AlgebraData::new(&catalog_by_name(name).unwrap()).unwrap();
            for mode in [DiagMode::Exact, DiagMode::Bound] {
                let rows = total_rows(&data, mode);
                for k in [1, 3, 17] {
                    // the exact form cancels badly near the origin
                    for r in [1e-3, 0.2, 1.0, 2.5] {
                        let f = total_rows_f64(&data, k, r, mode);
                        for (row, (v, _)) in rows.iter().zip(&f) {
                            let e = row.at(k).eval(r);
                            assert!((e - v).abs() < 1e-6 * (1.0 + v.abs()), "{name} {} {k} {r}: {e} vs {v}", row.label);
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn diagonal_nondecreasing_in_k(k in 1u32..200, r in 0.0f64..30.0) {
            let data = AlgebraData::new(&catalog_by_name("heisenberg3").unwrap()).unwrap();
            let a = total_ricci(&data, k, r, DiagMode::Exact);
            let b = total_ricci(&data, k + 1, r, DiagMode::Exact);
            prop_assert!(b.ric_rr >= a.ric_rr);
            prop_assert!(b.ric_uu >= a.ric_uu);
            for i in 0..3 {
                prop_assert!(b.ric_yy[i] >= a.ric_yy[i]);
            }
        }

        #[test]
        fn exact_dominates_bound(r in 0.0f64..30.0, which in 0usize..3) {
            let name = ["heisenberg3", "ut4", "twisted4"][which];
            let data = AlgebraData::new(&catalog_by_name(name).unwrap()).unwrap();
            let ex = total_ricci(&data, 3, r, DiagMode::Exact);
            let bd = total_ricci(&data, 3, r, DiagMode::Bound);
            for i in 0..data.n() {
                prop_assert!(ex.ric_yy[i] >= bd.ric_yy[i] - 1e-12 * (1.0 + bd.ric_yy[i].abs()));
            }
        }
    }
}
