//! The base `(G x C^k)/R` of the submersion by `q -> (exp(q X_1), e^{i m q})`: fiber
//! geometry, O'Neill error terms, the Ricci form in the frame
//! `d/dr, U_j (j >= 2), Y_i (i >= 2), W'`, and its positivity certificates.
//!
//! Notation: `s = r^2`, `t = 1 + s`, `N = 2^{n+1}`, `M = m^2`, and the weight
//! `D = 1 + M (f/h_1)^2 = 1 + M s t^{N-1}`.
//!
//! Floating evaluation goes through `H = 1/D`, `G = M s t^{N-1}/D` and
//! `P = M t^{N-1}/D`, which stay finite where `t^{N-1}` overflows.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nilalg::NilpotentAlgebra;
use crate::poly::{q, Exponent, PositivityMethod, SturmOptions, TPoly};
use crate::profile::{big_n, exact, tail_bound_u, RadialEval, RadialFn, RowVerdict};
use crate::totalspace::{
    decay_fn, monotone_search, ric_rr, ric_uu, ric_yy, rr_row, uu_row, yy_row, AffineRow,
    AlgebraData, DiagMode, SubmersionParams, K_LIMIT,
};

/// Weights of the fiber direction at one radius.
#[derive(Clone, Copy, Debug)]
struct Weights {
    /// `1/D`
    h: f64,
    /// `M s t^{N-1} / D`
    g: f64,
    /// `M t^{N-1} / D`
    p: f64,
}

fn weights(n: usize, m: i64, s: f64) -> Weights {
    let mm = (m as f64) * (m as f64);
    let ln_p = mm.ln() + (big_n(n) - 1) as f64 * s.ln_1p();
    let p = ln_p.exp();
    let sp = s * p;
    let h = 1.0 / (1.0 + sp);
    let g = if sp == 0.0 { 0.0 } else { 1.0 / (1.0 + 1.0 / sp) };
    Weights {
        h,
        g,
        p: 1.0 / (1.0 / p + s),
    }
}

/// `-2 alpha_1 H + (1 + s/2) P`: the common factor of the mean-curvature terms.
fn mean_factor(e: &RadialEval, w: &Weights) -> f64 {
    -2.0 * e.alphas[0] * w.h + (1.0 + 0.5 * e.s()) * w.p
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberGeometry {
    pub r: f64,
    /// `h_1^2 + m^2 f^2`
    pub norm2: f64,
    /// `(h_1 h_1' + m^2 f f')/(h_1^2 + m^2 f^2)`, so the mean curvature is `-g_mean d/dr`.
    pub g_mean: f64,
    /// `W = (h_1 Y_1 + m f U_1)/norm`
    pub w_components: (f64, f64),
    /// `W' = (m f Y_1 - h_1 U_1)/norm`
    pub wprime_components: (f64, f64),
}

pub fn fiber_geometry(p: &SubmersionParams, r: f64) -> FiberGeometry {
    let e = crate::profile::WarpProfile::new(p.n).expect("validated").eval(r);
    fiber_geometry_at(&e, p.m)
}

pub fn fiber_geometry_at(e: &RadialEval, m: i64) -> FiberGeometry {
    let w = weights(e.n(), m, e.s());
    let mm = (m * m) as f64;
    let norm2 = e.h[0] * e.h[0] + mm * e.f * e.f;
    // h_1/norm = sqrt(H), m f/norm = sign(m) sqrt(G)
    let a = w.h.sqrt();
    let b = m.signum() as f64 * w.g.sqrt();
    FiberGeometry {
        r: e.r,
        norm2,
        g_mean: e.r * mean_factor(e, &w) / e.t(),
        w_components: (a, b),
        wprime_components: (b, -a),
    }
}

/// `|A_{d/dr}|^2 = m^2 (f' h_1 - f h_1')^2 / (h_1^2 + m^2 f^2)^2`.
pub fn a_dr_norm2(n: usize, m: i64, r: f64) -> Result<f64> {
    let e = crate::profile::radial_eval(n, r)?;
    let w = weights(n, m, e.s());
    let t = e.t();
    let nn = big_n(n) as f64;
    Ok((1.0 + nn * e.s()).powi(2) / (t * t) * w.p * w.h)
}

/// `<nabla_{d/dr} S, d/dr> = g_mean^2 - |A_{d/dr}|^2 - (h_1 h_1'' + m^2 f f'')/(h_1^2 + m^2 f^2)`.
pub fn grad_mean_dr(n: usize, m: i64, r: f64) -> Result<f64> {
    let e = crate::profile::radial_eval(n, r)?;
    let w = weights(n, m, e.s());
    let g = fiber_geometry_at(&e, m).g_mean;
    Ok(g * g - a_dr_norm2(n, m, r)? - (w.h * e.h_ratio2(1) + w.g * e.f_ratio2()))
}

/// Error terms added to the total-space diagonal, in floating point.
#[derive(Clone, Debug, Serialize)]
pub struct BaseTerms {
    pub r: f64,
    pub total_rr: f64,
    pub total_uu: f64,
    /// `Ric(Y_i, Y_i)` of the total space, `i = 1..=n`.
    pub total_yy: Vec<f64>,
    pub err_rr: f64,
    pub err_uu: f64,
    /// Entry 0 (`i = 1`) is unused and zero.
    pub err_yy: Vec<f64>,
    /// `(M (f/h_1)^2 Ric(Y_1,Y_1) + Ric(U_1,U_1)) / D`.
    pub wprime_ricci: f64,
    pub err_wprime: f64,
}

pub fn base_terms(data: &AlgebraData, k: u32, m: i64, r: f64, mode: DiagMode) -> BaseTerms {
    let n = data.n();
    let e = data.profile.eval(r);
    let w = weights(n, m, e.s());
    let (s, t) = (e.s(), e.t());
    let a1 = e.alphas[0];
    let nn = big_n(n) as f64;
    let half = 1.0 + 0.5 * s;
    let mf = mean_factor(&e, &w);

    let total_rr = ric_rr(&e, k);
    let total_uu = ric_uu(&e, k);
    let total_yy: Vec<f64> = (1..=n)
        .map(|i| ric_yy(&e, k, i, data.group_diag(i, r, mode)))
        .collect();

    let a_term = 3.0 * (1.0 + nn * s).powi(2) / (t * t) * w.p * w.h;
    let err_rr = a_term + e.h_ratio2(1) * w.h + e.f_ratio2() * w.g;
    let err_uu = half * mf / (t * t);
    let mut err_yy = vec![0.0; n];
    for i in 2..=n {
        let mut v = -2.0 * e.alphas[i - 1] * s * mf / (t * t);
        if mode == DiagMode::Exact {
            v += data.a_terms[i - 1].eval_r(r) * w.h;
        }
        err_yy[i - 1] = v;
    }
    let err_wprime = -(2.0 * a1 * half * w.g * w.g
        - (4.0 * a1 * a1 * s * s + half * half) * w.p * w.h
        + 2.0 * a1 * half * w.h * w.h)
        / (t * t);
    let wprime_ricci = w.g * total_yy[0] + w.h * total_uu;
    BaseTerms {
        r,
        total_rr,
        total_uu,
        total_yy,
        err_rr,
        err_uu,
        err_yy,
        wprime_ricci,
        err_wprime,
    }
}

fn data_for(p: &SubmersionParams) -> AlgebraData {
    AlgebraData::new(&p.algebra).expect("params hold a valid algebra")
}

/// `3 m^2 (h_1' f - f' h_1)^2/(h_1^2 + m^2 f^2)^2 + (h_1 h_1'' + m^2 f f'')/(h_1^2 + m^2 f^2)`.
pub fn error_rr(p: &SubmersionParams, r: f64) -> f64 {
    base_terms(&data_for(p), p.k, p.m, r, DiagMode::Bound).err_rr
}

/// `-<nabla_{Y_i} S, Y_i>`, plus `2|A_{Y_i} W|^2` in exact mode.
pub fn error_yy(p: &SubmersionParams, i: usize, r: f64, mode: DiagMode) -> Result<f64> {
    if i < 2 || i > p.n {
        return Err(Error::IndexOutOfRange {
            index: i,
            min: 2,
            max: p.n,
        });
    }
    Ok(base_terms(&data_for(p), p.k, p.m, r, mode).err_yy[i - 1])
}

/// `-<nabla_U S, U>`.
pub fn error_uu(p: &SubmersionParams, r: f64) -> f64 {
    base_terms(&data_for(p), p.k, p.m, r, DiagMode::Bound).err_uu
}

/// Base `Ric(W', W')`.
pub fn wprime_entry(p: &SubmersionParams, r: f64, mode: DiagMode) -> f64 {
    let b = base_terms(&data_for(p), p.k, p.m, r, mode);
    b.wprime_ricci + b.err_wprime
}

/// Base Ricci form in the frame `d/dr`, `U` (multiplicity `2k-2`), `Y_2..Y_n`, `W'`.
#[derive(Clone, Debug, Serialize)]
pub struct RicciForm {
    pub r: f64,
    pub labels: Vec<String>,
    pub multiplicities: Vec<u32>,
    pub diagonal: Vec<f64>,
    /// Error part of each diagonal entry.
    pub errors: Vec<f64>,
    /// Upper bounds on `|Ric(a, b)|` between representative labels; exact zeros where the
    /// entry vanishes identically.
    pub offdiag_bound: Vec<Vec<f64>>,
    /// `diagonal - row sum of bounds` per label.
    pub row_bounds: Vec<f64>,
    /// Size of the terms entering each row, for relative thresholds.
    pub row_scales: Vec<f64>,
    pub gershgorin_min: f64,
}

impl RicciForm {
    pub fn dim(&self) -> u32 {
        self.multiplicities.iter().sum()
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

pub fn base_form(data: &AlgebraData, k: u32, m: i64, r: f64, mode: DiagMode) -> RicciForm {
    let n = data.n();
    let b = base_terms(data, k, m, r, mode);
    let t = 1.0 + r * r;
    let c = data.c() / t;
    let cy = (data.c() + data.c_a()) / t;

    let mut labels = vec!["dr".to_string()];
    let mut mult = vec![1u32];
    let mut diag = vec![b.total_rr + b.err_rr];
    let mut errs = vec![b.err_rr];
    let mut scales = vec![b.total_rr.abs() + b.err_rr.abs()];
    if k >= 2 {
        labels.push("U".into());
        mult.push(2 * k - 2);
        diag.push(b.total_uu + b.err_uu);
        errs.push(b.err_uu);
        scales.push(b.total_uu.abs() + b.err_uu.abs());
    }
    for i in 2..=n {
        labels.push(format!("Y{i}"));
        mult.push(1);
        diag.push(b.total_yy[i - 1] + b.err_yy[i - 1]);
        errs.push(b.err_yy[i - 1]);
        scales.push(b.total_yy[i - 1].abs() + b.err_yy[i - 1].abs());
    }
    labels.push("W'".into());
    mult.push(1);
    diag.push(b.wprime_ricci + b.err_wprime);
    errs.push(b.err_wprime);
    scales.push(b.wprime_ricci.abs() + b.err_wprime.abs());

    let d = labels.len();
    let mut off = vec![vec![0.0; d]; d];
    let y_start = if k >= 2 { 2 } else { 1 };
    let wp = d - 1;
    for a in y_start..wp {
        for bb in y_start..wp {
            if a != bb {
                off[a][bb] = cy;
            }
        }
        off[a][wp] = c;
        off[wp][a] = c;
    }
    let row_bounds: Vec<f64> = (0..d)
        .map(|a| diag[a] - off[a].iter().sum::<f64>())
        .collect();
    for (a, sc) in scales.iter_mut().enumerate() {
        *sc += off[a].iter().sum::<f64>();
    }
    let gershgorin_min = row_bounds.iter().copied().fold(f64::INFINITY, f64::min);
    RicciForm {
        r,
        labels,
        multiplicities: mult,
        diagonal: diag,
        errors: errs,
        offdiag_bound: off,
        row_bounds,
        row_scales: scales,
        gershgorin_min,
    }
}

pub fn base_ricci(p: &SubmersionParams, r: f64, mode: DiagMode) -> RicciForm {
    base_form(&data_for(p), p.k, p.m, r, mode)
}

/// `1 + M s t^{N-1}`.
pub fn weight_poly(n: usize, m: i64) -> TPoly {
    let mm = q(m * m);
    &TPoly::one() + &exact::f_over_h1_squared(n).scale(&mm)
}

/// Exact Gershgorin rows of the base form, affine in `k`. The `U` row is included and
/// only applies for `k >= 2`.
pub fn base_rows(data: &AlgebraData, m: i64, mode: DiagMode) -> Vec<AffineRow> {
    let n = data.n();
    let prof = &data.profile;
    let d = weight_poly(n, m);
    let mm = q(m * m);
    let a1 = prof.alpha_q(1);
    let nn = big_n(n);
    let t2 = Exponent::from_integer(2);
    let s = TPoly::s();
    let half = exact::one_plus_half_s();
    let tn1 = TPoly::t_pow(Exponent::from_integer(nn - 1));
    // -2 alpha_1 + M (1 + s/2) t^{N-1}
    let mean = &TPoly::constant(&a1 * q(-2)) + &(&half * &tn1).scale(&mm);
    let over = |num: TPoly, w: u32| RadialFn::with_weight(num, t2, 0, &d, w);

    // d/dr
    let one_ns = &TPoly::one() + &s.scale(&q(nn));
    let err_rr = &over((&one_ns.pow(2) * &tn1).scale(&(&mm * q(3))), 2)
        + &over(
            &exact::h_ratio2(&a1).num
                - &(&(&exact::half_plus(q(1) / q(4), q(3) / q(2)) * &s) * &tn1).scale(&mm),
            1,
        );
    let mut rr = rr_row(prof);
    rr.base = &rr.base + &err_rr;

    // U
    let mut uu = uu_row(prof);
    uu.base = &uu.base + &over(&half * &mean, 1);
    uu.label = "U".into();

    let c_off = &data.bound.c + &data.bound.c_a;
    let mut rows = vec![rr, uu];
    for i in 2..=n {
        let mut y = yy_row(data, i, mode);
        let ai = prof.alpha_q(i);
        let mut err = over((&s * &mean).scale(&(ai * q(-2))), 1);
        if mode == DiagMode::Exact && !data.a_terms[i - 1].is_empty() {
            err = &err + &RadialFn::with_weight(data.a_terms[i - 1].clone(), Exponent::from_integer(0), 0, &d, 1);
        }
        let off = &c_off * q(n as i64 - 2) + &data.bound.c;
        y.base = &(&y.base + &err) - &decay_fn(&off);
        rows.push(y);
    }

    // W'
    let y1 = yy_row(data, 1, mode);
    let u = uu_row(prof);
    let wgt = RadialFn::from_tpoly((&s * &tn1).scale(&mm));
    let inv_d = RadialFn::with_weight(TPoly::one(), Exponent::from_integer(0), 0, &d, 1);
    let ric_base = &(&(&wgt * &y1.base) + &u.base) * &inv_d;
    let ric_slope = &(&(&wgt * &y1.slope) + &u.slope) * &inv_d;
    let a1sq4 = &a1 * &a1 * q(4);
    let ew = &(&(&s.pow(2) * &half) * &TPoly::t_pow(Exponent::from_integer(2 * nn - 2)))
        .scale(&(&a1 * &mm * &mm * q(2)))
        - &(&(&s.pow(2).scale(&a1sq4) + &half.pow(2)) * &tn1).scale(&mm);
    let ew = &ew + &half.scale(&(&a1 * q(2)));
    let err_w = over(-&ew, 2);
    let off_w = &data.bound.c * q(n as i64 - 1);
    let mut wbase = &ric_base + &err_w;
    if off_w != BigRational::from_integer(0.into()) {
        wbase = &wbase - &decay_fn(&off_w);
    }
    rows.push(AffineRow {
        label: "W'".into(),
        base: wbase,
        slope: ric_slope,
    });
    rows
}

fn rows_for_k(rows: &[AffineRow], k: u32) -> Vec<&AffineRow> {
    rows.iter().filter(|r| k >= 2 || r.label != "U").collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMode {
    Sturm,
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Positive,
    NotPositive,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowReport {
    pub label: String,
    pub verdict: Verdict,
    /// Degree of the certified numerator polynomial (sturm mode).
    pub degree: Option<usize>,
    pub method: Option<PositivityMethod>,
    pub witness_r: Option<f64>,
    pub min_value: Option<f64>,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamsSummary {
    pub algebra: String,
    pub n: usize,
    pub k: u32,
    pub m: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityCertificate {
    pub params: ParamsSummary,
    pub mode: CertMode,
    pub diag_mode: DiagMode,
    pub verdict: Verdict,
    /// Sturm verdicts are proofs; grid verdicts are not.
    pub rigorous: bool,
    pub min_margin: Option<f64>,
    pub witness_r: Option<f64>,
    pub witness_entry: Option<String>,
    pub rows: Vec<RowReport>,
}

impl PositivityCertificate {
    pub fn is_positive(&self) -> bool {
        self.verdict == Verdict::Positive
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("certificate serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }
}

/// Radius beyond which the row keeps the sign of its leading monomial.
pub fn tail_radius(f: &RadialFn) -> f64 {
    let root = f.root();
    let Ok((poly, _)) = f.numerator_poly(root) else {
        return f64::INFINITY;
    };
    let ip = poly.to_int_poly();
    let b = tail_bound_u(&ip);
    let ln_t = root as f64 * b.ln();
    // r = sqrt(t - 1) <= sqrt(t)
    if ln_t > 600.0 {
        return f64::INFINITY;
    }
    (ln_t.exp_m1()).sqrt().max(1.0)
}

/// Largest radius the floating evaluation handles.
pub const GRID_R_CAP: f64 = 1e140;
const GRID_POINTS: usize = 3000;
const GRID_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum GridOutcome {
    Positive { min_value: f64 },
    Negative { r: f64 },
    /// Within the relative tolerance of zero.
    Tiny { r: f64 },
    /// Tail radius beyond what floating point reaches.
    Unreachable,
}

/// Samples `f(r) = (value, scale)` on `{0} U` a geometric grid up to `r_max` (twice the
/// tail radius is used as the upper end), refining around the smallest relative value.
pub fn grid_scan<F: Fn(f64) -> (f64, f64)>(f: F, r_max: f64) -> GridOutcome {
    if !(r_max.is_finite()) || r_max > GRID_R_CAP {
        return GridOutcome::Unreachable;
    }
    let hi = (2.0 * r_max).max(10.0);
    let lo: f64 = 1e-4;
    let ratio = (hi / lo).ln();
    let mut pts: Vec<f64> = vec![0.0];
    pts.extend((0..GRID_POINTS).map(|j| lo * (ratio * j as f64 / (GRID_POINTS - 1) as f64).exp()));
    let classify = |r: f64| -> std::result::Result<f64, GridOutcome> {
        let (v, sc) = f(r);
        if !v.is_finite() {
            return Err(GridOutcome::Tiny { r });
        }
        if v < -GRID_REL_TOL * sc {
            return Err(GridOutcome::Negative { r });
        }
        if v.abs() <= GRID_REL_TOL * sc || v <= 0.0 {
            return Err(GridOutcome::Tiny { r });
        }
        Ok(v / sc.max(f64::MIN_POSITIVE))
    };
    let mut worst = (f64::INFINITY, 0usize);
    let mut min_value = f64::INFINITY;
    for (j, &r) in pts.iter().enumerate() {
        match classify(r) {
            Ok(rel) => {
                if rel < worst.0 {
                    worst = (rel, j);
                }
                min_value = min_value.min(f(r).0);
            }
            Err(o) => return o,
        }
    }
    // refine between the neighbours of the relative minimum
    let j = worst.1;
    let a = pts[j.saturating_sub(1)];
    let b = pts[(j + 1).min(pts.len() - 1)];
    for i in 0..=200 {
        let r = a + (b - a) * i as f64 / 200.0;
        match classify(r) {
            Ok(_) => min_value = min_value.min(f(r).0),
            Err(o) => return o,
        }
    }
    GridOutcome::Positive { min_value }
}

/// Caches everything needed to certify the base at varying `k`.
pub struct BaseModel {
    pub data: AlgebraData,
    pub m: i64,
    pub mode: DiagMode,
    pub rows: Vec<AffineRow>,
    pub opts: SturmOptions,
}

impl BaseModel {
    pub fn new(a: &NilpotentAlgebra, m: i64, mode: DiagMode) -> Result<Self> {
        if m == 0 {
            return Err(Error::OutOfRange("twist m must be nonzero".into()));
        }
        let data = AlgebraData::new(a)?;
        let rows = base_rows(&data, m, mode);
        Ok(Self {
            data,
            m,
            mode,
            rows,
            opts: SturmOptions::default(),
        })
    }

    fn summary(&self, k: u32) -> ParamsSummary {
        ParamsSummary {
            algebra: self.data.algebra.name.clone(),
            n: self.data.n(),
            k,
            m: self.m,
        }
    }

    /// Floating value and scale of the row with `label` at `r`.
    pub fn sample(&self, k: u32, label: &str, r: f64) -> (f64, f64) {
        let form = base_form(&self.data, k, self.m, r, self.mode);
        let i = form.index(label).expect("row label present");
        (form.row_bounds[i], form.row_scales[i])
    }

    pub fn certify(&self, k: u32, mode: CertMode) -> PositivityCertificate {
        let rows = rows_for_k(&self.rows, k);
        let reports: Vec<RowReport> = match mode {
            CertMode::Sturm => rows
                .par_iter()
                .map(|row| sturm_row(row, k, &self.opts))
                .collect(),
            CertMode::Grid => rows
                .par_iter()
                .map(|row| self.grid_row(row, k))
                .collect(),
        };
        assemble(self.summary(k), mode, self.mode, reports)
    }

    fn grid_row(&self, row: &AffineRow, k: u32) -> RowReport {
        let f = row.at(k);
        let r_tail = tail_radius(&f);
        let outcome = grid_scan(|r| self.sample(k, &row.label, r), r_tail);
        grid_report(&row.label, outcome)
    }
}

fn sturm_row(row: &AffineRow, k: u32, opts: &SturmOptions) -> RowReport {
    let mut rep = RowReport {
        label: row.label.clone(),
        verdict: Verdict::Inconclusive,
        degree: None,
        method: None,
        witness_r: None,
        min_value: None,
        reason: None,
    };
    match row.at(k).certify_positive(opts) {
        RowVerdict::Positive { degree, method } => {
            rep.verdict = Verdict::Positive;
            rep.degree = Some(degree);
            rep.method = Some(method);
        }
        RowVerdict::NotPositive { witness_r } => {
            rep.verdict = Verdict::NotPositive;
            rep.witness_r = Some(witness_r);
        }
        RowVerdict::Inconclusive(why) => rep.reason = Some(why),
    }
    rep
}

fn grid_report(label: &str, outcome: GridOutcome) -> RowReport {
    let mut rep = RowReport {
        label: label.to_string(),
        verdict: Verdict::Inconclusive,
        degree: None,
        method: None,
        witness_r: None,
        min_value: None,
        reason: None,
    };
    match outcome {
        GridOutcome::Positive { min_value } => {
            rep.verdict = Verdict::Positive;
            rep.min_value = Some(min_value);
        }
        GridOutcome::Negative { r } => {
            rep.verdict = Verdict::NotPositive;
            rep.witness_r = Some(r);
        }
        GridOutcome::Tiny { r } => {
            rep.witness_r = Some(r);
            rep.reason = Some("value within tolerance of zero".into());
        }
        GridOutcome::Unreachable => {
            rep.reason = Some("tail radius beyond floating range".into());
        }
    }
    rep
}

fn assemble(params: ParamsSummary, mode: CertMode, diag_mode: DiagMode, rows: Vec<RowReport>) -> PositivityCertificate {
    let failing = rows.iter().find(|r| r.verdict == Verdict::NotPositive);
    let verdict = if let Some(_) = failing {
        Verdict::NotPositive
    } else if rows.iter().all(|r| r.verdict == Verdict::Positive) {
        Verdict::Positive
    } else {
        Verdict::Inconclusive
    };
    let witness = failing.or_else(|| rows.iter().find(|r| r.verdict == Verdict::Inconclusive));
    let min_margin = match mode {
        CertMode::Grid => rows
            .iter()
            .filter_map(|r| r.min_value)
            .reduce(f64::min),
        CertMode::Sturm => None,
    };
    PositivityCertificate {
        params,
        mode,
        diag_mode,
        verdict,
        rigorous: mode == CertMode::Sturm && verdict != Verdict::Inconclusive,
        min_margin: if verdict == Verdict::Positive { min_margin } else { None },
        witness_r: witness.and_then(|r| r.witness_r),
        witness_entry: witness.map(|r| r.label.clone()),
        rows,
    }
}

pub fn certify_positivity(p: &SubmersionParams, mode: CertMode, diag: DiagMode) -> Result<PositivityCertificate> {
    let model = BaseModel::new(&p.algebra, p.m, diag)?;
    Ok(model.certify(p.k, mode))
}

/// Smallest `k` whose certificate is not refuted. `k = 1` is checked on its own since the
/// `U` directions only appear from `k = 2`; from there on every row is nondecreasing in `k`.
/// An inconclusive certificate stops the search: the returned one then says so.
pub fn min_k(a: &NilpotentAlgebra, m: i64, mode: CertMode, diag: DiagMode) -> Result<(u32, PositivityCertificate)> {
    let model = BaseModel::new(a, m, diag)?;
    let settled = |c: &PositivityCertificate| c.verdict != Verdict::NotPositive;
    let one = model.certify(1, mode);
    if settled(&one) {
        return Ok((1, one));
    }
    let (k, cert, _) = monotone_search(2, K_LIMIT, |k| model.certify(k, mode), settled)?;
    Ok((k, cert))
}

#[derive(Clone, Debug)]
pub struct ScanTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScanTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn scan_header(n: usize) -> Vec<String> {
    let mut h = vec!["r".to_string(), "ric_rr".into(), "ric_u".into()];
    h.extend((2..=n).map(|i| format!("ric_y_{i}")));
    h.extend(["ric_wprime".to_string(), "err_rr".into(), "err_u".into()]);
    h.extend((2..=n).map(|i| format!("err_y_{i}")));
    h.extend(["offdiag_bound".to_string(), "gershgorin_min".into()]);
    h
}

/// Evenly spaced rows `r = 0 .. r_max`.
pub fn scan(p: &SubmersionParams, r_max: f64, steps: usize, mode: DiagMode) -> Result<ScanTable> {
    if steps < 2 {
        return Err(Error::OutOfRange("scan needs at least 2 steps".into()));
    }
    let data = AlgebraData::new(&p.algebra)?;
    let n = p.n;
    let rows = (0..steps)
        .into_par_iter()
        .map(|j| {
            let r = r_max * j as f64 / (steps - 1) as f64;
            let b = base_terms(&data, p.k, p.m, r, mode);
            let f = base_form(&data, p.k, p.m, r, mode);
            let t = 1.0 + r * r;
            let mut row = vec![r, b.total_rr + b.err_rr, b.total_uu + b.err_uu];
            row.extend((2..=n).map(|i| b.total_yy[i - 1] + b.err_yy[i - 1]));
            row.push(b.wprime_ricci + b.err_wprime);
            row.extend([b.err_rr, b.err_uu]);
            row.extend((2..=n).map(|i| b.err_yy[i - 1]));
            let pair = if n >= 2 { (data.c() + data.c_a()).max(data.c()) / t } else { 0.0 };
            row.extend([pair, f.gershgorin_min]);
            row
        })
        .collect();
    Ok(ScanTable {
        header: scan_header(n),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilalg::catalog_by_name;
    use crate::profile::WarpProfile;
    use proptest::prelude::*;

    fn params(name: &str, k: u32, m: i64) -> SubmersionParams {
        SubmersionParams::new(catalog_by_name(name).unwrap(), k, m).unwrap()
    }

    #[test]
    fn fiber_geometry_examples() {
        let g = fiber_geometry(&params("heisenberg3", 3, 2), 0.0);
        assert_eq!(g.norm2, 1.0);
        assert_eq!(g.g_mean, 0.0);
        let g = fiber_geometry(&params("abelian1", 1, 1), 1.0);
        let expect = (2f64.powf(-3.5) * -1.75 + 2f64.powf(-0.5) * 0.75) / (2f64.powf(-3.5) + 2f64.powf(-0.5));
        assert!((g.g_mean - expect).abs() < 1e-14);
        assert!((g.g_mean - 0.4722224).abs() < 1e-6);
        let (a, b) = g.w_components;
        let (c, d) = g.wprime_components;
        assert!((a * a + b * b - 1.0).abs() < 1e-14);
        assert!((a * c + b * d).abs() < 1e-15);
        let gm = fiber_geometry(&params("abelian1", 1, -1), 1.0);
        assert_eq!(gm.g_mean, g.g_mean);
        assert_eq!(gm.norm2, g.norm2);
    }

    #[test]
    fn error_examples() {
        assert!((error_rr(&params("abelian1", 2, 1), 0.0) + 0.5).abs() < 1e-14);
        for n in 1..=4 {
            let a1 = WarpProfile::new(n).unwrap().alpha_f64(1);
            let p = params(&format!("abelian{n}"), 2, 1);
            assert!((error_rr(&p, 0.0) - (3.0 - 2.0 * a1)).abs() < 1e-12);
        }
        let p = params("abelian2", 2, 1);
        assert!((error_yy(&p, 2, 1.0, DiagMode::Bound).unwrap() + 3.25 * 184.5 / 516.0).abs() < 1e-12);
        assert_eq!(error_yy(&p, 2, 0.0, DiagMode::Bound).unwrap(), 0.0);
        assert!(error_yy(&p, 1, 0.5, DiagMode::Bound).is_err());
        assert!((error_uu(&params("abelian1", 2, 1), 0.0) + 2.5).abs() < 1e-14);
    }

    #[test]
    fn error_rr_lower_bound() {
        let p = params("heisenberg3", 3, 2);
        for j in 0..60 {
            let r = j as f64 * 0.1;
            let e = WarpProfile::new(3).unwrap().eval(r);
            let mm = 4.0;
            let low = (e.h[0] * e.ddh[0] + mm * e.f * e.ddf) / (e.h[0] * e.h[0] + mm * e.f * e.f);
            assert!(error_rr(&p, r) >= low - 1e-12 * low.abs());
        }
    }

    #[test]
    fn base_ricci_examples() {
        let f = base_ricci(&params("abelian1", 2, 1), 0.0, DiagMode::Bound);
        assert!((f.diagonal[0] - 7.5).abs() < 1e-13);
        assert_eq!(f.dim(), 1 + 2 + 0 + 1);
        let f = base_ricci(&params("abelian3", 4, 1), 0.7, DiagMode::Bound);
        assert!(f.offdiag_bound.iter().flatten().all(|&x| x == 0.0));
        let min = f.diagonal.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(f.gershgorin_min, min);
        let f = base_ricci(&params("twisted4", 3, 1), 0.7, DiagMode::Bound);
        assert_eq!(f.dim(), 4 + 6 - 1);
        let t = 1.0 + 0.49;
        for row in &f.offdiag_bound {
            for &x in row {
                assert!(x <= 2.0 * 0.5 / t + 1e-15);
            }
        }
        // d/dr and U rows carry no off-diagonal bound
        assert!(f.offdiag_bound[0].iter().all(|&x| x == 0.0));
        assert!(f.offdiag_bound[1].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn wprime_origin_limit() {
        let p = params("abelian1", 2, 1);
        let data = AlgebraData::new(&p.algebra).unwrap();
        let b = base_terms(&data, 2, 1, 0.0, DiagMode::Bound);
        assert_eq!(b.wprime_ricci, b.total_uu);
    }

    #[test]
    fn wprime_error_expansion() {
        // numerator of -(1+r^2)^2 <nabla_W' S, W'> times D^2, checked against ratio form
        let (n, m) = (2usize, 2i64);
        let e = WarpProfile::new(n).unwrap().eval(0.9);
        let (s, t) = (e.s(), e.t());
        let a1 = e.alphas[0];
        let mm = (m * m) as f64;
        let nn = big_n(n) as f64;
        let fh = s * t.powf(nn - 1.0);
        let d = 1.0 + mm * fh;
        let expected = 2.0 * a1 * mm * mm * s * s * (1.0 + s / 2.0) * t.powf(2.0 * nn - 2.0)
            - mm * (4.0 * a1 * a1 * s * s + (1.0 + s / 2.0).powi(2)) * t.powf(nn - 1.0)
            + 2.0 * a1 * (1.0 + s / 2.0);
        let ratio = -(e.h_ratio1(1) + mm * e.f_ratio1() * fh) * (e.f_ratio1() + mm * e.h_ratio1(1) * fh);
        assert!((ratio * t * t - expected).abs() < 1e-9 * expected.abs());
        let data = AlgebraData::new(&catalog_by_name("abelian2").unwrap()).unwrap();
        let b = base_terms(&data, 2, m, 0.9, DiagMode::Bound);
        assert!((b.err_wprime - (-expected / (t * t * d * d))).abs() < 1e-12 * b.err_wprime.abs());
    }

    #[test]
    fn symbolic_rows_match_floating() {
        for (name, m) in [("abelian1", 1), ("abelian2", 2), ("heisenberg3", 1), ("twisted4", 2)] {
            for mode in [DiagMode::Bound, DiagMode::Exact] {
                let model = BaseModel::new(&catalog_by_name(name).unwrap(), m, mode).unwrap();
                for k in [2u32, 9] {
                    for r in [0.1, 0.6, 1.3] {
                        for row in &model.rows {
                            let exact_v = row.at(k).eval(r);
                            let (v, _) = model.sample(k, &row.label, r);
                            assert!(
                                (exact_v - v).abs() < 1e-7 * (1.0 + v.abs()),
                                "{name} {mode:?} {} k={k} r={r}: {exact_v} vs {v}",
                                row.label
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn abelian1_certificates() {
        let model = BaseModel::new(&catalog_by_name("abelian1").unwrap(), 1, DiagMode::Bound).unwrap();
        let c = model.certify(35, CertMode::Sturm);
        assert_eq!(c.verdict, Verdict::Positive, "{c:?}");
        assert!(c.rigorous);
        assert_eq!(model.certify(35, CertMode::Grid).verdict, Verdict::Positive);
        let bad = model.certify(1, CertMode::Sturm);
        assert_eq!(bad.verdict, Verdict::NotPositive);
        for row in bad.rows.iter().filter(|r| r.verdict == Verdict::NotPositive) {
            assert!(model.sample(1, &row.label, row.witness_r.unwrap()).0 <= 0.0);
        }
        let json = c.to_json();
        assert!(json.ends_with('\n'));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["params", "mode", "verdict", "min_margin", "witness_r"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn scan_layout() {
        let p = params("abelian1", 2, 1);
        let t = scan(&p, 5.0, 11, DiagMode::Bound).unwrap();
        assert_eq!(t.header, scan_header(1));
        assert_eq!(t.header.len(), 8);
        assert!((t.rows[0][1] - 7.5).abs() < 1e-13);
        assert!(t.rows.windows(2).all(|w| w[1][0] > w[0][0]));
        let csv = t.to_csv();
        assert!(csv.starts_with("r,ric_rr,ric_u,ric_wprime,err_rr,err_u,offdiag_bound,gershgorin_min\n"));
        assert_eq!(scan_header(3)[3], "ric_y_2");
        assert!(scan(&p, 5.0, 1, DiagMode::Bound).is_err());
    }

    proptest! {
        #[test]
        fn m_enters_as_square(r in 0.0f64..8.0, m in 1i64..4, k in 1u32..40) {
            let p = params("heisenberg3", k, m);
            let a = base_ricci(&p, r, DiagMode::Exact);
            let b = base_ricci(&p.with_m(-m), r, DiagMode::Exact);
            prop_assert_eq!(a.diagonal, b.diagonal);
            prop_assert_eq!(a.gershgorin_min, b.gershgorin_min);
        }

        #[test]
        fn exact_diagonal_dominates_bound(r in 0.0f64..8.0, which in 0usize..3, m in 1i64..3) {
            let name = ["heisenberg3", "twisted4", "ut4"][which];
            let p = params(name, 5, m);
            let ex = base_ricci(&p, r, DiagMode::Exact);
            let bd = base_ricci(&p, r, DiagMode::Bound);
            for (x, y) in ex.diagonal.iter().zip(&bd.diagonal) {
                prop_assert!(*x >= *y - 1e-12 * (1.0 + y.abs()));
            }
        }
    }
}
