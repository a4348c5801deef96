//! Independent checks of the closed forms: Ricci tensors of explicit coordinate charts by
//! finite differences, a connection-route Ricci for left-invariant metrics, and numeric
//! identities for the submersion quantities.
//!
//! Curvature convention: `R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_[X,Y] Z` and
//! `Ric(X,Y) = tr(V -> R(V,X)Y)`, so round spheres have positive Ricci curvature.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nilalg::{catalog_by_name, NilpotentAlgebra};
use crate::poly::q_to_f64;
use crate::profile::WarpProfile;
use crate::quotient::{a_dr_norm2, error_rr, fiber_geometry_at, grad_mean_dr};
use crate::totalspace::{total_ricci, AlgebraData, DiagMode, SubmersionParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartModel {
    Abelian(usize),
    Heisenberg3,
}

impl ChartModel {
    pub fn group_dim(&self) -> usize {
        match self {
            ChartModel::Abelian(n) => *n,
            ChartModel::Heisenberg3 => 3,
        }
    }

    pub fn algebra(&self) -> NilpotentAlgebra {
        let name = match self {
            ChartModel::Abelian(n) => format!("abelian{n}"),
            ChartModel::Heisenberg3 => "heisenberg3".into(),
        };
        catalog_by_name(&name).expect("catalog algebra")
    }
}

/// Warping functions used by a chart.
#[derive(Clone, Debug, PartialEq)]
pub enum Warp {
    /// `h_i = (1+r^2)^{-alpha_i}`, `f = r (1+r^2)^{-1/4}`.
    Profile(Vec<f64>),
    /// Constant `h_i` and `f`, for self-tests.
    Constant { h: Vec<f64>, f: f64 },
}

/// Coordinates: group (`x_1..x_n`, or `x, y, z` for the Heisenberg group), then `r`, then
/// sphere angles (`θ` for `k = 1`, `ψ, φ_1, φ_2` for `k = 2`).
#[derive(Clone, Debug)]
pub struct Chart {
    pub model: ChartModel,
    pub k: u32,
    pub warp: Warp,
}

impl Chart {
    pub fn new(model: ChartModel, k: u32) -> Result<Self> {
        if let ChartModel::Abelian(n) = model {
            if !(1..=2).contains(&n) {
                return Err(Error::Oracle(format!("abelian charts cover n <= 2, got {n}")));
            }
        }
        if !(1..=2).contains(&k) {
            return Err(Error::Oracle(format!("charts cover k in {{1, 2}}, got {k}")));
        }
        let warp = Warp::Profile(WarpProfile::new(model.group_dim())?.alphas_f64());
        Ok(Self { model, k, warp })
    }

    pub fn with_constant_warp(mut self, h: Vec<f64>, f: f64) -> Self {
        assert_eq!(h.len(), self.model.group_dim());
        self.warp = Warp::Constant { h, f };
        self
    }

    pub fn dim(&self) -> usize {
        self.model.group_dim() + 1 + (2 * self.k as usize - 1)
    }

    pub fn r_index(&self) -> usize {
        self.model.group_dim()
    }

    fn warp_at(&self, r: f64) -> (Vec<f64>, f64) {
        match &self.warp {
            Warp::Profile(alphas) => {
                let lt = (r * r).ln_1p();
                (
                    alphas.iter().map(|a| (-a * lt).exp()).collect(),
                    r * (-0.25 * lt).exp(),
                )
            }
            Warp::Constant { h, f } => (h.clone(), *f),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x[self.r_index()] <= 0.0 {
            return Err(Error::Oracle("chart needs r > 0".into()));
        }
        if self.k == 2 {
            let psi = x[self.r_index() + 1];
            if !(psi > 0.0 && psi < std::f64::consts::FRAC_PI_2) {
                return Err(Error::Oracle("sphere angle psi must lie in (0, pi/2)".into()));
            }
        }
        Ok(())
    }

    /// Metric without domain checks, for finite-difference stencils.
    fn metric_raw(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let n = self.model.group_dim();
        let ri = self.r_index();
        let (h, f) = self.warp_at(x[ri]);
        let mut g = DMatrix::zeros(d, d);
        match self.model {
            ChartModel::Abelian(_) => {
                for i in 0..n {
                    g[(i, i)] = h[i] * h[i];
                }
            }
            ChartModel::Heisenberg3 => {
                // h1^2 (dz - x dy)^2 + h2^2 dx^2 + h3^2 dy^2 in coordinates (x, y, z)
                let xx = x[0];
                let (a, b, c) = (h[0] * h[0], h[1] * h[1], h[2] * h[2]);
                g[(0, 0)] = b;
                g[(1, 1)] = c + a * xx * xx;
                g[(2, 2)] = a;
                g[(1, 2)] = -a * xx;
                g[(2, 1)] = -a * xx;
            }
        }
        g[(ri, ri)] = 1.0;
        let f2 = f * f;
        if self.k == 1 {
            g[(ri + 1, ri + 1)] = f2;
        } else {
            let psi = x[ri + 1];
            g[(ri + 1, ri + 1)] = f2;
            g[(ri + 2, ri + 2)] = f2 * psi.sin().powi(2);
            g[(ri + 3, ri + 3)] = f2 * psi.cos().powi(2);
        }
        g
    }

    /// Orthonormal frame `Y_1..Y_n, d/dr, U_1..U_{2k-1}` as columns.
    pub fn frame(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let n = self.model.group_dim();
        let ri = self.r_index();
        let (h, f) = self.warp_at(x[ri]);
        let mut e = DMatrix::zeros(d, d);
        match self.model {
            ChartModel::Abelian(_) => {
                for i in 0..n {
                    e[(i, i)] = 1.0 / h[i];
                }
            }
            ChartModel::Heisenberg3 => {
                // e1 = d/dz, e2 = d/dx, e3 = d/dy + x d/dz
                e[(2, 0)] = 1.0 / h[0];
                e[(0, 1)] = 1.0 / h[1];
                e[(1, 2)] = 1.0 / h[2];
                e[(2, 2)] = x[0] / h[2];
            }
        }
        e[(ri, ri)] = 1.0;
        if self.k == 1 {
            e[(ri + 1, ri + 1)] = 1.0 / f;
        } else {
            let psi = x[ri + 1];
            e[(ri + 1, ri + 1)] = 1.0 / f;
            e[(ri + 2, ri + 2)] = 1.0 / (f * psi.sin());
            e[(ri + 3, ri + 3)] = 1.0 / (f * psi.cos());
        }
        e
    }

    pub fn labels(&self) -> Vec<String> {
        let n = self.model.group_dim();
        let mut l: Vec<String> = (1..=n).map(|i| format!("Y{i}")).collect();
        l.push("dr".into());
        l.extend((1..2 * self.k).map(|j| format!("U{j}")));
        l
    }
}

pub fn chart_metric(chart: &Chart, point: &[f64]) -> Result<DMatrix<f64>> {
    chart.check_point(point)?;
    Ok(chart.metric_raw(point))
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(i, h) in moves {
        y[i] += h;
    }
    y
}

/// First and second partial derivatives of the metric by central differences.
fn metric_derivatives<F>(metric: &F, x: &[f64], h: f64) -> (Vec<DMatrix<f64>>, Vec<Vec<DMatrix<f64>>>)
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    let d = x.len();
    let g0 = metric(x);
    let mut d1 = Vec::with_capacity(d);
    let mut d2 = vec![vec![DMatrix::zeros(d, d); d]; d];
    for i in 0..d {
        let p = metric(&shifted(x, &[(i, h)]));
        let m = metric(&shifted(x, &[(i, -h)]));
        d1.push((&p - &m) / (2.0 * h));
        d2[i][i] = (&p + &m - &g0 * 2.0) / (h * h);
    }
    for i in 0..d {
        for j in i + 1..d {
            let pp = metric(&shifted(x, &[(i, h), (j, h)]));
            let pm = metric(&shifted(x, &[(i, h), (j, -h)]));
            let mp = metric(&shifted(x, &[(i, -h), (j, h)]));
            let mm = metric(&shifted(x, &[(i, -h), (j, -h)]));
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            d2[j][i] = v.clone();
            d2[i][j] = v;
        }
    }
    (d1, d2)
}

fn ricci_from_derivatives(g: &DMatrix<f64>, d1: &[DMatrix<f64>], d2: &[Vec<DMatrix<f64>>]) -> Result<DMatrix<f64>> {
    let d = g.nrows();
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Oracle("singular metric".into()))?;
    // A[i][j][l] = d_i g_jl + d_j g_il - d_l g_ij and its derivative along m
    let a = |i: usize, j: usize, l: usize| d1[i][(j, l)] + d1[j][(i, l)] - d1[l][(i, j)];
    let da = |m: usize, i: usize, j: usize, l: usize| d2[m][i][(j, l)] + d2[m][j][(i, l)] - d2[m][l][(i, j)];
    let dginv: Vec<DMatrix<f64>> = d1.iter().map(|dg| -(&ginv * dg * &ginv)).collect();
    let mut gamma = vec![vec![vec![0.0; d]; d]; d];
    // dgamma[m][k][i][j] = d_m Gamma^k_ij
    let mut dgamma = vec![vec![vec![vec![0.0; d]; d]; d]; d];
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut v = 0.0;
                for l in 0..d {
                    v += 0.5 * ginv[(k, l)] * a(i, j, l);
                }
                gamma[k][i][j] = v;
                gamma[k][j][i] = v;
                for m in 0..d {
                    let mut w = 0.0;
                    for l in 0..d {
                        w += 0.5 * (dginv[m][(k, l)] * a(i, j, l) + ginv[(k, l)] * da(m, i, j, l));
                    }
                    dgamma[m][k][i][j] = w;
                    dgamma[m][k][j][i] = w;
                }
            }
        }
    }
    let mut ric = DMatrix::zeros(d, d);
    for j in 0..d {
        for k in j..d {
            let mut v = 0.0;
            for i in 0..d {
                v += dgamma[i][i][j][k] - dgamma[j][i][i][k];
                for p in 0..d {
                    v += gamma[i][i][p] * gamma[p][j][k] - gamma[i][j][p] * gamma[p][i][k];
                }
            }
            ric[(j, k)] = v;
            ric[(k, j)] = v;
        }
    }
    Ok(ric)
}

fn check_step(step: f64) -> Result<()> {
    if !(step.is_finite() && step > 1e-7) {
        return Err(Error::Oracle(format!("finite-difference step {step} underflows")));
    }
    Ok(())
}

/// Coordinate Ricci tensor by plain second-order central differences.
pub fn fd_ricci_central<F>(metric: F, point: &[f64], step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    check_step(step)?;
    let (d1, d2) = metric_derivatives(&metric, point, step);
    ricci_from_derivatives(&metric(point), &d1, &d2)
}

/// Coordinate Ricci tensor, Richardson-extrapolated from steps `h` and `h/2`.
pub fn fd_ricci_with<F>(metric: F, point: &[f64], step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    check_step(step)?;
    let coarse = fd_ricci_central(&metric, point, step)?;
    let fine = fd_ricci_central(&metric, point, step / 2.0)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

pub fn fd_ricci(chart: &Chart, point: &[f64], step: f64) -> Result<DMatrix<f64>> {
    chart.check_point(point)?;
    fd_ricci_with(|x| chart.metric_raw(x), point, step)
}

/// Finite-difference Ricci in the orthonormal frame of the chart.
pub fn fd_frame_ricci(chart: &Chart, point: &[f64], step: f64) -> Result<DMatrix<f64>> {
    let ric = fd_ricci(chart, point, step)?;
    let e = chart.frame(point);
    Ok(e.transpose() * ric * e)
}

/// Frame Ricci predicted by the closed forms: diagonal `Ric(Y_i,Y_i)`, `Ric(d/dr, d/dr)`,
/// `Ric(U,U)`.
pub fn formula_frame_ricci(chart: &Chart, r: f64) -> Result<DMatrix<f64>> {
    if !matches!(chart.warp, Warp::Profile(_)) {
        return Err(Error::Oracle("closed forms need the warping profile".into()));
    }
    let data = AlgebraData::new(&chart.model.algebra())?;
    let t = total_ricci(&data, chart.k, r, DiagMode::Exact);
    let n = chart.model.group_dim();
    let mut m = DMatrix::zeros(chart.dim(), chart.dim());
    for i in 0..n {
        m[(i, i)] = t.ric_yy[i];
    }
    m[(n, n)] = t.ric_rr;
    for j in n + 1..chart.dim() {
        m[(j, j)] = t.ric_uu;
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize)]
pub struct PointComparison {
    pub point: Vec<f64>,
    pub r: f64,
    /// `max |fd - formula| / max |formula|` over all frame entries.
    pub rel_err: f64,
    pub worst_entry: (String, String),
}

pub fn compare_point(chart: &Chart, point: &[f64], step: f64) -> Result<PointComparison> {
    let r = point[chart.r_index()];
    let fd = fd_frame_ricci(chart, point, step)?;
    let exact = formula_frame_ricci(chart, r)?;
    let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let diff = &fd - &exact;
    let (mut worst, mut at) = (0.0, (0, 0));
    for i in 0..diff.nrows() {
        for j in 0..diff.ncols() {
            if diff[(i, j)].abs() > worst {
                worst = diff[(i, j)].abs();
                at = (i, j);
            }
        }
    }
    let labels = chart.labels();
    Ok(PointComparison {
        point: point.to_vec(),
        r,
        rel_err: worst / scale,
        worst_entry: (labels[at.0].clone(), labels[at.1].clone()),
    })
}

/// A random chart point with `r` in `[r_lo, r_hi]`, away from the sphere chart's poles.
pub fn random_point<R: Rng>(chart: &Chart, rng: &mut R, r_lo: f64, r_hi: f64) -> Vec<f64> {
    let n = chart.model.group_dim();
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    x.push(rng.gen_range(r_lo..r_hi));
    if chart.k == 1 {
        x.push(rng.gen_range(0.0..std::f64::consts::TAU));
    } else {
        x.push(rng.gen_range(0.2..1.37));
        x.push(rng.gen_range(0.0..std::f64::consts::TAU));
        x.push(rng.gen_range(0.0..std::f64::consts::TAU));
    }
    x
}

pub const EQUIVALENCE_TOL: f64 = 1e-3;
pub const FD_STEP: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceCase {
    pub model: ChartModel,
    pub k: u32,
    pub points: usize,
    pub max_rel_err: f64,
    pub worst: PointComparison,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub seed: u64,
    pub tol: f64,
    pub cases: Vec<EquivalenceCase>,
    pub passed: bool,
}

/// Finite-difference vs closed-form Ricci on abelian(1) with `k = 1, 2` and
/// heisenberg(3) with `k = 1`, at `points` random points each.
pub fn equivalence_run(seed: u64, points: usize) -> Result<EquivalenceReport> {
    let setups = [
        (ChartModel::Abelian(1), 1u32),
        (ChartModel::Abelian(1), 2),
        (ChartModel::Heisenberg3, 1),
    ];
    let mut cases = Vec::new();
    for (idx, (model, k)) in setups.into_iter().enumerate() {
        let chart = Chart::new(model, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
        let pts: Vec<Vec<f64>> = (0..points).map(|_| random_point(&chart, &mut rng, 0.1, 3.0)).collect();
        let cmp = pts
            .par_iter()
            .map(|p| compare_point(&chart, p, FD_STEP))
            .collect::<Result<Vec<_>>>()?;
        let worst = cmp
            .into_iter()
            .max_by(|a, b| a.rel_err.total_cmp(&b.rel_err))
            .ok_or_else(|| Error::Oracle("no points".into()))?;
        cases.push(EquivalenceCase {
            model,
            k,
            points,
            max_rel_err: worst.rel_err,
            passed: worst.rel_err <= EQUIVALENCE_TOL,
            worst,
        });
    }
    Ok(EquivalenceReport {
        seed,
        tol: EQUIVALENCE_TOL,
        passed: cases.iter().all(|c| c.passed),
        cases,
    })
}

/// Ricci of the left-invariant metric with orthonormal frame `X_i / h_i`, through the
/// Levi-Civita connection `∇_{e_i} e_j = ½ Σ_k (γ_ij^k - γ_jk^i + γ_ki^j) e_k`.
pub fn connection_ricci(a: &NilpotentAlgebra, h: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = a.dim;
    if h.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h.len(),
        });
    }
    let mut g = vec![vec![vec![0.0; n]; n]; n];
    for (i, j, l, c) in a.entries() {
        g[i - 1][j - 1][l - 1] = q_to_f64(c) * h[l - 1] / (h[i - 1] * h[j - 1]);
    }
    let mut nabla = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                nabla[i][j][k] = 0.5 * (g[i][j][k] - g[j][k][i] + g[k][i][j]);
            }
        }
    }
    // ∇_X of a constant-coefficient field v
    let apply = |x: usize, v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (j, vj) in v.iter().enumerate() {
            for k in 0..n {
                out[k] += vj * nabla[x][j][k];
            }
        }
        out
    };
    let apply_vec = |x: &[f64], v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0.0 {
                for (o, w) in out.iter_mut().zip(apply(i, v)) {
                    *o += xi * w;
                }
            }
        }
        out
    };
    let unit = |i: usize| -> Vec<f64> { (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect() };
    let mut ric = vec![vec![0.0; n]; n];
    for y in 0..n {
        for z in 0..n {
            let mut v = 0.0;
            for i in 0..n {
                // <R(e_i, e_y) e_z, e_i>
                let nyz = apply(y, &unit(z));
                let niz = apply(i, &unit(z));
                let a1 = apply(i, &nyz);
                let a2 = apply(y, &niz);
                let br: Vec<f64> = (0..n).map(|k| g[i][y][k]).collect();
                let a3 = apply_vec(&br, &unit(z));
                v += a1[i] - a2[i] - a3[i];
            }
            ric[y][z] = v;
        }
    }
    Ok(ric)
}

/// Value with first and second derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Jet {
    v: f64,
    d1: f64,
    d2: f64,
}

impl Jet {
    fn var(x: f64) -> Self {
        Self { v: x, d1: 1.0, d2: 0.0 }
    }

    fn constant(c: f64) -> Self {
        Self { v: c, d1: 0.0, d2: 0.0 }
    }

    fn powf(self, p: f64) -> Self {
        let vp1 = self.v.powf(p - 1.0);
        Self {
            v: self.v.powf(p),
            d1: p * vp1 * self.d1,
            d2: p * (p - 1.0) * self.v.powf(p - 2.0) * self.d1 * self.d1 + p * vp1 * self.d2,
        }
    }

    fn recip(self) -> Self {
        self.powf(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet {
            v: self.v - o.v,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

fn jets(alphas: &[f64], r: f64) -> (Vec<Jet>, Jet) {
    let x = Jet::var(r);
    let t = Jet::constant(1.0) + x * x;
    let h = alphas.iter().map(|a| t.powf(-a)).collect();
    (h, x * t.powf(-0.25))
}

pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|, scale)`, with `scale` the size of the terms
    /// that were combined.
    pub rel_err: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub m: i64,
    pub tol: f64,
    pub radii: Vec<f64>,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
    pub worst: Option<IdentityCheck>,
}

impl IdentityReport {
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }
}

fn check(identity: impl Into<String>, r: f64, lhs: f64, rhs: f64, scale: f64) -> IdentityCheck {
    let den = lhs.abs().max(rhs.abs()).max(scale);
    let rel_err = if den == 0.0 { 0.0 } else { (lhs - rhs).abs() / den };
    IdentityCheck {
        identity: identity.into(),
        r,
        lhs,
        rhs,
        rel_err,
        passed: rel_err <= IDENTITY_TOL,
    }
}

/// Fourth-order central difference of `g`, step `h`.
fn derivative5<F: Fn(f64) -> f64>(g: F, r: f64, h: f64) -> f64 {
    (-g(r + 2.0 * h) + 8.0 * g(r + h) - 8.0 * g(r - h) + g(r - 2.0 * h)) / (12.0 * h)
}

fn identities_at(n: usize, m: i64, r: f64) -> Result<Vec<IdentityCheck>> {
    let prof = WarpProfile::new(n)?;
    let e = prof.eval(r);
    let (h, f) = jets(&e.alphas, r);
    let mut out = Vec::new();
    let mf = m as f64;

    // (d) derivative ratios against automatic derivatives
    for i in 1..=n {
        let hi = h[i - 1];
        out.push(check(format!("d:h{i}'/h{i}"), r, e.h_ratio1(i), hi.d1 / hi.v, 0.0));
        out.push(check(format!("d:h{i}''/h{i}"), r, e.h_ratio2(i), hi.d2 / hi.v, 0.0));
        out.push(check(format!("d:h{i}'f'/(h{i}f)"), r, e.hf_ratio(i), hi.d1 * f.d1 / (hi.v * f.v), 0.0));
    }
    out.push(check("d:f'/f", r, e.f_ratio1(), f.d1 / f.v, 0.0));
    out.push(check("d:f''/f", r, e.f_ratio2(), f.d2 / f.v, 0.0));
    out.push(check("d:(1-f'^2)/f^2", r, e.fiber_curvature(), (1.0 - f.d1 * f.d1) / (f.v * f.v), 0.0));

    // fiber frame from raw warping functions
    let h1 = h[0];
    let mm = Jet::constant(mf * mf);
    let norm = (h1 * h1 + mm * f * f).powf(0.5);
    let a = h1 * norm.recip();
    let b = Jet::constant(mf) * f * norm.recip();
    let geo = fiber_geometry_at(&e, m);

    // (b) |T d/dr|^2 = <nabla_W d/dr, W>^2 with W = a Y_1 + b U_1
    let t_dr = a.v * a.v * h1.d1 / h1.v + b.v * b.v * f.d1 / f.v;
    out.push(check("b:|T_dr|^2", r, t_dr * t_dr, geo.g_mean * geo.g_mean, 0.0));

    // (c) W' = (b/h_1) X_1 - (a/f) V in r-independent fields X_1, V
    let c1 = b * h1.recip();
    let c2 = Jet::constant(-1.0) * a * f.recip();
    let bracket_w = c1.d1 * a.v * h1.v + c2.d1 * b.v * f.v;
    let a_num = 0.25 * bracket_w * bracket_w;
    let a_closed = a_dr_norm2(n, m, r)?;
    out.push(check("c:|A_dr|^2", r, a_closed, a_num, 0.0));

    // (a) <nabla_dr S, dr> = -g_mean'
    let g_of = |x: f64| fiber_geometry_at(&prof.eval(x), m).g_mean;
    let step = (1e-3 * (1.0 + r)).min(r / 4.0);
    let dg = derivative5(g_of, r, step);
    let grad = grad_mean_dr(n, m, r)?;
    let w = 1.0 / (1.0 + (mf * mf) * (f.v / h1.v).powi(2));
    let grad_scale = geo.g_mean.powi(2) + a_closed + (w * e.h_ratio2(1)).abs() + ((1.0 - w) * e.f_ratio2()).abs();
    out.push(check("a:<nabla_dr S,dr>", r, grad, -dg, grad_scale));

    // (e) error_rr = 2|A|^2 + |T|^2 - <nabla S>
    let p = SubmersionParams::new(catalog_by_name(&format!("abelian{n}"))?, 1, m)?;
    let err = error_rr(&p, r);
    let rhs = 2.0 * a_num + t_dr * t_dr + dg;
    out.push(check("e:error_rr", r, err, rhs, 2.0 * a_num + t_dr * t_dr + dg.abs()));
    Ok(out)
}

pub fn identity_suite(n: usize, m: i64, radii: &[f64]) -> Result<IdentityReport> {
    if m == 0 {
        return Err(Error::OutOfRange("twist m must be nonzero".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && **r <= 20.0)) {
        return Err(Error::OutOfRange(format!("radius {r} outside (0, 20]")));
    }
    let mut checks = Vec::new();
    for &r in radii {
        checks.extend(identities_at(n, m, r)?);
    }
    let worst = checks
        .iter()
        .max_by(|a, b| a.rel_err.total_cmp(&b.rel_err))
        .cloned();
    Ok(IdentityReport {
        n,
        m,
        tol: IDENTITY_TOL,
        radii: radii.to_vec(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        worst,
    })
}

/// `count` radii drawn uniformly from `(0.05, 20]`.
pub fn random_radii(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0.05..=20.0)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub equivalence: EquivalenceReport,
    pub identities: Vec<IdentityReport>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }
}

/// Equivalence run plus identity suites for `(n, m)` in `{1,2,3}^2`.
pub fn full_suite(seed: u64) -> Result<SuiteReport> {
    let equivalence = equivalence_run(seed, 20)?;
    let radii = random_radii(seed, 10);
    let mut identities = Vec::new();
    for n in 1..=3 {
        for m in 1..=3 {
            identities.push(identity_suite(n, m, &radii)?);
        }
    }
    Ok(SuiteReport {
        passed: equivalence.passed && identities.iter().all(|r| r.passed),
        equivalence,
        identities,
    })
}
