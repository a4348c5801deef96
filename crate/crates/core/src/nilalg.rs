//! Nilpotent Lie algebras in an adapted basis and the Ricci data of the rescaled
//! left-invariant metrics `g_r = sum_i h_i(r)^2 sigma_i^2`.
//!
//! Indices are 1-based throughout, matching the basis labels `X_1..X_n` with `X_1` central.

use std::collections::BTreeMap;
use std::path::Path;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{q, q_to_f64, Exponent, TPoly};
use crate::profile::{WarpProfile, MAX_N};

type Coeffs = BTreeMap<usize, BigRational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilpotentAlgebra {
    pub name: String,
    pub dim: usize,
    /// `(i, j) -> {l: c_ij^l}`; both orders are stored so broken inputs stay observable.
    structure: BTreeMap<(usize, usize), Coeffs>,
}

impl NilpotentAlgebra {
    pub fn abelian_named(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
            structure: BTreeMap::new(),
        }
    }

    /// Sets `[X_i, X_j] = sum_l c_l X_l` and the antisymmetric partner.
    pub fn set_bracket(&mut self, i: usize, j: usize, coeffs: &[(usize, BigRational)]) {
        for (l, c) in coeffs {
            self.set_raw(i, j, *l, c.clone());
            self.set_raw(j, i, *l, -c);
        }
    }

    /// Sets one structure constant without touching `c_ji^l`.
    pub fn set_raw(&mut self, i: usize, j: usize, l: usize, c: BigRational) {
        let entry = self.structure.entry((i, j)).or_default();
        if c.is_zero() {
            entry.remove(&l);
        } else {
            entry.insert(l, c);
        }
        if entry.is_empty() {
            self.structure.remove(&(i, j));
        }
    }

    pub fn c(&self, i: usize, j: usize, l: usize) -> BigRational {
        self.structure
            .get(&(i, j))
            .and_then(|m| m.get(&l))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn bracket(&self, i: usize, j: usize) -> Option<&Coeffs> {
        self.structure.get(&(i, j))
    }

    pub fn is_abelian(&self) -> bool {
        self.structure.is_empty()
    }

    /// All nonzero `(i, j, l, c)` in index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, &BigRational)> {
        self.structure
            .iter()
            .flat_map(|(&(i, j), m)| m.iter().map(move |(&l, c)| (i, j, l, c)))
    }

    pub fn profile(&self) -> Result<WarpProfile> {
        WarpProfile::new(self.dim)
    }

    fn require_valid(&self) -> Result<()> {
        let report = validate(self);
        if report.passed {
            Ok(())
        } else {
            let v = &report.violations[0];
            Err(Error::InvalidAlgebra(format!(
                "{}: {} {:?} ({})",
                self.name, v.check, v.indices, v.witness
            )))
        }
    }
}

/// Names accepted by [`catalog_by_name`].
pub fn catalog_names() -> Vec<String> {
    let mut v: Vec<String> = (1..=MAX_N).map(|n| format!("abelian{n}")).collect();
    v.extend(["heisenberg3", "heisenberg5", "ut2", "ut3", "ut4", "twisted4"].map(String::from));
    v
}

pub fn catalog_algebra(name: &str, param: usize) -> Result<NilpotentAlgebra> {
    let out_of_range = || Error::OutOfRange(format!("{name}({param})"));
    match name {
        "abelian" => {
            if param == 0 || param > MAX_N {
                return Err(out_of_range());
            }
            Ok(NilpotentAlgebra::abelian_named(format!("abelian{param}"), param))
        }
        "heisenberg" => {
            if param < 3 || param % 2 == 0 || param > MAX_N {
                return Err(out_of_range());
            }
            let mut a = NilpotentAlgebra::abelian_named(format!("heisenberg{param}"), param);
            for j in 1..=(param - 1) / 2 {
                a.set_bracket(2 * j, 2 * j + 1, &[(1, q(1))]);
            }
            Ok(a)
        }
        "ut" => {
            if !(2..=4).contains(&param) {
                return Err(out_of_range());
            }
            Ok(upper_triangular(param))
        }
        "twisted" | "twisted4" => {
            if param != 4 {
                return Err(out_of_range());
            }
            let mut a = NilpotentAlgebra::abelian_named("twisted4", 4);
            a.set_bracket(2, 4, &[(1, q(1))]);
            a.set_bracket(3, 4, &[(1, q(1))]);
            Ok(a)
        }
        _ => Err(Error::UnknownAlgebra(name.to_string())),
    }
}

/// Parses `abelian3`, `heisenberg5`, `ut4`, `twisted4`, ...
pub fn catalog_by_name(name: &str) -> Result<NilpotentAlgebra> {
    let split = name
        .find(|c: char| c.is_ascii_digit())
        .ok_or_else(|| Error::UnknownAlgebra(name.to_string()))?;
    let (base, digits) = name.split_at(split);
    let param: usize = digits
        .parse()
        .map_err(|_| Error::UnknownAlgebra(name.to_string()))?;
    catalog_algebra(base, param)
}

/// Strictly upper triangular `d x d` matrices. Basis `E_ab` (a < b) ordered by height
/// `b - a` descending, then `a`, so the top corner `E_1d` is `X_1`.
fn upper_triangular(d: usize) -> NilpotentAlgebra {
    let mut basis: Vec<(usize, usize)> = (1..=d)
        .flat_map(|a| ((a + 1)..=d).map(move |b| (a, b)))
        .collect();
    basis.sort_by_key(|&(a, b)| (std::cmp::Reverse(b - a), a));
    let index = |p: (usize, usize)| basis.iter().position(|&x| x == p).map(|i| i + 1);
    let mut alg = NilpotentAlgebra::abelian_named(format!("ut{d}"), basis.len());
    for (xi, &(a, b)) in basis.iter().enumerate() {
        for (xj, &(c, e)) in basis.iter().enumerate() {
            if xi >= xj {
                continue;
            }
            // [E_ab, E_ce] = delta_bc E_ae - delta_ea E_cb
            let mut out: Vec<(usize, BigRational)> = Vec::new();
            if b == c {
                out.push((index((a, e)).unwrap(), q(1)));
            }
            if e == a {
                out.push((index((c, b)).unwrap(), q(-1)));
            }
            if !out.is_empty() {
                alg.set_bracket(xi + 1, xj + 1, &out);
            }
        }
    }
    alg
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub indices: Vec<usize>,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

pub fn validate(a: &NilpotentAlgebra) -> ValidationReport {
    let n = a.dim;
    let mut violations = Vec::new();
    let mut push = |check: &str, indices: Vec<usize>, witness: String| {
        violations.push(Violation {
            check: check.into(),
            indices,
            witness,
        })
    };
    for (i, j, l, c) in a.entries() {
        if [i, j, l].iter().any(|&x| x == 0 || x > n) {
            push("index_range", vec![i, j, l], c.to_string());
        }
    }
    // antisymmetry, including c_ii^l = 0
    for (i, j, l, c) in a.entries() {
        let sum = c + a.c(j, i, l);
        if !sum.is_zero() && (i <= j || a.c(j, i, l).is_zero()) {
            push("antisymmetry", vec![i, j, l], sum.to_string());
        }
    }
    // [X, X_i] lies in span{X_1, ..., X_{i-1}}
    for (i, j, l, c) in a.entries() {
        if l >= i.min(j) {
            push("adapted", vec![i, j, l], c.to_string());
        }
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            for k in (j + 1)..=n {
                for l in 1..=n {
                    let mut s = BigRational::zero();
                    for m in 1..=n {
                        s += a.c(i, j, m) * a.c(m, k, l)
                            + a.c(j, k, m) * a.c(m, i, l)
                            + a.c(k, i, m) * a.c(m, j, l);
                    }
                    if !s.is_zero() {
                        push("jacobi", vec![i, j, k, l], s.to_string());
                    }
                }
            }
        }
    }
    ValidationReport {
        passed: violations.is_empty(),
        violations,
    }
}

/// `c_ij^l c_jk^l = 0` for every `i != k`, `j` and level `l`.
pub fn check_commutation_condition(a: &NilpotentAlgebra) -> Result<bool> {
    a.require_valid()?;
    Ok(commutation_witness(a).is_none())
}

/// First `(i, j, k, l)` violating the commutation condition.
pub fn commutation_witness(a: &NilpotentAlgebra) -> Option<(usize, usize, usize, usize)> {
    for (i, j, l, c1) in a.entries() {
        for k in 1..=a.dim {
            if k != i && !(c1 * a.c(j, k, l)).is_zero() {
                return Some((i, j, k, l));
            }
        }
    }
    None
}

/// One monomial `coeff * t^exponent` of a Ricci entry, with the structure-constant
/// indices that produced it: `(i, b, j, c)` for `-1/2 gamma_ib^c gamma_jb^c` and
/// `(b, c, i, j)` style labels `(i, b, j, c)` for `1/4 gamma_bc^i gamma_bc^j` as well.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RicciMonomial {
    pub entry: (usize, usize),
    pub indices: (usize, usize, usize, usize),
    #[serde(serialize_with = "ser_q")]
    pub coeff: BigRational,
    #[serde(serialize_with = "ser_exp")]
    pub exponent: Exponent,
}

fn ser_q<S: serde::Serializer>(c: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&c.to_string())
}

fn ser_exp<S: serde::Serializer>(e: &Exponent, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

fn gamma_exp(p: &WarpProfile, i: usize, j: usize, l: usize) -> Exponent {
    p.alpha(i) + p.alpha(j) - p.alpha(l)
}

/// All monomials of `Ric_G(Y_i, Y_j)` for `i <= j` as exact functions of `t = 1 + r^2`,
/// from `Ric(e_a, e_d) = -1/2 sum_{b,c} gamma_ab^c gamma_db^c + 1/4 sum_{b,c} gamma_bc^a gamma_bc^d`.
pub fn ricci_monomials(a: &NilpotentAlgebra) -> Result<Vec<RicciMonomial>> {
    let p = a.profile()?;
    let n = a.dim;
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            for b in 1..=n {
                for c in 1..=n {
                    let x = a.c(i, b, c) * a.c(j, b, c);
                    if !x.is_zero() {
                        out.push(RicciMonomial {
                            entry: (i, j),
                            indices: (i, b, j, c),
                            coeff: x * q(-1) / q(2),
                            exponent: gamma_exp(&p, i, b, c) + gamma_exp(&p, j, b, c),
                        });
                    }
                    let y = a.c(b, c, i) * a.c(b, c, j);
                    if !y.is_zero() {
                        out.push(RicciMonomial {
                            entry: (i, j),
                            indices: (b, c, i, j),
                            coeff: y / q(4),
                            exponent: gamma_exp(&p, b, c, i) + gamma_exp(&p, b, c, j),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Exact `Ric_G(Y_i, Y_j)` as a polynomial in fractional powers of `t`.
pub fn ricci_entry(a: &NilpotentAlgebra, i: usize, j: usize) -> Result<TPoly> {
    let (i, j) = (i.min(j), i.max(j));
    let mut out = TPoly::zero();
    for m in ricci_monomials(a)? {
        if m.entry == (i, j) {
            out.add_term(m.exponent, &m.coeff);
        }
    }
    Ok(out)
}

/// `Ric_G(Y_i, Y_j)` at radius `r`, computed directly from the rescaled constants
/// `gamma_ij^l = c_ij^l h_l / (h_i h_j)`.
pub fn scaled_ricci(a: &NilpotentAlgebra, n: usize, r: f64) -> Result<Vec<Vec<f64>>> {
    if n != a.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: n,
        });
    }
    let ev = a.profile()?.eval(r);
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for (i, j, l, c) in a.entries() {
        gamma[i - 1][j - 1][l - 1] = q_to_f64(c) * ev.h[l - 1] / (ev.h[i - 1] * ev.h[j - 1]);
    }
    let mut ric = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in x..n {
            let mut v = 0.0;
            for b in 0..n {
                for c in 0..n {
                    v += -0.5 * gamma[x][b][c] * gamma[y][b][c] + 0.25 * gamma[b][c][x] * gamma[b][c][y];
                }
            }
            ric[x][y] = v;
            ric[y][x] = v;
        }
    }
    Ok(ric)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentEntry {
    pub entry: (usize, usize),
    #[serde(serialize_with = "ser_exp")]
    pub exponent: Exponent,
    #[serde(serialize_with = "ser_q")]
    pub coeff: BigRational,
}

/// Decay constants of the rescaled Ricci tensor, all valid for every `r >= 0`:
///
/// * `|Ric_G(Y_i, Y_j)| <= c / (1+r^2)` for `i != j`;
/// * `Ric_G(Y_i, Y_i) >= -c_diag / (1+r^2)`;
/// * `|sum_k gamma_ki^1 gamma_kj^1| / 2 <= c_a / (1+r^2)` for `2 <= i != j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgebraBound {
    #[serde(serialize_with = "ser_q")]
    pub c: BigRational,
    #[serde(serialize_with = "ser_q")]
    pub c_diag: BigRational,
    #[serde(serialize_with = "ser_q")]
    pub c_a: BigRational,
    pub worst_indices: Vec<(usize, usize, usize, usize)>,
    /// Combined off-diagonal monomials.
    pub exponent_table: Vec<ExponentEntry>,
}

impl AlgebraBound {
    pub fn c_f64(&self) -> f64 {
        q_to_f64(&self.c)
    }
}

fn check_decay(e: Exponent, indices: Vec<usize>) -> Result<()> {
    if e > Exponent::from_integer(-1) {
        return Err(Error::UnboundedMonomial {
            exponent: e.to_string(),
            indices,
        });
    }
    Ok(())
}

pub fn algebra_bound_c(a: &NilpotentAlgebra) -> Result<AlgebraBound> {
    a.require_valid()?;
    let n = a.dim;
    let p = a.profile()?;
    let monos = ricci_monomials(a)?;
    let mut c = BigRational::zero();
    let mut worst = Vec::new();
    let mut table = Vec::new();
    let mut c_diag = BigRational::zero();
    for i in 1..=n {
        for j in i..=n {
            let mine: Vec<&RicciMonomial> = monos.iter().filter(|m| m.entry == (i, j)).collect();
            let mut combined = TPoly::zero();
            for m in &mine {
                combined.add_term(m.exponent, &m.coeff);
            }
            let mut mass = BigRational::zero();
            for (e, coeff) in combined.terms() {
                if i == j && !coeff.is_negative() {
                    continue;
                }
                check_decay(*e, vec![i, j])?;
                mass += coeff.abs();
                if i != j {
                    table.push(ExponentEntry {
                        entry: (i, j),
                        exponent: *e,
                        coeff: coeff.clone(),
                    });
                }
            }
            if i == j {
                if mass > c_diag {
                    c_diag = mass;
                }
                continue;
            }
            if mass > c {
                c = mass.clone();
                worst.clear();
            }
            if mass == c && !mass.is_zero() {
                worst.extend(mine.iter().map(|m| m.indices));
            }
        }
    }
    // A-tensor term between Y_i and Y_j in the base
    let mut c_a = BigRational::zero();
    for i in 2..=n {
        for j in (i + 1)..=n {
            let mut combined = TPoly::zero();
            for k in 1..=n {
                let x = a.c(k, i, 1) * a.c(k, j, 1);
                if !x.is_zero() {
                    let e = gamma_exp(&p, k, i, 1) + gamma_exp(&p, k, j, 1);
                    combined.add_term(e, &(x / q(2)));
                }
            }
            let mut mass = BigRational::zero();
            for (e, coeff) in combined.terms() {
                check_decay(*e, vec![i, j])?;
                mass += coeff.abs();
            }
            if mass > c_a {
                c_a = mass;
            }
        }
    }
    Ok(AlgebraBound {
        c,
        c_diag,
        c_a,
        worst_indices: worst,
        exponent_table: table,
    })
}

/// `sum_k (c_ki^1)^2 t^{2(alpha_k + alpha_i - alpha_1)} / 2`: the numerator of the base
/// A-term `2|A_{Y_i} W|^2` before division by the weight.
pub fn a_term_diag(a: &NilpotentAlgebra, i: usize) -> Result<TPoly> {
    let p = a.profile()?;
    let mut out = TPoly::zero();
    for k in 1..=a.dim {
        let x = a.c(k, i, 1);
        if !x.is_zero() {
            out.add_term(gamma_exp(&p, k, i, 1) * 2, &(&x * &x / q(2)));
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct AlgebraFile {
    name: String,
    dim: usize,
    brackets: Vec<BracketEntry>,
}

#[derive(Serialize, Deserialize)]
struct BracketEntry {
    i: usize,
    j: usize,
    coeffs: BTreeMap<String, String>,
}

impl NilpotentAlgebra {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: AlgebraFile = serde_json::from_str(text)?;
        let mut a = Self::abelian_named(file.name, file.dim);
        for b in file.brackets {
            if b.i >= b.j {
                return Err(Error::Parse(format!("bracket ({}, {}) must have i < j", b.i, b.j)));
            }
            let mut coeffs = Vec::new();
            for (l, c) in &b.coeffs {
                let l: usize = l
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad level `{l}`")))?;
                let c: BigRational = c
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad rational `{c}`")))?;
                coeffs.push((l, c));
            }
            a.set_bracket(b.i, b.j, &coeffs);
        }
        Ok(a)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let brackets = self
            .structure
            .iter()
            .filter(|((i, j), _)| i < j)
            .map(|(&(i, j), m)| BracketEntry {
                i,
                j,
                coeffs: m.iter().map(|(l, c)| (l.to_string(), c.to_string())).collect(),
            })
            .collect();
        let file = AlgebraFile {
            name: self.name.clone(),
            dim: self.dim,
            brackets,
        };
        serde_json::to_string_pretty(&file).expect("algebra serializes")
    }
}

/// Accepts a catalog name or a path to an algebra file.
pub fn resolve_algebra(name_or_path: &str) -> Result<NilpotentAlgebra> {
    let path = Path::new(name_or_path);
    if path.exists() {
        return NilpotentAlgebra::load(path);
    }
    catalog_by_name(name_or_path)
}
