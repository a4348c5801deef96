use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use posric_core::chartop::{gysin_demo, has_nontorsion_square, pontryagin, torus_euler_class, ExtClass};
use posric_core::nilalg::{
    algebra_bound_c, catalog_by_name, catalog_names, check_commutation_condition, resolve_algebra, validate,
    NilpotentAlgebra,
};
use posric_core::oracle::full_suite;
use posric_core::quotient::{certify_positivity, min_k, scan, CertMode, PositivityCertificate, Verdict};
use posric_core::totalspace::{find_k0_detailed, threshold_k, DiagMode, SubmersionParams};

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "posric", version, about = "Ricci-positivity certificates for quotients of (G x C^k) by a twisted R-action")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Sturm,
    Grid,
}

impl From<Mode> for CertMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Sturm => CertMode::Sturm,
            Mode::Grid => CertMode::Grid,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Diag {
    Exact,
    Bound,
}

impl From<Diag> for DiagMode {
    fn from(d: Diag) -> Self {
        match d {
            Diag::Exact => DiagMode::Exact,
            Diag::Bound => DiagMode::Bound,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Demo {
    Gysin,
    Pontryagin,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in algebras.
    Catalog {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check an algebra file (or catalog name) for antisymmetry, Jacobi and adaptedness.
    Validate {
        algebra: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest k with a positive base certificate.
    Mink {
        #[arg(long)]
        algebra: String,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, value_enum, default_value = "sturm")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "bound")]
        diag: Diag,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify Ricci positivity of the base for given k and m.
    Certify {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        k: u32,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, value_enum, default_value = "sturm")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "bound")]
        diag: Diag,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the base Ricci entries on r in [0, r_max] as CSV.
    Scan {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        k: u32,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, default_value_t = 50.0)]
        r_max: f64,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, value_enum, default_value = "bound")]
        diag: Diag,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference equivalence run and identity suites.
    Oracle {
        /// Run the full suite (required).
        #[arg(long)]
        suite: bool,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cohomology demos on the 4-torus.
    Topology {
        #[arg(long, value_enum)]
        demo: Demo,
        /// Degree-2 class such as "x1^x2 + x3^x4".
        #[arg(long)]
        class: Option<String>,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

/// Usage-level failure: bad input, unreadable files.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    // through Value so object keys come out sorted
    let v = serde_json::to_value(v).expect("serializable report");
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

/// Writes `content` to `path`, or to standard output.
fn emit_report(content: &str, path: Option<&Path>) -> Result<(), Usage> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| Usage(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Positive => EXIT_OK,
        Verdict::NotPositive => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn certificate_text(c: &PositivityCertificate) -> String {
    let mut s = format!(
        "algebra {} n={} k={} m={} mode={:?} diag={:?}\nverdict: {:?} (rigorous: {})\n",
        c.params.algebra, c.params.n, c.params.k, c.params.m, c.mode, c.diag_mode, c.verdict, c.rigorous
    );
    if let (Some(r), Some(e)) = (c.witness_r, &c.witness_entry) {
        s.push_str(&format!("witness: row {e} at r = {r:.17e}\n"));
    }
    for row in &c.rows {
        s.push_str(&format!("  {:<4} {:?}", row.label, row.verdict));
        if let Some(d) = row.degree {
            s.push_str(&format!(" degree {d}"));
        }
        if let Some(why) = &row.reason {
            s.push_str(&format!(" ({why})"));
        }
        s.push('\n');
    }
    s
}

fn catalog(format: Format) -> Result<u8, Usage> {
    let mut rows = Vec::new();
    for name in catalog_names() {
        let a = catalog_by_name(&name)?;
        let bound = algebra_bound_c(&a)?;
        rows.push(json!({
            "name": name,
            "dim": a.dim,
            "abelian": a.is_abelian(),
            "commutation_condition": check_commutation_condition(&a)?,
            "c": bound.c.to_string(),
            "c_diag": bound.c_diag.to_string(),
        }));
    }
    let text = match format {
        Format::Json => to_json(&rows),
        Format::Text => {
            let mut s = format!("{:<12} {:>3}  {:<11} {:>5} {:>6}\n", "name", "dim", "commutation", "c", "c_diag");
            for r in &rows {
                s.push_str(&format!(
                    "{:<12} {:>3}  {:<11} {:>5} {:>6}\n",
                    r["name"].as_str().unwrap_or_default(),
                    r["dim"].to_string(),
                    r["commutation_condition"].to_string(),
                    r["c"].as_str().unwrap_or_default(),
                    r["c_diag"].as_str().unwrap_or_default()
                ));
            }
            s
        }
    };
    emit_report(&text, None)?;
    Ok(EXIT_OK)
}

fn load(name_or_path: &str) -> Result<NilpotentAlgebra, Usage> {
    Ok(resolve_algebra(name_or_path)?)
}

fn run(cli: Cli) -> Result<u8, Usage> {
    match cli.command {
        Command::Catalog { format } => catalog(format),
        Command::Validate { algebra, out } => {
            let report = validate(&load(&algebra)?);
            emit_report(&to_json(&report), out.as_deref())?;
            Ok(if report.passed { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Mink { algebra, m, mode, diag, out } => {
            let a = load(&algebra)?;
            let k0 = find_k0_detailed(&a, diag.into())?;
            let (k, cert) = min_k(&a, m, mode.into(), diag.into())?;
            let report = json!({
                "algebra": a.name,
                "n": a.dim,
                "m": m,
                "min_k": k,
                "k0": k0.k0,
                "k0_rigorous": k0.rigorous,
                "threshold": threshold_k(k0.k0, a.dim),
                "certificate": cert,
            });
            emit_report(&to_json(&report), out.as_deref())?;
            Ok(verdict_code(cert.verdict))
        }
        Command::Certify { algebra, k, m, mode, diag, format, out } => {
            let p = SubmersionParams::new(load(&algebra)?, k, m)?;
            let cert = certify_positivity(&p, mode.into(), diag.into())?;
            let text = match format {
                Format::Json => cert.to_json(),
                Format::Text => certificate_text(&cert),
            };
            emit_report(&text, out.as_deref())?;
            Ok(verdict_code(cert.verdict))
        }
        Command::Scan { algebra, k, m, r_max, steps, diag, out } => {
            if !(r_max.is_finite() && r_max > 0.0) {
                return Err(Usage(format!("--r-max must be positive, got {r_max}")));
            }
            let p = SubmersionParams::new(load(&algebra)?, k, m)?;
            let table = scan(&p, r_max, steps, diag.into())?;
            emit_report(&table.to_csv(), out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Oracle { suite, seed, out } => {
            if !suite {
                return Err(Usage("oracle needs --suite".into()));
            }
            let report = full_suite(seed)?;
            emit_report(&report.to_json(), out.as_deref())?;
            Ok(if report.passed { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Topology { demo, class, k, m, format } => topology(demo, class, k, m, format),
    }
}

fn topology(demo: Demo, class: Option<String>, k: u32, m: i64, format: Format) -> Result<u8, Usage> {
    match demo {
        Demo::Gysin => {
            let g = gysin_demo();
            let text = match format {
                Format::Json => to_json(&g),
                Format::Text => {
                    let mut s = format!("e = {}\ncup with e, H^1 -> H^3:\n", g.euler_class);
                    for row in &g.cup_matrix {
                        s.push_str(&format!("  [{}]\n", row.join(", ")));
                    }
                    s.push_str(&format!(
                        "|det| = {}\ne^2 = {}\n",
                        g.determinant.trim_start_matches('-'),
                        g.euler_square
                    ));
                    s
                }
            };
            emit_report(&text, None)?;
            Ok(if g.isomorphism { EXIT_OK } else { EXIT_FAIL })
        }
        Demo::Pontryagin => {
            let alpha = match class {
                Some(c) => ExtClass::parse(&c, None)?,
                None => torus_euler_class(),
            };
            let b = pontryagin(&alpha, k, m)?;
            let nontorsion = has_nontorsion_square(&alpha);
            let text = match format {
                Format::Json => to_json(&json!({
                    "alpha": alpha,
                    "classes": b,
                    "nontorsion_square": nontorsion,
                })),
                Format::Text => format!(
                    "alpha = {alpha}\nc1 = {}\np = {}\np1 = {}\nalpha^2 nontorsion: {nontorsion}\n",
                    b.c1, b.total_p, b.p1
                ),
            };
            emit_report(&text, None)?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
