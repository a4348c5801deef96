//! Prints k0 and the certified minimal k (m = 1) for every catalog algebra.
//!
//! `cargo run --release --example survey [grid] [exact]`

use posric_core::nilalg::{catalog_by_name, catalog_names};
use posric_core::quotient::{min_k, CertMode};
use posric_core::totalspace::{find_k0_detailed, threshold_k, DiagMode};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = if args.iter().any(|a| a == "grid") { CertMode::Grid } else { CertMode::Sturm };
    // exact mode is slow on ut4 (about a minute)
    let diag = if args.iter().any(|a| a == "exact") { DiagMode::Exact } else { DiagMode::Bound };
    println!("{:<12} {:>6} {:>6} {:>6}  rigorous", "algebra", "k0", "k*", "min_k");
    for name in catalog_names() {
        let a = catalog_by_name(&name).unwrap();
        let s = find_k0_detailed(&a, diag).unwrap();
        let (mk, cert) = min_k(&a, 1, mode, diag).unwrap();
        println!(
            "{name:<12} {:>6} {:>6} {mk:>6}  {}",
            s.k0,
            threshold_k(s.k0, a.dim),
            s.rigorous && cert.rigorous
        );
    }
}
