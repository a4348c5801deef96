use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use posric_core::nilalg::catalog_by_name;
use posric_core::quotient::{certify_positivity, CertMode};
use posric_core::totalspace::{find_k0, DiagMode, SubmersionParams};

fn k0_search(c: &mut Criterion) {
    let mut g = c.benchmark_group("find_k0");
    for name in ["abelian1", "heisenberg3", "twisted4"] {
        let a = catalog_by_name(name).unwrap();
        g.bench_function(name, |b| b.iter(|| find_k0(black_box(&a), DiagMode::Bound).unwrap()));
    }
    g.finish();
}

fn certify(c: &mut Criterion) {
    let mut g = c.benchmark_group("certify");
    g.sample_size(10);
    for (name, k) in [("abelian1", 35), ("heisenberg3", 665)] {
        let p = SubmersionParams::new(catalog_by_name(name).unwrap(), k, 1).unwrap();
        for (label, mode) in [("sturm", CertMode::Sturm), ("grid", CertMode::Grid)] {
            g.bench_function(format!("{name}/{label}"), |b| {
                b.iter(|| certify_positivity(black_box(&p), mode, DiagMode::Bound).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, k0_search, certify);
criterion_main!(benches);
