use criterion::{black_box, criterion_group, criterion_main, Criterion};
use isotropykit::analysis::{jacobian_rank, random_system, spectral_list, SystemSpec};
use isotropykit::classical_bases::boehler_scalars;
use isotropykit::lin3::{eig_sym, svd3, DEFAULT_DEGENERACY_TOL};
use isotropykit::spectral_frame::{build_frame, build_svd_frame, extract_invariants};
use isotropykit::{Mat3, SymMat3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn linear_algebra(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = SymMat3::from_upper(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
    let f = Mat3(std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))));
    c.bench_function("eig_sym", |b| b.iter(|| eig_sym(black_box(&a), DEFAULT_DEGENERACY_TOL).unwrap()));
    c.bench_function("svd3", |b| b.iter(|| svd3(black_box(&f)).unwrap()));
}

fn frames(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sys = random_system(&mut rng, SystemSpec { n: 2, m: 1, p: 2, ..Default::default() }).unwrap();
    c.bench_function("frame+invariants N2M1P2", |b| {
        b.iter(|| {
            let f = build_frame(black_box(&sys), DEFAULT_DEGENERACY_TOL).unwrap();
            extract_invariants(&sys, &f).unwrap()
        })
    });
    c.bench_function("svd frame+invariants N2M1P2", |b| {
        b.iter(|| {
            let f = build_svd_frame(black_box(&sys)).unwrap();
            extract_invariants(&sys, &f).unwrap()
        })
    });
}

fn rank(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sys = random_system(&mut rng, SystemSpec { n: 2, p: 1, ..Default::default() }).unwrap();
    let classical = boehler_scalars(2, 0, 1);
    let mut g = c.benchmark_group("jacobian_rank N2P1");
    g.sample_size(20);
    g.bench_function("spectral", |b| {
        b.iter(|| jacobian_rank("N2P1", &|s| Ok(spectral_list(s, false)?.values()), black_box(&sys), None).unwrap())
    });
    g.bench_function("classical", |b| {
        b.iter(|| jacobian_rank("N2P1", &|s| classical.evaluate(s), black_box(&sys), None).unwrap())
    });
    g.finish();
}

criterion_group!(benches, linear_algebra, frames, rank);
criterion_main!(benches);
