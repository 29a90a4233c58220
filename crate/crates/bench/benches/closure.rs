use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use polargrass::grassmann::{span_closure_with, ClosureOptions};
use polargrass::linalg::Subspace;
use polargrass::{build_grassmannian, plucker_rank, span_closure, Budget, Field, PolarModel};
use polargrass_bench::{lines_of_parabolic, orth_seed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field_and_rref(c: &mut Criterion) {
    let f = Field::with_order(9).unwrap();
    c.bench_function("gf9_mul_4096", |b| {
        b.iter(|| {
            let mut acc = 1;
            for x in 1..4096u32 {
                acc = f.mul(acc, (x % 8 + 1) as u16);
            }
            acc
        })
    });
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rows: Vec<Vec<u16>> = (0..4).map(|_| (0..8).map(|_| rng.gen_range(0..9)).collect()).collect();
    c.bench_function("rref_4x8_f9", |b| b.iter(|| Subspace::from_rows(&f, 8, &rows).unwrap()));
    c.bench_function("plucker_3x7_f9", |b| {
        let s = Subspace::from_rows(&f, 8, &rows[..3]).unwrap();
        b.iter(|| s.plucker(&f).unwrap())
    });
}

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    g.sample_size(10);
    g.bench_function("q2_6_3", |b| {
        b.iter_batched(
            || PolarModel::parse("Qparab(3,3)", Budget::DEFAULT).unwrap(),
            |mut m| build_grassmannian(&mut m, 2).unwrap().num_points(),
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

fn closure(c: &mut Criterion) {
    let geom = lines_of_parabolic(4);
    let seed = orth_seed(4, &geom);
    let mut g = c.benchmark_group("closure_q2_6_4");
    g.sample_size(20);
    g.bench_function("sequential", |b| b.iter(|| span_closure(&geom, &seed).unwrap().generated_all));
    g.bench_function("parallel", |b| {
        let opts = ClosureOptions { parallel: true, trace: false };
        b.iter(|| span_closure_with(&geom, &seed, opts).unwrap().generated_all)
    });
    g.bench_function("plucker_rank", |b| b.iter(|| plucker_rank(&geom).unwrap().rank));
    g.finish();
}

criterion_group!(benches, field_and_rref, enumeration, closure);
criterion_main!(benches);
