use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rtorsion::analytic::{zeta_det_laplacian, CircleModel};
use rtorsion::bundle::check_flatness;
use rtorsion::subdivide::barycentric_subdivide;
use rtorsion::torsion::{assemble, ft_torsion, t_comb_squared_exact};
use rtorsion::FMat;
use rtorsion_bench::workload;

fn flatness(c: &mut Criterion) {
    let mut g = c.benchmark_group("flatness");
    for name in ["torus", "lens-7-3"] {
        let (e, b) = workload(name, 2);
        g.bench_function(BenchmarkId::new("exact", name), |bench| bench.iter(|| check_flatness(&e.complex, &b).unwrap()));
    }
    g.finish();
}

fn torsion(c: &mut Criterion) {
    let mut g = c.benchmark_group("torsion");
    for name in ["torus", "klein", "lens-5-2"] {
        let (e, b) = workload(name, 2);
        let fb = b.to_f64();
        g.bench_function(BenchmarkId::new("float", name), |bench| bench.iter(|| ft_torsion(&e.complex, &fb, &e.spray).unwrap()));
        let tcc = assemble(&e.complex, &b, &e.spray).unwrap();
        g.bench_function(BenchmarkId::new("exact-elimination", name), |bench| bench.iter(|| t_comb_squared_exact(&tcc)));
    }
    // larger complex: torus after two subdivisions
    let (e, b) = workload("torus", 2);
    let sd = barycentric_subdivide(&e.complex, &b.to_f64(), &e.spray).unwrap();
    let sd = barycentric_subdivide(&sd.complex, &sd.bundle, &sd.spray).unwrap();
    g.bench_function("float/torus-sd2", |bench| bench.iter(|| ft_torsion(&sd.complex, &sd.bundle, &sd.spray).unwrap()));
    g.finish();
}

fn subdivision(c: &mut Criterion) {
    let (e, b) = workload("torus", 1);
    c.bench_function("subdivide/torus", |bench| bench.iter(|| barycentric_subdivide(&e.complex, &b, &e.spray).unwrap()));
}

fn analytic(c: &mut Criterion) {
    let m = CircleModel::new(FMat::from_rows(vec![vec![2.0, 1.0], vec![1.0, 1.0]]), 1.0).unwrap();
    let mut g = c.benchmark_group("zeta-det");
    for n in [1_000usize, 100_000] {
        g.bench_function(BenchmarkId::from_parameter(n), |bench| bench.iter(|| zeta_det_laplacian(&m, n, false).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, flatness, torsion, subdivision, analytic);
criterion_main!(benches);
