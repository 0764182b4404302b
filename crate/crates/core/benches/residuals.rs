use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use difflie::catalog;
use difflie::cohomology::{CochainComplexSpec, Flavor};
use difflie::lie::{adjoint_rep, DiffLieAlgebra};
use difflie::linalg::Matrix;
use difflie::linfty;
use difflie::scalar::int;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", one), ("parallel", all)]
}

fn cohomology(c: &mut Criterion) {
    let a = DiffLieAlgebra::new(catalog::filiform4(), Matrix::identity(4), int(-1));
    let rep = adjoint_rep(&a);
    let mut group = c.benchmark_group("difflie_complex_filiform4");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| CochainComplexSpec::new(a.clone(), rep.clone(), 3, Flavor::DiffLie).build().unwrap()))
        });
    }
    group.finish();
}

fn maurer_cartan(c: &mut Criterion) {
    let a = catalog::rigid_sl2();
    let mut group = c.benchmark_group("mc_check_sl2");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| linfty::mc_check_absolute(&a.algebra.bracket, &a.d, &a.weight).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, cohomology, maurer_cartan);
criterion_main!(benches);
