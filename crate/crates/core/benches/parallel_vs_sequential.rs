use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fairrepair::embedding::{random_walks, EmbeddingConfig};
use fairrepair::graph::{builtin, generate_sbm};
use fairrepair::metrics::{representation_bias, RbConfig};
use fairrepair::repair::{repair, RepairConfig};
use fairrepair::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn walks(c: &mut Criterion) {
    let g = generate_sbm(&builtin("G1", 0).unwrap()).unwrap();
    let mut group = c.benchmark_group("random_walks");
    for (name, execution) in MODES {
        let cfg = EmbeddingConfig { walks_per_node: 40, execution, ..EmbeddingConfig::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| random_walks(&g, &cfg).unwrap()));
    }
    group.finish();
}

fn barycenter(c: &mut Criterion) {
    let g = generate_sbm(&builtin("G5", 0).unwrap()).unwrap();
    let mut group = c.benchmark_group("barycenter_repair");
    group.sample_size(10);
    for (name, execution) in MODES {
        let cfg = RepairConfig { max_outer: 3, execution, ..RepairConfig::emd() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| repair(&g, &cfg).unwrap()));
    }
    group.finish();
}

fn lambda_sweep(c: &mut Criterion) {
    let g = generate_sbm(&builtin("G1", 0).unwrap()).unwrap();
    let lambdas = [0.0, 0.005, 1.0, 5.0];
    let mut group = c.benchmark_group("lambda_sweep");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                execution.map(lambdas.len(), |i| {
                    let cfg = RepairConfig { execution, ..RepairConfig::laplacian(lambdas[i]) };
                    repair(&g, &cfg).unwrap().added_mass
                })
            })
        });
    }
    group.finish();
}

fn cross_validation(c: &mut Criterion) {
    let g = generate_sbm(&builtin("G1", 0).unwrap()).unwrap();
    let z = fairrepair::embedding::spectral_embed(&g, 16).unwrap();
    let mut group = c.benchmark_group("representation_bias");
    for (name, execution) in MODES {
        let cfg = RbConfig { execution, ..RbConfig::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| representation_bias(z.view(), g.labels(), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, walks, barycenter, lambda_sweep, cross_validation);
criterion_main!(benches);
