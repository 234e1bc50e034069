use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sbq_core::lie::GroupSpec;
use sbq_core::par::{map_chunks, map_chunks_sequential, CHUNK};
use sbq_core::quadrature::fiber_rule;
use sbq_core::repr::{random_function, HolomorphicFunction};

// |F(e^{iY})|² summed over an SU(2) fiber rule, the inner loop of the
// holomorphic norm.
fn fiber_sum(c: &mut Criterion) {
    let g: GroupSpec = "su2".parse().unwrap();
    let f = HolomorphicFunction::from_coefficients(random_function(&g, 3, 6, 1).unwrap());
    let mut group = c.benchmark_group("fiber_sum");
    group.sample_size(10);
    for order in [16, 32] {
        let rule = fiber_rule(&g, 1.0, order).unwrap();
        let task = |r: std::ops::Range<usize>| {
            r.map(|i| rule.weights[i] * f.eval(&g.exp_complex(&rule.nodes[i].times_i())).norm_sqr())
                .sum::<f64>()
        };
        group.bench_with_input(BenchmarkId::new("parallel", order), &order, |b, _| {
            b.iter(|| map_chunks(rule.len(), CHUNK, task).into_iter().sum::<f64>())
        });
        group.bench_with_input(BenchmarkId::new("sequential", order), &order, |b, _| {
            b.iter(|| {
                map_chunks_sequential(rule.len(), CHUNK, task)
                    .into_iter()
                    .sum::<f64>()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, fiber_sum);
criterion_main!(benches);
