use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mqs_bench::{cat_pair, lossy_qiopa_factors};
use mqs_core::loss::{apply_loss_single_mode, apply_loss_two_mode};
use mqs_core::ofilter::filtered_product_fidelity;
use mqs_core::{fidelity, FilterThreshold, LossSetting, ModeBasis, TensorProduct};

fn loss_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("loss");
    let loss = LossSetting::from_reflectivity(0.2).unwrap();
    for alpha in [2.0, 4.0, 6.0] {
        let (rho, _) = cat_pair(alpha);
        group.bench_with_input(BenchmarkId::new("single_mode", rho.n_max()), &rho, |b, r| {
            b.iter(|| apply_loss_single_mode(black_box(r), loss))
        });
    }
    for g in [0.3, 0.5] {
        let [a, _, b, _] = lossy_qiopa_factors(g, 0.0);
        let two = a.tensor(&b, ModeBasis::equatorial(0.0));
        group.bench_with_input(BenchmarkId::new("two_mode", two.n_max()), &two, |bch, r| {
            bch.iter(|| apply_loss_two_mode(black_box(r), loss))
        });
    }
    group.finish();
}

fn fidelity_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("fidelity");
    for alpha in [2.0, 4.0, 6.0] {
        let loss = LossSetting::from_reflectivity(0.1).unwrap();
        let (a, b) = cat_pair(alpha);
        let (a, b) = (apply_loss_single_mode(&a, loss), apply_loss_single_mode(&b, loss));
        group.bench_with_input(BenchmarkId::new("lossy_cat", a.n_max()), &(a, b), |bch, (a, b)| {
            bch.iter(|| fidelity(black_box(a), black_box(b)).unwrap())
        });
    }
    group.finish();
}

fn filter_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("filtered_fidelity");
    group.sample_size(10);
    for g in [0.5, 0.8] {
        let [a1, a2, b1, b2] = lossy_qiopa_factors(g, 0.2);
        for k in [0, 2] {
            group.bench_function(BenchmarkId::new(format!("g={g}"), k), |bch| {
                bch.iter(|| filtered_product_fidelity((&a1, &b1), (&a2, &b2), FilterThreshold::new(k)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, loss_kernels, fidelity_kernels, filter_kernels);
criterion_main!(benches);
