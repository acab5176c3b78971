use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use pimdb_bench::{random_column, scalar_scan};
use pimdb_core::kernel::{compile_predicate, filter_column, unpack_column, PredOp};

const ROWS: usize = 1 << 20;

fn packed(c: &mut Criterion) {
    let mut g = c.benchmark_group("filter_kernel");
    g.throughput(Throughput::Elements(ROWS as u64));
    for width in [2u32, 4, 8, 16, 32] {
        let col = random_column(ROWS, width, width as u64);
        let threshold = 1u64 << (width - 1);
        let cmp = compile_predicate(PredOp::Lt(threshold), width).unwrap();
        g.bench_with_input(BenchmarkId::new("packed_lt", width), &col, |b, col| {
            b.iter(|| filter_column(black_box(col), &cmp, None).unwrap())
        });
        let values = unpack_column(&col);
        g.bench_with_input(BenchmarkId::new("scalar_lt", width), &values, |b, v| {
            b.iter(|| scalar_scan(black_box(v), threshold))
        });
    }
    g.finish();
}

criterion_group!(benches, packed);
criterion_main!(benches);
