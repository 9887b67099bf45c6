//! Benchmarks shared by `benches/pipeline.rs`.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, Throughput};
use fronthaul::channel::randsvd_channel;
use fronthaul::codec::{decode, encode, lloyd_max_codebook, MantissaProfile};
use fronthaul::linalg::{mmse_weights, svd};
use fronthaul::signal::{random_symbols, transmit, Modulation, ResourceGrid};

/// Received antenna grid for 64 antennas, 4 users and 16 resource blocks.
fn received_grid() -> ResourceGrid {
    let ch = randsvd_channel(64, 4, 100.0, 16, 1).expect("valid channel");
    let x = random_symbols(16 * 12, 4, Modulation::Qam256, 2);
    transmit(&x, &ch, 12, 20.0, 3).expect("transmits").grid
}

pub fn codec(c: &mut Criterion) {
    let grid = received_grid();
    let mut group = c.benchmark_group("codec");
    group.throughput(Throughput::Elements((grid.n_sc() * grid.n_streams()) as u64));
    for bits in [4u8, 6, 8] {
        let profile = MantissaProfile::uniform(grid.n_streams(), bits).expect("valid width");
        let frame = encode(&grid, &profile, 4, 12).expect("encodes");
        group.bench_with_input(BenchmarkId::new("encode", bits), &profile, |b, p| {
            b.iter(|| encode(black_box(&grid), p, 4, 12).expect("encodes"))
        });
        group.bench_with_input(BenchmarkId::new("decode", bits), &frame, |b, f| {
            b.iter(|| decode(black_box(f)).expect("decodes"))
        });
    }
    group.finish();
}

pub fn linalg(c: &mut Criterion) {
    let mut group = c.benchmark_group("linalg");
    for (m, n) in [(16usize, 4usize), (64, 4), (64, 16)] {
        let h = randsvd_channel(m, n, 30.0, 1, 5).expect("valid channel").rb(0).clone();
        group.bench_with_input(BenchmarkId::new("mmse", format!("{m}x{n}")), &h, |b, h| {
            b.iter(|| mmse_weights(black_box(h), 0.01).expect("solves"))
        });
        group.bench_with_input(BenchmarkId::new("svd", format!("{m}x{n}")), &h, |b, h| {
            b.iter(|| svd(black_box(h)).expect("converges"))
        });
    }
    group.finish();
}

pub fn lloyd(c: &mut Criterion) {
    let mut group = c.benchmark_group("lloyd_max");
    group.sample_size(10);
    for bits in [2u32, 6, 10] {
        group.bench_with_input(BenchmarkId::from_parameter(bits), &bits, |b, &bits| {
            b.iter(|| lloyd_max_codebook(black_box(bits)))
        });
    }
    group.finish();
}

pub fn benchmarks(c: &mut Criterion) {
    codec(c);
    linalg(c);
    lloyd(c);
}
