use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qnt_core::mainloop::{self, PhaseOracle};
use qnt_core::primality::{run_primality, zero_probability};
use qnt_core::{
    Direction, EffectiveDim, PhasePredicate, PrimalityConfig, QState, RegisterLayout, STilde,
};

fn dft(c: &mut Criterion) {
    let mut g = c.benchmark_group("dft");
    for d in [16usize, 64, 256] {
        let layout = RegisterLayout::new([("x", d), ("y", 4096 / d)]).unwrap();
        let x = layout.id("x").unwrap();
        let mut s = QState::init_zero(layout);
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            b.iter(|| s.apply_dft(x, d, Direction::Forward).unwrap())
        });
    }
    g.finish();
}

fn grover_power(c: &mut Criterion) {
    let layout = RegisterLayout::new([("m", 16), ("a", 256)]).unwrap();
    let (m, a) = (layout.id("m").unwrap(), layout.id("a").unwrap());
    let marked: Vec<bool> = (0..256).map(|x| x % 3 == 0).collect();
    let pred = PhasePredicate::on_register(a, marked);
    let mut s = QState::init_zero(layout);
    s.apply_dft(m, 16, Direction::Forward).unwrap();
    s.apply_dft(a, 256, Direction::Forward).unwrap();
    c.bench_function("controlled_grover_16x256", |b| {
        b.iter(|| {
            s.apply_controlled_grover_power(&[m], a, &EffectiveDim::Full, &pred)
                .unwrap()
        })
    });
}

fn s_tilde(c: &mut Criterion) {
    let mut g = c.benchmark_group("s_tilde");
    for (n, p) in [(16usize, 8usize), (32, 16)] {
        let oracle = STilde::strong(n, p).unwrap();
        let mut s = mainloop::flat_input(oracle.layout()).unwrap();
        g.bench_function(format!("N{n}_P{p}"), |b| {
            b.iter(|| oracle.apply(&mut s).unwrap())
        });
    }
    g.finish();
}

fn primality(c: &mut Criterion) {
    c.bench_function("primality_k33_P16_R2", |b| {
        b.iter(|| run_primality(black_box(&PrimalityConfig::new(33, 16, 2, 1))).unwrap())
    });
    c.bench_function("zero_probability_k35_P16_R1", |b| {
        b.iter(|| zero_probability(black_box(35), 16, 1).unwrap())
    });
}

criterion_group!(benches, dft, grover_power, s_tilde, primality);
criterion_main!(benches);
