use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smpd_core::constants::khz;
use smpd_core::fit::{fit_4wm_map, fit_exponential_decay, fit_lorentzian};
use smpd_core::search::linspace;
use smpd_core::sim::{run_cycles, SimulationConfig};
use smpd_core::tuning::FourWaveMixingSurface;
use smpd_core::{synth, DeviceParams};

fn simulation(c: &mut Criterion) {
    let cfg = SimulationConfig::default().with_duration(0.1).with_seed(1);
    c.bench_function("run_cycles 0.1 s", |b| b.iter(|| run_cycles(black_box(&cfg)).unwrap()));
}

fn grid(surface: &FourWaveMixingSurface, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (kw, kb) = (surface.kappa_w, surface.kappa_b);
    let op = linspace(surface.omega_4wm - 3.0 * kw, surface.omega_4wm + 3.0 * kw, n);
    let om = linspace(surface.omega_b - 3.0 * kb, surface.omega_b + 3.0 * kb, n);
    (op, om)
}

fn fwm(c: &mut Criterion) {
    let surface = FourWaveMixingSurface::from_device(&DeviceParams::default(), 1.0);
    let (op, om) = grid(&surface, 101);
    c.bench_function("fwm response 101x101", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for &p in &op {
                for &w in &om {
                    acc += surface.response(p, w);
                }
            }
            black_box(acc)
        })
    });

    let (op, om) = grid(&surface, 25);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let map = synth::fwm_map(&mut rng, &surface, op, om, 0.9, 0.05, 0.02);
    c.bench_function("fit_4wm_map 25x25", |b| b.iter(|| fit_4wm_map(black_box(&map)).unwrap()));
}

fn fits(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs = linspace(-khz(1000.0), khz(1000.0), 41);
    let line = synth::lorentzian_samples(&mut rng, &xs, 0.0, khz(300.0), 0.8, 0.01, 0.005);
    c.bench_function("fit_lorentzian 41 points", |b| b.iter(|| fit_lorentzian(black_box(&line)).unwrap()));

    let hist = synth::decay_histogram(&mut rng, 100, 50e-6, 800.0, 400.0, 5.0);
    c.bench_function("fit_exponential_decay 100 bins", |b| {
        b.iter(|| fit_exponential_decay(black_box(&hist)).unwrap())
    });
}

criterion_group!(benches, simulation, fwm, fits);
criterion_main!(benches);
