//! Data-parallel kernels against serial baselines.
//!
//! The "library" benchmarks exercise the shipped path, which maps grid
//! points on rayon under the default `parallel` feature; the "serial"
//! benchmarks fold the same grids with plain iterators through the public
//! per-point operations. Running `cargo bench --no-default-features`
//! additionally sequentializes the library path for a feature-level
//! comparison via criterion baselines.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use sdstab::assumptions::TailCertificate;
use sdstab::stability::{power_bound_integral, PowerBoundProbe};
use sdstab::synthesis::{build_example_system, ExampleSystemSpec};
use sdstab::transfer::{scan_epsilon_d, ScanGrid, RADIAL_SAMPLES};
use sdstab::{CoeffVector, DeltaOperator, RieszSystem};

fn example_system(truncation: usize) -> RieszSystem {
    let spec = ExampleSystemSpec {
        unstable_eigs: vec![Complex64::new(1.0, 0.0)],
        targets: vec![Complex64::new(-1.0, 0.0)],
        tail_coefficient: Some(1.0),
        truncation,
        b_entries: (0..50.min(truncation))
            .map(|i| {
                let mode = (i + 1) as f64;
                (i, Complex64::new(1.0 / (mode * mode), 0.0))
            })
            .collect(),
        f2_entries: Vec::new(),
        kappa: 1.0,
        alpha: 0.5,
        delta: std::f64::consts::FRAC_PI_4,
        riesz_ma: 1.0,
        riesz_mb: 1.0,
        a6_margin: 1e-6,
    };
    build_example_system(&spec).unwrap().system
}

/// Serial replica of the discrete lower-bound scan over the same circles.
fn serial_scan_epsilon_d(sys: &RieszSystem, tau: f64, grid: &ScanGrid) -> f64 {
    let op = DeltaOperator::new(sys, tau).unwrap();
    let mut min = f64::INFINITY;
    for &r in RADIAL_SAMPLES.iter() {
        for k in 0..grid.n_theta {
            let theta =
                -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / grid.n_theta as f64;
            if r == 1.0 && theta.abs() < grid.exclusion_arc {
                continue;
            }
            let z = Complex64::from_polar(r, theta);
            if let Ok(g) = op.transfer(z) {
                min = min.min((Complex64::ONE - g).norm());
            }
        }
    }
    min.min((Complex64::ONE + sys.feedthrough()).norm())
}

/// Serial replica of one power-bound quadrature circle.
fn serial_power_bound(op: &DeltaOperator<'_>, r: f64, n_theta: usize, x: &CoeffVector) -> f64 {
    let mut acc = 0.0;
    for j in 0..n_theta {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
        let z = Complex64::from_polar(r, theta);
        acc += op.resolvent(z, x).unwrap().norm_sqr();
    }
    (r - 1.0) * acc * 2.0 * std::f64::consts::PI / n_theta as f64
}

fn bench_scan(c: &mut Criterion) {
    let sys = example_system(200);
    let cert = TailCertificate::for_system(&sys, 256).unwrap();
    let grid = ScanGrid {
        n_omega: 512,
        n_theta: 2048,
        ..ScanGrid::default()
    };
    let tau = 0.1;
    let mut group = c.benchmark_group("scan_epsilon_d");
    group.sample_size(20);
    group.bench_with_input(BenchmarkId::new("library", 2048), &grid, |b, grid| {
        b.iter(|| scan_epsilon_d(&sys, tau, grid, &cert).unwrap().epsilon)
    });
    group.bench_with_input(BenchmarkId::new("serial", 2048), &grid, |b, grid| {
        b.iter(|| serial_scan_epsilon_d(&sys, tau, grid))
    });
    group.finish();
}

fn bench_power_bound(c: &mut Criterion) {
    let sys = example_system(200);
    let op = DeltaOperator::new(&sys, 0.1).unwrap();
    let x = CoeffVector::basis(sys.truncation(), 0);
    let probe = PowerBoundProbe {
        r_values: vec![1.01],
        n_theta: 4096,
        test_vectors: Vec::new(),
    };
    let mut group = c.benchmark_group("power_bound");
    group.sample_size(20);
    group.bench_function(BenchmarkId::new("library", 4096), |b| {
        b.iter(|| {
            power_bound_integral(&op, &probe, &x, false).unwrap()[0]
                .value
                .unwrap()
        })
    });
    group.bench_function(BenchmarkId::new("serial", 4096), |b| {
        b.iter(|| serial_power_bound(&op, 1.01, 4096, &x))
    });
    group.finish();
}

criterion_group!(benches, bench_scan, bench_power_bound);
criterion_main!(benches);
