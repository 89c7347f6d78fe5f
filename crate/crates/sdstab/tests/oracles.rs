//! Dense-reference checks: every coefficient-wise operator is compared
//! against an independent dense linear-algebra path on small truncations.

mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdstab::assumptions::{check_a4_example, TailCertificate};
use sdstab::stability::unit_circle_test;
use sdstab::synthesis::{build_example_system, ExampleSystemSpec};
use sdstab::transfer::{scan_epsilon_c, transfer_continuous, transfer_discrete, ScanGrid};
use sdstab::{CoeffVector, DeltaOperator, RieszSystem, SpectrumSpec};

fn example44_system(truncation: usize, support: usize) -> RieszSystem {
    let spec = ExampleSystemSpec {
        unstable_eigs: vec![c(1.0, 0.0)],
        targets: vec![c(-1.0, 0.0)],
        tail_coefficient: Some(1.0),
        truncation,
        b_entries: (0..support)
            .map(|i| {
                let mode = (i + 1) as f64;
                (i, c(1.0 / (mode * mode), 0.0))
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

#[test]
fn delta_application_matches_dense_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let sys = random_mixed_system(&mut rng, 8, 8);
        let tau = rng.random_range(0.1..0.8);
        let op = DeltaOperator::new(&sys, tau).unwrap();
        let x = random_vector(&mut rng, 8);
        let dense = dense_delta(&sys, tau);
        let want = &dense * DVector::from_iterator(8, x.as_slice().iter().copied());
        let got = op.apply(&x).unwrap();
        let err: f64 = got
            .as_slice()
            .iter()
            .zip(want.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-12 * want.norm().max(1.0));
    }
}

#[test]
fn delta_power_matches_dense_matrix_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sys = random_mixed_system(&mut rng, 8, 8);
    let tau = 0.4;
    let op = DeltaOperator::new(&sys, tau).unwrap();
    let x = random_vector(&mut rng, 8);
    let dense = dense_delta(&sys, tau);
    let mut m = DMatrix::identity(8, 8);
    for _ in 0..5 {
        m = &dense * m;
    }
    let want = &m * DVector::from_iterator(8, x.as_slice().iter().copied());
    let got = op.apply_power(5, &x).unwrap();
    let err: f64 = got
        .as_slice()
        .iter()
        .zip(want.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(err <= 1e-11 * want.norm().max(1.0));
}

#[test]
fn semigroup_resolvent_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 16;
    let sys = random_mixed_system(&mut rng, n, n);
    let op = DeltaOperator::new(&sys, 0.35).unwrap();
    for _ in 0..25 {
        let z = Complex64::from_polar(
            rng.random_range(1.8..3.0),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let x = random_vector(&mut rng, n);
        let r = op.resolvent_semigroup(z, &x).unwrap();
        // (zI - T(tau)) r = x exactly in coefficients
        let back = CoeffVector::new(
            r.as_slice()
                .iter()
                .enumerate()
                .map(|(i, v)| v * (z - (sys.eigenvalue(i) * 0.35).exp()))
                .collect(),
        );
        assert!(relative_error(&back, &x) <= 1e-13);
    }
}

#[test]
fn closed_loop_resolvent_round_trip_and_pairing() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..25 {
        let n = 12;
        let sys = random_mixed_system(&mut rng, n, n);
        let tau = rng.random_range(0.1..0.6);
        let op = DeltaOperator::new(&sys, tau).unwrap();
        let z = Complex64::from_polar(
            rng.random_range(2.0..4.0),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let x = random_vector(&mut rng, n);
        let y = random_vector(&mut rng, n);
        let r = op.resolvent(z, &x).unwrap();
        let back = r.scale(z).sub(&op.apply(&r).unwrap());
        assert!(relative_error(&back, &x) <= 1e-9);
        // adjoint pairing through the dense path as well
        let lhs = r.inner(&y);
        let rhs = x.inner(&op.resolvent_adjoint(z, &y).unwrap());
        assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm().max(1.0));
    }
}

#[test]
fn adjoint_resolvent_matches_dense_conjugate_transpose_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let n = 16;
    let sys = random_mixed_system(&mut rng, n, n);
    let tau = 0.3;
    let op = DeltaOperator::new(&sys, tau).unwrap();
    for _ in 0..10 {
        let z = Complex64::from_polar(
            rng.random_range(2.0..3.5),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let y = random_vector(&mut rng, n);
        let fast = op.resolvent_adjoint(z, &y).unwrap();
        let dense = dense_adjoint_resolvent_solve(&sys, tau, z, &y);
        assert!(relative_error(&fast, &dense) <= 1e-10);
    }
}

#[test]
fn transfer_functions_match_dense_solves() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let n = 16;
    let sys = random_mixed_system(&mut rng, n, n);
    let tau = 0.25;
    for _ in 0..20 {
        let lambda = c(rng.random_range(0.1..3.0), rng.random_range(-3.0..3.0));
        // dense: f^T (lambda I - Lambda)^{-1} b
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                lambda - sys.eigenvalue(i)
            } else {
                Complex64::ZERO
            }
        });
        let b = DVector::from_iterator(n, sys.b().iter().copied());
        let sol = a.lu().solve(&b).unwrap();
        let want: Complex64 = sol.iter().zip(sys.f()).map(|(s, f)| s * f).sum();
        let got = transfer_continuous(&sys, lambda).unwrap();
        assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0));

        let z = Complex64::from_polar(
            rng.random_range(1.7..3.0),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let hold = sys.apply_hold(tau).unwrap();
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                z - (sys.eigenvalue(i) * tau).exp()
            } else {
                Complex64::ZERO
            }
        });
        let s = DVector::from_iterator(n, hold.as_slice().iter().copied());
        let sol = a.lu().solve(&s).unwrap();
        let want: Complex64 = sol.iter().zip(sys.f()).map(|(s, f)| s * f).sum();
        let got = transfer_discrete(&sys, tau, z).unwrap();
        assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0));
    }
}

#[test]
fn hold_matches_quadrature_of_the_input_integral() {
    // S(t) = integral of T(s) B ds: composite Simpson on e^{s lambda}
    let spec = SpectrumSpec::new(vec![c(-1.0, 0.7)], None, 1).unwrap();
    let sys = RieszSystem::new(
        spec,
        vec![c(0.8, -0.3)],
        vec![Complex64::ZERO],
        1.0,
        1.0,
        0.5,
        1.0,
    )
    .unwrap();
    let t = 2.0f64.ln();
    let lambda = sys.eigenvalue(0);
    let m = 2000;
    let h = t / m as f64;
    let mut acc = Complex64::ZERO;
    for k in 0..=m {
        let w = if k == 0 || k == m {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += (lambda * (k as f64 * h)).exp() * w;
    }
    let integral = acc * h / 3.0 * sys.b()[0];
    let hold = sys.apply_hold(t).unwrap();
    assert!((hold.as_slice()[0] - integral).norm() <= 1e-10);
}

#[test]
fn unit_circle_verdict_confirmed_by_dense_eigenvalues() {
    // closed-loop example on a dense-checkable truncation: the verdict holds
    // and the one-step matrix has spectral radius below 1, the eigenvalues
    // clustering toward 1 from below
    let sys = example44_system(64, 40);
    let cert = TailCertificate::for_system(&sys, 256).unwrap();
    let grid = ScanGrid {
        n_omega: 256,
        n_theta: 1024,
        ..ScanGrid::default()
    };
    let tau = 0.1;
    let verdict = unit_circle_test(&sys, tau, &grid, &cert).unwrap();
    assert!(verdict.ok, "{:?}", verdict.failure);

    let eigs = dense_eigenvalues(&dense_delta(&sys, tau));
    let rho = eigs.iter().map(|e| e.norm()).fold(0.0, f64::max);
    assert!(rho < 1.0, "spectral radius {rho} must stay below 1");
    // the deepest tail modes approach 1: the gap is the slowest decay rate
    assert!(rho > (-(tau) / 64.0).exp() - 1e-6);
}

#[test]
fn a4_estimate_matches_dense_svd_and_decays_like_one_over_omega() {
    let sys = example44_system(200, 50);
    let scan = check_a4_example(&sys, &[-10.0, 10.0]).unwrap();
    assert!(scan.ok);
    // dense oracle on the truncated closed loop at omega = +/- 10
    let n = sys.truncation();
    for (omega, estimate) in &scan.values {
        let a = DMatrix::from_fn(n, n, |i, j| {
            let zi = if i == j {
                c(0.0, *omega) - sys.eigenvalue(i)
            } else {
                Complex64::ZERO
            };
            zi - sys.b()[i] * sys.f()[j]
        });
        let inv = a.lu().try_inverse().unwrap();
        let want = dense_sigma_max(&inv);
        assert!(
            (estimate - want).abs() <= 1e-6,
            "omega = {omega}: estimate {estimate} vs dense {want}"
        );
    }

    // asymptote: estimates decay like 1/|omega| within a factor of 2
    let far: Vec<f64> = (0..10).map(|k| 100.0 * 1.5f64.powi(k)).collect();
    let scan = check_a4_example(&sys, &far).unwrap();
    for (omega, estimate) in &scan.values {
        let reference = 1.0 / omega.abs();
        assert!(*estimate >= reference / 2.0 && *estimate <= reference * 2.0);
    }
}

#[test]
fn reported_epsilon_is_monotone_in_certified_slack() {
    let sys = example44_system(48, 30);
    let grid = ScanGrid {
        n_omega: 128,
        n_theta: 256,
        ..ScanGrid::default()
    };
    let base = TailCertificate::for_system(&sys, 256).unwrap();
    let mut prev = f64::INFINITY;
    for inflation in [0.0, 0.05, 0.1, 0.2] {
        let mut cert = base.clone();
        cert.cont_tail_bound = inflation;
        let eps = scan_epsilon_c(&sys, &grid, &cert).unwrap().epsilon;
        assert!(eps <= prev + 1e-15);
        prev = eps;
    }
}
