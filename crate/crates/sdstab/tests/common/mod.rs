//! Shared oracles for the integration and acceptance suites: seeded system
//! generation and dense linear-algebra reference paths that are independent
//! of the coefficient-wise implementations they check.

// each test binary uses its own subset of these helpers
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sdstab::{CoeffVector, RieszSystem, SpectrumSpec, TailLaw};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A mixed head/tail system with off-axis head eigenvalues, reciprocal tail,
/// and random finite-support input/feedback coefficients.
pub fn random_mixed_system(rng: &mut ChaCha8Rng, n: usize, support: usize) -> RieszSystem {
    let head_count = rng.random_range(1..=3usize);
    let mut head = Vec::with_capacity(head_count);
    for _ in 0..head_count {
        // nonzero imaginary part keeps the head distinct from the real tail
        let re_sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let im_sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        head.push(c(
            re_sign * rng.random_range(0.2..1.0),
            im_sign * rng.random_range(0.1..1.0),
        ));
    }
    let spectrum = SpectrumSpec::new(
        head,
        Some(TailLaw::Reciprocal { coefficient: 1.0 }),
        n,
    )
    .expect("random head avoids collisions");
    let mut b = vec![Complex64::ZERO; n];
    let mut f = vec![Complex64::ZERO; n];
    for (i, entry) in b.iter_mut().enumerate().take(support.min(n)) {
        *entry = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            * (1.0 / (i + 1) as f64);
    }
    for entry in f.iter_mut().take(support.min(n)) {
        *entry = c(
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
        );
    }
    RieszSystem::new(spectrum, b, f, 1.0, 1.0, 0.5, std::f64::consts::FRAC_PI_4).unwrap()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CoeffVector {
    CoeffVector::new(
        (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
}

/// Dense one-step matrix `diag(e^{tau lambda}) + s f^T`.
pub fn dense_delta(sys: &RieszSystem, tau: f64) -> DMatrix<Complex64> {
    let n = sys.truncation();
    let s = sys.apply_hold(tau).unwrap();
    DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j {
            (sys.eigenvalue(i) * tau).exp()
        } else {
            Complex64::ZERO
        };
        d + s.as_slice()[i] * sys.f()[j]
    })
}

/// Reference resolvent: dense LU solve of `(zI - Delta) u = x`.
pub fn dense_resolvent_solve(
    sys: &RieszSystem,
    tau: f64,
    z: Complex64,
    x: &CoeffVector,
) -> CoeffVector {
    let n = sys.truncation();
    let delta = dense_delta(sys, tau);
    let a = DMatrix::from_fn(n, n, |i, j| {
        let zi = if i == j { z } else { Complex64::ZERO };
        zi - delta[(i, j)]
    });
    let rhs = DVector::from_iterator(n, x.as_slice().iter().copied());
    let sol = a.lu().solve(&rhs).expect("dense resolvent solvable");
    CoeffVector::new(sol.iter().copied().collect())
}

/// Reference adjoint resolvent: dense LU solve of
/// `(conj(z) I - Delta^H) u = y`.
pub fn dense_adjoint_resolvent_solve(
    sys: &RieszSystem,
    tau: f64,
    z: Complex64,
    y: &CoeffVector,
) -> CoeffVector {
    let n = sys.truncation();
    let delta = dense_delta(sys, tau).adjoint();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let zi = if i == j { z.conj() } else { Complex64::ZERO };
        zi - delta[(i, j)]
    });
    let rhs = DVector::from_iterator(n, y.as_slice().iter().copied());
    let sol = a.lu().solve(&rhs).expect("dense adjoint resolvent solvable");
    CoeffVector::new(sol.iter().copied().collect())
}

/// Eigenvalues of a dense complex matrix (Schur oracle).
pub fn dense_eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    m.clone()
        .schur()
        .eigenvalues()
        .expect("complex Schur is triangular")
        .iter()
        .copied()
        .collect()
}

/// Largest singular value of a dense complex matrix (SVD oracle).
pub fn dense_sigma_max(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn relative_error(got: &CoeffVector, want: &CoeffVector) -> f64 {
    let denom = want.norm().max(1e-300);
    got.sub(want).norm() / denom
}
