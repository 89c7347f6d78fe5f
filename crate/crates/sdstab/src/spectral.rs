//! Truncated spectral representation of the plant and exact coefficient-wise
//! application of the semigroup, hold, feedback, and one-step closed-loop
//! operators, together with their resolvents.
//!
//! Everything acts on expansion coefficients `a_n` in the eigenvector basis.
//! The orthonormal realization (`M_a = M_b = 1`) is the concrete default;
//! the Riesz constants enter only through norm bounds, never through operator
//! action.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute separation tolerance for resolvent evaluations: a point closer
/// than this to the (truncated or cluster) spectrum is rejected as singular
/// rather than ill-conditioned.
pub const SEPARATION_TOL: f64 = 1e-12;

/// Tolerance on the scalar denominator `1 - F R(z,T)S` in the rank-one
/// resolvent update; values below signal z near the closed-loop spectrum.
pub const SMW_DENOM_TOL: f64 = 1e-12;

/// Below this magnitude `(e^z - 1)/z` switches to its Taylor series; the
/// closed form loses all accuracy to cancellation as z -> 0, which is exactly
/// the eigenvalue-cluster regime these systems live in.
pub const PHI_TAYLOR_CUTOFF: f64 = 1e-4;

/// `e^z - 1` without cancellation for small `z`.
pub fn expm1c(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let half = (y * 0.5).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * half * half, x.exp() * y.sin())
}

/// `(e^z - 1)/z`, extended by 1 at z = 0. Six Taylor terms below the cutoff.
pub fn phi(z: Complex64) -> Complex64 {
    if z.norm() < PHI_TAYLOR_CUTOFF {
        // 1 + z/2 + z^2/6 + z^3/24 + z^4/120 + z^5/720
        let mut acc = Complex64::new(1.0 / 720.0, 0.0);
        for c in [1.0 / 120.0, 1.0 / 24.0, 1.0 / 6.0, 0.5, 1.0] {
            acc = acc * z + c;
        }
        acc
    } else {
        expm1c(z) / z
    }
}

/// Parametric law for the eigenvalue tail beyond the explicit head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailLaw {
    /// `lambda_n = -c/n` for mode numbers `n` past the head; `c > 0`.
    Reciprocal { coefficient: f64 },
}

/// Eigenvalue sequence: explicit head plus an optional parametric tail,
/// materialized to `truncation` modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    head: Vec<Complex64>,
    tail_law: Option<TailLaw>,
    truncation: usize,
}

impl SpectrumSpec {
    /// Validates distinctness and materializability. Head order is kept;
    /// tail modes are appended by index. Without a tail law the truncation
    /// must equal the head length (there is nothing to materialize beyond).
    pub fn new(
        head: Vec<Complex64>,
        tail_law: Option<TailLaw>,
        truncation: usize,
    ) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::InvalidParameter("truncation must be >= 1".into()));
        }
        if truncation < head.len() {
            return Err(Error::InvalidParameter(format!(
                "truncation {} is smaller than the head length {}",
                truncation,
                head.len()
            )));
        }
        match tail_law {
            None if truncation != head.len() => {
                return Err(Error::InvalidParameter(
                    "truncation beyond the head requires a tail law".into(),
                ))
            }
            Some(TailLaw::Reciprocal { coefficient }) if coefficient <= 0.0 => {
                return Err(Error::InvalidParameter(
                    "reciprocal tail coefficient must be positive".into(),
                ))
            }
            _ => {}
        }
        let spec = Self {
            head,
            tail_law,
            truncation,
        };
        let eigs = spec.eigenvalues();
        for (i, e) in eigs.iter().enumerate() {
            // the hold and feedthrough formulas divide by lambda_n
            if *e == Complex64::ZERO {
                return Err(Error::InvalidParameter(format!(
                    "eigenvalue at slot {i} is zero"
                )));
            }
        }
        for i in 0..eigs.len() {
            for j in (i + 1)..eigs.len() {
                if eigs[i] == eigs[j] {
                    return Err(Error::DuplicateEigenvalue { first: i, second: j });
                }
            }
        }
        Ok(spec)
    }

    /// Eigenvalue at 0-based slot `i` (mode number `i + 1`).
    pub fn eigenvalue(&self, i: usize) -> Complex64 {
        if i < self.head.len() {
            self.head[i]
        } else {
            match self.tail_law {
                Some(TailLaw::Reciprocal { coefficient }) => {
                    Complex64::new(-coefficient / (i + 1) as f64, 0.0)
                }
                None => unreachable!("slots beyond the head require a tail law"),
            }
        }
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.truncation).map(|i| self.eigenvalue(i)).collect()
    }

    pub fn head(&self) -> &[Complex64] {
        &self.head
    }

    pub fn head_len(&self) -> usize {
        self.head.len()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn tail_law(&self) -> Option<TailLaw> {
        self.tail_law
    }

    pub fn has_tail(&self) -> bool {
        self.tail_law.is_some()
    }
}

/// State in biorthogonal coordinates: entry `n` is `<x, psi_n>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffVector(Vec<Complex64>);

impl CoeffVector {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self(coeffs)
    }

    pub fn zero(len: usize) -> Self {
        Self(vec![Complex64::ZERO; len])
    }

    /// Unit basis vector e_i.
    pub fn basis(len: usize, i: usize) -> Self {
        let mut v = vec![Complex64::ZERO; len];
        v[i] = Complex64::ONE;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    /// l2 norm of the coefficients (the Hilbert norm in the orthonormal
    /// realization).
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Standard sesquilinear inner product `sum a_n conj(b_n)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl From<Vec<Complex64>> for CoeffVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// The plant data: spectrum, input coefficients `b_n = <b, psi_n>`, feedback
/// coefficients `f_n = <phi_n, f>`, Riesz constants, and sector parameters.
///
/// `b` has finite support by construction: `support_b` is the number of
/// leading slots that may be nonzero, which makes every b-tail sum exactly
/// computable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszSystem {
    spectrum: SpectrumSpec,
    b: Vec<Complex64>,
    f: Vec<Complex64>,
    riesz_ma: f64,
    riesz_mb: f64,
    alpha: f64,
    delta: f64,
    support_b: usize,
}

impl RieszSystem {
    pub fn new(
        spectrum: SpectrumSpec,
        b: Vec<Complex64>,
        f: Vec<Complex64>,
        riesz_ma: f64,
        riesz_mb: f64,
        alpha: f64,
        delta: f64,
    ) -> Result<Self> {
        let n = spectrum.truncation();
        if b.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: b.len(),
            });
        }
        if f.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: f.len(),
            });
        }
        if !(riesz_ma > 0.0 && riesz_mb > 0.0 && riesz_ma <= riesz_mb) {
            return Err(Error::InvalidParameter(format!(
                "Riesz constants must satisfy 0 < M_a <= M_b, got ({riesz_ma}, {riesz_mb})"
            )));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sector offset alpha must be positive, got {alpha}"
            )));
        }
        if !(delta > 0.0 && delta <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "sector opening delta must lie in (0, pi/2], got {delta}"
            )));
        }
        let support_b = b
            .iter()
            .rposition(|c| *c != Complex64::ZERO)
            .map_or(0, |i| i + 1);
        Ok(Self {
            spectrum,
            b,
            f,
            riesz_ma,
            riesz_mb,
            alpha,
            delta,
            support_b,
        })
    }

    pub fn spectrum(&self) -> &SpectrumSpec {
        &self.spectrum
    }

    pub fn truncation(&self) -> usize {
        self.spectrum.truncation()
    }

    pub fn eigenvalue(&self, i: usize) -> Complex64 {
        self.spectrum.eigenvalue(i)
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn f(&self) -> &[Complex64] {
        &self.f
    }

    /// Number of leading slots on which `b` may be nonzero.
    pub fn support_b(&self) -> usize {
        self.support_b
    }

    pub fn riesz_ma(&self) -> f64 {
        self.riesz_ma
    }

    pub fn riesz_mb(&self) -> f64 {
        self.riesz_mb
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn check_len(&self, x: &CoeffVector) -> Result<()> {
        if x.len() != self.truncation() {
            return Err(Error::LengthMismatch {
                expected: self.truncation(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Two-sided bracket `M_a sum |a_n|^2 <= ||x||^2 <= M_b sum |a_n|^2` for
    /// the induced Hilbert norm.
    pub fn norm_sq_bounds(&self, x: &CoeffVector) -> Result<(f64, f64)> {
        self.check_len(x)?;
        let s = x.norm_sqr();
        Ok((self.riesz_ma * s, self.riesz_mb * s))
    }

    /// `T(t)x`: entry n is `e^{t lambda_n} a_n`.
    pub fn apply_semigroup(&self, t: f64, x: &CoeffVector) -> Result<CoeffVector> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        self.check_len(x)?;
        Ok(CoeffVector::new(
            x.as_slice()
                .iter()
                .enumerate()
                .map(|(i, a)| (self.eigenvalue(i) * t).exp() * a)
                .collect(),
        ))
    }

    /// The hold vector `S(t) 1` in coefficients: entry n is
    /// `(e^{t lambda_n} - 1)/lambda_n * b_n = t phi(t lambda_n) b_n`.
    pub fn apply_hold(&self, t: f64) -> Result<CoeffVector> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        Ok(CoeffVector::new(
            (0..self.truncation())
                .map(|i| {
                    if self.b[i] == Complex64::ZERO {
                        Complex64::ZERO
                    } else {
                        phi(self.eigenvalue(i) * t) * t * self.b[i]
                    }
                })
                .collect(),
        ))
    }

    /// `Fx = sum a_n f_n` (the stored `f_n` already absorb the conjugation
    /// from the inner product with f).
    pub fn apply_feedback(&self, x: &CoeffVector) -> Result<Complex64> {
        self.check_len(x)?;
        Ok(x.as_slice()
            .iter()
            .zip(&self.f)
            .map(|(a, f)| a * f)
            .sum())
    }

    /// `F A^{-1} B = sum b_n f_n / lambda_n` over the finite support of b.
    pub fn feedthrough(&self) -> Complex64 {
        (0..self.support_b)
            .map(|i| self.b[i] * self.f[i] / self.eigenvalue(i))
            .sum()
    }
}

/// One-step transition operator of the sampled-data loop,
/// `Delta(tau) = T(tau) + S(tau) F`, with its spectral data precomputed.
#[derive(Debug, Clone)]
pub struct DeltaOperator<'a> {
    system: &'a RieszSystem,
    tau: f64,
    pole_images: Vec<Complex64>,
    hold: CoeffVector,
}

impl<'a> DeltaOperator<'a> {
    pub fn new(system: &'a RieszSystem, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sampling period must be positive and finite, got {tau}"
            )));
        }
        let pole_images = (0..system.truncation())
            .map(|i| (system.eigenvalue(i) * tau).exp())
            .collect();
        let hold = system.apply_hold(tau)?;
        Ok(Self {
            system,
            tau,
            pole_images,
            hold,
        })
    }

    pub fn system(&self) -> &RieszSystem {
        self.system
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `e^{tau lambda_n}` for each materialized mode.
    pub fn pole_images(&self) -> &[Complex64] {
        &self.pole_images
    }

    /// The hold vector `S(tau) 1`.
    pub fn hold(&self) -> &CoeffVector {
        &self.hold
    }

    /// `Delta(tau) x = T(tau)x + S(tau) (Fx)`.
    pub fn apply(&self, x: &CoeffVector) -> Result<CoeffVector> {
        self.system.check_len(x)?;
        let fx = self.system.apply_feedback(x)?;
        Ok(CoeffVector::new(
            x.as_slice()
                .iter()
                .enumerate()
                .map(|(i, a)| self.pole_images[i] * a + self.hold.as_slice()[i] * fx)
                .collect(),
        ))
    }

    /// k-fold application; k = 0 returns x unchanged.
    pub fn apply_power(&self, k: usize, x: &CoeffVector) -> Result<CoeffVector> {
        self.system.check_len(x)?;
        let mut state = x.clone();
        for _ in 0..k {
            state = self.apply(&state)?;
        }
        Ok(state)
    }

    /// Minimum distance from z to the truncated spectrum of `T(tau)`,
    /// including the tail cluster point 1 when a tail law is present.
    fn spectral_separation(&self, z: Complex64) -> (f64, Option<usize>) {
        let mut best = f64::INFINITY;
        let mut arg = None;
        for (i, p) in self.pole_images.iter().enumerate() {
            let d = (z - p).norm();
            if d < best {
                best = d;
                arg = Some(i);
            }
        }
        if self.system.spectrum().has_tail() {
            let d = (z - Complex64::ONE).norm();
            if d < best {
                best = d;
                arg = None;
            }
        }
        (best, arg)
    }

    fn require_separation(&self, z: Complex64) -> Result<()> {
        let (distance, index) = self.spectral_separation(z);
        if distance <= SEPARATION_TOL {
            return Err(Error::SpectrumTooClose { z, distance, index });
        }
        Ok(())
    }

    /// `R(z, T(tau)) x`: entry n is `a_n / (z - e^{tau lambda_n})`.
    pub fn resolvent_semigroup(&self, z: Complex64, x: &CoeffVector) -> Result<CoeffVector> {
        self.system.check_len(x)?;
        self.require_separation(z)?;
        Ok(CoeffVector::new(
            x.as_slice()
                .iter()
                .enumerate()
                .map(|(i, a)| a / (z - self.pole_images[i]))
                .collect(),
        ))
    }

    /// `F R(z, T(tau)) S(tau)`: the scalar rank-one denominator ingredient.
    pub fn transfer(&self, z: Complex64) -> Result<Complex64> {
        self.require_separation(z)?;
        Ok(self
            .hold
            .as_slice()
            .iter()
            .zip(self.system.f())
            .zip(&self.pole_images)
            .filter(|((s, f), _)| **s != Complex64::ZERO && **f != Complex64::ZERO)
            .map(|((s, f), p)| s * f / (z - p))
            .sum())
    }

    /// `R(z, Delta(tau)) x` by the rank-one (Sherman-Morrison-Woodbury)
    /// update of the diagonal resolvent:
    /// `R(z,Delta) = R(z,T) + R(z,T)S (1 - F R(z,T)S)^{-1} F R(z,T)`.
    pub fn resolvent(&self, z: Complex64, x: &CoeffVector) -> Result<CoeffVector> {
        self.system.check_len(x)?;
        self.require_separation(z)?;
        let rt_x = CoeffVector::new(
            x.as_slice()
                .iter()
                .enumerate()
                .map(|(i, a)| a / (z - self.pole_images[i]))
                .collect(),
        );
        let f_rt_x = self.system.apply_feedback(&rt_x)?;
        let denom = Complex64::ONE - self.transfer(z)?;
        if denom.norm() <= SMW_DENOM_TOL {
            return Err(Error::SmwSingular {
                z,
                denominator_abs: denom.norm(),
            });
        }
        let rt_s = CoeffVector::new(
            self.hold
                .as_slice()
                .iter()
                .enumerate()
                .map(|(i, s)| s / (z - self.pole_images[i]))
                .collect(),
        );
        Ok(rt_x.add(&rt_s.scale(f_rt_x / denom)))
    }

    /// `R(z, Delta(tau))^* y = R(conj z, Delta(tau)^*) y` where, in the
    /// orthonormal realization, `Delta^* = diag(e^{tau conj(lambda)}) +
    /// conj(f) conj(s)^T`.
    pub fn resolvent_adjoint(&self, z: Complex64, y: &CoeffVector) -> Result<CoeffVector> {
        self.system.check_len(y)?;
        // The adjoint spectrum is the conjugate, so separation at conj(z)
        // coincides with separation at z; the error reports z as given.
        self.require_separation(z)?;
        let zc = z.conj();
        let rt_y = CoeffVector::new(
            y.as_slice()
                .iter()
                .enumerate()
                .map(|(i, a)| a / (zc - self.pole_images[i].conj()))
                .collect(),
        );
        // Row functional of the adjoint is conj(s); its column is conj(f).
        let row_rt_y: Complex64 = rt_y
            .as_slice()
            .iter()
            .zip(self.hold.as_slice())
            .map(|(a, s)| a * s.conj())
            .sum();
        // Denominator is the conjugate of the primal one at z.
        let denom = (Complex64::ONE - self.transfer(z)?).conj();
        if denom.norm() <= SMW_DENOM_TOL {
            return Err(Error::SmwSingular {
                z,
                denominator_abs: denom.norm(),
            });
        }
        let rt_fbar = CoeffVector::new(
            self.system
                .f()
                .iter()
                .enumerate()
                .map(|(i, f)| f.conj() / (zc - self.pole_images[i].conj()))
                .collect(),
        );
        Ok(rt_y.add(&rt_fbar.scale(row_rt_y / denom)))
    }
}
