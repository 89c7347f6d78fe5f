//! Continuous and discrete transfer functions, uniform lower-bound scans,
//! and the search for an admissible sampling period.
//!
//! The continuous scan covers the boundary of the scanned right-half-plane
//! region: the imaginary axis up to `omega_max`, a small semicircle of
//! radius `eta` around the origin, and an analytic floor for `|lambda| >
//! omega_max`. The origin and the point z = 1 are cluster points of the
//! spectrum and are never sampled; the margin there is the limit value
//! `|1 + F A^{-1} B|`, which enters the reported minimum explicitly.
//!
//! A boundary scan certifies the enclosed region only when `1/(1 - G)` is
//! holomorphic inside it, i.e. when the closed loop has no spectrum in the
//! scanned right half-plane; the pipeline separately verifies that the
//! placed head is Hurwitz.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assumptions::TailCertificate;
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{DeltaOperator, RieszSystem, SEPARATION_TOL};
use crate::stability::check_sampling_nonpathological;

/// Radii of the circles sampled by the discrete scan; the unit circle is
/// scanned minus the exclusion arc around z = 1.
pub const RADIAL_SAMPLES: [f64; 4] = [1.0, 1.01, 1.1, 2.0];

/// Grid parameters for the lower-bound scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanGrid {
    /// Frequency cap for the imaginary-axis scan.
    pub omega_max: f64,
    /// Number of positive frequency magnitudes (mirrored to negative).
    pub n_omega: usize,
    /// Radius of the semicircle around the origin; resolved to half the
    /// smallest head eigenvalue magnitude when absent.
    pub eta: Option<f64>,
    /// Angular points per circle.
    pub n_theta: usize,
    /// Angular half-width excluded around z = 1 on the unit circle.
    pub exclusion_arc: f64,
    /// Acceptance ratio for the sampling-period search: a period is
    /// admissible when `epsilon_d >= target_ratio * epsilon_c`.
    pub target_ratio: f64,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            omega_max: 1e3,
            n_omega: 4096,
            eta: None,
            n_theta: 2048,
            exclusion_arc: 0.05,
            target_ratio: 0.5,
        }
    }
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_max >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "omega_max must be >= 1, got {}",
                self.omega_max
            )));
        }
        if self.n_omega < 16 || self.n_theta < 16 {
            return Err(Error::InvalidParameter(
                "scan grids need at least 16 points".into(),
            ));
        }
        if !(self.exclusion_arc > 0.0 && self.exclusion_arc <= std::f64::consts::PI / 8.0) {
            return Err(Error::InvalidParameter(format!(
                "exclusion_arc must lie in (0, pi/8], got {}",
                self.exclusion_arc
            )));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "target_ratio must lie in (0, 1), got {}",
                self.target_ratio
            )));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "eta must be positive, got {eta}"
                )));
            }
        }
        Ok(())
    }

    /// Semicircle radius: configured, or half the smallest head eigenvalue
    /// magnitude (half the first materialized mode when the head is empty).
    pub fn resolve_eta(&self, sys: &RieszSystem) -> Result<f64> {
        if let Some(eta) = self.eta {
            let head_min = (0..sys.spectrum().head_len())
                .map(|i| sys.eigenvalue(i).norm())
                .fold(f64::INFINITY, f64::min);
            if eta >= head_min {
                return Err(Error::InvalidParameter(format!(
                    "eta = {eta} reaches the head spectrum (min |lambda| = {head_min})"
                )));
            }
            return Ok(eta);
        }
        let reference = if sys.spectrum().head_len() > 0 {
            (0..sys.spectrum().head_len())
                .map(|i| sys.eigenvalue(i).norm())
                .fold(f64::INFINITY, f64::min)
        } else {
            sys.eigenvalue(0).norm()
        };
        Ok(0.5 * reference)
    }
}

/// Outcome of a lower-bound scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundResult {
    /// Net lower bound: the scan minimum (including the cluster-limit
    /// margin and, for the continuous scan, the large-frequency floor)
    /// minus the certified truncation slack.
    pub epsilon: f64,
    /// Point attaining the scan minimum; the origin (continuous) or 1
    /// (discrete) when the cluster-limit margin governs.
    pub argmin_point: Complex64,
    /// Certified tail bound subtracted from the raw minimum.
    pub truncation_slack: f64,
    /// Raw minimum over the sampled grid points.
    pub grid_min: f64,
    /// `|1 + F A^{-1} B|`: the limit of the margin at the spectral cluster
    /// point (lambda -> 0, or z -> 1 for the discrete scan).
    pub limit_margin: f64,
    /// Analytic floor for `|lambda| > omega_max` (continuous scan only).
    pub floor: Option<f64>,
    pub points_scanned: usize,
    pub points_skipped: usize,
    /// Scanned series for reporting: (omega, value) on the imaginary axis,
    /// or (theta, value) on the unit circle, sorted by the first column.
    pub series: Vec<(f64, f64)>,
}

/// `G(lambda) = F(lambda I - A)^{-1} B = sum b_n f_n / (lambda - lambda_n)`,
/// truncated; the sum runs over the support of `b_n f_n`.
pub fn transfer_continuous(sys: &RieszSystem, lambda: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::ZERO;
    for i in 0..sys.support_b() {
        let w = sys.b()[i] * sys.f()[i];
        if w == Complex64::ZERO {
            continue;
        }
        let d = lambda - sys.eigenvalue(i);
        if d.norm() <= SEPARATION_TOL {
            return Err(Error::SpectrumTooClose {
                z: lambda,
                distance: d.norm(),
                index: Some(i),
            });
        }
        acc += w / d;
    }
    Ok(acc)
}

/// `F(zI - T(tau))^{-1} S(tau) = sum (e^{tau lambda_n} - 1)/(z - e^{tau
/// lambda_n}) * b_n f_n / lambda_n`, truncated.
pub fn transfer_discrete(sys: &RieszSystem, tau: f64, z: Complex64) -> Result<Complex64> {
    DeltaOperator::new(sys, tau)?.transfer(z)
}

/// Signed frequencies scanned on the imaginary axis: log-spaced magnitudes
/// in `[1e-3, omega_max]` plus a linear fill, mirrored to negative, sorted.
fn omega_points(grid: &ScanGrid) -> Vec<f64> {
    let n_log = grid.n_omega / 2;
    let n_lin = grid.n_omega - n_log;
    let mut mags = Vec::with_capacity(grid.n_omega);
    let lo: f64 = 1e-3;
    for k in 0..n_log {
        let t = k as f64 / (n_log.max(2) - 1) as f64;
        mags.push(lo * (grid.omega_max / lo).powf(t));
    }
    for k in 0..n_lin {
        mags.push(grid.omega_max * (k + 1) as f64 / n_lin as f64);
    }
    let mut out = Vec::with_capacity(2 * mags.len());
    for m in mags {
        out.push(-m);
        out.push(m);
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

/// Uniform lower bound for `|1 - G|` over the closed right half-plane minus
/// the origin, net of the certified truncation slack.
pub fn scan_epsilon_c(
    sys: &RieszSystem,
    grid: &ScanGrid,
    cert: &TailCertificate,
) -> Result<LowerBoundResult> {
    grid.validate()?;
    let eta = grid.resolve_eta(sys)?;

    // Analytic floor on |lambda| > omega_max: |G| <= sum |b_n f_n| / (omega_max - L).
    let mut weight_sum = 0.0;
    let mut pole_max: f64 = 0.0;
    for i in 0..sys.support_b() {
        let w = (sys.b()[i] * sys.f()[i]).norm();
        if w > 0.0 {
            weight_sum += w;
            pole_max = pole_max.max(sys.eigenvalue(i).norm());
        }
    }
    if weight_sum > 0.0 && grid.omega_max < 2.0 * pole_max {
        return Err(Error::InvalidParameter(format!(
            "omega_max = {} must exceed twice the largest supported eigenvalue magnitude {}",
            grid.omega_max, pole_max
        )));
    }
    let floor = if weight_sum > 0.0 {
        1.0 - weight_sum / (grid.omega_max - pole_max)
    } else {
        1.0
    };

    let omegas = omega_points(grid);
    let axis: Vec<(f64, Option<f64>)> = par::map_collect(&omegas, |&w| {
        (
            w,
            transfer_continuous(sys, Complex64::new(0.0, w))
                .ok()
                .map(|g| (Complex64::ONE - g).norm()),
        )
    });

    let thetas: Vec<f64> = (0..grid.n_theta)
        .map(|k| {
            -std::f64::consts::FRAC_PI_2
                + std::f64::consts::PI * k as f64 / (grid.n_theta - 1) as f64
        })
        .collect();
    let semi: Vec<(Complex64, Option<f64>)> = par::map_collect(&thetas, |&t| {
        let lambda = Complex64::from_polar(eta, t);
        (
            lambda,
            transfer_continuous(sys, lambda)
                .ok()
                .map(|g| (Complex64::ONE - g).norm()),
        )
    });

    let mut grid_min = f64::INFINITY;
    let mut argmin = Complex64::ZERO;
    let mut scanned = 0;
    let mut skipped = 0;
    let mut series = Vec::with_capacity(axis.len());
    for (w, v) in &axis {
        match v {
            Some(val) => {
                scanned += 1;
                series.push((*w, *val));
                if *val < grid_min {
                    grid_min = *val;
                    argmin = Complex64::new(0.0, *w);
                }
            }
            None => skipped += 1,
        }
    }
    for (lambda, v) in &semi {
        match v {
            Some(val) => {
                scanned += 1;
                if *val < grid_min {
                    grid_min = *val;
                    argmin = *lambda;
                }
            }
            None => skipped += 1,
        }
    }

    let limit_margin = (Complex64::ONE + sys.feedthrough()).norm();
    let slack = cert.cont_tail_bound * f_norm(sys);
    let mut raw = grid_min.min(floor);
    if limit_margin < raw {
        raw = limit_margin;
        argmin = Complex64::ZERO;
    }
    let epsilon = raw - slack;
    if epsilon <= 0.0 {
        return Err(Error::NegativeMargin {
            value: epsilon,
            at: argmin,
        });
    }
    Ok(LowerBoundResult {
        epsilon,
        argmin_point: argmin,
        truncation_slack: slack,
        grid_min,
        limit_margin,
        floor: Some(floor),
        points_scanned: scanned,
        points_skipped: skipped,
        series,
    })
}

fn f_norm(sys: &RieszSystem) -> f64 {
    sys.f().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Uniform lower bound for `|1 - F R(z, T(tau)) S(tau)|` over `|z| >= 1`,
/// net of slack. Samples the unit circle minus the exclusion arc around
/// z = 1 plus circles at the radii in [`RADIAL_SAMPLES`]; the margin inside
/// the arc is the limit value `|1 + F A^{-1} B|`.
pub fn scan_epsilon_d(
    sys: &RieszSystem,
    tau: f64,
    grid: &ScanGrid,
    cert: &TailCertificate,
) -> Result<LowerBoundResult> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidTau(tau));
    }
    grid.validate()?;
    let op = DeltaOperator::new(sys, tau)?;

    let thetas: Vec<f64> = (0..grid.n_theta)
        .map(|k| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / grid.n_theta as f64)
        .collect();

    let mut grid_min = f64::INFINITY;
    let mut argmin = Complex64::ONE;
    let mut scanned = 0;
    let mut skipped = 0;
    let mut series = Vec::new();

    for &r in RADIAL_SAMPLES.iter() {
        let on_unit = r == 1.0;
        let vals: Vec<(f64, Option<f64>)> = par::map_collect(&thetas, |&t| {
            if on_unit && t.abs() < grid.exclusion_arc {
                return (t, None);
            }
            let z = Complex64::from_polar(r, t);
            (t, op.transfer(z).ok().map(|g| (Complex64::ONE - g).norm()))
        });
        for (t, v) in &vals {
            match v {
                Some(val) => {
                    scanned += 1;
                    if on_unit {
                        series.push((*t, *val));
                    }
                    if *val < grid_min {
                        grid_min = *val;
                        argmin = Complex64::from_polar(r, *t);
                    }
                }
                None if on_unit && t.abs() < grid.exclusion_arc => {}
                None => skipped += 1,
            }
        }
    }

    let limit_margin = (Complex64::ONE + sys.feedthrough()).norm();
    let slack = cert.disc_tail_bound * f_norm(sys);
    let mut raw = grid_min;
    if limit_margin < raw {
        raw = limit_margin;
        argmin = Complex64::ONE;
    }
    let epsilon = raw - slack;
    if epsilon <= 0.0 {
        return Err(Error::NegativeMargin {
            value: epsilon,
            at: argmin,
        });
    }
    Ok(LowerBoundResult {
        epsilon,
        argmin_point: argmin,
        truncation_slack: slack,
        grid_min,
        limit_margin,
        floor: None,
        points_scanned: scanned,
        points_skipped: skipped,
        series,
    })
}

/// One row of the sampling-period table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauEntry {
    pub tau: f64,
    pub epsilon_d: Option<f64>,
    pub failure: Option<String>,
    pub nonpathological: bool,
    pub admissible: bool,
}

/// Result of the admissible-sampling-period search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauStarResult {
    /// Largest grid period passing the acceptance test.
    pub tau_star: f64,
    pub epsilon_c: f64,
    pub target_ratio: f64,
    /// Acceptance threshold `target_ratio * epsilon_c`.
    pub threshold: f64,
    pub table: Vec<TauEntry>,
}

/// Scans the period grid and returns the largest admissible period: one
/// whose discrete margin clears `target_ratio * epsilon_c` and whose
/// sampling is nonpathological for the unstable head.
pub fn find_tau_star(
    sys: &RieszSystem,
    target_ratio: f64,
    tau_grid: &[f64],
    grid: &ScanGrid,
    cert: &TailCertificate,
) -> Result<TauStarResult> {
    if !(target_ratio > 0.0 && target_ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target_ratio must lie in (0, 1), got {target_ratio}"
        )));
    }
    if tau_grid.is_empty() {
        return Err(Error::InvalidParameter("tau_grid is empty".into()));
    }
    for w in tau_grid.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidParameter("tau_grid must be ascending".into()));
        }
    }
    if tau_grid.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::InvalidParameter(
            "all grid periods must lie in (0, 1)".into(),
        ));
    }

    let continuous = scan_epsilon_c(sys, grid, cert)?;
    let threshold = target_ratio * continuous.epsilon;

    let mut table = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let nonpathological = check_sampling_nonpathological(sys, tau);
        let entry = match scan_epsilon_d(sys, tau, grid, cert) {
            Ok(res) => TauEntry {
                tau,
                epsilon_d: Some(res.epsilon),
                failure: None,
                nonpathological,
                admissible: nonpathological && res.epsilon >= threshold,
            },
            Err(e) => TauEntry {
                tau,
                epsilon_d: None,
                failure: Some(e.to_string()),
                nonpathological,
                admissible: false,
            },
        };
        table.push(entry);
    }

    let tau_star = table
        .iter()
        .filter(|e| e.admissible)
        .map(|e| e.tau)
        .fold(f64::NEG_INFINITY, f64::max);
    if !tau_star.is_finite() {
        return Err(Error::NoAdmissibleTau);
    }
    Ok(TauStarResult {
        tau_star,
        epsilon_c: continuous.epsilon,
        target_ratio,
        threshold,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assumptions::TailCertificate;
    use crate::spectral::{CoeffVector, SpectrumSpec, TailLaw};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(lambda: f64, b: f64, f: f64) -> RieszSystem {
        let spec = SpectrumSpec::new(vec![c(lambda, 0.0)], None, 1).unwrap();
        RieszSystem::new(
            spec,
            vec![c(b, 0.0)],
            vec![c(f, 0.0)],
            1.0,
            1.0,
            0.5,
            FRAC_PI_4,
        )
        .unwrap()
    }

    fn small_grid() -> ScanGrid {
        ScanGrid {
            n_omega: 256,
            n_theta: 256,
            ..ScanGrid::default()
        }
    }

    #[test]
    fn continuous_transfer_examples() {
        let zero = scalar(-1.0, 0.0, 5.0);
        assert_eq!(
            transfer_continuous(&zero, c(0.3, 0.2)).unwrap(),
            Complex64::ZERO
        );
        // lambda_1 = -1, b1 f1 = 1: G(0) = 1, the feedthrough boundary case.
        let sys = scalar(-1.0, 1.0, 1.0);
        let g0 = transfer_continuous(&sys, Complex64::ZERO).unwrap();
        assert_relative_eq!(g0.re, 1.0, max_relative = 1e-14);
        let (a6, ok) = crate::assumptions::check_a6(&sys, 1e-6);
        assert_eq!(a6, c(-1.0, 0.0));
        assert!(!ok);
    }

    #[test]
    fn discrete_transfer_scalar_hand_value() {
        let sys = scalar(-1.0, 1.0, 1.0);
        let v = transfer_discrete(&sys, 2.0f64.ln(), c(-1.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, -1.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn conjugate_symmetry_for_self_conjugate_data() {
        let spec = SpectrumSpec::new(vec![c(1.0, 1.0), c(1.0, -1.0)], None, 2).unwrap();
        let sys = RieszSystem::new(
            spec,
            vec![c(0.5, 0.2), c(0.5, -0.2)],
            vec![c(-1.0, 0.3), c(-1.0, -0.3)],
            1.0,
            1.0,
            0.5,
            FRAC_PI_4,
        )
        .unwrap();
        for &lambda in &[c(0.3, 0.7), c(0.0, 2.0), c(2.0, -0.4)] {
            let g = transfer_continuous(&sys, lambda).unwrap();
            let gc = transfer_continuous(&sys, lambda.conj()).unwrap();
            assert!((g.conj() - gc).norm() < 1e-13);
        }
        for &z in &[c(1.2, 0.5), c(-1.0, 0.3)] {
            let g = transfer_discrete(&sys, 0.3, z).unwrap();
            let gc = transfer_discrete(&sys, 0.3, z.conj()).unwrap();
            assert!((g.conj() - gc).norm() < 1e-13);
        }
    }

    #[test]
    fn small_tau_consistency_on_halving_sequence() {
        let sys = scalar(-1.0, 1.0, -1.0);
        let mu = c(0.8, 0.4);
        let g = transfer_continuous(&sys, mu).unwrap();
        let mut prev = f64::INFINITY;
        for &tau in &[0.2, 0.1, 0.05, 0.025] {
            let z = (mu * tau).exp();
            let gd = transfer_discrete(&sys, tau, z).unwrap();
            let err = (gd - g).norm();
            assert!(err < prev, "tau = {tau}: {err} !< {prev}");
            prev = err;
        }
    }

    #[test]
    fn scan_epsilon_c_trivial_without_input() {
        let sys = scalar(-1.0, 0.0, 0.0);
        let cert = TailCertificate::for_system(&sys, 128).unwrap();
        let res = scan_epsilon_c(&sys, &small_grid(), &cert).unwrap();
        assert_relative_eq!(res.epsilon, 1.0, max_relative = 1e-12);
        assert_eq!(res.truncation_slack, 0.0);
    }

    #[test]
    fn scan_epsilon_c_scalar_stable_matches_floor() {
        // G(lambda) = -1/(lambda+1); |1 - G| >= 1 on the axis, so the
        // large-frequency floor 1 - 1/(omega_max - 1) governs.
        let sys = scalar(-1.0, 1.0, -1.0);
        let cert = TailCertificate::for_system(&sys, 128).unwrap();
        let res = scan_epsilon_c(&sys, &small_grid(), &cert).unwrap();
        let expected_floor = 1.0 - 1.0 / (1e3 - 1.0);
        assert_relative_eq!(res.floor.unwrap(), expected_floor, max_relative = 1e-12);
        assert_relative_eq!(res.epsilon, expected_floor, max_relative = 1e-12);
        // oracle: dense minimization of |1 - G| over the same axis grid
        let oracle = res
            .series
            .iter()
            .map(|(w, _)| {
                let lambda = c(0.0, *w);
                (Complex64::ONE - (-(lambda + 1.0).inv())).norm()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(res.grid_min <= oracle + 1e-12);
        assert!(res.grid_min >= 1.0 - 1e-9);
    }

    #[test]
    fn scan_epsilon_c_flags_feedthrough_violation() {
        let sys = scalar(-1.0, 1.0, 1.0);
        let cert = TailCertificate::for_system(&sys, 128).unwrap();
        match scan_epsilon_c(&sys, &small_grid(), &cert) {
            Err(Error::NegativeMargin { at, .. }) => {
                assert_eq!(at, Complex64::ZERO);
            }
            other => panic!("expected NegativeMargin, got {other:?}"),
        }
    }

    #[test]
    fn scan_epsilon_d_trivial_and_consistency() {
        let zero = scalar(-1.0, 0.0, 0.0);
        let cert = TailCertificate::for_system(&zero, 128).unwrap();
        let res = scan_epsilon_d(&zero, 0.3, &small_grid(), &cert).unwrap();
        assert_relative_eq!(res.epsilon, 1.0, max_relative = 1e-12);

        // scalar stable example: epsilon_d(0.1) within 10% of epsilon_c
        let sys = scalar(-1.0, 1.0, -1.0);
        let cert = TailCertificate::for_system(&sys, 128).unwrap();
        let ec = scan_epsilon_c(&sys, &small_grid(), &cert).unwrap().epsilon;
        let ed = scan_epsilon_d(&sys, 0.1, &small_grid(), &cert)
            .unwrap()
            .epsilon;
        assert!((ed - ec).abs() / ec < 0.1, "ed = {ed}, ec = {ec}");
        assert!(matches!(
            scan_epsilon_d(&sys, 1.0, &small_grid(), &cert),
            Err(Error::InvalidTau(_))
        ));
    }

    #[test]
    fn scan_epsilon_d_flags_feedthrough_violation_at_one() {
        let sys = scalar(-1.0, 1.0, 1.0);
        let cert = TailCertificate::for_system(&sys, 128).unwrap();
        match scan_epsilon_d(&sys, 0.2, &small_grid(), &cert) {
            Err(Error::NegativeMargin { at, .. }) => assert_eq!(at, Complex64::ONE),
            other => panic!("expected NegativeMargin, got {other:?}"),
        }
    }

    #[test]
    fn relation_identity_with_closed_loop_resolvent() {
        // 1/(1 - FRS) - 1 = F (zI - Delta)^{-1} S on the truncation.
        let spec = SpectrumSpec::new(
            vec![c(0.6, 0.3)],
            Some(TailLaw::Reciprocal { coefficient: 1.0 }),
            6,
        )
        .unwrap();
        let n = 6;
        let b: Vec<Complex64> = (0..n).map(|i| c(0.3 / (i + 1) as f64, 0.1)).collect();
        let f: Vec<Complex64> = (0..n).map(|i| c(-0.4, 0.05 * i as f64)).collect();
        let sys = RieszSystem::new(spec, b, f, 1.0, 1.0, 0.5, FRAC_PI_4).unwrap();
        let tau = 0.25;
        let op = DeltaOperator::new(&sys, tau).unwrap();
        let z = c(1.4, 0.6);
        let frs = op.transfer(z).unwrap();
        let lhs = (Complex64::ONE - frs).inv() - Complex64::ONE;
        let r_s = op.resolvent(z, op.hold()).unwrap();
        let rhs = sys.apply_feedback(&r_s).unwrap();
        assert!((lhs - rhs).norm() < 1e-11, "lhs {lhs}, rhs {rhs}");
        let _ = CoeffVector::zero(n);
    }

    #[test]
    fn tau_star_trivial_without_input() {
        let sys = scalar(-1.0, 0.0, 0.0);
        let cert = TailCertificate::for_system(&sys, 128).unwrap();
        let taus = [0.1, 0.2, 0.4, 0.8];
        let res = find_tau_star(&sys, 0.5, &taus, &small_grid(), &cert).unwrap();
        assert_eq!(res.tau_star, 0.8);
        assert!(res.table.iter().all(|e| e.admissible));
    }

    #[test]
    fn tau_star_scalar_stable_continuous_in_tau() {
        let sys = scalar(-1.0, 1.0, -1.0);
        let cert = TailCertificate::for_system(&sys, 128).unwrap();
        let taus = [0.05, 0.1, 0.2, 0.4];
        let res = find_tau_star(&sys, 0.5, &taus, &small_grid(), &cert).unwrap();
        assert!(res.tau_star > 0.0);
        let eds: Vec<f64> = res.table.iter().map(|e| e.epsilon_d.unwrap()).collect();
        for w in eds.windows(2) {
            let ratio = w[1] / w[0];
            assert!(ratio < 10.0 && ratio > 0.1, "jump {ratio}");
        }
        // decreasing the ratio never decreases tau_star
        let relaxed = find_tau_star(&sys, 0.25, &taus, &small_grid(), &cert).unwrap();
        assert!(relaxed.tau_star >= res.tau_star);
    }
}
