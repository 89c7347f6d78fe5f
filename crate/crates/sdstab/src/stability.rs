//! The discrete stability certificate: unit-circle spectrum test,
//! power-boundedness probe by resolvent integrals, decay experiments, and
//! sampled-data trajectory simulation.
//!
//! The power-bound probe evaluates `(r-1) * integral of ||R(r e^{i theta},
//! Delta) x||^2 d theta` on a finite descending grid of radii r > 1. The
//! verdict is "bounded on probe" with the growth ratio reported; a finite
//! computation cannot certify the limsup itself.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assumptions::{TailCertificate, A6_MARGIN_DEFAULT};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{CoeffVector, DeltaOperator, RieszSystem};
use crate::transfer::ScanGrid;

/// Tolerance for the resonance test `tau (lambda_n - lambda_m) = 2 pi i l`.
pub const NONPATH_TOL: f64 = 1e-9;

/// Tolerance below which a real-part difference counts as zero in the
/// resonance test.
pub const NONPATH_RE_TOL: f64 = 1e-12;

/// Probe for the power-boundedness test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundProbe {
    /// Descending radii > 1 approaching the unit circle.
    pub r_values: Vec<f64>,
    /// Quadrature points per circle.
    pub n_theta: usize,
    /// Vector battery exercised in both the x and adjoint-y roles.
    pub test_vectors: Vec<CoeffVector>,
}

impl PowerBoundProbe {
    pub fn validate(&self) -> Result<()> {
        if self.r_values.is_empty() {
            return Err(Error::InvalidParameter("probe needs at least one radius".into()));
        }
        if self.r_values.iter().any(|&r| !(r > 1.0)) {
            return Err(Error::InvalidParameter(
                "all probe radii must exceed 1".into(),
            ));
        }
        for w in self.r_values.windows(2) {
            if w[0] <= w[1] {
                return Err(Error::InvalidParameter(
                    "probe radii must be descending".into(),
                ));
            }
        }
        if self.n_theta < 256 {
            return Err(Error::InvalidParameter(format!(
                "probe n_theta must be >= 256, got {}",
                self.n_theta
            )));
        }
        Ok(())
    }
}

/// One radius of the power-bound probe; `value` is absent when a quadrature
/// node failed its resolvent preconditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundRow {
    pub r: f64,
    pub value: Option<f64>,
    pub failure: Option<String>,
}

/// `(r-1) * integral over the circle of radius r of ||R(z, Delta) x||^2`
/// (or the adjoint resolvent applied to x), one row per probe radius.
/// Composite-trapezoid quadrature on the periodic integrand.
pub fn power_bound_integral(
    op: &DeltaOperator<'_>,
    probe: &PowerBoundProbe,
    x: &CoeffVector,
    adjoint: bool,
) -> Result<Vec<PowerBoundRow>> {
    probe.validate()?;
    if x.len() != op.system().truncation() {
        return Err(Error::LengthMismatch {
            expected: op.system().truncation(),
            got: x.len(),
        });
    }
    let thetas: Vec<f64> = (0..probe.n_theta)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / probe.n_theta as f64)
        .collect();
    let mut rows = Vec::with_capacity(probe.r_values.len());
    for &r in &probe.r_values {
        let samples: Vec<Result<f64>> = par::map_collect(&thetas, |&t| {
            let z = Complex64::from_polar(r, t);
            let res = if adjoint {
                op.resolvent_adjoint(z, x)
            } else {
                op.resolvent(z, x)
            };
            res.map(|v| v.norm_sqr())
        });
        match samples.into_iter().collect::<Result<Vec<f64>>>() {
            Ok(vals) => {
                let integral: f64 =
                    vals.iter().sum::<f64>() * 2.0 * std::f64::consts::PI / probe.n_theta as f64;
                rows.push(PowerBoundRow {
                    r,
                    value: Some((r - 1.0) * integral),
                    failure: None,
                });
            }
            Err(e) => rows.push(PowerBoundRow {
                r,
                value: None,
                failure: Some(e.to_string()),
            }),
        }
    }
    Ok(rows)
}

/// Norm history of the iterated one-step operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    /// `||Delta(tau)^k x0||` for k = 0..=k_max, orthonormal realization.
    pub norms: Vec<f64>,
    /// `max_k norms[k] / norms[0]`; transient growth above 1 is recorded,
    /// not rejected.
    pub sup_ratio: f64,
    /// First k with `norms[k] < threshold * norms[0]`.
    pub k_hit: Option<usize>,
}

/// Iterates the one-step operator and records the decay profile.
pub fn decay_test(
    op: &DeltaOperator<'_>,
    x0: &CoeffVector,
    k_max: usize,
    threshold: f64,
) -> Result<DecayRecord> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("k_max must be >= 1".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let mut norms = Vec::with_capacity(k_max + 1);
    let mut state = x0.clone();
    norms.push(state.norm());
    for _ in 0..k_max {
        state = op.apply(&state)?;
        norms.push(state.norm());
    }
    let initial = norms[0];
    let cutoff = threshold * initial;
    let k_hit = norms.iter().position(|&n| n < cutoff);
    let sup_ratio = if initial > 0.0 {
        norms.iter().fold(0.0f64, |a, &b| a.max(b)) / initial
    } else {
        1.0
    };
    Ok(DecayRecord {
        norms,
        sup_ratio,
        k_hit,
    })
}

/// One sample of a simulated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub norm: f64,
}

/// Simulates the sampled-data loop: over each interval the input is held at
/// `F x(k tau)`, so the intra-sample state is `Delta(j tau / m) x(k tau)`
/// with a fresh hold at the fractional time. The final point of one
/// interval and the first point of the next coincide exactly in
/// coefficients.
pub fn sampled_trajectory(
    op: &DeltaOperator<'_>,
    x0: &CoeffVector,
    samples_per_period: usize,
    k_max: usize,
) -> Result<Vec<TrajectoryPoint>> {
    if samples_per_period < 1 {
        return Err(Error::InvalidParameter(
            "samples_per_period must be >= 1".into(),
        ));
    }
    let sys = op.system();
    let tau = op.tau();
    let m = samples_per_period;
    // Fractional-time operators Delta(j tau / m), j = 1..m-1.
    let mut partial = Vec::with_capacity(m.saturating_sub(1));
    for j in 1..m {
        partial.push(DeltaOperator::new(sys, tau * j as f64 / m as f64)?);
    }
    let mut out = Vec::with_capacity(k_max * m + 1);
    let mut state = x0.clone();
    for k in 0..k_max {
        let t0 = k as f64 * tau;
        out.push(TrajectoryPoint {
            t: t0,
            norm: state.norm(),
        });
        for (j, sub) in partial.iter().enumerate() {
            let intra = sub.apply(&state)?;
            out.push(TrajectoryPoint {
                t: t0 + tau * (j + 1) as f64 / m as f64,
                norm: intra.norm(),
            });
        }
        state = op.apply(&state)?;
    }
    out.push(TrajectoryPoint {
        t: k_max as f64 * tau,
        norm: state.norm(),
    });
    Ok(out)
}

/// Resonance check for the unstable head: sampling is pathological when
/// `tau (lambda_n - lambda_m)` hits a nonzero multiple of `2 pi i` for a
/// pair of head eigenvalues in the open right half-plane.
pub fn check_sampling_nonpathological(sys: &RieszSystem, tau: f64) -> bool {
    let unstable: Vec<Complex64> = (0..sys.spectrum().head_len())
        .map(|i| sys.eigenvalue(i))
        .filter(|l| l.re > 0.0)
        .collect();
    for (i, a) in unstable.iter().enumerate() {
        for b in unstable.iter().skip(i + 1) {
            let diff = a - b;
            if diff.re.abs() > NONPATH_RE_TOL {
                continue;
            }
            let m = (tau * diff.im).rem_euclid(2.0 * std::f64::consts::PI);
            let dist = m.min(2.0 * std::f64::consts::PI - m);
            if dist <= NONPATH_TOL {
                return false;
            }
        }
    }
    true
}

/// Outcome of the unit-circle spectrum test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCircleVerdict {
    pub ok: bool,
    /// Minimum distance from a checked grid point to the truncated spectrum
    /// of T(tau); must clear the coverage tolerance `2 pi / n_theta`.
    pub min_pole_distance: f64,
    /// Minimum of `|1 - F R(z,T) S|` net of slack over the checked points.
    pub min_transfer_margin: f64,
    /// `|1 + F A^{-1} B|`: rules out z = 1 as an eigenvalue.
    pub near_one_margin: f64,
    pub checked_points: usize,
    pub excluded_points: usize,
    pub failure: Option<String>,
}

/// Tests that the unit circle meets the spectrum of `Delta(tau)` at most at
/// z = 1: every grid point outside the exclusion arc must stay clear of the
/// truncated semigroup spectrum (coverage tolerance `2 pi / n_theta`) and
/// keep `|1 - F R(z,T(tau)) S(tau)|` positive net of slack, and the
/// feedthrough margin must rule out 1 as an eigenvalue.
pub fn unit_circle_test(
    sys: &RieszSystem,
    tau: f64,
    grid: &ScanGrid,
    cert: &TailCertificate,
) -> Result<UnitCircleVerdict> {
    grid.validate()?;
    let op = DeltaOperator::new(sys, tau)?;
    let coverage_tol = 2.0 * std::f64::consts::PI / grid.n_theta as f64;
    let slack = cert.disc_tail_bound * sys.f().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();

    let thetas: Vec<f64> = (0..grid.n_theta)
        .map(|j| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / grid.n_theta as f64)
        .collect();

    struct PointOutcome {
        theta: f64,
        pole_distance: f64,
        margin: Option<f64>,
    }

    let outcomes: Vec<Option<PointOutcome>> = par::map_collect(&thetas, |&t| {
        if t.abs() < grid.exclusion_arc {
            return None;
        }
        let z = Complex64::from_polar(1.0, t);
        let pole_distance = op
            .pole_images()
            .iter()
            .map(|p| (z - p).norm())
            .fold(f64::INFINITY, f64::min);
        let margin = op
            .transfer(z)
            .ok()
            .map(|g| (Complex64::ONE - g).norm() - slack);
        Some(PointOutcome {
            theta: t,
            pole_distance,
            margin,
        })
    });

    let near_one_margin = (Complex64::ONE + sys.feedthrough()).norm();
    let mut min_pole_distance = f64::INFINITY;
    let mut min_transfer_margin = f64::INFINITY;
    let mut checked = 0;
    let mut excluded = 0;
    let mut failure: Option<String> = None;
    for o in outcomes.into_iter() {
        let Some(o) = o else {
            excluded += 1;
            continue;
        };
        checked += 1;
        min_pole_distance = min_pole_distance.min(o.pole_distance);
        if o.pole_distance <= coverage_tol && failure.is_none() {
            failure = Some(format!(
                "semigroup spectrum within {:.3e} of the unit circle at theta = {:.6}",
                o.pole_distance, o.theta
            ));
        }
        match o.margin {
            Some(m) => {
                min_transfer_margin = min_transfer_margin.min(m);
                if m <= 0.0 && failure.is_none() {
                    failure = Some(format!(
                        "transfer margin {:.3e} nonpositive at theta = {:.6}",
                        m, o.theta
                    ));
                }
            }
            None => {
                if failure.is_none() {
                    failure = Some(format!(
                        "resolvent precondition failed at theta = {:.6}",
                        o.theta
                    ));
                }
            }
        }
    }
    if near_one_margin <= A6_MARGIN_DEFAULT && failure.is_none() {
        failure = Some(format!(
            "feedthrough margin {near_one_margin:.3e} cannot rule out 1 as an eigenvalue"
        ));
    }
    Ok(UnitCircleVerdict {
        ok: failure.is_none(),
        min_pole_distance,
        min_transfer_margin,
        near_one_margin,
        checked_points: checked,
        excluded_points: excluded,
        failure,
    })
}
