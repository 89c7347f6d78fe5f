//! File-driven pipeline: parse a system description, run assumptions ->
//! epsilon_c -> tau* -> unit-circle -> power-bound -> decay, and emit a
//! structured report plus CSV scan/trajectory series.
//!
//! Reports are deterministic: identical description and seed produce
//! byte-identical JSON. Stages short-circuit with explicit skip reasons
//! rather than crashing; numerical failures land in the report, not in the
//! process exit path.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assumptions::{
    check_a1_a2_a3, check_a4_example, check_a5, check_a6, TailCertificate, A6_MARGIN_DEFAULT,
    IMAG_AXIS_TOL, M1_GRID_DEFAULT, M1_SAFETY,
};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{
    CoeffVector, DeltaOperator, RieszSystem, SpectrumSpec, TailLaw, PHI_TAYLOR_CUTOFF,
    SEPARATION_TOL, SMW_DENOM_TOL,
};
use crate::stability::{
    decay_test, power_bound_integral, sampled_trajectory, unit_circle_test, PowerBoundProbe,
    PowerBoundRow, UnitCircleVerdict,
};
use crate::synthesis::{
    build_example_system, verify_b_in_domain, BDomainReport, ExampleSystemSpec, NudgeReport,
    PLACEMENT_TOL,
};
use crate::transfer::{find_tau_star, scan_epsilon_c, scan_epsilon_d, ScanGrid, TauStarResult};

/// Default iteration budget for the decay stage.
pub const DECAY_K_MAX: usize = 20_000;
/// Default decay threshold relative to the initial norm.
pub const DECAY_THRESHOLD: f64 = 1e-3;
/// Log-spaced frequency magnitudes for the closed-loop axis check.
pub const A4_OMEGA_RANGE: [f64; 2] = [1.0, 1e4];
pub const A4_OMEGA_POINTS: usize = 64;
/// Growth budget for the power-bound probe: values across the radius grid
/// must stay within this factor of the value at the largest radius.
pub const POWER_BOUND_GROWTH_LIMIT: f64 = 10.0;

/// Sparse coefficient entry: 1-based mode index and [re, im].
pub type SparseEntry = (usize, [f64; 2]);

/// Eigenvalue tail description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    /// Only "reciprocal" is supported: `lambda_n = -coefficient/n`.
    #[serde(rename = "type")]
    pub kind: String,
    pub coefficient: f64,
    /// 1-based mode number at which the tail starts; must equal the head
    /// length plus one.
    pub start_index: usize,
}

/// Structured feedback: synthesized by pole placement or given explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum FeedbackSpec {
    Auto { targets: Vec<[f64; 2]> },
    Explicit { entries: Vec<SparseEntry> },
}

/// Feedback perturbation with its robustness budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    #[serde(default)]
    pub entries: Vec<SparseEntry>,
    pub kappa: f64,
}

/// Power-bound probe parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeParams {
    pub r_values: Vec<f64>,
    pub n_theta: usize,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self {
            r_values: vec![1.1, 1.01, 1.001],
            n_theta: 1024,
        }
    }
}

/// The input file schema. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDescription {
    /// Head eigenvalues as [re, im] pairs, user order kept.
    pub head_eigenvalues: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailSpec>,
    pub truncation: usize,
    /// Sparse input coefficients (1-based mode indices).
    #[serde(default)]
    pub b: Vec<SparseEntry>,
    pub f1: FeedbackSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<PerturbationSpec>,
    pub alpha: f64,
    pub delta: f64,
    #[serde(default = "one")]
    pub riesz_ma: f64,
    #[serde(default = "one")]
    pub riesz_mb: f64,
    #[serde(default)]
    pub scan: ScanGrid,
    #[serde(default)]
    pub probe: ProbeParams,
    pub tau_grid: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

/// Parses a description from JSON text.
pub fn parse_description(text: &str) -> std::result::Result<SystemDescription, String> {
    serde_json::from_str(text)
        .map_err(|e| format!("line {}, column {}: {}", e.line(), e.column(), e))
}

fn to_complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn sparse_to_slots(
    entries: &[SparseEntry],
    truncation: usize,
    what: &str,
) -> Result<Vec<(usize, Complex64)>> {
    let mut out = Vec::with_capacity(entries.len());
    let mut seen = vec![false; truncation];
    for &(index, value) in entries {
        if index == 0 || index > truncation {
            return Err(Error::InvalidParameter(format!(
                "{what} entry uses mode index {index}, outside 1..={truncation}"
            )));
        }
        if seen[index - 1] {
            return Err(Error::InvalidParameter(format!(
                "{what} has a duplicate entry for mode {index}"
            )));
        }
        seen[index - 1] = true;
        out.push((index - 1, to_complex(value)));
    }
    Ok(out)
}

/// Synthesis artifacts recorded in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSection {
    pub f_plus: Vec<Complex64>,
    pub achieved_eigs: Vec<Complex64>,
    pub f2_norm: f64,
    pub kappa: f64,
    pub kappa_ok: bool,
    pub nudge: Option<NudgeReport>,
}

/// Builds the system described by the file: either through pole placement
/// (f1 auto, with the feedthrough nudge) or from explicit coefficients.
pub fn build_system(desc: &SystemDescription) -> Result<(RieszSystem, Option<SynthesisSection>)> {
    let head: Vec<Complex64> = desc
        .head_eigenvalues
        .iter()
        .map(|p| to_complex(*p))
        .collect();
    let tail_coefficient = match &desc.tail {
        Some(t) => {
            if t.kind != "reciprocal" {
                return Err(Error::InvalidParameter(format!(
                    "unsupported tail type {:?}",
                    t.kind
                )));
            }
            if t.start_index != head.len() + 1 {
                return Err(Error::InvalidParameter(format!(
                    "tail start_index {} must equal head length + 1 = {}",
                    t.start_index,
                    head.len() + 1
                )));
            }
            Some(t.coefficient)
        }
        None => None,
    };
    let b_entries = sparse_to_slots(&desc.b, desc.truncation, "b")?;
    let (f2_entries, kappa) = match &desc.f2 {
        Some(p) => (sparse_to_slots(&p.entries, desc.truncation, "f2")?, p.kappa),
        None => (Vec::new(), 0.0),
    };

    match &desc.f1 {
        FeedbackSpec::Auto { targets } => {
            let spec = ExampleSystemSpec {
                unstable_eigs: head,
                targets: targets.iter().map(|p| to_complex(*p)).collect(),
                tail_coefficient,
                truncation: desc.truncation,
                b_entries,
                f2_entries,
                kappa,
                alpha: desc.alpha,
                delta: desc.delta,
                riesz_ma: desc.riesz_ma,
                riesz_mb: desc.riesz_mb,
                a6_margin: A6_MARGIN_DEFAULT,
            };
            let built = build_example_system(&spec)?;
            let section = SynthesisSection {
                f_plus: built.placement.f_plus.clone(),
                achieved_eigs: built.placement.achieved_eigs.clone(),
                f2_norm: built.f2_norm,
                kappa: built.kappa,
                kappa_ok: built.kappa_ok,
                nudge: built.nudge.clone(),
            };
            Ok((built.system, Some(section)))
        }
        FeedbackSpec::Explicit { entries } => {
            let tail_law = tail_coefficient.map(|c| TailLaw::Reciprocal { coefficient: c });
            let spectrum = SpectrumSpec::new(head, tail_law, desc.truncation)?;
            let n = spectrum.truncation();
            let mut b = vec![Complex64::ZERO; n];
            for (slot, value) in b_entries {
                b[slot] = value;
            }
            let mut f = vec![Complex64::ZERO; n];
            for (slot, value) in sparse_to_slots(entries, n, "f1")? {
                f[slot] = value;
            }
            for (slot, value) in f2_entries {
                f[slot] += value;
            }
            let sys = RieszSystem::new(
                spectrum,
                b,
                f,
                desc.riesz_ma,
                desc.riesz_mb,
                desc.alpha,
                desc.delta,
            )?;
            Ok((sys, None))
        }
    }
}

/// The deterministic vector battery: three seeded random directions, three
/// basis-aligned (first head mode, first tail mode, deepest tail mode), and
/// two mixed.
pub fn battery(sys: &RieszSystem, seed: u64) -> Vec<(String, CoeffVector)> {
    let n = sys.truncation();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(8);
    for k in 0..3 {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let v = CoeffVector::new(v);
        let nv = v.norm();
        out.push((format!("random-{k}"), v.scale(Complex64::new(1.0 / nv, 0.0))));
    }
    let head_len = sys.spectrum().head_len();
    out.push(("head-first".into(), CoeffVector::basis(n, 0)));
    out.push((
        "tail-first".into(),
        CoeffVector::basis(n, head_len.min(n - 1)),
    ));
    out.push(("tail-deep".into(), CoeffVector::basis(n, n - 1)));
    let ends = CoeffVector::basis(n, 0).add(&CoeffVector::basis(n, n - 1));
    let ends_norm = ends.norm();
    out.push((
        "mixed-ends".into(),
        ends.scale(Complex64::new(1.0 / ends_norm, 0.0)),
    ));
    let alt = CoeffVector::new(
        (0..n)
            .map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect(),
    );
    let alt_norm = alt.norm();
    out.push((
        "mixed-alternating".into(),
        alt.scale(Complex64::new(1.0 / alt_norm, 0.0)),
    ));
    out
}

/// Stage outcome in the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    pub detail: Option<String>,
}

fn passed(name: &str) -> StageRecord {
    StageRecord {
        name: name.into(),
        status: StageStatus::Passed,
        detail: None,
    }
}

fn failed(name: &str, detail: String) -> StageRecord {
    StageRecord {
        name: name.into(),
        status: StageStatus::Failed,
        detail: Some(detail),
    }
}

fn skipped(name: &str, reason: &str) -> StageRecord {
    StageRecord {
        name: name.into(),
        status: StageStatus::Skipped,
        detail: Some(format!("skipped: {reason}")),
    }
}

/// Assumption verdicts with the values that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionsSection {
    pub a1_count: usize,
    pub a1_certified: bool,
    pub a2_ok: bool,
    pub a3_ok: bool,
    pub a3_note: Option<String>,
    pub a4_sup_estimate: Option<f64>,
    pub a4_ok: Option<bool>,
    pub a4_note: Option<String>,
    pub a5_value: f64,
    pub a5_ok: bool,
    pub a6_value: Complex64,
    pub a6_margin: f64,
    pub a6_ok: bool,
}

/// Lower-bound summary embedded in the report; the scanned series lives in
/// the report's series section instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundSummary {
    pub epsilon: f64,
    pub argmin_point: Complex64,
    pub truncation_slack: f64,
    pub grid_min: f64,
    pub limit_margin: f64,
    pub floor: Option<f64>,
    pub points_scanned: usize,
    pub points_skipped: usize,
}

impl From<&crate::transfer::LowerBoundResult> for LowerBoundSummary {
    fn from(r: &crate::transfer::LowerBoundResult) -> Self {
        Self {
            epsilon: r.epsilon,
            argmin_point: r.argmin_point,
            truncation_slack: r.truncation_slack,
            grid_min: r.grid_min,
            limit_margin: r.limit_margin,
            floor: r.floor,
            points_scanned: r.points_scanned,
            points_skipped: r.points_skipped,
        }
    }
}

/// Power-bound results for one battery vector in one role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundEntry {
    pub vector: String,
    pub adjoint: bool,
    pub rows: Vec<PowerBoundRow>,
    /// Max probe value divided by the value at the largest radius.
    pub growth_ratio: Option<f64>,
    pub bounded_on_probe: bool,
}

/// Decay summary for one battery vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySummary {
    pub vector: String,
    pub k_hit: Option<usize>,
    pub sup_ratio: f64,
    pub initial_norm: f64,
    pub halfway_norm: f64,
    pub final_norm: f64,
    /// The norm at k_max lies strictly below the norm at k_max/2.
    pub strictly_decaying: bool,
    pub passed: bool,
}

/// Data series for CSV emission, each sorted by its first column.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeriesSection {
    /// (omega, |1 - G(i omega)|)
    pub scan_c: Option<Vec<(f64, f64)>>,
    /// (theta, |1 - F R(e^{i theta}, T) S|)
    pub scan_d: Option<Vec<(f64, f64)>>,
    /// (r, max over the battery of x-integral + adjoint-integral)
    pub powerbound: Option<Vec<(f64, f64)>>,
    /// (t, ||x(t)||)
    pub trajectory: Option<Vec<(f64, f64)>>,
}

/// Tolerances and grid densities echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsEcho {
    pub separation_tol: f64,
    pub smw_denom_tol: f64,
    pub phi_taylor_cutoff: f64,
    pub imag_axis_tol: f64,
    pub a6_margin: f64,
    pub placement_tol: f64,
    pub m1_grid: usize,
    pub m1_safety: f64,
    pub scan: ScanGrid,
    pub probe: ProbeParams,
    pub decay_k_max: usize,
    pub decay_threshold: f64,
    pub a4_omega_range: [f64; 2],
    pub a4_omega_points: usize,
    pub power_bound_growth_limit: f64,
    pub tau_grid: Vec<f64>,
}

/// The structured output of a pipeline run. Absent sections correspond to
/// stages that were skipped or failed; the reason lives in `stages`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub tool_version: String,
    pub seed: u64,
    /// Certification period used by the post-search stages (tau*/2 unless
    /// overridden).
    pub tau_used: Option<f64>,
    pub settings: SettingsEcho,
    pub stages: Vec<StageRecord>,
    pub assumptions: Option<AssumptionsSection>,
    pub tail_certificate: Option<TailCertificate>,
    pub b_domain: Option<BDomainReport>,
    pub synthesis: Option<SynthesisSection>,
    pub epsilon_c: Option<LowerBoundSummary>,
    pub tau_star: Option<TauStarResult>,
    pub epsilon_d_at_tau: Option<LowerBoundSummary>,
    pub unit_circle: Option<UnitCircleVerdict>,
    pub power_bound: Option<Vec<PowerBoundEntry>>,
    pub decay: Option<Vec<DecaySummary>>,
    pub series: SeriesSection,
    pub all_passed: bool,
}

impl StabilityReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    fn skeleton(desc: &SystemDescription, resolved_eta: Option<f64>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: desc.seed,
            tau_used: None,
            settings: settings_echo(desc, resolved_eta),
            stages: Vec::new(),
            assumptions: None,
            tail_certificate: None,
            b_domain: None,
            synthesis: None,
            epsilon_c: None,
            tau_star: None,
            epsilon_d_at_tau: None,
            unit_circle: None,
            power_bound: None,
            decay: None,
            series: SeriesSection::default(),
            all_passed: false,
        }
    }
}

fn settings_echo(desc: &SystemDescription, resolved_eta: Option<f64>) -> SettingsEcho {
    let mut scan = desc.scan.clone();
    if scan.eta.is_none() {
        scan.eta = resolved_eta;
    }
    SettingsEcho {
        separation_tol: SEPARATION_TOL,
        smw_denom_tol: SMW_DENOM_TOL,
        phi_taylor_cutoff: PHI_TAYLOR_CUTOFF,
        imag_axis_tol: IMAG_AXIS_TOL,
        a6_margin: A6_MARGIN_DEFAULT,
        placement_tol: PLACEMENT_TOL,
        m1_grid: M1_GRID_DEFAULT,
        m1_safety: M1_SAFETY,
        scan,
        probe: desc.probe.clone(),
        decay_k_max: DECAY_K_MAX,
        decay_threshold: DECAY_THRESHOLD,
        a4_omega_range: A4_OMEGA_RANGE,
        a4_omega_points: A4_OMEGA_POINTS,
        power_bound_growth_limit: POWER_BOUND_GROWTH_LIMIT,
        tau_grid: desc.tau_grid.clone(),
    }
}

fn a4_grid() -> Vec<f64> {
    let [lo, hi] = A4_OMEGA_RANGE;
    let mut out = Vec::with_capacity(2 * A4_OMEGA_POINTS);
    for k in 0..A4_OMEGA_POINTS {
        let t = k as f64 / (A4_OMEGA_POINTS - 1) as f64;
        let m = lo * (hi / lo).powf(t);
        out.push(-m);
        out.push(m);
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Runs the full certification pipeline. Construction failures (an invalid
/// description) are errors; certificate failures are recorded in the report
/// with subsequent stages skipped.
pub fn run_pipeline(
    desc: &SystemDescription,
    tau_override: Option<f64>,
) -> Result<StabilityReport> {
    if let Some(tau) = tau_override {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidTau(tau));
        }
    }
    let (sys, synthesis) = build_system(desc)?;
    desc.scan.validate()?;
    let resolved_eta = desc.scan.resolve_eta(&sys).ok();
    let mut report = StabilityReport::skeleton(desc, resolved_eta);
    report.synthesis = synthesis;

    let mut gate_reason: Option<String> = None;

    // --- assumptions -----------------------------------------------------
    let a123 = check_a1_a2_a3(&sys)?;
    let (a5_value, a5_ok) = check_a5(&sys);
    let (a6_value, a6_ok) = check_a6(&sys, A6_MARGIN_DEFAULT);
    let (a4_sup, a4_ok, a4_note) = match check_a4_example(&sys, &a4_grid()) {
        Ok(scan) => (Some(scan.sup_estimate), Some(scan.ok), None),
        Err(e) => (None, Some(false), Some(e.to_string())),
    };
    report.b_domain = Some(verify_b_in_domain(&sys));
    let cert = TailCertificate::for_system(&sys, M1_GRID_DEFAULT)?;
    report.tail_certificate = Some(cert.clone());
    report.assumptions = Some(AssumptionsSection {
        a1_count: a123.a1_count,
        a1_certified: a123.a1_certified,
        a2_ok: a123.a2_ok,
        a3_ok: a123.a3_ok,
        a3_note: a123.a3_note.clone(),
        a4_sup_estimate: a4_sup,
        a4_ok,
        a4_note,
        a5_value,
        a5_ok,
        a6_value,
        a6_margin: A6_MARGIN_DEFAULT,
        a6_ok,
    });
    let mut failed_assumptions = Vec::new();
    if !a123.a1_certified {
        failed_assumptions.push("A1");
    }
    if !a123.a2_ok {
        failed_assumptions.push("A2");
    }
    if !a123.a3_ok {
        failed_assumptions.push("A3");
    }
    if !a4_ok.unwrap_or(false) {
        failed_assumptions.push("A4");
    }
    if !a5_ok {
        failed_assumptions.push("A5");
    }
    if !a6_ok {
        failed_assumptions.push("A6");
    }
    if failed_assumptions.is_empty() {
        report.stages.push(passed("assumptions"));
    } else {
        let detail = format!("failed: {}", failed_assumptions.join(", "));
        report.stages.push(failed("assumptions", detail.clone()));
        gate_reason = Some(format!("assumptions {detail}"));
    }

    // --- epsilon_c -------------------------------------------------------
    if gate_reason.is_none() {
        match scan_epsilon_c(&sys, &desc.scan, &cert) {
            Ok(res) => {
                report.epsilon_c = Some((&res).into());
                report.series.scan_c = Some(res.series);
                report.stages.push(passed("epsilon_c"));
            }
            Err(e @ Error::NegativeMargin { .. }) => {
                report.stages.push(failed("epsilon_c", e.to_string()));
                gate_reason = Some("epsilon_c scan inconclusive".into());
            }
            Err(e) => return Err(e),
        }
    } else {
        report
            .stages
            .push(skipped("epsilon_c", gate_reason.as_deref().unwrap()));
    }

    // --- tau_star ----------------------------------------------------------
    let mut tau_used = None;
    if gate_reason.is_none() {
        match find_tau_star(
            &sys,
            desc.scan.target_ratio,
            &desc.tau_grid,
            &desc.scan,
            &cert,
        ) {
            Ok(res) => {
                tau_used = Some(tau_override.unwrap_or(res.tau_star / 2.0));
                report.tau_star = Some(res);
                report.stages.push(passed("tau_star"));
            }
            Err(e @ (Error::NoAdmissibleTau | Error::NegativeMargin { .. })) => {
                report.stages.push(failed("tau_star", e.to_string()));
                gate_reason = Some("no admissible sampling period".into());
            }
            Err(e) => return Err(e),
        }
    } else {
        report
            .stages
            .push(skipped("tau_star", gate_reason.as_deref().unwrap()));
    }
    report.tau_used = tau_used;

    // --- unit circle --------------------------------------------------------
    if let (None, Some(tau)) = (&gate_reason, tau_used) {
        if let Ok(res) = scan_epsilon_d(&sys, tau, &desc.scan, &cert) {
            report.epsilon_d_at_tau = Some((&res).into());
            report.series.scan_d = Some(res.series);
        }
        let verdict = unit_circle_test(&sys, tau, &desc.scan, &cert)?;
        let ok = verdict.ok;
        let detail = verdict.failure.clone();
        report.unit_circle = Some(verdict);
        if ok {
            report.stages.push(passed("unit_circle"));
        } else {
            report.stages.push(failed(
                "unit_circle",
                detail.unwrap_or_else(|| "unit-circle test failed".into()),
            ));
            gate_reason = Some("unit-circle test failed".into());
        }
    } else {
        report
            .stages
            .push(skipped("unit_circle", gate_reason.as_deref().unwrap()));
    }

    // --- power bound ----------------------------------------------------------
    if let (None, Some(tau)) = (&gate_reason, tau_used) {
        let op = DeltaOperator::new(&sys, tau)?;
        let vectors = battery(&sys, desc.seed);
        let probe = PowerBoundProbe {
            r_values: desc.probe.r_values.clone(),
            n_theta: desc.probe.n_theta,
            test_vectors: vectors.iter().map(|(_, v)| v.clone()).collect(),
        };
        let mut entries = Vec::with_capacity(vectors.len() * 2);
        for (name, x) in &vectors {
            for adjoint in [false, true] {
                let rows = power_bound_integral(&op, &probe, x, adjoint)?;
                let values: Option<Vec<f64>> = rows.iter().map(|r| r.value).collect();
                let (growth_ratio, bounded) = match values {
                    Some(vals) => {
                        let reference = vals[0];
                        let max = vals.iter().cloned().fold(0.0f64, f64::max);
                        let ratio = if reference > 0.0 {
                            max / reference
                        } else if max == 0.0 {
                            1.0
                        } else {
                            f64::INFINITY
                        };
                        (Some(ratio), ratio < POWER_BOUND_GROWTH_LIMIT)
                    }
                    None => (None, false),
                };
                entries.push(PowerBoundEntry {
                    vector: name.clone(),
                    adjoint,
                    rows,
                    growth_ratio,
                    bounded_on_probe: bounded,
                });
            }
        }
        // series: per radius ascending, the battery max of x + adjoint
        let mut radii = desc.probe.r_values.clone();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut pb_series = Vec::with_capacity(radii.len());
        for &r in &radii {
            let mut best: Option<f64> = None;
            for (name, _) in &vectors {
                let find = |adjoint: bool| -> Option<f64> {
                    entries
                        .iter()
                        .find(|e| &e.vector == name && e.adjoint == adjoint)
                        .and_then(|e| {
                            e.rows
                                .iter()
                                .find(|row| row.r == r)
                                .and_then(|row| row.value)
                        })
                };
                if let (Some(x), Some(y)) = (find(false), find(true)) {
                    best = Some(best.map_or(x + y, |b: f64| b.max(x + y)));
                }
            }
            if let Some(v) = best {
                pb_series.push((r, v));
            }
        }
        if !pb_series.is_empty() {
            report.series.powerbound = Some(pb_series);
        }
        let all_bounded = entries.iter().all(|e| e.bounded_on_probe);
        report.power_bound = Some(entries);
        if all_bounded {
            report.stages.push(passed("power_bound"));
        } else {
            report.stages.push(failed(
                "power_bound",
                "a probe value grew beyond the growth limit or failed".into(),
            ));
            gate_reason = Some("power-bound probe failed".into());
        }
    } else {
        report
            .stages
            .push(skipped("power_bound", gate_reason.as_deref().unwrap()));
    }

    // --- decay --------------------------------------------------------------
    if let (None, Some(tau)) = (&gate_reason, tau_used) {
        let op = DeltaOperator::new(&sys, tau)?;
        let vectors = battery(&sys, desc.seed);
        let summaries: Vec<DecaySummary> = par::map_collect(&vectors, |(name, x)| {
            let rec = decay_test(&op, x, DECAY_K_MAX, DECAY_THRESHOLD)
                .expect("battery vectors satisfy decay preconditions");
            let strictly = rec.norms[DECAY_K_MAX] < rec.norms[DECAY_K_MAX / 2];
            DecaySummary {
                vector: name.clone(),
                k_hit: rec.k_hit,
                sup_ratio: rec.sup_ratio,
                initial_norm: rec.norms[0],
                halfway_norm: rec.norms[DECAY_K_MAX / 2],
                final_norm: rec.norms[DECAY_K_MAX],
                strictly_decaying: strictly,
                passed: rec.k_hit.is_some() || strictly,
            }
        });
        let all_ok = summaries.iter().all(|s| s.passed);
        report.decay = Some(summaries);
        if all_ok {
            report.stages.push(passed("decay"));
        } else {
            report.stages.push(failed(
                "decay",
                "a battery vector neither hit the threshold nor decayed".into(),
            ));
        }
    } else {
        report
            .stages
            .push(skipped("decay", gate_reason.as_deref().unwrap()));
    }

    report.all_passed = report
        .stages
        .iter()
        .all(|s| s.status == StageStatus::Passed);
    Ok(report)
}

/// Runs only the transfer scans at one period.
pub fn run_scans(desc: &SystemDescription, tau: f64) -> Result<StabilityReport> {
    let (sys, synthesis) = build_system(desc)?;
    let cert = TailCertificate::for_system(&sys, M1_GRID_DEFAULT)?;
    let resolved_eta = desc.scan.resolve_eta(&sys).ok();
    let mut report = StabilityReport::skeleton(desc, resolved_eta);
    report.synthesis = synthesis;
    report.tau_used = Some(tau);
    report.tail_certificate = Some(cert.clone());
    match scan_epsilon_c(&sys, &desc.scan, &cert) {
        Ok(res) => {
            report.epsilon_c = Some((&res).into());
            report.series.scan_c = Some(res.series);
            report.stages.push(passed("epsilon_c"));
        }
        Err(e @ Error::NegativeMargin { .. }) => {
            report.stages.push(failed("epsilon_c", e.to_string()))
        }
        Err(e) => return Err(e),
    }
    match scan_epsilon_d(&sys, tau, &desc.scan, &cert) {
        Ok(res) => {
            report.epsilon_d_at_tau = Some((&res).into());
            report.series.scan_d = Some(res.series);
            report.stages.push(passed("epsilon_d"));
        }
        Err(e @ (Error::NegativeMargin { .. } | Error::InvalidTau(_))) => {
            report.stages.push(failed("epsilon_d", e.to_string()))
        }
        Err(e) => return Err(e),
    }
    report.all_passed = report
        .stages
        .iter()
        .all(|s| s.status == StageStatus::Passed);
    Ok(report)
}

/// Runs only the trajectory simulation from the first basis state.
pub fn run_simulation(
    desc: &SystemDescription,
    tau: f64,
    samples_per_period: usize,
    steps: usize,
) -> Result<StabilityReport> {
    let (sys, synthesis) = build_system(desc)?;
    let op = DeltaOperator::new(&sys, tau)?;
    let x0 = CoeffVector::basis(sys.truncation(), 0);
    let traj = sampled_trajectory(&op, &x0, samples_per_period, steps)?;
    let resolved_eta = desc.scan.resolve_eta(&sys).ok();
    let mut report = StabilityReport::skeleton(desc, resolved_eta);
    report.synthesis = synthesis;
    report.tau_used = Some(tau);
    report.stages.push(passed("simulate"));
    report.series.trajectory = Some(traj.iter().map(|p| (p.t, p.norm)).collect());
    report.all_passed = true;
    Ok(report)
}

/// Writes one series of the report as CSV (two columns, 13 significant
/// digits, monotone first column). Returns the written path.
pub fn emit_csv(report: &StabilityReport, which: &str, out_dir: &Path) -> Result<PathBuf> {
    let missing = || Error::MissingSeries(which.into());
    let (header, data): (&str, &Vec<(f64, f64)>) = match which {
        "trajectory" => (
            "t,norm",
            report.series.trajectory.as_ref().ok_or_else(missing)?,
        ),
        "scan_c" => (
            "omega,abs_1mG",
            report.series.scan_c.as_ref().ok_or_else(missing)?,
        ),
        "scan_d" => (
            "theta,abs_1mFRS",
            report.series.scan_d.as_ref().ok_or_else(missing)?,
        ),
        "powerbound" => (
            "r,integral_value",
            report.series.powerbound.as_ref().ok_or_else(missing)?,
        ),
        _ => return Err(missing()),
    };
    let mut text = String::with_capacity(32 * (data.len() + 1));
    text.push_str(header);
    text.push('\n');
    for (a, b) in data {
        text.push_str(&format!("{a:.12e},{b:.12e}\n"));
    }
    let path = out_dir.join(format!("{which}.csv"));
    std::fs::write(&path, text).map_err(|e| Error::Io(e.to_string()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_description() -> SystemDescription {
        serde_json::from_value(serde_json::json!({
            "head_eigenvalues": [[1.0, 0.0]],
            "tail": {"type": "reciprocal", "coefficient": 1.0, "start_index": 2},
            "truncation": 24,
            "b": [[1, [1.0, 0.0]], [2, [0.25, 0.0]], [3, [0.111, 0.0]]],
            "f1": {"auto": {"targets": [[-1.0, 0.0]]}},
            "alpha": 0.5,
            "delta": std::f64::consts::FRAC_PI_4,
            "scan": {"n_omega": 128, "n_theta": 256},
            "probe": {"r_values": [1.1, 1.01], "n_theta": 256},
            "tau_grid": [0.1, 0.2, 0.4],
            "seed": 7
        }))
        .unwrap()
    }

    #[test]
    fn description_round_trips() {
        let desc = minimal_description();
        let json = serde_json::to_string(&desc).unwrap();
        let back: SystemDescription = serde_json::from_str(&json).unwrap();
        assert_eq!(desc, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_description(
            r#"{"head_eigenvalues": [], "truncation": 1, "f1": {"explicit": {"entries": []}},
               "alpha": 0.5, "delta": 0.5, "tau_grid": [0.1], "bogus": 1}"#,
        )
        .unwrap_err();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn duplicate_sparse_entries_rejected() {
        let mut desc = minimal_description();
        desc.b.push((1, [2.0, 0.0]));
        assert!(build_system(&desc).is_err());
    }

    #[test]
    fn battery_is_deterministic_and_normalized() {
        let desc = minimal_description();
        let (sys, _) = build_system(&desc).unwrap();
        let a = battery(&sys, 7);
        let b = battery(&sys, 7);
        assert_eq!(a.len(), 8);
        for ((na, va), (nb, vb)) in a.iter().zip(&b) {
            assert_eq!(na, nb);
            assert_eq!(va, vb);
            assert!((va.norm() - 1.0).abs() < 1e-12);
        }
        let c = battery(&sys, 8);
        assert_ne!(a[0].1, c[0].1);
    }

    #[test]
    fn pipeline_on_small_example_passes() {
        let desc = minimal_description();
        let report = run_pipeline(&desc, None).unwrap();
        assert!(report.all_passed, "{:#?}", report.stages);
        assert!(report.tau_star.as_ref().unwrap().tau_star > 0.0);
        assert!(report.series.scan_c.is_some());
        assert!(report.series.scan_d.is_some());
        assert!(report.series.powerbound.is_some());
        assert_eq!(report.tau_used.unwrap(), report.tau_star.unwrap().tau_star / 2.0);
    }

    #[test]
    fn pipeline_gates_on_a2_violation() {
        let mut desc = minimal_description();
        desc.head_eigenvalues = vec![[0.0, 1.0]];
        desc.f1 = FeedbackSpec::Explicit { entries: vec![] };
        desc.b = vec![];
        let report = run_pipeline(&desc, None).unwrap();
        assert!(!report.all_passed);
        assert_eq!(report.stages[0].status, StageStatus::Failed);
        assert!(report.stages[0].detail.as_ref().unwrap().contains("A2"));
        for stage in &report.stages[1..] {
            assert_eq!(stage.status, StageStatus::Skipped);
            assert!(stage.detail.as_ref().unwrap().starts_with("skipped:"));
        }
    }

    #[test]
    fn deterministic_reports() {
        let desc = minimal_description();
        let a = run_pipeline(&desc, None).unwrap().to_json();
        let b = run_pipeline(&desc, None).unwrap().to_json();
        assert_eq!(a, b);
    }
}
