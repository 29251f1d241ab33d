//! Numerical experiments checking the qualitative theory of the flow:
//! comparison, preservation of `H > u_nu^2`, convexity, the a priori
//! bounds and convergence to the stationary disk.
//!
//! Each check yields a [`TheoremReport`] with the worst-case value seen over
//! all sampled states and the limit it is held against.

use std::fmt;
use std::io::Write;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flow::{run, FlowConfig, FlowRun};
use crate::geometry::PolarCurve;
use crate::manifest::flow_section;
use crate::radial::{r_opt, radial_radius_at};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TheoremId {
    T2_1Comparison,
    T3_1Preservation,
    C3_2Convexity,
    P4_1Containment,
    P4_2Distance,
    P4_3LipschitzPotential,
    P4_4LipschitzCurve,
    T1_1Convergence,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::T2_1Comparison,
        TheoremId::T3_1Preservation,
        TheoremId::C3_2Convexity,
        TheoremId::P4_1Containment,
        TheoremId::P4_2Distance,
        TheoremId::P4_3LipschitzPotential,
        TheoremId::P4_4LipschitzCurve,
        TheoremId::T1_1Convergence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::T2_1Comparison => "T2_1_comparison",
            TheoremId::T3_1Preservation => "T3_1_preservation",
            TheoremId::C3_2Convexity => "C3_2_convexity",
            TheoremId::P4_1Containment => "P4_1_containment",
            TheoremId::P4_2Distance => "P4_2_distance",
            TheoremId::P4_3LipschitzPotential => "P4_3_lipschitz_potential",
            TheoremId::P4_4LipschitzCurve => "P4_4_lipschitz_curve",
            TheoremId::T1_1Convergence => "T1_1_convergence",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Direction of a report's inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predicate {
    /// `measured > limit - tolerance`
    AtLeast,
    /// `measured < limit + tolerance`
    AtMost,
}

impl Predicate {
    pub fn holds(self, measured: f64, limit: f64, tolerance: f64) -> bool {
        match self {
            Predicate::AtLeast => measured > limit - tolerance,
            Predicate::AtMost => measured < limit + tolerance,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Predicate::AtLeast => "at_least",
            Predicate::AtMost => "at_most",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremReport {
    pub theorem_id: TheoremId,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
    pub tolerance: f64,
    pub predicate: Predicate,
    pub config: FlowConfig,
}

impl TheoremReport {
    fn new(
        theorem_id: TheoremId,
        measured: f64,
        limit: f64,
        tolerance: f64,
        predicate: Predicate,
        config: &FlowConfig,
    ) -> Self {
        TheoremReport {
            theorem_id,
            passed: predicate.holds(measured, limit, tolerance),
            measured,
            limit,
            tolerance,
            predicate,
            config: *config,
        }
    }

    pub fn config_hash(&self) -> String {
        config_hash(&self.config)
    }
}

/// First 16 hex digits of the SHA-256 of the `[flow]` section.
pub fn config_hash(config: &FlowConfig) -> String {
    Sha256::digest(flow_section(config).as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Thresholds used by the checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Ordering slack relative to the largest radius.
    pub containment_rel: f64,
    /// Allowed dip of `min(H - u_nu^2)` below zero.
    pub condition: f64,
    /// Allowed shortfall against the radial barrier.
    pub barrier: f64,
    /// Slack on the flux bound `1 / (R_opt - 1)`.
    pub flux: f64,
    /// Final `max |rho - R_opt|`.
    pub convergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            containment_rel: 1e-6,
            condition: 5e-3,
            barrier: 1e-3,
            flux: 1e-2,
            convergence: 1e-2,
        }
    }
}

fn flow(initial: PolarCurve, config: &FlowConfig) -> Result<FlowRun> {
    let out = run(initial, config, true)?;
    match out.failure {
        Some(f) => Err(f.error),
        None => Ok(out),
    }
}

fn min_over(run: &FlowRun, f: impl Fn(&crate::flow::FlowState) -> f64) -> f64 {
    run.states.iter().map(f).fold(f64::INFINITY, f64::min)
}

fn max_over(run: &FlowRun, f: impl Fn(&crate::flow::FlowState) -> f64) -> f64 {
    run.states.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest `outer - inner` over matched samples of two runs.
pub fn comparison_report(
    inner: &FlowRun,
    outer: &FlowRun,
    config: &FlowConfig,
    tol: &Tolerances,
) -> Result<TheoremReport> {
    let mut worst = f64::INFINITY;
    let mut scale: f64 = 0.0;
    for (a, b) in inner.states.iter().zip(&outer.states) {
        worst = worst.min(b.curve.min_gap(&a.curve)?);
        scale = scale.max(b.curve.max_rho()).max(a.curve.max_rho());
    }
    Ok(TheoremReport::new(
        TheoremId::T2_1Comparison,
        worst,
        0.0,
        tol.containment_rel * scale,
        Predicate::AtLeast,
        config,
    ))
}

pub fn verify_comparison(
    inner: &PolarCurve,
    outer: &PolarCurve,
    config: &FlowConfig,
    tol: &Tolerances,
) -> Result<TheoremReport> {
    if !outer.contains(inner)? {
        return Err(Error::Precondition("inner curve is not contained in outer curve".into()));
    }
    let (a, b) = config
        .exec
        .join(|| flow(inner.clone(), config), || flow(outer.clone(), config));
    comparison_report(&a?, &b?, config, tol)
}

pub fn preservation_report(run: &FlowRun, config: &FlowConfig, tol: &Tolerances) -> TheoremReport {
    TheoremReport::new(
        TheoremId::T3_1Preservation,
        min_over(run, |s| s.diagnostics.min_condition),
        0.0,
        tol.condition,
        Predicate::AtLeast,
        config,
    )
}

pub fn verify_preservation(
    initial: &PolarCurve,
    config: &FlowConfig,
    tol: &Tolerances,
) -> Result<TheoremReport> {
    Ok(preservation_report(&flow(initial.clone(), config)?, config, tol))
}

pub fn convexity_report(run: &FlowRun, config: &FlowConfig) -> TheoremReport {
    TheoremReport::new(
        TheoremId::C3_2Convexity,
        min_over(run, |s| s.diagnostics.min_curvature),
        0.0,
        0.0,
        Predicate::AtLeast,
        config,
    )
}

/// Radius of the disk barrier from `min rho(0)` at each sampled time.
pub fn barrier_radii(run: &FlowRun, config: &FlowConfig) -> Result<Vec<f64>> {
    radial_radius_at(run.initial().curve.min_rho(), &run.times(), config.dt)
}

/// Lipschitz cap from the tangent-line construction around `B_{R_opt}`:
/// near pairs are controlled by the slope of rays against the tangent
/// lines from the farthest boundary point, far pairs (angle at least
/// `theta_0 / 2`) by the initial diameter.
pub fn lipschitz_cap(diameter: f64, max_rho: f64, delta: f64) -> f64 {
    let r = r_opt();
    if !(delta > 0.0) {
        return f64::INFINITY;
    }
    let theta0 = 2.0 * (r / (r + delta)).acos();
    let near = max_rho * (max_rho * max_rho - r * r).max(0.0).sqrt() / r;
    near.max(2.0 * diameter / theta0)
}

/// Reports for the containment, distance, flux and Lipschitz bounds.
pub fn bounds_reports(run: &FlowRun, config: &FlowConfig, tol: &Tolerances) -> Result<Vec<TheoremReport>> {
    let r = r_opt();
    let barrier = barrier_radii(run, config)?;
    let lambda = min_over(run, |s| s.curve.min_rho() / r);
    let shortfall = run
        .states
        .iter()
        .zip(&barrier)
        .map(|(s, rb)| s.curve.distance_to_ball(r) - (rb - r))
        .fold(f64::INFINITY, f64::min);
    let flux = max_over(run, |s| s.trace.max_abs());
    let lip = max_over(run, |s| s.diagnostics.lipschitz_norm);
    let init = &run.initial().curve;
    let delta = barrier.last().copied().unwrap_or(init.min_rho()) - r;
    let cap = lipschitz_cap(init.diameter(), init.max_rho(), delta);
    Ok(vec![
        TheoremReport::new(TheoremId::P4_1Containment, lambda, 1.0, 0.0, Predicate::AtLeast, config),
        TheoremReport::new(TheoremId::P4_2Distance, shortfall, 0.0, tol.barrier, Predicate::AtLeast, config),
        TheoremReport::new(
            TheoremId::P4_3LipschitzPotential,
            flux,
            1.0 / (r - 1.0),
            tol.flux,
            Predicate::AtMost,
            config,
        ),
        TheoremReport::new(TheoremId::P4_4LipschitzCurve, lip, cap, 0.0, Predicate::AtMost, config),
    ])
}

pub fn verify_bounds(
    initial: &PolarCurve,
    config: &FlowConfig,
    tol: &Tolerances,
) -> Result<Vec<TheoremReport>> {
    bounds_reports(&flow(initial.clone(), config)?, config, tol)
}

pub fn convergence_report(run: &FlowRun, config: &FlowConfig, tol: &Tolerances) -> TheoremReport {
    let r = r_opt();
    let dev = run.last().curve.rho().iter().fold(0.0, |m: f64, v| m.max((v - r).abs()));
    TheoremReport::new(TheoremId::T1_1Convergence, dev, tol.convergence, 0.0, Predicate::AtMost, config)
}

pub fn verify_convergence(
    initial: &PolarCurve,
    config: &FlowConfig,
    tol: &Tolerances,
) -> Result<TheoremReport> {
    Ok(convergence_report(&flow(initial.clone(), config)?, config, tol))
}

/// Inner partner for the comparison check: the ring width scaled by 0.9.
pub fn comparison_partner(curve: &PolarCurve) -> Result<PolarCurve> {
    PolarCurve::new(curve.rho().iter().map(|r| 1.0 + 0.9 * (r - 1.0)).collect())
}

/// Full suite on one initial curve: exactly one report per theorem, in
/// [`TheoremId::ALL`] order.
pub fn verify_suite(
    initial: &PolarCurve,
    config: &FlowConfig,
    tol: &Tolerances,
) -> Result<Vec<TheoremReport>> {
    let inner = comparison_partner(initial)?;
    let (main, partner) = config
        .exec
        .join(|| flow(initial.clone(), config), || flow(inner, config));
    let (main, partner) = (main?, partner?);
    let mut reports = vec![
        comparison_report(&partner, &main, config, tol)?,
        preservation_report(&main, config, tol),
        convexity_report(&main, config),
    ];
    reports.extend(bounds_reports(&main, config, tol)?);
    reports.push(convergence_report(&main, config, tol));
    reports.sort_by_key(|r| r.theorem_id);
    Ok(reports)
}

pub fn all_passed(reports: &[TheoremReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

/// One `[id]` block per report.
pub fn write_report_text<W: Write>(reports: &[TheoremReport], mut out: W) -> Result<()> {
    for (k, r) in reports.iter().enumerate() {
        if k > 0 {
            writeln!(out)?;
        }
        writeln!(out, "[{}]", r.theorem_id)?;
        writeln!(out, "passed = {}", r.passed)?;
        writeln!(out, "measured = {:.12e}", r.measured)?;
        writeln!(out, "limit = {:.12e}", r.limit)?;
        writeln!(out, "tolerance = {:.12e}", r.tolerance)?;
        writeln!(out, "predicate = {}", r.predicate.as_str())?;
        writeln!(out, "config_hash = {}", r.config_hash())?;
    }
    Ok(())
}

pub fn write_report_csv<W: Write>(reports: &[TheoremReport], mut out: W) -> Result<()> {
    writeln!(out, "theorem_id,passed,measured,limit,tolerance,predicate,config_hash")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{:.12e},{:.12e},{:.12e},{},{}",
            r.theorem_id,
            r.passed,
            r.measured,
            r.limit,
            r.tolerance,
            r.predicate.as_str(),
            r.config_hash()
        )?;
    }
    Ok(())
}
