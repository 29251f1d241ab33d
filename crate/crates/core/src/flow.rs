//! Time stepping of the coupled curve / potential system.
//!
//! In polar form the flow law `V = H - u_nu^2` reads
//!
//! ```text
//! rho_t = -(H - u_nu^2) g / rho
//!       = rho_thetatheta / g^2 - (rho^2 + 2 rho_theta^2) / (rho g^2) + u_nu^2 g / rho
//! ```
//!
//! with `g^2 = rho^2 + rho_theta^2`. The IMEX scheme treats the diffusion
//! term implicitly with coefficients frozen at the old step and everything
//! else, including the lagged flux, explicitly.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{CurveDiagnostics, PolarCurve};
use crate::potential::{self, BoundaryTrace, PotentialField, SolverOptions};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Scheme {
    #[default]
    Imex,
    Explicit,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Imex => "imex",
            Scheme::Explicit => "explicit",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "imex" => Ok(Scheme::Imex),
            "explicit" => Ok(Scheme::Explicit),
            other => Err(format!("unknown scheme `{other}` (expected imex or explicit)")),
        }
    }
}

/// Safety factor in the explicit stability bound `dt <= 0.4 h^2 min(rho)^2`.
pub const EXPLICIT_CFL: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig {
    pub n_theta: usize,
    pub m_s: usize,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub solver_tol: f64,
    pub output_every: usize,
    /// Warn when `min(H - u_nu^2)` drops below `-condition_margin`.
    pub condition_margin: f64,
    pub exec: Exec,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            n_theta: 256,
            m_s: 128,
            dt: 1e-3,
            t_end: 50.0,
            scheme: Scheme::Imex,
            solver_tol: potential::DEFAULT_TOL,
            output_every: 100,
            condition_margin: 5e-3,
            exec: Exec::default(),
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_theta < crate::geometry::MIN_NODES || self.n_theta % 2 != 0 {
            return bad(format!("n_theta must be even and >= 16, got {}", self.n_theta));
        }
        if self.m_s < potential::MIN_LAYERS {
            return bad(format!("m_s must be >= {}, got {}", potential::MIN_LAYERS, self.m_s));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if !(self.solver_tol > 0.0) {
            return bad(format!("solver_tol must be positive, got {}", self.solver_tol));
        }
        if self.output_every == 0 {
            return bad("output_every must be at least 1".into());
        }
        if !(self.condition_margin > 0.0) {
            return bad(format!("condition_margin must be positive, got {}", self.condition_margin));
        }
        Ok(())
    }

    /// Largest stable explicit step for a curve with the given minimum radius.
    pub fn explicit_dt_limit(&self, min_rho: f64) -> f64 {
        let h = 2.0 * std::f64::consts::PI / self.n_theta as f64;
        EXPLICIT_CFL * h * h * min_rho * min_rho
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions::new(self.m_s, self.solver_tol).with_exec(self.exec)
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub curve: PolarCurve,
    pub trace: BoundaryTrace,
    pub diagnostics: CurveDiagnostics,
}

impl FlowState {
    fn new(t: f64, curve: PolarCurve, trace: BoundaryTrace) -> Self {
        let diagnostics = CurveDiagnostics::new(&curve, &trace.u_nu);
        FlowState { t, curve, trace, diagnostics }
    }

    /// Pairs a curve with its freshly computed trace.
    pub fn solve(t: f64, curve: PolarCurve, config: &FlowConfig) -> Result<Self> {
        let (state, _) = solve_state(t, curve, &config.solver_options(), None)?;
        Ok(state)
    }
}

/// `min_j (H - u_nu^2)` of a state.
pub fn check_condition(state: &FlowState) -> f64 {
    state.diagnostics.min_condition
}

fn solve_state(
    t: f64,
    curve: PolarCurve,
    opts: &SolverOptions,
    guess: Option<&PotentialField>,
) -> Result<(FlowState, PotentialField)> {
    let field = potential::solve_with(&curve, opts, guess)?;
    let trace = potential::normal_derivative(&field, &curve)?;
    Ok((FlowState::new(t, curve, trace), field))
}

/// Pointwise `rho_t` of the flow law for the given curve and trace.
pub fn evolution_rhs(curve: &PolarCurve, trace: &BoundaryTrace) -> Result<Vec<f64>> {
    let (diffusion, rest) = split_rhs(curve, trace)?;
    let (_, d2) = curve.derivatives();
    Ok(diffusion.iter().zip(&d2).zip(&rest).map(|((d, r2), f)| d * r2 + f).collect())
}

/// Splits `rho_t = D rho_thetatheta + F` into `(D, F)`.
fn split_rhs(curve: &PolarCurve, trace: &BoundaryTrace) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = curve.n_theta();
    if trace.u_nu.len() != n {
        return Err(Error::GridMismatch { left: n, right: trace.u_nu.len() });
    }
    let (d1, _) = curve.derivatives();
    let mut diffusion = Vec::with_capacity(n);
    let mut rest = Vec::with_capacity(n);
    for ((&r, &rt), &flux_sq) in curve.rho().iter().zip(&d1).zip(&trace.u_nu_sq) {
        let g2 = r * r + rt * rt;
        diffusion.push(1.0 / g2);
        rest.push(-(r * r + 2.0 * rt * rt) / (r * g2) + flux_sq * g2.sqrt() / r);
    }
    Ok((diffusion, rest))
}

/// Solves the periodic tridiagonal system
/// `lower[j] x[j-1] + diag[j] x[j] + upper[j] x[j+1] = rhs[j]`
/// by the Sherman-Morrison correction of a Thomas sweep.
pub(crate) fn solve_cyclic_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Vec<f64> {
    let n = diag.len();
    let gamma = -diag[0];
    let alpha = upper[n - 1];
    let beta = lower[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    let thomas = |d: &mut Vec<f64>| {
        let mut c = vec![0.0; n];
        let mut den = b[0];
        c[0] = upper[0] / den;
        d[0] /= den;
        for j in 1..n {
            den = b[j] - lower[j] * c[j - 1];
            c[j] = upper[j] / den;
            d[j] = (d[j] - lower[j] * d[j - 1]) / den;
        }
        for j in (0..n - 1).rev() {
            d[j] -= c[j] * d[j + 1];
        }
    };
    let mut x = rhs.to_vec();
    thomas(&mut x);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    thomas(&mut u);
    let factor = (x[0] + beta * x[n - 1] / gamma) / (1.0 + u[0] + beta * u[n - 1] / gamma);
    x.iter().zip(&u).map(|(xi, ui)| xi - factor * ui).collect()
}

/// Curve after one time step, before the potential is refreshed.
fn advance_curve(state: &FlowState, config: &FlowConfig) -> Result<Vec<f64>> {
    let curve = &state.curve;
    let dt = config.dt;
    let next: Vec<f64> = match config.scheme {
        Scheme::Explicit => {
            let limit = config.explicit_dt_limit(curve.min_rho());
            if dt > limit {
                return Err(Error::NumericalFailure {
                    t: state.t,
                    detail: format!("explicit step {dt} exceeds stability limit {limit:e}"),
                });
            }
            let rhs = evolution_rhs(curve, &state.trace)?;
            curve.rho().iter().zip(&rhs).map(|(r, v)| r + dt * v).collect()
        }
        Scheme::Imex => {
            let (diffusion, rest) = split_rhs(curve, &state.trace)?;
            let h = curve.dtheta();
            let off: Vec<f64> = diffusion.iter().map(|d| -dt * d / (h * h)).collect();
            let diag: Vec<f64> = off.iter().map(|o| 1.0 - 2.0 * o).collect();
            let rhs: Vec<f64> = curve.rho().iter().zip(&rest).map(|(r, f)| r + dt * f).collect();
            solve_cyclic_tridiagonal(&off, &diag, &off, &rhs)
        }
    };
    let t = state.t + dt;
    if let Some(j) = next.iter().position(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure {
            t,
            detail: format!("non-finite radius at node {j}"),
        });
    }
    let min_rho = next.iter().copied().fold(f64::INFINITY, f64::min);
    let limit = 1.0 + potential::DEFAULT_GAP;
    if min_rho <= limit {
        return Err(Error::GapViolation { min_rho, limit });
    }
    Ok(next)
}

/// One step from `state` with a cold potential solve.
pub fn step(state: &FlowState, config: &FlowConfig) -> Result<FlowState> {
    config.validate()?;
    let next = advance_curve(state, config)?;
    FlowState::solve(state.t + config.dt, PolarCurve::new(next)?, config)
}

/// Condition dip below `-condition_margin` observed during a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionWarning {
    pub t: f64,
    pub min_condition: f64,
}

/// Stateful integrator that warm-starts each potential solve from the last.
pub struct Flow {
    config: FlowConfig,
    opts: SolverOptions,
    state: FlowState,
    field: PotentialField,
    steps_taken: usize,
    warnings: Vec<ConditionWarning>,
}

impl Flow {
    pub fn new(initial: PolarCurve, config: FlowConfig) -> Result<Self> {
        config.validate()?;
        if initial.n_theta() != config.n_theta {
            return Err(Error::GridMismatch { left: config.n_theta, right: initial.n_theta() });
        }
        if config.scheme == Scheme::Explicit {
            let limit = config.explicit_dt_limit(initial.min_rho());
            if config.dt > limit {
                return Err(Error::Config(format!(
                    "explicit scheme needs dt <= {limit:e}, got {}",
                    config.dt
                )));
            }
        }
        let opts = config.solver_options();
        let (state, field) = solve_state(0.0, initial, &opts, None)?;
        Ok(Flow { config, opts, state, field, steps_taken: 0, warnings: Vec::new() })
    }

    pub fn state(&self) -> &FlowState {
        &self.state
    }

    pub fn field(&self) -> &PotentialField {
        &self.field
    }

    pub fn warnings(&self) -> &[ConditionWarning] {
        &self.warnings
    }

    pub fn step(&mut self) -> Result<()> {
        let next = advance_curve(&self.state, &self.config)?;
        let t = (self.steps_taken + 1) as f64 * self.config.dt;
        let (state, field) = solve_state(t, PolarCurve::new(next)?, &self.opts, Some(&self.field))?;
        if state.diagnostics.min_condition < -self.config.condition_margin {
            self.warnings.push(ConditionWarning { t, min_condition: state.diagnostics.min_condition });
        }
        self.state = state;
        self.field = field;
        self.steps_taken += 1;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowFailure {
    pub t: f64,
    pub error: Error,
}

/// Sampled trajectory of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowRun {
    pub states: Vec<FlowState>,
    pub warnings: Vec<ConditionWarning>,
    pub failure: Option<FlowFailure>,
}

impl FlowRun {
    pub fn initial(&self) -> &FlowState {
        &self.states[0]
    }

    pub fn last(&self) -> &FlowState {
        self.states.last().expect("a run holds at least its initial state")
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }
}

/// Integrates to `t_end`, sampling every `output_every` steps and at the end.
///
/// Refuses to start when the initial curve violates `H > u_nu^2` unless
/// `force` is set. Step failures end the run and are recorded, not returned.
pub fn run(initial: PolarCurve, config: &FlowConfig, force: bool) -> Result<FlowRun> {
    let mut flow = Flow::new(initial, *config)?;
    let min_condition = check_condition(flow.state());
    if !force && !(min_condition > 0.0) {
        return Err(Error::ConditionViolated { min_condition });
    }
    let steps = config.steps();
    let mut states = vec![flow.state().clone()];
    let mut failure = None;
    for k in 1..=steps {
        if let Err(error) = flow.step() {
            failure = Some(FlowFailure { t: k as f64 * config.dt, error });
            break;
        }
        if k % config.output_every == 0 || k == steps {
            states.push(flow.state().clone());
        }
    }
    if failure.is_some() && states.last().map(|s| s.t) != Some(flow.state().t) {
        states.push(flow.state().clone());
    }
    Ok(FlowRun { states, warnings: flow.warnings, failure })
}
