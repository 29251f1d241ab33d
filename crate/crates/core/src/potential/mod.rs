//! Capacity potential of the ring between the unit circle and the curve:
//! harmonic, `u = 1` on the unit circle and `u = 0` on the curve.
//!
//! The ring is mapped to the fixed rectangle `[0,1] x S^1` by
//! `r = 1 + s (rho(theta) - 1)` and discretized by finite differences
//! (see [`operator`]). The resulting nonsymmetric system is solved by GMRES
//! preconditioned with the exact inverse for the mean-radius circle.

mod gmres;
pub(crate) mod operator;
mod precond;

use std::io::Write;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::PolarCurve;
use crate::radial::radial_potential;

use operator::MappedLaplacian;
use precond::CirclePreconditioner;

pub const DEFAULT_GAP: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const MIN_LAYERS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Radial layers of the mapped grid.
    pub m_s: usize,
    /// Relative residual target.
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    /// Required clearance `min rho - 1`.
    pub gap: f64,
    pub exec: Exec,
}

impl SolverOptions {
    pub fn new(m_s: usize, tol: f64) -> Self {
        SolverOptions {
            m_s,
            tol,
            restart: 40,
            max_iter: 2000,
            gap: DEFAULT_GAP,
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

/// Discrete potential `u[i][j]` at `(s_i, theta_j)`, `s_i = i / m_s`,
/// boundary layers included.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialField {
    m_s: usize,
    n_theta: usize,
    values: Vec<f64>,
    /// Relative residual reached by the linear solver.
    pub residual: f64,
    pub iterations: usize,
}

impl PotentialField {
    pub fn m_s(&self) -> usize {
        self.m_s
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_theta + j]
    }

    /// Potential at physical radius `r` on the ray through node `j`,
    /// linearly interpolated in `s`; 1 inside the unit disk, 0 outside the curve.
    pub fn sample_ray(&self, curve: &PolarCurve, j: usize, r: f64) -> f64 {
        let q = curve.rho()[j] - 1.0;
        let s = (r - 1.0) / q;
        if s <= 0.0 {
            return 1.0;
        }
        if s >= 1.0 {
            return 0.0;
        }
        let x = s * self.m_s as f64;
        let i = (x.floor() as usize).min(self.m_s - 1);
        let w = x - i as f64;
        (1.0 - w) * self.at(i, j) + w * self.at(i + 1, j)
    }

    /// Writes `s,theta,u` rows in `(i, j)` order with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "s,theta,u")?;
        let dt = 2.0 * std::f64::consts::PI / self.n_theta as f64;
        for i in 0..=self.m_s {
            let s = i as f64 / self.m_s as f64;
            for j in 0..self.n_theta {
                writeln!(out, "{:.16e},{:.16e},{:.16e}", s, j as f64 * dt, self.at(i, j))?;
            }
        }
        Ok(())
    }

    fn interior(&self) -> &[f64] {
        &self.values[self.n_theta..self.m_s * self.n_theta]
    }
}

/// Outward normal derivative of the potential on the curve.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace {
    pub u_nu: Vec<f64>,
    pub u_nu_sq: Vec<f64>,
}

impl BoundaryTrace {
    pub fn new(u_nu: Vec<f64>) -> Self {
        let u_nu_sq = u_nu.iter().map(|v| v * v).collect();
        BoundaryTrace { u_nu, u_nu_sq }
    }

    /// Trace of the exact potential of a disk of the given radius.
    pub fn radial(n_theta: usize, radius: f64) -> Self {
        Self::new(vec![crate::radial::radial_flux(radius); n_theta])
    }

    pub fn max_abs(&self) -> f64 {
        self.u_nu.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn rotated(&self, k: usize) -> Self {
        let mut u = self.u_nu.clone();
        let n = u.len();
        u.rotate_right(k % n);
        Self::new(u)
    }
}

/// Solves with default options.
pub fn solve_potential(curve: &PolarCurve, m_s: usize, tol: f64) -> Result<PotentialField> {
    solve_with(curve, &SolverOptions::new(m_s, tol), None)
}

/// Solves the potential on `curve`, optionally warm-started from a field on
/// the same grid.
pub fn solve_with(
    curve: &PolarCurve,
    opts: &SolverOptions,
    guess: Option<&PotentialField>,
) -> Result<PotentialField> {
    let m = opts.m_s;
    if m < MIN_LAYERS {
        return Err(Error::Config(format!("m_s must be at least {MIN_LAYERS}, got {m}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("solver tolerance must be positive, got {}", opts.tol)));
    }
    let min_rho = curve.min_rho();
    if min_rho <= 1.0 + opts.gap {
        return Err(Error::GapViolation { min_rho, limit: 1.0 + opts.gap });
    }
    let n = curve.n_theta();
    let op = MappedLaplacian::new(curve, m);
    let pc = CirclePreconditioner::new(n, m, curve.mean_rho() - 1.0, curve.dtheta());
    let b = op.rhs();
    let mut x = match guess {
        Some(g) if g.m_s == m && g.n_theta == n => g.interior().to_vec(),
        _ => vec![0.0; op.len()],
    };
    let exec = opts.exec;
    let out = gmres::gmres(
        |v, y| op.apply(v, y, exec),
        |v, z| pc.apply(v, z, exec),
        &b,
        &mut x,
        opts.tol,
        opts.restart,
        opts.max_iter,
        exec,
    );
    if !out.converged || !out.residual.is_finite() {
        return Err(Error::SolverDiverged { iterations: out.iterations, residual: out.residual });
    }
    let mut values = Vec::with_capacity((m + 1) * n);
    values.extend(std::iter::repeat_n(1.0, n));
    values.extend_from_slice(&x);
    values.extend(std::iter::repeat_n(0.0, n));
    Ok(PotentialField {
        m_s: m,
        n_theta: n,
        values,
        residual: out.residual,
        iterations: out.iterations,
    })
}

/// `u_nu = U_s(1, theta) |grad s|` with a one-sided second-order `U_s`.
pub fn normal_derivative(field: &PotentialField, curve: &PolarCurve) -> Result<BoundaryTrace> {
    let m = field.m_s;
    if m < 2 {
        return Err(Error::Config(format!("need at least 2 radial layers, got {m}")));
    }
    if field.n_theta != curve.n_theta() {
        return Err(Error::GridMismatch { left: field.n_theta, right: curve.n_theta() });
    }
    let h_s = 1.0 / m as f64;
    let (d1, _) = curve.derivatives();
    let u_nu = (0..curve.n_theta())
        .map(|j| {
            let u_s = (3.0 * field.at(m, j) - 4.0 * field.at(m - 1, j) + field.at(m - 2, j))
                / (2.0 * h_s);
            let rho = curve.rho()[j];
            u_s * (1.0 + (d1[j] / rho).powi(2)).sqrt() / (rho - 1.0)
        })
        .collect();
    Ok(BoundaryTrace::new(u_nu))
}

/// Max-norm errors of the potential and its trace against the exact disk
/// solution, for a circular `curve`.
pub fn radial_errors(curve: &PolarCurve, opts: &SolverOptions) -> Result<(f64, f64)> {
    let radius = circle_radius(curve)?;
    let field = solve_with(curve, opts, None)?;
    let m = field.m_s;
    let mut err_u: f64 = 0.0;
    for i in 0..=m {
        let exact = radial_potential(radius, 1.0 + (i as f64 / m as f64) * (radius - 1.0));
        for j in 0..field.n_theta {
            err_u = err_u.max((field.at(i, j) - exact).abs());
        }
    }
    let trace = normal_derivative(&field, curve)?;
    let flux = crate::radial::radial_flux(radius);
    let err_flux = trace.u_nu.iter().fold(0.0, |e: f64, v| e.max((v - flux).abs()));
    Ok((err_u, err_flux))
}

fn circle_radius(curve: &PolarCurve) -> Result<f64> {
    let (lo, hi) = (curve.min_rho(), curve.max_rho());
    if hi - lo > 1e-12 * hi {
        return Err(Error::Precondition("convergence study needs a circle".into()));
    }
    Ok(curve.mean_rho())
}

/// Observed order of the potential error under halving of the radial step,
/// from `levels` solves at `m_s = 16, 32, ...`.
pub fn convergence_order(curve: &PolarCurve, levels: usize) -> Result<f64> {
    if levels < 3 {
        return Err(Error::Precondition(format!("need at least 3 levels, got {levels}")));
    }
    let errors = (0..levels)
        .map(|l| radial_errors(curve, &SolverOptions::new(16 << l, 1e-12)).map(|e| e.0))
        .collect::<Result<Vec<_>>>()?;
    Ok((errors[levels - 2] / errors[levels - 1]).log2())
}
