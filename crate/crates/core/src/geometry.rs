//! Star-shaped curves as polar graphs `r = rho(theta)` over a uniform
//! periodic grid, and the geometric quantities the flow needs.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest admissible number of angular nodes.
pub const MIN_NODES: usize = 16;

/// Closed curve given by radial samples at `theta_j = 2 pi j / n`.
///
/// Invariants: `n >= 16`, `n` even, every radius finite and `> 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarCurve {
    rho: Vec<f64>,
}

impl PolarCurve {
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        let n = rho.len();
        if n < MIN_NODES || n % 2 != 0 {
            return Err(Error::InvalidCurve(format!(
                "need an even number of nodes >= {MIN_NODES}, got {n}"
            )));
        }
        if let Some((j, r)) = rho.iter().enumerate().find(|(_, r)| !r.is_finite() || **r <= 1.0) {
            return Err(Error::InvalidCurve(format!(
                "radius at node {j} is {r}; curve must strictly enclose the unit disk"
            )));
        }
        Ok(PolarCurve { rho })
    }

    pub fn circle(n_theta: usize, radius: f64) -> Result<Self> {
        Self::new(vec![radius; n_theta])
    }

    /// Samples `f(theta)` at the grid nodes.
    pub fn from_fn(n_theta: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = 2.0 * PI / n_theta as f64;
        Self::new((0..n_theta).map(|j| f(j as f64 * dt)).collect())
    }

    /// `rho(theta) = base + sum amplitude * cos(k theta + phase)`.
    pub fn fourier(n_theta: usize, base: f64, modes: &[(u32, f64, f64)]) -> Result<Self> {
        Self::from_fn(n_theta, |t| {
            base + modes
                .iter()
                .map(|&(k, a, p)| a * (k as f64 * t + p).cos())
                .sum::<f64>()
        })
    }

    pub fn n_theta(&self) -> usize {
        self.rho.len()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn into_rho(self) -> Vec<f64> {
        self.rho
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_theta() as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_rho(&self) -> f64 {
        self.rho.iter().sum::<f64>() / self.n_theta() as f64
    }

    /// Shifts samples so that node `j` of the result holds node `j - k` of `self`.
    pub fn rotated(&self, k: usize) -> Self {
        let mut rho = self.rho.clone();
        rho.rotate_right(k % self.n_theta());
        PolarCurve { rho }
    }

    /// Periodic second-order central differences `(rho_theta, rho_thetatheta)`.
    pub fn derivatives(&self) -> (Vec<f64>, Vec<f64>) {
        periodic_derivatives(&self.rho, self.dtheta())
    }

    /// Signed curvature, positive on convex arcs.
    pub fn curvature(&self) -> Vec<f64> {
        let (d1, d2) = self.derivatives();
        self.rho
            .iter()
            .zip(d1.iter().zip(&d2))
            .map(|(&r, (&rt, &rtt))| {
                let g2 = r * r + rt * rt;
                (r * r + 2.0 * rt * rt - r * rtt) / (g2 * g2.sqrt())
            })
            .collect()
    }

    /// Outward unit normals and metric factors `g = sqrt(rho^2 + rho_theta^2)`.
    pub fn normal_and_metric(&self) -> (Vec<[f64; 2]>, Vec<f64>) {
        let (d1, _) = self.derivatives();
        let dt = self.dtheta();
        let mut normals = Vec::with_capacity(self.n_theta());
        let mut metric = Vec::with_capacity(self.n_theta());
        for (j, (&r, &rt)) in self.rho.iter().zip(&d1).enumerate() {
            let g = r.hypot(rt);
            let (s, c) = (j as f64 * dt).sin_cos();
            // rho e_r - rho_theta e_theta, with e_r = (c, s), e_theta = (-s, c)
            normals.push([(r * c + rt * s) / g, (r * s - rt * c) / g]);
            metric.push(g);
        }
        (normals, metric)
    }

    /// Enclosed area and perimeter by the periodic rectangle rule.
    pub fn area_length(&self) -> (f64, f64) {
        let dt = self.dtheta();
        let (d1, _) = self.derivatives();
        let area = 0.5 * self.rho.iter().map(|r| r * r).sum::<f64>() * dt;
        let length = self.rho.iter().zip(&d1).map(|(r, rt)| r.hypot(*rt)).sum::<f64>() * dt;
        (area, length)
    }

    /// Discrete Lipschitz seminorm `max |rho_theta|`.
    pub fn lipschitz_norm(&self) -> f64 {
        self.derivatives().0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_strictly_convex(&self, margin: f64) -> bool {
        self.curvature().iter().all(|&h| h > margin)
    }

    /// Whether the domain bounded by `inner` lies inside the one bounded by `self`.
    pub fn contains(&self, inner: &PolarCurve) -> Result<bool> {
        Ok(self.min_gap(inner)? >= 0.0)
    }

    /// `min_j (self.rho[j] - inner.rho[j])`.
    pub fn min_gap(&self, inner: &PolarCurve) -> Result<f64> {
        self.check_grid(inner)?;
        Ok(self
            .rho
            .iter()
            .zip(&inner.rho)
            .map(|(o, i)| o - i)
            .fold(f64::INFINITY, f64::min))
    }

    /// Radial clearance `min_j rho[j] - radius`; positive iff the closed
    /// disk of that radius sits strictly inside.
    pub fn distance_to_ball(&self, radius: f64) -> f64 {
        self.min_rho() - radius
    }

    /// Largest distance between two boundary nodes.
    pub fn diameter(&self) -> f64 {
        let dt = self.dtheta();
        let pts: Vec<(f64, f64)> = self
            .rho
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let (s, c) = (j as f64 * dt).sin_cos();
                (r * c, r * s)
            })
            .collect();
        let mut best: f64 = 0.0;
        for (a, p) in pts.iter().enumerate() {
            for q in &pts[a + 1..] {
                best = best.max((p.0 - q.0).hypot(p.1 - q.1));
            }
        }
        best
    }

    pub(crate) fn check_grid(&self, other: &PolarCurve) -> Result<()> {
        if self.n_theta() != other.n_theta() {
            return Err(Error::GridMismatch {
                left: self.n_theta(),
                right: other.n_theta(),
            });
        }
        Ok(())
    }
}

pub(crate) fn periodic_derivatives(f: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for j in 0..n {
        let fm = f[(j + n - 1) % n];
        let fp = f[(j + 1) % n];
        d1.push((fp - fm) / (2.0 * h));
        d2.push((fp - 2.0 * f[j] + fm) / (h * h));
    }
    (d1, d2)
}

/// Per-state summary of the curve and its trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveDiagnostics {
    pub area: f64,
    pub length: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    /// `min_j (H - u_nu^2)`.
    pub min_condition: f64,
    pub max_abs_unu: f64,
    pub lipschitz_norm: f64,
    pub min_curvature: f64,
}

impl CurveDiagnostics {
    pub fn new(curve: &PolarCurve, u_nu: &[f64]) -> Self {
        let h = curve.curvature();
        let (area, length) = curve.area_length();
        let min_condition = h
            .iter()
            .zip(u_nu)
            .map(|(h, v)| h - v * v)
            .fold(f64::INFINITY, f64::min);
        CurveDiagnostics {
            area,
            length,
            min_rho: curve.min_rho(),
            max_rho: curve.max_rho(),
            min_condition,
            max_abs_unu: u_nu.iter().fold(0.0, |m, v| m.max(v.abs())),
            lipschitz_norm: curve.lipschitz_norm(),
            min_curvature: h.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}
