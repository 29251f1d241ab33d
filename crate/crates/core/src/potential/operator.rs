//! The Laplacian pulled back to the rectangle `[0,1] x S^1` by
//! `r = 1 + s q(theta)`, `q = rho - 1`.
//!
//! With `a = q_theta / q` the chain rule gives, after multiplying by `r^2`,
//!
//! ```text
//! (r^2/q^2 + s^2 a^2) U_ss + (r/q + s (2a^2 - q_thetatheta/q)) U_s
//!     - 2 s a U_stheta + U_thetatheta = 0
//! ```
//!
//! discretized with second-order central differences on interior layers
//! `i = 1..m-1`. Rows are stored negated so the diagonal is positive.

use crate::exec::Exec;
use crate::geometry::PolarCurve;

#[derive(Clone, Debug)]
pub(crate) struct MappedLaplacian {
    pub m: usize,
    pub n: usize,
    diag: Vec<f64>,
    s_plus: Vec<f64>,
    s_minus: Vec<f64>,
    cross: Vec<f64>,
    theta: f64,
}

impl MappedLaplacian {
    pub fn new(curve: &PolarCurve, m: usize) -> Self {
        let n = curve.n_theta();
        let h_s = 1.0 / m as f64;
        let h_t = curve.dtheta();
        let (d1, d2) = curve.derivatives();
        let rows = (m - 1) * n;
        let mut diag = Vec::with_capacity(rows);
        let mut s_plus = Vec::with_capacity(rows);
        let mut s_minus = Vec::with_capacity(rows);
        let mut cross = Vec::with_capacity(rows);
        let theta = 1.0 / (h_t * h_t);
        for i in 1..m {
            let s = i as f64 * h_s;
            for j in 0..n {
                let q = curve.rho()[j] - 1.0;
                let a = d1[j] / q;
                let r = 1.0 + s * q;
                let c_ss = (r / q).powi(2) + (s * a).powi(2);
                let c_s = r / q + s * (2.0 * a * a - d2[j] / q);
                let c_st = -2.0 * s * a;
                let second = c_ss / (h_s * h_s);
                let first = c_s / (2.0 * h_s);
                diag.push(2.0 * second + 2.0 * theta);
                s_plus.push(-(second + first));
                s_minus.push(-(second - first));
                cross.push(c_st / (4.0 * h_s * h_t));
            }
        }
        MappedLaplacian { m, n, diag, s_plus, s_minus, cross, theta }
    }

    pub fn len(&self) -> usize {
        (self.m - 1) * self.n
    }

    /// Right-hand side from the Dirichlet data `U = 1` at `s = 0`.
    pub fn rhs(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.len()];
        for j in 0..self.n {
            b[j] = -self.s_minus[j];
        }
        b
    }

    /// `y = K x` on interior unknowns (boundary layers contribute zero).
    pub fn apply(&self, x: &[f64], y: &mut [f64], exec: Exec) {
        let n = self.n;
        let m = self.m;
        exec.for_each_chunk(y, n, |row, out| {
            let i = row + 1;
            let base = row * n;
            let here = &x[base..base + n];
            let up = (i + 1 < m).then(|| &x[base + n..base + 2 * n]);
            let down = (i > 1).then(|| &x[base - n..base]);
            for j in 0..n {
                let k = base + j;
                let jp = if j + 1 == n { 0 } else { j + 1 };
                let jm = if j == 0 { n - 1 } else { j - 1 };
                let mut v = self.diag[k] * here[j] - self.theta * (here[jp] + here[jm]);
                let x_cross = self.cross[k];
                if let Some(u) = up {
                    v += self.s_plus[k] * u[j] - x_cross * (u[jp] - u[jm]);
                }
                if let Some(d) = down {
                    v += self.s_minus[k] * d[j] + x_cross * (d[jp] - d[jm]);
                }
                out[j] = v;
            }
        });
    }
}
