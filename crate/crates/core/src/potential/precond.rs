//! Fast solver for the mapped Laplacian of the circle with the curve's mean
//! radius. Its coefficients do not depend on `theta`, so a DFT in `theta`
//! decouples it into one tridiagonal system in `s` per mode.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::exec::Exec;

pub(crate) struct CirclePreconditioner {
    m: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Per mode: Thomas sweep factors `(c', 1/denominator)` and sub-diagonal.
    upper: Vec<f64>,
    inv_den: Vec<f64>,
    lower: Vec<f64>,
}

impl CirclePreconditioner {
    pub fn new(n: usize, m: usize, mean_q: f64, h_t: f64) -> Self {
        let h_s = 1.0 / m as f64;
        let rows = m - 1;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);

        let mut diag0 = Vec::with_capacity(rows);
        let mut lower = Vec::with_capacity(rows);
        let mut sup = Vec::with_capacity(rows);
        for i in 1..m {
            let s = i as f64 * h_s;
            let w = 1.0 / mean_q + s;
            let second = w * w / (h_s * h_s);
            let first = w / (2.0 * h_s);
            diag0.push(2.0 * second);
            lower.push(-(second - first));
            sup.push(-(second + first));
        }

        let mut upper = vec![0.0; n * rows];
        let mut inv_den = vec![0.0; n * rows];
        for k in 0..n {
            let lambda = (2.0 - 2.0 * (2.0 * PI * k as f64 / n as f64).cos()) / (h_t * h_t);
            let c = &mut upper[k * rows..(k + 1) * rows];
            let d = &mut inv_den[k * rows..(k + 1) * rows];
            let mut prev_c = 0.0;
            for i in 0..rows {
                let den = diag0[i] + lambda - if i > 0 { lower[i] * prev_c } else { 0.0 };
                d[i] = 1.0 / den;
                c[i] = sup[i] / den;
                prev_c = c[i];
            }
        }
        CirclePreconditioner { m, n, forward, inverse, upper, inv_den, lower }
    }

    /// `z = P^{-1} v`.
    pub fn apply(&self, v: &[f64], z: &mut [f64], exec: Exec) {
        let (n, rows) = (self.n, self.m - 1);
        let mut spec: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
        exec.for_each_chunk(&mut spec, n, |_, row| self.forward.process(row));

        // transpose to mode-major and sweep each mode
        let mut modes = vec![Complex::new(0.0, 0.0); n * rows];
        for i in 0..rows {
            for k in 0..n {
                modes[k * rows + i] = spec[i * n + k];
            }
        }
        exec.for_each_chunk(&mut modes, rows, |k, col| {
            let c = &self.upper[k * rows..(k + 1) * rows];
            let d = &self.inv_den[k * rows..(k + 1) * rows];
            let mut prev = Complex::new(0.0, 0.0);
            for i in 0..rows {
                let rhs = if i > 0 { col[i] - prev * self.lower[i] } else { col[i] };
                col[i] = rhs * d[i];
                prev = col[i];
            }
            for i in (0..rows - 1).rev() {
                col[i] = col[i] - col[i + 1] * c[i];
            }
        });
        for k in 0..n {
            for i in 0..rows {
                spec[i * n + k] = modes[k * rows + i];
            }
        }

        exec.for_each_chunk(&mut spec, n, |_, row| self.inverse.process(row));
        let scale = 1.0 / n as f64;
        for (out, c) in z.iter_mut().zip(&spec) {
            *out = c.re * scale;
        }
    }
}
