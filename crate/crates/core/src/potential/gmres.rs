//! Restarted GMRES with right preconditioning.

use crate::exec::Exec;

pub(crate) struct GmresOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64], exec: Exec) -> f64 {
    exec.sum(a.len(), |k| a[k] * b[k])
}

/// Solves `A x = b` in place, starting from the incoming `x`, until
/// `|b - A x| <= tol |b|` or `max_iter` Arnoldi steps have been taken.
pub(crate) fn gmres<A, P>(
    apply: A,
    precond: P,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
    exec: Exec,
) -> GmresOutcome
where
    A: Fn(&[f64], &mut [f64]),
    P: Fn(&[f64], &mut [f64]),
{
    let len = b.len();
    let b_norm = dot(b, b, exec).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return GmresOutcome { iterations: 0, residual: 0.0, converged: true };
    }
    let target = tol * b_norm;
    let mut iterations = 0;
    let mut r = vec![0.0; len];
    let mut w = vec![0.0; len];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
    let mut search: Vec<Vec<f64>> = Vec::with_capacity(restart);

    loop {
        apply(x, &mut w);
        for k in 0..len {
            r[k] = b[k] - w[k];
        }
        let beta = dot(&r, &r, exec).sqrt();
        if beta <= target || iterations >= max_iter {
            return GmresOutcome {
                iterations,
                residual: beta / b_norm,
                converged: beta <= target,
            };
        }

        basis.clear();
        search.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut hess = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut steps = 0;

        for j in 0..restart {
            let mut z = vec![0.0; len];
            precond(&basis[j], &mut z);
            apply(&z, &mut w);
            search.push(z);
            // modified Gram-Schmidt
            for (i, v) in basis.iter().enumerate() {
                let h = dot(&w, v, exec);
                hess[i][j] = h;
                for k in 0..len {
                    w[k] -= h * v[k];
                }
            }
            let h_next = dot(&w, &w, exec).sqrt();
            hess[j + 1][j] = h_next;

            for i in 0..j {
                let t = cs[i] * hess[i][j] + sn[i] * hess[i + 1][j];
                hess[i + 1][j] = -sn[i] * hess[i][j] + cs[i] * hess[i + 1][j];
                hess[i][j] = t;
            }
            let denom = hess[j][j].hypot(hess[j + 1][j]);
            cs[j] = hess[j][j] / denom;
            sn[j] = hess[j + 1][j] / denom;
            hess[j][j] = denom;
            hess[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];

            steps = j + 1;
            iterations += 1;
            if g[j + 1].abs() <= target || iterations >= max_iter || h_next == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        let mut y = vec![0.0; steps];
        for i in (0..steps).rev() {
            let mut acc = g[i];
            for k in i + 1..steps {
                acc -= hess[i][k] * y[k];
            }
            y[i] = acc / hess[i][i];
        }
        for (yi, z) in y.iter().zip(&search) {
            for k in 0..len {
                x[k] += yi * z[k];
            }
        }
    }
}
