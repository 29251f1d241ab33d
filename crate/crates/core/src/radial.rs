//! Exact radially symmetric solutions: disks `B_R(t)` whose radius obeys a
//! scalar ODE. Used as analytic oracles and as barrier flows.

use crate::error::{Error, Result};

/// Bisection bracket for the stationary radius.
const BRACKET: (f64, f64) = (1.5, 3.0);

/// Trajectories may not approach the singular radius closer than this.
pub const SINGULAR_GUARD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialState {
    pub t: f64,
    pub radius: f64,
}

/// Capacity potential of the annulus `1 < |x| < R`, evaluated at `|x| = r`.
pub fn radial_potential(radius: f64, r: f64) -> f64 {
    -(r.ln() - radius.ln()) / radius.ln()
}

/// Outward normal derivative of [`radial_potential`] on `|x| = R`.
pub fn radial_flux(radius: f64) -> f64 {
    -1.0 / (radius * radius.ln())
}

/// `dR/dt = -1/R + 1/(R^2 log^2 R)` for a disk of radius `R > 1`.
pub fn radial_velocity(radius: f64) -> Result<f64> {
    if !(radius > 1.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("radius must exceed 1, got {radius}")));
    }
    let l = radius.ln();
    Ok(-1.0 / radius + 1.0 / (radius * radius * l * l))
}

fn stationarity_residual(radius: f64) -> f64 {
    let l = radius.ln();
    radius * l * l - 1.0
}

/// Unique radius with `(log R)^2 = 1/R`, by bisection to bracket width `tol`.
pub fn compute_r_opt(tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol < 1e-3) {
        return Err(Error::Domain(format!("tolerance must lie in (0, 1e-3), got {tol}")));
    }
    let (mut lo, mut hi) = BRACKET;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let g = stationarity_residual(mid);
        if g == 0.0 {
            return Ok(mid);
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Stationary radius at full double precision, cached.
pub fn r_opt() -> f64 {
    static R_OPT: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *R_OPT.get_or_init(|| compute_r_opt(1e-15).expect("valid tolerance"))
}

/// Classical RK4 for `dR/dt = f(R)` with fixed step; the last step is
/// shortened to land on `t_end`.
pub fn integrate_radial(r0: f64, t_end: f64, dt: f64) -> Result<Vec<RadialState>> {
    if !(r0 > 1.0) {
        return Err(Error::Domain(format!("initial radius must exceed 1, got {r0}")));
    }
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::Domain(format!("need dt > 0 and t_end >= 0, got {dt}, {t_end}")));
    }
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut state = RadialState { t: 0.0, radius: r0 };
    out.push(state);
    for k in 0..steps {
        let t_next = if k + 1 == steps { t_end } else { (k + 1) as f64 * dt };
        let h = t_next - state.t;
        let f = |r: f64| {
            radial_velocity(r).map_err(|_| Error::Integration { t: state.t, radius: r })
        };
        let r = state.radius;
        let k1 = f(r)?;
        let k2 = f(r + 0.5 * h * k1)?;
        let k3 = f(r + 0.5 * h * k2)?;
        let k4 = f(r + h * k3)?;
        let next = r + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(next > 1.0 + SINGULAR_GUARD) {
            return Err(Error::Integration { t: t_next, radius: next });
        }
        state = RadialState { t: t_next, radius: next };
        out.push(state);
    }
    Ok(out)
}

/// Radius of the radial flow from `r0` at each requested time (ascending).
pub fn radial_radius_at(r0: f64, times: &[f64], dt: f64) -> Result<Vec<f64>> {
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let traj = integrate_radial(r0, t_end, dt)?;
    Ok(times
        .iter()
        .map(|&t| {
            let k = ((t / dt).round() as usize).min(traj.len() - 1);
            let lo = if traj[k].t > t && k > 0 { k - 1 } else { k };
            let hi = (lo + 1).min(traj.len() - 1);
            let (a, b) = (traj[lo], traj[hi]);
            if hi == lo || b.t == a.t {
                a.radius
            } else {
                let w = (t - a.t) / (b.t - a.t);
                a.radius + w * (b.radius - a.radius)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    #[test]
    fn velocity_values() {
        assert_abs_diff_eq!(radial_velocity(E).unwrap(), -1.0 / E + 1.0 / (E * E), epsilon = 1e-15);
        assert_abs_diff_eq!(radial_velocity(E).unwrap(), -0.232544, epsilon = 1e-6);
        assert!(radial_velocity(1.2).unwrap() > 20.0);
        assert_abs_diff_eq!(radial_velocity(3.0).unwrap(), -0.24127, epsilon = 1e-5);
        assert_abs_diff_eq!(radial_velocity(2.0).unwrap(), 0.02034, epsilon = 1e-5);
        assert!(radial_velocity(1.0).is_err());
        assert!(radial_velocity(0.5).is_err());
    }

    #[test]
    fn stationary_radius() {
        let r = compute_r_opt(1e-12).unwrap();
        assert!(r > 2.0 && r < 2.1);
        assert_abs_diff_eq!(r, 2.0207, epsilon = 5e-5);
        assert!(radial_velocity(r).unwrap().abs() < 1e-10);
        assert!(stationarity_residual(r).abs() < 1e-10);
        // stationarity of the full law: H - u_nu^2 = 1/R - flux^2
        assert!((1.0 / r - radial_flux(r).powi(2)).abs() < 1e-10);
        assert!(stationarity_residual(2.02) < 0.0 && stationarity_residual(2.03) > 0.0);
        assert!(compute_r_opt(0.0).is_err());
        assert!(compute_r_opt(1e-2).is_err());
    }

    #[test]
    fn fixed_point_is_preserved() {
        let r = r_opt();
        let traj = integrate_radial(r, 10.0, 1e-2).unwrap();
        assert!(traj.iter().all(|s| (s.radius - r).abs() < 1e-12));
    }

    #[test]
    fn shrinking_trajectory_is_trapped() {
        let r = r_opt();
        let traj = integrate_radial(3.0, 50.0, 1e-3).unwrap();
        assert_eq!(traj.len(), 50_001);
        assert_abs_diff_eq!(traj.last().unwrap().t, 50.0, epsilon = 1e-12);
        for w in traj.windows(2) {
            // strict until the step drops below the float resolution of R
            assert!(w[1].radius < w[0].radius || (w[1].radius == w[0].radius && w[1].radius - r < 1e-11));
            assert!(w[1].radius > r - 1e-14);
        }
        assert!(traj.last().unwrap().radius - r < 1e-4);
    }

    #[test]
    fn growing_trajectory_is_trapped() {
        let r = r_opt();
        let traj = integrate_radial(1.5, 20.0, 1e-3).unwrap();
        for w in traj.windows(2) {
            assert!(w[1].radius > w[0].radius || (w[1].radius == w[0].radius && r - w[1].radius < 1e-11));
            assert!(w[1].radius < r + 1e-14);
        }
    }

    #[test]
    fn fourth_order_in_time() {
        let end = |dt: f64| integrate_radial(3.0, 2.0, dt).unwrap().last().unwrap().radius;
        let (a, b, c) = (end(0.2), end(0.1), end(0.05));
        let ratio = (a - b).abs() / (b - c).abs();
        assert!((ratio - 16.0).abs() < 3.2, "ratio {ratio}");
    }

    #[test]
    fn singular_start_is_rejected() {
        assert!(integrate_radial(1.0, 1.0, 1e-3).is_err());
        assert!(integrate_radial(2.0, 1.0, 0.0).is_err());
        // a step far too coarse overshoots into the singularity
        assert!(matches!(
            integrate_radial(2.5, 20.0, 20.0),
            Err(Error::Integration { .. })
        ));
    }

    #[test]
    fn interpolated_radius() {
        let rs = radial_radius_at(3.0, &[0.0, 1.0, 2.5], 0.5).unwrap();
        let traj = integrate_radial(3.0, 2.5, 0.5).unwrap();
        assert_eq!(rs[0], 3.0);
        assert_eq!(rs[1], traj[2].radius);
        assert_eq!(rs[2], traj[5].radius);
    }
}
