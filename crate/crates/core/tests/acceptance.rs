//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! gating criterion fails. Runs at the reference resolution
//! (n_theta = 256, m_s = 128, dt = 1e-3) and takes tens of minutes.

use std::f64::consts::E;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use capflow::flow::{run, FlowConfig, FlowRun};
use capflow::geometry::PolarCurve;
use capflow::potential::{convergence_order, radial_errors, SolverOptions};
use capflow::radial::{compute_r_opt, integrate_radial, r_opt, radial_velocity};
use capflow::verify::barrier_radii;
use capflow::Exec;

const N: usize = 256;
const M: usize = 128;
const DT: f64 = 1e-3;

struct Outcome {
    id: usize,
    name: &'static str,
    passed: bool,
    gating: bool,
    detail: String,
}

fn reference(t_end: f64, output_every: usize) -> FlowConfig {
    FlowConfig { n_theta: N, m_s: M, dt: DT, t_end, output_every, ..FlowConfig::default() }
}

fn fourier(n: usize, base: f64, k: u32, amp: f64) -> PolarCurve {
    PolarCurve::fourier(n, base, &[(k, amp, 0.0)]).unwrap()
}

/// Independent bisection on `(log R)^2 - 1/R`.
fn oracle_r_opt() -> f64 {
    let h = |r: f64| r.ln().powi(2) - 1.0 / r;
    let (mut lo, mut hi) = (2.0, 2.1);
    assert!(h(lo) < 0.0 && h(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    0.5 * (lo + hi)
}

fn criterion_1() -> Outcome {
    let mut best = Duration::MAX;
    let mut r = 0.0;
    for _ in 0..20 {
        let t = Instant::now();
        r = compute_r_opt(1e-12).unwrap();
        best = best.min(t.elapsed());
    }
    let residual = (r * r.ln().powi(2) - 1.0).abs();
    let velocity = radial_velocity(r).unwrap().abs();
    let oracle = oracle_r_opt();
    let passed = residual < 1e-10
        && velocity < 1e-10
        && (r - oracle).abs() < 1e-10
        && (r - 2.0207).abs() < 5e-5
        && best < Duration::from_millis(1);
    Outcome {
        id: 1,
        name: "stationary radius",
        passed,
        gating: true,
        detail: format!(
            "R_opt={r:.12} oracle={oracle:.12} |R log^2 R - 1|={residual:.1e} |f|={velocity:.1e} time={best:?}"
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for r in [1.5, 2.0, E, 3.0] {
        let curve = PolarCurve::circle(N, r).unwrap();
        let t = Instant::now();
        let (eu, ef) = radial_errors(&curve, &SolverOptions::new(M, 1e-12)).unwrap();
        let elapsed = t.elapsed();
        let p = convergence_order(&curve, 3).unwrap();
        let ok = eu < 1e-4 && ef < 1e-3 && (1.7..=2.3).contains(&p) && elapsed < Duration::from_secs(10);
        passed &= ok;
        parts.push(format!("R={r:.3}: |u|={eu:.1e} |u_nu|={ef:.1e} p={p:.3} {elapsed:.0?}"));
    }
    Outcome { id: 2, name: "elliptic oracle", passed, gating: true, detail: parts.join("; ") }
}

fn criterion_3(circle_run: &FlowRun) -> Outcome {
    let traj = integrate_radial(3.0, 50.0, DT).unwrap();
    let mut worst: f64 = 0.0;
    let mut spread: f64 = 0.0;
    for s in circle_run.states.iter().filter(|s| s.t <= 5.0 + 1e-9) {
        let k = (s.t / DT).round() as usize;
        worst = worst.max((s.curve.mean_rho() - traj[k].radius).abs());
        spread = spread.max(s.curve.max_rho() - s.curve.min_rho());
    }
    Outcome {
        id: 3,
        name: "radial consistency",
        passed: worst < 5e-3 && spread < 1e-6,
        gating: true,
        detail: format!("max_t |mean rho - R_ode|={worst:.2e} max spread={spread:.2e}"),
    }
}

fn ordering_violation(inner: &FlowRun, outer: &FlowRun) -> (f64, f64) {
    let mut violation: f64 = 0.0;
    let mut scale: f64 = 0.0;
    assert_eq!(inner.states.len(), outer.states.len());
    for (a, b) in inner.states.iter().zip(&outer.states) {
        violation = violation.max(-b.curve.min_gap(&a.curve).unwrap());
        scale = scale.max(a.curve.max_rho()).max(b.curve.max_rho());
    }
    (violation, scale)
}

fn criterion_4(pairs: &[(&str, &FlowRun, &FlowRun)]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, inner, outer) in pairs {
        let (v, scale) = ordering_violation(inner, outer);
        let ok = v < 1e-6 * scale && inner.failure.is_none() && outer.failure.is_none();
        passed &= ok;
        let gap = inner
            .states
            .iter()
            .zip(&outer.states)
            .map(|(a, b)| b.curve.min_gap(&a.curve).unwrap())
            .fold(f64::INFINITY, f64::min);
        parts.push(format!("{label}: max violation={v:.1e} (limit {:.1e}) min gap={gap:.4}", 1e-6 * scale));
    }
    Outcome { id: 4, name: "comparison principle", passed, gating: true, detail: parts.join("; ") }
}

fn min_condition(run: &FlowRun, t_max: f64) -> f64 {
    run.states
        .iter()
        .filter(|s| s.t <= t_max + 1e-9)
        .map(|s| s.diagnostics.min_condition)
        .fold(f64::INFINITY, f64::min)
}

fn criterion_5(cases: &[(&str, &FlowRun, &FlowRun)]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, fine, coarse) in cases {
        let initial = fine.initial().diagnostics.min_condition;
        let m_fine = min_condition(fine, 20.0);
        let m_coarse = min_condition(coarse, 20.0);
        let (dip_fine, dip_coarse) = ((-m_fine).max(0.0), (-m_coarse).max(0.0));
        let ok = initial > 0.0 && m_fine >= -5e-3 && dip_fine <= dip_coarse;
        passed &= ok;
        parts.push(format!(
            "{label}: initial={initial:.4} min(256x128)={m_fine:.3e} min(128x64)={m_coarse:.3e}"
        ));
    }
    Outcome { id: 5, name: "condition preservation", passed, gating: true, detail: parts.join("; ") }
}

fn criterion_6(runs: &[(&str, &FlowRun)]) -> Outcome {
    let r = r_opt();
    let flux_cap = 1.0 / (r - 1.0) + 1e-2;
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, run) in runs {
        let cfg = reference(run.last().t, 1);
        let barrier = barrier_radii(run, &cfg).unwrap();
        let flux = run.states.iter().map(|s| s.trace.max_abs()).fold(0.0, f64::max);
        let dist = run.states.iter().map(|s| s.curve.distance_to_ball(r)).fold(f64::INFINITY, f64::min);
        let first_nonpositive = run.states.iter().find(|s| s.curve.distance_to_ball(r) <= 0.0).map(|s| s.t);
        let shortfall = run
            .states
            .iter()
            .zip(&barrier)
            .map(|(s, rb)| s.curve.distance_to_ball(r) - (rb - r))
            .fold(f64::INFINITY, f64::min);
        let curv = run.states.iter().map(|s| s.diagnostics.min_curvature).fold(f64::INFINITY, f64::min);
        let ok = flux <= flux_cap && dist > 0.0 && shortfall >= -1e-3 && curv > 0.0;
        passed &= ok;
        let when = first_nonpositive.map_or(String::new(), |t| format!(" (dist<=0 from t={t:.1})"));
        parts.push(format!(
            "{label}[t<={:.0}]: max|u_nu|={flux:.4} min dist={dist:.2e}{when} barrier slack={shortfall:.2e} min H={curv:.4}",
            run.last().t
        ));
    }
    Outcome {
        id: 6,
        name: "bounds suite",
        passed,
        gating: true,
        detail: format!("flux cap {flux_cap:.4}; {}", parts.join("; ")),
    }
}

fn criterion_7(circle: &FlowRun, perturbed: &FlowRun) -> Outcome {
    let r = r_opt();
    let dev = |run: &FlowRun| run.last().curve.rho().iter().fold(0.0, |m: f64, v| m.max((v - r).abs()));
    let (d_circle, d_pert) = (dev(circle), dev(perturbed));
    let excess: Vec<f64> = circle.states.iter().map(|s| s.curve.max_rho() - r).collect();
    let increases = excess.windows(2).filter(|w| w[1] > w[0]).count();
    let passed = d_circle < 1e-2
        && d_pert < 1e-2
        && increases == 0
        && (circle.last().t - 50.0).abs() < 1e-9
        && (perturbed.last().t - 50.0).abs() < 1e-9;
    Outcome {
        id: 7,
        name: "convergence to the stationary disk",
        passed,
        gating: true,
        detail: format!(
            "circle: max|rho-R_opt|={d_circle:.2e}, perturbed: {d_pert:.2e}, increases of max rho - R_opt over {} samples: {increases}",
            excess.len()
        ),
    }
}

fn criterion_8(run: &FlowRun) -> Outcome {
    let means: Vec<f64> = run.states.iter().map(|s| s.curve.mean_rho()).collect();
    let monotone = means.windows(2).all(|w| w[1] >= w[0]);
    let last = *means.last().unwrap();
    let passed = run.initial().diagnostics.min_condition < 0.0 && monotone && last > 2.0 && last < r_opt() + 1e-3;
    Outcome {
        id: 8,
        name: "necessity probe (informational)",
        passed,
        gating: false,
        detail: format!(
            "initial min(H-u_nu^2)={:.4}, mean rho 2 -> {last:.6} by t={:.0} (R_opt={:.6}), monotone={monotone}",
            run.initial().diagnostics.min_condition,
            run.last().t,
            r_opt()
        ),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut outcomes = vec![criterion_1(), criterion_2()];

    // Every flow the criteria need, run concurrently where cores allow.
    let circle3 = PolarCurve::circle(N, 3.0).unwrap();
    let oval = fourier(N, 2.8, 2, 0.15);
    let trefoil = fourier(N, 3.0, 3, 0.1);
    let jobs: Vec<(&str, PolarCurve, FlowConfig, bool)> = vec![
        ("circle3", circle3, reference(50.0, 10), false),
        ("oval", oval, reference(50.0, 100), false),
        ("trefoil", trefoil, reference(20.0, 100), false),
        ("circle2.5", PolarCurve::circle(N, 2.5).unwrap(), reference(5.0, 50), false),
        ("circle3.2", PolarCurve::circle(N, 3.2).unwrap(), reference(5.0, 50), false),
        ("pert-inner", fourier(N, 2.6, 3, 0.1), reference(5.0, 50), false),
        ("pert-outer", fourier(N, 3.0, 1, 0.1), reference(5.0, 50), false),
        ("circle2", PolarCurve::circle(N, 2.0).unwrap(), reference(10.0, 100), true),
        ("oval-coarse", fourier(128, 2.8, 2, 0.15), FlowConfig { n_theta: 128, m_s: 64, ..reference(20.0, 100) }, false),
        ("trefoil-coarse", fourier(128, 3.0, 3, 0.1), FlowConfig { n_theta: 128, m_s: 64, ..reference(20.0, 100) }, false),
    ];
    let runs = Exec::Parallel.map(&jobs, |(label, curve, cfg, force)| {
        let t = Instant::now();
        let out = run(curve.clone(), cfg, *force).unwrap_or_else(|e| panic!("{label}: {e}"));
        eprintln!("  flow {label:<15} t_end={:<4} {:>7.1}s", cfg.t_end, t.elapsed().as_secs_f64());
        out
    });
    let get = |name: &str| &runs[jobs.iter().position(|j| j.0 == name).unwrap()];
    for (label, _, _, _) in &jobs {
        if let Some(f) = &get(label).failure {
            eprintln!("  flow {label} stopped at t={}: {}", f.t, f.error);
        }
    }

    outcomes.push(criterion_3(get("circle3")));
    outcomes.push(criterion_4(&[
        ("circle 2.5 in 3.2", get("circle2.5"), get("circle3.2")),
        ("perturbed pair", get("pert-inner"), get("pert-outer")),
    ]));
    outcomes.push(criterion_5(&[
        ("2.8+0.15cos2t", get("oval"), get("oval-coarse")),
        ("3.0+0.1cos3t", get("trefoil"), get("trefoil-coarse")),
    ]));
    let satisfying: Vec<(&str, &FlowRun)> = ["circle3", "oval", "trefoil", "circle2.5", "circle3.2", "pert-inner", "pert-outer"]
        .iter()
        .map(|l| (*l, get(l)))
        .filter(|(_, r)| r.initial().diagnostics.min_condition > 0.0)
        .collect();
    outcomes.push(criterion_6(&satisfying));
    outcomes.push(criterion_7(get("circle3"), get("oval")));
    outcomes.push(criterion_8(get("circle2")));

    let mut failed = 0;
    println!();
    for o in &outcomes {
        let tag = match (o.passed, o.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "INFO-FAIL",
        };
        println!("[{tag}] criterion {}: {} -- {}", o.id, o.name, o.detail);
        if !o.passed && o.gating {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} gating criteria passed in {:.0?}", 7 - failed, 7, start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
