//! CSV and SVG emission for runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::flow::FlowState;
use crate::radial::r_opt;

pub const TIME_SERIES_HEADER: &str =
    "t,min_rho,max_rho,area,length,min_condition,max_abs_unu,lipschitz_norm,dist_to_Ropt";

/// 12 significant digits.
fn g12(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn write_time_series<W: Write>(states: &[FlowState], mut out: W) -> Result<()> {
    writeln!(out, "{TIME_SERIES_HEADER}")?;
    let r = r_opt();
    for s in states {
        let d = &s.diagnostics;
        let row = [
            s.t,
            d.min_rho,
            d.max_rho,
            d.area,
            d.length,
            d.min_condition,
            d.max_abs_unu,
            d.lipschitz_norm,
            s.curve.distance_to_ball(r),
        ];
        writeln!(out, "{}", row.map(g12).join(","))?;
    }
    Ok(())
}

pub fn emit_time_series(states: &[FlowState], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_time_series(states, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Per-node `theta,rho,H,u_nu`.
pub fn write_snapshot<W: Write>(state: &FlowState, mut out: W) -> Result<()> {
    writeln!(out, "theta,rho,H,u_nu")?;
    let c = &state.curve;
    let h = c.curvature();
    for j in 0..c.n_theta() {
        writeln!(
            out,
            "{},{},{},{}",
            g12(c.theta(j)),
            g12(c.rho()[j]),
            g12(h[j]),
            g12(state.trace.u_nu[j])
        )?;
    }
    Ok(())
}

pub fn emit_snapshot(state: &FlowState, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(state, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Closed polyline of the curve with the unit circle and the stationary
/// circle drawn for reference.
pub fn write_snapshot_svg<W: Write>(state: &FlowState, mut out: W) -> Result<()> {
    let c = &state.curve;
    let extent = 1.1 * c.max_rho().max(r_opt());
    let size = 480.0;
    let scale = size / (2.0 * extent);
    let to_px = |x: f64, y: f64| (size / 2.0 + x * scale, size / 2.0 - y * scale);
    let points: Vec<String> = (0..c.n_theta())
        .map(|j| {
            let (s, co) = c.theta(j).sin_cos();
            let (px, py) = to_px(c.rho()[j] * co, c.rho()[j] * s);
            format!("{px:.3},{py:.3}")
        })
        .collect();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    )?;
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    let mid = size / 2.0;
    writeln!(
        out,
        r#"<circle cx="{mid}" cy="{mid}" r="{:.3}" fill="none" stroke="gray"/>"#,
        scale
    )?;
    writeln!(
        out,
        r#"<circle cx="{mid}" cy="{mid}" r="{:.3}" fill="none" stroke="steelblue" stroke-dasharray="4 3"/>"#,
        r_opt() * scale
    )?;
    writeln!(
        out,
        r#"<polygon points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        points.join(" ")
    )?;
    writeln!(
        out,
        r#"<text x="8" y="18" font-family="monospace" font-size="12">t = {:.4}</text>"#,
        state.t
    )?;
    writeln!(out, "</svg>")?;
    Ok(())
}

pub fn emit_snapshot_svg(state: &FlowState, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot_svg(state, &mut w)?;
    w.flush()?;
    Ok(())
}
