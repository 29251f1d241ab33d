//! Run manifests: a small line-oriented `key = value` format with
//! `[flow]`, `[curve]` and `[output]` sections.
//!
//! ```text
//! # comments run to the end of the line
//! [flow]
//! n_theta = 256
//! dt = 0.001
//! [curve] type=fourier base=2.8 mode=2,0.15,0
//! [output]
//! dir = out
//! ```
//!
//! Several pairs may share a line, including the section header's line.
//! Unknown sections and keys are rejected.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use crate::geometry::PolarCurve;
use crate::potential::DEFAULT_GAP;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierMode {
    pub k: u32,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveSpec {
    Circle { radius: f64 },
    Fourier { base: f64, modes: Vec<FourierMode> },
}

impl CurveSpec {
    pub fn sample(&self, n_theta: usize) -> Result<PolarCurve> {
        match self {
            CurveSpec::Circle { radius } => PolarCurve::circle(n_theta, *radius),
            CurveSpec::Fourier { base, modes } => {
                let modes: Vec<_> = modes.iter().map(|m| (m.k, m.amplitude, m.phase)).collect();
                PolarCurve::fourier(n_theta, *base, &modes)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub config: FlowConfig,
    pub curve: CurveSpec,
    pub output_dir: PathBuf,
    pub seed_label: String,
}

impl RunManifest {
    pub fn initial_curve(&self) -> Result<PolarCurve> {
        self.curve.sample(self.config.n_theta)
    }

    pub fn to_text(&self) -> String {
        let mut out = flow_section(&self.config);
        out.push_str("\n[curve]\n");
        match &self.curve {
            CurveSpec::Circle { radius } => {
                let _ = writeln!(out, "type = circle\nR = {radius}");
            }
            CurveSpec::Fourier { base, modes } => {
                let _ = writeln!(out, "type = fourier\nbase = {base}");
                for m in modes {
                    let _ = writeln!(out, "mode = {},{},{}", m.k, m.amplitude, m.phase);
                }
            }
        }
        let _ = write!(
            out,
            "\n[output]\ndir = {}\nlabel = {}\n",
            self.output_dir.display(),
            self.seed_label
        );
        out
    }
}

/// The `[flow]` section for a configuration.
pub fn flow_section(c: &FlowConfig) -> String {
    format!(
        "[flow]\nn_theta = {}\nm_s = {}\ndt = {}\nt_end = {}\nscheme = {}\nsolver_tol = {}\noutput_every = {}\ncondition_margin = {}\n",
        c.n_theta,
        c.m_s,
        c.dt,
        c.t_end,
        c.scheme.as_str(),
        c.solver_tol,
        c.output_every,
        c.condition_margin
    )
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Flow,
    Curve,
    Output,
}

const FLOW_KEYS: &[&str] = &[
    "n_theta",
    "m_s",
    "dt",
    "t_end",
    "scheme",
    "solver_tol",
    "output_every",
    "condition_margin",
];
const CURVE_KEYS: &[&str] = &["type", "R", "base", "mode"];
const OUTPUT_KEYS: &[&str] = &["dir", "label"];

#[derive(Default)]
struct Raw {
    flow: Vec<(usize, String, String)>,
    curve: Vec<(usize, String, String)>,
    output: Vec<(usize, String, String)>,
}

/// Joins `key = value` and `a, b` so that pairs split on whitespace.
fn normalize(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    for c in line.chars() {
        if c == '=' || c == ',' {
            while out.ends_with(char::is_whitespace) {
                out.pop();
            }
            out.push(c);
        } else if c.is_whitespace() && (out.ends_with('=') || out.ends_with(',')) {
            continue;
        } else {
            out.push(c);
        }
    }
    out
}

fn tokenize(text: &str) -> Result<Raw> {
    let mut raw = Raw::default();
    let mut section = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut rest = body;
        if let Some(after) = rest.strip_prefix('[') {
            let end = after.find(']').ok_or(Error::Parse {
                line: lineno,
                message: "unterminated section header".into(),
            })?;
            section = Some(match after[..end].trim() {
                "flow" => Section::Flow,
                "curve" => Section::Curve,
                "output" => Section::Output,
                other => {
                    return Err(Error::Parse { line: lineno, message: format!("unknown section [{other}]") })
                }
            });
            rest = &after[end + 1..];
        }
        for token in normalize(rest).split_whitespace() {
            let (key, value) = token.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected key = value, found `{token}`"),
            })?;
            if key.is_empty() || value.is_empty() {
                return Err(Error::Parse { line: lineno, message: format!("malformed pair `{token}`") });
            }
            let (bucket, allowed) = match section {
                Some(Section::Flow) => (&mut raw.flow, FLOW_KEYS),
                Some(Section::Curve) => (&mut raw.curve, CURVE_KEYS),
                Some(Section::Output) => (&mut raw.output, OUTPUT_KEYS),
                None => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("`{key}` appears before any section"),
                    })
                }
            };
            if !allowed.contains(&key) {
                return Err(Error::Parse { line: lineno, message: format!("unknown key `{key}`") });
            }
            if key != "mode" && bucket.iter().any(|(_, k, _)| k == key) {
                return Err(Error::Parse { line: lineno, message: format!("duplicate key `{key}`") });
            }
            bucket.push((lineno, key.to_string(), value.to_string()));
        }
    }
    Ok(raw)
}

fn number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{key}` expects a number, found `{value}`"),
    })
}

fn lookup<'a>(entries: &'a [(usize, String, String)], key: &str) -> Option<(usize, &'a str)> {
    entries.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, v.as_str()))
}

fn parse_mode(line: usize, value: &str) -> Result<FourierMode> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse { line, message: format!("mode expects k,amplitude,phase, found `{value}`") });
    }
    let k: u32 = number(line, "mode", parts[0])?;
    if k == 0 {
        return Err(Error::Config(format!("line {line}: mode k = 0 belongs in base")));
    }
    Ok(FourierMode { k, amplitude: number(line, "mode", parts[1])?, phase: number(line, "mode", parts[2])? })
}

/// Parses and validates a manifest, filling defaults.
pub fn parse_manifest(text: &str) -> Result<RunManifest> {
    let raw = tokenize(text)?;

    let mut config = FlowConfig::default();
    let mut m_s_given = false;
    for (line, key, value) in &raw.flow {
        let (line, value) = (*line, value.as_str());
        match key.as_str() {
            "n_theta" => config.n_theta = number(line, key, value)?,
            "m_s" => {
                config.m_s = number(line, key, value)?;
                m_s_given = true;
            }
            "dt" => config.dt = number(line, key, value)?,
            "t_end" => config.t_end = number(line, key, value)?,
            "scheme" => {
                config.scheme = value.parse().map_err(|message| Error::Parse { line, message })?
            }
            "solver_tol" => config.solver_tol = number(line, key, value)?,
            "output_every" => config.output_every = number(line, key, value)?,
            "condition_margin" => config.condition_margin = number(line, key, value)?,
            _ => unreachable!("keys are checked while tokenizing"),
        }
    }
    if !m_s_given {
        config.m_s = config.n_theta / 2;
    }
    config.validate()?;

    let curve = match lookup(&raw.curve, "type") {
        None => return Err(Error::Config("[curve] needs a type".into())),
        Some((line, "circle")) => {
            if lookup(&raw.curve, "base").is_some() || lookup(&raw.curve, "mode").is_some() {
                return Err(Error::Config(format!("line {line}: circle takes only R")));
            }
            let (l, v) = lookup(&raw.curve, "R").ok_or(Error::Config("circle needs R".into()))?;
            CurveSpec::Circle { radius: number(l, "R", v)? }
        }
        Some((line, "fourier")) => {
            if lookup(&raw.curve, "R").is_some() {
                return Err(Error::Config(format!("line {line}: fourier takes base and mode, not R")));
            }
            let (l, v) = lookup(&raw.curve, "base").ok_or(Error::Config("fourier needs base".into()))?;
            let base = number(l, "base", v)?;
            let modes = raw
                .curve
                .iter()
                .filter(|(_, k, _)| k == "mode")
                .map(|(l, _, v)| parse_mode(*l, v))
                .collect::<Result<Vec<_>>>()?;
            let mut seen = HashSet::new();
            if let Some(m) = modes.iter().find(|m| !seen.insert(m.k)) {
                return Err(Error::Config(format!("mode k = {} given twice", m.k)));
            }
            CurveSpec::Fourier { base, modes }
        }
        Some((line, other)) => {
            return Err(Error::Parse { line, message: format!("unknown curve type `{other}`") })
        }
    };
    let sampled = curve
        .sample(config.n_theta)
        .map_err(|e| Error::Config(format!("initial curve: {e}")))?;
    if sampled.min_rho() <= 1.0 + DEFAULT_GAP {
        return Err(Error::Config(format!(
            "initial curve must keep rho > {} (min rho {})",
            1.0 + DEFAULT_GAP,
            sampled.min_rho()
        )));
    }

    let output_dir = lookup(&raw.output, "dir").map_or_else(|| PathBuf::from("out"), |(_, v)| PathBuf::from(v));
    let seed_label = lookup(&raw.output, "label").map_or_else(|| "run".to_string(), |(_, v)| v.to_string());

    Ok(RunManifest { config, curve, output_dir, seed_label })
}
