//! Run configuration: `[section]` headers with `key = value` lines.
//!
//! Every key has a default (the reference parameter set, `(1, 1, 1)` as the
//! initial state), so an empty file is a complete configuration. The manifest
//! written next to each output is in the same format and can be passed back
//! with `--config` to reproduce the run.

use std::fmt::Write as _;

use igp_core::analysis::SweepSpec;
use igp_core::integrate::SolverOptions;
use igp_core::model::{Params, State};
use igp_core::Error;
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Real,
    Count,
    Name,
}

/// Every accepted `(section, key)` pair.
const SCHEMA: &[(&str, &str, Kind)] = &[
    ("params", "b1", Kind::Real),
    ("params", "b2", Kind::Real),
    ("params", "b3", Kind::Real),
    ("params", "c", Kind::Real),
    ("params", "a11", Kind::Real),
    ("params", "a12", Kind::Real),
    ("params", "a13", Kind::Real),
    ("params", "a21", Kind::Real),
    ("params", "a23", Kind::Real),
    ("params", "a31", Kind::Real),
    ("params", "a32", Kind::Real),
    ("initial", "x", Kind::Real),
    ("initial", "y", Kind::Real),
    ("initial", "z", Kind::Real),
    ("solver", "rel_tol", Kind::Real),
    ("solver", "abs_tol", Kind::Real),
    ("solver", "max_step", Kind::Real),
    ("solver", "initial_step", Kind::Real),
    ("solver", "max_steps", Kind::Count),
    ("solver", "sample_interval", Kind::Real),
    ("simulate", "t_end", Kind::Real),
    ("sweep", "parameter", Kind::Name),
    ("sweep", "start", Kind::Real),
    ("sweep", "stop", Kind::Real),
    ("sweep", "step", Kind::Real),
    ("sweep", "transient", Kind::Real),
    ("sweep", "sample", Kind::Real),
    ("sweep", "lle_threshold", Kind::Real),
    ("sweep", "spread_tol", Kind::Real),
    ("lyapunov", "total_time", Kind::Real),
    ("lyapunov", "renorm_interval", Kind::Real),
    ("lyapunov", "discard_fraction", Kind::Real),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub transient: f64,
    pub sample: f64,
    pub lle_threshold: f64,
    pub spread_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovConfig {
    pub total_time: f64,
    pub renorm_interval: f64,
    pub discard_fraction: f64,
}

/// Fully resolved options for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: Params<f64>,
    pub initial: State<f64>,
    pub solver: SolverOptions<f64>,
    pub t_end: f64,
    pub sweep: SweepConfig,
    pub lyapunov: LyapunovConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: Params::reference(),
            initial: State::new(1.0, 1.0, 1.0),
            solver: SolverOptions::default(),
            t_end: 500.0,
            sweep: SweepConfig {
                parameter: "c".into(),
                start: 0.0,
                stop: 1.0,
                step: 0.05,
                transient: 2000.0,
                sample: 1000.0,
                lle_threshold: igp_core::analysis::LLE_THRESHOLD,
                spread_tol: igp_core::analysis::SPREAD_TOLERANCE,
            },
            lyapunov: LyapunovConfig {
                total_time: 5000.0,
                renorm_interval: igp_core::integrate::RENORM_INTERVAL,
                discard_fraction: 0.2,
            },
        }
    }
}

/// Where a setting came from, for error messages.
#[derive(Debug, Clone)]
enum Origin {
    Line(usize),
    Flag(String),
}

impl Origin {
    fn describe(&self, path: &str) -> String {
        match self {
            Self::Line(n) => format!("{path}:{n}"),
            Self::Flag(raw) => format!("--set {raw}"),
        }
    }
}

/// Line of `key` inside `[section]`, 1-based.
fn line_of(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_owned();
        } else if current == section {
            let name = line.split('=').next().unwrap_or("").trim();
            if name == key {
                return Some(i + 1);
            }
        }
    }
    None
}

fn section_line(source: &str, section: &str) -> Option<usize> {
    source
        .lines()
        .position(|l| {
            let l = l.trim();
            l.starts_with('[') && l.trim_matches(|c| c == '[' || c == ']').trim() == section
        })
        .or_else(|| line_of(source, "", section).map(|n| n - 1))
        .map(|i| i + 1)
}

fn kind_of(section: &str, key: &str) -> Option<Kind> {
    SCHEMA
        .iter()
        .find(|(s, k, _)| *s == section && *k == key)
        .map(|e| e.2)
}

/// Resolves `section.key` or a bare key that names exactly one setting.
fn resolve_key(name: &str) -> Result<(&'static str, &'static str), String> {
    if let Some((section, key)) = name.split_once('.') {
        return SCHEMA
            .iter()
            .find(|(s, k, _)| *s == section && *k == key)
            .map(|(s, k, _)| (*s, *k))
            .ok_or_else(|| format!("unknown key `{name}`"));
    }
    let hits: Vec<_> = SCHEMA.iter().filter(|(_, k, _)| *k == name).collect();
    match hits.as_slice() {
        [(s, k, _)] => Ok((s, k)),
        [] => Err(format!("unknown key `{name}`")),
        _ => Err(format!(
            "key `{name}` is ambiguous; write it as section.key"
        )),
    }
}

/// Value text from `--set`: anything that parses as a config value is taken
/// as such, otherwise it is a bare string.
fn parse_flag_value(text: &str) -> Value {
    format!("v = {text}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(text.to_owned()))
}

fn as_real(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

impl RunConfig {
    /// Parses `source` (file contents, `path` for messages), then applies
    /// `overrides` of the form `key=value` in order.
    pub fn load(source: &str, path: &str, overrides: &[String]) -> Result<Self, CliError> {
        let table: Table = source.parse().map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map(|s| source[..s.start].matches('\n').count() + 1)
                .unwrap_or(1);
            CliError::Usage(format!("{path}:{line}: {}", e.message()))
        })?;

        let mut settings: Vec<(&'static str, &'static str, Value, Origin)> = Vec::new();
        for (section, body) in &table {
            let origin = Origin::Line(section_line(source, section).unwrap_or(1));
            let Some(body) = body.as_table() else {
                return Err(CliError::Usage(format!(
                    "{}: `{section}` must be a [section] header",
                    origin.describe(path)
                )));
            };
            if !SCHEMA.iter().any(|(s, _, _)| s == section) {
                return Err(CliError::Usage(format!(
                    "{}: unknown section [{section}]",
                    origin.describe(path)
                )));
            }
            for (key, value) in body {
                let origin = Origin::Line(line_of(source, section, key).unwrap_or(1));
                let Some(&(s, k, _)) = SCHEMA.iter().find(|(s, k, _)| s == section && k == key)
                else {
                    return Err(CliError::Usage(format!(
                        "{}: unknown key `{key}` in [{section}]",
                        origin.describe(path)
                    )));
                };
                settings.push((s, k, value.clone(), origin));
            }
        }
        for raw in overrides {
            let origin = Origin::Flag(raw.clone());
            let Some((name, text)) = raw.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "{}: expected key=value",
                    origin.describe(path)
                )));
            };
            let (s, k) = resolve_key(name.trim())
                .map_err(|m| CliError::Usage(format!("{}: {m}", origin.describe(path))))?;
            settings.push((s, k, parse_flag_value(text.trim()), origin));
        }

        let mut cfg = Self::default();
        for (section, key, value, origin) in &settings {
            cfg.assign(section, key, value)
                .map_err(|m| CliError::Usage(format!("{}: {m}", origin.describe(path))))?;
        }
        cfg.validate().map_err(|(section, key, m)| {
            let last = settings
                .iter()
                .rev()
                .find(|(s, k, _, _)| *s == section && (key.is_empty() || *k == key));
            match last {
                Some((_, _, _, origin)) => {
                    CliError::Usage(format!("{}: {m}", origin.describe(path)))
                }
                None => CliError::Usage(format!("{path}: {m}")),
            }
        })?;
        Ok(cfg)
    }

    fn assign(&mut self, section: &str, key: &str, value: &Value) -> Result<(), String> {
        let kind = kind_of(section, key).ok_or_else(|| format!("unknown key `{section}.{key}`"))?;
        match kind {
            Kind::Real => {
                let v = as_real(value).ok_or_else(|| format!("`{key}` must be a number"))?;
                *self.real_mut(section, key) = v;
            }
            Kind::Count => {
                let v = value
                    .as_integer()
                    .filter(|&i| i > 0)
                    .ok_or_else(|| format!("`{key}` must be a positive integer"))?;
                self.solver.max_steps = v as u64;
            }
            Kind::Name => {
                let v = value
                    .as_str()
                    .ok_or_else(|| format!("`{key}` must be a parameter name"))?;
                self.sweep.parameter = v.to_owned();
            }
        }
        Ok(())
    }

    fn real_mut(&mut self, section: &str, key: &str) -> &mut f64 {
        match (section, key) {
            ("params", k) => self
                .params
                .get_mut(k)
                .expect("schema lists only model parameters"),
            ("initial", "x") => &mut self.initial.x,
            ("initial", "y") => &mut self.initial.y,
            ("initial", "z") => &mut self.initial.z,
            ("solver", "rel_tol") => &mut self.solver.rel_tol,
            ("solver", "abs_tol") => &mut self.solver.abs_tol,
            ("solver", "max_step") => &mut self.solver.max_step,
            ("solver", "initial_step") => &mut self.solver.initial_step,
            ("solver", "sample_interval") => &mut self.solver.sample_interval,
            ("simulate", "t_end") => &mut self.t_end,
            ("sweep", "start") => &mut self.sweep.start,
            ("sweep", "stop") => &mut self.sweep.stop,
            ("sweep", "step") => &mut self.sweep.step,
            ("sweep", "transient") => &mut self.sweep.transient,
            ("sweep", "sample") => &mut self.sweep.sample,
            ("sweep", "lle_threshold") => &mut self.sweep.lle_threshold,
            ("sweep", "spread_tol") => &mut self.sweep.spread_tol,
            ("lyapunov", "total_time") => &mut self.lyapunov.total_time,
            ("lyapunov", "renorm_interval") => &mut self.lyapunov.renorm_interval,
            ("lyapunov", "discard_fraction") => &mut self.lyapunov.discard_fraction,
            _ => unreachable!("no real setting {section}.{key}"),
        }
    }

    /// Checks every invariant. On failure returns the offending section, the
    /// key (empty when the whole section is at fault) and a message.
    fn validate(&self) -> Result<(), (&'static str, &'static str, String)> {
        if let Err(e) = self.params.validate() {
            let key = match &e {
                Error::InvalidParameter { name, .. } => *name,
                _ => "",
            };
            return Err(("params", key, e.to_string()));
        }
        self.initial
            .validate()
            .map_err(|e| ("initial", "", e.to_string()))?;
        self.solver
            .validate()
            .map_err(|e| ("solver", "", e.to_string()))?;
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(("simulate", "t_end", "`t_end` must be positive".into()));
        }
        self.sweep_spec().map_err(|e| ("sweep", "", e))?;
        let l = &self.lyapunov;
        if !(l.total_time.is_finite() && l.total_time > 0.0) {
            return Err((
                "lyapunov",
                "total_time",
                "`total_time` must be positive".into(),
            ));
        }
        if !(l.renorm_interval.is_finite() && l.renorm_interval > 0.0) {
            return Err((
                "lyapunov",
                "renorm_interval",
                "`renorm_interval` must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&l.discard_fraction) {
            return Err((
                "lyapunov",
                "discard_fraction",
                "`discard_fraction` must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Sweep over the configured grid, with this run's parameters as the base.
    pub fn sweep_spec(&self) -> Result<SweepSpec<f64>, String> {
        let s = &self.sweep;
        let grid = SweepSpec::uniform_grid(s.start, s.stop, s.step).map_err(|e| e.to_string())?;
        let spec = SweepSpec {
            initial: self.initial,
            transient: s.transient,
            sample: s.sample,
            solver: self.solver,
            lle_threshold: s.lle_threshold,
            spread_tol: s.spread_tol,
            ..SweepSpec::new(&s.parameter, grid, self.params)
        };
        spec.validate().map_err(|e| e.to_string())?;
        if !(s.lle_threshold >= 0.0 && s.spread_tol >= 0.0) {
            return Err("`lle_threshold` and `spread_tol` must be nonnegative".into());
        }
        Ok(spec)
    }

    /// Every effective option, in the config format.
    pub fn manifest(&self, command: &str) -> String {
        let mut out =
            format!("# igp {command}\n# effective options; pass back with --config to rerun\n");
        let mut copy = self.clone();
        let mut section = "";
        for &(s, k, kind) in SCHEMA {
            if s != section {
                let _ = write!(out, "\n[{s}]\n");
                section = s;
            }
            let value = match kind {
                Kind::Real => format_real(*copy.real_mut(s, k)),
                Kind::Count => self.solver.max_steps.to_string(),
                Kind::Name => format!("\"{}\"", self.sweep.parameter),
            };
            let _ = writeln!(out, "{k} = {value}");
        }
        out
    }
}

/// Shortest text that reads back to the same `f64`, always with a decimal
/// point or exponent so it stays a float.
fn format_real(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains(['.', 'e', 'E']) || !v.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}
