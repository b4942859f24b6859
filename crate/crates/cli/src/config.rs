//! `key = value` run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anlab::evolve::{BoundaryMode, EquationKind, MAX_STABLE_CFL};
use anlab::grid::MIN_POINTS;
use anlab::stationary::DEFAULT_S0;
use thiserror::Error;

/// Where a configuration value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    /// The n-th `--override` (1-based).
    Override(usize),
    Default,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Override(n) => write!(f, "override {n}"),
            Location::Default => f.write_str("default"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{location}: {message}")]
pub struct ConfigError {
    pub location: Location,
    pub message: String,
}

/// Experiment selected by `command`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Evolve,
    Stationary,
    Channels,
    Smallscale,
    Truncated,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Stationary => "stationary",
            Command::Channels => "channels",
            Command::Smallscale => "smallscale",
            Command::Truncated => "truncated",
            Command::Sweep => "sweep",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s.trim() {
            "evolve" => Command::Evolve,
            "stationary" => Command::Stationary,
            "channels" => Command::Channels,
            "smallscale" => Command::Smallscale,
            "truncated" => Command::Truncated,
            "sweep" => Command::Sweep,
            other => return Err(format!("unknown command '{other}'")),
        })
    }
}

/// Initial data: a builtin family with its parameters, or a snapshot file.
#[derive(Clone, Debug, PartialEq)]
pub enum DataSpec {
    /// `u₀ = A e^{−(r−c)²/w²}`, `u₁ = 0` (5d field).
    GaussianBump { amplitude: f64, center: f64, width: f64 },
    /// `ψ = 2 arctan(r/t₀)` at time `t₀`.
    TurokSpergel { t0: f64 },
    /// `u₀ = A χ(r/a) r⁻³`, `u₁ = 0`, with χ vanishing on `[0, a/2]`.
    NewtonTail { a: f64, amplitude: f64 },
    /// `u₀ = 0`, `u₁ = A χ(r/a) r⁻³`.
    PlaneVelocity { a: f64, amplitude: f64 },
    CustomFile { path: PathBuf },
}

impl DataSpec {
    /// Time of the data when it is known without reading files.
    pub fn initial_time(&self) -> Option<f64> {
        match self {
            DataSpec::TurokSpergel { t0 } => Some(*t0),
            DataSpec::CustomFile { .. } => None,
            _ => Some(0.0),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<f64, String> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{name} must be positive, got {x}"))
    }
}

fn finite(name: &str, x: f64) -> Result<f64, String> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{name} must be finite, got {x}"))
    }
}

fn parse_f64(name: &str, s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("{name}: '{}' is not a number", s.trim()))
}

impl FromStr for DataSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut tokens = s.split_whitespace();
        let family = tokens.next().ok_or("empty initial-data spec")?;
        let mut params: Vec<(&str, &str)> = Vec::new();
        for tok in tokens {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| format!("expected name=value, got '{tok}'"))?;
            if params.iter().any(|(p, _)| *p == k) {
                return Err(format!("parameter '{k}' given twice"));
            }
            params.push((k, v));
        }
        let allowed: &[&str] = match family {
            "gaussian_bump" => &["amplitude", "center", "width"],
            "turok_spergel" => &["t0"],
            "newton_tail" | "plane_velocity" => &["a", "amplitude"],
            "custom_file" => &["path"],
            other => return Err(format!("unknown initial-data family '{other}'")),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(format!("{family} has no parameter '{k}'"));
        }
        let get = |name: &str, default: f64| -> Result<f64, String> {
            match params.iter().find(|(k, _)| *k == name) {
                Some((_, v)) => parse_f64(name, v),
                None => Ok(default),
            }
        };
        Ok(match family {
            "gaussian_bump" => DataSpec::GaussianBump {
                amplitude: finite("amplitude", get("amplitude", 0.01)?)?,
                center: finite("center", get("center", 3.0)?)?,
                width: positive("width", get("width", 0.5)?)?,
            },
            "turok_spergel" => DataSpec::TurokSpergel {
                t0: positive("t0", get("t0", 1.0)?)?,
            },
            "newton_tail" => DataSpec::NewtonTail {
                a: positive("a", get("a", 1.0)?)?,
                amplitude: finite("amplitude", get("amplitude", 1.0)?)?,
            },
            "plane_velocity" => DataSpec::PlaneVelocity {
                a: positive("a", get("a", 1.0)?)?,
                amplitude: finite("amplitude", get("amplitude", 1.0)?)?,
            },
            _ => {
                let path = params
                    .iter()
                    .find(|(k, _)| *k == "path")
                    .map(|(_, v)| PathBuf::from(v))
                    .ok_or("custom_file needs path=...")?;
                DataSpec::CustomFile { path }
            }
        })
    }
}

impl fmt::Display for DataSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSpec::GaussianBump { amplitude, center, width } => {
                write!(f, "gaussian_bump amplitude={amplitude} center={center} width={width}")
            }
            DataSpec::TurokSpergel { t0 } => write!(f, "turok_spergel t0={t0}"),
            DataSpec::NewtonTail { a, amplitude } => write!(f, "newton_tail a={a} amplitude={amplitude}"),
            DataSpec::PlaneVelocity { a, amplitude } => {
                write!(f, "plane_velocity a={a} amplitude={amplitude}")
            }
            DataSpec::CustomFile { path } => write!(f, "custom_file path={}", path.display()),
        }
    }
}

/// A fully validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub equation: EquationKind,
    pub r_max: f64,
    pub n_points: usize,
    pub cfl: f64,
    pub t_final: f64,
    pub output_times: Vec<f64>,
    pub boundary: BoundaryMode,
    pub initial: DataSpec,
    pub radii: Vec<f64>,
    pub blowup_threshold: f64,
    pub energy_growth: f64,
    pub small_data_threshold: f64,
    pub alphas: Vec<f64>,
    pub r_min: f64,
    pub abort_threshold: f64,
    pub channel_radius: f64,
    pub horizon: f64,
    pub key_radii: Vec<f64>,
    pub decay_window: (f64, f64),
    pub lambdas: Vec<f64>,
    pub truncation_radii: Vec<f64>,
    pub sweep_key: Option<String>,
    pub sweep_values: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Evolve,
            equation: EquationKind::AnPsi,
            r_max: 20.0,
            n_points: 2000,
            cfl: 0.45,
            t_final: 10.0,
            output_times: Vec::new(),
            boundary: BoundaryMode::None,
            initial: DataSpec::GaussianBump {
                amplitude: 0.01,
                center: 3.0,
                width: 0.5,
            },
            radii: Vec::new(),
            blowup_threshold: 1e6,
            energy_growth: 10.0,
            small_data_threshold: 0.1,
            alphas: vec![0.0, 0.5, -0.5],
            r_min: 0.05,
            abort_threshold: 1e3,
            channel_radius: 1.0,
            horizon: 10.0,
            key_radii: Vec::new(),
            decay_window: (5.0, 15.0),
            lambdas: vec![0.2, 0.1, 0.05],
            truncation_radii: vec![10.0, 20.0, 40.0],
            sweep_key: None,
            sweep_values: Vec::new(),
        }
    }
}

/// Every accepted key with a one-line description, in canonical order.
pub const KEYS: &[(&str, &str)] = &[
    ("command", "evolve | stationary | channels | smallscale | truncated | sweep"),
    ("equation", "an_psi | an_u | wave_map | quintic5d | free5d | linearized3d | exterior_truncated(R)"),
    ("r_max", "outer radius of the grid"),
    ("n_points", "number of grid intervals (at least 16)"),
    ("cfl", "Courant number dt/dr, in (0, 1)"),
    ("t_final", "final time of evolve runs (absolute; may precede the data time)"),
    ("output_times", "comma-separated snapshot times between the data time and t_final"),
    ("boundary", "none | sommerfeld"),
    ("initial", "builtin family with name=value parameters, e.g. 'gaussian_bump amplitude=0.01 center=3 width=0.5'; families: gaussian_bump, turok_spergel t0=, newton_tail a= amplitude=, plane_velocity a= amplitude=, custom_file path="),
    ("radii", "comma-separated base radii a of the exterior-energy columns (energy on r >= a + |t - t0|)"),
    ("blowup_threshold", "blow-up is declared when max |u| of the 5d field exceeds this"),
    ("energy_growth", "blow-up is declared when the energy grows by this factor"),
    ("small_data_threshold", "largest admissible data norm for truncated"),
    ("alphas", "comma-separated stationary parameters"),
    ("r_min", "inner radius of stationary profiles"),
    ("abort_threshold", "stationary integration stops once |phi| exceeds this"),
    ("channel_radius", "base radius a of the channel experiment"),
    ("horizon", "time span of channels, smallscale (before rescaling) and truncated"),
    ("key_radii", "comma-separated radii of the projection-inequality table (default: channel_radius)"),
    ("decay_window", "fit window 'r_lo, r_hi' of the decay diagnostics"),
    ("lambdas", "comma-separated scales of smallscale"),
    ("truncation_radii", "comma-separated truncation radii of truncated"),
    ("sweep_key", "key varied by sweep; each value runs evolve in its own subdirectory"),
    ("sweep_values", "semicolon-separated values of sweep_key"),
];

/// Help text listing every key with its default.
pub fn key_help() -> String {
    let defaults = RunConfig::default().entries();
    let mut out = String::from("Configuration keys (key = value, '#' starts a comment):\n");
    for ((key, help), (_, default)) in KEYS.iter().zip(&defaults) {
        out.push_str(&format!("  {key} = {default}\n      {help}\n"));
    }
    out
}

fn parse_list(name: &str, s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_f64(name, t).and_then(|x| finite(name, x)))
        .collect()
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Canonical `(key, value)` pairs in the order of [`KEYS`].
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("command", self.command.name().to_string()),
            ("equation", self.equation.to_string()),
            ("r_max", self.r_max.to_string()),
            ("n_points", self.n_points.to_string()),
            ("cfl", self.cfl.to_string()),
            ("t_final", self.t_final.to_string()),
            ("output_times", join(&self.output_times)),
            ("boundary", self.boundary.to_string()),
            ("initial", self.initial.to_string()),
            ("radii", join(&self.radii)),
            ("blowup_threshold", self.blowup_threshold.to_string()),
            ("energy_growth", self.energy_growth.to_string()),
            ("small_data_threshold", self.small_data_threshold.to_string()),
            ("alphas", join(&self.alphas)),
            ("r_min", self.r_min.to_string()),
            ("abort_threshold", self.abort_threshold.to_string()),
            ("channel_radius", self.channel_radius.to_string()),
            ("horizon", self.horizon.to_string()),
            ("key_radii", join(&self.key_radii)),
            ("decay_window", join(&[self.decay_window.0, self.decay_window.1])),
            ("lambdas", join(&self.lambdas)),
            ("truncation_radii", join(&self.truncation_radii)),
            ("sweep_key", self.sweep_key.clone().unwrap_or_default()),
            ("sweep_values", self.sweep_values.join("; ")),
        ]
    }

    /// The configuration as text that [`parse_config`] maps back to `self`.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Sets one key from its textual value, checking the value on its own.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let num = |name: &str| parse_f64(name, v);
        match key {
            "command" => self.command = v.parse()?,
            "equation" => self.equation = v.parse().map_err(|e: anlab::Error| e.to_string())?,
            "r_max" => self.r_max = positive(key, num(key)?)?,
            "n_points" => {
                let n: usize = v.parse().map_err(|_| format!("n_points: '{v}' is not a count"))?;
                if n < MIN_POINTS {
                    return Err(format!("n_points must be at least {MIN_POINTS}, got {n}"));
                }
                self.n_points = n;
            }
            "cfl" => {
                let c = num(key)?;
                if !(c > 0.0 && c < 1.0) {
                    return Err(format!(
                        "cfl must lie in (0, 1), got {c} (RK4 is stable up to {MAX_STABLE_CFL})"
                    ));
                }
                self.cfl = c;
            }
            "t_final" => self.t_final = finite(key, num(key)?)?,
            "output_times" => self.output_times = parse_list(key, v)?,
            "boundary" => self.boundary = v.parse().map_err(|e: anlab::Error| e.to_string())?,
            "initial" => self.initial = v.parse()?,
            "radii" => self.radii = positive_list(key, v)?,
            "blowup_threshold" => self.blowup_threshold = positive(key, num(key)?)?,
            "energy_growth" => {
                let g = num(key)?;
                if !(g > 1.0 && g.is_finite()) {
                    return Err(format!("energy_growth must exceed 1, got {g}"));
                }
                self.energy_growth = g;
            }
            "small_data_threshold" => self.small_data_threshold = positive(key, num(key)?)?,
            "alphas" => self.alphas = parse_list(key, v)?,
            "r_min" => {
                let r = positive(key, num(key)?)?;
                if r >= DEFAULT_S0.exp() {
                    return Err(format!("r_min must lie below the tail start {}", DEFAULT_S0.exp()));
                }
                self.r_min = r;
            }
            "abort_threshold" => self.abort_threshold = positive(key, num(key)?)?,
            "channel_radius" => self.channel_radius = positive(key, num(key)?)?,
            "horizon" => self.horizon = positive(key, num(key)?)?,
            "key_radii" => self.key_radii = positive_list(key, v)?,
            "decay_window" => {
                let w = parse_list(key, v)?;
                if w.len() != 2 || !(w[0] > 0.0 && w[0] < w[1]) {
                    return Err(format!("decay_window must be 'r_lo, r_hi' with 0 < r_lo < r_hi, got '{v}'"));
                }
                self.decay_window = (w[0], w[1]);
            }
            "lambdas" => self.lambdas = positive_list(key, v)?,
            "truncation_radii" => self.truncation_radii = positive_list(key, v)?,
            "sweep_key" => {
                self.sweep_key = if v.is_empty() {
                    None
                } else if v == "sweep_key" || v == "sweep_values" || v == "command" {
                    return Err(format!("sweep_key cannot be '{v}'"));
                } else if KEYS.iter().any(|(k, _)| *k == v) {
                    Some(v.to_string())
                } else {
                    return Err(format!("sweep_key: unknown key '{v}'"));
                };
            }
            "sweep_values" => {
                self.sweep_values = v
                    .split(';')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(String::from)
                    .collect();
            }
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// The configuration of the i-th sweep run.
    pub fn sweep_run(&self, i: usize) -> Result<RunConfig, String> {
        let key = self.sweep_key.as_deref().ok_or("sweep_key is not set")?;
        let value = self.sweep_values.get(i).ok_or("sweep index out of range")?;
        let mut cfg = self.clone();
        cfg.command = Command::Evolve;
        cfg.sweep_key = None;
        cfg.sweep_values = Vec::new();
        cfg.set(key, value)?;
        Ok(cfg)
    }

    /// Checks between keys. Each failure names the key it should be reported
    /// against.
    fn check_pairs(&self) -> Result<(), (&'static str, String)> {
        if self.command == Command::Evolve || self.command == Command::Sweep {
            if let Some(t0) = self.initial.initial_time() {
                let (lo, hi) = if self.t_final >= t0 { (t0, self.t_final) } else { (self.t_final, t0) };
                if let Some(t) = self.output_times.iter().find(|&&t| t < lo || t > hi) {
                    return Err(("output_times", format!("output time {t} lies outside [{lo}, {hi}]")));
                }
            }
        }
        let cone_sized = matches!(
            self.command,
            Command::Channels | Command::Smallscale | Command::Truncated
        );
        if cone_sized && self.boundary != BoundaryMode::None {
            return Err((
                "boundary",
                format!("{} measures inside the light cone and needs boundary = none", self.command.name()),
            ));
        }
        match self.command {
            Command::Channels => {
                if self.channel_radius + self.horizon >= self.r_max {
                    return Err((
                        "horizon",
                        format!(
                            "channel_radius + horizon = {} must stay below r_max = {}",
                            self.channel_radius + self.horizon,
                            self.r_max
                        ),
                    ));
                }
                if self.decay_window.1 > self.r_max {
                    return Err(("decay_window", format!("decay window ends beyond r_max = {}", self.r_max)));
                }
                if let Some(r) = self.key_radii.iter().find(|&&r| r >= self.r_max) {
                    return Err(("key_radii", format!("radius {r} is not below r_max = {}", self.r_max)));
                }
            }
            Command::Stationary if self.alphas.is_empty() => {
                return Err(("alphas", "stationary needs at least one alpha".into()));
            }
            Command::Smallscale if self.lambdas.is_empty() => {
                return Err(("lambdas", "smallscale needs at least one lambda".into()));
            }
            Command::Truncated if self.truncation_radii.is_empty() => {
                return Err(("truncation_radii", "truncated needs at least one radius".into()));
            }
            Command::Sweep => {
                if self.sweep_key.is_none() {
                    return Err(("sweep_key", "sweep needs sweep_key".into()));
                }
                if self.sweep_values.is_empty() {
                    return Err(("sweep_values", "sweep needs at least one value".into()));
                }
                for i in 0..self.sweep_values.len() {
                    let cfg = self.sweep_run(i).map_err(|e| ("sweep_values", e))?;
                    cfg.check_pairs()
                        .map_err(|(_, e)| ("sweep_values", format!("value {}: {e}", i + 1)))?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn positive_list(name: &str, s: &str) -> Result<Vec<f64>, String> {
    let xs = parse_list(name, s)?;
    for &x in &xs {
        positive(name, x)?;
    }
    Ok(xs)
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with_overrides(text, &[])
}

/// Parses `text`, then applies each `key=value` override in order, then
/// checks the keys against each other.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<(String, Location)> = Vec::new();
    let fail = |location, message: String| ConfigError { location, message };

    for (k, raw) in text.lines().enumerate() {
        let location = Location::Line(k + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| fail(location, format!("expected 'key = value', got '{line}'")))?;
        let key = key.trim();
        if seen.iter().any(|(s, _)| s == key) {
            return Err(fail(location, format!("key '{key}' is set twice")));
        }
        cfg.set(key, value).map_err(|m| fail(location, m))?;
        seen.push((key.to_string(), location));
    }
    for (k, item) in overrides.iter().enumerate() {
        let location = Location::Override(k + 1);
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| fail(location, format!("expected 'key=value', got '{item}'")))?;
        let key = key.trim();
        cfg.set(key, value).map_err(|m| fail(location, m))?;
        seen.retain(|(s, _)| s != key);
        seen.push((key.to_string(), location));
    }
    cfg.check_pairs().map_err(|(key, message)| {
        let location = seen
            .iter()
            .find(|(s, _)| s == key)
            .map(|(_, l)| *l)
            .unwrap_or(Location::Default);
        fail(location, format!("{key}: {message}"))
    })?;
    Ok(cfg)
}
