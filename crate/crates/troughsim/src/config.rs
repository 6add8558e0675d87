//! Run configuration: a sectioned key-value plain-text format.
//!
//! ```text
//! [physics]
//! alpha = 1.0
//! beta1 = 1.0
//! beta2 = 0.5
//! gamma = 1.0
//! gamma_star = 0.05
//!
//! [grid]
//! n_cells = 400
//!
//! [source]
//! q = 0.45                      # or q_table = 0:0.3, 5:0.5
//! q_profile = 0:1.0, 1:1.0      # optional spatial modulation
//! t_out = 0.25
//! t_sky = 0.2
//!
//! [boundary]
//! rho_left = 0.75               # or rho_left_table = 0:0.75, 10:0.7
//! rho_right = 0.5
//! p_left = 1.0
//! p_right = 0.0
//!
//! [initial]
//! rho0_profile = 0:0.75, 1:0.5  # or rho0 = 0.75
//!
//! [solver]
//! epsilon = 0.0025
//! cfl = 0.4
//! t_end = 10
//! tol_elliptic = 1e-12
//! output_stride = 40
//!
//! [run]
//! mode = simulate
//! output = out
//! ```
//!
//! Time series are inline tables `t0:v0, t1:v1, ...` with strictly
//! increasing abscissae; values between knots interpolate linearly. Unknown
//! keys are errors. `preset = "noor-like"` under `[run]` starts from the
//! built-in reference configuration, with any other keys applied on top.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::{Grid, PiecewiseLinear, PlantParams, Scenario, SourceTerm};
use crate::transient::SolverConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { key: String, line: usize },
    #[error("key `{key}`: {message}")]
    Schema { key: String, message: String },
    #[error("key `{key}`: table abscissae must be strictly increasing")]
    NonMonotoneTable { key: String },
    #[error("missing required key `{key}`")]
    MissingKey { key: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

/// Top-level run mode. The CLI subcommand takes precedence; the config value
/// is the default for programmatic use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Simulate,
    Stationary,
    Verify,
    CheckAssumptions,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Stationary => "stationary",
            Mode::Verify => "verify",
            Mode::CheckAssumptions => "check-assumptions",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "stationary" => Ok(Mode::Stationary),
            "verify" => Ok(Mode::Verify),
            "check-assumptions" => Ok(Mode::CheckAssumptions),
            other => Err(format!(
                "expected one of simulate|stationary|verify|check-assumptions, got `{other}`"
            )),
        }
    }
}

/// Everything a run needs: physics, scenario, numerics, output destination,
/// and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: PlantParams,
    pub scenario: Scenario,
    pub solver: SolverConfig,
    pub output_path: PathBuf,
    pub mode: Mode,
}

const KNOWN_KEYS: &[&str] = &[
    "physics.alpha",
    "physics.beta1",
    "physics.beta2",
    "physics.gamma",
    "physics.gamma_star",
    "grid.n_cells",
    "source.q",
    "source.q_table",
    "source.q_profile",
    "source.t_out",
    "source.t_out_table",
    "source.t_sky",
    "source.t_sky_table",
    "boundary.rho_left",
    "boundary.rho_left_table",
    "boundary.rho_right",
    "boundary.rho_right_table",
    "boundary.p_left",
    "boundary.p_left_table",
    "boundary.p_right",
    "boundary.p_right_table",
    "initial.rho0",
    "initial.rho0_profile",
    "solver.epsilon",
    "solver.cfl",
    "solver.t_end",
    "solver.tol_elliptic",
    "solver.output_stride",
    "solver.rho_floor",
    "solver.allow_inadmissible",
    "run.mode",
    "run.output",
    "run.preset",
];

const SECTIONS: &[&str] = &[
    "physics", "grid", "source", "boundary", "initial", "solver", "run",
];

struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(v, _)| v)
    }
}

fn tokenize(text: &str) -> Result<RawConfig, ConfigError> {
    let mut entries: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: format!("unknown section `[{name}]`"),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            message: "expected `key = value`".into(),
        })?;
        let section = section.as_ref().ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            message: "key outside of any [section]".into(),
        })?;
        let full_key = format!("{section}.{}", key.trim());
        if !KNOWN_KEYS.contains(&full_key.as_str()) {
            return Err(ConfigError::UnknownKey {
                key: full_key,
                line: line_no,
            });
        }
        let value = value.trim().trim_matches('"').to_string();
        if entries.insert(full_key.clone(), (value, line_no)).is_some() {
            return Err(ConfigError::DuplicateKey {
                key: full_key,
                line: line_no,
            });
        }
    }
    Ok(RawConfig { entries })
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| ConfigError::Schema {
        key: key.into(),
        message: format!("expected a number, got `{value}`"),
    })
}

fn parse_table(key: &str, value: &str) -> Result<PiecewiseLinear, ConfigError> {
    let mut knots = Vec::new();
    for part in value.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (a, v) = part.split_once(':').ok_or_else(|| ConfigError::Schema {
            key: key.into(),
            message: format!("expected `t:v` entries, got `{part}`"),
        })?;
        knots.push((parse_f64(key, a.trim())?, parse_f64(key, v.trim())?));
    }
    PiecewiseLinear::from_knots(knots).map_err(|e| match e {
        crate::model::ModelError::UnorderedTable { .. } => ConfigError::NonMonotoneTable {
            key: key.into(),
        },
        other => ConfigError::Schema {
            key: key.into(),
            message: other.to_string(),
        },
    })
}

/// Constant-or-table pair, e.g. `t_out` / `t_out_table`.
fn take_series(
    raw: &mut RawConfig,
    const_key: &str,
    table_key: &str,
    default: Option<&PiecewiseLinear>,
) -> Result<PiecewiseLinear, ConfigError> {
    let constant = raw.take(const_key);
    let table = raw.take(table_key);
    match (constant, table) {
        (Some(_), Some(_)) => Err(ConfigError::Schema {
            key: table_key.into(),
            message: format!("`{const_key}` and `{table_key}` are mutually exclusive"),
        }),
        (Some(v), None) => Ok(PiecewiseLinear::constant(parse_f64(const_key, &v)?)),
        (None, Some(v)) => parse_table(table_key, &v),
        (None, None) => match default {
            Some(d) => Ok(d.clone()),
            None => Err(ConfigError::MissingKey {
                key: const_key.into(),
            }),
        },
    }
}

fn positive(key: &str, value: f64) -> Result<f64, ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::Schema {
            key: key.into(),
            message: format!("must be strictly positive, got {value}"),
        })
    }
}

/// Parses a configuration document into a validated [`RunConfig`].
///
/// Defaults when a preset is not referenced: zero source and ambient data,
/// boundary and initial densities pinned at `gamma`, zero pressure drop,
/// and solver defaults from [`SolverConfig::defaults_for`]. `[physics]` and
/// `[grid]` are required.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut raw = tokenize(text)?;

    let base = match raw.take("run.preset") {
        Some(name) => match name.as_str() {
            "noor-like" => Some(crate::preset::preset_noor_like().0),
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        },
        None => None,
    };

    // Physics.
    let params = {
        let from_base = base.as_ref().map(|b| b.params);
        let mut value = |name: &'static str, current: Option<f64>| -> Result<f64, ConfigError> {
            let key = format!("physics.{name}");
            match raw.take(&key) {
                Some(v) => positive(&key, parse_f64(&key, &v)?),
                None => current.ok_or(ConfigError::MissingKey { key }),
            }
        };
        let alpha = value("alpha", from_base.map(|p| p.alpha()))?;
        let beta1 = value("beta1", from_base.map(|p| p.beta1()))?;
        let beta2 = value("beta2", from_base.map(|p| p.beta2()))?;
        let gamma = value("gamma", from_base.map(|p| p.gamma()))?;
        let gamma_star = value("gamma_star", from_base.map(|p| p.gamma_star()))?;
        PlantParams::new(alpha, beta1, beta2, gamma, gamma_star).map_err(|e| {
            ConfigError::Schema {
                key: "physics.gamma_star".into(),
                message: e.to_string(),
            }
        })?
    };

    // Grid.
    let grid = match raw.take("grid.n_cells") {
        Some(v) => {
            let n = v.parse::<usize>().map_err(|_| ConfigError::Schema {
                key: "grid.n_cells".into(),
                message: format!("expected a positive integer, got `{v}`"),
            })?;
            Grid::new(n).map_err(|e| ConfigError::Schema {
                key: "grid.n_cells".into(),
                message: e.to_string(),
            })?
        }
        None => match &base {
            Some(b) => b.scenario.grid,
            None => {
                return Err(ConfigError::MissingKey {
                    key: "grid.n_cells".into(),
                })
            }
        },
    };

    // Scenario data.
    let zero = PiecewiseLinear::constant(0.0);
    let at_gamma = PiecewiseLinear::constant(params.gamma());
    let b = base.as_ref();
    let q_time = take_series(
        &mut raw,
        "source.q",
        "source.q_table",
        Some(b.map(|b| &b.scenario.source.time).unwrap_or(&zero)),
    )?;
    let q_profile = match raw.take("source.q_profile") {
        Some(v) => Some(parse_table("source.q_profile", &v)?),
        None => b.and_then(|b| b.scenario.source.profile.clone()),
    };
    if q_time.min_value() < 0.0 || q_profile.as_ref().is_some_and(|p| p.min_value() < 0.0) {
        // A negative product could still arise from two sign flips, but
        // sign-definite factors are the honest contract here.
        return Err(ConfigError::Schema {
            key: "source.q".into(),
            message: "source values must be nonnegative".into(),
        });
    }
    let t_out = take_series(
        &mut raw,
        "source.t_out",
        "source.t_out_table",
        Some(b.map(|b| &b.scenario.t_out).unwrap_or(&zero)),
    )?;
    let t_sky = take_series(
        &mut raw,
        "source.t_sky",
        "source.t_sky_table",
        Some(b.map(|b| &b.scenario.t_sky).unwrap_or(&zero)),
    )?;
    let rho_left = take_series(
        &mut raw,
        "boundary.rho_left",
        "boundary.rho_left_table",
        Some(b.map(|b| &b.scenario.rho_left).unwrap_or(&at_gamma)),
    )?;
    let rho_right = take_series(
        &mut raw,
        "boundary.rho_right",
        "boundary.rho_right_table",
        Some(b.map(|b| &b.scenario.rho_right).unwrap_or(&at_gamma)),
    )?;
    let p_left = take_series(
        &mut raw,
        "boundary.p_left",
        "boundary.p_left_table",
        Some(b.map(|b| &b.scenario.p_left).unwrap_or(&zero)),
    )?;
    let p_right = take_series(
        &mut raw,
        "boundary.p_right",
        "boundary.p_right_table",
        Some(b.map(|b| &b.scenario.p_right).unwrap_or(&zero)),
    )?;
    let rho0 = take_series(
        &mut raw,
        "initial.rho0",
        "initial.rho0_profile",
        Some(b.map(|b| &b.scenario.rho0).unwrap_or(&at_gamma)),
    )?;

    let scenario = Scenario {
        grid,
        source: SourceTerm {
            time: q_time,
            profile: q_profile,
        },
        t_out,
        t_sky,
        rho_left,
        rho_right,
        p_left,
        p_right,
        rho0,
    };

    // Solver.
    let mut solver = match &base {
        Some(b) => b.solver.clone(),
        None => SolverConfig::defaults_for(&grid, &params),
    };
    if let Some(v) = raw.take("solver.epsilon") {
        solver.epsilon = parse_f64("solver.epsilon", &v)?;
    }
    if let Some(v) = raw.take("solver.cfl") {
        solver.cfl = parse_f64("solver.cfl", &v)?;
    }
    if let Some(v) = raw.take("solver.t_end") {
        solver.t_end = parse_f64("solver.t_end", &v)?;
    }
    if let Some(v) = raw.take("solver.tol_elliptic") {
        solver.tol_elliptic = positive("solver.tol_elliptic", parse_f64("solver.tol_elliptic", &v)?)?;
    }
    if let Some(v) = raw.take("solver.output_stride") {
        solver.output_stride = v.parse::<usize>().map_err(|_| ConfigError::Schema {
            key: "solver.output_stride".into(),
            message: format!("expected a positive integer, got `{v}`"),
        })?;
    }
    if let Some(v) = raw.take("solver.rho_floor") {
        solver.rho_floor = parse_f64("solver.rho_floor", &v)?;
    }
    if let Some(v) = raw.take("solver.allow_inadmissible") {
        solver.allow_inadmissible = v.parse::<bool>().map_err(|_| ConfigError::Schema {
            key: "solver.allow_inadmissible".into(),
            message: format!("expected true or false, got `{v}`"),
        })?;
    }
    solver.validate().map_err(|e| {
        let name = match &e {
            crate::model::ModelError::InvalidParameter { name, .. } => name,
            _ => "solver",
        };
        ConfigError::Schema {
            key: format!("solver.{name}"),
            message: e.to_string(),
        }
    })?;

    // Run.
    let mode = match raw.take("run.mode") {
        Some(v) => v.parse::<Mode>().map_err(|message| ConfigError::Schema {
            key: "run.mode".into(),
            message,
        })?,
        None => base.as_ref().map(|b| b.mode).unwrap_or_default(),
    };
    let output_path = match raw.take("run.output") {
        Some(v) => PathBuf::from(v),
        None => base
            .as_ref()
            .map(|b| b.output_path.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
    };

    debug_assert!(raw.entries.is_empty(), "unconsumed known keys: {:?}", raw.entries);

    Ok(RunConfig {
        params,
        scenario,
        solver,
        output_path,
        mode,
    })
}

fn write_series(out: &mut String, const_key: &str, table_key: &str, series: &PiecewiseLinear) {
    if series.is_constant() {
        let _ = writeln!(out, "{const_key} = {}", series.knots()[0].1);
    } else {
        let entries: Vec<String> = series
            .knots()
            .iter()
            .map(|(a, v)| format!("{a}:{v}"))
            .collect();
        let _ = writeln!(out, "{table_key} = {}", entries.join(", "));
    }
}

/// Serializes a [`RunConfig`] back to the plain-text format;
/// [`parse_config`] of the output reproduces the config exactly (float
/// formatting round-trips).
pub fn to_config_text(config: &RunConfig) -> String {
    let mut s = String::new();
    let p = &config.params;
    let _ = writeln!(s, "[physics]");
    let _ = writeln!(s, "alpha = {}", p.alpha());
    let _ = writeln!(s, "beta1 = {}", p.beta1());
    let _ = writeln!(s, "beta2 = {}", p.beta2());
    let _ = writeln!(s, "gamma = {}", p.gamma());
    let _ = writeln!(s, "gamma_star = {}", p.gamma_star());

    let _ = writeln!(s, "\n[grid]");
    let _ = writeln!(s, "n_cells = {}", config.scenario.grid.n_cells());

    let _ = writeln!(s, "\n[source]");
    write_series(&mut s, "q", "q_table", &config.scenario.source.time);
    if let Some(profile) = &config.scenario.source.profile {
        let entries: Vec<String> = profile
            .knots()
            .iter()
            .map(|(a, v)| format!("{a}:{v}"))
            .collect();
        let _ = writeln!(s, "q_profile = {}", entries.join(", "));
    }
    write_series(&mut s, "t_out", "t_out_table", &config.scenario.t_out);
    write_series(&mut s, "t_sky", "t_sky_table", &config.scenario.t_sky);

    let _ = writeln!(s, "\n[boundary]");
    write_series(&mut s, "rho_left", "rho_left_table", &config.scenario.rho_left);
    write_series(&mut s, "rho_right", "rho_right_table", &config.scenario.rho_right);
    write_series(&mut s, "p_left", "p_left_table", &config.scenario.p_left);
    write_series(&mut s, "p_right", "p_right_table", &config.scenario.p_right);

    let _ = writeln!(s, "\n[initial]");
    write_series(&mut s, "rho0", "rho0_profile", &config.scenario.rho0);

    let sv = &config.solver;
    let _ = writeln!(s, "\n[solver]");
    let _ = writeln!(s, "epsilon = {}", sv.epsilon);
    let _ = writeln!(s, "cfl = {}", sv.cfl);
    let _ = writeln!(s, "t_end = {}", sv.t_end);
    let _ = writeln!(s, "tol_elliptic = {}", sv.tol_elliptic);
    let _ = writeln!(s, "output_stride = {}", sv.output_stride);
    let _ = writeln!(s, "rho_floor = {}", sv.rho_floor);
    let _ = writeln!(s, "allow_inadmissible = {}", sv.allow_inadmissible);

    let _ = writeln!(s, "\n[run]");
    let _ = writeln!(s, "mode = {}", config.mode.as_str());
    let _ = writeln!(s, "output = {}", config.output_path.display());
    s
}
