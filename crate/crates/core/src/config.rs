//! JSON configuration: parameters, the four operator entries as lists of
//! terms, sampling grids and tolerances.
//!
//! ```json
//! {
//!   "params": { "c0": 1.15 },
//!   "entries": {
//!     "a": [ { "power": 0, "limit": "-1", "perturbation": "0.1*exp(-x^2)" },
//!            { "power": 2, "limit": "0.05" } ],
//!     "b": [],
//!     "c": [],
//!     "d": [ { "power": 1, "limit": "c0" } ]
//!   },
//!   "grids": { "x_max": 50 },
//!   "tolerances": { "margin_tol": 1e-8 }
//! }
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ellipticity::{EllipticityError, SampleGrid};
use crate::expr::{parse_expr, EvalError, Params, ParseError};
use crate::symbols::{CoeffFn, DiffSymbol, OperatorMatrix, SymbolError, XPoint};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("expression at {pointer}: {source}")]
    Parse { pointer: String, source: ParseError },
    #[error("expression at {pointer}: {source}")]
    Eval { pointer: String, source: EvalError },
    #[error("invalid value at {pointer}: {message}")]
    Invalid { pointer: String, message: String },
    #[error("{0}")]
    Operator(#[from] SymbolError),
    #[error("grids: {0}")]
    Grid(#[from] EllipticityError),
}

/// One term `coeff(x) D^power`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub power: u32,
    /// Expression in the parameters; must not mention `x`.
    pub limit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entries {
    pub a: Vec<Term>,
    #[serde(default)]
    pub b: Vec<Term>,
    #[serde(default)]
    pub c: Vec<Term>,
    pub d: Vec<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Half-width of the `x` sample range; also the decay-check abscissa.
    pub x_max: f64,
    pub x_points: usize,
    pub xi_min: f64,
    pub xi_max: f64,
    /// Number of log-spaced `|xi|` values (each used with both signs).
    pub xi_points: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { x_max: 50.0, x_points: 201, xi_min: 1.0, xi_max: 1e3, xi_points: 200 }
    }
}

impl Grids {
    pub fn sample_grid(&self) -> Result<SampleGrid, EllipticityError> {
        SampleGrid::new(self.x_max, self.x_points, self.xi_min, self.xi_max, self.xi_points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Minimum accepted ellipticity margin.
    pub margin_tol: f64,
    /// Bound on `|perturbation(+-x_max)|`.
    pub decay_tol: f64,
    /// Resolvent denominators below this are poles.
    pub pole_tol: f64,
    /// Minimum distance of the stabilization probe from the `d` curves.
    pub pole_guard: f64,
    /// Largest accepted stabilization metric at the farthest probe abscissa.
    pub stab_tol: f64,
    pub coarse_tol: f64,
    pub refine_tol: f64,
    pub excl_tol: f64,
    pub qr_tol: f64,
    /// Relative pencil residual accepted for traced roots.
    pub root_tol: f64,
    /// Fixed eigenvalue-to-curve tolerance; absent selects it from the
    /// local curve speed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist_tol: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            margin_tol: 1e-8,
            decay_tol: 1e-6,
            pole_tol: 1e-12,
            pole_guard: 0.5,
            stab_tol: 1e-6,
            coarse_tol: 1e-2,
            refine_tol: 1e-10,
            excl_tol: 1e-6,
            qr_tol: 1e-12,
            root_tol: 1e-10,
            dist_tol: None,
        }
    }
}

/// The file layout, as written by [`emit_config`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub entries: Entries,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub file: ConfigFile,
    pub operator: OperatorMatrix,
    pub grid: SampleGrid,
}

impl Config {
    pub fn tolerances(&self) -> &Tolerances {
        &self.file.tolerances
    }

    pub fn grids(&self) -> &Grids {
        &self.file.grids
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            serde_path_to_error::Segment::Seq { index } => {
                let _ = write!(out, "/{index}");
            }
            serde_path_to_error::Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            serde_path_to_error::Segment::Enum { variant } => {
                out.push('/');
                out.push_str(variant);
            }
            serde_path_to_error::Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        "/".to_string()
    } else {
        out
    }
}

pub fn parse_config_str(text: &str) -> Result<ConfigFile, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
        pointer: pointer_of(e.path()),
        message: e.inner().to_string(),
    })
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    Config::from_file(parse_config_str(&text)?)
}

pub fn emit_config(file: &ConfigFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("config serializes");
    s.push('\n');
    s
}

fn build_entry(name: &str, terms: &[Term], params: &Params, tol: &Tolerances, x_far: f64) -> Result<DiffSymbol, ConfigError> {
    let Some(order) = terms.iter().map(|t| t.power as usize).max() else {
        return Ok(DiffSymbol::zero());
    };
    let mut coeffs: Vec<Option<CoeffFn>> = vec![None; order + 1];
    for (k, term) in terms.iter().enumerate() {
        let base = format!("/entries/{name}/{k}");
        let slot = &mut coeffs[term.power as usize];
        if slot.is_some() {
            return Err(ConfigError::Invalid {
                pointer: format!("{base}/power"),
                message: format!("power {} appears more than once in entry {name}", term.power),
            });
        }
        let pointer = format!("{base}/limit");
        let limit_expr =
            parse_expr(&term.limit).map_err(|source| ConfigError::Parse { pointer: pointer.clone(), source })?;
        if limit_expr.mentions_x() {
            return Err(ConfigError::Invalid { pointer, message: "limit must not depend on x".into() });
        }
        let limit = limit_expr.eval(0.0, params).map_err(|source| ConfigError::Eval { pointer, source })?;
        let coeff = match &term.perturbation {
            None => CoeffFn::constant(limit),
            Some(text) => {
                let pointer = format!("{base}/perturbation");
                let e = parse_expr(text).map_err(|source| ConfigError::Parse { pointer: pointer.clone(), source })?;
                let coeff = CoeffFn::perturbed(limit, &e, params)
                    .map_err(|source| ConfigError::Eval { pointer: pointer.clone(), source })?;
                for x in [-x_far, x_far] {
                    let v = coeff
                        .perturbation_at(XPoint::At(x))
                        .map_err(|source| ConfigError::Eval { pointer: pointer.clone(), source })?
                        .norm();
                    if v > tol.decay_tol {
                        return Err(ConfigError::Invalid {
                            pointer,
                            message: format!(
                                "decay check failed: perturbation has magnitude {v:e} at x={x}, above decay_tol {:e}",
                                tol.decay_tol
                            ),
                        });
                    }
                }
                coeff
            }
        };
        *slot = Some(coeff);
    }
    let coeffs = coeffs.into_iter().map(|c| c.unwrap_or_else(|| CoeffFn::constant(Complex64::new(0.0, 0.0)))).collect();
    DiffSymbol::new(coeffs).map_err(|e| match e {
        SymbolError::LeadingVanishes(k) => ConfigError::Invalid {
            pointer: format!("/entries/{name}"),
            message: format!("coefficient of the highest power {k} is identically zero"),
        },
        other => ConfigError::Operator(other),
    })
}

impl Config {
    /// Parses every expression and enforces the operator-level invariants.
    pub fn from_file(file: ConfigFile) -> Result<Config, ConfigError> {
        let params: Params = file.params.iter().map(|(k, v)| (k.clone(), Complex64::new(*v, 0.0))).collect();
        for (k, v) in &file.params {
            if !v.is_finite() {
                return Err(ConfigError::Invalid { pointer: format!("/params/{k}"), message: "must be finite".into() });
            }
        }
        let tol = &file.tolerances;
        let x_far = file.grids.x_max;
        let e = &file.entries;
        let a = build_entry("a", &e.a, &params, tol, x_far)?;
        let b = build_entry("b", &e.b, &params, tol, x_far)?;
        let c = build_entry("c", &e.c, &params, tol, x_far)?;
        let d = build_entry("d", &e.d, &params, tol, x_far)?;
        let operator = OperatorMatrix::new(a, b, c, d)?;
        let grid = file.grids.sample_grid()?;
        Ok(Config { file, operator, grid })
    }
}
