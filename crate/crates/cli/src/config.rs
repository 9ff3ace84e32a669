//! Run configuration: a JSON file and/or inline flags, flags taking precedence.

use std::fs;
use std::path::{Path, PathBuf};

use anharmonic_core::eigensolve::{BoundaryCondition, BoundaryProblem, Geometry, Scheme};
use anharmonic_core::potential::{Composite, Perturbation, Piece, PotentialSpec, PowerTerm};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Problems with the user's configuration; mapped to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Output {
    #[serde(default)]
    pub format: Format,
    /// stdout when absent
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// Optional overrides of the automatically chosen truncation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub l: Option<f64>,
    pub h: Option<f64>,
    pub scheme: Option<Scheme>,
}

/// On-disk form of `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    pub potential: PotentialSpec<f64>,
    #[serde(default)]
    pub geometry: Option<Geometry>,
    #[serde(default)]
    pub bc: Option<BoundaryCondition>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub n: Option<[usize; 2]>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub output: Option<Output>,
}

fn default_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}

#[derive(Debug, Clone, Args, Default)]
pub struct ProblemArgs {
    /// JSON run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// single power |x|^alpha
    #[arg(long, conflicts_with_all = ["terms", "composite"])]
    pub alpha: Option<f64>,
    /// power sum, e.g. `1:2,0.1:4` for x^2 + 0.1x^4
    #[arg(long, conflicts_with = "composite")]
    pub terms: Option<String>,
    /// `shifted:c,alpha` for (|x|+c)^alpha or `quartic:c` for (x^2+c)^2
    #[arg(long)]
    pub composite: Option<String>,
    /// perturbation piece, repeatable: `zero`, `step:h,lo,hi`, `weierstrass:tau,J`,
    /// `cosine:amp,omega,lo,hi`, `table:file.csv`
    #[arg(long = "perturbation")]
    pub perturbation: Vec<String>,
    /// support radius of the perturbation
    #[arg(long)]
    pub b: Option<f64>,
    /// boundary condition at 0; selects the half-line problem
    #[arg(long, value_enum)]
    pub bc: Option<BcArg>,
    /// index range `lo..hi` (inclusive) or a single index
    #[arg(long)]
    pub n: Option<String>,
    /// eigenvalue tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// truncation length L (automatic by default)
    #[arg(long = "grid-l")]
    pub grid_l: Option<f64>,
    /// grid step h (automatic by default)
    #[arg(long = "grid-h")]
    pub grid_h: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// output file; stdout when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BcArg {
    Dirichlet,
    Neumann,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialSpec<f64>,
    pub geometry: Geometry,
    pub bc: BoundaryCondition,
    pub grid: Grid,
    pub n_lo: usize,
    pub n_hi: usize,
    pub tol: f64,
    pub output: Output,
}

impl RunConfig {
    /// Boundary problem sized for `n_hi`, with any explicit grid overrides applied.
    pub fn problem(&self) -> anharmonic_core::Result<BoundaryProblem<f64>> {
        let mut p = BoundaryProblem::auto(&self.potential, self.geometry, self.bc, self.n_hi)?;
        if let Some(l) = self.grid.l {
            p.l = l;
        }
        if let Some(h) = self.grid.h {
            p.h = h;
        }
        if let Some(s) = self.grid.scheme {
            p.scheme = s;
        }
        Ok(p)
    }
}

fn num(s: &str, what: &str) -> Result<f64, ConfigError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => bad(format!("cannot read `{s}` as a number in {what}")),
    }
}

fn nums(s: &str, what: &str, count: usize) -> Result<Vec<f64>, ConfigError> {
    let v = s.split(',').map(|p| num(p, what)).collect::<Result<Vec<_>, _>>()?;
    if v.len() != count {
        return bad(format!("{what} expects {count} comma-separated values, got `{s}`"));
    }
    Ok(v)
}

pub fn parse_range(s: &str) -> Result<(usize, usize), ConfigError> {
    let idx = |p: &str| p.trim().parse::<usize>().or_else(|_| bad(format!("cannot read `{p}` as an index")));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (idx(a)?, idx(b.trim_start_matches('='))?),
        None => {
            let k = idx(s)?;
            (k, k)
        }
    };
    if lo == 0 || hi < lo {
        return bad(format!("index range `{s}` must satisfy 1 <= lo <= hi"));
    }
    Ok((lo, hi))
}

pub fn parse_terms(s: &str) -> Result<Vec<PowerTerm<f64>>, ConfigError> {
    s.split(',')
        .map(|t| match t.split_once(':') {
            Some((a, alpha)) => Ok(PowerTerm { a: num(a, "--terms")?, alpha: num(alpha, "--terms")? }),
            None => bad(format!("term `{t}` is not of the form a:alpha")),
        })
        .collect()
}

pub fn parse_composite(s: &str) -> Result<Composite<f64>, ConfigError> {
    let (name, params) = s.split_once(':').unwrap_or((s, ""));
    match name {
        "shifted" => {
            let v = nums(params, "shifted:c,alpha", 2)?;
            Ok(Composite::ShiftedPower { c: v[0], alpha: v[1] })
        }
        "quartic" => Ok(Composite::Quartic { c: nums(params, "quartic:c", 1)?[0] }),
        "plain" => Ok(Composite::PlainSum),
        _ => bad(format!("unknown composite `{name}` (expected shifted or quartic)")),
    }
}

fn read_table(path: &Path) -> Result<Piece<f64>, ConfigError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .from_path(path)
        .or_else(|e| bad(format!("cannot open table {}: {e}", path.display())))?;
    let (mut x, mut v) = (vec![], vec![]);
    for rec in r.records() {
        let rec = rec.or_else(|e| bad(format!("bad row in {}: {e}", path.display())))?;
        if rec.len() != 2 {
            return bad(format!("table rows in {} need two columns x,v", path.display()));
        }
        x.push(num(&rec[0], "table")?);
        v.push(num(&rec[1], "table")?);
    }
    Ok(Piece::SampledTable { x, v })
}

pub fn parse_piece(s: &str) -> Result<Piece<f64>, ConfigError> {
    let (name, params) = s.split_once(':').unwrap_or((s, ""));
    match name {
        "zero" => Ok(Piece::Zero),
        "step" => {
            let v = nums(params, "step:height,lo,hi", 3)?;
            Ok(Piece::Step { height: v[0], lo: v[1], hi: v[2] })
        }
        "weierstrass" => {
            let v = nums(params, "weierstrass:tau,J", 2)?;
            if v[1] < 1.0 || v[1].fract() != 0.0 {
                return bad("weierstrass J must be a positive integer");
            }
            Ok(Piece::TruncatedWeierstrass { tau: v[0], j: v[1] as u32 })
        }
        "cosine" => {
            let v = nums(params, "cosine:amplitude,omega,lo,hi", 4)?;
            Ok(Piece::WindowedCosine { amplitude: v[0], omega: v[1], lo: v[2], hi: v[3] })
        }
        "table" => read_table(Path::new(params)),
        _ => bad(format!("unknown perturbation `{name}`")),
    }
}

/// Smallest convenient b enclosing the perturbation support.
fn default_b(v: &Perturbation<f64>) -> f64 {
    match v.support() {
        Some((lo, hi)) => (lo.abs().max(hi.abs()) * 1.1).max(1.0),
        None => 1.0,
    }
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = fs::read_to_string(path).or_else(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let file: ConfigFile = serde_json::from_str(&text).or_else(|e| bad(format!("{}: {e}", path.display())))?;
    if file.schema_version != CONFIG_SCHEMA_VERSION {
        return bad(format!("{}: schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})", path.display(), file.schema_version));
    }
    Ok(file)
}

impl ProblemArgs {
    /// Merges the config file (if any) with inline flags. `default_n` applies when neither gives a range.
    pub fn resolve(&self, default_n: (usize, usize)) -> Result<RunConfig, ConfigError> {
        let file = self.config.as_deref().map(read_config_file).transpose()?;
        let inline_potential = self.alpha.is_some() || self.terms.is_some() || self.composite.is_some();
        let mut spec = match (&file, inline_potential) {
            (Some(f), false) => f.potential.clone(),
            (_, true) => {
                let mut s = if let Some(a) = self.alpha {
                    PotentialSpec::power(a, 1.0)
                } else if let Some(t) = &self.terms {
                    PotentialSpec::plain(parse_terms(t)?, 1.0)
                } else {
                    PotentialSpec { terms: vec![], composite: parse_composite(self.composite.as_deref().unwrap_or(""))?, perturbation: Perturbation::zero(), b: 1.0 }
                };
                if let Some(f) = &file {
                    s.perturbation = f.potential.perturbation.clone();
                    s.b = f.potential.b;
                }
                s
            }
            (None, false) => return bad("no potential given: use --config, --alpha, --terms or --composite"),
        };
        if !self.perturbation.is_empty() {
            let pieces = self.perturbation.iter().map(|p| parse_piece(p)).collect::<Result<Vec<_>, _>>()?;
            spec.perturbation = Perturbation { pieces: pieces.into_iter().filter(|p| *p != Piece::Zero).collect() };
            if self.b.is_none() {
                spec.b = spec.b.max(default_b(&spec.perturbation));
            }
        } else if file.is_none() {
            spec.b = default_b(&spec.perturbation);
        }
        if let Some(b) = self.b {
            spec.b = b;
        }
        spec.validate().or_else(|e| bad(e.to_string()))?;

        let (mut geometry, mut bc) = match &file {
            Some(f) => (f.geometry.unwrap_or_default(), f.bc.unwrap_or_default()),
            None => (Geometry::FullLine, BoundaryCondition::Dirichlet),
        };
        if let Some(f) = &file {
            if f.bc.is_some() && f.geometry.is_none() {
                geometry = Geometry::HalfLine;
            }
        }
        if let Some(b) = self.bc {
            geometry = Geometry::HalfLine;
            bc = match b {
                BcArg::Dirichlet => BoundaryCondition::Dirichlet,
                BcArg::Neumann => BoundaryCondition::Neumann,
            };
        }
        let (n_lo, n_hi) = match (&self.n, file.as_ref().and_then(|f| f.n)) {
            (Some(s), _) => parse_range(s)?,
            (None, Some([lo, hi])) => {
                if lo == 0 || hi < lo {
                    return bad(format!("index range [{lo}, {hi}] must satisfy 1 <= lo <= hi"));
                }
                (lo, hi)
            }
            (None, None) => default_n,
        };
        let tol = self.tol.or(file.as_ref().and_then(|f| f.tol)).unwrap_or(1e-9);
        if !(tol > 0.0 && tol.is_finite()) {
            return bad(format!("tol must be positive, got {tol}"));
        }
        let mut grid = file.as_ref().map(|f| f.grid).unwrap_or_default();
        grid.l = self.grid_l.or(grid.l);
        grid.h = self.grid_h.or(grid.h);
        for v in [grid.l, grid.h].into_iter().flatten() {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("grid values must be positive, got {v}"));
            }
        }
        let mut output = file.as_ref().and_then(|f| f.output.clone()).unwrap_or_default();
        if let Some(fmt) = self.format {
            output.format = fmt;
        }
        if let Some(p) = &self.output {
            output.path = Some(p.clone());
        }
        Ok(RunConfig { potential: spec, geometry, bc, grid, n_lo, n_hi, tol, output })
    }
}
