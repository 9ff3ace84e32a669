//! `anharmonic`: spectra of perturbed anharmonic oscillators and their asymptotics.
//!
//! Exit codes: 0 ok, 1 a checked criterion failed, 2 configuration error, 3 numerical failure.

mod config;
mod output;

use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;
use std::process::ExitCode;

use anharmonic_core::asymptotics::{
    counting_asymptotic, eigenvalue_expansion, halfline_expansion, heat_trace_leading, heat_trace_numeric,
    merged_sequence, quantization_solve, thm2_residual, ExpansionConstants, ExpansionReport, ExpansionRow,
};
use anharmonic_core::eigensolve::{solve_range, sturm_count, BoundaryProblem, Geometry, TypeTag};
use anharmonic_core::potential::Composite;
use anharmonic_core::scenarios::{self, Outcome};
use anharmonic_core::volterra::{geometric_grid, lemma_rate_check, LemmaCheck};
use anharmonic_core::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use config::{ConfigError, Output, ProblemArgs, RunConfig};
use output::{emit, Table, OUTPUT_SCHEMA_VERSION};

#[derive(Parser, Debug)]
#[command(name = "anharmonic", version, about = "Eigenvalues of -y'' + q(x)y and their large-n asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute eigenvalues n_lo..n_hi.
    Spectrum(ProblemArgs),
    /// Oracle eigenvalues against an asymptotic predictor, with a residual fit.
    Compare {
        #[command(flatten)]
        args: ProblemArgs,
        #[arg(long, value_enum, default_value = "expansion")]
        predictor: Predictor,
    },
    /// Roots of the implicit quantization relation.
    Quantize {
        #[command(flatten)]
        args: ProblemArgs,
        /// which sequence: d (D_type), n (N_type) or merged (alternating, indexed like the spectrum)
        #[arg(long = "type", value_enum, default_value = "merged")]
        kind: QuantKind,
    },
    /// Exact eigenvalue count against (2/pi)(Q + b sqrt(mu)).
    Counting {
        #[command(flatten)]
        args: ProblemArgs,
        /// lambda range `lo..hi`
        #[arg(long, default_value = "20..1000")]
        lambda: String,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Truncated heat trace with tail bound against the leading small-t term.
    HeatTrace {
        #[command(flatten)]
        args: ProblemArgs,
        /// comma-separated times
        #[arg(long, default_value = "0.02,0.05,0.1")]
        t: String,
        /// O(1) band used in the tail bound
        #[arg(long, default_value_t = 2.0)]
        band: f64,
    },
    /// Decay-rate fits for the interior-solution estimates.
    VolterraVerify {
        #[command(flatten)]
        args: ProblemArgs,
        /// lambda range `lo..hi`
        #[arg(long, default_value = "100..1000000")]
        lambda: String,
        #[arg(long, default_value_t = 9)]
        points: usize,
    },
    /// Run a worked example end to end and report pass/fail per check.
    Examples {
        #[command(subcommand)]
        which: Example,
        /// write the outcomes as JSON
        #[arg(long, short, global = true)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum Example {
    /// x^2 plus a truncated Weierstrass function on [-pi, pi]
    Weierstrass {
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[arg(long = "J", default_value_t = 6)]
        j: u32,
    },
    /// (|x| + c)^alpha
    Shifted {
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 3.0)]
        alpha: f64,
    },
    /// (x^2 + c)^2
    Quartic {
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// half-line expansions and D/N interlacing for x^2 plus an off-centre step
    Halfline,
    /// every acceptance criterion
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Predictor {
    /// the four-term expansion (q0 = |x|^alpha only)
    Expansion,
    /// roots of the quantization relation (full line)
    Quantization,
    /// residual of the implicit relation at the oracle eigenvalues, in phase units
    Relation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QuantKind {
    D,
    N,
    Merged,
}

/// A checked criterion did not hold; exit code 1.
#[derive(Debug)]
struct CriteriaFailed(Vec<String>);

impl std::fmt::Display for CriteriaFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "failing checks: {}", self.0.join(", "))
    }
}

impl std::error::Error for CriteriaFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<CriteriaFailed>().is_some() {
        return 1;
    }
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidSpec(_) | Error::SchemaVersion { .. } | Error::Json(_) | Error::Precondition(_)) => 2,
        _ => 3,
    }
}

fn configure_threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("ANHARMONIC_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| ConfigError(format!("ANHARMONIC_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| ConfigError(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().map_err(anyhow::Error::from).and_then(|_| run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Spectrum(args) => cmd_spectrum(&args.resolve((1, 10))?),
        Command::Compare { args, predictor } => cmd_compare(&args.resolve((10, 40))?, predictor),
        Command::Quantize { args, kind } => cmd_quantize(&args.resolve((1, 20))?, kind),
        Command::Counting { args, lambda, points } => cmd_counting(&args.resolve((1, 1))?, &lambda, points),
        Command::HeatTrace { args, t, band } => cmd_heat_trace(&args.resolve((1, 250))?, &t, band),
        Command::VolterraVerify { args, lambda, points } => cmd_volterra(&args.resolve((1, 1))?, &lambda, points),
        Command::Examples { which, output } => cmd_examples(which, output),
    }
}

fn cmd_spectrum(cfg: &RunConfig) -> anyhow::Result<()> {
    let problem = cfg.problem()?;
    let s = solve_range(&problem, &cfg.potential, cfg.n_lo, cfg.n_hi, cfg.tol)?;
    let domain = if problem.geometry == Geometry::HalfLine { "[0, L]" } else { "[-L, L]" };
    eprintln!("{} eigenvalues on {domain} with L = {:.4}, h = {:.2e}", s.eigenvalues.len(), problem.l, problem.h);
    emit(&cfg.output, &s, &s.eigenvalues)
}

fn float_range(s: &str) -> Result<(f64, f64), ConfigError> {
    let parse = |p: &str| p.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    match s.split_once("..").and_then(|(a, b)| Some((parse(a)?, parse(b)?))) {
        Some((lo, hi)) if lo > 0.0 && hi > lo => Ok((lo, hi)),
        _ => Err(ConfigError(format!("`{s}` is not a range lo..hi with 0 < lo < hi"))),
    }
}

fn single_alpha(cfg: &RunConfig) -> Result<f64, ConfigError> {
    match cfg.potential.single_power() {
        Some((a, alpha)) if a == 1.0 => Ok(alpha),
        _ => Err(ConfigError("the expansion predictor needs q0 = |x|^alpha with unit coefficient".into())),
    }
}

fn cmd_compare(cfg: &RunConfig, predictor: Predictor) -> anyhow::Result<()> {
    let spec = &cfg.potential;
    let problem = cfg.problem()?;
    let s = solve_range(&problem, spec, cfg.n_lo, cfg.n_hi, cfg.tol)?;
    let half = problem.geometry == Geometry::HalfLine;
    let rows: Vec<ExpansionRow<f64>> = match predictor {
        Predictor::Expansion => {
            let alpha = single_alpha(cfg)?;
            let v = &spec.perturbation;
            let consts = if half { ExpansionConstants::half_line(alpha, v)? } else { ExpansionConstants::new(alpha, v)? };
            s.eigenvalues
                .iter()
                .map(|e| {
                    let row = if half { halfline_expansion(&consts, v, e.n, problem.bc)? } else { eigenvalue_expansion(&consts, v, e.n)? };
                    Ok(row.with_oracle(e.lambda))
                })
                .collect::<anharmonic_core::Result<_>>()?
        }
        Predictor::Quantization => {
            if half {
                return Err(ConfigError("the quantization predictor is defined on the full line only".into()).into());
            }
            let merged = merged_sequence(spec, cfg.n_hi)?;
            s.eigenvalues
                .iter()
                .filter_map(|e| merged.iter().find(|m| m.m == e.n).map(|m| ExpansionRow::new(e.n, [m.nu, 0.0, 0.0, 0.0]).with_oracle(e.lambda)))
                .collect()
        }
        Predictor::Relation => {
            if half {
                return Err(ConfigError("the implicit relation is defined on the full line only".into()).into());
            }
            s.eigenvalues
                .iter()
                .map(|e| {
                    let r = thm2_residual(spec, e.n, e.lambda)?;
                    let target = FRAC_PI_4 * (2 * e.n - 1) as f64;
                    Ok(ExpansionRow { n: e.n, term1: target, term2: 0.0, term3: 0.0, term4: 0.0, predicted: target, oracle: Some(e.lambda), residual: Some(r) })
                })
                .collect::<anharmonic_core::Result<_>>()?
        }
    };
    let name = match predictor {
        Predictor::Expansion => "expansion",
        Predictor::Quantization => "quantization",
        Predictor::Relation => "relation",
    };
    let report = ExpansionReport::new(name, rows);
    match &report.residual_fit {
        Some(f) => eprintln!("{name}: |residual| ~ n^{:.3} (r^2 = {:.3}) over {} rows", f.slope, f.r_squared, report.rows.len()),
        None => eprintln!("{name}: too few nonzero residuals for a fit"),
    }
    emit(&cfg.output, &report, &report.rows)
}

#[derive(Serialize)]
struct QuantRow {
    n: usize,
    #[serde(rename = "type")]
    type_tag: TypeTag,
    lambda: f64,
    mu: f64,
    #[serde(rename = "Q")]
    q: f64,
    correction: f64,
    d2: f64,
    residual: f64,
}

fn cmd_quantize(cfg: &RunConfig, kind: QuantKind) -> anyhow::Result<()> {
    let spec = &cfg.potential;
    let mut rows = Vec::new();
    match kind {
        QuantKind::Merged => {
            for m in merged_sequence(spec, cfg.n_hi)?.into_iter().filter(|m| m.m >= cfg.n_lo) {
                let (n, tag) = if m.m % 2 == 1 { (m.m.div_ceil(2), TypeTag::NType) } else { (m.m / 2, TypeTag::DType) };
                let c = quantization_solve(spec, n, tag)?;
                rows.push(QuantRow { n: m.m, type_tag: tag, lambda: c.lambda, mu: c.mu, q: c.q, correction: c.correction, d2: c.d2, residual: m.residual });
            }
        }
        QuantKind::D | QuantKind::N => {
            let tag = if kind == QuantKind::D { TypeTag::DType } else { TypeTag::NType };
            for n in cfg.n_lo..=cfg.n_hi {
                let c = quantization_solve(spec, n, tag)?;
                rows.push(QuantRow { n, type_tag: tag, lambda: c.lambda, mu: c.mu, q: c.q, correction: c.correction, d2: c.d2, residual: c.residual });
            }
        }
    }
    #[derive(Serialize)]
    struct Meta<'a> {
        potential: &'a anharmonic_core::PotentialSpec64,
        sequence: &'a str,
    }
    let sequence = match kind {
        QuantKind::D => "D_type",
        QuantKind::N => "N_type",
        QuantKind::Merged => "merged",
    };
    let doc = Table { schema_version: OUTPUT_SCHEMA_VERSION, kind: "quantization", meta: Meta { potential: spec, sequence }, rows: &rows };
    emit(&cfg.output, &doc, &rows)
}

#[derive(Serialize)]
struct CountRow {
    lambda: f64,
    count: usize,
    asymptotic: f64,
    deviation: f64,
}

fn cmd_counting(cfg: &RunConfig, lambda: &str, points: usize) -> anyhow::Result<()> {
    let (lo, hi) = float_range(lambda)?;
    if points < 2 {
        return Err(ConfigError("--points must be at least 2".into()).into());
    }
    let spec = &cfg.potential;
    let top = counting_asymptotic(spec, hi)?;
    let problem = sized_problem(cfg, top as usize + 10)?;
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let l = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let count = sturm_count(&problem, spec, l)?;
        let asymptotic = counting_asymptotic(spec, l)?;
        rows.push(CountRow { lambda: l, count, asymptotic, deviation: count as f64 - asymptotic });
    }
    let worst = rows.iter().map(|r| r.deviation.abs()).fold(0.0, f64::max);
    eprintln!("max |N(lambda) - asymptotic| = {worst:.3} over {points} points");
    #[derive(Serialize)]
    struct Meta<'a> {
        potential: &'a anharmonic_core::PotentialSpec64,
        max_deviation: f64,
    }
    let doc = Table { schema_version: OUTPUT_SCHEMA_VERSION, kind: "counting", meta: Meta { potential: spec, max_deviation: worst }, rows: &rows };
    emit(&cfg.output, &doc, &rows)
}

/// Full-line problem sized for `n_max` eigenvalues, honouring grid overrides.
fn sized_problem(cfg: &RunConfig, n_max: usize) -> anharmonic_core::Result<BoundaryProblem<f64>> {
    let mut c = cfg.clone();
    c.n_hi = n_max.max(1);
    c.problem()
}

#[derive(Serialize)]
struct HeatRow {
    t: f64,
    terms: usize,
    partial_sum: f64,
    tail_bound: f64,
    total: f64,
    leading: f64,
    difference: f64,
}

fn cmd_heat_trace(cfg: &RunConfig, times: &str, band: f64) -> anyhow::Result<()> {
    let ts = times
        .split(',')
        .map(|p| p.trim().parse::<f64>().ok().filter(|t| *t > 0.0).ok_or_else(|| ConfigError(format!("bad time `{p}` in --t"))))
        .collect::<Result<Vec<_>, _>>()?;
    if cfg.geometry != Geometry::FullLine {
        return Err(ConfigError("heat-trace uses the full-line spectrum".into()).into());
    }
    let spec = &cfg.potential;
    let problem = cfg.problem()?;
    let s = solve_range(&problem, spec, 1, cfg.n_hi, cfg.tol)?;
    let lambdas = s.lambdas();
    let alpha = spec.leading_alpha();
    let shift = match spec.composite {
        Composite::ShiftedPower { c, .. } => c,
        _ => 0.0,
    };
    let mut rows = Vec::new();
    for t in ts {
        let h = heat_trace_numeric(spec, &lambdas, t, band)?;
        let leading = heat_trace_leading(alpha, t, shift)?;
        rows.push(HeatRow { t, terms: h.terms, partial_sum: h.partial_sum, tail_bound: h.tail_bound, total: h.total(), leading, difference: h.total() - leading });
    }
    #[derive(Serialize)]
    struct Meta<'a> {
        potential: &'a anharmonic_core::PotentialSpec64,
        band: f64,
    }
    let doc = Table { schema_version: OUTPUT_SCHEMA_VERSION, kind: "heat_trace", meta: Meta { potential: spec, band }, rows: &rows };
    emit(&cfg.output, &doc, &rows)
}

#[derive(Serialize)]
struct RateRow {
    which: LemmaCheck,
    lambda: f64,
    error: f64,
    envelope: f64,
    exponent: f64,
    monotone: bool,
}

fn cmd_volterra(cfg: &RunConfig, lambda: &str, points: usize) -> anyhow::Result<()> {
    let (lo, hi) = float_range(lambda)?;
    let spec = &cfg.potential;
    let grid = geometric_grid(lo, hi, points);
    let mut rows = Vec::new();
    for which in [LemmaCheck::FEst, LemmaCheck::K1, LemmaCheck::K2] {
        let r = lemma_rate_check(spec, &grid, which)?;
        eprintln!("{which:?}: decay exponent {:.3}{}", r.exponent, if r.monotone { "" } else { " (upper envelope)" });
        for i in 0..r.lambdas.len() {
            rows.push(RateRow { which, lambda: r.lambdas[i], error: r.errors[i], envelope: r.envelope[i], exponent: r.exponent, monotone: r.monotone });
        }
    }
    #[derive(Serialize)]
    struct Meta<'a> {
        potential: &'a anharmonic_core::PotentialSpec64,
    }
    let doc = Table { schema_version: OUTPUT_SCHEMA_VERSION, kind: "volterra_rates", meta: Meta { potential: spec }, rows: &rows };
    emit(&cfg.output, &doc, &rows)
}

fn cmd_examples(which: Example, output: Option<PathBuf>) -> anyhow::Result<()> {
    let outcomes: Vec<Outcome> = match which {
        Example::Weierstrass { tau, j } => {
            if !(tau > 0.0 && tau < 1.0) || j < 3 {
                return Err(ConfigError("weierstrass needs 0 < tau < 1 and J >= 3".into()).into());
            }
            vec![scenarios::weierstrass_resonance(tau, j, j as i32)?]
        }
        Example::Shifted { c, alpha } => scenarios::shifted_example(c, alpha)?,
        Example::Quartic { c } => scenarios::quartic_example(c)?,
        Example::Halfline => {
            let (a, b) = scenarios::half_line()?;
            vec![a, b]
        }
        Example::All => scenarios::all()?,
    };
    for o in &outcomes {
        println!("{}", o.status_line());
        for l in &o.lines {
            println!("    {l}");
        }
    }
    if let Some(path) = output {
        #[derive(Serialize)]
        struct Meta {}
        let doc = Table { schema_version: OUTPUT_SCHEMA_VERSION, kind: "examples", meta: Meta {}, rows: &outcomes };
        emit(&Output { format: config::Format::Json, path: Some(path) }, &doc, &outcomes)?;
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CriteriaFailed(failed).into())
    }
}
