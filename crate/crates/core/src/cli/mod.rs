//! The `apsums` command line.
//!
//! Data goes to stdout (or `--out`), diagnostics to stderr. Exit status is
//! 0 on success, 1 when a computation fails and 2 on a usage error.

mod format;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use format::fmt_g;

use crate::apsieve::{self, ApSpec};
use crate::asymp::{abel_sum_over, convergence_table, exact_sum_over, predict};
use crate::conds::{self, ConditionReport};
use crate::error::Error;
use crate::exprdsl::{check_domain, geometric_grid, FuncProfile, Monotonicity};
use crate::quad::{ModelParams, ModelTag, DEFAULT_TOL};

/// Environment variable overriding the sieve cap.
pub const MAX_X_ENV: &str = "APSUMS_MAX_X";

/// Header of the `compare` CSV output.
pub const COMPARE_HEADER: &str = "x,exact,main,ratio,normalized_remainder";

const DOMAIN_SAMPLES: usize = 64;

#[derive(Debug, Parser)]
#[command(
    name = "apsums",
    version,
    about = "Sums of functions over primes in an arithmetic progression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format (default: csv, or json for `conditions`).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write data to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Progression {
    /// Modulus k >= 1.
    #[arg(long, default_value_t = 1)]
    k: u64,
    /// Residue l, coprime to k.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    l: i64,
}

#[derive(Debug, Args)]
struct Envelope {
    /// Constant in exp(-c (log x)^θ) envelopes.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Vinogradov exponent θ.
    #[arg(long, default_value_t = 0.6)]
    theta: f64,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the primes p <= x with p ≡ l (mod k).
    Primes {
        #[command(flatten)]
        ap: Progression,
        #[arg(long)]
        x: f64,
    },
    /// Exact sum of f(p) and its Abel-summation form.
    Sum {
        #[arg(long)]
        f: String,
        #[command(flatten)]
        ap: Progression,
        #[arg(long)]
        x: f64,
    },
    /// Main term and remainder envelope of a model at x.
    Predict {
        #[arg(long)]
        f: String,
        #[arg(long, value_parser = parse_model)]
        model: ModelTag,
        #[command(flatten)]
        ap: Progression,
        #[arg(long)]
        x: f64,
        #[command(flatten)]
        envelope: Envelope,
    },
    /// Exact sums against a model on a geometric grid of x.
    Compare {
        #[arg(long)]
        f: String,
        #[arg(long, value_parser = parse_model)]
        model: ModelTag,
        #[command(flatten)]
        ap: Progression,
        #[arg(long)]
        x_min: f64,
        #[arg(long)]
        x_max: f64,
        #[arg(long, default_value_t = 16)]
        x_points: usize,
        #[command(flatten)]
        envelope: Envelope,
    },
    /// Sufficient and necessary condition report as JSON.
    Conditions {
        #[arg(long)]
        f: String,
        #[command(flatten)]
        ap: Progression,
    },
}

fn parse_model(s: &str) -> Result<ModelTag, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Primes,
    Sum,
    Predict,
    Compare,
    Conditions,
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub ap: ApSpec,
    /// Upper bound for `primes`, `sum` and `predict`.
    pub x: f64,
    /// Grid for `compare`.
    pub xs: Vec<f64>,
    pub f_text: String,
    pub f: Option<FuncProfile>,
    pub model: ModelTag,
    pub params: ModelParams,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub max_x: u64,
}

struct Usage(String);

fn usage<T>(msg: impl Into<String>) -> Result<T, Usage> {
    Err(Usage(msg.into()))
}

fn check_x(name: &str, x: f64, max_x: u64) -> Result<(), Usage> {
    if !(x.is_finite() && x >= 2.0) {
        return usage(format!("--{name} must be a finite number >= 2, got {x}"));
    }
    if x.floor() > max_x as f64 {
        return usage(format!(
            "--{name} {x} exceeds the sieve cap {max_x} (set {MAX_X_ENV} to raise it)"
        ));
    }
    Ok(())
}

fn progression(p: &Progression) -> Result<ApSpec, Usage> {
    ApSpec::new(p.k, p.l).map_err(|e| Usage(e.to_string()))
}

fn profile(text: &str, hi: f64) -> Result<FuncProfile, Usage> {
    FuncProfile::from_text(text, hi).map_err(|e| Usage(format!("--f {text:?}: {e}")))
}

fn params(e: &Envelope) -> Result<ModelParams, Usage> {
    let p = ModelParams {
        c: e.c,
        theta: e.theta,
        tol: e.tol,
    };
    p.validate().map_err(|e| Usage(e.to_string()))?;
    Ok(p)
}

impl RunConfig {
    fn from_cli(cli: Cli, max_x: u64) -> Result<RunConfig, Usage> {
        let mut cfg = RunConfig {
            command: CommandKind::Primes,
            ap: ApSpec::new(1, 0).expect("trivial progression"),
            x: 2.0,
            xs: Vec::new(),
            f_text: String::new(),
            f: None,
            model: ModelTag::Pnt,
            params: ModelParams::default(),
            format: Format::Csv,
            out: cli.out,
            max_x,
        };
        match cli.command {
            Command::Primes { ap, x } => {
                check_x("x", x, max_x)?;
                cfg.ap = progression(&ap)?;
                cfg.x = x;
            }
            Command::Sum { f, ap, x } => {
                check_x("x", x, max_x)?;
                cfg.command = CommandKind::Sum;
                cfg.ap = progression(&ap)?;
                cfg.x = x;
                cfg.f = Some(profile(&f, x)?);
                cfg.f_text = f;
            }
            Command::Predict {
                f,
                model,
                ap,
                x,
                envelope,
            } => {
                check_x("x", x, max_x)?;
                cfg.command = CommandKind::Predict;
                cfg.ap = progression(&ap)?;
                cfg.x = x;
                cfg.f = Some(profile(&f, x)?);
                cfg.f_text = f;
                cfg.model = model;
                cfg.params = params(&envelope)?;
            }
            Command::Compare {
                f,
                model,
                ap,
                x_min,
                x_max,
                x_points,
                envelope,
            } => {
                check_x("x-min", x_min, max_x)?;
                check_x("x-max", x_max, max_x)?;
                if x_points == 0 {
                    return usage("--x-points must be at least 1");
                }
                if x_points > 1 && x_min >= x_max {
                    return usage("--x-min must be below --x-max when --x-points > 1");
                }
                cfg.command = CommandKind::Compare;
                cfg.ap = progression(&ap)?;
                cfg.xs = geometric_grid(x_min, x_max, x_points);
                cfg.x = x_max;
                cfg.f = Some(profile(&f, x_max)?);
                cfg.f_text = f;
                cfg.model = model;
                cfg.params = params(&envelope)?;
            }
            Command::Conditions { f, ap } => {
                cfg.command = CommandKind::Conditions;
                cfg.ap = progression(&ap)?;
                crate::exprdsl::parse(&f).map_err(|e| Usage(format!("--f {f:?}: {e}")))?;
                cfg.f_text = f;
            }
        }
        cfg.format = match (cli.format, cfg.command) {
            (Some(Format::Csv), CommandKind::Conditions) => {
                return usage("`conditions` only supports --format json")
            }
            (Some(f), _) => f,
            (None, CommandKind::Conditions) => Format::Json,
            (None, _) => Format::Csv,
        };
        Ok(cfg)
    }
}

fn max_x_from_env() -> Result<u64, Usage> {
    match std::env::var(MAX_X_ENV) {
        Err(_) => Ok(apsieve::DEFAULT_MAX_X),
        Ok(v) => {
            let parsed = v.trim().parse::<u64>().ok().or_else(|| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite() && *x >= 2.0)
                    .map(|x| x as u64)
            });
            parsed.ok_or_else(|| Usage(format!("{MAX_X_ENV}={v:?} is not a valid bound")))
        }
    }
}

#[derive(Serialize)]
struct SumRecord {
    x: f64,
    exact: f64,
    abel: f64,
    abs_diff: f64,
}

#[derive(Serialize)]
struct PredictRecord {
    model: ModelTag,
    main: f64,
    envelope: f64,
}

#[derive(Serialize)]
struct PrimesRecord<'a> {
    k: u64,
    l: u64,
    x: f64,
    primes: &'a [u64],
}

#[derive(Serialize)]
struct Section<T: Serialize> {
    trajectory: Vec<(T, f64)>,
    verdict: &'static str,
}

#[derive(Serialize)]
struct ConditionsRecord<'a> {
    f: &'a str,
    k: u64,
    l: u64,
    sufficient_ratio: Section<f64>,
    divergence: Section<f64>,
    a33: Section<f64>,
    necessary: Section<u64>,
}

impl<'a> From<&'a ConditionReport> for ConditionsRecord<'a> {
    fn from(r: &'a ConditionReport) -> Self {
        ConditionsRecord {
            f: &r.f_text,
            k: r.ap.k(),
            l: r.ap.l(),
            sufficient_ratio: Section {
                trajectory: r.sufficient.ratio_trajectory.clone(),
                verdict: r.sufficient.ratio_verdict.as_str(),
            },
            divergence: Section {
                trajectory: r.sufficient.divergence_trajectory.clone(),
                verdict: r.sufficient.divergence_verdict.as_str(),
            },
            a33: Section {
                trajectory: r.a33.trajectory.clone(),
                verdict: r.a33.verdict.as_str(),
            },
            necessary: Section {
                trajectory: r.necessary.trajectory.clone(),
                verdict: r.necessary.verdict.as_str(),
            },
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable record");
    s.push('\n');
    s
}

fn csv_line(values: &[f64]) -> String {
    let mut line = values
        .iter()
        .map(|&v| fmt_g(v, 12))
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

/// Executes a validated configuration, returning the data output and any warnings.
pub fn execute(cfg: &RunConfig) -> Result<(String, Vec<String>), Error> {
    apsieve::set_max_x(cfg.max_x);
    let mut warnings = Vec::new();
    if let Some(f) = &cfg.f {
        check_domain(f, 2.0, cfg.x, DOMAIN_SAMPLES)?;
        if f.monotone == Monotonicity::NonMonotoneOnSample && !f.derivative_vanishes() {
            warnings.push(format!(
                "f = {} is not monotone on [2, {}]; the asymptotic formulas assume monotone f",
                cfg.f_text, cfg.x
            ));
        }
    }
    if cfg.model == ModelTag::Grh
        && matches!(cfg.command, CommandKind::Predict | CommandKind::Compare)
    {
        warnings
            .push("the grh envelope is conditional on the generalized Riemann hypothesis".into());
    }

    let out = match cfg.command {
        CommandKind::Primes => {
            let list = apsieve::sieve_range(cfg.x, cfg.ap)?;
            match cfg.format {
                Format::Csv => list.primes().iter().fold(String::new(), |mut s, p| {
                    let _ = writeln!(s, "{p}");
                    s
                }),
                Format::Json => json(&PrimesRecord {
                    k: cfg.ap.k(),
                    l: cfg.ap.l(),
                    x: cfg.x,
                    primes: list.primes(),
                }),
            }
        }
        CommandKind::Sum => {
            let f = cfg.f.as_ref().expect("validated");
            let list = apsieve::sieve_range(cfg.x, cfg.ap)?;
            let exact = exact_sum_over(f, list.primes())?;
            let abel = abel_sum_over(f, cfg.x, list.primes())?;
            let rec = SumRecord {
                x: cfg.x,
                exact,
                abel,
                abs_diff: (exact - abel).abs(),
            };
            match cfg.format {
                Format::Csv => format!(
                    "x,exact,abel,abs_diff\n{}",
                    csv_line(&[rec.x, rec.exact, rec.abel, rec.abs_diff])
                ),
                Format::Json => json(&rec),
            }
        }
        CommandKind::Predict => {
            let f = cfg.f.as_ref().expect("validated");
            let p = predict(f, cfg.x, &cfg.ap, cfg.model, &cfg.params)?;
            match cfg.format {
                Format::Csv => format!(
                    "model,main,envelope\n{},{},{}\n",
                    p.model,
                    fmt_g(p.main, 12),
                    fmt_g(p.envelope, 12)
                ),
                Format::Json => json(&PredictRecord {
                    model: p.model,
                    main: p.main,
                    envelope: p.envelope,
                }),
            }
        }
        CommandKind::Compare => {
            let f = cfg.f.as_ref().expect("validated");
            let rows = convergence_table(f, &cfg.ap, &cfg.xs, cfg.model, &cfg.params)?;
            match cfg.format {
                Format::Csv => {
                    let mut s = format!("{COMPARE_HEADER}\n");
                    for r in &rows {
                        s.push_str(&csv_line(&[
                            r.x,
                            r.exact,
                            r.main,
                            r.ratio,
                            r.normalized_remainder,
                        ]));
                    }
                    s
                }
                Format::Json => json(&rows),
            }
        }
        CommandKind::Conditions => {
            let p_grid = conds::default_p_grid(&cfg.ap)?;
            let report = conds::evaluate(&cfg.f_text, &cfg.ap, &conds::default_n_grid(), &p_grid)?;
            warnings.extend(report.warnings().cloned());
            warnings.push(
                "condition verdicts are numerical heuristics; inspect the trajectories".into(),
            );
            json(&ConditionsRecord::from(&report))
        }
    };
    Ok((out, warnings))
}

/// Runs the CLI on `argv` (including the program name).
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let cfg = match max_x_from_env().and_then(|cap| RunConfig::from_cli(cli, cap)) {
        Ok(cfg) => cfg,
        Err(Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n\n{}", Cli::command().render_usage());
            return 2;
        }
    };
    match execute(&cfg) {
        Ok((data, warnings)) => {
            for w in warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            let written = match &cfg.out {
                Some(path) => std::fs::write(path, data.as_bytes()),
                None => stdout
                    .write_all(data.as_bytes())
                    .and_then(|_| stdout.flush()),
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(stderr, "error: cannot write output: {e}");
                    1
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
