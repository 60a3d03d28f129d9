//! Numerical probes of the conditions under which
//! `Σ_{m≤n} a_m f(m) / Σ_{m≤n} b_m f(m) → 1`, where `a_m` marks the primes of
//! the progression and `b_1 = 0`, `b_m = 1 / (φ(k) ln m)`.
//!
//! Limits cannot be decided from finitely many samples, so every check
//! returns its raw trajectory along with a heuristic verdict. The decision
//! rules look at the last [`TAIL`] grid points.
//!
//! A trajectory stops early, with a warning, at the first grid point where
//! `f` or `f'` cannot be evaluated in `f64` (for example `2^t` past
//! `t ≈ 1000`); the verdict is then taken over the points that exist.

use std::fmt;

use serde::Serialize;

use crate::apsieve::{sieve_range_capped, ApSpec};
use crate::error::{Error, Result};
use crate::exprdsl::{geometric_grid, FuncProfile, Monotonicity};
use crate::quad::{coarse_integrand, integrate, DEFAULT_TOL};
use crate::sum::CompensatedSum;

/// Number of trailing grid points the verdicts look at.
pub const TAIL: usize = 5;
/// `|R − 1|` below this counts as approaching 1.
pub const NEAR_ONE: f64 = 0.05;
/// Values below this count as having reached zero.
pub const ZERO_THRESHOLD: f64 = 1e-3;
/// Max/min ratio within which a tail counts as stabilised.
pub const STABLE_BAND: f64 = 1.5;
/// Successive increments shrinking at least this fast count as summable.
pub const SUMMABLE_RATIO: f64 = 0.5;
/// A log-log decay at least this steep (`|L| ~ (log n)^s`, `s ≤ −0.5`) counts as tending to zero.
pub const DECAY_SLOPE: f64 = -0.5;

macro_rules! verdict_enum {
    ($name:ident { $($variant:ident => $text:literal),* $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),*
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),* }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

verdict_enum!(RatioVerdict {
    AwayFrom1 => "away_from_1",
    Approaches1 => "approaches_1",
    Inconclusive => "inconclusive",
});

verdict_enum!(DivergenceVerdict {
    Diverges => "diverges",
    Bounded => "bounded",
    Inconclusive => "inconclusive",
});

verdict_enum!(A33Verdict {
    NonzeroLimit => "nonzero_limit",
    ZeroLimit => "zero_limit",
    Inconclusive => "inconclusive",
});

verdict_enum!(NecessaryVerdict {
    TendsToZero => "tends_to_zero",
    BoundedAway => "bounded_away",
    Inconclusive => "inconclusive",
});

#[derive(Debug, Clone, PartialEq)]
pub struct SufficientCheck {
    /// `(n, R(n))` with `R(n) = ∫_2^n t f'(t)/log t dt / (n f(n) / log n)`.
    pub ratio_trajectory: Vec<(f64, f64)>,
    pub ratio_verdict: RatioVerdict,
    /// `(n, ∫_2^n t f'(t)/log t dt)`.
    pub divergence_trajectory: Vec<(f64, f64)>,
    pub divergence_verdict: DivergenceVerdict,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct A33Check {
    /// `(n, f(n) / (log n · f'(n)))`.
    pub trajectory: Vec<(f64, f64)>,
    pub verdict: A33Verdict,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NecessaryCheck {
    /// `(p, |f(p)| / |Σ_{m=2}^p b_m f(m)|)`.
    pub trajectory: Vec<(u64, f64)>,
    pub verdict: NecessaryVerdict,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub f_text: String,
    pub ap: ApSpec,
    pub sufficient: SufficientCheck,
    pub a33: A33Check,
    pub necessary: NecessaryCheck,
}

impl ConditionReport {
    pub fn warnings(&self) -> impl Iterator<Item = &String> {
        self.sufficient
            .warnings
            .iter()
            .chain(&self.a33.warnings)
            .chain(&self.necessary.warnings)
    }
}

/// Errors that end a trajectory instead of failing the whole check.
fn is_evaluation_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::Eval(_)
            | Error::NonFiniteIntegrand { .. }
            | Error::MaxDepthExceeded { .. }
            | Error::ZeroDenominator { .. }
    )
}

fn stop_warning(what: &str, at: impl fmt::Display, e: &Error) -> String {
    format!("{what} trajectory stops at n = {at}: {e}")
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    let ok =
        grid.iter().all(|n| n.is_finite() && *n >= 2.0) && grid.windows(2).all(|w| w[0] < w[1]);
    if ok && !grid.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidGrid)
    }
}

fn tail<T>(v: &[T]) -> Option<&[T]> {
    (v.len() >= TAIL).then(|| &v[v.len() - TAIL..])
}

fn band(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// `Σ_{m=2}^n f(m) / (φ(k) ln m)`.
pub fn b_partial_sum(f: &FuncProfile, n: u64, ap: &ApSpec) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidBound(n as f64));
    }
    let mut s = CompensatedSum::new();
    for m in 2..=n {
        let t = m as f64;
        s.add(f.eval(t)? / t.ln());
    }
    Ok(s.value() / ap.phi_k() as f64)
}

pub fn ratio_verdict(values: &[f64]) -> RatioVerdict {
    let Some(tail) = tail(values) else {
        return RatioVerdict::Inconclusive;
    };
    let d: Vec<f64> = tail.iter().map(|r| (r - 1.0).abs()).collect();
    let end = d[d.len() - 1];
    let non_increasing = d.windows(2).all(|w| w[1] <= w[0]);
    let non_decreasing = d.windows(2).all(|w| w[1] >= w[0]);
    if end < NEAR_ONE && non_increasing {
        RatioVerdict::Approaches1
    } else if end >= NEAR_ONE && (non_decreasing || band(&d) <= STABLE_BAND) {
        RatioVerdict::AwayFrom1
    } else {
        RatioVerdict::Inconclusive
    }
}

pub fn divergence_verdict(integrals: &[f64]) -> DivergenceVerdict {
    let Some(tail) = tail(integrals) else {
        return DivergenceVerdict::Inconclusive;
    };
    let mags: Vec<f64> = tail.iter().map(|v| v.abs()).collect();
    let inc: Vec<f64> = mags.windows(2).map(|w| w[1] - w[0]).collect();
    if inc.iter().all(|&i| i == 0.0) {
        return DivergenceVerdict::Bounded;
    }
    let growing = inc.iter().all(|&i| i > 0.0);
    if growing && inc.windows(2).all(|w| w[1] >= SUMMABLE_RATIO * w[0]) {
        return DivergenceVerdict::Diverges;
    }
    let shrinking = inc
        .windows(2)
        .all(|w| w[0] != 0.0 && w[1].abs() <= SUMMABLE_RATIO * w[0].abs());
    if shrinking {
        DivergenceVerdict::Bounded
    } else {
        DivergenceVerdict::Inconclusive
    }
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Verdict on `L(n)` from `(n, ln |L(n)|)` samples.
pub fn a33_verdict(ns: &[f64], ln_abs: &[f64]) -> A33Verdict {
    let (Some(n_tail), Some(l_tail)) = (tail(ns), tail(ln_abs)) else {
        return A33Verdict::Inconclusive;
    };
    let decreasing = l_tail.windows(2).all(|w| w[1] < w[0]);
    let non_decreasing = l_tail.windows(2).all(|w| w[1] >= w[0]);
    let lnln: Vec<f64> = n_tail.iter().map(|n| n.ln().ln()).collect();
    let end = l_tail[l_tail.len() - 1];
    if decreasing && (end < ZERO_THRESHOLD.ln() || slope(&lnln, l_tail) <= DECAY_SLOPE) {
        A33Verdict::ZeroLimit
    } else if non_decreasing
        || band(&l_tail.iter().map(|v| v.exp()).collect::<Vec<_>>()) <= STABLE_BAND
    {
        A33Verdict::NonzeroLimit
    } else {
        A33Verdict::Inconclusive
    }
}

pub fn necessary_verdict(values: &[f64]) -> NecessaryVerdict {
    let Some(tail) = tail(values) else {
        return NecessaryVerdict::Inconclusive;
    };
    let end = tail[tail.len() - 1];
    if end < ZERO_THRESHOLD && tail.windows(2).all(|w| w[1] < w[0]) {
        NecessaryVerdict::TendsToZero
    } else if end >= ZERO_THRESHOLD && band(tail) <= STABLE_BAND {
        NecessaryVerdict::BoundedAway
    } else {
        NecessaryVerdict::Inconclusive
    }
}

/// The two sufficient conditions that reduce to the integral
/// `I(n) = ∫_2^n t f'(t) / log t dt`: `R(n) = I(n) / (n f(n) / log n)`
/// should stay away from 1, and `|I(n)|` should diverge.
pub fn check_sufficient(f: &FuncProfile, n_grid: &[f64]) -> Result<SufficientCheck> {
    validate_grid(n_grid)?;
    let mut warnings = Vec::new();
    if f.derivative_vanishes() {
        warnings.push("monotonicity condition violated: f' vanishes identically".to_string());
    } else if f.monotone == Monotonicity::NonMonotoneOnSample {
        warnings.push("monotonicity condition violated: f' changes sign on the sample".to_string());
    }

    let span = n_grid[n_grid.len() - 1] - 2.0;
    let mut acc = CompensatedSum::new();
    let mut lo = 2.0;
    let mut ratio_trajectory = Vec::new();
    let mut divergence_trajectory = Vec::new();
    for &n in n_grid {
        let step = || -> Result<(f64, f64)> {
            let piece = if f.derivative_vanishes() || n == lo {
                0.0
            } else {
                let tol = (DEFAULT_TOL * (n - lo) / span).max(f64::MIN_POSITIVE);
                integrate(coarse_integrand(f), lo, n, tol)?.value
            };
            let denom = n * f.eval(n)? / n.ln();
            if denom == 0.0 {
                return Err(Error::ZeroDenominator { n: n as u64 });
            }
            Ok((piece, denom))
        };
        match step() {
            Ok((piece, denom)) => {
                acc.add(piece);
                let integral = acc.value();
                ratio_trajectory.push((n, integral / denom));
                divergence_trajectory.push((n, integral));
                lo = n;
            }
            Err(e) if is_evaluation_failure(&e) => {
                warnings.push(stop_warning("sufficient-condition", n, &e));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let ratios: Vec<f64> = ratio_trajectory.iter().map(|p| p.1).collect();
    let integrals: Vec<f64> = divergence_trajectory.iter().map(|p| p.1).collect();
    Ok(SufficientCheck {
        ratio_verdict: ratio_verdict(&ratios),
        divergence_verdict: divergence_verdict(&integrals),
        ratio_trajectory,
        divergence_trajectory,
        warnings,
    })
}

/// `L(n) = f(n) / (log n · f'(n))`, evaluated in log space so that
/// exponentially growing `f` can be followed far beyond the `f64` range.
pub fn check_a33(f: &FuncProfile, n_grid: &[f64]) -> Result<A33Check> {
    validate_grid(n_grid)?;
    let mut warnings = Vec::new();
    if f.monotone != Monotonicity::Increasing {
        warnings.push(format!("f is {} on the sample, not increasing", f.monotone));
        return Ok(A33Check {
            trajectory: Vec::new(),
            verdict: A33Verdict::Inconclusive,
            warnings,
        });
    }
    let mut trajectory = Vec::new();
    let mut ln_abs = Vec::new();
    for &n in n_grid {
        let step = || -> Result<Option<(f64, f64)>> {
            let fv = f.expr.eval_ln_abs(n)?;
            let dv = f.deriv.eval_ln_abs(n)?;
            if dv.sign == 0 {
                return Ok(None);
            }
            let ln_l = fv.ln_abs - n.ln().ln() - dv.ln_abs;
            Ok(Some(((fv.sign * dv.sign) as f64 * ln_l.exp(), ln_l)))
        };
        match step() {
            Ok(Some((l, ln_l))) => {
                trajectory.push((n, l));
                ln_abs.push(ln_l);
            }
            Ok(None) => {
                warnings.push(format!("f'({n}) = 0; L(n) is undefined"));
                return Ok(A33Check {
                    trajectory,
                    verdict: A33Verdict::Inconclusive,
                    warnings,
                });
            }
            Err(e) if is_evaluation_failure(&e) => {
                warnings.push(stop_warning("a33", n, &e));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let ns: Vec<f64> = trajectory.iter().map(|p| p.0).collect();
    Ok(A33Check {
        verdict: a33_verdict(&ns, &ln_abs),
        trajectory,
        warnings,
    })
}

fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

/// `r(p) = |f(p)| / |Σ_{m=2}^p b_m f(m)|` along primes of the progression,
/// from one running pass over `m`.
pub fn check_necessary(f: &FuncProfile, ap: &ApSpec, p_grid: &[u64]) -> Result<NecessaryCheck> {
    let valid = !p_grid.is_empty()
        && p_grid.windows(2).all(|w| w[0] < w[1])
        && p_grid.iter().all(|&p| ap.contains(p) && is_prime(p));
    if !valid {
        return Err(Error::InvalidGrid);
    }
    let phi = ap.phi_k() as f64;
    let mut warnings = Vec::new();
    let mut trajectory = Vec::new();
    let mut b = CompensatedSum::new();
    let mut m = 2u64;
    'grid: for &p in p_grid {
        while m <= p {
            let t = m as f64;
            match f.eval(t) {
                Ok(v) => b.add(v / (phi * t.ln())),
                Err(e) => {
                    warnings.push(stop_warning("necessary-condition", p, &e));
                    break 'grid;
                }
            }
            m += 1;
        }
        let fp = match f.eval(p as f64) {
            Ok(v) => v,
            Err(e) => {
                warnings.push(stop_warning("necessary-condition", p, &e));
                break;
            }
        };
        let denom = b.value().abs();
        if denom == 0.0 {
            warnings.push(stop_warning(
                "necessary-condition",
                p,
                &Error::ZeroDenominator { n: p },
            ));
            break;
        }
        trajectory.push((p, fp.abs() / denom));
    }
    let values: Vec<f64> = trajectory.iter().map(|p| p.1).collect();
    Ok(NecessaryCheck {
        verdict: necessary_verdict(&values),
        trajectory,
        warnings,
    })
}

/// Twelve geometric points from `10^2` to `10^8`.
pub fn default_n_grid() -> Vec<f64> {
    geometric_grid(1e2, 1e8, 12)
}

/// The primes of the progression nearest to `10^2, …, 10^6` (ties go to the smaller).
pub fn default_p_grid(ap: &ApSpec) -> Result<Vec<u64>> {
    let list = sieve_range_capped(1.1e6, *ap, u64::MAX)?;
    let primes = list.primes();
    let mut grid: Vec<u64> = Vec::new();
    for e in 2..=6 {
        let target = 10u64.pow(e);
        let i = primes.partition_point(|&p| p <= target);
        let below = i.checked_sub(1).map(|j| primes[j]);
        let above = primes.get(i).copied();
        let nearest = match (below, above) {
            (Some(b), Some(a)) => Some(if a - target < target - b { a } else { b }),
            (b, a) => b.or(a),
        };
        if let Some(p) = nearest {
            if grid.last().is_none_or(|&last| last < p) {
                grid.push(p);
            }
        }
    }
    Ok(grid)
}

/// Runs all three checks for `f_text` on the given grids.
pub fn evaluate(
    f_text: &str,
    ap: &ApSpec,
    n_grid: &[f64],
    p_grid: &[u64],
) -> Result<ConditionReport> {
    validate_grid(n_grid)?;
    let sample_hi = n_grid[n_grid.len() - 1].max(p_grid.last().map_or(2.0, |&p| p as f64));
    let f = FuncProfile::from_text(f_text, sample_hi)?;
    Ok(ConditionReport {
        f_text: f_text.to_string(),
        ap: *ap,
        sufficient: check_sufficient(&f, n_grid)?,
        a33: check_a33(&f, n_grid)?,
        necessary: check_necessary(&f, ap, p_grid)?,
    })
}
