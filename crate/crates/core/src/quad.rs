//! Adaptive Simpson quadrature and the integral main terms and remainder
//! envelopes built on it.
//!
//! Every integral here runs from 2 to `x`. Integrands are smooth there
//! (`log t ≥ log 2`), so Simpson's rule with bisection and a Richardson
//! correction is accurate enough.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::apsieve::ApSpec;
use crate::error::{Error, Result};
use crate::exprdsl::FuncProfile;
use crate::sum::CompensatedSum;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_DEPTH: u32 = 60;

/// Intervals whose error estimate is below this fraction of their own
/// magnitude are accepted even if the absolute share of `tol` is smaller;
/// below it the estimate is rounding noise.
const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Largest number of geometric panels the interval is split into before
/// adaptive refinement starts.
const MAX_PANELS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

struct Simpson<F> {
    g: F,
    /// Acceptable error per unit length.
    density: f64,
    evaluations: usize,
    value: CompensatedSum,
    error: f64,
}

impl<F: FnMut(f64) -> Result<f64>> Simpson<F> {
    fn eval(&mut self, t: f64) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.g)(t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand { t })
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        depth: u32,
    ) -> Result<()> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (self.eval(lm)?, self.eval(rm)?);
        // Each half uses its own floating-point width so that a child's
        // estimate is consistent with the one its parent handed down.
        let h = b - a;
        let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
        let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
        let halves = left + right;
        let err = (halves - whole).abs() / 15.0;
        if err <= self.density * h || err <= ROUNDOFF_FLOOR * halves.abs() {
            self.value.add(halves + (halves - whole) / 15.0);
            self.error += err;
            return Ok(());
        }
        if depth >= MAX_DEPTH || !(a < lm && lm < m && m < rm && rm < b) {
            return Err(Error::MaxDepthExceeded { a, b });
        }
        self.refine(a, m, fa, flm, fm, left, depth + 1)?;
        self.refine(m, b, fm, frm, fb, right, depth + 1)
    }

    fn panel(&mut self, a: f64, b: f64) -> Result<()> {
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (self.eval(a)?, self.eval(m)?, self.eval(b)?);
        let whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0;
        self.refine(a, b, fa, fm, fb, whole, 0)
    }
}

/// Panel boundaries: geometric for positive `a`, so that wide ranges such
/// as `[2, 10^8]` start out resolved on every scale.
fn panels(a: f64, b: f64) -> Vec<f64> {
    let n = if a > 0.0 {
        ((b / a).log2().ceil() as usize).clamp(1, MAX_PANELS)
    } else {
        1
    };
    let mut edges: Vec<f64> = (0..=n)
        .map(|i| match i {
            0 => a,
            i if i == n => b,
            i => a * ((b / a).ln() * i as f64 / n as f64).exp(),
        })
        .collect();
    edges.dedup();
    edges
}

/// Integrates `g` over `[a, b]` to an absolute tolerance `tol`.
///
/// The tolerance is spread over the interval by length: each accepted
/// subinterval has an estimated error at most `tol · len / (b − a)`.
pub fn integrate<F>(g: F, a: f64, b: f64, tol: f64) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::InvalidInterval { a, b });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let mut s = Simpson {
        g,
        density: tol / (b - a),
        evaluations: 0,
        value: CompensatedSum::new(),
        error: 0.0,
    };
    for w in panels(a, b).windows(2) {
        s.panel(w[0], w[1])?;
    }
    Ok(Integral {
        value: s.value.value(),
        abs_error_estimate: s.error,
        evaluations: s.evaluations,
    })
}

/// `∫_a^{x_i} g` for each point of the increasing grid `xs` (all `≥ a`),
/// accumulated piece by piece so the integrand is only traversed once.
pub fn integrate_cumulative<F>(mut g: F, a: f64, xs: &[f64], tol: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let Some(&last) = xs.last() else {
        return Ok(Vec::new());
    };
    if xs.first().is_some_and(|&x0| x0 < a) || xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidGrid);
    }
    let span = (last - a).max(f64::MIN_POSITIVE);
    let mut acc = CompensatedSum::new();
    let mut lo = a;
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let piece_tol = (tol * (x - lo) / span).max(f64::MIN_POSITIVE);
        acc.add(integrate(&mut g, lo, x, piece_tol)?.value);
        out.push(acc.value());
        lo = x;
    }
    Ok(out)
}

fn check_bound(x: f64) -> Result<()> {
    if x.is_finite() && x >= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidBound(x))
    }
}

/// `∫_2^x dt / log t`.
pub fn li_offset(x: f64) -> Result<f64> {
    check_bound(x)?;
    Ok(integrate(|t| Ok(1.0 / t.ln()), 2.0, x, DEFAULT_TOL)?.value)
}

/// Which asymptotic the prediction follows, named after the input it rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    /// Main term `x f(x) / (φ(k) log x) − ∫ t f'(t) / (φ(k) log t)`, remainder `x / log² x`.
    Coarse,
    /// Integral main term, remainder `x · exp(−c √log x)`.
    Pnt,
    /// Integral main term, remainder `x · exp(−c (log x)^θ)`.
    Vinogradov,
    /// Integral main term, remainder `√x · log x`; conditional on GRH.
    Grh,
}

impl ModelTag {
    pub const ALL: [ModelTag; 4] = [
        ModelTag::Coarse,
        ModelTag::Pnt,
        ModelTag::Vinogradov,
        ModelTag::Grh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::Coarse => "coarse",
            ModelTag::Pnt => "pnt",
            ModelTag::Vinogradov => "vinogradov",
            ModelTag::Grh => "grh",
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ModelTag::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown model `{s}` (expected coarse, pnt, vinogradov or grh)"))
    }
}

/// Envelope constants. `c` is the unspecified positive constant of the
/// zero-free-region remainders, `theta` the Vinogradov exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub c: f64,
    pub theta: f64,
    pub tol: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            c: 1.0,
            theta: 0.6,
            tol: DEFAULT_TOL,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "c",
                value: self.c,
                expected: "c > 0",
            });
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: self.theta,
                expected: "0 < theta < 1",
            });
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidTolerance(self.tol));
        }
        Ok(())
    }
}

/// Integrand of the integral main term: `f(t) / log t`.
pub(crate) fn main_integrand(f: &FuncProfile) -> impl FnMut(f64) -> Result<f64> + '_ {
    move |t| Ok(f.eval(t)? / t.ln())
}

/// Integrand of the coarse main term: `t f'(t) / log t`.
pub(crate) fn coarse_integrand(f: &FuncProfile) -> impl FnMut(f64) -> Result<f64> + '_ {
    move |t| Ok(t * f.eval_deriv(t)? / t.ln())
}

/// The pointwise envelope factor `w(t)` such that the envelope is
/// `|f(x)| · x · w(x) + ∫_2^x t |f'(t)| w(t) dt`.
pub(crate) fn envelope_weight(model: ModelTag, params: &ModelParams) -> impl Fn(f64) -> f64 {
    let (c, theta) = (params.c, params.theta);
    move |t: f64| {
        let l = t.ln();
        match model {
            ModelTag::Coarse => 1.0 / (l * l),
            ModelTag::Pnt => (-c * l.sqrt()).exp(),
            ModelTag::Vinogradov => (-c * l.powf(theta)).exp(),
            ModelTag::Grh => l / t.sqrt(),
        }
    }
}

pub(crate) fn coarse_main_from_integral(
    f: &FuncProfile,
    x: f64,
    ap: &ApSpec,
    integral: f64,
) -> Result<f64> {
    let phi = ap.phi_k() as f64;
    Ok(x * f.eval(x)? / (phi * x.ln()) - integral / phi)
}

/// The model's main term.
pub fn main_term(f: &FuncProfile, x: f64, ap: &ApSpec, model: ModelTag, tol: f64) -> Result<f64> {
    check_bound(x)?;
    let phi = ap.phi_k() as f64;
    match model {
        ModelTag::Coarse => {
            let integral = if f.derivative_vanishes() {
                0.0
            } else {
                integrate(coarse_integrand(f), 2.0, x, tol)?.value
            };
            coarse_main_from_integral(f, x, ap, integral)
        }
        ModelTag::Pnt | ModelTag::Vinogradov | ModelTag::Grh => {
            Ok(integrate(main_integrand(f), 2.0, x, tol)?.value / phi)
        }
    }
}

/// The model's remainder envelope without its O-constant.
pub fn envelope(f: &FuncProfile, x: f64, model: ModelTag, params: &ModelParams) -> Result<f64> {
    check_bound(x)?;
    params.validate()?;
    let w = envelope_weight(model, params);
    let boundary = f.eval(x)?.abs() * x * w(x);
    let integral = if f.derivative_vanishes() {
        0.0
    } else {
        integrate(
            |t| Ok(t * f.eval_deriv(t)?.abs() * w(t)),
            2.0,
            x,
            params.tol,
        )?
        .value
    };
    Ok(boundary + integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::FuncProfile;

    fn prof(s: &str) -> FuncProfile {
        FuncProfile::from_text(s, 1e6).unwrap()
    }

    fn ap(k: u64, l: i64) -> ApSpec {
        ApSpec::new(k, l).unwrap()
    }

    /// Composite midpoint rule in `u = log t`, the oracle for the quadrature checks.
    fn midpoint_log_oracle(g: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let (ua, ub) = (a.ln(), b.ln());
        let h = (ub - ua) / panels as f64;
        let mut s = CompensatedSum::new();
        for i in 0..panels {
            let t = (ua + (i as f64 + 0.5) * h).exp();
            s.add(g(t) * t);
        }
        s.value() * h
    }

    #[test]
    fn integrate_examples() {
        let r = integrate(|_| Ok(1.0), 2.0, 5.0, 1e-10).unwrap();
        assert!((r.value - 3.0).abs() <= 1e-12);
        assert!(r.abs_error_estimate >= 0.0);

        let r = integrate(|t| Ok(1.0 / t), 2.0, 8.0, 1e-10).unwrap();
        assert!((r.value - 4f64.ln()).abs() <= 1e-9);

        let oracle = midpoint_log_oracle(|t| 1.0 / t.ln(), 2.0, 100.0, 1_000_000);
        let r = integrate(|t| Ok(1.0 / t.ln()), 2.0, 100.0, 1e-10).unwrap();
        assert!((r.value - oracle).abs() <= 1e-8, "{} vs {oracle}", r.value);
        assert!((r.value - 29.08).abs() < 0.01);
    }

    #[test]
    fn integrate_errors() {
        assert_eq!(
            integrate(|_| Ok(1.0), 5.0, 2.0, 1e-10),
            Err(Error::InvalidInterval { a: 5.0, b: 2.0 })
        );
        assert_eq!(
            integrate(|_| Ok(1.0), 2.0, 5.0, 0.0),
            Err(Error::InvalidTolerance(0.0))
        );
        assert!(matches!(
            integrate(|t| Ok(1.0 / (t - 3.0)), 2.0, 5.0, 1e-10),
            Err(Error::NonFiniteIntegrand { .. }) | Err(Error::MaxDepthExceeded { .. })
        ));
        assert_eq!(
            integrate(
                |t| Ok(if t > 3.0 { f64::NAN } else { 1.0 }),
                2.0,
                5.0,
                1e-10
            )
            .unwrap_err()
            .to_string()
            .split(' ')
            .next(),
            Some("integrand")
        );
    }

    #[test]
    fn halving_tolerance_does_not_worsen_error() {
        let oracle = midpoint_log_oracle(|t| 1.0 / t.ln(), 2.0, 100.0, 1_000_000);
        let mut prev = f64::INFINITY;
        let mut tol = 1e-3;
        while tol >= 1e-8 {
            let err = (integrate(|t| Ok(1.0 / t.ln()), 2.0, 100.0, tol)
                .unwrap()
                .value
                - oracle)
                .abs();
            assert!(err <= prev, "tol {tol}: {err} > {prev}");
            prev = err;
            tol /= 2.0;
        }
    }

    #[test]
    fn li_offset_values() {
        assert_eq!(li_offset(2.0).unwrap(), 0.0);
        let oracle = midpoint_log_oracle(|t| 1.0 / t.ln(), 2.0, 100.0, 1_000_000);
        assert!((li_offset(100.0).unwrap() - oracle).abs() < 1e-8);
        // li(10^6) - li(2) from published tables
        let reference = 78_627.549_159_462_19 - 1.045_163_780_117_493;
        let oracle = midpoint_log_oracle(|t| 1.0 / t.ln(), 2.0, 1e6, 1_000_000);
        assert!((oracle - reference).abs() < 1e-6);
        assert!((li_offset(1e6).unwrap() - reference).abs() < 1e-7);
        assert!(li_offset(1.0).is_err());
    }

    #[test]
    fn main_term_examples() {
        let one = prof("1");
        let pnt = main_term(&one, 1e4, &ap(1, 0), ModelTag::Pnt, DEFAULT_TOL).unwrap();
        assert!((pnt - li_offset(1e4).unwrap()).abs() < 1e-8);

        let log = prof("log(t)");
        let m = main_term(&log, 1e4, &ap(4, 1), ModelTag::Pnt, DEFAULT_TOL).unwrap();
        assert!((m - (1e4 - 2.0) / 2.0).abs() < 1e-8);

        let sqrt = prof("t^0.5");
        let params = ModelParams::default();
        let coarse = main_term(&sqrt, 1e4, &ap(1, 0), ModelTag::Coarse, DEFAULT_TOL).unwrap();
        let pnt = main_term(&sqrt, 1e4, &ap(1, 0), ModelTag::Pnt, DEFAULT_TOL).unwrap();
        let env = envelope(&sqrt, 1e4, ModelTag::Coarse, &params).unwrap();
        assert!((coarse - pnt).abs() <= env, "{coarse} {pnt} {env}");
    }

    #[test]
    fn models_sharing_the_integral_main_term_agree() {
        let f = prof("log(t)/t");
        let vals: Vec<f64> = [ModelTag::Pnt, ModelTag::Vinogradov, ModelTag::Grh]
            .into_iter()
            .map(|m| main_term(&f, 1e5, &ap(3, 1), m, DEFAULT_TOL).unwrap())
            .collect();
        assert_eq!(vals[0], vals[1]);
        assert_eq!(vals[1], vals[2]);
    }

    #[test]
    fn envelope_examples() {
        let params = ModelParams::default();
        let one = prof("1");
        let grh = envelope(&one, 1e4, ModelTag::Grh, &params).unwrap();
        assert!((grh - 100.0 * 1e4f64.ln()).abs() < 1e-9);
        assert!((grh - 921.0).abs() < 0.1);

        let x = 4f64.exp();
        let coarse = envelope(&one, x, ModelTag::Coarse, &params).unwrap();
        assert!((coarse - x / 16.0).abs() < 1e-12);
        assert!((coarse - 3.41).abs() < 0.01);

        let log = prof("log(t)");
        let pnt = envelope(&log, 1e4, ModelTag::Pnt, &params).unwrap();
        let boundary = 1e4f64.ln() * 1e4 * (-(1e4f64.ln().sqrt())).exp();
        let oracle =
            boundary + midpoint_log_oracle(|t| (-(t.ln().sqrt())).exp(), 2.0, 1e4, 1_000_000);
        assert!((pnt - oracle).abs() <= 1e-8 * oracle, "{pnt} vs {oracle}");
    }

    #[test]
    fn envelope_parameter_validation() {
        let one = prof("1");
        let bad_c = ModelParams {
            c: 0.0,
            ..Default::default()
        };
        assert!(envelope(&one, 100.0, ModelTag::Pnt, &bad_c).is_err());
        let bad_theta = ModelParams {
            theta: 1.0,
            ..Default::default()
        };
        assert!(envelope(&one, 100.0, ModelTag::Vinogradov, &bad_theta).is_err());
    }

    #[test]
    fn cumulative_matches_direct() {
        let xs = [10.0, 100.0, 1e3, 1e4];
        let cum = integrate_cumulative(|t| Ok(1.0 / t.ln()), 2.0, &xs, 1e-10).unwrap();
        for (x, c) in xs.iter().zip(&cum) {
            assert!((li_offset(*x).unwrap() - c).abs() < 1e-8);
        }
        assert!(integrate_cumulative(Ok, 2.0, &[5.0, 3.0], 1e-10).is_err());
    }

    #[test]
    fn model_tags_round_trip() {
        for m in ModelTag::ALL {
            assert_eq!(m.to_string().parse::<ModelTag>().unwrap(), m);
        }
        assert!("gauss".parse::<ModelTag>().is_err());
    }
}
