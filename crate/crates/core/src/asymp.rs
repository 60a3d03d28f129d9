//! Exact prime sums, the Abel-summation cross-check, closed-form main terms
//! and convergence tables against the model predictions.

use serde::Serialize;

use crate::apsieve::{sieve_range, ApSpec};
use crate::error::{Error, Result};
use crate::exprdsl::{CanonicalKind, FuncProfile};
use crate::quad::{
    coarse_integrand, coarse_main_from_integral, envelope, envelope_weight, integrate_cumulative,
    li_offset, main_integrand, main_term, ModelParams, ModelTag,
};
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub model: ModelTag,
    pub main: f64,
    pub envelope: f64,
    pub c: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub x: f64,
    pub exact: f64,
    pub main: f64,
    /// `exact / main`; NaN when the main term is exactly zero (at `x = 2`).
    pub ratio: f64,
    /// `(exact − main) / envelope`.
    pub normalized_remainder: f64,
}

/// `Σ f(p)` over the given primes, in order.
pub fn exact_sum_over(f: &FuncProfile, primes: &[u64]) -> Result<f64> {
    let mut s = CompensatedSum::new();
    for &p in primes {
        s.add(f.eval(p as f64)?);
    }
    Ok(s.value())
}

/// `Σ_{p ≤ x, p ≡ l (mod k)} f(p)`.
pub fn exact_sum(f: &FuncProfile, x: f64, ap: &ApSpec) -> Result<f64> {
    exact_sum_over(f, sieve_range(x, *ap)?.primes())
}

/// `π(x) f(x) − ∫_2^x π(t) f'(t) dt` for the step function `π` jumping at
/// `primes` (ascending, all `≤ x`).
///
/// The integral is exact: on `[p_j, p_{j+1})` the count is `j`, so it equals
/// `Σ_j j · (f(p_{j+1}) − f(p_j))` with `p_{m+1} = x`.
pub fn abel_sum_over(f: &FuncProfile, x: f64, primes: &[u64]) -> Result<f64> {
    let fx = f.eval(x)?;
    let mut integral = CompensatedSum::new();
    let mut prev = match primes.first() {
        Some(&p) => f.eval(p as f64)?,
        None => return Ok(0.0),
    };
    for (j, &next) in primes.iter().enumerate().skip(1) {
        let cur = f.eval(next as f64)?;
        integral.add(j as f64 * (cur - prev));
        prev = cur;
    }
    integral.add(primes.len() as f64 * (fx - prev));
    Ok(primes.len() as f64 * fx - integral.value())
}

/// The Abel-summation form of [`exact_sum`].
pub fn abel_sum(f: &FuncProfile, x: f64, ap: &ApSpec) -> Result<f64> {
    abel_sum_over(f, x, sieve_range(x, *ap)?.primes())
}

/// Closed-form main terms of the worked examples:
/// `li_offset(x)/φ(k)`, `x/φ(k)`, `log log x/φ(k)` and `log x/φ(k)` for
/// `f = 1, log t, 1/t, log t / t`.
pub fn canonical_main(kind: CanonicalKind, x: f64, ap: &ApSpec) -> Result<f64> {
    if !(x.is_finite() && x >= 2.0) {
        return Err(Error::InvalidBound(x));
    }
    let phi = ap.phi_k() as f64;
    let v = match kind {
        CanonicalKind::One => li_offset(x)?,
        CanonicalKind::Log => x,
        CanonicalKind::Inv => x.ln().ln(),
        CanonicalKind::LogOverT => x.ln(),
        other => return Err(Error::UnknownKind(other.to_string())),
    };
    Ok(v / phi)
}

pub fn predict(
    f: &FuncProfile,
    x: f64,
    ap: &ApSpec,
    model: ModelTag,
    params: &ModelParams,
) -> Result<Prediction> {
    params.validate()?;
    Ok(Prediction {
        model,
        main: main_term(f, x, ap, model, params.tol)?,
        envelope: envelope(f, x, model, params)?,
        c: params.c,
        theta: params.theta,
    })
}

fn validate_grid(xs: &[f64]) -> Result<()> {
    let ok = !xs.is_empty()
        && xs.iter().all(|x| x.is_finite())
        && xs[0] >= 2.0
        && xs.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidGrid)
    }
}

/// Running `Σ f(p)` at each grid point from one pass over the sieve.
fn running_exact_sums(f: &FuncProfile, ap: &ApSpec, xs: &[f64]) -> Result<Vec<f64>> {
    let list = sieve_range(xs[xs.len() - 1], *ap)?;
    let mut acc = CompensatedSum::new();
    let mut primes = list.primes().iter().peekable();
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let n = x.floor() as u64;
        while let Some(&&p) = primes.peek() {
            if p > n {
                break;
            }
            acc.add(f.eval(p as f64)?);
            primes.next();
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// Compares exact sums against a model's main term on an increasing grid.
/// The sieve runs once up to `max(xs)`; integrals are accumulated piecewise.
pub fn convergence_table(
    f: &FuncProfile,
    ap: &ApSpec,
    xs: &[f64],
    model: ModelTag,
    params: &ModelParams,
) -> Result<Vec<ConvergenceRow>> {
    validate_grid(xs)?;
    params.validate()?;
    let exact = running_exact_sums(f, ap, xs)?;
    let phi = ap.phi_k() as f64;

    let mains: Vec<f64> = match model {
        ModelTag::Coarse => {
            let integrals = if f.derivative_vanishes() {
                vec![0.0; xs.len()]
            } else {
                integrate_cumulative(coarse_integrand(f), 2.0, xs, params.tol)?
            };
            xs.iter()
                .zip(integrals)
                .map(|(&x, i)| coarse_main_from_integral(f, x, ap, i))
                .collect::<Result<_>>()?
        }
        _ => integrate_cumulative(main_integrand(f), 2.0, xs, params.tol)?
            .into_iter()
            .map(|v| v / phi)
            .collect(),
    };

    let w = envelope_weight(model, params);
    let env_integrals = if f.derivative_vanishes() {
        vec![0.0; xs.len()]
    } else {
        integrate_cumulative(
            |t| Ok(t * f.eval_deriv(t)?.abs() * w(t)),
            2.0,
            xs,
            params.tol,
        )?
    };

    xs.iter()
        .zip(exact)
        .zip(mains)
        .zip(env_integrals)
        .map(|(((&x, exact), main), env_int)| {
            let envelope = f.eval(x)?.abs() * x * w(x) + env_int;
            Ok(ConvergenceRow {
                x,
                exact,
                main,
                ratio: if main == 0.0 { f64::NAN } else { exact / main },
                normalized_remainder: (exact - main) / envelope,
            })
        })
        .collect()
}

/// Empirical O-constant: the largest `|normalized_remainder|` on the lower
/// half of the grid, checked against the upper half with ×1.5 slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderFit {
    pub constant: f64,
    pub worst_upper: f64,
    pub holds: bool,
}

pub const FIT_SLACK: f64 = 1.5;

pub fn fit_remainder_constant(rows: &[ConvergenceRow]) -> RemainderFit {
    let mid = rows.len() / 2;
    let max_abs = |rs: &[ConvergenceRow]| {
        rs.iter()
            .map(|r| r.normalized_remainder.abs())
            .fold(0.0_f64, f64::max)
    };
    let constant = max_abs(&rows[..mid]);
    let worst_upper = max_abs(&rows[mid..]);
    RemainderFit {
        constant,
        worst_upper,
        holds: worst_upper <= FIT_SLACK * constant,
    }
}

/// Exact sum against a closed-form main term, for the families whose
/// remainder is `O(1)` with an unknown constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalRow {
    pub x: f64,
    pub exact: f64,
    pub canonical: f64,
    pub difference: f64,
}

pub fn canonical_table(
    f: &FuncProfile,
    kind: CanonicalKind,
    ap: &ApSpec,
    xs: &[f64],
) -> Result<Vec<CanonicalRow>> {
    validate_grid(xs)?;
    let exact = running_exact_sums(f, ap, xs)?;
    xs.iter()
        .zip(exact)
        .map(|(&x, exact)| {
            let canonical = canonical_main(kind, x, ap)?;
            Ok(CanonicalRow {
                x,
                exact,
                canonical,
                difference: exact - canonical,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::geometric_grid;
    use crate::quad::DEFAULT_TOL;

    fn prof(s: &str) -> FuncProfile {
        FuncProfile::from_text(s, 1e6).unwrap()
    }

    fn ap(k: u64, l: i64) -> ApSpec {
        ApSpec::new(k, l).unwrap()
    }

    #[test]
    fn exact_sum_examples() {
        assert_eq!(exact_sum(&prof("1"), 50.0, &ap(4, 1)).unwrap(), 6.0);
        let direct = 2f64.ln() + 3f64.ln() + 5f64.ln() + 7f64.ln();
        let s = exact_sum(&prof("log(t)"), 10.0, &ap(1, 0)).unwrap();
        assert!((s - direct).abs() < 1e-12);
        assert!((s - 210f64.ln()).abs() < 1e-12);
        assert_eq!(exact_sum(&prof("1/t"), 2.0, &ap(1, 0)).unwrap(), 0.5);
    }

    #[test]
    fn abel_sum_examples() {
        assert_eq!(abel_sum(&prof("1"), 100.0, &ap(1, 0)).unwrap(), 25.0);
        assert!((abel_sum(&prof("t"), 10.0, &ap(1, 0)).unwrap() - 17.0).abs() < 1e-9);
        assert_eq!(abel_sum(&prof("t"), 4.0, &ap(10, 7)).unwrap(), 0.0);
        for s in ["1", "log(t)", "t^2", "1/t"] {
            let f = prof(s);
            for (x, a) in [(1000.5, ap(3, 1)), (97.0, ap(4, 3))] {
                let e = exact_sum(&f, x, &a).unwrap();
                let b = abel_sum(&f, x, &a).unwrap();
                assert!((e - b).abs() <= 1e-9 * e.abs().max(1.0), "{s}: {e} vs {b}");
            }
        }
    }

    #[test]
    fn canonical_main_examples() {
        assert_eq!(
            canonical_main(CanonicalKind::Log, 1e6, &ap(4, 1)).unwrap(),
            500000.0
        );
        let inv = canonical_main(CanonicalKind::Inv, 1e6, &ap(1, 0)).unwrap();
        assert!((inv - 2.6258).abs() < 1e-4);
        assert_eq!(
            canonical_main(CanonicalKind::One, 2.0, &ap(1, 0)).unwrap(),
            0.0
        );
        assert!(matches!(
            canonical_main(CanonicalKind::Power(2.0), 10.0, &ap(1, 0)),
            Err(Error::UnknownKind(_))
        ));
    }

    #[test]
    fn canonical_consistency() {
        let log = prof("log(t)");
        let m = main_term(&log, 1e6, &ap(4, 1), ModelTag::Pnt, DEFAULT_TOL).unwrap();
        let c = canonical_main(CanonicalKind::Log, 1e6, &ap(4, 1)).unwrap();
        assert!(((m - c) / c).abs() <= 0.01);

        let one = prof("1");
        let m = main_term(&one, 1e5, &ap(3, 2), ModelTag::Pnt, DEFAULT_TOL).unwrap();
        let c = canonical_main(CanonicalKind::One, 1e5, &ap(3, 2)).unwrap();
        assert!((m - c).abs() < 1e-9);
    }

    #[test]
    fn predict_examples() {
        let params = ModelParams::default();
        let p = predict(&prof("1"), 1e4, &ap(1, 0), ModelTag::Pnt, &params).unwrap();
        assert!((p.main - li_offset(1e4).unwrap()).abs() < 1e-9);
        assert_eq!(p.model, ModelTag::Pnt);

        let p = predict(&prof("log(t)"), 1e4, &ap(4, 1), ModelTag::Pnt, &params).unwrap();
        assert!((p.main - 4999.0).abs() < 1e-8);

        // |f(x)| x log x / √x = x log x; ∫ 0.5 log t dt = 0.5 (t log t − t)
        let p = predict(&prof("t^0.5"), 1e4, &ap(1, 0), ModelTag::Grh, &params).unwrap();
        let anti = |t: f64| 0.5 * (t * t.ln() - t);
        let expected = 1e4 * 1e4f64.ln() + anti(1e4) - anti(2.0);
        assert!((p.envelope - expected).abs() < 1e-7 * expected);
        assert!(p.envelope >= 0.0);
    }

    #[test]
    fn degenerate_table() {
        let params = ModelParams::default();
        let rows =
            convergence_table(&prof("1"), &ap(3, 2), &[2.0], ModelTag::Pnt, &params).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].exact, 1.0);
        assert!(rows[0].ratio.is_nan());
        let rows =
            convergence_table(&prof("1"), &ap(4, 1), &[2.0], ModelTag::Pnt, &params).unwrap();
        assert_eq!(rows[0].exact, 0.0);
    }

    #[test]
    fn table_rejects_bad_grids() {
        let params = ModelParams::default();
        let f = prof("1");
        for xs in [&[][..], &[1.0][..], &[10.0, 10.0][..], &[100.0, 10.0][..]] {
            assert_eq!(
                convergence_table(&f, &ap(1, 0), xs, ModelTag::Pnt, &params),
                Err(Error::InvalidGrid)
            );
        }
    }

    #[test]
    fn table_rows_match_pointwise_predictions() {
        let params = ModelParams::default();
        let f = prof("t^0.5");
        let xs = geometric_grid(1e3, 1e5, 5);
        for model in ModelTag::ALL {
            let rows = convergence_table(&f, &ap(4, 3), &xs, model, &params).unwrap();
            for r in &rows {
                let p = predict(&f, r.x, &ap(4, 3), model, &params).unwrap();
                assert!((r.main - p.main).abs() <= 1e-8 * p.main.abs());
                let env = (r.exact - r.main) / r.normalized_remainder;
                assert!((env - p.envelope).abs() <= 1e-8 * p.envelope);
                assert_eq!(r.exact, exact_sum(&f, r.x, &ap(4, 3)).unwrap());
            }
        }
    }

    #[test]
    fn fit_flags_growing_remainders() {
        let row = |x: f64, n: f64| ConvergenceRow {
            x,
            exact: 0.0,
            main: 1.0,
            ratio: 0.0,
            normalized_remainder: n,
        };
        let flat = [row(1.0, 0.5), row(2.0, -0.4), row(3.0, 0.6), row(4.0, 0.3)];
        assert!(fit_remainder_constant(&flat).holds);
        let growing = [row(1.0, 0.1), row(2.0, 0.2), row(3.0, 0.4), row(4.0, 0.8)];
        assert!(!fit_remainder_constant(&growing).holds);
    }
}
