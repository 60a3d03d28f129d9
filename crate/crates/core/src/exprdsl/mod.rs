//! Weight functions `f(t)`: a small expression language with parsing,
//! evaluation, symbolic differentiation and a sampled monotonicity profile.
//!
//! All logarithms are natural logarithms. Exponents of `^` are numeric
//! constants, except for the `c^t` / `c^(expr)` form which builds
//! [`Expr::PowBase`].

mod deriv;
mod eval;
mod parser;

use std::fmt;

pub use eval::LogMagnitude;
pub use parser::parse;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// The variable `t`.
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// `u^α` with a constant exponent.
    Pow(Box<Expr>, f64),
    /// `c^u` with a constant base.
    PowBase(f64, Box<Expr>),
    Log(Box<Expr>),
    Exp(Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    pub fn is_const(&self, c: f64) -> bool {
        matches!(self, Expr::Const(v) if *v == c)
    }

    /// Symbolic derivative with respect to `t`.
    pub fn differentiate(&self) -> Expr {
        deriv::differentiate(self)
    }

    /// Evaluates at `t`; any non-finite intermediate is an error.
    pub fn eval(&self, t: f64) -> std::result::Result<f64, crate::EvalError> {
        eval::eval(self, t)
    }

    /// Evaluates `sign(f(t))` and `ln |f(t)|` without forming `f(t)`, so that
    /// values far outside the `f64` range (such as `2^t` at `t = 10^8`) stay usable.
    pub fn eval_ln_abs(&self, t: f64) -> std::result::Result<LogMagnitude, crate::EvalError> {
        eval::eval_ln_abs(self, t)
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var | Expr::Log(_) | Expr::Exp(_) => write!(f, "{self}"),
            Expr::Const(c) if *c >= 0.0 => write!(f, "{self}"),
            _ => write!(f, "({self})"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{})", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => f.write_str("t"),
            Expr::Add(a, b) => write!(f, "{a} + {}", Paren(b)),
            Expr::Sub(a, b) => write!(f, "{a} - {}", Paren(b)),
            Expr::Mul(a, b) => write!(f, "{} * {}", Paren(a), Paren(b)),
            Expr::Div(a, b) => write!(f, "{} / {}", Paren(a), Paren(b)),
            Expr::Pow(u, a) => {
                u.fmt_atom(f)?;
                write!(f, "^{a}")
            }
            Expr::PowBase(c, u) => write!(f, "{c}^({u})"),
            Expr::Log(u) => write!(f, "log({u})"),
            Expr::Exp(u) => write!(f, "exp({u})"),
            Expr::Neg(u) => write!(f, "-{}", Paren(u)),
        }
    }
}

/// Prints anything but a leaf or a call in parentheses.
struct Paren<'a>(&'a Expr);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Expr::Var | Expr::Log(_) | Expr::Exp(_) | Expr::Pow(..) | Expr::PowBase(..) => {
                write!(f, "{}", self.0)
            }
            Expr::Const(c) if *c >= 0.0 => write!(f, "{}", self.0),
            e => write!(f, "({e})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    NonMonotoneOnSample,
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
            Monotonicity::NonMonotoneOnSample => "non-monotone-on-sample",
        })
    }
}

/// Families with a closed-form main term or a known place in the worked examples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalKind {
    One,
    Log,
    Inv,
    LogOverT,
    Power(f64),
    PowBase(f64),
}

impl fmt::Display for CanonicalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalKind::One => f.write_str("one"),
            CanonicalKind::Log => f.write_str("log"),
            CanonicalKind::Inv => f.write_str("inv"),
            CanonicalKind::LogOverT => f.write_str("log_over_t"),
            CanonicalKind::Power(a) => write!(f, "power({a})"),
            CanonicalKind::PowBase(c) => write!(f, "powbase({c})"),
        }
    }
}

impl CanonicalKind {
    pub fn detect(e: &Expr) -> Option<CanonicalKind> {
        use Expr::*;
        let is_log_t = |e: &Expr| matches!(e, Log(u) if **u == Var);
        let is_inv_t = |e: &Expr| matches!(e, Pow(u, a) if **u == Var && *a == -1.0);
        match e {
            Const(c) if *c == 1.0 => Some(CanonicalKind::One),
            Var => Some(CanonicalKind::Power(1.0)),
            e if is_log_t(e) => Some(CanonicalKind::Log),
            e if is_inv_t(e) => Some(CanonicalKind::Inv),
            Div(a, b) if a.is_const(1.0) && **b == Var => Some(CanonicalKind::Inv),
            Div(a, b) if is_log_t(a) && **b == Var => Some(CanonicalKind::LogOverT),
            Mul(a, b) if (is_log_t(a) && is_inv_t(b)) || (is_inv_t(a) && is_log_t(b)) => {
                Some(CanonicalKind::LogOverT)
            }
            Pow(u, a) if **u == Var => Some(CanonicalKind::Power(*a)),
            Div(a, b) if a.is_const(1.0) => match &**b {
                Pow(u, p) if **u == Var => Some(CanonicalKind::Power(-p)),
                _ => None,
            },
            PowBase(c, u) if **u == Var => Some(CanonicalKind::PowBase(*c)),
            _ => None,
        }
    }
}

/// Number of points on the geometric grid used for the monotonicity sample.
pub const PROFILE_SAMPLES: usize = 64;

/// A weight function together with its derivative and sampled shape.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncProfile {
    pub expr: Expr,
    pub deriv: Expr,
    pub monotone: Monotonicity,
    pub canonical_kind: Option<CanonicalKind>,
}

impl FuncProfile {
    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.expr.eval(t)?)
    }

    pub fn eval_deriv(&self, t: f64) -> Result<f64> {
        Ok(self.deriv.eval(t)?)
    }

    /// True when the derivative simplified to the constant zero.
    pub fn derivative_vanishes(&self) -> bool {
        self.deriv.is_const(0.0)
    }

    /// Parses `text` and profiles it on `[2, sample_hi]`.
    pub fn from_text(text: &str, sample_hi: f64) -> Result<Self> {
        profile(&parse(text)?, sample_hi)
    }
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln();
            (0..n)
                .map(|i| {
                    if i + 1 == n {
                        hi
                    } else {
                        lo * (ratio * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Differentiates `e` and classifies its monotonicity from the sign of the
/// derivative on 64 geometric sample points in `[2, sample_hi]`.
pub fn profile(e: &Expr, sample_hi: f64) -> Result<FuncProfile> {
    let deriv = e.differentiate();
    let hi = if sample_hi.is_finite() {
        sample_hi.max(2.0)
    } else {
        2.0
    };
    let mut pos = 0;
    let mut neg = 0;
    for t in geometric_grid(2.0, hi, PROFILE_SAMPLES) {
        match deriv.eval_ln_abs(t)?.sign {
            s if s > 0 => pos += 1,
            s if s < 0 => neg += 1,
            _ => {}
        }
    }
    let monotone = if pos == PROFILE_SAMPLES {
        Monotonicity::Increasing
    } else if neg == PROFILE_SAMPLES {
        Monotonicity::Decreasing
    } else {
        Monotonicity::NonMonotoneOnSample
    };
    Ok(FuncProfile {
        expr: e.clone(),
        deriv,
        monotone,
        canonical_kind: CanonicalKind::detect(e),
    })
}

/// Checks that `f` and `f'` evaluate to finite values on `points` geometric
/// sample points of `[lo, hi]`.
pub fn check_domain(f: &FuncProfile, lo: f64, hi: f64, points: usize) -> Result<()> {
    for t in geometric_grid(lo, hi.max(lo), points) {
        f.eval(t)?;
        f.eval_deriv(t)?;
    }
    Ok(())
}
