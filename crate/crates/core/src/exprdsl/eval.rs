use super::Expr;
use crate::error::EvalError;

fn fail(t: f64, reason: impl Into<String>) -> EvalError {
    EvalError {
        t,
        reason: reason.into(),
    }
}

fn finite(t: f64, v: f64, what: &str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(fail(t, format!("{what} is not finite")))
    }
}

pub(crate) fn eval(e: &Expr, t: f64) -> Result<f64, EvalError> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Var => Ok(t),
        Expr::Add(a, b) => finite(t, eval(a, t)? + eval(b, t)?, "sum"),
        Expr::Sub(a, b) => finite(t, eval(a, t)? - eval(b, t)?, "difference"),
        Expr::Mul(a, b) => finite(t, eval(a, t)? * eval(b, t)?, "product"),
        Expr::Div(a, b) => {
            let den = eval(b, t)?;
            if den == 0.0 {
                return Err(fail(t, "division by zero"));
            }
            finite(t, eval(a, t)? / den, "quotient")
        }
        Expr::Pow(u, alpha) => {
            let base = eval(u, t)?;
            if base < 0.0 && alpha.fract() != 0.0 {
                return Err(fail(t, "fractional power of a negative number"));
            }
            if base == 0.0 && *alpha < 0.0 {
                return Err(fail(t, "negative power of zero"));
            }
            finite(t, base.powf(*alpha), "power")
        }
        Expr::PowBase(c, u) => {
            let exponent = eval(u, t)?;
            if *c < 0.0 {
                return Err(fail(t, "exponential with a negative base"));
            }
            finite(t, c.powf(exponent), "exponential")
        }
        Expr::Log(u) => {
            let arg = eval(u, t)?;
            if arg <= 0.0 {
                return Err(fail(t, "log of a non-positive number"));
            }
            Ok(arg.ln())
        }
        Expr::Exp(u) => finite(t, eval(u, t)?.exp(), "exp"),
        Expr::Neg(u) => Ok(-eval(u, t)?),
    }
}

/// `sign · exp(ln_abs)`, with `sign = 0` for an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMagnitude {
    pub sign: i8,
    pub ln_abs: f64,
}

impl LogMagnitude {
    const ZERO: LogMagnitude = LogMagnitude {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogMagnitude {
                sign: if v > 0.0 { 1 } else { -1 },
                ln_abs: v.abs().ln(),
            }
        }
    }

    /// The plain value; overflows to an error rather than to infinity.
    pub fn value(self, t: f64) -> Result<f64, EvalError> {
        finite(t, self.sign as f64 * self.ln_abs.exp(), "value").or_else(|e| {
            if self.sign == 0 {
                Ok(0.0)
            } else {
                Err(e)
            }
        })
    }

    fn neg(self) -> Self {
        LogMagnitude {
            sign: -self.sign,
            ..self
        }
    }

    fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        let gap = (small.ln_abs - big.ln_abs).exp();
        if big.sign == small.sign {
            LogMagnitude {
                sign: big.sign,
                ln_abs: big.ln_abs + gap.ln_1p(),
            }
        } else if gap == 1.0 {
            Self::ZERO
        } else {
            LogMagnitude {
                sign: big.sign,
                ln_abs: big.ln_abs + (-gap).ln_1p(),
            }
        }
    }
}

pub(crate) fn eval_ln_abs(e: &Expr, t: f64) -> Result<LogMagnitude, EvalError> {
    let lm = match e {
        Expr::Const(c) => LogMagnitude::from_value(*c),
        Expr::Var => LogMagnitude::from_value(t),
        Expr::Add(a, b) => eval_ln_abs(a, t)?.add(eval_ln_abs(b, t)?),
        Expr::Sub(a, b) => eval_ln_abs(a, t)?.add(eval_ln_abs(b, t)?.neg()),
        Expr::Mul(a, b) => {
            let (x, y) = (eval_ln_abs(a, t)?, eval_ln_abs(b, t)?);
            if x.sign == 0 || y.sign == 0 {
                LogMagnitude::ZERO
            } else {
                LogMagnitude {
                    sign: x.sign * y.sign,
                    ln_abs: x.ln_abs + y.ln_abs,
                }
            }
        }
        Expr::Div(a, b) => {
            let (x, y) = (eval_ln_abs(a, t)?, eval_ln_abs(b, t)?);
            if y.sign == 0 {
                return Err(fail(t, "division by zero"));
            }
            if x.sign == 0 {
                LogMagnitude::ZERO
            } else {
                LogMagnitude {
                    sign: x.sign * y.sign,
                    ln_abs: x.ln_abs - y.ln_abs,
                }
            }
        }
        Expr::Pow(u, alpha) => {
            let x = eval_ln_abs(u, t)?;
            match x.sign {
                0 if *alpha > 0.0 => LogMagnitude::ZERO,
                0 => return Err(fail(t, "negative power of zero")),
                s if s < 0 && alpha.fract() != 0.0 => {
                    return Err(fail(t, "fractional power of a negative number"))
                }
                s => LogMagnitude {
                    sign: if s < 0 && (alpha / 2.0).fract() != 0.0 {
                        -1
                    } else {
                        1
                    },
                    ln_abs: alpha * x.ln_abs,
                },
            }
        }
        Expr::PowBase(c, u) => {
            if *c < 0.0 {
                return Err(fail(t, "exponential with a negative base"));
            }
            let exponent = eval_ln_abs(u, t)?.value(t)?;
            if *c == 0.0 {
                if exponent > 0.0 {
                    LogMagnitude::ZERO
                } else {
                    return Err(fail(t, "non-positive power of zero"));
                }
            } else {
                LogMagnitude {
                    sign: 1,
                    ln_abs: exponent * c.ln(),
                }
            }
        }
        Expr::Log(u) => {
            let x = eval_ln_abs(u, t)?;
            if x.sign <= 0 {
                return Err(fail(t, "log of a non-positive number"));
            }
            LogMagnitude::from_value(x.ln_abs)
        }
        Expr::Exp(u) => LogMagnitude {
            sign: 1,
            ln_abs: eval_ln_abs(u, t)?.value(t)?,
        },
        Expr::Neg(u) => eval_ln_abs(u, t)?.neg(),
    };
    if lm.ln_abs.is_nan() || lm.ln_abs == f64::INFINITY {
        return Err(fail(t, "magnitude is not finite"));
    }
    Ok(lm)
}
