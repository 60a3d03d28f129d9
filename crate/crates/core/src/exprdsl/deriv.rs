use super::Expr;

// Smart constructors: constant folding and 0/1 elimination only.

fn fold(v: f64, otherwise: impl FnOnce() -> Expr) -> Expr {
    if v.is_finite() {
        Expr::Const(v)
    } else {
        otherwise()
    }
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => fold(x + y, || {
            Expr::Add(Box::new(a.clone()), Box::new(b.clone()))
        }),
        _ if a.is_const(0.0) => b,
        _ if b.is_const(0.0) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => fold(x - y, || {
            Expr::Sub(Box::new(a.clone()), Box::new(b.clone()))
        }),
        _ if b.is_const(0.0) => a,
        _ if a.is_const(0.0) => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => fold(x * y, || {
            Expr::Mul(Box::new(a.clone()), Box::new(b.clone()))
        }),
        _ if a.is_const(0.0) || b.is_const(0.0) => Expr::Const(0.0),
        _ if a.is_const(1.0) => b,
        _ if b.is_const(1.0) => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => fold(x / y, || {
            Expr::Div(Box::new(a.clone()), Box::new(b.clone()))
        }),
        _ if a.is_const(0.0) && !b.is_const(0.0) => Expr::Const(0.0),
        _ if b.is_const(1.0) => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(x) => Expr::Const(-x),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

pub(crate) fn pow(u: Expr, alpha: f64) -> Expr {
    if alpha == 0.0 {
        return Expr::Const(1.0);
    }
    if alpha == 1.0 {
        return u;
    }
    match u {
        Expr::Const(c) => fold(c.powf(alpha), || Expr::Pow(Box::new(Expr::Const(c)), alpha)),
        u => Expr::Pow(Box::new(u), alpha),
    }
}

pub(crate) fn differentiate(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var => Expr::Const(1.0),
        Expr::Add(a, b) => add(differentiate(a), differentiate(b)),
        Expr::Sub(a, b) => sub(differentiate(a), differentiate(b)),
        Expr::Mul(a, b) => add(
            mul(differentiate(a), (**b).clone()),
            mul((**a).clone(), differentiate(b)),
        ),
        Expr::Div(a, b) => {
            let da = differentiate(a);
            let db = differentiate(b);
            if db.is_const(0.0) {
                div(da, (**b).clone())
            } else {
                div(
                    sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    pow((**b).clone(), 2.0),
                )
            }
        }
        Expr::Pow(u, alpha) => mul(
            mul(Expr::Const(*alpha), pow((**u).clone(), alpha - 1.0)),
            differentiate(u),
        ),
        Expr::PowBase(c, u) => mul(mul(e.clone(), Expr::Const(c.ln())), differentiate(u)),
        Expr::Log(u) => div(differentiate(u), (**u).clone()),
        Expr::Exp(u) => mul(e.clone(), differentiate(u)),
        Expr::Neg(u) => neg(differentiate(u)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use Expr::*;

    fn d(s: &str) -> Expr {
        parse(s).unwrap().differentiate()
    }

    fn central_difference(e: &Expr, t: f64) -> f64 {
        let h = 1e-4 * t;
        (e.eval(t + h).unwrap() - e.eval(t - h).unwrap()) / (2.0 * h)
    }

    #[test]
    fn power_rule() {
        assert_eq!(
            Pow(Box::new(Var), 3.0).differentiate(),
            Mul(Box::new(Const(3.0)), Box::new(Pow(Box::new(Var), 2.0)))
        );
    }

    #[test]
    fn log_rule() {
        assert_eq!(d("log(t)"), Div(Box::new(Const(1.0)), Box::new(Var)));
    }

    #[test]
    fn log_over_t_matches_finite_differences() {
        let e = parse("log(t)/t").unwrap();
        let de = e.differentiate();
        for t in [3.0, 10.0, 100.0] {
            let expected = (1.0 - f64::ln(t)) / (t * t);
            let fd = central_difference(&e, t);
            assert!((fd - expected).abs() <= 1e-7 * expected.abs().max(1e-3));
            assert!((de.eval(t).unwrap() - expected).abs() <= 1e-14);
        }
    }

    #[test]
    fn simplification_is_light() {
        assert_eq!(d("5"), Const(0.0));
        assert_eq!(d("t"), Const(1.0));
        assert_eq!(d("3*t"), Const(3.0));
        assert_eq!(d("t + 7"), Const(1.0));
        assert_eq!(d("t^1"), Const(1.0));
    }

    #[test]
    fn exponential_rules() {
        let e = d("2^t");
        assert!((e.eval(10.0).unwrap() - 1024.0 * 2f64.ln()).abs() < 1e-9);
        let e = d("exp(2*t)");
        assert!((e.eval(1.5).unwrap() - 2.0 * 3f64.exp()).abs() < 1e-9);
    }
}
