//! Oracles shared by the integration tests. Nothing here calls into the
//! sieve, the quadrature or the differentiator.

#![allow(dead_code)]

use apsums::Expr;
use rand::Rng;

/// Primes up to `n` by trial division.
pub fn trial_division_primes(n: u64) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::new();
    for m in 2..=n {
        if primes
            .iter()
            .take_while(|&&p| p * p <= m)
            .all(|&p| m % p != 0)
        {
            primes.push(m);
        }
    }
    primes
}

/// Ridders' extrapolation of central differences, starting from
/// `h = 1e-3 · t` and shrinking by 1.4 per level.
pub fn central_difference(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    const LEVELS: usize = 12;
    const SHRINK: f64 = 1.4;
    let d = |h: f64| (f(t + h) - f(t - h)) / (2.0 * h);
    let mut h = 1e-3 * t;
    let mut table = vec![vec![0.0; LEVELS]; LEVELS];
    table[0][0] = d(h);
    let (mut best, mut best_err) = (table[0][0], f64::INFINITY);
    for i in 1..LEVELS {
        h /= SHRINK;
        table[0][i] = d(h);
        let mut fac = SHRINK * SHRINK;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= SHRINK * SHRINK;
            let err = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if err <= best_err {
                best_err = err;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * best_err {
            break;
        }
    }
    best
}

/// Composite midpoint rule in `u = log t`.
pub fn midpoint_log(g: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (ua, ub) = (a.ln(), b.ln());
    let h = (ub - ua) / panels as f64;
    (0..panels)
        .map(|i| {
            let t = (ua + (i as f64 + 0.5) * h).exp();
            g(t) * t
        })
        .sum::<f64>()
        * h
}

const EXPONENTS: [f64; 8] = [-2.0, -1.0, -0.5, 0.5, 1.5, 2.0, 3.0, 0.25];

fn constant<R: Rng>(rng: &mut R) -> f64 {
    (rng.gen_range(0.5..4.0_f64) * 4.0).round() / 4.0
}

/// A random expression over `t`; mostly positive on `t ≥ 2`, but callers must
/// still filter out draws that fail to evaluate.
pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return if rng.gen_bool(0.7) {
            Expr::Var
        } else {
            Expr::Const(constant(rng))
        };
    }
    let sub = |rng: &mut R| Box::new(random_expr(rng, depth - 1));
    match rng.gen_range(0..8) {
        0 => Expr::Add(sub(rng), sub(rng)),
        1 => Expr::Mul(sub(rng), sub(rng)),
        2 => Expr::Div(sub(rng), sub(rng)),
        3 => Expr::Pow(sub(rng), EXPONENTS[rng.gen_range(0..EXPONENTS.len())]),
        // log(u + c) with c > 1 stays positive
        4 => Expr::Log(Box::new(Expr::Add(
            sub(rng),
            Box::new(Expr::Const(1.0 + constant(rng))),
        ))),
        5 => Expr::Exp(Box::new(Expr::Div(
            Box::new(Expr::Const(constant(rng))),
            sub(rng),
        ))),
        6 => Expr::PowBase(
            1.0 + constant(rng),
            Box::new(Expr::Div(Box::new(Expr::Const(1.0)), sub(rng))),
        ),
        _ => Expr::Sub(
            Box::new(Expr::Mul(Box::new(Expr::Const(3.0)), sub(rng))),
            sub(rng),
        ),
    }
}

/// Largest `|value|` over all subexpressions at `t`; the scale of the
/// rounding error in evaluating `e`.
fn rounding_scale(e: &Expr, t: f64) -> f64 {
    let own = e.eval(t).map_or(f64::INFINITY, f64::abs);
    let children = match e {
        Expr::Const(_) | Expr::Var => 0.0,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            rounding_scale(a, t).max(rounding_scale(b, t))
        }
        Expr::Pow(u, _) | Expr::PowBase(_, u) | Expr::Log(u) | Expr::Exp(u) | Expr::Neg(u) => {
            rounding_scale(u, t)
        }
    };
    own.max(children)
}

/// Draws expressions until one evaluates, together with its derivative, to
/// finite values at every point with `|t f'(t)| ≥ 1e-4 · S` where `S` is the
/// largest intermediate magnitude. Flatter functions lose the derivative to
/// rounding in a finite difference with `h = 1e-3 t`.
pub fn well_conditioned_expr<R: Rng>(rng: &mut R, points: &[f64]) -> Expr {
    loop {
        let e = random_expr(rng, 3);
        let d = e.differentiate();
        let ok = points.iter().all(|&t| match (e.eval(t), d.eval(t)) {
            (Ok(v), Ok(dv)) => {
                let scale = rounding_scale(&e, t);
                v.abs() < 1e250 && scale < 1e250 && (t * dv).abs() >= 1e-4 * scale
            }
            _ => false,
        });
        if ok {
            return e;
        }
    }
}
