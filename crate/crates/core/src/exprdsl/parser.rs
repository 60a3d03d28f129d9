//! Recursive-descent parser for the weight-function grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' signed-number)?
//! base   := number | 't' | 'log' '(' expr ')' | 'exp' '(' expr ')'
//!         | number '^' 't' | number '^' '(' expr ')' | '(' expr ')' | '-' factor
//! ```
//!
//! `ln` is accepted as a synonym for `log`. The exponent after `^` may also be
//! a parenthesised signed number, as in `t^(-1)`.

use super::Expr;
use crate::error::ParseError;

const BASE_START: &[&str] = &["number", "'t'", "'log'", "'exp'", "'('", "'-'"];

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if let Some(pos) = text.bytes().position(|b| !b.is_ascii()) {
        return Err(ParseError {
            offset: pos,
            expected: vec!["ASCII input".into()],
        });
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(&["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            offset: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, what: &str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.eat(b'^') {
            let exponent = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), exponent));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<f64, ParseError> {
        if self.eat(b'(') {
            let v = self.signed_number()?;
            self.expect(b')', "')'")?;
            Ok(v)
        } else {
            self.signed_number()
        }
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let negative = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        match self.number()? {
            Some(v) => Ok(if negative { -v } else { v }),
            None => Err(self.error(&["number"])),
        }
    }

    /// Lexes an unsigned decimal literal with optional fraction and exponent.
    fn number(&mut self) -> Result<Option<f64>, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let digits = |s: &[u8], mut i: usize| {
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
            i
        };
        let mut end = digits(self.src, start);
        let int_digits = end - start;
        let mut frac_digits = 0;
        if end < self.src.len() && self.src[end] == b'.' {
            let after = digits(self.src, end + 1);
            frac_digits = after - end - 1;
            end = after;
        }
        if int_digits == 0 && frac_digits == 0 {
            return Ok(None);
        }
        if end < self.src.len() && matches!(self.src[end], b'e' | b'E') {
            let mut j = end + 1;
            if j < self.src.len() && matches!(self.src[j], b'+' | b'-') {
                j += 1;
            }
            if j < self.src.len() && self.src[j].is_ascii_digit() {
                end = digits(self.src, j);
            }
        }
        // The slice is ASCII digits, '.', 'e' and signs only.
        let text = std::str::from_utf8(&self.src[start..end]).expect("ascii");
        let value: f64 = text.parse().map_err(|_| self.error(&["number"]))?;
        if !value.is_finite() {
            return Err(self.error(&["finite number"]));
        }
        self.pos = end;
        Ok(Some(value))
    }

    fn ident(&mut self) -> Option<&str> {
        self.skip_ws();
        let start = self.pos;
        let mut end = start;
        while end < self.src.len() && self.src[end].is_ascii_alphabetic() {
            end += 1;
        }
        (end > start).then(|| std::str::from_utf8(&self.src[start..end]).expect("ascii"))
    }

    fn call_arg(&mut self) -> Result<Expr, ParseError> {
        self.expect(b'(', "'('")?;
        let e = self.expr()?;
        self.expect(b')', "')'")?;
        Ok(e)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.error(BASE_START)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?.ok_or_else(|| self.error(&["number"]))?;
                // `c^t` and `c^(expr)` build an exponential in t; numeric
                // exponents are left for `factor`.
                let save = self.pos;
                if self.eat(b'^') {
                    match self.peek() {
                        Some(b'(') if !self.paren_holds_number() => {
                            let u = self.call_arg()?;
                            return Ok(Expr::PowBase(v, Box::new(u)));
                        }
                        Some(b't') if self.ident() == Some("t") => {
                            self.pos += 1;
                            return Ok(Expr::PowBase(v, Box::new(Expr::Var)));
                        }
                        _ => {}
                    }
                }
                self.pos = save;
                Ok(Expr::Const(v))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident().map(str::to_owned);
                match name.as_deref() {
                    Some("t") => {
                        self.pos += 1;
                        Ok(Expr::Var)
                    }
                    Some(name @ ("log" | "ln" | "exp")) => {
                        self.pos += name.len();
                        let arg = Box::new(self.call_arg()?);
                        Ok(if name == "exp" {
                            Expr::Exp(arg)
                        } else {
                            Expr::Log(arg)
                        })
                    }
                    _ => {
                        self.pos = start;
                        Err(self.error(BASE_START))
                    }
                }
            }
            Some(_) => Err(self.error(BASE_START)),
        }
    }

    /// Looks ahead from a `(` to see whether it wraps a lone signed number.
    fn paren_holds_number(&mut self) -> bool {
        let save = self.pos;
        self.pos += 1;
        let ok = self.signed_number().is_ok() && self.eat(b')');
        self.pos = save;
        ok
    }
}
