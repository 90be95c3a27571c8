//! Expression trees for real functions of one positive variable.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ['^' number]
//! atom   := number | var | func '(' args ')' | '(' expr ')' | '-' factor
//! func   := exp | log | lgamma | polygamma | E1 | I1
//! ```
//!
//! Numbers are decimal literals with optional exponent. Unary minus binds
//! below `^`, so `-x^2` reads as `-(x^2)` and `(-x)^2` needs parentheses.
//! The variable name defaults to `x`; measure densities use `t`.
//!
//! Trees are immutable after construction and safe to evaluate from many
//! threads at once.

use crate::error::{Error, Result};
use crate::specials;
use num_complex::Complex64;
use std::fmt::Write as _;

/// Expression tree for a function of one variable.
#[derive(Debug, Clone, PartialEq)]
pub enum FuncExpr {
    Const(f64),
    Var,
    Add(Box<FuncExpr>, Box<FuncExpr>),
    Sub(Box<FuncExpr>, Box<FuncExpr>),
    Mul(Box<FuncExpr>, Box<FuncExpr>),
    Div(Box<FuncExpr>, Box<FuncExpr>),
    /// Power with a numeric-literal exponent.
    Pow(Box<FuncExpr>, f64),
    Neg(Box<FuncExpr>),
    Exp(Box<FuncExpr>),
    Log(Box<FuncExpr>),
    /// `log Γ`.
    LGamma(Box<FuncExpr>),
    /// `Ψ^(n)`; the order is a literal nonnegative integer, not an expression.
    Polygamma(u32, Box<FuncExpr>),
    /// Exponential integral `E1`.
    ExpIntE1(Box<FuncExpr>),
    /// Modified Bessel function `I1`.
    BesselI1(Box<FuncExpr>),
}

impl FuncExpr {
    pub fn constant(v: f64) -> Self {
        FuncExpr::Const(v)
    }

    pub fn var() -> Self {
        FuncExpr::Var
    }

    pub fn add(a: FuncExpr, b: FuncExpr) -> Self {
        FuncExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: FuncExpr, b: FuncExpr) -> Self {
        FuncExpr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: FuncExpr, b: FuncExpr) -> Self {
        FuncExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: FuncExpr, b: FuncExpr) -> Self {
        FuncExpr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(base: FuncExpr, exponent: f64) -> Self {
        FuncExpr::Pow(Box::new(base), exponent)
    }

    /// Negation; folds literal constants so printing round-trips.
    pub fn neg(e: FuncExpr) -> Self {
        match e {
            FuncExpr::Const(c) => FuncExpr::Const(-c),
            other => FuncExpr::Neg(Box::new(other)),
        }
    }

    pub fn exp(e: FuncExpr) -> Self {
        FuncExpr::Exp(Box::new(e))
    }

    pub fn log(e: FuncExpr) -> Self {
        FuncExpr::Log(Box::new(e))
    }

    pub fn lgamma(e: FuncExpr) -> Self {
        FuncExpr::LGamma(Box::new(e))
    }

    pub fn polygamma(order: u32, e: FuncExpr) -> Self {
        FuncExpr::Polygamma(order, Box::new(e))
    }

    pub fn exp_integral_e1(e: FuncExpr) -> Self {
        FuncExpr::ExpIntE1(Box::new(e))
    }

    pub fn bessel_i1(e: FuncExpr) -> Self {
        FuncExpr::BesselI1(Box::new(e))
    }

    /// Replace the variable by `sub` everywhere (composition `self ∘ sub`).
    pub fn substitute(&self, sub: &FuncExpr) -> FuncExpr {
        match self {
            FuncExpr::Const(c) => FuncExpr::Const(*c),
            FuncExpr::Var => sub.clone(),
            FuncExpr::Add(a, b) => FuncExpr::add(a.substitute(sub), b.substitute(sub)),
            FuncExpr::Sub(a, b) => FuncExpr::sub(a.substitute(sub), b.substitute(sub)),
            FuncExpr::Mul(a, b) => FuncExpr::mul(a.substitute(sub), b.substitute(sub)),
            FuncExpr::Div(a, b) => FuncExpr::div(a.substitute(sub), b.substitute(sub)),
            FuncExpr::Pow(a, e) => FuncExpr::pow(a.substitute(sub), *e),
            FuncExpr::Neg(a) => FuncExpr::Neg(Box::new(a.substitute(sub))),
            FuncExpr::Exp(a) => FuncExpr::exp(a.substitute(sub)),
            FuncExpr::Log(a) => FuncExpr::log(a.substitute(sub)),
            FuncExpr::LGamma(a) => FuncExpr::lgamma(a.substitute(sub)),
            FuncExpr::Polygamma(n, a) => FuncExpr::polygamma(*n, a.substitute(sub)),
            FuncExpr::ExpIntE1(a) => FuncExpr::exp_integral_e1(a.substitute(sub)),
            FuncExpr::BesselI1(a) => FuncExpr::bessel_i1(a.substitute(sub)),
        }
    }

    /// Evaluate at a real point.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = match self {
            FuncExpr::Const(c) => *c,
            FuncExpr::Var => x,
            FuncExpr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            // expm1 peepholes: 1 - e^u and e^u - 1 lose every significant
            // digit for |u| below ~1e-16, which breaks densities with
            // removable singularities like t^n/(1 - e^(-t)).
            FuncExpr::Sub(a, b) => match (a.as_ref(), b.as_ref()) {
                (FuncExpr::Const(c), FuncExpr::Exp(u)) if *c == 1.0 => {
                    -u.eval(x)?.exp_m1()
                }
                (FuncExpr::Exp(u), FuncExpr::Const(c)) if *c == 1.0 => {
                    u.eval(x)?.exp_m1()
                }
                _ => a.eval(x)? - b.eval(x)?,
            },
            FuncExpr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            FuncExpr::Div(a, b) => {
                let den = b.eval(x)?;
                if den == 0.0 {
                    return Err(Error::Domain(format!("division by zero at x = {x}")));
                }
                a.eval(x)? / den
            }
            FuncExpr::Pow(base, e) => real_pow(base.eval(x)?, *e)?,
            FuncExpr::Neg(a) => -a.eval(x)?,
            FuncExpr::Exp(a) => a.eval(x)?.exp(),
            FuncExpr::Log(a) => {
                let v = a.eval(x)?;
                if v <= 0.0 {
                    return Err(Error::Domain(format!(
                        "log of nonpositive value {v} at x = {x}"
                    )));
                }
                v.ln()
            }
            FuncExpr::LGamma(a) => specials::lgamma(a.eval(x)?)?,
            FuncExpr::Polygamma(n, a) => specials::polygamma(*n, a.eval(x)?)?,
            FuncExpr::ExpIntE1(a) => specials::exp_integral_e1(a.eval(x)?)?,
            FuncExpr::BesselI1(a) => specials::bessel_i1(a.eval(x)?)?,
        };
        if !v.is_finite() {
            return Err(Error::Overflow(format!(
                "non-finite value during evaluation at x = {x}"
            )));
        }
        Ok(v)
    }

    /// Evaluate at a complex point under principal branches.
    ///
    /// Only nodes with a well-defined principal-branch extension are allowed
    /// (constants, arithmetic, `pow`, `exp`, `log`); `lgamma`, `polygamma`,
    /// `E1` and `I1` are rejected.
    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        let v = match self {
            FuncExpr::Const(c) => Complex64::new(*c, 0.0),
            FuncExpr::Var => z,
            FuncExpr::Add(a, b) => a.eval_complex(z)? + b.eval_complex(z)?,
            FuncExpr::Sub(a, b) => a.eval_complex(z)? - b.eval_complex(z)?,
            FuncExpr::Mul(a, b) => a.eval_complex(z)? * b.eval_complex(z)?,
            FuncExpr::Div(a, b) => {
                let den = b.eval_complex(z)?;
                if den.norm_sqr() == 0.0 {
                    return Err(Error::Domain("complex division by zero".into()));
                }
                a.eval_complex(z)? / den
            }
            FuncExpr::Pow(base, e) => {
                let b = base.eval_complex(z)?;
                complex_pow(b, *e)?
            }
            FuncExpr::Neg(a) => -a.eval_complex(z)?,
            FuncExpr::Exp(a) => a.eval_complex(z)?.exp(),
            FuncExpr::Log(a) => {
                let v = a.eval_complex(z)?;
                principal_log(v)?
            }
            FuncExpr::LGamma(_)
            | FuncExpr::Polygamma(_, _)
            | FuncExpr::ExpIntE1(_)
            | FuncExpr::BesselI1(_) => {
                return Err(Error::UnsupportedNode(format!(
                    "{} has no complex evaluation path",
                    self.node_name()
                )))
            }
        };
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Overflow(
                "non-finite value during complex evaluation".into(),
            ));
        }
        Ok(v)
    }

    fn node_name(&self) -> &'static str {
        match self {
            FuncExpr::Const(_) => "constant",
            FuncExpr::Var => "variable",
            FuncExpr::Add(_, _) => "add",
            FuncExpr::Sub(_, _) => "sub",
            FuncExpr::Mul(_, _) => "mul",
            FuncExpr::Div(_, _) => "div",
            FuncExpr::Pow(_, _) => "pow",
            FuncExpr::Neg(_) => "neg",
            FuncExpr::Exp(_) => "exp",
            FuncExpr::Log(_) => "log",
            FuncExpr::LGamma(_) => "lgamma",
            FuncExpr::Polygamma(_, _) => "polygamma",
            FuncExpr::ExpIntE1(_) => "E1",
            FuncExpr::BesselI1(_) => "I1",
        }
    }

    /// Render with variable name `x`; `parse(print(e))` is structurally `e`.
    pub fn print(&self) -> String {
        self.print_with_var("x")
    }

    /// Render with an explicit variable name.
    pub fn print_with_var(&self, var: &str) -> String {
        let mut out = String::new();
        self.write_prec(&mut out, var, 0);
        out
    }

    // Precedence: 1 additive, 2 multiplicative, 3 unary minus, 4 power base.
    fn write_prec(&self, out: &mut String, var: &str, min_prec: u8) {
        let prec = match self {
            FuncExpr::Add(_, _) | FuncExpr::Sub(_, _) => 1,
            FuncExpr::Mul(_, _) | FuncExpr::Div(_, _) => 2,
            FuncExpr::Neg(_) => 3,
            FuncExpr::Pow(_, _) => 3,
            FuncExpr::Const(c) if *c < 0.0 => 3,
            _ => 4,
        };
        let paren = prec < min_prec;
        if paren {
            out.push('(');
        }
        match self {
            FuncExpr::Const(c) => {
                let _ = write!(out, "{c}");
            }
            FuncExpr::Var => out.push_str(var),
            FuncExpr::Add(a, b) => {
                a.write_prec(out, var, 1);
                out.push('+');
                b.write_prec(out, var, 2);
            }
            FuncExpr::Sub(a, b) => {
                a.write_prec(out, var, 1);
                out.push('-');
                b.write_prec(out, var, 2);
            }
            FuncExpr::Mul(a, b) => {
                a.write_prec(out, var, 2);
                out.push('*');
                b.write_prec(out, var, 3);
            }
            FuncExpr::Div(a, b) => {
                a.write_prec(out, var, 2);
                out.push('/');
                b.write_prec(out, var, 3);
            }
            FuncExpr::Pow(base, e) => {
                base.write_prec(out, var, 4);
                let _ = write!(out, "^{e}");
            }
            FuncExpr::Neg(a) => {
                out.push('-');
                a.write_prec(out, var, 3);
            }
            FuncExpr::Exp(a) => write_call(out, var, "exp", a),
            FuncExpr::Log(a) => write_call(out, var, "log", a),
            FuncExpr::LGamma(a) => write_call(out, var, "lgamma", a),
            FuncExpr::Polygamma(n, a) => {
                let _ = write!(out, "polygamma({n},");
                a.write_prec(out, var, 0);
                out.push(')');
            }
            FuncExpr::ExpIntE1(a) => write_call(out, var, "E1", a),
            FuncExpr::BesselI1(a) => write_call(out, var, "I1", a),
        }
        if paren {
            out.push(')');
        }
    }
}

fn write_call(out: &mut String, var: &str, name: &str, arg: &FuncExpr) {
    out.push_str(name);
    out.push('(');
    arg.write_prec(out, var, 0);
    out.push(')');
}

pub(crate) fn real_pow(base: f64, e: f64) -> Result<f64> {
    let v = if e == e.round() && e.abs() < 2147483647.0 {
        if base == 0.0 && e < 0.0 {
            return Err(Error::Domain("zero base with negative exponent".into()));
        }
        base.powi(e as i32)
    } else {
        if base < 0.0 {
            return Err(Error::Domain(format!(
                "negative base {base} with non-integer exponent {e}"
            )));
        }
        if base == 0.0 && e < 0.0 {
            return Err(Error::Domain("zero base with negative exponent".into()));
        }
        base.powf(e)
    };
    if !v.is_finite() {
        return Err(Error::Overflow(format!("{base}^{e}")));
    }
    Ok(v)
}

fn principal_log(v: Complex64) -> Result<Complex64> {
    if v.im == 0.0 && v.re <= 0.0 {
        return Err(Error::BranchCut(format!(
            "log of {v} on the nonpositive real axis"
        )));
    }
    Ok(v.ln())
}

fn complex_pow(b: Complex64, e: f64) -> Result<Complex64> {
    if e == e.round() && e.abs() < 1e9 {
        if b.norm_sqr() == 0.0 && e < 0.0 {
            return Err(Error::Domain("zero base with negative exponent".into()));
        }
        if b.norm_sqr() == 0.0 {
            return Ok(if e == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            });
        }
        Ok(b.powi(e as i32))
    } else {
        let l = principal_log(b)?;
        Ok((l * e).exp())
    }
}

/// Parse an expression in the variable `x`.
pub fn parse(text: &str) -> Result<FuncExpr> {
    parse_with_var(text, "x")
}

/// Parse an expression in a named variable (measure densities use `t`).
pub fn parse_with_var(text: &str, var: &str) -> Result<FuncExpr> {
    if text.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty input".into(),
        });
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        var,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Syntax {
            offset: p.pos,
            message: format!("unexpected trailing input '{}'", p.rest()),
        });
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    var: &'a str,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &str {
        std::str::from_utf8(&self.src[self.pos.min(self.src.len())..]).unwrap_or("")
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: self.pos,
                message: format!("expected '{}'", c as char),
            })
        }
    }

    fn expr(&mut self) -> Result<FuncExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = FuncExpr::add(acc, self.term()?);
            } else if self.eat(b'-') {
                acc = FuncExpr::sub(acc, self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<FuncExpr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = FuncExpr::mul(acc, self.factor()?);
            } else if self.eat(b'/') {
                acc = FuncExpr::div(acc, self.factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<FuncExpr> {
        let atom = self.atom()?;
        if self.eat(b'^') {
            let e = self.signed_number()?;
            Ok(FuncExpr::pow(atom, e))
        } else {
            Ok(atom)
        }
    }

    fn atom(&mut self) -> Result<FuncExpr> {
        match self.peek() {
            None => Err(Error::Syntax {
                offset: self.pos,
                message: "unexpected end of input".into(),
            }),
            Some(b'-') => {
                self.pos += 1;
                self.skip_ws();
                Ok(FuncExpr::neg(self.factor()?))
            }
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                self.skip_ws();
                Ok(FuncExpr::Const(v))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(Error::Syntax {
                offset: self.pos,
                message: format!("unexpected character '{}'", c as char),
            }),
        }
    }

    fn identifier(&mut self) -> Result<FuncExpr> {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_ascii_alphanumeric() || c == b'_')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        self.skip_ws();
        if name == self.var {
            return Ok(FuncExpr::Var);
        }
        match name {
            "exp" | "log" | "lgamma" | "E1" | "I1" => {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(match name {
                    "exp" => FuncExpr::exp(arg),
                    "log" => FuncExpr::log(arg),
                    "lgamma" => FuncExpr::lgamma(arg),
                    "E1" => FuncExpr::exp_integral_e1(arg),
                    _ => FuncExpr::bessel_i1(arg),
                })
            }
            "polygamma" => {
                self.expect(b'(')?;
                let order = self.integer_literal()?;
                self.expect(b',')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(FuncExpr::polygamma(order, arg))
            }
            _ => Err(Error::UnknownIdentifier {
                offset: start,
                name: name.to_string(),
            }),
        }
    }

    /// Digits only: the polygamma order must be a literal nonnegative integer.
    fn integer_literal(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::Syntax {
                offset: start,
                message: "polygamma order must be a literal nonnegative integer".into(),
            });
        }
        // Reject forms like 2.0 or 1e1 in the order position.
        if matches!(self.peek(), Some(b'.') | Some(b'e') | Some(b'E')) {
            return Err(Error::Syntax {
                offset: self.pos,
                message: "polygamma order must be a literal nonnegative integer".into(),
            });
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        self.skip_ws();
        s.parse::<u32>().map_err(|_| Error::Syntax {
            offset: start,
            message: "polygamma order out of range".into(),
        })
    }

    fn signed_number(&mut self) -> Result<f64> {
        let neg = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let v = self.number()?;
        self.skip_ws();
        Ok(if neg { -v } else { v })
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let mut seen_digit = false;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
            seen_digit = true;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                self.pos += 1;
                seen_digit = true;
            }
        }
        if !seen_digit {
            return Err(Error::Syntax {
                offset: start,
                message: "expected a number".into(),
            });
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            let mut exp_digits = false;
            while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                self.pos += 1;
                exp_digits = true;
            }
            if !exp_digits {
                // Not an exponent after all (e.g. "2*exp(x)" mid-token is
                // impossible here, but be strict anyway).
                self.pos = mark;
            }
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        s.parse::<f64>().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("invalid number '{s}'"),
        })
    }
}
