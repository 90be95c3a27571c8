//! Truncated power-series (Taylor-mode) propagation of derivatives through
//! expression trees.
//!
//! [`Jet`] stores *raw derivatives* `coeffs[k] = f^(k)(x0)` — not Taylor
//! coefficients `f^(k)/k!` — because sign patterns of derivatives are what
//! the CM definition inspects and raw values make reports readable.
//! Internally propagation runs on normalized Taylor coefficients and converts
//! at the boundary. Any non-finite intermediate aborts with an overflow
//! error; in double precision orders beyond K ≈ 30 routinely overflow for
//! expressions with singular behaviour near 0.

use crate::error::{Error, Result};
use crate::expr::FuncExpr;
use crate::specials;

/// Truncated sequence of derivatives of a function at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    base_point: f64,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn base_point(&self) -> f64 {
        self.base_point
    }

    /// `coeffs()[k]` is the k-th derivative at the base point.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// k-th derivative, panicking if `k` exceeds the stored order.
    pub fn derivative(&self, k: usize) -> f64 {
        self.coeffs[k]
    }
}

/// Evaluate the jet of `f` at `x0 > 0` up to derivative order `order`.
pub fn jet_eval(f: &FuncExpr, x0: f64, order: usize) -> Result<Jet> {
    if !(x0 > 0.0) {
        return Err(Error::Domain(format!(
            "jet base point must be positive, got {x0}"
        )));
    }
    let len = order + 1;
    let s = eval_series(f, x0, len)?;
    let mut coeffs = Vec::with_capacity(len);
    let mut kfact = 1.0;
    for (k, c) in s.c.iter().enumerate() {
        if k > 0 {
            kfact *= k as f64;
        }
        let d = c * kfact;
        if !d.is_finite() {
            return Err(Error::Overflow(format!(
                "derivative order {k} overflowed at x0 = {x0}"
            )));
        }
        coeffs.push(d);
    }
    Ok(Jet {
        base_point: x0,
        coeffs,
    })
}

/// Truncated power series in normalized (Taylor) coefficients.
#[derive(Debug, Clone)]
pub(crate) struct Series {
    pub c: Vec<f64>,
}

impl Series {
    pub fn constant(v: f64, len: usize) -> Series {
        let mut c = vec![0.0; len];
        c[0] = v;
        Series { c }
    }

    pub fn variable(x0: f64, len: usize) -> Series {
        let mut c = vec![0.0; len];
        c[0] = x0;
        if len > 1 {
            c[1] = 1.0;
        }
        Series { c }
    }

    fn len(&self) -> usize {
        self.c.len()
    }

    fn check_finite(self, what: &str) -> Result<Series> {
        if self.c.iter().all(|v| v.is_finite()) {
            Ok(self)
        } else {
            Err(Error::Overflow(format!("series overflow in {what}")))
        }
    }

    pub fn add(&self, o: &Series) -> Series {
        Series {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Series) -> Series {
        Series {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Series {
        Series {
            c: self.c.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, o: &Series) -> Series {
        let n = self.len();
        let mut c = vec![0.0; n];
        for i in 0..n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Series { c }
    }

    pub fn div(&self, o: &Series) -> Result<Series> {
        if o.c[0] == 0.0 {
            return Err(Error::Domain(
                "division by a series with zero value coefficient (pole)".into(),
            ));
        }
        let n = self.len();
        let mut c = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= o.c[j] * c[k - j];
            }
            c[k] = acc / o.c[0];
        }
        Series { c }.check_finite("div")
    }

    pub fn exp(&self) -> Result<Series> {
        let n = self.len();
        let mut c = vec![0.0; n];
        c[0] = self.c[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * c[k - j];
            }
            c[k] = acc / k as f64;
        }
        Series { c }.check_finite("exp")
    }

    pub fn log(&self) -> Result<Series> {
        if self.c[0] <= 0.0 {
            return Err(Error::Domain(format!(
                "log of nonpositive series value {}",
                self.c[0]
            )));
        }
        let n = self.len();
        let mut c = vec![0.0; n];
        c[0] = self.c[0].ln();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..k {
                acc += j as f64 * c[j] * self.c[k - j];
            }
            c[k] = (self.c[k] - acc / k as f64) / self.c[0];
        }
        Series { c }.check_finite("log")
    }

    /// Integer power by binary exponentiation (valid for any value
    /// coefficient; negative exponents go through `div`).
    pub fn powi(&self, e: i64, len: usize) -> Result<Series> {
        if e == 0 {
            return Ok(Series::constant(1.0, len));
        }
        if e < 0 {
            let pos = self.powi(-e, len)?;
            return Series::constant(1.0, len).div(&pos);
        }
        let mut result = Series::constant(1.0, len);
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result.check_finite("powi")
    }

    /// Real power; requires a positive value coefficient.
    pub fn powf(&self, a: f64) -> Result<Series> {
        if self.c[0] <= 0.0 {
            return Err(Error::Domain(format!(
                "base {} must be positive for non-integer exponent {a}",
                self.c[0]
            )));
        }
        let n = self.len();
        let mut c = vec![0.0; n];
        c[0] = self.c[0].powf(a);
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (a * j as f64 - (k - j) as f64) * self.c[j] * c[k - j];
            }
            c[k] = acc / (k as f64 * self.c[0]);
        }
        Series { c }.check_finite("powf")
    }

    /// Compose an outer function given by its raw derivatives at
    /// `self.c[0]` with this inner series: Horner on `Σ d_m/m! (u - u0)^m`.
    pub fn compose_outer(&self, derivs: &[f64]) -> Result<Series> {
        let n = self.len();
        debug_assert_eq!(derivs.len(), n);
        let mut v = self.clone();
        v.c[0] = 0.0;
        let mut fact = vec![1.0; n];
        for m in 1..n {
            fact[m] = fact[m - 1] * m as f64;
        }
        let mut result = Series::constant(derivs[n - 1] / fact[n - 1], n);
        for m in (0..n - 1).rev() {
            result = result.mul(&v);
            result.c[0] += derivs[m] / fact[m];
        }
        result.check_finite("compose")
    }
}

fn eval_series(f: &FuncExpr, x0: f64, len: usize) -> Result<Series> {
    match f {
        FuncExpr::Const(c) => {
            if !c.is_finite() {
                return Err(Error::Overflow("non-finite constant".into()));
            }
            Ok(Series::constant(*c, len))
        }
        FuncExpr::Var => Ok(Series::variable(x0, len)),
        FuncExpr::Add(a, b) => Ok(eval_series(a, x0, len)?.add(&eval_series(b, x0, len)?)),
        FuncExpr::Sub(a, b) => Ok(eval_series(a, x0, len)?.sub(&eval_series(b, x0, len)?)),
        FuncExpr::Mul(a, b) => eval_series(a, x0, len)?
            .mul(&eval_series(b, x0, len)?)
            .check_finite("mul"),
        FuncExpr::Div(a, b) => eval_series(a, x0, len)?.div(&eval_series(b, x0, len)?),
        FuncExpr::Pow(base, e) => {
            let b = eval_series(base, x0, len)?;
            if *e == e.round() && e.abs() < 1e15 {
                b.powi(*e as i64, len)
            } else {
                b.powf(*e)
            }
        }
        FuncExpr::Neg(a) => Ok(eval_series(a, x0, len)?.neg()),
        FuncExpr::Exp(a) => eval_series(a, x0, len)?.exp(),
        FuncExpr::Log(a) => eval_series(a, x0, len)?.log(),
        FuncExpr::LGamma(a) => {
            let u = eval_series(a, x0, len)?;
            let u0 = u.c[0];
            let mut derivs = Vec::with_capacity(len);
            derivs.push(specials::lgamma(u0)?);
            for m in 1..len {
                derivs.push(specials::polygamma(m as u32 - 1, u0)?);
            }
            u.compose_outer(&derivs)
        }
        FuncExpr::Polygamma(n, a) => {
            let u = eval_series(a, x0, len)?;
            let u0 = u.c[0];
            let mut derivs = Vec::with_capacity(len);
            for m in 0..len {
                derivs.push(specials::polygamma(n + m as u32, u0)?);
            }
            u.compose_outer(&derivs)
        }
        FuncExpr::ExpIntE1(a) => {
            let u = eval_series(a, x0, len)?;
            let u0 = u.c[0];
            if !(u0 > 0.0) {
                return Err(Error::Domain(format!("E1 requires argument > 0, got {u0}")));
            }
            // E1'(t) = -e^(-t)/t; higher derivatives come from the series of
            // that expression at u0.
            let mut derivs = Vec::with_capacity(len);
            derivs.push(specials::exp_integral_e1(u0)?);
            if len > 1 {
                let v = Series::variable(u0, len - 1);
                let inner = v.neg().exp()?.div(&v)?.neg();
                let mut fact = 1.0;
                for (m, c) in inner.c.iter().enumerate() {
                    if m > 0 {
                        fact *= m as f64;
                    }
                    derivs.push(c * fact);
                }
            }
            u.compose_outer(&derivs)
        }
        FuncExpr::BesselI1(a) => {
            let u = eval_series(a, x0, len)?;
            let u0 = u.c[0];
            if !(u0 >= 0.0) {
                return Err(Error::Domain(format!(
                    "I1 requires argument >= 0, got {u0}"
                )));
            }
            // I_n' = (I_(n-1) + I_(n+1))/2 with I_(-n) = I_n: the m-th
            // derivative of I1 is a fixed combination of I_0..I_(m+1).
            let mut bessel = Vec::with_capacity(len + 1);
            for n in 0..=len {
                bessel.push(specials::bessel_i_n(n as u32, u0)?);
            }
            let mut combo = vec![0.0f64; len + 2];
            combo[1] = 1.0;
            let mut derivs = Vec::with_capacity(len);
            for m in 0..len {
                if m > 0 {
                    let mut next = vec![0.0f64; len + 2];
                    for (n, w) in combo.iter().enumerate() {
                        if *w == 0.0 {
                            continue;
                        }
                        if n == 0 {
                            next[1] += *w;
                        } else {
                            next[n - 1] += 0.5 * *w;
                            if n + 1 < next.len() {
                                next[n + 1] += 0.5 * *w;
                            }
                        }
                    }
                    combo = next;
                }
                let d: f64 = combo
                    .iter()
                    .enumerate()
                    .map(|(n, w)| w * bessel.get(n).copied().unwrap_or(0.0))
                    .sum();
                derivs.push(d);
            }
            u.compose_outer(&derivs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn jet_of_exp_neg_x() {
        let f = parse("exp(-x)").unwrap();
        let j = jet_eval(&f, 1.0, 4).unwrap();
        let e = (-1.0f64).exp();
        for k in 0..=4 {
            let want = if k % 2 == 0 { e } else { -e };
            assert!((j.derivative(k) - want).abs() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn jet_of_reciprocal() {
        // (1/x)^(k) = (-1)^k k! / x^(k+1)
        let f = parse("1/x").unwrap();
        let j = jet_eval(&f, 2.0, 3).unwrap();
        let want = [0.5, -0.25, 0.25, -0.375];
        for (k, w) in want.iter().enumerate() {
            assert!((j.derivative(k) - w).abs() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn jet_of_lgamma_first_derivative_is_digamma() {
        // Oracle: Ψ(1) = lim (ln n - Σ 1/k) with Euler–Maclaurin tail.
        let n = 1_000_000u64;
        let mut h = 0.0;
        for k in (1..=n).rev() {
            h += 1.0 / k as f64;
        }
        let nf = n as f64;
        let oracle = nf.ln() - h + 0.5 / nf - 1.0 / (12.0 * nf * nf);

        let f = parse("lgamma(x)").unwrap();
        let j = jet_eval(&f, 1.0, 1).unwrap();
        assert!((j.derivative(1) - oracle).abs() < 1e-10);
        assert!((j.derivative(1) + 0.5772156649).abs() < 1e-9);
    }

    #[test]
    fn truncation_consistency() {
        let f = parse("exp(1/x)*log(1+x)").unwrap();
        let hi = jet_eval(&f, 0.7, 8).unwrap();
        let lo = jet_eval(&f, 0.7, 7).unwrap();
        for k in 0..=7 {
            assert_eq!(hi.derivative(k), lo.derivative(k), "k={k}");
        }
    }

    #[test]
    fn linearity() {
        let f = parse("exp(-x)").unwrap();
        let g = parse("1/(1+x)").unwrap();
        let combo = parse("2.5*exp(-x)+0.5/(1+x)").unwrap();
        let jf = jet_eval(&f, 1.3, 6).unwrap();
        let jg = jet_eval(&g, 1.3, 6).unwrap();
        let jc = jet_eval(&combo, 1.3, 6).unwrap();
        for k in 0..=6 {
            let want = 2.5 * jf.derivative(k) + 0.5 * jg.derivative(k);
            assert!(
                (jc.derivative(k) - want).abs() <= 1e-12 * want.abs().max(1.0),
                "k={k}"
            );
        }
    }

    #[test]
    fn first_derivative_matches_central_difference() {
        let corpus = [
            "exp(-x)",
            "1/(2*x+3)^1.5",
            "log(1+1/x)",
            "exp(1/x)",
            "log(1+x)/x",
            "lgamma(x+1)",
            "polygamma(1,x)",
            "E1(x)",
            "I1(x)",
        ];
        let h = 1e-5;
        for src in corpus {
            let f = parse(src).unwrap();
            for &x in &[0.8, 1.7, 3.1] {
                let j = jet_eval(&f, x, 1).unwrap();
                let num = (f.eval(x + h).unwrap() - f.eval(x - h).unwrap()) / (2.0 * h);
                let d = j.derivative(1);
                assert!(
                    (d - num).abs() <= 1e-6 * d.abs().max(1.0),
                    "{src} at {x}: jet {d} vs fd {num}"
                );
            }
        }
    }

    #[test]
    fn e1_jet_against_closed_derivatives() {
        // E1'(t) = -e^(-t)/t, E1''(t) = e^(-t)(1/t + 1/t^2)
        let f = parse("E1(x)").unwrap();
        let x = 1.5f64;
        let j = jet_eval(&f, x, 2).unwrap();
        let d1 = -(-x).exp() / x;
        let d2 = (-x).exp() * (1.0 / x + 1.0 / (x * x));
        assert!((j.derivative(1) - d1).abs() < 1e-14);
        assert!((j.derivative(2) - d2).abs() < 1e-14);
    }

    #[test]
    fn i1_jet_against_recurrence() {
        // I1'(z) = (I0(z) + I2(z))/2
        let f = parse("I1(x)").unwrap();
        let z = 2.3f64;
        let j = jet_eval(&f, z, 1).unwrap();
        let want = 0.5
            * (specials::bessel_i_n(0, z).unwrap() + specials::bessel_i_n(2, z).unwrap());
        assert!((j.derivative(1) - want).abs() < 1e-13);
    }

    #[test]
    fn pole_is_a_domain_error() {
        let f = parse("1/(x-1)").unwrap();
        assert!(matches!(jet_eval(&f, 1.0, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn log_domain_violation_propagates() {
        let f = parse("log(x-5)").unwrap();
        assert!(matches!(jet_eval(&f, 1.0, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn high_order_jets_at_the_practical_ceiling() {
        // K = 30 works for well-scaled expressions...
        let f = parse("exp(-x)").unwrap();
        let j = jet_eval(&f, 1.0, 30).unwrap();
        let e = (-1.0f64).exp();
        assert!((j.derivative(30) - e).abs() < 1e-11 * e);
        // ...and 1/x at a small base point stays finite (k!/x^(k+1)).
        let f = parse("1/x").unwrap();
        let j = jet_eval(&f, 0.05, 30).unwrap();
        assert!(j.derivative(30).is_finite());
    }

    #[test]
    fn overflow_is_an_error_not_an_infinity() {
        // exp(1/x) derivatives blow past f64 range at x = 0.002, K = 30:
        // the value e^500 ≈ 7e217 is still representable, but the
        // propagation to order 30 is not.
        let f = parse("exp(1/x)").unwrap();
        match jet_eval(&f, 0.002, 30) {
            Err(Error::Overflow(_)) => {}
            other => panic!("expected overflow error, got {other:?}"),
        }
    }

    #[test]
    fn deep_composition_matches_closed_form() {
        // f = exp(lgamma(x)) = Γ(x); Γ'(x) = Γ(x)Ψ(x), Γ'' = Γ(Ψ² + Ψ')
        let f = parse("exp(lgamma(x))").unwrap();
        let x = 2.7f64;
        let j = jet_eval(&f, x, 2).unwrap();
        let g = specials::gamma(x).unwrap();
        let p0 = specials::polygamma(0, x).unwrap();
        let p1 = specials::polygamma(1, x).unwrap();
        assert!((j.derivative(0) - g).abs() < 1e-12 * g);
        assert!((j.derivative(1) - g * p0).abs() < 1e-12 * (g * p0).abs().max(1.0));
        let d2 = g * (p0 * p0 + p1);
        assert!((j.derivative(2) - d2).abs() < 1e-12 * d2.abs().max(1.0));
    }
}
