//! Laplace transforms of measures by adaptive quadrature, the catalog of
//! explicit transform pairs, and exponential-mixture probability densities.

use crate::error::{Error, Result};
use crate::expr::FuncExpr;
use crate::measure::{Density, Measure};
use crate::quad;
use crate::specials;
use std::collections::BTreeMap;

/// `L(dμ)(x) = Σ mass·e^(-x·loc) + ∫ density(t)·e^(-xt) dt`.
///
/// The density is integrated over `[0, support_hint]` when a hint is
/// present. Otherwise the cutoff is chosen so the exponential tail bound
/// falls below `tol`, iterating on a sampled density bound; integrands that
/// keep growing against `e^(-xt)` are reported as divergent.
pub fn transform(mu: &Measure, x: f64, tol: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("transform requires x > 0, got {x}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Constraint("tol must be positive".into()));
    }
    let mut value: f64 = mu
        .atoms()
        .iter()
        .map(|&(loc, m)| m * (-x * loc).exp())
        .sum();
    if let Some(d) = mu.density() {
        let cutoff = match mu.support_hint() {
            Some(h) => h,
            None => decay_cutoff(d, x, tol)?,
        };
        // Deep geometric packing toward 0 keeps integrable algebraic
        // singularities (t^(c-1), log t) inside panels of negligible mass.
        // A t^(-0.9)-strength singularity still carries ~1e-6 of mass below
        // 1e-60, so on budget exhaustion retry with much deeper packing.
        let mut f = |t: f64| Ok(d.eval(t)? * (-x * t).exp());
        let mut result = None;
        for decades in [60, 240] {
            let pts = quad::log_spaced_breakpoints(cutoff, decades);
            match quad::adaptive_with_breakpoints(&mut f, &pts, 0.5 * tol, 0.5 * tol, 4000) {
                Ok(r) => {
                    result = Some(r);
                    break;
                }
                Err(Error::QuadratureBudget(_)) if decades == 60 => continue,
                Err(e) => return Err(e),
            }
        }
        let r = result.ok_or_else(|| {
            Error::QuadratureBudget("density integral did not converge".into())
        })?;
        value += r.value;
    }
    if !value.is_finite() {
        return Err(Error::Overflow("transform value is not finite".into()));
    }
    Ok(value)
}

/// Cutoff `T` with `sup|density|·e^(-xT)/x` below `tol`, found by iterating
/// on probed density bounds (handles polynomially growing densities).
fn decay_cutoff(d: &Density, x: f64, tol: f64) -> Result<f64> {
    let tol = tol.max(1e-15);
    let mut t = ((4.0 * (1.0 + 1.0 / x) / tol).ln() / x).max(1.0);
    let mut last_bound = f64::INFINITY;
    for _ in 0..16 {
        let mut m = 1e-300f64;
        for &p in &[t, 0.75 * t, 0.5 * t, 0.25 * t] {
            m = m.max(d.eval(p)?.abs());
        }
        let needed = ((4.0 * (m + 1.0) * (1.0 + 1.0 / x) / tol).ln() / x).max(1.0);
        if needed <= t {
            // Tail bound satisfied; final divergence sanity check.
            let here = d.eval(t)?.abs() * (-x * t).exp();
            let further = d.eval(2.0 * t)?.abs() * (-2.0 * x * t).exp();
            if further > here.max(tol) {
                return Err(Error::Divergence(
                    "integrand grows against the exponential factor".into(),
                ));
            }
            return Ok(t);
        }
        let bound = m * (-x * t).exp();
        if bound > last_bound * 1.5 {
            return Err(Error::Divergence(
                "integrand grows against the exponential factor".into(),
            ));
        }
        last_bound = bound;
        t = needed * 1.05;
        if t > 1e9 {
            return Err(Error::Divergence(
                "no exponential-decay cutoff below 1e9".into(),
            ));
        }
    }
    Err(Error::Divergence(
        "density bound iteration did not settle".into(),
    ))
}

/// A named (function, measure) pairing with parameter constraints.
#[derive(Debug, Clone)]
pub struct TransformPair {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub function: FuncExpr,
    pub measure: Measure,
    pub constraint_doc: String,
}

impl TransformPair {
    /// Max combined deviation `|L(measure)(x) - function(x)| / (1 + |f(x)|)`
    /// over the given x values.
    pub fn verify(&self, xs: &[f64], tol: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        for &x in xs {
            let lhs = transform(&self.measure, x, tol)?;
            let rhs = self.function.eval(x)?;
            worst = worst.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        }
        Ok(worst)
    }
}

/// Names understood by [`catalog`].
pub fn pair_names() -> &'static [&'static str] {
    &[
        "milsam1", "milsam2", "milsam3", "milsam4", "milsam5", "psin", "recxn",
    ]
}

fn get_param(params: &BTreeMap<String, f64>, key: &str, pair: &str) -> Result<f64> {
    params.get(key).copied().ok_or_else(|| {
        Error::Constraint(format!("pair '{pair}' requires parameter '{key}'"))
    })
}

/// `c·e`, folding away unit coefficients so densities print cleanly.
fn coeff(c: f64, e: FuncExpr) -> FuncExpr {
    if c == 1.0 {
        e
    } else {
        FuncExpr::mul(FuncExpr::Const(c), e)
    }
}

/// Instantiate a catalog pair.
///
/// * `milsam1(a)` — `e^(-ax) = L(δ_a)`, `a ≥ 0`.
/// * `milsam2(a,b,c)` — `1/(ax+b)^c = L(e^(-bt/a) t^(c-1)/(a^c Γ(c)))`,
///   `a,b,c ≥ 0`, `a² + b² > 0`.
/// * `milsam3(a,b)` — `log(a + b/x)`, `a ≥ 1`, `b > 0`; measure
///   `log(a)·δ_0 + (1 - e^(-bt/a))/t dt`.
/// * `milsam4` — `log(1+x)/x = L(E1(t))`.
/// * `milsam5(a)` — `e^(a/x) = L(δ_0 + a I1(2√(at))/√(at) dt)`, `a > 0`.
/// * `psin(n)` — `Ψ^(n)(x) = L((-1)^(n+1) t^n/(1 - e^(-t)))`, `n ≥ 1`.
/// * `recxn(a)` — `Γ(a+1)/x^(a+1) = L(t^a)`, `a > -1`.
pub fn catalog(name: &str, params: &BTreeMap<String, f64>) -> Result<TransformPair> {
    let t = FuncExpr::var; // densities are expressions in t
    let x = FuncExpr::var;
    match name {
        "milsam1" => {
            let a = get_param(params, "a", name)?;
            if !(a >= 0.0) {
                return Err(Error::Constraint(format!("milsam1 requires a >= 0, got {a}")));
            }
            let function = if a == 0.0 {
                FuncExpr::Const(1.0)
            } else {
                FuncExpr::exp(FuncExpr::neg(coeff(a, x())))
            };
            Ok(TransformPair {
                name: name.into(),
                params: params.clone(),
                function,
                measure: Measure::dirac(a),
                constraint_doc: "a >= 0".into(),
            })
        }
        "milsam2" => {
            let a = get_param(params, "a", name)?;
            let b = get_param(params, "b", name)?;
            let c = get_param(params, "c", name)?;
            if !(a >= 0.0 && b >= 0.0 && c >= 0.0 && a * a + b * b > 0.0) {
                return Err(Error::Constraint(format!(
                    "milsam2 requires a,b,c >= 0 and a^2+b^2 > 0, got a={a} b={b} c={c}"
                )));
            }
            let doc = "a,b,c >= 0 and a^2 + b^2 > 0".to_string();
            if c == 0.0 {
                // (ax+b)^0 = 1 = L(δ_0)
                return Ok(TransformPair {
                    name: name.into(),
                    params: params.clone(),
                    function: FuncExpr::Const(1.0),
                    measure: Measure::dirac(0.0),
                    constraint_doc: doc,
                });
            }
            if a == 0.0 {
                // constant b^(-c) = L(b^(-c) δ_0)
                let v = crate::expr::real_pow(b, -c)?;
                return Ok(TransformPair {
                    name: name.into(),
                    params: params.clone(),
                    function: FuncExpr::Const(v),
                    measure: Measure::new(vec![(0.0, v)], None, None)?,
                    constraint_doc: doc,
                });
            }
            let function = FuncExpr::div(
                FuncExpr::Const(1.0),
                FuncExpr::pow(
                    FuncExpr::add(coeff(a, x()), FuncExpr::Const(b)),
                    c,
                ),
            );
            // e^(-bt/a) t^(c-1) / (a^c Γ(c))
            let norm = crate::expr::real_pow(a, c)? * specials::gamma(c)?;
            let mut density = FuncExpr::div(FuncExpr::pow(t(), c - 1.0), FuncExpr::Const(norm));
            if b > 0.0 {
                density = FuncExpr::mul(
                    FuncExpr::exp(FuncExpr::neg(coeff(b / a, t()))),
                    density,
                );
            }
            Ok(TransformPair {
                name: name.into(),
                params: params.clone(),
                function,
                measure: Measure::new(vec![], Some(Density::Expr(density)), None)?,
                constraint_doc: doc,
            })
        }
        "milsam3" => {
            let a = get_param(params, "a", name)?;
            let b = get_param(params, "b", name)?;
            if !(a >= 1.0 && b > 0.0) {
                return Err(Error::Constraint(format!(
                    "milsam3 requires a >= 1 and b > 0, got a={a} b={b}"
                )));
            }
            let function = FuncExpr::log(FuncExpr::add(
                FuncExpr::Const(a),
                FuncExpr::div(FuncExpr::Const(b), x()),
            ));
            // μ = log(a)·δ_0 + (1 - e^(-bt/a))/t dt
            let mut atoms = vec![];
            if a > 1.0 {
                atoms.push((0.0, a.ln()));
            }
            let density = FuncExpr::div(
                FuncExpr::sub(
                    FuncExpr::Const(1.0),
                    FuncExpr::exp(FuncExpr::neg(coeff(b / a, t()))),
                ),
                t(),
            );
            Ok(TransformPair {
                name: name.into(),
                params: params.clone(),
                function,
                measure: Measure::new(atoms, Some(Density::Expr(density)), None)?,
                constraint_doc: "a >= 1, b > 0".into(),
            })
        }
        "milsam4" => {
            let function = FuncExpr::div(
                FuncExpr::log(FuncExpr::add(FuncExpr::Const(1.0), x())),
                x(),
            );
            let density = FuncExpr::exp_integral_e1(t());
            Ok(TransformPair {
                name: name.into(),
                params: params.clone(),
                function,
                measure: Measure::new(vec![], Some(Density::Expr(density)), None)?,
                constraint_doc: "no parameters".into(),
            })
        }
        "milsam5" => {
            let a = get_param(params, "a", name)?;
            if !(a > 0.0) {
                return Err(Error::Constraint(format!("milsam5 requires a > 0, got {a}")));
            }
            let function = FuncExpr::exp(FuncExpr::div(FuncExpr::Const(a), x()));
            // δ_0 + a·I1(2√(at))/√(at) dt
            let root = FuncExpr::pow(coeff(a, t()), 0.5);
            let density = coeff(
                a,
                FuncExpr::div(
                    FuncExpr::bessel_i1(FuncExpr::mul(FuncExpr::Const(2.0), root.clone())),
                    root,
                ),
            );
            Ok(TransformPair {
                name: name.into(),
                params: params.clone(),
                function,
                measure: Measure::new(vec![(0.0, 1.0)], Some(Density::Expr(density)), None)?,
                constraint_doc: "a > 0".into(),
            })
        }
        "psin" => {
            let nf = get_param(params, "n", name)?;
            if nf.fract() != 0.0 || nf < 1.0 || nf > 60.0 {
                return Err(Error::Constraint(format!(
                    "psin requires integer n >= 1, got {nf}"
                )));
            }
            let n = nf as u32;
            let function = FuncExpr::polygamma(n, x());
            let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let density = FuncExpr::mul(
                FuncExpr::Const(sign),
                FuncExpr::div(
                    FuncExpr::pow(t(), n as f64),
                    FuncExpr::sub(FuncExpr::Const(1.0), FuncExpr::exp(FuncExpr::neg(t()))),
                ),
            );
            Ok(TransformPair {
                name: name.into(),
                params: params.clone(),
                function,
                measure: Measure::new(vec![], Some(Density::Expr(density)), None)?,
                constraint_doc: "integer n >= 1".into(),
            })
        }
        "recxn" => {
            let a = get_param(params, "a", name)?;
            if !(a > -1.0) {
                return Err(Error::Constraint(format!("recxn requires a > -1, got {a}")));
            }
            let function = FuncExpr::div(
                FuncExpr::Const(specials::gamma(a + 1.0)?),
                FuncExpr::pow(x(), a + 1.0),
            );
            let density = FuncExpr::pow(t(), a);
            Ok(TransformPair {
                name: name.into(),
                params: params.clone(),
                function,
                measure: Measure::new(vec![], Some(Density::Expr(density)), None)?,
                constraint_doc: "a > -1".into(),
            })
        }
        other => Err(Error::UnknownPair(other.to_string())),
    }
}

/// A mixture of exponential densities `f(x) = ∫ t e^(-xt) dν(t)` — exactly
/// the completely monotone probability densities on `(0, ∞)`.
#[derive(Debug, Clone)]
pub struct ExpMixture {
    nu: Measure,
}

/// Build the mixture for a mixing probability measure `ν` with `ν({0}) = 0`.
pub fn exponential_mixture(nu: &Measure) -> Result<ExpMixture> {
    let mass = nu.mass()?;
    if (mass - 1.0).abs() > 1e-8 {
        return Err(Error::Constraint(format!(
            "mixing measure must be a probability measure, mass = {mass}"
        )));
    }
    if nu.atoms().iter().any(|&(loc, _)| loc <= 1e-12) {
        return Err(Error::Constraint(
            "mixing measure must not have an atom at 0 (degenerate exponential rate)".into(),
        ));
    }
    Ok(ExpMixture { nu: nu.clone() })
}

impl ExpMixture {
    pub fn mixing_measure(&self) -> &Measure {
        &self.nu
    }

    /// Density value `f(x) = ∫ t e^(-xt) dν(t)`.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("mixture density needs x >= 0, got {x}")));
        }
        let mut v: f64 = self
            .nu
            .atoms()
            .iter()
            .map(|&(t, m)| m * t * (-x * t).exp())
            .sum();
        if let Some(d) = self.nu.density() {
            let upper = self.nu.density_upper_bound()?.unwrap();
            let mut f = |t: f64| Ok(t * d.eval(t)? * (-x * t).exp());
            let pts = quad::log_spaced_breakpoints(upper, 10);
            let r = quad::adaptive_with_breakpoints(&mut f, &pts, 1e-12, 1e-10, 2000)?;
            v += r.value;
        }
        Ok(v)
    }

    /// Expression form `Σ m_i t_i e^(-t_i x)`, available when `ν` is purely
    /// atomic.
    pub fn as_expr(&self) -> Option<FuncExpr> {
        if self.nu.density().is_some() {
            return None;
        }
        let mut acc: Option<FuncExpr> = None;
        for &(t, m) in self.nu.atoms() {
            let term = FuncExpr::mul(
                FuncExpr::Const(m * t),
                FuncExpr::exp(FuncExpr::neg(FuncExpr::mul(
                    FuncExpr::Const(t),
                    FuncExpr::var(),
                ))),
            );
            acc = Some(match acc {
                None => term,
                Some(prev) => FuncExpr::add(prev, term),
            });
        }
        acc
    }

    /// Numerical check of `∫_0^∞ f(x) dx = 1`, splitting the tail exactly:
    /// `∫_X^∞ f(x) dx = ∫ e^(-Xt) dν(t) = L(dν)(X)`.
    pub fn verify_normalization(&self, tol: f64) -> Result<f64> {
        let cut = 10.0;
        let mut f = |x: f64| self.value(x);
        let r = quad::adaptive(&mut f, 0.0, cut, 0.1 * tol, 0.1 * tol, 2000)?;
        let tail = transform(&self.nu, cut, 0.1 * tol)?;
        Ok(r.value + tail)
    }
}

/// Mixture parametrized by means: `f(x) = Σ w_i (1/s_i) e^(-x/s_i)` for
/// atoms `(s_i, w_i)` of the mean distribution.
#[derive(Debug, Clone)]
pub struct MeanMixture {
    atoms: Vec<(f64, f64)>,
}

/// Build a mean-parametrized mixture from `(s_i, w_i)` atoms with `s_i > 0`
/// and normalized weights.
pub fn mean_parametrized_mixture(h_atoms: &[(f64, f64)]) -> Result<MeanMixture> {
    if h_atoms.is_empty() {
        return Err(Error::Constraint("mixture needs at least one atom".into()));
    }
    let mut total = 0.0;
    for &(s, w) in h_atoms {
        if !(s > 0.0) {
            return Err(Error::Constraint(format!("mean s must be > 0, got {s}")));
        }
        if !(w > 0.0) {
            return Err(Error::Constraint(format!("weight must be > 0, got {w}")));
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Constraint(format!(
            "weights must sum to 1, got {total}"
        )));
    }
    Ok(MeanMixture {
        atoms: h_atoms.to_vec(),
    })
}

impl MeanMixture {
    pub fn value(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .map(|&(s, w)| w / s * (-x / s).exp())
            .sum()
    }

    /// The same mixture through the reciprocal reparametrization
    /// `T = 1/S`: exponential_mixture with ν-atoms at `1/s_i`.
    pub fn to_exponential_mixture(&self) -> Result<ExpMixture> {
        let nu = Measure::new(
            self.atoms.iter().map(|&(s, w)| (1.0 / s, w)).collect(),
            None,
            None,
        )?;
        exponential_mixture(&nu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{add, convolve, scale};

    fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        kv.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn transform_of_dirac() {
        let v = transform(&Measure::dirac(1.0), 2.0, 1e-10).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn transform_of_gamma_density_matches_milsam2() {
        // a=1, b=1, c=2: density t e^{-t}/Γ(2); transform 1/(x+1)^2.
        let p = catalog("milsam2", &params(&[("a", 1.0), ("b", 1.0), ("c", 2.0)])).unwrap();
        let v = transform(&p.measure, 1.0, 1e-10).unwrap();
        assert!((v - 0.25).abs() < 1e-9, "v={v}");
    }

    #[test]
    fn transform_of_e1_density_is_log1p_over_x() {
        // Oracle: closed form log(1+x)/x at x = 1 is log 2.
        let p = catalog("milsam4", &params(&[])).unwrap();
        let v = transform(&p.measure, 1.0, 1e-10).unwrap();
        assert!((v - 2.0f64.ln()).abs() < 1e-8, "v={v}");
    }

    #[test]
    fn transform_detects_divergence() {
        let m = Measure::from_density_text("exp(2*t)", None).unwrap();
        assert!(matches!(
            transform(&m, 1.0, 1e-9),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn catalog_soundness_spot_checks() {
        let xs = [0.3, 1.0, 3.0, 10.0];
        let cases: Vec<TransformPair> = vec![
            catalog("milsam1", &params(&[("a", 3.0)])).unwrap(),
            catalog("milsam2", &params(&[("a", 0.7), ("b", 1.2), ("c", 1.5)])).unwrap(),
            catalog("milsam3", &params(&[("a", 1.0), ("b", 1.0)])).unwrap(),
            catalog("milsam4", &params(&[])).unwrap(),
            catalog("milsam5", &params(&[("a", 1.0)])).unwrap(),
            catalog("psin", &params(&[("n", 1.0)])).unwrap(),
            catalog("recxn", &params(&[("a", 0.5)])).unwrap(),
        ];
        for pair in cases {
            let worst = pair.verify(&xs, 1e-9).unwrap();
            assert!(worst <= 1e-7, "{}: worst deviation {worst:.3e}", pair.name);
        }
    }

    #[test]
    fn milsam1_at_x1_is_e_minus_3() {
        let p = catalog("milsam1", &params(&[("a", 3.0)])).unwrap();
        assert_eq!(p.measure.atoms(), &[(3.0, 1.0)]);
        let v = transform(&p.measure, 1.0, 1e-12).unwrap();
        assert!((v - (-3.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn milsam5_at_x2() {
        let p = catalog("milsam5", &params(&[("a", 1.0)])).unwrap();
        let f = p.function.eval(2.0).unwrap();
        assert!((f - 0.5f64.exp()).abs() < 1e-14);
        let v = transform(&p.measure, 2.0, 1e-10).unwrap();
        assert!((v - f).abs() < 1e-8, "v={v} f={f}");
    }

    #[test]
    fn milsam3_log2_check() {
        let p = catalog("milsam3", &params(&[("a", 1.0), ("b", 1.0)])).unwrap();
        let f = p.function.eval(1.0).unwrap();
        assert!((f - 2.0f64.ln()).abs() < 1e-14);
        let v = transform(&p.measure, 1.0, 1e-9).unwrap();
        assert!((v - f).abs() < 1e-7, "v={v} f={f}");
    }

    #[test]
    fn strongly_singular_recxn_density_still_verifies() {
        // t^(-0.9) is integrable but concentrates its transform mass in
        // panels far below the interval scale; verification must still
        // reach catalog tolerance.
        let p = catalog("recxn", &params(&[("a", -0.9)])).unwrap();
        let worst = p.verify(&[0.3, 1.0, 3.0, 10.0], 1e-9).unwrap();
        assert!(worst <= 1e-7, "worst deviation {worst:.3e}");
    }

    #[test]
    fn catalog_constraints_enforced() {
        assert!(matches!(
            catalog("milsam3", &params(&[("a", 0.5), ("b", 1.0)])),
            Err(Error::Constraint(_))
        ));
        assert!(matches!(
            catalog("milsam2", &params(&[("a", 0.0), ("b", 0.0), ("c", 1.0)])),
            Err(Error::Constraint(_))
        ));
        assert!(matches!(
            catalog("nope", &params(&[])),
            Err(Error::UnknownPair(_))
        ));
    }

    #[test]
    fn product_rule_for_transforms() {
        // L(d(μ∗ν)) = L(dμ)·L(dν)
        let m = catalog("milsam1", &params(&[("a", 1.0)])).unwrap().measure;
        let n = catalog("milsam2", &params(&[("a", 1.0), ("b", 1.0), ("c", 1.0)]))
            .unwrap()
            .measure;
        let c = convolve(&m, &n).unwrap();
        for &x in &[0.5, 1.0, 2.0] {
            let lhs = transform(&c, x, 1e-10).unwrap();
            let rhs = transform(&m, x, 1e-10).unwrap() * transform(&n, x, 1e-10).unwrap();
            assert!((lhs - rhs).abs() < 1e-6, "x={x} lhs={lhs} rhs={rhs}");
        }
    }

    #[test]
    fn transform_identity_for_dirac_convolution() {
        let c = convolve(&Measure::dirac(1.0), &Measure::dirac(2.0)).unwrap();
        let v = transform(&c, 1.0, 1e-12).unwrap();
        assert!((v - (-3.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn limit_at_infinity_recovers_atom_at_zero() {
        // Density vanishing at 0 keeps the x = 50 tail below the tolerance
        // (∫ t e^{-(1+x)t} dt = 1/(1+x)^2 ≈ 4e-4).
        let m = add(
            &scale(&Measure::dirac(0.0), 0.7),
            &Measure::from_density_text("t*exp(-t)", None).unwrap(),
        );
        let v = transform(&m, 50.0, 1e-10).unwrap();
        assert!((v - 0.7).abs() <= 1e-3 * 1.7, "v={v}");
    }

    #[test]
    fn single_atom_mixture_is_exponential_density() {
        let mix = exponential_mixture(&Measure::dirac(1.0)).unwrap();
        for &x in &[0.1, 1.0, 3.0] {
            assert!((mix.value(x).unwrap() - (-x).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn two_atom_mixture_values() {
        let nu = add(
            &scale(&Measure::dirac(1.0), 0.5),
            &scale(&Measure::dirac(2.0), 0.5),
        );
        let mix = exponential_mixture(&nu).unwrap();
        // f(x) = (e^{-x} + 2e^{-2x})/2; f(0) = 1.5
        assert!((mix.value(0.0).unwrap() - 1.5).abs() < 1e-12);
        let x = 1.0f64;
        let want = 0.5 * ((-x).exp() + 2.0 * (-2.0 * x).exp());
        assert!((mix.value(x).unwrap() - want).abs() < 1e-12);
        // Normalization oracle: ½·1 + ½·1 = 1.
        let norm = mix.verify_normalization(1e-8).unwrap();
        assert!((norm - 1.0).abs() < 1e-6, "norm={norm}");
    }

    #[test]
    fn mixture_rejects_unnormalized_and_atom_at_zero() {
        assert!(exponential_mixture(&scale(&Measure::dirac(1.0), 2.0)).is_err());
        assert!(exponential_mixture(&Measure::dirac(0.0)).is_err());
    }

    #[test]
    fn mean_parametrized_matches_exponential_form() {
        let m = mean_parametrized_mixture(&[(1.0, 1.0)]).unwrap();
        assert!((m.value(1.0) - (-1.0f64).exp()).abs() < 1e-14);

        let m = mean_parametrized_mixture(&[(0.5, 1.0)]).unwrap();
        // 2 e^{-2x}, equal to exponential_mixture(δ_2)
        let e = m.to_exponential_mixture().unwrap();
        for &x in &[0.2, 1.0, 2.5] {
            assert!((m.value(x) - 2.0 * (-2.0 * x).exp()).abs() < 1e-13);
            assert!((m.value(x) - e.value(x).unwrap()).abs() < 1e-12);
        }

        let m = mean_parametrized_mixture(&[(1.0, 0.5), (2.0, 0.5)]).unwrap();
        // Oracle: direct two-term sum at x = 1.
        let want = 0.5 * (-1.0f64).exp() + 0.25 * (-0.5f64).exp();
        assert!((m.value(1.0) - want).abs() < 1e-13);
    }
}
