//! Self-contained special functions: log-Gamma, polygamma, the exponential
//! integral `E1` and the modified Bessel function `I1`.
//!
//! Polygamma uses upward recurrence to shift the argument above
//! `recurrence_shift + n`, then the Bernoulli asymptotic expansion. `E1` uses
//! its power series for small arguments and a modified-Lentz continued
//! fraction above `e1_asymptotic_switch`. `I1` uses its everywhere-convergent
//! defining series below `i1_asymptotic_switch` and the large-argument
//! expansion above it.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ln(2π)/2`, the Stirling constant.
pub const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

/// Bernoulli numbers B_2, B_4, ..., B_30.
const BERNOULLI_2K: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// Tuning knobs for the special-function evaluations.
#[derive(Debug, Clone, Copy)]
pub struct SpecialsConfig {
    /// Relative tolerance for series/continued-fraction termination.
    pub series_tol: f64,
    /// Polygamma arguments are shifted above `recurrence_shift + n` before
    /// the asymptotic expansion is applied.
    pub recurrence_shift: u32,
    /// `E1` switches from power series to continued fraction here.
    pub e1_asymptotic_switch: f64,
    /// `I1` switches from the defining series to the large-argument
    /// expansion here.
    pub i1_asymptotic_switch: f64,
}

impl Default for SpecialsConfig {
    fn default() -> Self {
        SpecialsConfig {
            series_tol: 1e-14,
            recurrence_shift: 10,
            e1_asymptotic_switch: 1.0,
            i1_asymptotic_switch: 300.0,
        }
    }
}

impl SpecialsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_tol > 0.0 && self.series_tol <= 1e-6) {
            return Err(Error::Constraint(format!(
                "series_tol must lie in (0, 1e-6], got {}",
                self.series_tol
            )));
        }
        if self.recurrence_shift < 1 {
            return Err(Error::Constraint(
                "recurrence_shift must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

fn factorial(n: u32) -> f64 {
    let mut acc = 1.0f64;
    for k in 2..=n as u64 {
        acc *= k as f64;
    }
    acc
}

/// Stirling series for `log Γ(y)`, valid for y well above 10.
fn lgamma_stirling(y: f64) -> f64 {
    let mut sum = (y - 0.5) * y.ln() - y + HALF_LN_TWO_PI;
    let y2 = y * y;
    let mut ypow = y; // y^(2k-1)
    for (k, &b) in BERNOULLI_2K.iter().enumerate().take(8) {
        let k = (k + 1) as f64;
        let term = b / (2.0 * k * (2.0 * k - 1.0) * ypow);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        ypow *= y2;
    }
    sum
}

/// `log Γ(x)` for `x > 0`.
pub fn lgamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("lgamma requires x > 0, got {x}")));
    }
    let mut y = x;
    let mut shift = 0.0;
    while y < 12.0 {
        shift += y.ln();
        y += 1.0;
    }
    Ok(lgamma_stirling(y) - shift)
}

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    Ok(lgamma(x)?.exp())
}

/// Asymptotic expansion of `Ψ^(n)(y)` for large `y`.
fn polygamma_asymptotic(n: u32, y: f64, tol: f64) -> f64 {
    let y2 = y * y;
    if n == 0 {
        // Ψ(y) = ln y - 1/(2y) - Σ B_2k / (2k y^2k)
        let mut sum = y.ln() - 0.5 / y;
        let mut ypow = y2;
        let mut prev = f64::INFINITY;
        for (k, &b) in BERNOULLI_2K.iter().enumerate() {
            let k = (k + 1) as f64;
            let term = b / (2.0 * k * ypow);
            if term.abs() > prev {
                break; // semi-convergent tail started growing
            }
            sum -= term;
            if term.abs() < tol * sum.abs() {
                break;
            }
            prev = term.abs();
            ypow *= y2;
        }
        return sum;
    }
    // Ψ^(n)(y) = (-1)^(n+1) [ (n-1)!/y^n + n!/(2 y^(n+1))
    //                         + Σ B_2k (2k+n-1)!/((2k)! y^(2k+n)) ]
    let nf = n as f64;
    let fact_nm1 = factorial(n - 1);
    let ypow_n = y.powi(n as i32);
    let mut sum = fact_nm1 / ypow_n + fact_nm1 * nf / (2.0 * ypow_n * y);
    // c_k = (2k+n-1)!/(2k)!;  c_1 = (n+1)!/2
    let mut c = factorial(n + 1) / 2.0;
    let mut ypow = ypow_n * y2;
    let mut prev = f64::INFINITY;
    for (k, &b) in BERNOULLI_2K.iter().enumerate() {
        let term = b * c / ypow;
        if term.abs() > prev {
            break;
        }
        sum += term;
        if term.abs() < tol * sum.abs() {
            break;
        }
        prev = term.abs();
        let kk = (k + 1) as f64;
        c *= (2.0 * kk + nf) * (2.0 * kk + nf + 1.0) / ((2.0 * kk + 1.0) * (2.0 * kk + 2.0));
        ypow *= y2;
    }
    if n % 2 == 0 {
        -sum
    } else {
        sum
    }
}

/// `Ψ^(n)(x) = (log Γ(x))^(n+1)` for `x > 0`, `n ≥ 0`, with the default
/// configuration.
pub fn polygamma(n: u32, x: f64) -> Result<f64> {
    polygamma_with(&SpecialsConfig::default(), n, x)
}

/// `Ψ^(n)(x)` with explicit configuration.
///
/// Uses `Ψ^(n)(x) = Ψ^(n)(x+1) - (-1)^n n!/x^(n+1)` to shift the argument
/// above `recurrence_shift + n`, then the asymptotic expansion.
pub fn polygamma_with(cfg: &SpecialsConfig, n: u32, x: f64) -> Result<f64> {
    cfg.validate()?;
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "polygamma requires x > 0, got {x}"
        )));
    }
    let target = cfg.recurrence_shift as f64 + n as f64;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 }; // (-1)^n
    let nfact = factorial(n);
    let mut y = x;
    let mut acc = 0.0;
    while y < target {
        // Ψ^(n)(y) = Ψ^(n)(y+1) - (-1)^n n!/y^(n+1)
        acc -= sign * nfact / y.powi(n as i32 + 1);
        y += 1.0;
    }
    let value = polygamma_asymptotic(n, y, cfg.series_tol) + acc;
    if !value.is_finite() {
        return Err(Error::Overflow(format!("polygamma({n}, {x})")));
    }
    Ok(value)
}

/// Exponential integral `E1(t) = ∫_1^∞ e^(-tu) du/u` for `t > 0`, with the
/// default configuration.
pub fn exp_integral_e1(t: f64) -> Result<f64> {
    exp_integral_e1_with(&SpecialsConfig::default(), t)
}

/// `E1(t)` with explicit configuration.
pub fn exp_integral_e1_with(cfg: &SpecialsConfig, t: f64) -> Result<f64> {
    cfg.validate()?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("E1 requires t > 0, got {t}")));
    }
    if t <= cfg.e1_asymptotic_switch {
        // E1(t) = -γ - ln t + Σ_{k≥1} (-1)^(k+1) t^k/(k k!)
        let mut sum = 0.0;
        let mut p = 1.0; // (-t)^k / k!
        for k in 1..200u32 {
            p *= -t / k as f64;
            let term = -p / k as f64;
            sum += term;
            if term.abs() < cfg.series_tol * (sum.abs() + 1e-300) {
                return Ok(-EULER_GAMMA - t.ln() + sum);
            }
        }
        Err(Error::NoConvergence("E1 power series".into()))
    } else {
        // Modified Lentz on E1(t) = e^(-t) / (t+1 - 1/(t+3 - 4/(t+5 - ...)))
        let tiny = 1e-300;
        let mut b = t + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=300u32 {
            let a = -((i as f64) * (i as f64));
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < cfg.series_tol {
                return Ok((-t).exp() * h);
            }
        }
        Err(Error::NoConvergence("E1 continued fraction".into()))
    }
}

/// Modified Bessel function `I_n(z)` by its defining power series
/// (everywhere convergent; all terms positive).
pub(crate) fn bessel_i_n_series(n: u32, z: f64) -> f64 {
    if z == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * z;
    let mut term = half.powi(n as i32) / factorial(n);
    let mut sum = term;
    let h2 = half * half;
    for m in 0..400u32 {
        term *= h2 / ((m as f64 + 1.0) * (m as f64 + 1.0 + n as f64));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// `I_n(z)` for `z ≥ 0` (series path; used by the jet engine).
pub fn bessel_i_n(n: u32, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("I_n requires z >= 0, got {z}")));
    }
    let v = bessel_i_n_series(n, z);
    if !v.is_finite() {
        return Err(Error::Overflow(format!("I_{n}({z})")));
    }
    Ok(v)
}

/// Modified Bessel function `I1(z)` for `z ≥ 0`, with the default
/// configuration.
pub fn bessel_i1(z: f64) -> Result<f64> {
    bessel_i1_with(&SpecialsConfig::default(), z)
}

/// `I1(z)` with explicit configuration.
pub fn bessel_i1_with(cfg: &SpecialsConfig, z: f64) -> Result<f64> {
    cfg.validate()?;
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("I1 requires z >= 0, got {z}")));
    }
    if z <= cfg.i1_asymptotic_switch {
        let v = bessel_i_n_series(1, z);
        if !v.is_finite() {
            return Err(Error::Overflow(format!("I1({z})")));
        }
        Ok(v)
    } else {
        // I1(z) ~ e^z/√(2πz) Σ (-1)^k a_k/z^k, a_k = Π_{j≤k} (4-(2j-1)^2)/(8j)
        let mut sum = 1.0;
        let mut term = 1.0;
        for k in 1..40u32 {
            let j = k as f64;
            term *= -(4.0 - (2.0 * j - 1.0) * (2.0 * j - 1.0)) / (8.0 * j * z);
            sum += term;
            if term.abs() < cfg.series_tol * sum.abs() {
                break;
            }
        }
        let v = z.exp() / (2.0 * std::f64::consts::PI * z).sqrt() * sum;
        if !v.is_finite() {
            return Err(Error::Overflow(format!("I1({z})")));
        }
        Ok(v)
    }
}
