//! Series solutions of Krull's functional equation `g(x+1) - g(x) = f(x)`:
//!
//! ```text
//! g'(x)   = lim_n ( f(x+n) - Σ_{k=0}^n f'(x+k) )
//! g^(j)(x) = -Σ_{k=0}^∞ f^(j)(x+k)        (j ≥ 2)
//! ```
//!
//! Partial values converge like `O(1/n)` (for `g'`) or `O(1/n^(j-1))`, far
//! too slowly for the tolerances used here, so an Euler–Maclaurin endpoint
//! correction is applied at the truncation point; with it the residual error
//! drops below the `B_8` term. The solver returns derivatives only — the
//! additive constant in `g` must be pinned by the caller's normalization.

use crate::error::{Error, Result};
use crate::expr::FuncExpr;
use crate::jet::jet_eval;

/// `g'(x)` by the corrected limit formula. `n_max` bounds the number of
/// direct terms (default in the CLI: 10^4); `tol` is the stopping tolerance
/// between consecutive corrected partial values.
pub fn krull_gprime(f: &FuncExpr, x: f64, n_max: usize, tol: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("krull requires x > 0, got {x}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Constraint("tol must be positive".into()));
    }
    let mut sum_fprime = 0.0f64; // Σ_{k=0}^{n} f'(x+k)
    let mut prev: Option<f64> = None;
    let mut prev_fprime_abs: Option<f64> = None;
    let mut checkpoint = 8usize;
    let mut k = 0usize;
    while k <= n_max {
        let y = x + k as f64;
        if k == checkpoint {
            // Corrected partial value at n = k (the k-th term is included
            // below before advancing).
            let jet = jet_eval(f, y, 6)?;
            sum_fprime += jet.derivative(1);
            let s = jet.derivative(0) - sum_fprime;
            let correction = jet.derivative(1) / 2.0 + jet.derivative(2) / 12.0
                - jet.derivative(4) / 720.0
                + jet.derivative(6) / 30240.0;
            let value = s + correction;
            // Hypothesis f'(x) → 0: |f'| must decay between checkpoints
            // (or be identically negligible, as for constant f).
            let fp = jet.derivative(1).abs();
            if let Some(prev_fp) = prev_fprime_abs {
                if fp > 1e-300 && fp >= prev_fp * (1.0 - 1e-12) {
                    return Err(Error::Divergence(
                        "f'(x+n) does not tend to 0 at infinity".into(),
                    ));
                }
            }
            prev_fprime_abs = Some(fp);
            if let Some(p) = prev {
                if (value - p).abs() <= tol * (1.0 + value.abs()) {
                    return Ok(value);
                }
            }
            prev = Some(value);
            checkpoint *= 2;
        } else {
            let jet = jet_eval(f, y, 1)?;
            sum_fprime += jet.derivative(1);
        }
        k += 1;
    }
    Err(Error::NoConvergence(format!(
        "krull g' did not converge within {n_max} terms"
    )))
}

/// `g^(j)(x) = -Σ_{k≥0} f^(j)(x+k)` for `j ≥ 2`, with an Euler–Maclaurin
/// integral tail added at the truncation point:
///
/// ```text
/// Σ_{k≥n} h(k) = -f^(j-1)(x+n) + h(n)/2 - h'(n)/12 + h'''(n)/720 - ...
/// ```
pub fn krull_gderiv(f: &FuncExpr, j: u32, x: f64, n_max: usize, tol: f64) -> Result<f64> {
    if j < 2 {
        return Err(Error::Constraint(format!(
            "krull_gderiv requires j >= 2, got {j}"
        )));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("krull requires x > 0, got {x}")));
    }
    let j = j as usize;
    let mut partial = 0.0f64; // Σ_{k=0}^{n-1} f^(j)(x+k)
    let mut prev: Option<f64> = None;
    let mut prev_term_abs: Option<f64> = None;
    let mut checkpoint = 8usize;
    let mut k = 0usize;
    while k <= n_max {
        let y = x + k as f64;
        if k == checkpoint {
            let jet = jet_eval(f, y, j + 5)?;
            // Tail-ratio test: |f^(j)| must decay between checkpoints (or
            // vanish, for polynomials of degree < j).
            let term_abs = jet.derivative(j).abs();
            if let Some(prev_abs) = prev_term_abs {
                if term_abs > 1e-300 && term_abs >= prev_abs * (1.0 - 1e-12) {
                    return Err(Error::Divergence(format!(
                        "f^({j})(x+k) is not decaying at k = {k}; divergent tail"
                    )));
                }
            }
            prev_term_abs = Some(term_abs);
            let tail = -jet.derivative(j - 1) + jet.derivative(j) / 2.0
                - jet.derivative(j + 1) / 12.0
                + jet.derivative(j + 3) / 720.0
                - jet.derivative(j + 5) / 30240.0;
            let value = -(partial + tail);
            if let Some(p) = prev {
                if (value - p).abs() <= tol * (1.0 + value.abs()) {
                    return Ok(value);
                }
            }
            prev = Some(value);
            checkpoint *= 2;
        }
        let jet = jet_eval(f, y, j)?;
        partial += jet.derivative(j);
        k += 1;
    }
    Err(Error::NoConvergence(format!(
        "krull g^({j}) did not converge within {n_max} terms"
    )))
}

/// Max residual of `g''(x+1) - g''(x) = f''(x)` over a grid, with `g''`
/// reconstructed from [`krull_gderiv`].
pub fn krull_residual(f: &FuncExpr, x_grid: &[f64], n_max: usize, tol: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in x_grid {
        let g2_x = krull_gderiv(f, 2, x, n_max, tol)?;
        let g2_x1 = krull_gderiv(f, 2, x + 1.0, n_max, tol)?;
        let f2 = jet_eval(f, x, 2)?.derivative(2);
        worst = worst.max((g2_x1 - g2_x - f2).abs());
    }
    Ok(worst)
}
