//! Python bindings for the completely-monotone-function toolkit.
//!
//! Scalar helpers return floats; structured results (CM reports, inversion
//! estimates, example reports) come back as JSON strings so the Python side
//! can `json.loads` them without extra conversion layers.

use cm_core::cmtest::{self, GridSpec, Spacing};
use cm_core::expr;
use cm_core::gammaex;
use cm_core::inversion::{invert_cm, InversionConfig};
use cm_core::krull;
use cm_core::laplace;
use cm_core::measure;
use cm_core::specials;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::collections::BTreeMap;

fn err(e: cm_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed expression in one variable.
#[pyclass(name = "Expr")]
struct PyExpr {
    inner: expr::FuncExpr,
    var: String,
}

#[pymethods]
impl PyExpr {
    /// Parse an expression; `var` defaults to `x` (use `t` for densities).
    #[new]
    #[pyo3(signature = (text, var = "x"))]
    fn new(text: &str, var: &str) -> PyResult<Self> {
        Ok(PyExpr {
            inner: expr::parse_with_var(text, var).map_err(err)?,
            var: var.to_string(),
        })
    }

    fn eval(&self, x: f64) -> PyResult<f64> {
        self.inner.eval(x).map_err(err)
    }

    fn eval_complex(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.eval_complex(z).map_err(err)
    }

    /// Derivatives `[f(x0), f'(x0), ..., f^(order)(x0)]`.
    fn derivatives(&self, x0: f64, order: usize) -> PyResult<Vec<f64>> {
        let jet = cm_core::jet_eval(&self.inner, x0, order).map_err(err)?;
        Ok(jet.coeffs().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Expr(\"{}\")", self.inner.print_with_var(&self.var))
    }

    fn __str__(&self) -> String {
        self.inner.print_with_var(&self.var)
    }
}

/// A measure on [0, ∞) described by atoms plus an optional density.
#[pyclass(name = "Measure")]
struct PyMeasure {
    inner: measure::Measure,
}

#[pymethods]
impl PyMeasure {
    /// Build from the measure JSON schema.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyMeasure {
            inner: measure::Measure::from_json(text).map_err(err)?,
        })
    }

    /// Unit Dirac mass at `loc`.
    #[staticmethod]
    fn dirac(loc: f64) -> PyResult<Self> {
        if !(loc >= 0.0) {
            return Err(PyValueError::new_err("location must be >= 0"));
        }
        Ok(PyMeasure {
            inner: measure::Measure::dirac(loc),
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn mass(&self) -> PyResult<f64> {
        self.inner.mass().map_err(err)
    }

    fn cumulative(&self, t: f64) -> PyResult<f64> {
        self.inner.cumulative(t).map_err(err)
    }

    #[pyo3(signature = (x, tol = 1e-9))]
    fn transform(&self, x: f64, tol: f64) -> PyResult<f64> {
        laplace::transform(&self.inner, x, tol).map_err(err)
    }

    fn scale(&self, a: f64) -> PyResult<Self> {
        if !(a > 0.0) {
            return Err(PyValueError::new_err("scale factor must be > 0"));
        }
        Ok(PyMeasure {
            inner: measure::scale(&self.inner, a),
        })
    }

    fn add(&self, other: &PyMeasure) -> Self {
        PyMeasure {
            inner: measure::add(&self.inner, &other.inner),
        }
    }

    fn convolve(&self, other: &PyMeasure) -> PyResult<Self> {
        Ok(PyMeasure {
            inner: measure::convolve(&self.inner, &other.inner).map_err(err)?,
        })
    }

    fn stieltjes_to_laplace(&self) -> PyResult<Self> {
        Ok(PyMeasure {
            inner: measure::stieltjes_to_laplace(&self.inner).map_err(err)?,
        })
    }
}

/// CM grid check plus the necessary-condition battery; returns the report
/// as JSON.
#[pyfunction]
#[pyo3(signature = (f, order = 10, x_min = 0.05, x_max = 50.0, points = 64, log_spacing = true, seed = 0))]
fn cm_check(
    f: &str,
    order: usize,
    x_min: f64,
    x_max: f64,
    points: usize,
    log_spacing: bool,
    seed: u64,
) -> PyResult<String> {
    let f = expr::parse(f).map_err(err)?;
    let grid = GridSpec {
        x_min,
        x_max,
        points,
        spacing: if log_spacing {
            Spacing::Log
        } else {
            Spacing::Linear
        },
    };
    let report = cmtest::full_check(&f, &grid, order, seed).map_err(err)?;
    report.to_json().map_err(err)
}

/// Gil-Pelaez inversion of a CM function; returns the distribution
/// estimates as JSON.
#[pyfunction]
#[pyo3(signature = (f, t_grid, tol = 1e-6))]
fn invert(f: &str, t_grid: Vec<f64>, tol: f64) -> PyResult<String> {
    let f = expr::parse(f).map_err(err)?;
    let cfg = InversionConfig {
        tol,
        ..Default::default()
    };
    let est = invert_cm(&f, &t_grid, &cfg).map_err(err)?;
    serde_json::to_string_pretty(&est).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
#[pyo3(signature = (f, x, n_max = 10_000, tol = 1e-10))]
fn krull_gprime(f: &str, x: f64, n_max: usize, tol: f64) -> PyResult<f64> {
    let f = expr::parse(f).map_err(err)?;
    krull::krull_gprime(&f, x, n_max, tol).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (f, j, x, n_max = 10_000, tol = 1e-10))]
fn krull_gderiv(f: &str, j: u32, x: f64, n_max: usize, tol: f64) -> PyResult<f64> {
    let f = expr::parse(f).map_err(err)?;
    krull::krull_gderiv(&f, j, x, n_max, tol).map_err(err)
}

/// Instantiate a catalog pair and verify it; returns JSON with the function
/// text, the measure, and the verification deviation.
#[pyfunction]
#[pyo3(signature = (name, params, xs = vec![0.3, 1.0, 3.0, 10.0], tol = 1e-9))]
fn catalog_pair(
    name: &str,
    params: BTreeMap<String, f64>,
    xs: Vec<f64>,
    tol: f64,
) -> PyResult<String> {
    let pair = laplace::catalog(name, &params).map_err(err)?;
    let mut checks = Vec::new();
    for &x in &xs {
        let lhs = laplace::transform(&pair.measure, x, tol).map_err(err)?;
        let rhs = pair.function.eval(x).map_err(err)?;
        checks.push(serde_json::json!({
            "x": x, "function": rhs, "transform": lhs,
        }));
    }
    let payload = serde_json::json!({
        "name": pair.name,
        "constraints": pair.constraint_doc,
        "function": pair.function.print(),
        "measure": serde_json::from_str::<serde_json::Value>(
            &pair.measure.to_json().map_err(err)?
        ).map_err(|e| PyValueError::new_err(e.to_string()))?,
        "checks": checks,
    });
    serde_json::to_string_pretty(&payload).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
fn polygamma(n: u32, x: f64) -> PyResult<f64> {
    specials::polygamma(n, x).map_err(err)
}

#[pyfunction]
fn exp_integral_e1(t: f64) -> PyResult<f64> {
    specials::exp_integral_e1(t).map_err(err)
}

#[pyfunction]
fn bessel_i1(z: f64) -> PyResult<f64> {
    specials::bessel_i1(z).map_err(err)
}

#[pyfunction]
fn lgamma(x: f64) -> PyResult<f64> {
    specials::lgamma(x).map_err(err)
}

#[pyfunction]
fn majorization_leq(x: Vec<f64>, y: Vec<f64>) -> PyResult<bool> {
    cmtest::majorization_leq(&x, &y).map_err(err)
}

#[pyfunction]
fn w_value(x: f64) -> PyResult<f64> {
    gammaex::w_value(x).map_err(err)
}

#[pyfunction]
fn g_a_value(x: f64, a: f64) -> PyResult<f64> {
    gammaex::g_a_value(x, a).map_err(err)
}

#[pyfunction]
fn phi_bc_value(x: f64, b: f64, c: f64) -> PyResult<f64> {
    gammaex::phi_bc_value(x, b, c).map_err(err)
}

#[pyfunction]
fn h_a(t: f64, a: f64) -> PyResult<f64> {
    gammaex::h_a(t, a).map_err(err)
}

#[pyfunction]
fn h_b(t: f64, b: f64) -> PyResult<f64> {
    gammaex::h_b(t, b).map_err(err)
}

#[pyfunction]
fn small_t_coefficient(b: f64) -> f64 {
    gammaex::small_t_coefficient(b)
}

#[pyfunction]
#[pyo3(signature = (name, param = None, xs = vec![0.5, 1.0, 2.0, 5.0]))]
fn example(name: &str, param: Option<f64>, xs: Vec<f64>) -> PyResult<String> {
    let to_json = |v: serde_json::Result<String>| {
        v.map_err(|e| PyValueError::new_err(e.to_string()))
    };
    match name {
        "lem0" => to_json(serde_json::to_string_pretty(
            &gammaex::run_lem0(&xs).map_err(err)?,
        )),
        "exa200" => to_json(serde_json::to_string_pretty(
            &gammaex::run_exa200(param.unwrap_or(0.5), &xs).map_err(err)?,
        )),
        "exa300" => to_json(serde_json::to_string_pretty(
            &gammaex::run_exa300(param.unwrap_or_else(gammaex::exa300_threshold), &xs)
                .map_err(err)?,
        )),
        other => Err(PyValueError::new_err(format!(
            "unknown example '{other}' (expected lem0, exa200 or exa300)"
        ))),
    }
}

#[pymodule]
fn cmtk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpr>()?;
    m.add_class::<PyMeasure>()?;
    m.add_function(wrap_pyfunction!(cm_check, m)?)?;
    m.add_function(wrap_pyfunction!(invert, m)?)?;
    m.add_function(wrap_pyfunction!(krull_gprime, m)?)?;
    m.add_function(wrap_pyfunction!(krull_gderiv, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_pair, m)?)?;
    m.add_function(wrap_pyfunction!(polygamma, m)?)?;
    m.add_function(wrap_pyfunction!(exp_integral_e1, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i1, m)?)?;
    m.add_function(wrap_pyfunction!(lgamma, m)?)?;
    m.add_function(wrap_pyfunction!(majorization_leq, m)?)?;
    m.add_function(wrap_pyfunction!(w_value, m)?)?;
    m.add_function(wrap_pyfunction!(g_a_value, m)?)?;
    m.add_function(wrap_pyfunction!(phi_bc_value, m)?)?;
    m.add_function(wrap_pyfunction!(h_a, m)?)?;
    m.add_function(wrap_pyfunction!(h_b, m)?)?;
    m.add_function(wrap_pyfunction!(small_t_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(example, m)?)?;
    Ok(())
}
