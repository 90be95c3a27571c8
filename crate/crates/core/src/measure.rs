//! Positive (and signed) measures on `[0, ∞)` represented as atoms plus a
//! density, with the algebra Laplace-transform work needs: scaling, addition,
//! convolution, and Stieltjes-to-Laplace conversion.
//!
//! Densities are allowed to be signed: the same type serves refutation
//! workflows, where a negative density certifies that a function is not
//! completely monotone. Positivity is a checkable predicate, not an
//! invariant. Atom masses must be positive and locations distinct.
//!
//! `support_hint`, when present, is treated as a hard upper integration
//! bound: the density is integrated over `[0, support_hint]`. This is how
//! bounded-support measures (Lebesgue on `[0, 1]`, say) are expressed with
//! an everywhere-defined density expression.
//!
//! Measures are immutable after construction; all operations are pure.

use crate::error::{Error, Result};
use crate::expr::{parse_with_var, FuncExpr};
use crate::interp::CubicTable;
use crate::quad;
use serde::{Deserialize, Serialize};

/// Relative tolerance for merging coinciding atom locations.
const ATOM_MERGE_TOL: f64 = 1e-12;

/// Grid size for tabulated densities produced by convolution.
const CONV_GRID_POINTS: usize = 512;

/// Density component of a measure, evaluated pointwise on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    /// Expression in the variable `t`.
    Expr(FuncExpr),
    /// Tabulated values with shape-preserving cubic interpolation;
    /// zero beyond the tabulated range.
    Table(CubicTableDensity),
    /// `t ↦ inner(t - offset)` for `t ≥ offset`, zero below.
    Shifted { inner: Box<Density>, offset: f64 },
    /// Pointwise sum.
    Sum(Box<Density>, Box<Density>),
    /// `t ↦ ∫ e^(-ts) dμ(s)` — the Laplace transform of a stored measure,
    /// used by the Stieltjes conversion.
    LaplaceOf(Box<Measure>),
}

/// Wrapper so the interpolation table stays crate-private.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicTableDensity {
    pub(crate) table: CubicTable,
}

impl Density {
    /// Parse an expression density in the variable `t`.
    pub fn from_expr_text(text: &str) -> Result<Density> {
        Ok(Density::Expr(parse_with_var(text, "t")?))
    }

    /// Pointwise evaluation.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Density::Expr(e) => e.eval(t),
            Density::Table(tab) => Ok(tab.table.eval(t)),
            Density::Shifted { inner, offset } => {
                if t <= *offset {
                    Ok(0.0)
                } else {
                    inner.eval(t - offset)
                }
            }
            Density::Sum(a, b) => Ok(a.eval(t)? + b.eval(t)?),
            Density::LaplaceOf(mu) => crate::laplace::transform(mu, t, 1e-12),
        }
    }

    fn scaled(self, a: f64) -> Density {
        match self {
            Density::Expr(e) => Density::Expr(FuncExpr::mul(FuncExpr::Const(a), e)),
            Density::Table(mut t) => {
                t.table.scale_values(a);
                Density::Table(t)
            }
            Density::Shifted { inner, offset } => Density::Shifted {
                inner: Box::new(inner.scaled(a)),
                offset,
            },
            Density::Sum(l, r) => Density::Sum(Box::new(l.scaled(a)), Box::new(r.scaled(a))),
            Density::LaplaceOf(mu) => Density::LaplaceOf(Box::new(scale(&mu, a))),
        }
    }

    /// Render back to an expression in `t`, when the representation allows.
    pub fn as_expr(&self) -> Option<FuncExpr> {
        match self {
            Density::Expr(e) => Some(e.clone()),
            Density::Sum(a, b) => Some(FuncExpr::add(a.as_expr()?, b.as_expr()?)),
            _ => None,
        }
    }

    /// Upper bound of the region where the density is non-negligible.
    fn support_upper(&self) -> Result<f64> {
        match self {
            Density::Table(t) => Ok(t.table.upper()),
            Density::Shifted { inner, offset } => Ok(inner.support_upper()? + offset),
            Density::Sum(a, b) => Ok(a.support_upper()?.max(b.support_upper()?)),
            _ => self.probe_decay(),
        }
    }

    fn probe_decay(&self) -> Result<f64> {
        let mut t = 1.0f64;
        let mut max_seen = 0.0f64;
        for _ in 0..44 {
            let mut local = 0.0f64;
            for &s in &[t, 0.85 * t, 0.6 * t] {
                let v = self.eval(s).map_err(|e| {
                    Error::InvalidMeasure(format!(
                        "density not evaluable while probing support at t = {s}: {e}"
                    ))
                })?;
                local = local.max(v.abs());
            }
            max_seen = max_seen.max(local);
            if local <= 1e-13 * (1.0 + max_seen) {
                return Ok(t);
            }
            t *= 2.0;
        }
        Err(Error::InvalidMeasure(
            "unbounded density without support_hint".into(),
        ))
    }

    fn canonical_key(&self) -> String {
        format!("{self:?}")
    }
}

/// A measure on `[0, ∞)`: atoms `(location, mass)` plus an optional density.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    atoms: Vec<(f64, f64)>,
    density: Option<Density>,
    support_hint: Option<f64>,
}

impl Measure {
    /// Build a measure, validating and normalizing atoms (sorted by
    /// location; coinciding locations merged by summing masses).
    pub fn new(
        atoms: Vec<(f64, f64)>,
        density: Option<Density>,
        support_hint: Option<f64>,
    ) -> Result<Measure> {
        for &(loc, mass) in &atoms {
            if !loc.is_finite() || loc < 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "atom location must be finite and >= 0, got {loc}"
                )));
            }
            if !mass.is_finite() || mass <= 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "atom mass must be finite and > 0, got {mass}"
                )));
            }
        }
        if let Some(h) = support_hint {
            if !h.is_finite() || h <= 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "support_hint must be finite and > 0, got {h}"
                )));
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (loc, mass) in atoms {
            if let Some(last) = merged.last_mut() {
                if (loc - last.0).abs() <= ATOM_MERGE_TOL * (1.0 + loc.abs()) {
                    last.1 += mass;
                    continue;
                }
            }
            merged.push((loc, mass));
        }
        Ok(Measure {
            atoms: merged,
            density,
            support_hint,
        })
    }

    /// Dirac measure `δ_loc` of unit mass.
    pub fn dirac(loc: f64) -> Measure {
        Measure::new(vec![(loc, 1.0)], None, None).expect("unit dirac is valid")
    }

    /// Measure with only a density given as an expression in `t`.
    pub fn from_density_text(text: &str, support_hint: Option<f64>) -> Result<Measure> {
        Measure::new(
            vec![],
            Some(Density::from_expr_text(text)?),
            support_hint,
        )
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn support_hint(&self) -> Option<f64> {
        self.support_hint
    }

    /// Upper integration bound for the density: `support_hint` when present
    /// (hard bound), otherwise detected by decay probing.
    pub fn density_upper_bound(&self) -> Result<Option<f64>> {
        match (&self.density, self.support_hint) {
            (None, _) => Ok(None),
            (Some(_), Some(h)) => Ok(Some(h)),
            (Some(d), None) => Ok(Some(d.support_upper()?)),
        }
    }

    /// Total mass: atom masses plus the integral of the density.
    pub fn mass(&self) -> Result<f64> {
        let mut m: f64 = self.atoms.iter().map(|&(_, w)| w).sum();
        if let Some(d) = &self.density {
            let upper = self.density_upper_bound()?.unwrap();
            let mut f = |t: f64| d.eval(t);
            let pts = quad::log_spaced_breakpoints(upper, 10);
            let r = quad::adaptive_with_breakpoints(&mut f, &pts, 1e-12, 1e-9, 2000)?;
            m += r.value;
        }
        Ok(m)
    }

    /// Cumulative measure `μ([0, t])`.
    pub fn cumulative(&self, t: f64) -> Result<f64> {
        let mut m: f64 = self
            .atoms
            .iter()
            .filter(|&&(loc, _)| loc <= t)
            .map(|&(_, w)| w)
            .sum();
        if let Some(d) = &self.density {
            let upper = match self.density_upper_bound()? {
                Some(u) => u.min(t),
                None => t,
            };
            if upper > 0.0 {
                let mut f = |s: f64| d.eval(s);
                let pts = quad::log_spaced_breakpoints(upper, 10);
                let r = quad::adaptive_with_breakpoints(&mut f, &pts, 1e-12, 1e-9, 2000)?;
                m += r.value;
            }
        }
        Ok(m)
    }
}

/// `a·μ` for `a > 0`: every atom mass and the density scaled by `a`.
pub fn scale(mu: &Measure, a: f64) -> Measure {
    assert!(a > 0.0 && a.is_finite(), "scale factor must be positive");
    Measure {
        atoms: mu.atoms.iter().map(|&(loc, m)| (loc, m * a)).collect(),
        density: mu.density.clone().map(|d| d.scaled(a)),
        support_hint: mu.support_hint,
    }
}

/// `μ + ν`: atoms merged (coinciding locations sum), densities summed.
pub fn add(mu: &Measure, nu: &Measure) -> Measure {
    let mut atoms = mu.atoms.clone();
    atoms.extend_from_slice(&nu.atoms);
    let density = match (mu.density.clone(), nu.density.clone()) {
        (None, d) | (d, None) => d,
        (Some(a), Some(b)) => {
            // Canonical operand order so addition is structurally
            // commutative after normalization.
            if a.canonical_key() <= b.canonical_key() {
                Some(Density::Sum(Box::new(a), Box::new(b)))
            } else {
                Some(Density::Sum(Box::new(b), Box::new(a)))
            }
        }
    };
    let support_hint = match (&mu.density, &nu.density) {
        (Some(_), None) => mu.support_hint,
        (None, Some(_)) => nu.support_hint,
        (Some(_), Some(_)) => match (mu.support_hint, nu.support_hint) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        },
        (None, None) => None,
    };
    Measure::new(atoms, density, support_hint).expect("sum of valid measures is valid")
}

/// Convolution `μ ∗ ν`, satisfying `L(d(μ∗ν)) = L(dμ)·L(dν)`.
///
/// Atom×atom pairs produce atoms at summed locations with product masses;
/// atom×density pairs produce shifted scaled densities; density×density is
/// computed numerically and returned as a tabulated density on a log-spaced
/// grid up to the sum of the two supports.
pub fn convolve(mu: &Measure, nu: &Measure) -> Result<Measure> {
    let mut atoms = Vec::new();
    for &(a, ma) in &mu.atoms {
        for &(b, mb) in &nu.atoms {
            atoms.push((a + b, ma * mb));
        }
    }
    let mut parts: Vec<Density> = Vec::new();
    if let Some(dn) = &nu.density {
        for &(a, ma) in &mu.atoms {
            let shifted = shift_density(dn.clone().scaled(ma), a);
            parts.push(shifted);
        }
    }
    if let Some(dm) = &mu.density {
        for &(b, mb) in &nu.atoms {
            let shifted = shift_density(dm.clone().scaled(mb), b);
            parts.push(shifted);
        }
    }
    let mut hint_acc: Option<f64> = None;
    if let (Some(dm), Some(dn)) = (&mu.density, &nu.density) {
        let s1 = mu.density_upper_bound()?.unwrap();
        let s2 = nu.density_upper_bound()?.unwrap();
        let table = convolve_densities(dm, dn, s1 + s2)?;
        hint_acc = Some(s1 + s2);
        parts.push(Density::Table(CubicTableDensity { table }));
    }
    let density = parts.into_iter().reduce(|a, b| {
        Density::Sum(Box::new(a), Box::new(b))
    });
    // Shifted expression densities keep decaying, so hint propagation is
    // best-effort: only the tabulated part carries a hard bound, and only
    // when it is the sole part.
    let support_hint = if density.is_some() {
        match (&mu.density, &nu.density) {
            (Some(_), Some(_)) if mu.atoms.is_empty() && nu.atoms.is_empty() => hint_acc,
            _ => None,
        }
    } else {
        None
    };
    Measure::new(atoms, density, support_hint)
}

fn shift_density(d: Density, offset: f64) -> Density {
    if offset == 0.0 {
        d
    } else {
        Density::Shifted {
            inner: Box::new(d),
            offset,
        }
    }
}

fn convolve_densities(d1: &Density, d2: &Density, upper: f64) -> Result<CubicTable> {
    let mut grid = Vec::with_capacity(CONV_GRID_POINTS + 1);
    grid.push(0.0);
    let lo = upper * 1e-4;
    let (llo, lhi) = (lo.ln(), upper.ln());
    for i in 0..CONV_GRID_POINTS {
        let u = llo + (lhi - llo) * i as f64 / (CONV_GRID_POINTS - 1) as f64;
        grid.push(u.exp());
    }
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    for &t in &grid[1..] {
        let mut f = |u: f64| Ok(d1.eval(u)? * d2.eval(t - u)?);
        // Geometric packing toward both endpoints, where one factor may
        // have an integrable singularity.
        let mut pts = quad::log_spaced_breakpoints(t / 2.0, 8);
        let mirrored: Vec<f64> = pts.iter().rev().map(|&p| t - p).collect();
        pts.extend(mirrored);
        pts.dedup_by(|a, b| a == b);
        let r = quad::adaptive_with_breakpoints(&mut f, &pts, 1e-13, 1e-9, 400)?;
        values.push(r.value);
    }
    Ok(CubicTable::new(grid, values))
}

/// Convert a Stieltjes-transform measure to the equivalent Laplace measure:
/// the Stieltjes transform of `μ` equals the Laplace transform of the result,
/// whose density is `u ↦ ∫ e^(-su) dμ(s)`.
pub fn stieltjes_to_laplace(mu: &Measure) -> Result<Measure> {
    // Integrability: ∫ dμ(s)/(1+s) must be finite.
    let mut check: f64 = mu
        .atoms
        .iter()
        .map(|&(loc, m)| m / (1.0 + loc))
        .sum();
    if let Some(d) = &mu.density {
        let upper = mu
            .density_upper_bound()
            .map_err(|_| Error::Divergence("divergent integrability check".into()))?
            .unwrap();
        let mut f = |s: f64| Ok(d.eval(s)? / (1.0 + s));
        let pts = quad::log_spaced_breakpoints(upper, 10);
        let r = quad::adaptive_with_breakpoints(&mut f, &pts, 1e-12, 1e-9, 2000)?;
        check += r.value;
    }
    if !check.is_finite() {
        return Err(Error::Divergence("divergent integrability check".into()));
    }
    Measure::new(
        vec![],
        Some(Density::LaplaceOf(Box::new(mu.clone()))),
        None,
    )
}

#[derive(Serialize, Deserialize)]
struct AtomJson {
    t: f64,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    atoms: Vec<AtomJson>,
    density: Option<String>,
    support_hint: Option<f64>,
}

impl Measure {
    /// Serialize to the measure JSON schema:
    /// `{ "atoms": [{"t":..,"mass":..}], "density": "<expr in t>"|null,
    ///    "support_hint": real|null }`.
    ///
    /// Only expression densities are representable; tabulated or derived
    /// densities report an error.
    pub fn to_json(&self) -> Result<String> {
        let density = match &self.density {
            None => None,
            Some(d) => Some(
                d.as_expr()
                    .ok_or_else(|| {
                        Error::InvalidMeasure(
                            "density has no expression form; cannot serialize".into(),
                        )
                    })?
                    .print_with_var("t"),
            ),
        };
        let j = MeasureJson {
            atoms: self
                .atoms
                .iter()
                .map(|&(t, mass)| AtomJson { t, mass })
                .collect(),
            density,
            support_hint: self.support_hint,
        };
        Ok(serde_json::to_string_pretty(&j)?)
    }

    pub fn from_json(text: &str) -> Result<Measure> {
        let j: MeasureJson = serde_json::from_str(text)?;
        let density = match j.density {
            None => None,
            Some(s) => Some(Density::from_expr_text(&s)?),
        };
        Measure::new(
            j.atoms.into_iter().map(|a| (a.t, a.mass)).collect(),
            density,
            j.support_hint,
        )
    }
}
