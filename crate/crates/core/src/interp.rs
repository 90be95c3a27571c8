//! Shape-preserving cubic Hermite interpolation for tabulated densities.
//!
//! Slopes come from the three-point parabolic estimate on the non-uniform
//! grid. Where neighbouring secants share a sign the slope is clamped to
//! `3·min(|δ_left|, |δ_right|)` (Fritsch–Carlson condition), which prevents
//! overshoot — a spurious negative dip in a tabulated density would fake a
//! CM refutation. At interior extrema the parabolic slope is kept instead of
//! being zeroed; zero slopes there would cost an order of accuracy exactly
//! where convolution results peak.

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CubicTable {
    grid: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicTable {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> CubicTable {
        assert!(grid.len() >= 2 && grid.len() == values.len());
        let n = grid.len();
        let mut delta = vec![0.0; n - 1];
        for i in 0..n - 1 {
            delta[i] = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
        }
        let mut slopes = vec![0.0; n];
        for i in 0..n {
            let m = if i == 0 {
                parabolic_end(grid[0], grid[1], grid[2], values[0], values[1], values[2])
            } else if i == n - 1 {
                parabolic_end(
                    grid[n - 1],
                    grid[n - 2],
                    grid[n - 3],
                    values[n - 1],
                    values[n - 2],
                    values[n - 3],
                )
            } else {
                let h0 = grid[i] - grid[i - 1];
                let h1 = grid[i + 1] - grid[i];
                (delta[i - 1] * h1 + delta[i] * h0) / (h0 + h1)
            };
            slopes[i] = m;
        }
        // Fritsch–Carlson clamp inside monotone runs.
        for i in 0..n {
            let left = if i > 0 { Some(delta[i - 1]) } else { None };
            let right = if i < n - 1 { Some(delta[i]) } else { None };
            match (left, right) {
                (Some(l), Some(r)) if l * r > 0.0 => {
                    let cap = 3.0 * l.abs().min(r.abs());
                    if slopes[i].abs() > cap {
                        slopes[i] = slopes[i].signum() * cap;
                    }
                    if slopes[i] * l < 0.0 {
                        slopes[i] = 0.0;
                    }
                }
                (Some(l), None) => {
                    if slopes[i] * l < 0.0 {
                        slopes[i] = 0.0;
                    } else if slopes[i].abs() > 3.0 * l.abs() {
                        slopes[i] = slopes[i].signum() * 3.0 * l.abs();
                    }
                }
                (None, Some(r)) => {
                    if slopes[i] * r < 0.0 {
                        slopes[i] = 0.0;
                    } else if slopes[i].abs() > 3.0 * r.abs() {
                        slopes[i] = slopes[i].signum() * 3.0 * r.abs();
                    }
                }
                _ => {}
            }
        }
        CubicTable {
            grid,
            values,
            slopes,
        }
    }

    pub fn upper(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn scale_values(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
        for m in &mut self.slopes {
            *m *= a;
        }
    }

    /// Interpolated value; 0 outside the tabulated range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.grid.len();
        if t < self.grid[0] || t > self.grid[n - 1] {
            return 0.0;
        }
        let i = match self
            .grid
            .binary_search_by(|g| g.partial_cmp(&t).unwrap())
        {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let h = self.grid[i + 1] - self.grid[i];
        let s = (t - self.grid[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + m0 * (s3 - 2.0 * s2 + s)
            + y1 * (-2.0 * s3 + 3.0 * s2)
            + m1 * (s3 - s2)
    }

    /// Exact integral of the piecewise-cubic interpolant over its range.
    #[cfg(test)]
    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.grid.len() - 1 {
            let h = self.grid[i + 1] - self.grid[i];
            acc += h * (self.values[i] + self.values[i + 1]) / 2.0
                + h * h * (self.slopes[i] - self.slopes[i + 1]) / 12.0;
        }
        acc
    }
}

fn parabolic_end(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    // Derivative at x0 of the parabola through the three points.
    let d1 = (y1 - y0) / (x1 - x0);
    let d2 = (y2 - y0) / (x2 - x0);
    (d1 * (x2 - x0) - d2 * (x1 - x0)) / (x2 - x1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function_near_peak() {
        // t e^{-t} sampled on a log grid; the peak at t = 1 is the hard spot.
        let n = 512;
        let lo: f64 = 5e-3;
        let hi: f64 = 40.0;
        let mut grid = vec![0.0];
        for i in 0..n {
            let u = lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64;
            grid.push(u.exp());
        }
        let values: Vec<f64> = grid.iter().map(|&t| t * (-t).exp()).collect();
        let tab = CubicTable::new(grid, values);
        for &t in &[0.5f64, 0.9, 1.0, 1.1, 2.0, 5.0] {
            let want = t * (-t).exp();
            let got = tab.eval(t);
            assert!(
                (got - want).abs() < 5e-7,
                "t={t} got={got} want={want} err={}",
                (got - want).abs()
            );
        }
    }

    #[test]
    fn no_negative_dip_on_positive_decaying_data() {
        let grid: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = grid.iter().map(|&t| (-3.0 * t).exp()).collect();
        let tab = CubicTable::new(grid, values);
        let mut t = 0.0;
        while t < 9.9 {
            assert!(tab.eval(t) >= 0.0, "dip at t={t}");
            t += 0.013;
        }
    }

    #[test]
    fn integral_of_interpolant() {
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        let values: Vec<f64> = grid.iter().map(|&t| (-t).exp()).collect();
        let tab = CubicTable::new(grid, values);
        let want = 1.0 - (-20.0f64).exp();
        let got = tab.integral();
        assert!((got - want).abs() < 1e-6, "got={got} want={want}");
    }
}
