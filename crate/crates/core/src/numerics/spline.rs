//! Clamped cubic interpolating spline (C² on the knot range).

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    /// Interpolates `(xs, ys)`; `xs` must be strictly increasing with at least
    /// four knots. End slopes are taken from the cubic through the first (last)
    /// four knots.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 4 || ys.len() != n {
            return Err(Error::Validation(format!(
                "cubic spline needs at least 4 knots with matching values (got {n})"
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("spline knots must be strictly increasing".into()));
        }
        let s0 = lagrange_slope(&xs[..4], &ys[..4], xs[0]);
        let sn = lagrange_slope(&xs[n - 4..], &ys[n - 4..], xs[n - 1]);

        // tridiagonal system for the knot second derivatives
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let h0 = xs[1] - xs[0];
        diag[0] = h0 / 3.0;
        sup[0] = h0 / 6.0;
        rhs[0] = (ys[1] - ys[0]) / h0 - s0;
        for i in 1..n - 1 {
            let hl = xs[i] - xs[i - 1];
            let hr = xs[i + 1] - xs[i];
            sub[i] = hl / 6.0;
            diag[i] = (hl + hr) / 3.0;
            sup[i] = hr / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / hr - (ys[i] - ys[i - 1]) / hl;
        }
        let hn = xs[n - 1] - xs[n - 2];
        sub[n - 1] = hn / 6.0;
        diag[n - 1] = hn / 3.0;
        rhs[n - 1] = sn - (ys[n - 1] - ys[n - 2]) / hn;

        // Thomas algorithm
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Ok(CubicSpline { xs, ys, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value, first and second derivative at `x` (cubic extrapolation outside
    /// the knot range).
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        (value, d1, d2)
    }
}

fn lagrange_slope(xs: &[f64], ys: &[f64], at: f64) -> f64 {
    // derivative of the interpolating polynomial through the given points
    let n = xs.len();
    let mut slope = 0.0;
    for j in 0..n {
        let mut denom = 1.0;
        for k in 0..n {
            if k != j {
                denom *= xs[j] - xs[k];
            }
        }
        let mut num = 0.0;
        for i in 0..n {
            if i == j {
                continue;
            }
            let mut prod = 1.0;
            for (k, xk) in xs.iter().enumerate() {
                if k != j && k != i {
                    prod *= at - xk;
                }
            }
            num += prod;
        }
        slope += ys[j] * num / denom;
    }
    slope
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x + 0.25 * x * x * x;
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.3 + 0.01 * (i * i) as f64).collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        let s = CubicSpline::new(xs, ys).unwrap();
        for &x in &[0.05, 0.77, 1.9, 2.6] {
            let (v, d1, d2) = s.eval(x);
            assert!((v - f(x)).abs() < 1e-12);
            assert!((d1 - (-2.0 + x + 0.75 * x * x)).abs() < 1e-11);
            assert!((d2 - (1.0 + 1.5 * x)).abs() < 1e-10);
        }
    }

    #[test]
    fn converges_on_smooth_data() {
        let n = 65;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let ys = xs.iter().map(|x: &f64| x.sin()).collect();
        let s = CubicSpline::new(xs, ys).unwrap();
        let (v, d1, _) = s.eval(0.4321);
        assert!((v - 0.4321f64.sin()).abs() < 1e-8);
        assert!((d1 - 0.4321f64.cos()).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(CubicSpline::new(vec![0.0, 1.0, 1.0, 2.0], vec![0.0; 4]).is_err());
        assert!(CubicSpline::new(vec![0.0, 1.0], vec![0.0; 2]).is_err());
    }
}
