//! Toric (Reinhardt) domain boundaries.
//!
//! A domain `{F(r1², r2²) ≤ 1}` in ℝ⁴ is described by the 1-homogeneous
//! function `F` on the closed first quadrant of the `(x, y) = (r1², r2²)`
//! plane. Everything here is expressed through the unit level set `{F = 1}`:
//! its polar description `F(cos θ, sin θ) = g(θ)`, the sector-area parameter
//! `t = 2·S(θ)` running over `[0, 2A]`, and the boundary curve `C(t)`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::{integrate, QuadOptions};
use crate::numerics::spline::CubicSpline;

/// Numerical tolerances attached to a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Absolute tolerance of the adaptive quadratures.
    pub quad_tol: f64,
    /// Largest admissible curvature of a sampled boundary curve.
    pub max_curvature: f64,
    /// Number of angular panels in the cumulative area table.
    pub table_nodes: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { quad_tol: 1e-10, max_curvature: 100.0, table_nodes: 64 }
    }
}

impl Numerics {
    fn validate(&self) -> Result<()> {
        if !(self.quad_tol > 0.0 && self.quad_tol < 1e-2) {
            return Err(Error::Config(format!("quad_tol {} out of range", self.quad_tol)));
        }
        if !(self.max_curvature > 0.0) {
            return Err(Error::Config("max_curvature must be positive".into()));
        }
        if self.table_nodes < 4 {
            return Err(Error::Config("table_nodes must be at least 4".into()));
        }
        Ok(())
    }
}

/// JSON description of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Ellipsoid {
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        numerics: Option<Numerics>,
    },
    Lp {
        p: f64,
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        numerics: Option<Numerics>,
    },
    Sampled {
        points: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        numerics: Option<Numerics>,
    },
}

impl ProfileSpec {
    pub fn build(&self) -> Result<ToricProfile> {
        match self {
            ProfileSpec::Ellipsoid { a, b, numerics } => {
                ToricProfile::with_numerics(Shape::Ellipsoid { a: *a, b: *b }, numerics.unwrap_or_default())
            }
            ProfileSpec::Lp { p, a, b, numerics } => {
                ToricProfile::with_numerics(Shape::Lp { p: *p, a: *a, b: *b }, numerics.unwrap_or_default())
            }
            ProfileSpec::Sampled { points, numerics } => {
                let pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
                ToricProfile::sampled_with_numerics(&pts, numerics.unwrap_or_default())
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Shape {
    /// `F = x/a + y/b`
    Ellipsoid { a: f64, b: f64 },
    /// `F = ((x/a)^p + (y/b)^p)^(1/p)`
    Lp { p: f64, a: f64, b: f64 },
    /// `F = |(x,y)|·g(θ)` with `g` a cubic spline in the polar angle
    Sampled { g: CubicSpline, points: Vec<(f64, f64)> },
}

/// A point of the boundary curve `C(t)` with the gradient of `F` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub t: f64,
    pub theta: f64,
    pub x: f64,
    pub y: f64,
    pub d1: f64,
    pub d2: f64,
}

/// The 1-homogeneous function `F` of a toric domain, via its unit level set.
#[derive(Debug, Clone)]
pub struct ToricProfile {
    shape: Shape,
    numerics: Numerics,
    theta_nodes: Vec<f64>,
    // cumulative t = ∫₀^θ r(φ)² dφ at the nodes
    t_nodes: Vec<f64>,
}

impl ToricProfile {
    pub fn ellipsoid(a: f64, b: f64) -> Result<Self> {
        Self::with_numerics(Shape::Ellipsoid { a, b }, Numerics::default())
    }

    pub fn lp(p: f64, a: f64, b: f64) -> Result<Self> {
        Self::with_numerics(Shape::Lp { p, a, b }, Numerics::default())
    }

    /// The round profile `F = √(x² + y²)`.
    pub fn round() -> Self {
        Self::lp(2.0, 1.0, 1.0).expect("round profile is valid")
    }

    /// Profile interpolating boundary samples of `{F = 1}`. The samples must
    /// include the two axis intercepts.
    pub fn sampled(points: &[(f64, f64)]) -> Result<Self> {
        Self::sampled_with_numerics(points, Numerics::default())
    }

    /// Samples the polar description `θ ↦ F(cos θ, sin θ)` at `n + 1` equally
    /// spaced angles and interpolates.
    pub fn sampled_from_polar<G: Fn(f64) -> f64>(polar: G, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config("need at least 4 polar samples".into()));
        }
        let points: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let theta = FRAC_PI_2 * i as f64 / n as f64;
                let r = 1.0 / polar(theta);
                if i == 0 {
                    (r, 0.0)
                } else if i == n {
                    (0.0, r)
                } else {
                    (r * theta.cos(), r * theta.sin())
                }
            })
            .collect();
        Self::sampled(&points)
    }

    fn sampled_with_numerics(points: &[(f64, f64)], numerics: Numerics) -> Result<Self> {
        let mut polar: Vec<(f64, f64)> = Vec::with_capacity(points.len());
        for &(x, y) in points {
            if !(x.is_finite() && y.is_finite()) || x < 0.0 || y < 0.0 {
                return Err(Error::Validation(format!(
                    "boundary sample ({x}, {y}) is not in the closed first quadrant"
                )));
            }
            let rho = x.hypot(y);
            if rho == 0.0 {
                return Err(Error::Validation("boundary sample at the origin".into()));
            }
            polar.push((y.atan2(x), 1.0 / rho));
        }
        polar.sort_by(|p, q| p.0.total_cmp(&q.0));
        if polar.len() < 4 {
            return Err(Error::Validation("need at least 4 boundary samples".into()));
        }
        let first = polar[0].0;
        let last = polar[polar.len() - 1].0;
        if first > 1e-9 || last < FRAC_PI_2 - 1e-9 {
            return Err(Error::Validation("boundary samples must include both axis intercepts".into()));
        }
        polar[0].0 = 0.0;
        let n = polar.len();
        polar[n - 1].0 = FRAC_PI_2;
        if polar.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Validation("boundary samples must have distinct polar angles (star-shapedness)".into()));
        }
        let (thetas, gs): (Vec<f64>, Vec<f64>) = polar.into_iter().unzip();
        let g = CubicSpline::new(thetas, gs)?;
        Self::with_numerics(Shape::Sampled { g, points: points.to_vec() }, numerics)
    }

    fn with_numerics(shape: Shape, numerics: Numerics) -> Result<Self> {
        numerics.validate()?;
        match &shape {
            Shape::Ellipsoid { a, b } => check_positive(&[("a", *a), ("b", *b)])?,
            Shape::Lp { p, a, b } => {
                check_positive(&[("a", *a), ("b", *b)])?;
                if !(p.is_finite() && *p >= 1.0) {
                    return Err(Error::Validation(format!("exponent p = {p} must be finite and at least 1")));
                }
            }
            Shape::Sampled { g, .. } => check_sampled(g, numerics.max_curvature)?,
        }
        let mut profile = ToricProfile { shape, numerics, theta_nodes: Vec::new(), t_nodes: Vec::new() };
        profile.build_area_table()?;
        Ok(profile)
    }

    pub fn numerics(&self) -> &Numerics {
        &self.numerics
    }

    /// The JSON description this profile was built from.
    pub fn spec(&self) -> ProfileSpec {
        let numerics = (self.numerics != Numerics::default()).then_some(self.numerics);
        match &self.shape {
            Shape::Ellipsoid { a, b } => ProfileSpec::Ellipsoid { a: *a, b: *b, numerics },
            Shape::Lp { p, a, b } => ProfileSpec::Lp { p: *p, a: *a, b: *b, numerics },
            Shape::Sampled { points, .. } => {
                ProfileSpec::Sampled { points: points.iter().map(|&(x, y)| [x, y]).collect(), numerics }
            }
        }
    }

    /// True when `F` is linear in the first quadrant by construction.
    pub fn is_ellipsoid(&self) -> bool {
        matches!(self.shape, Shape::Ellipsoid { .. }) || matches!(self.shape, Shape::Lp { p, .. } if p == 1.0)
    }

    /// Polar description `g(θ) = F(cos θ, sin θ)` and its derivative.
    fn polar(&self, theta: f64) -> (f64, f64) {
        let (s, c) = exact_sin_cos(theta);
        match &self.shape {
            Shape::Sampled { g, .. } => {
                let (v, d, _) = g.eval(theta);
                (v, d)
            }
            _ => {
                let (d1, d2) = self.analytic_grad(c.max(0.0), s.max(0.0));
                let f = self.analytic_value(c.max(0.0), s.max(0.0));
                // dg/dθ = ∇F · (−sin θ, cos θ)
                (f, -d1 * s + d2 * c)
            }
        }
    }

    fn analytic_value(&self, x: f64, y: f64) -> f64 {
        match self.shape {
            Shape::Ellipsoid { a, b } => x / a + y / b,
            Shape::Lp { p, a, b } => ((x / a).powf(p) + (y / b).powf(p)).powf(1.0 / p),
            Shape::Sampled { .. } => unreachable!("sampled profiles go through the polar spline"),
        }
    }

    fn analytic_grad(&self, x: f64, y: f64) -> (f64, f64) {
        match self.shape {
            Shape::Ellipsoid { a, b } => (1.0 / a, 1.0 / b),
            Shape::Lp { p, a, b } => {
                let u = x / a;
                let v = y / b;
                let f = (u.powf(p) + v.powf(p)).powf(1.0 / p);
                let scale = f.powf(1.0 - p);
                (scale * u.powf(p - 1.0) / a, scale * v.powf(p - 1.0) / b)
            }
            Shape::Sampled { .. } => unreachable!("sampled profiles go through the polar spline"),
        }
    }

    fn check_point(x: f64, y: f64) -> Result<()> {
        if !(x.is_finite() && y.is_finite()) || x < 0.0 || y < 0.0 {
            return Err(Error::Domain(format!("({x}, {y}) is outside the closed first quadrant")));
        }
        if x == 0.0 && y == 0.0 {
            return Err(Error::Domain("F is not differentiable at the origin".into()));
        }
        Ok(())
    }

    /// `F(x, y)` on the closed first quadrant.
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        if x == 0.0 && y == 0.0 {
            return Ok(0.0);
        }
        Self::check_point(x, y)?;
        Ok(match &self.shape {
            Shape::Sampled { .. } => {
                let (g, _) = self.polar(y.atan2(x));
                x.hypot(y) * g
            }
            _ => self.analytic_value(x, y),
        })
    }

    /// `(D₁F, D₂F)` at `(x, y) ≠ (0, 0)`. The gradient is 0-homogeneous.
    pub fn grad(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        Self::check_point(x, y)?;
        Ok(match &self.shape {
            Shape::Sampled { .. } => self.grad_at_angle(y.atan2(x)),
            _ => self.analytic_grad(x, y),
        })
    }

    fn grad_at_angle(&self, theta: f64) -> (f64, f64) {
        match &self.shape {
            Shape::Sampled { .. } => {
                let (g, dg) = self.polar(theta);
                let (s, c) = exact_sin_cos(theta);
                (g * c - dg * s, g * s + dg * c)
            }
            _ => {
                let (s, c) = exact_sin_cos(theta);
                self.analytic_grad(c.max(0.0), s.max(0.0))
            }
        }
    }

    /// Polar radius of the unit level set.
    fn radius(&self, theta: f64) -> f64 {
        1.0 / self.polar(theta).0
    }

    fn build_area_table(&mut self) -> Result<()> {
        let n = self.numerics.table_nodes;
        let opts =
            QuadOptions { abs_tol: (self.numerics.quad_tol / n as f64).min(1e-13), rel_tol: 1e-15, max_panels: 4000 };
        let mut thetas = Vec::with_capacity(n + 1);
        let mut ts = Vec::with_capacity(n + 1);
        thetas.push(0.0);
        ts.push(0.0);
        let mut acc = 0.0;
        for k in 0..n {
            let lo = FRAC_PI_2 * k as f64 / n as f64;
            let hi = if k + 1 == n { FRAC_PI_2 } else { FRAC_PI_2 * (k + 1) as f64 / n as f64 };
            let piece = integrate(|th| self.radius(th).powi(2), lo, hi, opts)?;
            acc += piece;
            thetas.push(hi);
            ts.push(acc);
        }
        self.theta_nodes = thetas;
        self.t_nodes = ts;
        Ok(())
    }

    /// Area `A` of `{F ≤ 1}` in the first quadrant.
    pub fn quadrant_area(&self) -> f64 {
        0.5 * self.total_t()
    }

    /// Length `2A` of the area parameter range.
    pub fn total_t(&self) -> f64 {
        *self.t_nodes.last().expect("area table is built at construction")
    }

    /// Sector-area parameter `t(θ) = 2·S(θ)`.
    pub fn t_of_theta(&self, theta: f64) -> Result<f64> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::Domain(format!("polar angle {theta} outside [0, π/2]")));
        }
        let k = self.panel_of_theta(theta);
        let partial = integrate(
            |th| self.radius(th).powi(2),
            self.theta_nodes[k],
            theta,
            QuadOptions { abs_tol: 1e-15, rel_tol: 1e-15, max_panels: 200 },
        )?;
        Ok(self.t_nodes[k] + partial)
    }

    fn panel_of_theta(&self, theta: f64) -> usize {
        let n = self.theta_nodes.len() - 1;
        let k = (theta / FRAC_PI_2 * n as f64).floor() as usize;
        k.min(n - 1)
    }

    /// Polar angle `θ(t)` of `C(t)`, by monotone inversion of `t(θ)`.
    pub fn theta_of_t(&self, t: f64) -> Result<f64> {
        let total = self.total_t();
        let slack = 1e-12 * total;
        if !(t >= -slack && t <= total + slack) {
            return Err(Error::Domain(format!("area parameter {t} outside [0, {total}]")));
        }
        let t = t.clamp(0.0, total);
        if t == 0.0 {
            return Ok(0.0);
        }
        if t == total {
            return Ok(FRAC_PI_2);
        }
        let k = match self.t_nodes.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return Ok(self.theta_nodes[i]),
            Err(i) => i - 1,
        };
        let (lo0, hi0) = (self.theta_nodes[k], self.theta_nodes[k + 1]);
        let (tlo, thi) = (self.t_nodes[k], self.t_nodes[k + 1]);
        let target = t - tlo;
        let mut lo = lo0;
        let mut hi = hi0;
        let mut theta = lo0 + (hi0 - lo0) * target / (thi - tlo);
        let opts = QuadOptions { abs_tol: 1e-16, rel_tol: 1e-15, max_panels: 200 };
        let mut residual = f64::INFINITY;
        for _ in 0..60 {
            let val = integrate(|th| self.radius(th).powi(2), lo0, theta, opts)? - target;
            residual = val.abs();
            if val > 0.0 {
                hi = theta;
            } else {
                lo = theta;
            }
            if residual <= 4.0 * f64::EPSILON * t.max(1.0) {
                return Ok(theta);
            }
            let slope = self.radius(theta).powi(2);
            let mut next = theta - val / slope;
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - theta).abs() <= 1e-16 {
                return Ok(next);
            }
            theta = next;
        }
        Err(Error::numerical(format!("inverting t(θ) at t = {t}"), residual))
    }

    fn point_at_theta(&self, t: f64, theta: f64) -> BoundaryPoint {
        let r = self.radius(theta);
        let (x, y) = if theta == 0.0 {
            (r, 0.0)
        } else if theta == FRAC_PI_2 {
            (0.0, r)
        } else {
            let (s, c) = theta.sin_cos();
            (r * c, r * s)
        };
        let (d1, d2) = self.grad_at_angle(theta);
        BoundaryPoint { t, theta, x, y, d1, d2 }
    }

    /// The boundary point `C(t)`, `t ∈ [0, 2A]`.
    pub fn boundary_point(&self, t: f64) -> Result<BoundaryPoint> {
        let theta = self.theta_of_t(t)?;
        Ok(self.point_at_theta(t.clamp(0.0, self.total_t()), theta))
    }

    /// The boundary point in polar angle `θ` (with its area parameter).
    pub fn boundary_point_at_angle(&self, theta: f64) -> Result<BoundaryPoint> {
        let t = self.t_of_theta(theta)?;
        Ok(self.point_at_theta(t, theta))
    }

    /// Axis intercepts `(a, b)`: `C(0) = (a, 0)` and `C(2A) = (0, b)`.
    pub fn intercepts(&self) -> (f64, f64) {
        (self.radius(0.0), self.radius(FRAC_PI_2))
    }

    /// Intercepts together with `(D₁F(a,0), D₂F(0,b))`, which equal `(1/a, 1/b)`.
    pub fn intercepts_with_consistency(&self) -> Intercepts {
        let (a, b) = self.intercepts();
        let (d1_a, _) = self.grad_at_angle(0.0);
        let (_, d2_b) = self.grad_at_angle(FRAC_PI_2);
        Intercepts { a, b, d1_at_a: d1_a, d2_at_b: d2_b }
    }

    /// Smallest values of `D₁F` and `D₂F` along the boundary, scanned on `n`
    /// equally spaced polar angles.
    pub fn min_partials(&self, n: usize) -> (f64, f64) {
        let n = n.max(2);
        (0..=n)
            .map(|i| self.grad_at_angle(FRAC_PI_2 * i as f64 / n as f64))
            .fold((f64::INFINITY, f64::INFINITY), |acc, (d1, d2)| (acc.0.min(d1), acc.1.min(d2)))
    }
}

/// Axis intercepts with the Euler-identity consistency values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Intercepts {
    pub a: f64,
    pub b: f64,
    pub d1_at_a: f64,
    pub d2_at_b: f64,
}

// sin/cos that are exact on the quadrant endpoints
fn exact_sin_cos(theta: f64) -> (f64, f64) {
    if theta <= 0.0 {
        (0.0, 1.0)
    } else if theta >= FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        theta.sin_cos()
    }
}

fn check_positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::Validation(format!("{name} = {v} must be positive and finite")));
        }
    }
    Ok(())
}

fn check_sampled(g: &CubicSpline, max_curvature: f64) -> Result<()> {
    let knots = g.knots();
    for w in knots.windows(2) {
        for j in 0..=8 {
            let theta = w[0] + (w[1] - w[0]) * j as f64 / 8.0;
            let (v, d1, d2) = g.eval(theta);
            if !(v > 0.0) {
                return Err(Error::Validation(format!("interpolated boundary is not star-shaped near θ = {theta:.6}")));
            }
            // polar curve r = 1/g
            let r = 1.0 / v;
            let dr = -d1 / (v * v);
            let ddr = (2.0 * d1 * d1 - v * d2) / (v * v * v);
            let kappa = (r * r + 2.0 * dr * dr - r * ddr).abs() / (r * r + dr * dr).powf(1.5);
            if kappa > max_curvature {
                return Err(Error::Validation(format!(
                    "boundary curvature {kappa:.3e} at θ = {theta:.6} exceeds bound {max_curvature:.3e} (corner?)"
                )));
            }
        }
    }
    Ok(())
}
