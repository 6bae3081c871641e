//! Hamiltonian disk maps, their action functions and Calabi invariant, and
//! the suspension contact forms `λ_c = (H + c) dt + η` on `ℝ/ℤ × 𝔻`.
//!
//! Conventions: `ω₀ = dx∧dy`, `X_H` is defined by `dH = ω₀(X_H, ·)`, i.e.
//! `ẋ = ∂H/∂y`, `ẏ = −∂H/∂x`, and the primitive is `η = ½(x dy − y dx)`.
//! For a radial Hamiltonian `H = h(|z|²)` every circle rotates rigidly with
//! angular velocity `−2h′(s)`, the action function is `σ = h − s·h′`, and
//! `CAL(H) = ∫₀¹ σ(s) ds`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::GaussLegendre;
use crate::numerics::roots::brent;
use crate::topology::{page_crossings, SeifertSurface};

/// `h(s) = Σ cₖ sᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialProfileSpec {
    Poly { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimePhase {
    #[default]
    Cos,
    Sin,
}

/// One term `coeff · xⁱ yʲ · trig(2π·freq·t)` of a general Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coeff: f64,
    #[serde(default)]
    pub x: u32,
    #[serde(default)]
    pub y: u32,
    #[serde(default)]
    pub freq: u32,
    #[serde(default)]
    pub phase: TimePhase,
}

/// JSON form of a Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    Radial { h: RadialProfileSpec },
    General { terms: Vec<Term> },
}

impl HamiltonianSpec {
    pub fn build(&self) -> Result<DiskHamiltonian> {
        match self {
            HamiltonianSpec::Radial { h: RadialProfileSpec::Poly { coeffs } } => {
                DiskHamiltonian::radial(coeffs.clone())
            }
            HamiltonianSpec::General { terms } => DiskHamiltonian::general_terms(terms.clone()),
        }
    }
}

type Closure = Arc<dyn Fn(f64, f64, f64) -> (f64, f64, f64) + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Radial(Vec<f64>),
    Terms(Vec<Term>),
    Closure(Closure),
}

/// A time-periodic Hamiltonian on the closed unit disk whose vector field is
/// tangent to the boundary.
#[derive(Clone)]
pub struct DiskHamiltonian {
    kind: Kind,
}

impl std::fmt::Debug for DiskHamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            Kind::Radial(c) => f.debug_tuple("Radial").field(c).finish(),
            Kind::Terms(t) => f.debug_tuple("Terms").field(t).finish(),
            Kind::Closure(_) => f.write_str("Closure(..)"),
        }
    }
}

fn poly(coeffs: &[f64], s: f64) -> (f64, f64, f64) {
    // Horner for the value and the first two derivatives
    let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for &c in coeffs.iter().rev() {
        d2 = d2 * s + 2.0 * d1;
        d1 = d1 * s + v;
        v = v * s + c;
    }
    (v, d1, d2)
}

fn powi(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

impl DiskHamiltonian {
    pub fn radial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("radial coefficients must be finite".into()));
        }
        Ok(DiskHamiltonian { kind: Kind::Radial(coeffs) })
    }

    pub fn zero() -> Self {
        DiskHamiltonian { kind: Kind::Radial(Vec::new()) }
    }

    pub fn general_terms(terms: Vec<Term>) -> Result<Self> {
        if terms.iter().any(|t| !t.coeff.is_finite()) {
            return Err(Error::Validation("term coefficients must be finite".into()));
        }
        let h = DiskHamiltonian { kind: Kind::Terms(terms) };
        h.validate_tangency()?;
        Ok(h)
    }

    /// A general Hamiltonian given by `(t, x, y) ↦ (H, ∂H/∂x, ∂H/∂y)`.
    pub fn general_closure<F>(f: F) -> Result<Self>
    where
        F: Fn(f64, f64, f64) -> (f64, f64, f64) + Send + Sync + 'static,
    {
        let h = DiskHamiltonian { kind: Kind::Closure(Arc::new(f)) };
        h.validate_tangency()?;
        Ok(h)
    }

    /// The same Hamiltonian, evaluated through the general (integrator) path.
    pub fn as_general(&self) -> Self {
        match &self.kind {
            Kind::Radial(c) => {
                let c = c.clone();
                DiskHamiltonian {
                    kind: Kind::Closure(Arc::new(move |_, x, y| {
                        let (h, dh, _) = poly(&c, x * x + y * y);
                        (h, 2.0 * x * dh, 2.0 * y * dh)
                    })),
                }
            }
            _ => self.clone(),
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.kind, Kind::Radial(_))
    }

    pub fn spec(&self) -> Option<HamiltonianSpec> {
        match &self.kind {
            Kind::Radial(c) => Some(HamiltonianSpec::Radial { h: RadialProfileSpec::Poly { coeffs: c.clone() } }),
            Kind::Terms(t) => Some(HamiltonianSpec::General { terms: t.clone() }),
            Kind::Closure(_) => None,
        }
    }

    /// `(h, h′, h″)` at `s = |z|²` for radial Hamiltonians.
    pub fn radial_profile(&self, s: f64) -> Option<(f64, f64, f64)> {
        match &self.kind {
            Kind::Radial(c) => Some(poly(c, s)),
            _ => None,
        }
    }

    /// Angular velocity `−2h′(s)` of the circle `|z|² = s` (radial kinds).
    pub fn rotation_rate(&self, s: f64) -> Option<f64> {
        self.radial_profile(s).map(|(_, d, _)| -2.0 * d)
    }

    /// `(H, ∂H/∂x, ∂H/∂y)` at time `t`.
    pub fn eval(&self, t: f64, x: f64, y: f64) -> (f64, f64, f64) {
        match &self.kind {
            Kind::Radial(c) => {
                let (h, dh, _) = poly(c, x * x + y * y);
                (h, 2.0 * x * dh, 2.0 * y * dh)
            }
            Kind::Terms(terms) => {
                let (mut h, mut hx, mut hy) = (0.0, 0.0, 0.0);
                for term in terms {
                    let arg = TAU * term.freq as f64 * t;
                    let time = match term.phase {
                        TimePhase::Cos => arg.cos(),
                        TimePhase::Sin => arg.sin(),
                    };
                    let c = term.coeff * time;
                    let (px, py) = (powi(x, term.x), powi(y, term.y));
                    h += c * px * py;
                    if term.x > 0 {
                        hx += c * term.x as f64 * powi(x, term.x - 1) * py;
                    }
                    if term.y > 0 {
                        hy += c * term.y as f64 * px * powi(y, term.y - 1);
                    }
                }
                (h, hx, hy)
            }
            Kind::Closure(f) => f(t, x, y),
        }
    }

    /// `X_{H_t}(x, y) = (∂H/∂y, −∂H/∂x)`.
    pub fn vector_field(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        let (_, hx, hy) = self.eval(t, x, y);
        (hy, -hx)
    }

    fn validate_tangency(&self) -> Result<()> {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for i in 0..8 {
            let t = i as f64 / 8.0;
            for j in 0..64 {
                let (s, c) = (TAU * j as f64 / 64.0).sin_cos();
                let (vx, vy) = self.vector_field(t, c, s);
                worst = worst.max((vx * c + vy * s).abs());
                scale = scale.max(vx.hypot(vy));
            }
        }
        if worst > 1e-9 * scale {
            return Err(Error::Validation(format!(
                "Hamiltonian vector field is not tangent to the boundary circle (normal component {worst:.3e})"
            )));
        }
        Ok(())
    }

    /// Smallest value of `H` on a sample grid of `ℝ/ℤ × 𝔻` (exact scan of
    /// `[0, 1]` in `s` for radial kinds).
    pub fn min_value(&self) -> f64 {
        match &self.kind {
            Kind::Radial(c) => (0..=2000).map(|i| poly(c, i as f64 / 2000.0).0).fold(f64::INFINITY, f64::min),
            _ => {
                let mut m = f64::INFINITY;
                for it in 0..16 {
                    let t = it as f64 / 16.0;
                    for is in 0..=32 {
                        let r = (is as f64 / 32.0).sqrt();
                        for ia in 0..64 {
                            let (s, c) = (TAU * ia as f64 / 64.0).sin_cos();
                            m = m.min(self.eval(t, r * c, r * s).0);
                        }
                    }
                }
                m
            }
        }
    }
}

/// Right-hand side of the flow augmented by the action density
/// `η(X_H) + H = ½(x ẏ − y ẋ) + H`.
fn augmented(h: &DiskHamiltonian, t: f64, st: [f64; 3]) -> [f64; 3] {
    let (hv, hx, hy) = h.eval(t, st[0], st[1]);
    let (vx, vy) = (hy, -hx);
    [vx, vy, 0.5 * (st[0] * vy - st[1] * vx) + hv]
}

fn rk4(h: &DiskHamiltonian, z: (f64, f64), t0: f64, t1: f64, steps: usize) -> [f64; 3] {
    let dt = (t1 - t0) / steps as f64;
    let mut st = [z.0, z.1, 0.0];
    for i in 0..steps {
        let t = t0 + i as f64 * dt;
        let add = |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
        let k1 = augmented(h, t, st);
        let k2 = augmented(h, t + 0.5 * dt, add(st, k1, 0.5 * dt));
        let k3 = augmented(h, t + 0.5 * dt, add(st, k2, 0.5 * dt));
        let k4 = augmented(h, t + dt, add(st, k3, dt));
        for j in 0..3 {
            st[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    st
}

const RK_TOL: f64 = 1e-11;

/// Fixed-step RK4 with step doubling until two successive resolutions agree.
/// Returns the endpoint and the accumulated action integral.
fn integrate_general(h: &DiskHamiltonian, z: (f64, f64), t0: f64, t1: f64) -> Result<[f64; 3]> {
    if t0 == t1 {
        return Ok([z.0, z.1, 0.0]);
    }
    let per_unit = 64usize;
    let mut steps = ((t1 - t0).abs() * per_unit as f64).ceil().max(8.0) as usize;
    let mut prev = rk4(h, z, t0, t1, steps);
    loop {
        steps *= 2;
        let next = rk4(h, z, t0, t1, steps);
        let diff = (0..3).map(|j| (next[j] - prev[j]).abs()).fold(0.0, f64::max);
        if diff < RK_TOL {
            return Ok(next);
        }
        if steps > (1 << 22) {
            return Err(Error::numerical("RK4 step doubling did not converge", diff));
        }
        prev = next;
    }
}

fn check_in_disk(z: (f64, f64)) -> Result<()> {
    let r = z.0.hypot(z.1);
    if !(r <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("point at radius {r} is outside the unit disk")));
    }
    Ok(())
}

fn rotate(z: (f64, f64), angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    (c * z.0 - s * z.1, s * z.0 + c * z.1)
}

/// `φ_H` from time `t0` to `t1` applied to `z`.
pub fn flow_map(h: &DiskHamiltonian, z: (f64, f64), t0: f64, t1: f64) -> Result<(f64, f64)> {
    check_in_disk(z)?;
    if let Some(rate) = h.rotation_rate(z.0 * z.0 + z.1 * z.1) {
        return Ok(rotate(z, rate * (t1 - t0)));
    }
    let st = integrate_general(h, z, t0, t1)?;
    let r = st[0].hypot(st[1]);
    if r > 1.0 + 1e-9 {
        return Err(Error::Validation(format!(
            "trajectory left the disk (radius {r}); the vector field is not tangent to the boundary"
        )));
    }
    Ok((st[0], st[1]))
}

/// Action `σ_{H,η}(z) = ∫_{φ^{[0,1]}(z)} η + ∫₀¹ H_t(φᵗ(z)) dt`.
pub fn action(h: &DiskHamiltonian, z: (f64, f64)) -> Result<f64> {
    action_over(h, z, 1)
}

/// `σ_{H,η}` accumulated over `k` periods, i.e. `σ_H(z, k)` for a
/// `k`-periodic point.
fn action_over(h: &DiskHamiltonian, z: (f64, f64), k: u32) -> Result<f64> {
    check_in_disk(z)?;
    if let Some((hv, dh, _)) = h.radial_profile(z.0 * z.0 + z.1 * z.1) {
        let s = z.0 * z.0 + z.1 * z.1;
        return Ok(k as f64 * (hv - s * dh));
    }
    Ok(integrate_general(h, z, 0.0, k as f64)?[2])
}

/// Action with respect to the primitive `η + dg`.
pub fn action_shifted(h: &DiskHamiltonian, z: (f64, f64), g: &dyn Fn(f64, f64) -> f64) -> Result<f64> {
    let w = flow_map(h, z, 0.0, 1.0)?;
    Ok(action(h, z)? + g(w.0, w.1) - g(z.0, z.1))
}

/// `(1/π)∫_𝔻 f ω₀` with Gauss–Legendre in `s = r²` and the trapezoid rule in
/// the angle (`dx dy = ½ ds dθ`).
fn disk_average<F: FnMut(f64, f64) -> Result<f64>>(quad_n: usize, mut f: F) -> Result<f64> {
    let rule = GaussLegendre::new(quad_n);
    let n_theta = 2 * quad_n.max(4);
    let mut total = 0.0;
    for (s, w) in rule.mapped(0.0, 1.0) {
        let r = s.sqrt();
        let mut ring = 0.0;
        for j in 0..n_theta {
            let (sn, cs) = (TAU * j as f64 / n_theta as f64).sin_cos();
            ring += f(r * cs, r * sn)?;
        }
        total += w * 0.5 * ring * TAU / n_theta as f64;
    }
    Ok(total / PI)
}

/// Calabi invariant `CAL(H) = (1/π)∫_𝔻 σ_{H,η} ω₀`.
pub fn calabi(h: &DiskHamiltonian, quad_n: usize) -> Result<f64> {
    if quad_n < 2 {
        return Err(Error::Config("calabi quadrature needs at least 2 nodes".into()));
    }
    if let Kind::Radial(c) = &h.kind {
        let rule = GaussLegendre::new(quad_n.max(c.len() + 1));
        return Ok(rule.integrate(
            |s| {
                let (v, d, _) = poly(c, s);
                v - s * d
            },
            0.0,
            1.0,
        ));
    }
    disk_average(quad_n, |x, y| action(h, (x, y)))
}

/// Calabi invariant computed with the primitive `η + dg` (which must give
/// the same value).
pub fn calabi_shifted(h: &DiskHamiltonian, quad_n: usize, g: &dyn Fn(f64, f64) -> f64) -> Result<f64> {
    disk_average(quad_n, |x, y| action_shifted(h, (x, y), g))
}

/// A `k`-periodic point of the time-one map `h = φ¹_H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicPoint {
    pub z: (f64, f64),
    pub k: u32,
    /// `σ_H(z, k)`.
    pub action: f64,
    /// `σ̄_H(z) = σ_H(z, k)/k`.
    pub mean_action: f64,
    /// For radial kinds: the invariant circle `|z|² = s` of which `z` is a
    /// representative.
    pub s: Option<f64>,
    /// For radial kinds: a whole interval `[s₀, s₁]` of such circles when the
    /// resonance holds identically there.
    pub continuum: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicPointSet {
    pub points: Vec<PeriodicPoint>,
    /// Newton starts that did not converge (general kinds).
    pub skipped: usize,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Periodic points of primitive period `k ≤ k_max`.
pub fn periodic_points(h: &DiskHamiltonian, k_max: u32, grid_n: usize) -> Result<PeriodicPointSet> {
    if k_max < 1 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    if grid_n < 2 {
        return Err(Error::Config("grid_n must be at least 2".into()));
    }
    if h.is_radial() {
        radial_periodic_points(h, k_max, grid_n)
    } else {
        general_periodic_points(h, k_max, grid_n)
    }
}

fn radial_point(h: &DiskHamiltonian, s: f64, k: u32, continuum: Option<(f64, f64)>) -> PeriodicPoint {
    let (hv, dh, _) = h.radial_profile(s).expect("radial");
    let mean = hv - s * dh;
    PeriodicPoint { z: (s.sqrt(), 0.0), k, action: k as f64 * mean, mean_action: mean, s: Some(s), continuum }
}

fn radial_periodic_points(h: &DiskHamiltonian, k_max: u32, grid_n: usize) -> Result<PeriodicPointSet> {
    let ss: Vec<f64> = (0..=grid_n).map(|i| i as f64 / grid_n as f64).collect();
    let rates: Vec<f64> = ss.iter().map(|&s| h.rotation_rate(s).expect("radial")).collect();
    let scale = rates.iter().fold(1.0f64, |m, r| m.max(r.abs()));
    let mut points = vec![radial_point(h, 0.0, 1, None)];
    for k in 1..=k_max {
        let kf = k as f64;
        let lo = rates.iter().fold(f64::INFINITY, |m, &r| m.min(kf * r));
        let hi = rates.iter().fold(f64::NEG_INFINITY, |m, &r| m.max(kf * r));
        let tol = 1e-12 * kf * scale;
        let m_lo = ((lo - tol) / TAU).ceil() as i64;
        let m_hi = ((hi + tol) / TAU).floor() as i64;
        for m in m_lo..=m_hi {
            let primitive = if m == 0 { k == 1 } else { gcd(m.unsigned_abs(), k as u64) == 1 };
            if !primitive {
                continue;
            }
            let target = TAU * m as f64;
            let f: Vec<f64> = rates.iter().map(|r| kf * r - target).collect();
            let zero = |v: f64| v.abs() <= tol;
            let mut i = 0;
            while i < f.len() {
                if zero(f[i]) {
                    let start = i;
                    while i + 1 < f.len() && zero(f[i + 1]) {
                        i += 1;
                    }
                    if i > start {
                        let (a, b) = (ss[start], ss[i]);
                        points.push(radial_point(h, 0.5 * (a + b), k, Some((a, b))));
                    } else if ss[i] > 1e-14 {
                        points.push(radial_point(h, ss[i], k, None));
                    }
                    i += 1;
                    continue;
                }
                if i + 1 < f.len() && !zero(f[i + 1]) && f[i].signum() != f[i + 1].signum() {
                    let root = brent(|s| kf * h.rotation_rate(s).expect("radial") - target, ss[i], ss[i + 1], 1e-15)?;
                    if root > 1e-14 {
                        points.push(radial_point(h, root, k, None));
                    }
                }
                i += 1;
            }
        }
    }
    Ok(PeriodicPointSet { points, skipped: 0 })
}

fn iterate(h: &DiskHamiltonian, z: (f64, f64), k: u32) -> Result<(f64, f64)> {
    flow_map(h, z, 0.0, k as f64)
}

fn newton_periodic(h: &DiskHamiltonian, z0: (f64, f64), k: u32) -> Option<(f64, f64)> {
    let residual = |z: (f64, f64)| -> Option<(f64, f64)> {
        let w = iterate(h, z, k).ok()?;
        Some((w.0 - z.0, w.1 - z.1))
    };
    let mut z = z0;
    let mut f = residual(z)?;
    for _ in 0..40 {
        let norm = f.0.hypot(f.1);
        if norm < 1e-11 {
            return Some(z);
        }
        let eps = 1e-6;
        let fx = residual((z.0 + eps, z.1))?;
        let fxm = residual((z.0 - eps, z.1))?;
        let fy = residual((z.0, z.1 + eps))?;
        let fym = residual((z.0, z.1 - eps))?;
        let j = [
            [(fx.0 - fxm.0) / (2.0 * eps), (fy.0 - fym.0) / (2.0 * eps)],
            [(fx.1 - fxm.1) / (2.0 * eps), (fy.1 - fym.1) / (2.0 * eps)],
        ];
        // Levenberg–Marquardt step on the 2×2 system
        let mut mu = 1e-12;
        let mut accepted = false;
        for _ in 0..30 {
            let a = [
                [j[0][0] * j[0][0] + j[1][0] * j[1][0] + mu, j[0][0] * j[0][1] + j[1][0] * j[1][1]],
                [j[0][1] * j[0][0] + j[1][1] * j[1][0], j[0][1] * j[0][1] + j[1][1] * j[1][1] + mu],
            ];
            let g = [j[0][0] * f.0 + j[1][0] * f.1, j[0][1] * f.0 + j[1][1] * f.1];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            if det.abs() > 0.0 {
                let dx = -(a[1][1] * g[0] - a[0][1] * g[1]) / det;
                let dy = -(a[0][0] * g[1] - a[1][0] * g[0]) / det;
                let mut cand = (z.0 + dx, z.1 + dy);
                let r = cand.0.hypot(cand.1);
                if r > 1.0 {
                    cand = (cand.0 / r, cand.1 / r);
                }
                if let Some(fc) = residual(cand) {
                    if fc.0.hypot(fc.1) < norm {
                        z = cand;
                        f = fc;
                        accepted = true;
                        break;
                    }
                }
            }
            mu = if mu < 1e-8 { 1e-8 } else { mu * 10.0 };
        }
        if !accepted {
            return None;
        }
    }
    (f.0.hypot(f.1) < 1e-11).then_some(z)
}

fn general_periodic_points(h: &DiskHamiltonian, k_max: u32, grid_n: usize) -> Result<PeriodicPointSet> {
    let mut points: Vec<PeriodicPoint> = Vec::new();
    let mut orbits: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut skipped = 0;
    for k in 1..=k_max {
        for i in 0..grid_n {
            for j in 0..grid_n {
                let x = -1.0 + (2 * i + 1) as f64 / grid_n as f64;
                let y = -1.0 + (2 * j + 1) as f64 / grid_n as f64;
                if x.hypot(y) >= 1.0 {
                    continue;
                }
                let Some(z) = newton_periodic(h, (x, y), k) else {
                    skipped += 1;
                    continue;
                };
                // primitive period: no proper divisor already closes the orbit
                let proper = (1..k)
                    .filter(|d| k % d == 0)
                    .any(|d| iterate(h, z, d).map(|w| (w.0 - z.0).hypot(w.1 - z.1) < 1e-6).unwrap_or(false));
                if proper {
                    continue;
                }
                let dup = points
                    .iter()
                    .zip(&orbits)
                    .any(|(p, orbit)| p.k == k && orbit.iter().any(|w| (w.0 - z.0).hypot(w.1 - z.1) < 1e-6));
                if dup {
                    continue;
                }
                let mut orbit = vec![z];
                for step in 1..k {
                    orbit.push(iterate(h, z, step)?);
                }
                let act = action_over(h, z, k)?;
                points.push(PeriodicPoint { z, k, action: act, mean_action: act / k as f64, s: None, continuum: None });
                orbits.push(orbit);
            }
        }
    }
    Ok(PeriodicPointSet { points, skipped })
}

/// `σ̄_H(z)` recomputed over `m·k` periods.
pub fn mean_action_over(h: &DiskHamiltonian, point: &PeriodicPoint, multiple: u32) -> Result<f64> {
    let periods = point.k * multiple;
    let total =
        if h.is_radial() { action_over(&h.as_general(), point.z, periods)? } else { action_over(h, point.z, periods)? };
    Ok(total / periods as f64)
}

/// Default suspension constant `max(0, −min H) + 1`.
pub fn default_suspension_constant(h: &DiskHamiltonian) -> f64 {
    (-h.min_value()).max(0.0) + 1.0
}

/// Contact data of `λ_c = (H + c)dt + η` on `ℝ/ℤ × 𝔻`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Suspension {
    pub c: f64,
    pub cal: f64,
    /// `π(CAL(H) + c)`.
    pub volume: f64,
    /// `∫_M λ_c∧dλ_c` by direct quadrature.
    pub volume_quadrature: f64,
    /// Contact area `T(Σ) = ∫_𝔻 dη = π` of the page `{0} × 𝔻`.
    pub page_area: f64,
}

/// `∫_M λ_c∧dλ_c = ∫₀¹∫_𝔻 (H + c − ½(x H_x + y H_y)) dx dy dt`.
pub fn suspension_volume(h: &DiskHamiltonian, c: f64, n: usize) -> f64 {
    let rule = GaussLegendre::new(n);
    let n_theta = 2 * n.max(4);
    let t_nodes: Vec<(f64, f64)> = if h.is_radial() { vec![(0.0, 1.0)] } else { rule.mapped(0.0, 1.0).collect() };
    let mut total = 0.0;
    for &(t, wt) in &t_nodes {
        for (s, ws) in rule.mapped(0.0, 1.0) {
            let r = s.sqrt();
            let mut ring = 0.0;
            for j in 0..n_theta {
                let (sn, cs) = (TAU * j as f64 / n_theta as f64).sin_cos();
                let (x, y) = (r * cs, r * sn);
                let (hv, hx, hy) = h.eval(t, x, y);
                ring += hv + c - 0.5 * (x * hx + y * hy);
            }
            total += wt * ws * 0.5 * ring * TAU / n_theta as f64;
        }
    }
    total
}

impl Suspension {
    pub fn new(h: &DiskHamiltonian, c: f64, quad_n: usize) -> Result<Self> {
        let min_h = h.min_value();
        if !(min_h + c > 0.0) {
            return Err(Error::Precondition(format!(
                "H + c must be positive for λ_c to be a contact form (min H = {min_h}, c = {c})"
            )));
        }
        let cal = calabi(h, quad_n)?;
        Ok(Suspension {
            c,
            cal,
            volume: PI * (cal + c),
            volume_quadrature: suspension_volume(h, c, quad_n),
            page_area: PI,
        })
    }
}

/// One periodic point read through the suspension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DictionaryRow {
    pub z: (f64, f64),
    pub k: u32,
    pub action: f64,
    pub mean_action: f64,
    /// `∫_γ λ_c` along the closed orbit through `(0, z)`.
    pub period: f64,
    /// `σ_H(z, k) + k·c`.
    pub period_from_action: f64,
    /// Signed crossings with the page `{0} × 𝔻`.
    pub crossings: i64,
    /// `int·vol/(T·T(Σ))`.
    pub rho: f64,
    /// `ρ ≥ 1 − ε`.
    pub rho_at_least: bool,
    /// `CAL/(1−ε) + εc/(1−ε)`; `ρ ≥ 1 − ε` iff this is `≥ σ̄`.
    pub upper_action_bound: f64,
    /// `ρ ≤ 1 + ε`.
    pub rho_at_most: bool,
    /// `CAL/(1+ε) − εc/(1+ε)`; `ρ ≤ 1 + ε` iff this is `≤ σ̄`.
    pub lower_action_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DictionaryReport {
    pub suspension: Suspension,
    pub epsilon: f64,
    pub rows: Vec<DictionaryRow>,
    pub warnings: Vec<String>,
}

/// Settings for [`suspension_dictionary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DictionaryOptions {
    pub epsilon: f64,
    pub quad_n: usize,
    /// Gauss nodes per unit time for the period line integral.
    pub line_nodes: usize,
    /// Polyline samples per unit time for crossing counts.
    pub path_samples: usize,
}

impl Default for DictionaryOptions {
    fn default() -> Self {
        DictionaryOptions { epsilon: 0.1, quad_n: 32, line_nodes: 40, path_samples: 64 }
    }
}

/// Period of the closed orbit of `λ_c` through `(0, z)` as a line integral of
/// `λ_c = (H + c)dt + η` over `k` turns.
fn suspension_period(h: &DiskHamiltonian, z: (f64, f64), k: u32, c: f64, nodes: usize) -> Result<f64> {
    let rule = GaussLegendre::new(nodes);
    let mut total = 0.0;
    for turn in 0..k {
        let t0 = turn as f64;
        let start = flow_map(h, z, 0.0, t0)?;
        for (t, w) in rule.mapped(t0, t0 + 1.0) {
            let p = if h.is_radial() { flow_map(h, z, 0.0, t)? } else { flow_map(h, start, t0, t)? };
            let (hv, hx, hy) = h.eval(t, p.0, p.1);
            let (vx, vy) = (hy, -hx);
            total += w * (hv + c + 0.5 * (p.0 * vy - p.1 * vx));
        }
    }
    Ok(total)
}

/// Dictionary between periodic points of `h = φ¹_H` and closed Reeb orbits
/// of the suspension: `T(γ) = σ_H(z, k) + kc`, `int(γ, {0}×𝔻) = k`, and the
/// pairing `ρ(γ, Σ)` against the mean-action bounds.
pub fn suspension_dictionary(
    h: &DiskHamiltonian,
    c: f64,
    points: &[PeriodicPoint],
    opts: &DictionaryOptions,
) -> Result<DictionaryReport> {
    let eps = opts.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("epsilon = {eps} must lie in (0, 1)")));
    }
    let susp = Suspension::new(h, c, opts.quad_n)?;
    let page = SeifertSurface::diskmap_page(0.0);
    let mut rows = Vec::with_capacity(points.len());
    let mut warnings = Vec::new();
    for p in points {
        let period = suspension_period(h, p.z, p.k, c, opts.line_nodes)?;
        let n = opts.path_samples * p.k as usize;
        let mut path = Vec::with_capacity(n + 1);
        let mut cur = p.z;
        for i in 0..=n {
            let t = i as f64 / opts.path_samples as f64;
            if i > 0 {
                cur = flow_map(h, cur, (i - 1) as f64 / opts.path_samples as f64, t)?;
            }
            path.push([t, cur.0, cur.1]);
        }
        let cr = page_crossings(&path, &page)?;
        warnings.extend(cr.warnings);
        let rho = cr.signed_total as f64 * susp.volume / (period * susp.page_area);
        let upper = (susp.cal + eps * c) / (1.0 - eps);
        let lower = (susp.cal - eps * c) / (1.0 + eps);
        rows.push(DictionaryRow {
            z: p.z,
            k: p.k,
            action: p.action,
            mean_action: p.mean_action,
            period,
            period_from_action: p.action + p.k as f64 * c,
            crossings: cr.signed_total,
            rho,
            rho_at_least: rho >= 1.0 - eps,
            upper_action_bound: upper,
            rho_at_most: rho <= 1.0 + eps,
            lower_action_bound: lower,
        });
    }
    Ok(DictionaryReport { suspension: susp, epsilon: eps, rows, warnings })
}

/// Boundary normalization of a Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryFlags {
    /// `H_t|_{∂𝔻} = 0` for all `t`.
    pub vanishes_on_boundary: bool,
    /// `h` is a rigid rotation on an annulus at the boundary.
    pub rigid_rotation_near_boundary: bool,
    /// Rotation angle `ρ_H` of `h|_{∂𝔻}` (radians, lifted along the isotopy).
    pub rotation: f64,
    /// The hypothesis `CAL(H) < ρ_H/2`.
    pub cal_below_half_rotation: bool,
}

pub fn boundary_flags(h: &DiskHamiltonian, cal: f64) -> Result<BoundaryFlags> {
    let mut max_boundary: f64 = 0.0;
    for i in 0..8 {
        for j in 0..64 {
            let (s, c) = (TAU * j as f64 / 64.0).sin_cos();
            max_boundary = max_boundary.max(h.eval(i as f64 / 8.0, c, s).0.abs());
        }
    }
    let (rotation, rigid) = if let Some(rate) = h.rotation_rate(1.0) {
        let rigid = (0..=50).all(|i| {
            let s = 0.95 + 0.05 * i as f64 / 50.0;
            (h.rotation_rate(s).expect("radial") - rate).abs() < 1e-9
        });
        (rate, rigid)
    } else {
        // lift the boundary angle along the isotopy
        let steps = 256;
        let mut z = (1.0, 0.0);
        let mut angle = 0.0;
        for i in 0..steps {
            let w = flow_map(h, z, i as f64 / steps as f64, (i + 1) as f64 / steps as f64)?;
            angle += (z.0 * w.1 - z.1 * w.0).atan2(z.0 * w.0 + z.1 * w.1);
            z = w;
        }
        let rigid = [0.95f64, 0.975].iter().all(|&r| {
            (0..8).all(|j| {
                let z0 = rotate((r, 0.0), TAU * j as f64 / 8.0);
                flow_map(h, z0, 0.0, 1.0)
                    .map(|w| {
                        let expect = rotate(z0, angle);
                        (w.0 - expect.0).hypot(w.1 - expect.1) < 1e-8
                    })
                    .unwrap_or(false)
            })
        });
        (angle, rigid)
    };
    Ok(BoundaryFlags {
        vanishes_on_boundary: max_boundary < 1e-12,
        rigid_rotation_near_boundary: rigid,
        rotation,
        cal_below_half_rotation: cal < 0.5 * rotation,
    })
}

/// Empirical check of the mean-action inequalities `σ̄ ≤ CAL + ε` and
/// `σ̄ ≥ CAL − ε` over the computed periodic points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanActionCheck {
    pub cal: f64,
    pub epsilon: f64,
    /// Periodic point of smallest mean action, if it satisfies `σ̄ ≤ CAL + ε`.
    pub witness_low: Option<PeriodicPoint>,
    /// Periodic point of largest mean action, if it satisfies `σ̄ ≥ CAL − ε`.
    pub witness_high: Option<PeriodicPoint>,
    pub flags: BoundaryFlags,
    pub points_examined: usize,
}

pub fn mean_action_theorem_check(
    h: &DiskHamiltonian,
    epsilon: f64,
    k_max: u32,
    grid_n: usize,
    quad_n: usize,
) -> Result<MeanActionCheck> {
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("epsilon = {epsilon} must be positive")));
    }
    let cal = calabi(h, quad_n)?;
    let set = periodic_points(h, k_max, grid_n)?;
    mean_action_check_with(h, epsilon, cal, &set.points)
}

/// [`mean_action_theorem_check`] over precomputed periodic points.
pub fn mean_action_check_with(
    h: &DiskHamiltonian,
    epsilon: f64,
    cal: f64,
    points: &[PeriodicPoint],
) -> Result<MeanActionCheck> {
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("epsilon = {epsilon} must be positive")));
    }
    let by_mean = |a: &&PeriodicPoint, b: &&PeriodicPoint| a.mean_action.total_cmp(&b.mean_action);
    let low = points.iter().min_by(by_mean).filter(|p| p.mean_action <= cal + epsilon).copied();
    let high = points.iter().max_by(by_mean).filter(|p| p.mean_action >= cal - epsilon).copied();
    Ok(MeanActionCheck {
        cal,
        epsilon,
        witness_low: low,
        witness_high: high,
        flags: boundary_flags(h, cal)?,
        points_examined: points.len(),
    })
}
