//! Systolic pairings of periodic Reeb orbits on toric boundaries.
//!
//! On `∂{F(r1², r2²) ≤ 1}` the Reeb flow preserves the tori over the points
//! `C(t)` of the boundary curve. A torus is rational when `∇F` is a positive
//! multiple of a primitive integer vector `(p, q)`; its orbits then have
//! period `πp/D₁F = πq/D₂F`. The two special orbits `γ₁ = {r₁ = 0}` (at
//! `t = 2A`) and `γ₂ = {r₂ = 0}` (at `t = 0`) behave like the classes `(0, 1)`
//! and `(1, 0)`.
//!
//! For orbits on tori at parameters `s < u` the pairing is
//! `ρ = 2A·D₁F(C(s))·D₂F(C(u))`: the orbit closer to `γ₁` contributes `D₂F`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::cfrac::direction_approximation;
use crate::numerics::quad::{integrate, QuadOptions};
use crate::numerics::roots::{brent, golden_max};
use crate::toric::ToricProfile;

/// Contact volume `vol(λ₀) = 2π²A` of a toric boundary.
pub fn contact_volume(profile: &ToricProfile) -> f64 {
    2.0 * PI * PI * profile.quadrant_area()
}

/// A periodic orbit of the toric Reeb flow, identified by its torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "orbit", rename_all = "snake_case")]
pub enum Orbit {
    /// `γ₁ = {r₁ = 0}`, the point `(0, b)` of the boundary curve.
    Gamma1,
    /// `γ₂ = {r₂ = 0}`, the point `(a, 0)` of the boundary curve.
    Gamma2,
    /// Any orbit on the invariant torus over `C(t)`, `0 < t < 2A`.
    Torus { t: f64 },
}

impl Orbit {
    pub fn parameter(&self, profile: &ToricProfile) -> f64 {
        match *self {
            Orbit::Gamma1 => profile.total_t(),
            Orbit::Gamma2 => 0.0,
            Orbit::Torus { t } => t,
        }
    }
}

/// Which special orbit bounds a disk surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialOrbit {
    Gamma1,
    Gamma2,
}

impl SpecialOrbit {
    pub fn orbit(self) -> Orbit {
        match self {
            SpecialOrbit::Gamma1 => Orbit::Gamma1,
            SpecialOrbit::Gamma2 => Orbit::Gamma2,
        }
    }
}

/// Primitive period of a special orbit: `T(γ₁) = π/D₂F(0,b)`, `T(γ₂) = π/D₁F(a,0)`.
pub fn special_period(profile: &ToricProfile, which: SpecialOrbit) -> f64 {
    let i = profile.intercepts_with_consistency();
    match which {
        SpecialOrbit::Gamma1 => PI / i.d2_at_b,
        SpecialOrbit::Gamma2 => PI / i.d1_at_a,
    }
}

fn gradient_at(profile: &ToricProfile, t: f64) -> Result<(f64, f64)> {
    let c = profile.boundary_point(t)?;
    Ok((c.d1, c.d2))
}

/// Systolic pairing of two geometrically distinct orbits, from the closed
/// form `2A·D₁F|_{lower}·D₂F|_{upper}`. Symmetric in its arguments.
pub fn pairing(profile: &ToricProfile, first: Orbit, second: Orbit) -> Result<f64> {
    let two_a = profile.total_t();
    let s = first.parameter(profile);
    let u = second.parameter(profile);
    for t in [s, u] {
        if !(0.0..=two_a).contains(&t) {
            return Err(Error::Domain(format!("torus parameter {t} outside [0, {two_a}]")));
        }
    }
    if (s - u).abs() <= 1e-12 * two_a {
        return Err(Error::Domain("systolic pairing needs geometrically distinct orbits".into()));
    }
    let (lower, upper) = if s < u { (s, u) } else { (u, s) };
    let (d1, _) = gradient_at(profile, lower)?;
    let (_, d2) = gradient_at(profile, upper)?;
    Ok(two_a * d1 * d2)
}

/// `link·vol/(T·T')`, the defining expression of the pairing.
pub fn pairing_from_periods(link: f64, volume: f64, period_a: f64, period_b: f64) -> f64 {
    link * volume / (period_a * period_b)
}

/// Linking number of orbits in classes `(p, q)` (on the torus closer to `γ₂`)
/// and `(p̂, q̂)` (closer to `γ₁`): `p·q̂`. The special orbits are the classes
/// `γ₂ = (1, 0)` and `γ₁ = (0, 1)`.
pub fn torus_linking(lower: (u32, u32), upper: (u32, u32)) -> i64 {
    lower.0 as i64 * upper.1 as i64
}

/// A rational invariant torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusClass {
    pub p: u32,
    pub q: u32,
    /// Area parameter of the torus (midpoint for a continuous family).
    pub t: f64,
    /// Parameter range; degenerate for an isolated torus. A non-degenerate
    /// range means every torus in it is a `(p, q)`-torus (constant gradient).
    pub t_range: (f64, f64),
    /// Primitive period of its orbits.
    pub period: f64,
}

/// Primitive period `πp/D₁F` (or `πq/D₂F` when `p = 0`) of a `(p, q)` orbit
/// on the torus with gradient `(d1, d2)`.
pub fn torus_period(p: u32, q: u32, d1: f64, d2: f64) -> f64 {
    if p > 0 {
        PI * p as f64 / d1
    } else {
        PI * q as f64 / d2
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Refuses profiles on which a partial derivative of `F` is negative.
pub fn require_nonnegative_gradient(profile: &ToricProfile) -> Result<()> {
    let (m1, m2) = profile.min_partials(2048);
    if m1 < -1e-12 || m2 < -1e-12 {
        return Err(Error::Precondition(format!(
            "profile has a negative partial derivative (min D1F = {m1:.3e}, min D2F = {m2:.3e}); \
             the toric pairing formulas assume D1F, D2F >= 0"
        )));
    }
    Ok(())
}

struct GradientGrid {
    ts: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl GradientGrid {
    fn new(profile: &ToricProfile, n: usize) -> Result<Self> {
        let two_a = profile.total_t();
        let mut ts = Vec::with_capacity(n);
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for i in 0..n {
            let t = if i + 1 == n { two_a } else { two_a * i as f64 / (n - 1) as f64 };
            let c = profile.boundary_point(t)?;
            ts.push(t);
            d1.push(c.d1);
            d2.push(c.d2);
        }
        Ok(GradientGrid { ts, d1, d2 })
    }

    fn bracket(&self, i: usize) -> (f64, f64) {
        let n = self.ts.len();
        (self.ts[i.saturating_sub(1)], self.ts[(i + 1).min(n - 1)])
    }
}

/// All rational tori with `max(p, q) <= max_pq`, located by a sign-change
/// scan of `q·D₁F − p·D₂F` followed by Brent refinement.
pub fn enumerate_tori(profile: &ToricProfile, max_pq: u32) -> Result<Vec<TorusClass>> {
    enumerate_tori_with_scan(profile, max_pq, 1024)
}

pub fn enumerate_tori_with_scan(profile: &ToricProfile, max_pq: u32, scan_n: usize) -> Result<Vec<TorusClass>> {
    if max_pq < 1 {
        return Err(Error::Config("max_pq must be at least 1".into()));
    }
    require_nonnegative_gradient(profile)?;
    let grid = GradientGrid::new(profile, scan_n.max(16))?;
    let two_a = profile.total_t();
    let edge = 1e-12 * two_a;
    let mut out = Vec::new();
    for p in 0..=max_pq {
        for q in 0..=max_pq {
            if (p == 0 && q == 0) || gcd(p, q) != 1 {
                continue;
            }
            let (pf, qf) = (p as f64, q as f64);
            let tol = 1e-10 * pf.hypot(qf);
            let f: Vec<f64> = grid.d1.iter().zip(&grid.d2).map(|(d1, d2)| qf * d1 - pf * d2).collect();
            let zero = |v: f64| v.abs() <= tol;
            let make = |t: f64, range: (f64, f64)| -> Result<TorusClass> {
                let (d1, d2) = gradient_at(profile, t)?;
                Ok(TorusClass { p, q, t, t_range: range, period: torus_period(p, q, d1, d2) })
            };
            let n = f.len();
            let mut i = 0;
            while i < n {
                if zero(f[i]) {
                    let start = i;
                    while i + 1 < n && zero(f[i + 1]) {
                        i += 1;
                    }
                    let (lo, hi) = (grid.ts[start], grid.ts[i]);
                    if i > start {
                        let mid = 0.5 * (lo + hi);
                        out.push(make(mid, (lo, hi))?);
                    } else if lo > edge && lo < two_a - edge {
                        out.push(make(lo, (lo, lo))?);
                    }
                    i += 1;
                    continue;
                }
                if i + 1 < n && !zero(f[i + 1]) && f[i].signum() != f[i + 1].signum() {
                    let root = brent(
                        |t| {
                            let (d1, d2) = gradient_at(profile, t).unwrap_or((f64::NAN, f64::NAN));
                            qf * d1 - pf * d2
                        },
                        grid.ts[i],
                        grid.ts[i + 1],
                        1e-14,
                    )?;
                    if root > edge && root < two_a - edge {
                        out.push(make(root, (root, root))?);
                    }
                }
                i += 1;
            }
        }
    }
    out.sort_by(|x, y| x.t.total_cmp(&y.t).then(x.p.cmp(&y.p)).then(x.q.cmp(&y.q)));
    Ok(out)
}

/// An orbit participating in an extremal pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitWitness {
    /// `"upper"` or `"lower"`: which interval endpoint this orbit witnesses.
    pub extremum: &'static str,
    pub t: f64,
    pub p: u32,
    pub q: u32,
    pub period: f64,
    /// Pairing of the witnessing orbit pair.
    pub pairing: f64,
}

/// Systolic invariants of a toric boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystolicReport {
    pub area: f64,
    pub intercepts: (f64, f64),
    pub volume: f64,
    /// Closure of the pairing values over distinct orbit pairs.
    pub interval: (f64, f64),
    /// Pairing values together with the diagonal (rotation-number) values,
    /// computed by an independent search.
    pub enlarged_interval: (f64, f64),
    /// Range of `2A·D₁F(C(t))·D₂F(C(t̂))` over independent `t, t̂`.
    pub product_range: (f64, f64),
    pub norm: f64,
    pub contains_one: bool,
    /// `ρ(γ₁, γ₂) = 2A/(ab)`.
    pub endpoint_pairing: f64,
    pub witnesses: Vec<OrbitWitness>,
}

const CONTAINS_ONE_TOL: f64 = 1e-9;

fn refine_max_d1(profile: &ToricProfile, lo: f64, hi: f64, sign: f64) -> (f64, f64) {
    let f = |t: f64| sign * gradient_at(profile, t).map(|g| g.0).unwrap_or(f64::NAN);
    let (x, v) = golden_max(f, lo, hi, 1e-10 * profile.total_t());
    (x, sign * v)
}

fn refine_max_d2(profile: &ToricProfile, lo: f64, hi: f64, sign: f64) -> (f64, f64) {
    let f = |t: f64| sign * gradient_at(profile, t).map(|g| g.1).unwrap_or(f64::NAN);
    let (x, v) = golden_max(f, lo, hi, 1e-10 * profile.total_t());
    (x, sign * v)
}

fn refine_diagonal(profile: &ToricProfile, lo: f64, hi: f64, sign: f64) -> (f64, f64) {
    let f = |t: f64| sign * gradient_at(profile, t).map(|g| g.0 * g.1).unwrap_or(f64::NAN);
    let (x, v) = golden_max(f, lo, hi, 1e-10 * profile.total_t());
    (x, sign * v)
}

/// Extremal pair `(s, u, value)` of `D₁F(s)·D₂F(u)` subject to `s <= u`, by
/// prefix extrema on the grid and local refinement. `sign = 1` maximizes,
/// `sign = -1` minimizes.
fn ordered_extremum(profile: &ToricProfile, grid: &GradientGrid, sign: f64) -> (f64, f64, f64) {
    let n = grid.ts.len();
    let mut best_prefix = 0usize;
    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for j in 0..n {
        if sign * grid.d1[j] > sign * grid.d1[best_prefix] {
            best_prefix = j;
        }
        let v = sign * grid.d1[best_prefix] * grid.d2[j];
        if v > best.2 {
            best = (best_prefix, j, v);
        }
    }
    let (i, j, _) = best;
    let mut candidates = Vec::new();
    // separable refinement; valid while the brackets keep s <= u
    let (s_lo, s_hi) = grid.bracket(i);
    let (u_lo, u_hi) = grid.bracket(j);
    let (s, d1) = refine_max_d1(profile, s_lo, s_hi.min(u_hi), sign);
    let (u, d2) = refine_max_d2(profile, u_lo.max(s), u_hi, sign);
    if s <= u {
        candidates.push((s, u, d1 * d2));
    }
    if j <= i + 1 {
        let (t, h) = refine_diagonal(profile, s_lo, u_hi, sign);
        candidates.push((t, t, h));
    }
    candidates.push((grid.ts[i], grid.ts[j], grid.d1[i] * grid.d2[j]));
    candidates.into_iter().max_by(|x, y| (sign * x.2).total_cmp(&(sign * y.2))).expect("at least the grid candidate")
}

/// Enlarged-interval extremum by a different route: exhaustive scan over
/// strictly ordered grid pairs with alternating coordinate refinement, plus a
/// separate scan of the diagonal values.
fn enlarged_extremum(profile: &ToricProfile, grid: &GradientGrid, sign: f64) -> f64 {
    let n = grid.ts.len();
    let mut best = (0usize, 1usize, f64::NEG_INFINITY);
    for i in 0..n {
        let a = sign * grid.d1[i];
        for j in (i + 1)..n {
            let v = a * grid.d2[j];
            if v > best.2 {
                best = (i, j, v);
            }
        }
    }
    let (i, j, _) = best;
    let mut u = grid.ts[j];
    let mut off = sign * best.2;
    let (s_lo, s_hi) = grid.bracket(i);
    let (u_lo, u_hi) = grid.bracket(j);
    for _ in 0..3 {
        let (ns, _) = refine_max_d1(profile, s_lo, s_hi.min(u), sign);
        let (nu, _) = refine_max_d2(profile, u_lo.max(ns), u_hi, sign);
        let v = gradient_at(profile, ns).map(|g| g.0).unwrap_or(f64::NAN)
            * gradient_at(profile, nu).map(|g| g.1).unwrap_or(f64::NAN);
        if sign * v >= sign * off {
            off = v;
            u = nu;
        }
    }

    let mut k = 0;
    for idx in 0..n {
        if sign * grid.d1[idx] * grid.d2[idx] > sign * grid.d1[k] * grid.d2[k] {
            k = idx;
        }
    }
    let (d_lo, d_hi) = grid.bracket(k);
    let (_, diag) = refine_diagonal(profile, d_lo, d_hi, sign);
    let diag = if sign * diag >= sign * grid.d1[k] * grid.d2[k] { diag } else { grid.d1[k] * grid.d2[k] };
    if sign * off >= sign * diag {
        off
    } else {
        diag
    }
}

fn separable_range(profile: &ToricProfile, grid: &GradientGrid) -> (f64, f64) {
    let arg = |v: &[f64], sign: f64| {
        let mut k = 0;
        for (i, x) in v.iter().enumerate() {
            if sign * x > sign * v[k] {
                k = i;
            }
        }
        k
    };
    let ext = |sign: f64| {
        let (l1, h1) = grid.bracket(arg(&grid.d1, sign));
        let (_, e1) = refine_max_d1(profile, l1, h1, sign);
        let (l2, h2) = grid.bracket(arg(&grid.d2, sign));
        let (_, e2) = refine_max_d2(profile, l2, h2, sign);
        e1 * e2
    };
    let two_a = profile.total_t();
    (two_a * ext(-1.0), two_a * ext(1.0))
}

/// Describes the orbit at parameter `t` by the lowest-height rational
/// direction of `∇F` there, moved onto the actual rational torus when one is
/// found nearby.
fn witness_orbit(profile: &ToricProfile, t: f64, max_height: u32) -> Result<(f64, u32, u32, f64)> {
    let two_a = profile.total_t();
    let edge = 1e-9 * two_a;
    if t <= edge {
        return Ok((0.0, 1, 0, special_period(profile, SpecialOrbit::Gamma2)));
    }
    if t >= two_a - edge {
        return Ok((two_a, 0, 1, special_period(profile, SpecialOrbit::Gamma1)));
    }
    let (d1, d2) = gradient_at(profile, t)?;
    let (p, q) = direction_approximation(d1.max(0.0), d2.max(0.0), max_height as u64);
    let (p, q) = (p as u32, q as u32);
    let f = |s: f64| gradient_at(profile, s).map(|(a, b)| q as f64 * a - p as f64 * b).unwrap_or(f64::NAN);
    let f0 = f(t);
    let mut delta = 1e-3 * two_a;
    let mut torus_t = t;
    if f0 != 0.0 {
        while delta < two_a {
            let lo = (t - delta).max(edge);
            let hi = (t + delta).min(two_a - edge);
            let (flo, fhi) = (f(lo), f(hi));
            let pick = if flo.signum() != f0.signum() {
                Some((lo, t))
            } else if fhi.signum() != f0.signum() {
                Some((t, hi))
            } else {
                None
            };
            if let Some((a, b)) = pick {
                torus_t = brent(f, a, b, 1e-14)?;
                break;
            }
            delta *= 2.0;
        }
    }
    let (d1, d2) = gradient_at(profile, torus_t)?;
    Ok((torus_t, p, q, torus_period(p, q, d1, d2)))
}

fn witness_pair(profile: &ToricProfile, extremum: &'static str, s: f64, u: f64) -> Result<Vec<OrbitWitness>> {
    let (ts, ps, qs, per_s) = witness_orbit(profile, s, 64)?;
    let (tu, pu, qu, per_u) = witness_orbit(profile, u, 64)?;
    let rho = if (ts - tu).abs() > 1e-12 * profile.total_t() {
        pairing(profile, Orbit::Torus { t: ts }, Orbit::Torus { t: tu })?
    } else {
        // diagonal limit
        let (d1, d2) = gradient_at(profile, ts)?;
        profile.total_t() * d1 * d2
    };
    Ok(vec![
        OrbitWitness { extremum, t: ts, p: ps, q: qs, period: per_s, pairing: rho },
        OrbitWitness { extremum, t: tu, p: pu, q: qu, period: per_u, pairing: rho },
    ])
}

/// Systolic interval, enlarged interval and norm of a toric boundary.
pub fn systolic_interval(profile: &ToricProfile, grid_n: usize) -> Result<SystolicReport> {
    if grid_n < 8 {
        return Err(Error::Config(format!("grid_n = {grid_n} must be at least 8")));
    }
    require_nonnegative_gradient(profile)?;
    let grid = GradientGrid::new(profile, grid_n)?;
    let two_a = profile.total_t();

    let (s_max, u_max, v_max) = ordered_extremum(profile, &grid, 1.0);
    let (s_min, u_min, v_min) = ordered_extremum(profile, &grid, -1.0);
    let interval = (two_a * v_min, two_a * v_max);

    // the enlarged interval uses a coarser exhaustive scan to keep it O(n²) cheap
    let coarse_n = grid_n.min(1024);
    let coarse = if coarse_n == grid_n { None } else { Some(GradientGrid::new(profile, coarse_n)?) };
    let g2 = coarse.as_ref().unwrap_or(&grid);
    let enlarged_interval = (two_a * enlarged_extremum(profile, g2, -1.0), two_a * enlarged_extremum(profile, g2, 1.0));

    let product_range = separable_range(profile, &grid);
    let mut witnesses = witness_pair(profile, "upper", s_max, u_max)?;
    witnesses.extend(witness_pair(profile, "lower", s_min, u_min)?);
    let (a, b) = profile.intercepts();
    Ok(SystolicReport {
        area: profile.quadrant_area(),
        intercepts: (a, b),
        volume: contact_volume(profile),
        interval,
        enlarged_interval,
        product_range,
        norm: interval.1 - interval.0,
        contains_one: interval.0 <= 1.0 + CONTAINS_ONE_TOL && interval.1 >= 1.0 - CONTAINS_ONE_TOL,
        endpoint_pairing: pairing(profile, Orbit::Gamma1, Orbit::Gamma2)?,
        witnesses,
    })
}

/// Values entering the averaging identity
/// `∫∫ D₁F(C(t))·D₂F(C(t̂)) dt dt̂ = (x(0) − x(2A))·(y(2A) − y(0)) = ab`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageIdentity {
    pub integral: f64,
    pub ab: f64,
    pub residual: f64,
}

pub fn average_identity(profile: &ToricProfile) -> Result<AverageIdentity> {
    let two_a = profile.total_t();
    let opts = QuadOptions::abs(profile.numerics().quad_tol);
    let int_d1 = integrate(|t| gradient_at(profile, t).map(|g| g.0).unwrap_or(f64::NAN), 0.0, two_a, opts)?;
    let int_d2 = integrate(|t| gradient_at(profile, t).map(|g| g.1).unwrap_or(f64::NAN), 0.0, two_a, opts)?;
    let (a, b) = profile.intercepts();
    let integral = int_d1 * int_d2;
    Ok(AverageIdentity { integral, ab: a * b, residual: (integral - a * b).abs() })
}

pub fn average_identity_residual(profile: &ToricProfile) -> Result<f64> {
    Ok(average_identity(profile)?.residual)
}

/// Normalized Liouville measures of the union of tori whose orbits `γ`
/// satisfy `ρ(γ, Σ) ≥ 1 − ε` (`high`) and `ρ(γ, Σ) ≤ 1 + ε` (`low`), for `Σ`
/// a disk bounded by a special orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessMeasure {
    pub epsilon: f64,
    pub high_fraction: f64,
    pub low_fraction: f64,
}

/// Pairing `ρ(γ, Σ)` of the orbits over `C(t)` with the disk bounded by a
/// special orbit; equals the pairing with that orbit.
pub fn disk_pairing(profile: &ToricProfile, disk: SpecialOrbit, t: f64) -> Result<f64> {
    let i = profile.intercepts_with_consistency();
    let (d1, d2) = gradient_at(profile, t)?;
    Ok(match disk {
        SpecialOrbit::Gamma1 => profile.total_t() * d1 * i.d2_at_b,
        SpecialOrbit::Gamma2 => profile.total_t() * d2 * i.d1_at_a,
    })
}

/// Length of `{t ∈ [0, 2A] : sign·(ρ(t) − level) ≥ 0}` divided by `2A`.
fn superlevel_fraction(
    profile: &ToricProfile,
    disk: SpecialOrbit,
    level: f64,
    sign: f64,
    scan_n: usize,
) -> Result<f64> {
    let two_a = profile.total_t();
    let f = |t: f64| disk_pairing(profile, disk, t).map(|r| sign * (r - level)).unwrap_or(f64::NAN);
    let ts: Vec<f64> = (0..=scan_n).map(|i| two_a * i as f64 / scan_n as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let mut measure = 0.0;
    for k in 0..scan_n {
        let (a, b) = (ts[k], ts[k + 1]);
        let (fa, fb) = (vals[k], vals[k + 1]);
        match (fa >= 0.0, fb >= 0.0) {
            (true, true) => measure += b - a,
            (false, false) => {}
            (true, false) => measure += brent(f, a, b, 1e-14)? - a,
            (false, true) => measure += b - brent(f, a, b, 1e-14)?,
        }
    }
    Ok(measure / two_a)
}

pub fn witness_measure(profile: &ToricProfile, disk: SpecialOrbit, epsilon: f64) -> Result<WitnessMeasure> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    require_nonnegative_gradient(profile)?;
    Ok(WitnessMeasure {
        epsilon,
        high_fraction: superlevel_fraction(profile, disk, 1.0 - epsilon, 1.0, 2048)?,
        low_fraction: superlevel_fraction(profile, disk, 1.0 + epsilon, -1.0, 2048)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    #[test]
    fn volumes() {
        let e = ToricProfile::ellipsoid(1.0, 1.0).unwrap();
        assert!((contact_volume(&e) - PI * PI).abs() < 1e-12);
        let e = ToricProfile::ellipsoid(1.3, 0.4).unwrap();
        assert!((contact_volume(&e) - PI * PI * 0.52).abs() < 1e-12);
        assert!((contact_volume(&ToricProfile::round()) - PI.powi(3) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn ellipsoid_pairings_are_one() {
        let e = ToricProfile::ellipsoid(1.7, 0.6).unwrap();
        let rho = pairing(&e, Orbit::Gamma1, Orbit::Gamma2).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
        let rho = pairing(&e, Orbit::Torus { t: 0.2 }, Orbit::Torus { t: 0.7 }).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_pairings() {
        let r = ToricProfile::round();
        let rho = pairing(&r, Orbit::Gamma1, Orbit::Gamma2).unwrap();
        assert!((rho - FRAC_PI_2).abs() < 1e-9);
        // the (1,1)-torus sits at t = π/4; the definition gives link=1, T=π√2, T(γ1)=π
        let rho = pairing(&r, Orbit::Torus { t: FRAC_PI_4 }, Orbit::Gamma1).unwrap();
        assert!((rho - PI / (2.0 * SQRT_2)).abs() < 1e-9);
        let def = pairing_from_periods(1.0, PI.powi(3) / 2.0, PI * SQRT_2, PI);
        assert!((rho - def).abs() < 1e-9);
    }

    #[test]
    fn pairing_is_symmetric_and_rejects_equal_orbits() {
        let r = ToricProfile::lp(3.0, 1.0, 2.0).unwrap();
        let x = pairing(&r, Orbit::Torus { t: 0.3 }, Orbit::Torus { t: 1.1 }).unwrap();
        let y = pairing(&r, Orbit::Torus { t: 1.1 }, Orbit::Torus { t: 0.3 }).unwrap();
        assert_eq!(x, y);
        assert!(matches!(pairing(&r, Orbit::Torus { t: 0.3 }, Orbit::Torus { t: 0.3 }), Err(Error::Domain(_))));
    }

    #[test]
    fn ellipsoid_tori_form_one_family() {
        let e = ToricProfile::ellipsoid(1.0, 2.0).unwrap();
        let tori = enumerate_tori(&e, 3).unwrap();
        assert_eq!(tori.len(), 1);
        let c = tori[0];
        assert_eq!((c.p, c.q), (2, 1));
        assert_eq!(c.t_range, (0.0, e.total_t()));
        assert!((c.period - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn round_tori_periods() {
        let r = ToricProfile::round();
        let tori = enumerate_tori(&r, 4).unwrap();
        let one_one = tori.iter().find(|c| (c.p, c.q) == (1, 1)).unwrap();
        let c = r.boundary_point(one_one.t).unwrap();
        assert!((c.x - 0.5f64.sqrt()).abs() < 1e-10 && (c.y - 0.5f64.sqrt()).abs() < 1e-10);
        assert!((one_one.period - PI * SQRT_2).abs() < 1e-9);
        let c34 = tori.iter().find(|c| (c.p, c.q) == (3, 4)).unwrap();
        assert!((c34.period - 5.0 * PI).abs() < 1e-9);
        for c in &tori {
            assert!((c.period - PI * (c.p as f64).hypot(c.q as f64)).abs() < 1e-9);
        }
        // (1,0) and (0,1) only occur at the special orbits
        assert!(tori.iter().all(|c| c.p > 0 && c.q > 0));
    }

    #[test]
    fn interval_of_ellipsoid_and_round() {
        let e = ToricProfile::ellipsoid(0.8, 2.2).unwrap();
        let rep = systolic_interval(&e, 256).unwrap();
        assert!((rep.interval.0 - 1.0).abs() < 1e-9 && (rep.interval.1 - 1.0).abs() < 1e-9);
        assert!(rep.norm < 1e-9 && rep.contains_one);

        let r = ToricProfile::round();
        let rep = systolic_interval(&r, 512).unwrap();
        assert!(rep.interval.0.abs() < 1e-6);
        assert!((rep.interval.1 - FRAC_PI_2).abs() < 1e-6);
        assert!(rep.contains_one);
        assert!((rep.enlarged_interval.0 - rep.interval.0).abs() < 1e-6);
        assert!((rep.enlarged_interval.1 - rep.interval.1).abs() < 1e-6);
    }

    #[test]
    fn small_grid_is_rejected() {
        let r = ToricProfile::round();
        assert!(matches!(systolic_interval(&r, 7), Err(Error::Config(_))));
    }

    #[test]
    fn average_identity_examples() {
        let e = ToricProfile::ellipsoid(1.0, 2.0).unwrap();
        let id = average_identity(&e).unwrap();
        assert!((id.integral - 2.0).abs() < 1e-8);
        let r = ToricProfile::round();
        let id = average_identity(&r).unwrap();
        assert!((id.integral - 1.0).abs() < 1e-8);
    }

    #[test]
    fn witness_measures() {
        let e = ToricProfile::ellipsoid(1.0, 2.0).unwrap();
        for disk in [SpecialOrbit::Gamma1, SpecialOrbit::Gamma2] {
            let m = witness_measure(&e, disk, 0.2).unwrap();
            assert_eq!((m.high_fraction, m.low_fraction), (1.0, 1.0));
        }
        // round: ρ(t) = (π/2)·cos t on the γ1-disk
        let r = ToricProfile::round();
        let m = witness_measure(&r, SpecialOrbit::Gamma1, 0.3).unwrap();
        let high = (1.4 / PI).acos() / FRAC_PI_2;
        let low = 1.0 - (2.6 / PI).acos() / FRAC_PI_2;
        assert!((m.high_fraction - high).abs() < 1e-6);
        assert!((m.low_fraction - low).abs() < 1e-6);
        assert!(matches!(witness_measure(&r, SpecialOrbit::Gamma1, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn linking_of_classes() {
        assert_eq!(torus_linking((1, 0), (0, 1)), 1);
        assert_eq!(torus_linking((2, 3), (0, 1)), 2);
        assert_eq!(torus_linking((2, 1), (1, 2)), 4);
    }
}
