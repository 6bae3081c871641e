//! Seifert surfaces, signed crossings, asymptotic intersection rates and
//! linking numbers.
//!
//! The disks bounded by the special orbits are the angle pages
//! `{θ₁ = θ*}` (bounded by `γ₁`) and `{θ₂ = θ*}` (bounded by `γ₂`). A toric
//! trajectory crosses such a page whenever the corresponding angle sweeps
//! past `θ*`, so crossings are counted exactly from the linear angle motion.
//!
//! Asymptotic rates are read off near-returns of a trajectory: the fast angle
//! closes exactly at multiples of its period, and the slow angle comes back
//! close to its start at the convergents of the rotation ratio. The loop is
//! closed by the short arc in the slow angle and its crossings are counted.
//!
//! Linking numbers of curves in `S³` are computed after stereographic
//! projection by the exact solid-angle formula for pairs of straight
//! segments, which evaluates the Gauss integral of two polygons exactly.

use std::f64::consts::{PI, TAU};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{liouville_point, FlowPoint, Trajectory};
use crate::numerics::cfrac::convergents;
use crate::numerics::parallel::map_indexed;
use crate::numerics::sum::mean_and_stderr;
use crate::systolic::{contact_volume, special_period, SpecialOrbit};
use crate::toric::ToricProfile;

/// Where an adapted Seifert surface sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceKind {
    /// `{θ₁ = θ*}`, a disk bounded by `γ₁`.
    Gamma1Disk { theta_star: f64 },
    /// `{θ₂ = θ*}`, a disk bounded by `γ₂`.
    Gamma2Disk { theta_star: f64 },
    /// `{t = t*} × 𝔻` in a disk-map suspension.
    DiskmapPage { t_star: f64 },
}

/// An oriented adapted Seifert surface with its contact area `T(Σ) = ∫_Σ dλ`.
/// Reversing the orientation negates the contact area and every crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeifertSurface {
    pub kind: SurfaceKind,
    /// `+1` or `-1`.
    pub orientation: i8,
    /// Signed contact area.
    pub contact_area: f64,
}

impl SeifertSurface {
    /// The page `{θ₁ = θ*}`. On it `λ₀ = ½ y dθ₂`, so `T(Σ) = π·(y(2A) − y(0)) = πb`,
    /// which must agree with the period of `γ₁`.
    pub fn gamma1_disk(profile: &ToricProfile, theta_star: f64) -> Result<Self> {
        let (_, b) = profile.intercepts();
        Self::special_disk(profile, SpecialOrbit::Gamma1, PI * b, SurfaceKind::Gamma1Disk { theta_star })
    }

    /// The page `{θ₂ = θ*}`, contact area `πa = T(γ₂)`.
    pub fn gamma2_disk(profile: &ToricProfile, theta_star: f64) -> Result<Self> {
        let (a, _) = profile.intercepts();
        Self::special_disk(profile, SpecialOrbit::Gamma2, PI * a, SurfaceKind::Gamma2Disk { theta_star })
    }

    pub fn for_orbit(profile: &ToricProfile, which: SpecialOrbit, theta_star: f64) -> Result<Self> {
        match which {
            SpecialOrbit::Gamma1 => Self::gamma1_disk(profile, theta_star),
            SpecialOrbit::Gamma2 => Self::gamma2_disk(profile, theta_star),
        }
    }

    fn special_disk(profile: &ToricProfile, which: SpecialOrbit, area: f64, kind: SurfaceKind) -> Result<Self> {
        if let SurfaceKind::Gamma1Disk { theta_star } | SurfaceKind::Gamma2Disk { theta_star } = kind {
            if !theta_star.is_finite() {
                return Err(Error::Domain(format!("page angle {theta_star} is not finite")));
            }
        }
        let period = special_period(profile, which);
        if (area - period).abs() > 1e-10 * period.max(1.0) {
            return Err(Error::numerical(
                "contact area of the disk disagrees with the period of its boundary orbit",
                (area - period).abs(),
            ));
        }
        Ok(SeifertSurface { kind, orientation: 1, contact_area: area })
    }

    /// The page `{t*} × 𝔻` of a disk-map suspension; `∫_𝔻 dη = π`.
    pub fn diskmap_page(t_star: f64) -> Self {
        SeifertSurface { kind: SurfaceKind::DiskmapPage { t_star }, orientation: 1, contact_area: PI }
    }

    pub fn flipped(self) -> Self {
        SeifertSurface { orientation: -self.orientation, contact_area: -self.contact_area, ..self }
    }

    pub fn with_orientation(self, orientation: i8) -> Self {
        if orientation.signum() == self.orientation.signum() {
            self
        } else {
            self.flipped()
        }
    }
}

/// One signed crossing of a trajectory with a surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub time: f64,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingRecord {
    pub crossings: Vec<Crossing>,
    pub duration: f64,
    pub signed_total: i64,
    /// Signed crossings per unit time (`0` for an empty duration).
    pub rate: f64,
}

const SNAP: f64 = 1e-9;

fn snap(u: f64) -> f64 {
    let r = u.round();
    if (u - r).abs() < SNAP {
        r
    } else {
        u
    }
}

/// Integer range `k_first..=k_last` of sweeps of the angle `θ₀ + ωs` past
/// `θ*` for `s ∈ (0, duration]`, with the sign of the motion.
fn sweep_range(theta0: f64, omega: f64, theta_star: f64, duration: f64) -> Result<(i64, i64, i8)> {
    let u0 = snap((theta0 - theta_star) / TAU);
    if omega == 0.0 {
        if u0 == u0.round() {
            return Err(Error::Domain("trajectory lies inside the surface (zero angular rate on the page)".into()));
        }
        return Ok((1, 0, 0));
    }
    let ud = snap((theta0 + omega * duration - theta_star) / TAU);
    if omega > 0.0 {
        Ok((u0.floor() as i64 + 1, ud.floor() as i64, 1))
    } else {
        Ok((ud.ceil() as i64, u0.ceil() as i64 - 1, -1))
    }
}

fn sweep_count(theta0: f64, omega: f64, theta_star: f64, duration: f64) -> Result<i64> {
    let (first, last, sign) = sweep_range(theta0, omega, theta_star, duration)?;
    Ok(sign as i64 * (last - first + 1).max(0))
}

/// The page angle, its rate and the boundary parameter of the special orbit
/// for a toric page.
fn page_angle(surface: &SeifertSurface, point: &FlowPoint, rates: (f64, f64), two_a: f64) -> Result<(f64, f64, f64)> {
    let (theta, omega, theta_star, boundary_t) = match surface.kind {
        SurfaceKind::Gamma1Disk { theta_star } => (point.theta1, rates.0, theta_star, two_a),
        SurfaceKind::Gamma2Disk { theta_star } => (point.theta2, rates.1, theta_star, 0.0),
        SurfaceKind::DiskmapPage { .. } => {
            return Err(Error::Domain("a toric trajectory cannot be counted against a disk-map page".into()))
        }
    };
    if point.t == boundary_t {
        return Err(Error::Domain("trajectory is the boundary orbit of the surface".into()));
    }
    Ok((theta, omega, theta_star))
}

/// Signed crossings of a toric trajectory with a special-orbit disk over the
/// time interval `(0, duration]`.
pub fn crossing_count(profile: &ToricProfile, traj: &Trajectory, surface: &SeifertSurface) -> Result<CrossingRecord> {
    let (theta0, omega, theta_star) = page_angle(surface, &traj.start, traj.rates, profile.total_t())?;
    let (first, last, sign) = sweep_range(theta0, omega, theta_star, traj.duration)?;
    let sign = sign * surface.orientation;
    let crossings: Vec<Crossing> =
        (first..=last).map(|k| Crossing { time: ((theta_star - theta0) + TAU * k as f64) / omega, sign }).collect();
    let signed_total = sign as i64 * crossings.len() as i64;
    let rate = if traj.duration > 0.0 { signed_total as f64 / traj.duration } else { 0.0 };
    Ok(CrossingRecord { crossings, duration: traj.duration, signed_total, rate })
}

/// Near-return estimate of the asymptotic intersection number per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub rate: f64,
    /// `(1 + |closing|)/t_n`: one crossing of slack from the endpoints plus
    /// the crossings of the closing arc.
    pub error: f64,
    /// Near-return time `t_n`.
    pub return_time: f64,
    /// Signed crossings of the trajectory over `(0, t_n]`.
    pub trajectory_crossings: i64,
    /// Signed crossings of the closing arc.
    pub closing_crossings: i64,
    /// Distance in `ℝ⁴` between `φ^{t_n}(x)` and `x`.
    pub return_distance: f64,
}

/// Default bound on the `ℝ⁴` distance of an accepted near-return.
pub const DEFAULT_RETURN_TOLERANCE: f64 = 0.1;

fn wrap_pi(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Largest near-return time `t ≤ horizon` of the linear flow with rates
/// `rates` on the torus with radii `radii`, and the slow-angle displacement
/// there. Candidates are multiples of continued-fraction denominators of the
/// rate ratio.
fn near_return(rates: (f64, f64), radii: (f64, f64), horizon: f64, tol: f64) -> Option<(f64, u64)> {
    let (fast, slow, slow_radius) = if rates.0.abs() >= rates.1.abs() {
        (rates.0.abs(), rates.1.abs(), radii.1)
    } else {
        (rates.1.abs(), rates.0.abs(), radii.0)
    };
    if fast == 0.0 {
        return None;
    }
    let fast_period = TAU / fast;
    let max_m = (horizon / fast_period).floor();
    if max_m < 1.0 {
        return None;
    }
    let max_m = max_m.min(1e15) as u64;
    let ratio = slow / fast;
    // largest admissible distance of m·ratio from an integer
    let d_max = if tol >= 2.0 * slow_radius { 0.5 } else { (tol / (2.0 * slow_radius)).asin() / PI };
    let mut best: Option<u64> = None;
    for c in convergents(ratio, max_m) {
        let d = (c.den as f64 * ratio - c.num as f64).abs();
        let k_time = max_m / c.den;
        let k = if d > 0.0 { k_time.min((d_max / d).floor().min(1e18) as u64) } else { k_time };
        if k >= 1 {
            let m = k * c.den;
            best = Some(best.map_or(m, |b| b.max(m)));
        }
    }
    best.map(|m| (m as f64 * fast_period, m))
}

/// Asymptotic intersection rate of the trajectory through `point` (with
/// precomputed rates and radii `(r₁, r₂)`) with a special-orbit disk.
pub fn asymptotic_rate_with_rates(
    point: FlowPoint,
    rates: (f64, f64),
    radii: (f64, f64),
    two_a: f64,
    surface: &SeifertSurface,
    horizon: f64,
    return_tolerance: f64,
) -> Result<RateEstimate> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon {horizon} must be positive")));
    }
    let (theta0, omega, theta_star) = page_angle(surface, &point, rates, two_a)?;
    let (t_n, _) = near_return(rates, radii, horizon, return_tolerance).ok_or(Error::Resolution { horizon })?;
    let traj = sweep_count(theta0, omega, theta_star, t_n)?;

    // close the loop along the short arcs back to the start
    let end = (point.theta1 + rates.0 * t_n, point.theta2 + rates.1 * t_n);
    let back = (wrap_pi(point.theta1 - end.0), wrap_pi(point.theta2 - end.1));
    let (end_page, back_page) = match surface.kind {
        SurfaceKind::Gamma1Disk { .. } => (end.0, back.0),
        _ => (end.1, back.1),
    };
    let closing = if back_page == 0.0 { 0 } else { sweep_count(end_page, back_page, theta_star, 1.0)? };
    let d1 = 2.0 * radii.0 * (0.5 * back.0).sin().abs();
    let d2 = 2.0 * radii.1 * (0.5 * back.1).sin().abs();
    let total = surface.orientation as i64 * (traj + closing);
    Ok(RateEstimate {
        rate: total as f64 / t_n,
        error: (1.0 + closing.abs() as f64) / t_n,
        return_time: t_n,
        trajectory_crossings: surface.orientation as i64 * traj,
        closing_crossings: surface.orientation as i64 * closing,
        return_distance: d1.hypot(d2),
    })
}

pub fn asymptotic_rate(
    profile: &ToricProfile,
    point: FlowPoint,
    surface: &SeifertSurface,
    horizon: f64,
    return_tolerance: f64,
) -> Result<RateEstimate> {
    let c = profile.boundary_point(point.t)?;
    asymptotic_rate_with_rates(
        point,
        (2.0 * c.d1, 2.0 * c.d2),
        (c.x.sqrt(), c.y.sqrt()),
        profile.total_t(),
        surface,
        horizon,
        return_tolerance,
    )
}

/// Monte Carlo settings for [`action_linking_verify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub n_samples: usize,
    pub horizon: f64,
    pub seed: u64,
    pub return_tolerance: f64,
    pub threads: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n_samples: 100_000,
            horizon: 1000.0,
            seed: 0,
            return_tolerance: DEFAULT_RETURN_TOLERANCE,
            threads: 1,
        }
    }
}

/// Outcome of comparing `vol·E[rate]` with the contact area of the surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionLinkingReport {
    pub surface: SurfaceKind,
    pub orientation: i8,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    /// `|lhs − rhs|/stderr`; `0` or `∞` when the estimator has no variance.
    pub z: f64,
    pub n_samples: usize,
    pub horizon: f64,
    pub seed: u64,
}

/// Monte Carlo check of `∫ (asymptotic intersection rate) λ∧dλ = T(Σ)`.
pub fn action_linking_verify(
    profile: &ToricProfile,
    surface: &SeifertSurface,
    opts: &VerifyOptions,
) -> Result<ActionLinkingReport> {
    if surface.contact_area == 0.0 {
        return Err(Error::Precondition("the surface has zero contact area".into()));
    }
    if opts.n_samples < 2 {
        return Err(Error::Config("at least two samples are needed for a standard error".into()));
    }
    let volume = contact_volume(profile);
    let rates: Vec<Result<f64>> = map_indexed(opts.n_samples, opts.threads, |i| {
        let x = liouville_point(profile, opts.seed, i as u64);
        Ok(asymptotic_rate(profile, x, surface, opts.horizon, opts.return_tolerance)?.rate)
    });
    let values: Vec<f64> = rates.into_iter().map(|r| r.map(|v| volume * v)).collect::<Result<_>>()?;
    let (lhs, stderr) = mean_and_stderr(&values);
    let rhs = surface.contact_area;
    let diff = (lhs - rhs).abs();
    let z = if stderr > 0.0 {
        diff / stderr
    } else if diff <= 1e-10 * rhs.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ActionLinkingReport {
        surface: surface.kind,
        orientation: surface.orientation,
        lhs,
        rhs,
        stderr,
        z,
        n_samples: opts.n_samples,
        horizon: opts.horizon,
        seed: opts.seed,
    })
}

/// Crossings of a polyline `(t, x, y)` (with `t` unwrapped, i.e. not reduced
/// mod 1) with the pages `{t* + k} × 𝔻`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageCrossings {
    pub signed_total: i64,
    pub crossings: usize,
    pub warnings: Vec<String>,
}

/// Transversality margin below which a page crossing is reported as nearly
/// tangential.
pub const TRANSVERSALITY_MARGIN: f64 = 1e-8;

pub fn page_crossings(path: &[[f64; 3]], surface: &SeifertSurface) -> Result<PageCrossings> {
    let SurfaceKind::DiskmapPage { t_star } = surface.kind else {
        return Err(Error::Domain("page crossings need a disk-map page surface".into()));
    };
    let mut signed_total = 0;
    let mut crossings = 0;
    let mut warnings = Vec::new();
    for w in path.windows(2) {
        let [a, b] = [w[0], w[1]];
        let dt = b[0] - a[0];
        if dt == 0.0 {
            continue;
        }
        let n = sweep_count(a[0] * TAU, dt * TAU, t_star * TAU, 1.0)?;
        if n != 0 {
            let len = (dt * dt + (b[1] - a[1]).powi(2) + (b[2] - a[2]).powi(2)).sqrt();
            let margin = dt.abs() / len;
            if margin < TRANSVERSALITY_MARGIN {
                warnings.push(format!(
                    "nearly tangential page crossing between t = {} and t = {} (margin {margin:.3e})",
                    a[0], b[0]
                ));
            }
            crossings += n.unsigned_abs() as usize;
            signed_total += surface.orientation as i64 * n;
        }
    }
    Ok(PageCrossings { signed_total, crossings, warnings })
}

/// A closed polygon on the unit sphere `S³ ⊂ ℝ⁴`; the last sample repeats
/// the first.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    samples: Vec<[f64; 4]>,
}

fn norm4(p: &[f64; 4]) -> f64 {
    p.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl ClosedCurve {
    /// Projects the points radially to `S³` and closes the polygon. Rejects
    /// fewer than three distinct points, points at the origin, and
    /// consecutive samples farther apart than `max_chord`.
    pub fn new(points: Vec<[f64; 4]>, max_chord: f64) -> Result<Self> {
        let mut samples = Vec::with_capacity(points.len() + 1);
        for p in points {
            let r = norm4(&p);
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Validation("curve sample at the origin or not finite".into()));
            }
            samples.push(p.map(|v| v / r));
        }
        let n = samples.len();
        if n >= 2 && dist4(&samples[0], &samples[n - 1]) > 1e-12 {
            samples.push(samples[0]);
        } else if n >= 2 {
            samples[n - 1] = samples[0];
        }
        if samples.len() < 4 {
            return Err(Error::Validation("a closed curve needs at least three distinct samples".into()));
        }
        if let Some(w) = samples.windows(2).find(|w| dist4(&w[0], &w[1]) > max_chord) {
            return Err(Error::Validation(format!(
                "consecutive curve samples {:.3e} apart exceed the chord bound {max_chord}",
                dist4(&w[0], &w[1])
            )));
        }
        Ok(ClosedCurve { samples })
    }

    pub fn samples(&self) -> &[[f64; 4]] {
        &self.samples
    }

    /// Number of polygon edges.
    pub fn len(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `(p, q)` orbit on the torus over `C(t)` starting at angles `phase`,
    /// sampled at `n` equally spaced times over one period.
    pub fn torus_orbit(profile: &ToricProfile, t: f64, p: u32, q: u32, phase: (f64, f64), n: usize) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::Domain("(p, q) = (0, 0) is not an orbit class".into()));
        }
        let c = profile.boundary_point(t)?;
        let (r1, r2) = (c.x.sqrt(), c.y.sqrt());
        let points = (0..n)
            .map(|j| {
                let s = j as f64 / n as f64;
                let (a1, a2) = (phase.0 + TAU * p as f64 * s, phase.1 + TAU * q as f64 * s);
                [r1 * a1.cos(), r1 * a1.sin(), r2 * a2.cos(), r2 * a2.sin()]
            })
            .collect();
        Self::new(points, 2.0)
    }

    /// `γ₁ = {z₁ = 0}`, oriented by the Reeb flow.
    pub fn gamma1(n: usize) -> Result<Self> {
        let points = (0..n).map(|j| {
            let a = TAU * j as f64 / n as f64;
            [0.0, 0.0, a.cos(), a.sin()]
        });
        Self::new(points.collect(), 2.0)
    }

    /// `γ₂ = {z₂ = 0}`, oriented by the Reeb flow.
    pub fn gamma2(n: usize) -> Result<Self> {
        let points = (0..n).map(|j| {
            let a = TAU * j as f64 / n as f64;
            [a.cos(), a.sin(), 0.0, 0.0]
        });
        Self::new(points.collect(), 2.0)
    }

    /// Inserts the (re-normalized) midpoint of every edge.
    pub fn refined(&self) -> Self {
        let mut samples = Vec::with_capacity(2 * self.samples.len());
        for w in self.samples.windows(2) {
            samples.push(w[0]);
            let m = [0, 1, 2, 3].map(|i| 0.5 * (w[0][i] + w[1][i]));
            let r = norm4(&m);
            samples.push(if r > 0.0 { m.map(|v| v / r) } else { w[0] });
        }
        samples.push(self.samples[0]);
        ClosedCurve { samples }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x1,y1,x2,y2")?;
        for p in &self.samples[..self.samples.len() - 1] {
            writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", p[0], p[1], p[2], p[3])?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R, max_chord: f64) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Validation(format!("reading curve: {e}")))?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Validation(format!("curve line {}: {e}", lineno + 1)))?;
            let [a, b, c, d] = vals[..] else {
                return Err(Error::Validation(format!(
                    "curve line {}: expected 4 columns, found {}",
                    lineno + 1,
                    vals.len()
                )));
            };
            points.push([a, b, c, d]);
        }
        Self::new(points, max_chord)
    }
}

/// Linking number estimate of two disjoint closed curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkingEstimate {
    pub link: i64,
    /// Unrounded Gauss sum.
    pub value: f64,
    pub residual: f64,
    pub pole: [f64; 4],
    pub attempts: usize,
}

/// Settings for [`linking_number`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkingOptions {
    /// Curves closer than this are rejected as intersecting.
    pub min_distance: f64,
    /// Extra attempts (next pole, refined polygons) when the residual is large.
    pub retries: usize,
}

impl Default for LinkingOptions {
    fn default() -> Self {
        LinkingOptions { min_distance: 1e-6, retries: 3 }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    if n > 0.0 {
        [a[0] / n, a[1] / n, a[2] / n]
    } else {
        [0.0; 3]
    }
}

/// Solid-angle contribution of segment `r1→r2` against `r3→r4` to the Gauss
/// integral, times `4π`.
fn segment_pair(r1: [f64; 3], r2: [f64; 3], r3: [f64; 3], r4: [f64; 3]) -> f64 {
    let r13 = sub(r3, r1);
    let r14 = sub(r4, r1);
    let r23 = sub(r3, r2);
    let r24 = sub(r4, r2);
    let n1 = unit(cross(r13, r14));
    let n2 = unit(cross(r14, r24));
    let n3 = unit(cross(r24, r23));
    let n4 = unit(cross(r23, r13));
    let asin = |x: f64| x.clamp(-1.0, 1.0).asin();
    let omega = asin(dot(n1, n2)) + asin(dot(n2, n3)) + asin(dot(n3, n4)) + asin(dot(n4, n1));
    let s = dot(cross(sub(r4, r3), sub(r2, r1)), r13);
    if s > 0.0 {
        omega
    } else if s < 0.0 {
        -omega
    } else {
        0.0
    }
}

/// Gauss linking integral of two closed polygons in `ℝ³`.
pub fn gauss_linking_polygons(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let mut total = crate::numerics::sum::CompensatedSum::new();
    for wa in a.windows(2) {
        let mut row = 0.0;
        for wb in b.windows(2) {
            row += segment_pair(wa[0], wa[1], wb[0], wb[1]);
        }
        total.add(row);
    }
    total.value() / (4.0 * PI)
}

fn det4(m: [[f64; 4]; 4]) -> f64 {
    // Laplace expansion along the first row
    let minor = |skip: usize| {
        let c: Vec<usize> = (0..4).filter(|&j| j != skip).collect();
        let r = |i: usize, j: usize| m[i][c[j]];
        r(1, 0) * (r(2, 1) * r(3, 2) - r(2, 2) * r(3, 1)) - r(1, 1) * (r(2, 0) * r(3, 2) - r(2, 2) * r(3, 0))
            + r(1, 2) * (r(2, 0) * r(3, 1) - r(2, 1) * r(3, 0))
    };
    (0..4).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * m[0][j] * minor(j)).sum()
}

/// Orthonormal basis `(b₁, b₂, b₃)` of `N^⊥` with `det(N, b₁, b₂, b₃) < 0`;
/// with this orientation the stereographic image of `S³` carries the
/// linking sign in which the Hopf fibers `γ₁`, `γ₂` link `+1`.
fn tangent_basis(pole: &[f64; 4]) -> [[f64; 4]; 3] {
    let skip = (0..4).max_by(|&i, &j| pole[i].abs().total_cmp(&pole[j].abs())).expect("four coordinates");
    let mut basis: Vec<[f64; 4]> = Vec::with_capacity(3);
    for k in (0..4).filter(|&k| k != skip) {
        let mut v = [0.0; 4];
        v[k] = 1.0;
        for u in std::iter::once(pole).chain(basis.iter()) {
            let c: f64 = (0..4).map(|i| v[i] * u[i]).sum();
            for i in 0..4 {
                v[i] -= c * u[i];
            }
        }
        let n = norm4(&v);
        basis.push(v.map(|x| x / n));
    }
    let mut b = [basis[0], basis[1], basis[2]];
    if det4([*pole, b[0], b[1], b[2]]) > 0.0 {
        b[2] = b[2].map(|x| -x);
    }
    b
}

fn stereographic(points: &[[f64; 4]], pole: &[f64; 4]) -> Vec<[f64; 3]> {
    let basis = tangent_basis(pole);
    let ip = |a: &[f64; 4], b: &[f64; 4]| (0..4).map(|i| a[i] * b[i]).sum::<f64>();
    points
        .iter()
        .map(|p| {
            let denom = 1.0 - ip(p, pole);
            basis.map(|b| ip(p, &b) / denom)
        })
        .collect()
}

fn min_distance(a: &ClosedCurve, b: &ClosedCurve) -> f64 {
    let mut best = f64::INFINITY;
    for p in a.samples() {
        for q in b.samples() {
            best = best.min(dist4(p, q));
        }
    }
    best
}

/// Eight fixed candidate poles in general position (the coordinate poles
/// `±e_k` lie on the Hopf fibers), best first: largest distance to the
/// nearer curve.
fn ranked_poles(a: &ClosedCurve, b: &ClosedCurve) -> Vec<[f64; 4]> {
    const DIRS: [[f64; 4]; 4] =
        [[3.0, 1.0, -2.0, 5.0], [-1.0, 4.0, 3.0, 2.0], [2.0, -3.0, 5.0, 1.0], [5.0, 2.0, 1.0, -3.0]];
    let mut poles: Vec<([f64; 4], f64)> = DIRS
        .iter()
        .flat_map(|d| [1.0, -1.0].map(|s| d.map(|x| s * x)))
        .map(|d| {
            let pole = d.map(|x| x / norm4(&d));
            let clearance =
                a.samples().iter().chain(b.samples()).map(|p| dist4(p, &pole)).fold(f64::INFINITY, f64::min);
            (pole, clearance)
        })
        .collect();
    poles.sort_by(|x, y| y.1.total_cmp(&x.1));
    poles.into_iter().map(|(p, _)| p).collect()
}

/// Linking number of two disjoint closed curves in `S³`.
pub fn linking_number(c1: &ClosedCurve, c2: &ClosedCurve, opts: &LinkingOptions) -> Result<LinkingEstimate> {
    let d = min_distance(c1, c2);
    if d <= opts.min_distance {
        return Err(Error::Domain(format!("curves come within {d:.3e} of each other (bound {})", opts.min_distance)));
    }
    let poles = ranked_poles(c1, c2);
    let (mut a, mut b) = (c1.clone(), c2.clone());
    let mut last_residual = f64::INFINITY;
    for attempt in 0..=opts.retries {
        let pole = poles[attempt % poles.len()];
        let pa = stereographic(a.samples(), &pole);
        let pb = stereographic(b.samples(), &pole);
        let value = gauss_linking_polygons(&pa, &pb);
        let link = value.round();
        let residual = (value - link).abs();
        if residual < 0.1 {
            return Ok(LinkingEstimate { link: link as i64, value, residual, pole, attempts: attempt + 1 });
        }
        last_residual = residual;
        a = a.refined();
        b = b.refined();
    }
    Err(Error::numerical("Gauss linking sum did not settle near an integer", last_residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::flow;
    use crate::systolic::{enumerate_tori, pairing, Orbit};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn contact_areas_match_periods() {
        let e = ToricProfile::ellipsoid(1.5, 0.7).unwrap();
        let s = SeifertSurface::gamma1_disk(&e, 0.0).unwrap();
        assert!((s.contact_area - PI * 0.7).abs() < 1e-12);
        let s = SeifertSurface::gamma2_disk(&e, 0.0).unwrap();
        assert!((s.contact_area - PI * 1.5).abs() < 1e-12);
        let f = s.flipped();
        assert_eq!((f.orientation, f.contact_area), (-1, -s.contact_area));
        assert_eq!(f.flipped(), s);
    }

    #[test]
    fn hopf_crossings() {
        let e = ToricProfile::ellipsoid(1.0, 1.0).unwrap();
        let s = SeifertSurface::gamma1_disk(&e, 0.5).unwrap();
        let traj = Trajectory::new(&e, FlowPoint::new(0.3, 0.1, 0.0), PI).unwrap();
        let rec = crossing_count(&e, &traj, &s).unwrap();
        assert_eq!(rec.signed_total, 1);
        assert_eq!(rec.crossings[0].sign, 1);
        assert!((rec.crossings[0].time - 0.2).abs() < 1e-14);
        let traj = Trajectory::new(&e, FlowPoint::new(0.3, 0.1, 0.0), 0.0).unwrap();
        assert_eq!(crossing_count(&e, &traj, &s).unwrap().signed_total, 0);
        let rec = crossing_count(&e, &traj, &s.flipped()).unwrap();
        assert_eq!(rec.rate, 0.0);
    }

    #[test]
    fn crossings_at_the_page_and_degenerate_input() {
        // starting on the page does not count; arriving on it does
        let (first, last, _) = sweep_range(0.0, 1.0, 0.0, TAU).unwrap();
        assert_eq!((first, last), (1, 1));
        let (first, last, _) = sweep_range(0.0, -1.0, 0.0, TAU).unwrap();
        assert_eq!((first, last), (-1, -1));
        assert!(matches!(sweep_range(1.0, 0.0, 1.0, 5.0), Err(Error::Domain(_))));
        assert_eq!(sweep_count(1.0, 0.0, 2.0, 5.0).unwrap(), 0);
    }

    #[test]
    fn torus_orbit_crossings_are_p_and_q() {
        let r = ToricProfile::round();
        let g1 = SeifertSurface::gamma1_disk(&r, 1.0).unwrap();
        let g2 = SeifertSurface::gamma2_disk(&r, 1.0).unwrap();
        for c in enumerate_tori(&r, 5).unwrap() {
            let traj = Trajectory::new(&r, FlowPoint::new(c.t, 0.3, 2.0), c.period).unwrap();
            assert_eq!(crossing_count(&r, &traj, &g1).unwrap().signed_total, c.p as i64);
            assert_eq!(crossing_count(&r, &traj, &g2).unwrap().signed_total, c.q as i64);
            let twice = Trajectory::new(&r, traj.start, 2.0 * c.period).unwrap();
            assert_eq!(crossing_count(&r, &twice, &g1).unwrap().signed_total, 2 * c.p as i64);
            // additivity over concatenated intervals
            let first = Trajectory::new(&r, traj.start, 0.37 * c.period).unwrap();
            let second = Trajectory::new(&r, flow(&r, traj.start, 0.37 * c.period).unwrap(), 0.63 * c.period).unwrap();
            let sum = crossing_count(&r, &first, &g1).unwrap().signed_total
                + crossing_count(&r, &second, &g1).unwrap().signed_total;
            assert_eq!(sum, c.p as i64);
        }
    }

    #[test]
    fn pairing_definition_matches_closed_form() {
        let r = ToricProfile::lp(3.0, 1.2, 0.8).unwrap();
        let g1 = SeifertSurface::gamma1_disk(&r, 0.0).unwrap();
        let vol = contact_volume(&r);
        for c in enumerate_tori(&r, 4).unwrap() {
            let traj = Trajectory::new(&r, FlowPoint::new(c.t, 0.25, 0.5), c.period).unwrap();
            let int = crossing_count(&r, &traj, &g1).unwrap().signed_total as f64;
            let def = int * vol / (c.period * g1.contact_area);
            let closed = pairing(&r, Orbit::Torus { t: c.t }, Orbit::Gamma1).unwrap();
            assert!((def - closed).abs() < 1e-8, "{c:?}: {def} vs {closed}");
        }
    }

    #[test]
    fn rates_on_rational_and_irrational_tori() {
        let r = ToricProfile::round();
        let g1 = SeifertSurface::gamma1_disk(&r, 0.0).unwrap();
        for c in enumerate_tori(&r, 3).unwrap() {
            let est = asymptotic_rate(&r, FlowPoint::new(c.t, 0.4, 0.1), &g1, 10.0 * c.period, 1e-6).unwrap();
            assert!((est.rate - c.p as f64 / c.period).abs() < 1e-12, "{c:?}");
            assert_eq!(est.closing_crossings, 0);
        }
        // φ = 0.3: D₁F = cos φ
        let est = asymptotic_rate(&r, FlowPoint::new(0.3, 1.0, 2.0), &g1, 1000.0, DEFAULT_RETURN_TOLERANCE).unwrap();
        assert!((est.rate - 0.3f64.cos() / PI).abs() <= est.error);
        assert!(est.return_distance <= DEFAULT_RETURN_TOLERANCE);
        let flipped = asymptotic_rate(&r, FlowPoint::new(0.3, 1.0, 2.0), &g1.flipped(), 1000.0, 0.1).unwrap();
        assert_eq!(flipped.rate, -est.rate);
        assert!(matches!(
            asymptotic_rate(&r, FlowPoint::new(0.3, 1.0, 2.0), &g1, 1.0, 0.1),
            Err(Error::Resolution { .. })
        ));
        assert!(matches!(
            asymptotic_rate(&r, FlowPoint::new(r.total_t(), 1.0, 2.0), &g1, 10.0, 0.1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn action_linking_on_ellipsoid_is_exact() {
        let e = ToricProfile::ellipsoid(1.0, 2.0).unwrap();
        let opts = VerifyOptions { n_samples: 2000, seed: 11, ..Default::default() };
        for which in [SpecialOrbit::Gamma1, SpecialOrbit::Gamma2] {
            let s = SeifertSurface::for_orbit(&e, which, 0.7).unwrap();
            let rep = action_linking_verify(&e, &s, &opts).unwrap();
            assert!((rep.lhs - rep.rhs).abs() < 1e-10, "{rep:?}");
            let flipped = action_linking_verify(&e, &s.flipped(), &opts).unwrap();
            assert_eq!((flipped.lhs, flipped.rhs, flipped.z), (-rep.lhs, -rep.rhs, rep.z));
        }
    }

    #[test]
    fn action_linking_on_round_profile() {
        let r = ToricProfile::round();
        let s = SeifertSurface::gamma1_disk(&r, 0.0).unwrap();
        let opts = VerifyOptions { n_samples: 20_000, seed: 5, threads: 3, ..Default::default() };
        let rep = action_linking_verify(&r, &s, &opts).unwrap();
        assert!(rep.z <= 4.0, "{rep:?}");
        assert!((rep.rhs - PI).abs() < 1e-12);
        let serial = action_linking_verify(&r, &s, &VerifyOptions { threads: 1, ..opts }).unwrap();
        assert_eq!(serial, rep);
    }

    #[test]
    fn page_crossing_counts() {
        let page = SeifertSurface::diskmap_page(0.0);
        let path: Vec<[f64; 3]> = (0..=40).map(|i| [i as f64 * 0.05, 0.1, 0.0]).collect();
        let rec = page_crossings(&path, &page).unwrap();
        assert_eq!((rec.signed_total, rec.crossings), (2, 2));
        assert!(rec.warnings.is_empty());
        let rec = page_crossings(&path, &page.flipped()).unwrap();
        assert_eq!(rec.signed_total, -2);
        let tangent = vec![[1.0 - 1e-6, 0.0, 0.0], [1.0 + 1e-6, 1000.0, 0.0]];
        assert_eq!(page_crossings(&tangent, &page).unwrap().warnings.len(), 1);
    }

    #[test]
    fn gauss_sign_convention() {
        // a Hopf link in ℝ³, compared with a midpoint Riemann sum of the Gauss integral
        let n = 400;
        let a: Vec<[f64; 3]> = (0..=n)
            .map(|i| {
                let s = TAU * i as f64 / n as f64;
                [s.cos(), s.sin(), 0.0]
            })
            .collect();
        let b: Vec<[f64; 3]> = (0..=n)
            .map(|i| {
                let s = TAU * i as f64 / n as f64;
                [1.0 + s.cos(), 0.0, s.sin()]
            })
            .collect();
        let exact = gauss_linking_polygons(&a, &b);
        let mut riemann = 0.0;
        for wa in a.windows(2) {
            for wb in b.windows(2) {
                let pa = [0, 1, 2].map(|i| 0.5 * (wa[0][i] + wa[1][i]));
                let pb = [0, 1, 2].map(|i| 0.5 * (wb[0][i] + wb[1][i]));
                let r = sub(pa, pb);
                let d = dot(r, r).sqrt();
                riemann += dot(r, cross(sub(wa[1], wa[0]), sub(wb[1], wb[0]))) / (d * d * d);
            }
        }
        riemann /= 4.0 * PI;
        assert!((exact.abs() - 1.0).abs() < 1e-9);
        assert!((riemann - exact).abs() < 1e-2, "{riemann} vs {exact}");
    }

    #[test]
    fn hopf_fibers_link_once() {
        let est =
            linking_number(&ClosedCurve::gamma1(256).unwrap(), &ClosedCurve::gamma2(256).unwrap(), &Default::default())
                .unwrap();
        assert_eq!(est.link, 1);
        assert!(est.residual < 1e-8);
    }

    #[test]
    fn torus_orbits_link_as_predicted() {
        let r = ToricProfile::round();
        let g1 = ClosedCurve::gamma1(512).unwrap();
        let tori = enumerate_tori(&r, 3).unwrap();
        for c in &tori {
            let k = ClosedCurve::torus_orbit(&r, c.t, c.p, c.q, (0.0, 0.0), 512).unwrap();
            let est = linking_number(&k, &g1, &Default::default()).unwrap();
            assert_eq!(est.link, c.p as i64, "{c:?}");
            assert!(est.residual < 0.05);
        }
        // (2,1) at smaller t, (1,2) at larger t: link = 2·2
        let find = |p, q| tori.iter().find(|c| (c.p, c.q) == (p, q)).unwrap();
        let (lo, hi) = (find(2, 1), find(1, 2));
        assert!(lo.t < hi.t);
        let a = ClosedCurve::torus_orbit(&r, lo.t, 2, 1, (0.0, 0.0), 600).unwrap();
        let b = ClosedCurve::torus_orbit(&r, hi.t, 1, 2, (0.3, 0.0), 600).unwrap();
        assert_eq!(linking_number(&a, &b, &Default::default()).unwrap().link, 4);
        assert_eq!(linking_number(&b, &a, &Default::default()).unwrap().link, 4);
    }

    #[test]
    fn intersecting_curves_are_rejected() {
        let a = ClosedCurve::gamma1(64).unwrap();
        assert!(matches!(linking_number(&a, &a, &Default::default()), Err(Error::Domain(_))));
        assert!(ClosedCurve::new(vec![[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]], 2.0).is_err());
        assert!(ClosedCurve::gamma1(4).is_ok());
        assert!(ClosedCurve::new(
            (0..4).map(|i| [((i as f64) * 1.5).cos(), ((i as f64) * 1.5).sin(), 0.0, 0.0]).collect(),
            0.1
        )
        .is_err());
    }

    #[test]
    fn curve_csv_round_trip() {
        let r = ToricProfile::round();
        let c = ClosedCurve::torus_orbit(&r, FRAC_PI_4, 1, 1, (0.0, 0.0), 32).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = ClosedCurve::read_csv(&buf[..], 2.0).unwrap();
        assert_eq!(back.len(), c.len());
        for (x, y) in back.samples().iter().zip(c.samples()) {
            assert!(dist4(x, y) < 1e-15);
        }
        assert!(ClosedCurve::read_csv("x1,y1,x2,y2\n1,2,3\n".as_bytes(), 2.0).is_err());
    }
}
