//! The toric Reeb flow in angle-action coordinates.
//!
//! A point of the boundary is `(t, θ₁, θ₂)`: the torus over `C(t)` and two
//! angles. The Reeb field is `2D₁F ∂θ₁ + 2D₂F ∂θ₂`, constant on each torus, so
//! the flow is an exact rotation and no integrator is involved. The Liouville
//! measure `λ₀∧dλ₀` has constant density `1/4` in these coordinates.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::systolic::enumerate_tori;
use crate::toric::ToricProfile;

/// A point `(t, θ₁, θ₂)` of the toric boundary. Angles are kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowPoint {
    pub t: f64,
    pub theta1: f64,
    pub theta2: f64,
}

fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl FlowPoint {
    pub fn new(t: f64, theta1: f64, theta2: f64) -> Self {
        FlowPoint { t, theta1: wrap_angle(theta1), theta2: wrap_angle(theta2) }
    }

    /// The point in `ℝ⁴ = ℂ²`: `(√x cos θ₁, √x sin θ₁, √y cos θ₂, √y sin θ₂)`.
    pub fn to_r4(&self, profile: &ToricProfile) -> Result<[f64; 4]> {
        let c = profile.boundary_point(self.t)?;
        let (r1, r2) = (c.x.sqrt(), c.y.sqrt());
        Ok([r1 * self.theta1.cos(), r1 * self.theta1.sin(), r2 * self.theta2.cos(), r2 * self.theta2.sin()])
    }
}

/// Angular rates `(ω₁, ω₂) = (2D₁F, 2D₂F)` on the torus over `C(t)`.
pub fn reeb_rates(profile: &ToricProfile, t: f64) -> Result<(f64, f64)> {
    let c = profile.boundary_point(t)?;
    Ok((2.0 * c.d1, 2.0 * c.d2))
}

/// Advances a point with known rates by time `s`.
pub fn flow_with_rates(point: FlowPoint, rates: (f64, f64), s: f64) -> FlowPoint {
    FlowPoint::new(point.t, point.theta1 + rates.0 * s, point.theta2 + rates.1 * s)
}

/// Reeb flow for time `s` (exact).
pub fn flow(profile: &ToricProfile, point: FlowPoint, s: f64) -> Result<FlowPoint> {
    Ok(flow_with_rates(point, reeb_rates(profile, point.t)?, s))
}

/// A flow segment `s ↦ φˢ(start)`, `0 ≤ s ≤ duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trajectory {
    pub start: FlowPoint,
    pub duration: f64,
    pub rates: (f64, f64),
}

impl Trajectory {
    pub fn new(profile: &ToricProfile, start: FlowPoint, duration: f64) -> Result<Self> {
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::Domain(format!("trajectory duration {duration} must be finite and >= 0")));
        }
        Ok(Trajectory { start, duration, rates: reeb_rates(profile, start.t)? })
    }

    pub fn at(&self, s: f64) -> FlowPoint {
        flow_with_rates(self.start, self.rates, s)
    }

    pub fn end(&self) -> FlowPoint {
        self.at(self.duration)
    }
}

fn unit_interval(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The `index`-th Liouville sample of the stream `seed`. Each index owns a
/// fixed block of the ChaCha8 keystream, so samples can be generated in any
/// order or partition.
pub fn liouville_point(profile: &ToricProfile, seed: u64, index: u64) -> FlowPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(index as u128 * 6);
    let t = profile.total_t() * unit_interval(&mut rng);
    let theta1 = TAU * unit_interval(&mut rng);
    let theta2 = TAU * unit_interval(&mut rng);
    FlowPoint { t, theta1, theta2 }
}

/// `n` independent samples of the normalized Liouville measure: uniform on
/// `[0, 2A] × [0, 2π)²`.
pub fn liouville_sample(profile: &ToricProfile, n: usize, seed: u64) -> Result<Vec<FlowPoint>> {
    if n == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    Ok((0..n as u64).map(|i| liouville_point(profile, seed, i)).collect())
}

/// Total Liouville mass `(1/4)·2A·(2π)²`.
pub fn liouville_mass(profile: &ToricProfile) -> f64 {
    0.25 * profile.total_t() * TAU * TAU
}

pub fn write_samples_csv<W: Write>(mut out: W, samples: &[FlowPoint]) -> std::io::Result<()> {
    writeln!(out, "t,theta1,theta2")?;
    for p in samples {
        writeln!(out, "{:.17e},{:.17e},{:.17e}", p.t, p.theta1, p.theta2)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile1d {
    One,
    /// `cos(kπt/2A)`
    Cos(u32),
    /// `sin(πt/2A)`
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Cos,
    Sin,
}

/// A test function `f(t)·trig(mθ₁ + nθ₂)` used to measure weak* closeness of
/// orbit measures to the Liouville measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    radial: Profile1d,
    m: i32,
    n: i32,
    phase: Phase,
}

const fn tf(radial: Profile1d, m: i32, n: i32, phase: Phase) -> TestFunction {
    TestFunction { radial, m, n, phase }
}

/// The fixed family of 20 low-degree trigonometric test functions.
pub const TEST_FUNCTIONS: [TestFunction; 20] = {
    use Phase::{Cos as C, Sin as S};
    use Profile1d::*;
    [
        tf(One, 0, 0, C),
        tf(Cos(1), 0, 0, C),
        tf(Cos(2), 0, 0, C),
        tf(Cos(3), 0, 0, C),
        tf(One, 1, 0, C),
        tf(One, 1, 0, S),
        tf(One, 0, 1, C),
        tf(One, 0, 1, S),
        tf(One, 1, -1, C),
        tf(One, 1, -1, S),
        tf(One, 1, 1, C),
        tf(One, 1, 1, S),
        tf(One, 2, -1, C),
        tf(One, 1, -2, C),
        tf(One, 2, 0, C),
        tf(One, 0, 2, C),
        tf(Sin, 0, 0, C),
        tf(Cos(1), 1, -1, C),
        tf(Cos(1), 0, 1, C),
        tf(One, 2, -2, C),
    ]
};

impl TestFunction {
    fn radial_value(&self, t: f64, two_a: f64) -> f64 {
        match self.radial {
            Profile1d::One => 1.0,
            Profile1d::Cos(k) => (k as f64 * PI * t / two_a).cos(),
            Profile1d::Sin => (PI * t / two_a).sin(),
        }
    }

    fn phase_value(&self, angle: f64) -> f64 {
        match self.phase {
            Phase::Cos => angle.cos(),
            Phase::Sin => angle.sin(),
        }
    }

    pub fn eval(&self, point: &FlowPoint, two_a: f64) -> f64 {
        let angle = self.m as f64 * point.theta1 + self.n as f64 * point.theta2;
        self.radial_value(point.t, two_a) * self.phase_value(angle)
    }

    /// Integral against the normalized Liouville measure.
    pub fn liouville_average(&self) -> f64 {
        let radial = match self.radial {
            Profile1d::One => 1.0,
            Profile1d::Cos(_) => 0.0,
            Profile1d::Sin => 2.0 / PI,
        };
        let angular = if self.m == 0 && self.n == 0 && self.phase == Phase::Cos { 1.0 } else { 0.0 };
        radial * angular
    }

    /// Time average over the closed `(p, q)`-orbit through `(t, φ₁, φ₂)`:
    /// the angle `mθ₁ + nθ₂` is constant along the orbit when `mp + nq = 0`
    /// and otherwise winds `mp + nq` times.
    pub fn orbit_average(&self, p: u32, q: u32, t: f64, phase: (f64, f64), two_a: f64) -> f64 {
        let winding = self.m as i64 * p as i64 + self.n as i64 * q as i64;
        if winding != 0 {
            return 0.0;
        }
        let angle = self.m as f64 * phase.0 + self.n as f64 * phase.1;
        self.radial_value(t, two_a) * self.phase_value(angle)
    }
}

/// One orbit of an orbit set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedOrbit {
    pub p: u32,
    pub q: u32,
    pub t: f64,
    pub period: f64,
    pub weight: f64,
}

/// A weighted set of periodic orbits and its distance to the Liouville
/// measure as seen by [`TEST_FUNCTIONS`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitSet {
    pub orbits: Vec<WeightedOrbit>,
    pub discrepancy: f64,
}

impl OrbitSet {
    /// Largest test-function error `|Σ wⱼ·avgⱼ(u) − ∫u dμ|`, orbits started at
    /// phase `(0, 0)`.
    pub fn discrepancy_of(orbits: &[WeightedOrbit], two_a: f64) -> f64 {
        TEST_FUNCTIONS
            .iter()
            .map(|u| {
                let orbit: f64 =
                    orbits.iter().map(|o| o.weight * u.orbit_average(o.p, o.q, o.t, (0.0, 0.0), two_a)).sum();
                (orbit - u.liouville_average()).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Equal-weight orbit set with one rational torus in each of `n_tori` equal
/// parameter subintervals: the one with the smallest `max(p, q)`, ties broken
/// towards the subinterval center.
pub fn approximate_liouville_by_orbits(profile: &ToricProfile, n_tori: usize, max_pq: u32) -> Result<OrbitSet> {
    if n_tori == 0 {
        return Err(Error::Config("n_tori must be at least 1".into()));
    }
    let tori = enumerate_tori(profile, max_pq)?;
    let two_a = profile.total_t();
    if tori.is_empty() && profile.is_ellipsoid() {
        return Err(Error::Precondition(
            "constant Reeb rates with an irrational ratio: no periodic orbits besides the special ones".into(),
        ));
    }
    let width = two_a / n_tori as f64;
    let weight = 1.0 / n_tori as f64;
    let mut orbits = Vec::with_capacity(n_tori);
    for k in 0..n_tori {
        let (lo, hi) = (k as f64 * width, if k + 1 == n_tori { two_a } else { (k + 1) as f64 * width });
        let center = 0.5 * (lo + hi);
        let best = tori
            .iter()
            .filter_map(|c| {
                // a family covers every parameter in its range
                let t = center.clamp(c.t_range.0, c.t_range.1);
                let inside = if c.t_range.0 < c.t_range.1 { t >= lo && t <= hi } else { c.t >= lo && c.t < hi };
                let t = if c.t_range.0 < c.t_range.1 { t } else { c.t };
                inside.then_some((c, t))
            })
            .min_by(|(a, ta), (b, tb)| {
                a.p.max(a.q).cmp(&b.p.max(b.q)).then((ta - center).abs().total_cmp(&(tb - center).abs()))
            });
        let (c, t) = best.ok_or(Error::Coverage { lo, hi, max_pq })?;
        let c_pt = profile.boundary_point(t)?;
        let period = crate::systolic::torus_period(c.p, c.q, c_pt.d1, c_pt.d2);
        orbits.push(WeightedOrbit { p: c.p, q: c.q, t, period, weight });
    }
    let discrepancy = OrbitSet::discrepancy_of(&orbits, two_a);
    Ok(OrbitSet { orbits, discrepancy })
}
