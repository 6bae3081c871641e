//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs as a plain binary (`harness = false`) so the lines
//! always appear in the test output.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::path::Path;
use std::process::Command as Process;
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use systole_core::diskmap::{
    mean_action_theorem_check, periodic_points, suspension_dictionary, DictionaryOptions, DiskHamiltonian,
};
use systole_core::flow::approximate_liouville_by_orbits;
use systole_core::numerics::parallel::default_threads;
use systole_core::systolic::{
    average_identity, enumerate_tori, pairing, systolic_interval, witness_measure, Orbit, SpecialOrbit,
};
use systole_core::topology::{
    action_linking_verify, linking_number, ClosedCurve, LinkingOptions, SeifertSurface, VerifyOptions,
};
use systole_core::toric::ToricProfile;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Ellipsoid with a smooth multiplicative perturbation of its polar
/// description that vanishes at both axes, shrunk until both partial
/// derivatives stay positive.
fn spline_profile(rng: &mut ChaCha8Rng) -> ToricProfile {
    let a = uniform(rng, 0.5, 3.0);
    let b = uniform(rng, 0.5, 3.0);
    let c: Vec<f64> = (0..3).map(|_| uniform(rng, -1.0, 1.0)).collect();
    let mut delta = 0.08;
    loop {
        let g = |th: f64| {
            let bump: f64 = c.iter().enumerate().map(|(k, ck)| ck * (2.0 * (k + 1) as f64 * th).sin()).sum();
            (th.cos() / a + th.sin() / b) * (1.0 + delta * bump)
        };
        let p = ToricProfile::sampled_from_polar(g, 48).expect("perturbed ellipsoid");
        let (d1, d2) = p.min_partials(512);
        if d1 > 0.0 && d2 > 0.0 {
            return p;
        }
        delta *= 0.5;
    }
}

fn ellipsoids() -> Vec<ToricProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    (0..10)
        .map(|_| ToricProfile::ellipsoid(uniform(&mut rng, 0.5, 3.0), uniform(&mut rng, 0.5, 3.0)).unwrap())
        .collect()
}

fn lp_profiles() -> Vec<ToricProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ps = [1.5, 3.0, 4.0];
    (0..10)
        .map(|i| ToricProfile::lp(ps[i % 3], uniform(&mut rng, 0.5, 3.0), uniform(&mut rng, 0.5, 3.0)).unwrap())
        .collect()
}

fn c1_ellipsoid_rigidity() -> Outcome {
    let mut worst_interval: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for e in ellipsoids() {
        let r = systolic_interval(&e, 1024).map_err(|e| e.to_string())?;
        worst_interval = worst_interval.max((r.interval.0 - 1.0).abs()).max((r.interval.1 - 1.0).abs());
        worst_norm = worst_norm.max(r.norm);
    }
    let mut least_lp_norm = f64::INFINITY;
    for p in lp_profiles() {
        let r = systolic_interval(&p, 1024).map_err(|e| e.to_string())?;
        least_lp_norm = least_lp_norm.min(r.norm);
    }
    let detail = format!(
        "ellipsoid max |endpoint-1| = {worst_interval:.2e}, max norm = {worst_norm:.2e}; min l^p norm = {least_lp_norm:.3e}"
    );
    if worst_interval < 1e-9 && worst_norm < 1e-9 && least_lp_norm > 1e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c2_interval_membership() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    let mut closest: f64 = f64::INFINITY;
    for _ in 0..50 {
        let p = spline_profile(&mut rng);
        let r = systolic_interval(&p, 512).map_err(|e| e.to_string())?;
        if !r.contains_one {
            failures += 1;
        }
        closest = closest.min((1.0 - r.interval.0).min(r.interval.1 - 1.0));
    }
    let detail = format!("50 profiles, {failures} without 1 in the interval (smallest margin {closest:.2e})");
    if failures == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c3_round_closed_forms() -> Outcome {
    let r = ToricProfile::round();
    let e = |x: systole_core::Result<f64>| x.map_err(|e| e.to_string());
    let rho12 = e(pairing(&r, Orbit::Gamma1, Orbit::Gamma2))?;
    let rho11 = e(pairing(&r, Orbit::Torus { t: FRAC_PI_4 }, Orbit::Gamma1))?;
    let rep = systolic_interval(&r, 4096).map_err(|e| e.to_string())?;
    let err_pair = (rho12 - FRAC_PI_2).abs();
    let err_torus = (rho11 - PI / (2.0 * SQRT_2)).abs();
    let err_lo = rep.interval.0.abs();
    let err_hi = (rep.interval.1 - FRAC_PI_2).abs();
    let detail = format!(
        "|rho(g1,g2)-pi/2| = {err_pair:.2e}, |rho((1,1),g1)-pi/(2sqrt2)| = {err_torus:.2e}, endpoint errors {err_lo:.2e}/{err_hi:.2e}"
    );
    if err_pair < 1e-8 && err_torus < 1e-8 && err_lo < 1e-4 && err_hi < 1e-4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c4_average_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let profiles = [ToricProfile::ellipsoid(1.0, 2.0).unwrap(), ToricProfile::round(), spline_profile(&mut rng)];
    let mut worst: f64 = 0.0;
    for p in &profiles {
        let id = average_identity(p).map_err(|e| e.to_string())?;
        worst = worst.max((id.integral - id.ab).abs());
    }
    let detail = format!("max |integral - ab| = {worst:.2e}");
    if worst < 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c5_enlarged_interval() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut matrix = ellipsoids();
    matrix.extend(lp_profiles());
    matrix.push(ToricProfile::round());
    matrix.extend((0..3).map(|_| spline_profile(&mut rng)));
    let mut worst: f64 = 0.0;
    for p in &matrix {
        let r = systolic_interval(p, 1024).map_err(|e| e.to_string())?;
        worst =
            worst.max((r.enlarged_interval.0 - r.interval.0).abs()).max((r.enlarged_interval.1 - r.interval.1).abs());
    }
    let detail = format!("{} profiles, max endpoint difference {worst:.2e}", matrix.len());
    if worst < 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c6_action_linking() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let profiles = [
        ("ellipsoid(1,1)", ToricProfile::ellipsoid(1.0, 1.0).unwrap(), true),
        ("ellipsoid(1,2)", ToricProfile::ellipsoid(1.0, 2.0).unwrap(), true),
        ("round", ToricProfile::round(), false),
        ("spline", spline_profile(&mut rng), false),
    ];
    let opts = VerifyOptions {
        n_samples: 100_000,
        horizon: 1000.0,
        seed: 6,
        threads: default_threads(),
        ..Default::default()
    };
    let mut cells = Vec::new();
    let mut ok = true;
    for (name, p, exact) in &profiles {
        for disk in [SpecialOrbit::Gamma1, SpecialOrbit::Gamma2] {
            let s = SeifertSurface::for_orbit(p, disk, 0.0).map_err(|e| e.to_string())?;
            let r = action_linking_verify(p, &s, &opts).map_err(|e| format!("{name}/{disk:?}: {e}"))?;
            let exact_ok = !exact || (r.lhs - r.rhs).abs() < 1e-10;
            ok &= r.z <= 4.0 && exact_ok;
            cells.push(format!("{name}/{disk:?} z={:.2}{}", r.z, if *exact { " exact" } else { "" }));
        }
    }
    let detail = cells.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c7_linking_oracle() -> Outcome {
    let r = ToricProfile::round();
    let tori = enumerate_tori(&r, 5).map_err(|e| e.to_string())?;
    let classes: Vec<_> = tori.iter().filter(|c| c.p >= 1 && c.q >= 1).collect();
    let opts = LinkingOptions::default();
    let curve = |c: &systole_core::systolic::TorusClass| {
        ClosedCurve::torus_orbit(&r, c.t, c.p, c.q, (0.0, 0.0), 128 * (c.p + c.q) as usize)
    };
    let gamma1 = ClosedCurve::gamma1(2048).map_err(|e| e.to_string())?;
    let mut worst_residual: f64 = 0.0;
    let mut wrong = Vec::new();
    let mut count = 0;
    for c in &classes {
        let k = curve(c).map_err(|e| e.to_string())?;
        let est = linking_number(&k, &gamma1, &opts).map_err(|e| e.to_string())?;
        worst_residual = worst_residual.max(est.residual);
        count += 1;
        if est.link != c.p as i64 {
            wrong.push(format!("({},{}) vs g1: {}", c.p, c.q, est.link));
        }
    }
    for (i, lo) in classes.iter().enumerate() {
        for hi in &classes[i + 1..] {
            let (lo, hi) = if lo.t < hi.t { (lo, hi) } else { (hi, lo) };
            let a = curve(lo).map_err(|e| e.to_string())?;
            let b = curve(hi).map_err(|e| e.to_string())?;
            let est = linking_number(&a, &b, &opts).map_err(|e| e.to_string())?;
            worst_residual = worst_residual.max(est.residual);
            count += 1;
            let expect = (lo.p * hi.q) as i64;
            if est.link != expect {
                wrong.push(format!("({},{})<({},{}): {} != {expect}", lo.p, lo.q, hi.p, hi.q, est.link));
            }
        }
    }
    let detail = format!(
        "{} classes, {count} links, {} wrong, max residual {worst_residual:.2e}{}",
        classes.len(),
        wrong.len(),
        if wrong.is_empty() { String::new() } else { format!(" [{}]", wrong.join("; ")) }
    );
    if wrong.is_empty() && worst_residual < 0.05 && classes.len() == 19 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c8_witness_sets() -> Outcome {
    let r = ToricProfile::round();
    // ρ(γ_t, γ₁) = (π/2)·cos t on [0, π/2]
    let high = |eps: f64| (2.0 * (1.0 - eps) / PI).acos() / FRAC_PI_2;
    let low = |eps: f64| 1.0 - (2.0 * (1.0 + eps) / PI).min(1.0).acos() / FRAC_PI_2;
    let mut worst: f64 = 0.0;
    let mut positive = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.3] {
        let w = witness_measure(&r, SpecialOrbit::Gamma1, eps).map_err(|e| e.to_string())?;
        positive &= w.high_fraction > 0.0 && w.low_fraction > 0.0;
        worst = worst.max((w.high_fraction - high(eps)).abs()).max((w.low_fraction - low(eps)).abs());
        parts.push(format!("eps={eps}: high {:.6}, low {:.6}", w.high_fraction, w.low_fraction));
    }
    let set = approximate_liouville_by_orbits(&r, 64, 64).map_err(|e| e.to_string())?;
    let detail = format!("{}; oracle error {worst:.2e}; discrepancy {:.3e}", parts.join(", "), set.discrepancy);
    if positive && worst < 1e-6 && set.discrepancy < 0.05 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c9_dictionary() -> Outcome {
    let h = DiskHamiltonian::radial(vec![PI, -2.0 * PI, PI]).map_err(|e| e.to_string())?;
    let pts = periodic_points(&h, 4, 256).map_err(|e| e.to_string())?.points;
    let rep = suspension_dictionary(&h, 1.0, &pts, &DictionaryOptions { quad_n: 32, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let period_res = rep.rows.iter().map(|r| (r.period - r.action - r.k as f64).abs()).fold(0.0, f64::max);
    let crossings_ok = rep.rows.iter().all(|r| r.crossings == r.k as i64);
    let vol_res = (rep.suspension.volume_quadrature - PI * (rep.suspension.cal + 1.0)).abs();
    let cal_res = (rep.suspension.cal - 2.0 * PI / 3.0).abs();
    let chk = mean_action_theorem_check(&h, 0.1, 4, 256, 32).map_err(|e| e.to_string())?;
    let both = chk.witness_low.is_some() && chk.witness_high.is_some();
    let detail = format!(
        "{} orbits, max |T-sigma-kc| = {period_res:.2e}, crossings = k: {crossings_ok}, vol residual {vol_res:.2e}, CAL error {cal_res:.2e}, witnesses on both sides: {both}",
        rep.rows.len()
    );
    if !rep.rows.is_empty() && period_res < 1e-8 && crossings_ok && vol_res < 1e-8 && cal_res < 1e-8 && both {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c10_reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_systole");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let write = |name: &str, text: &str| std::fs::write(d.join(name), text).map_err(|e| e.to_string());
    write("ellipsoid.json", r#"{"kind":"ellipsoid","a":1.0,"b":2.0}"#)?;
    write("round.json", r#"{"kind":"lp","p":2.0,"a":1.0,"b":1.0}"#)?;
    write(
        "h.json",
        r#"{"kind":"radial","h":{"type":"poly","coeffs":[3.141592653589793,-6.283185307179586,3.141592653589793]}}"#,
    )?;
    write(
        "link.json",
        r#"{"profile":{"kind":"lp","p":2.0,"a":1.0,"b":1.0},"first":{"kind":"torus","t":0.4,"p":3,"q":2},"second":{"kind":"gamma1"}}"#,
    )?;
    let runs: [(&str, &str, &[&str]); 7] = [
        ("toric-analyze", "round.json", &[]),
        ("systole", "round.json", &[]),
        ("verify-action-linking", "round.json", &["--samples", "2000"]),
        ("equidistribute", "round.json", &[]),
        ("diskmap-calabi", "h.json", &[]),
        ("diskmap-dictionary", "h.json", &["--constant", "1"]),
        ("linking", "link.json", &[]),
    ];
    let run = |cmd: &str, input: &str, extra: &[&str], out: &Path| -> Result<Vec<u8>, String> {
        let status = Process::new(bin)
            .args([cmd, "--quiet", "--seed", "42", "--input"])
            .arg(d.join(input))
            .arg("--output")
            .arg(out)
            .args(extra)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("{cmd} exited with {status}"));
        }
        std::fs::read(out.join("report.json")).map_err(|e| e.to_string())
    };
    let mut identical = 0;
    let mut differing = Vec::new();
    for (i, (cmd, input, extra)) in runs.iter().enumerate() {
        let a = run(cmd, input, extra, &d.join(format!("a{i}")))?;
        let b = run(cmd, input, extra, &d.join(format!("b{i}")))?;
        if a == b {
            identical += 1;
        } else {
            differing.push(*cmd);
        }
    }
    let detail = format!(
        "{identical}/{} commands byte-identical{}",
        runs.len(),
        if differing.is_empty() { String::new() } else { format!(" (differ: {})", differing.join(", ")) }
    );
    if differing.is_empty() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "ellipsoid rigidity", c1_ellipsoid_rigidity),
        (2, "interval contains one", c2_interval_membership),
        (3, "round-profile closed forms", c3_round_closed_forms),
        (4, "average identity", c4_average_identity),
        (5, "enlarged interval coincides", c5_enlarged_interval),
        (6, "action-linking identity", c6_action_linking),
        (7, "linking oracle", c7_linking_oracle),
        (8, "witness sets and equidistribution", c8_witness_sets),
        (9, "disk-map suspension dictionary", c9_dictionary),
        (10, "reproducibility", c10_reproducibility),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("[PASS] criterion {n:>2} ({name}): {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("[FAIL] criterion {n:>2} ({name}): {d} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
