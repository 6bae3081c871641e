use proptest::prelude::*;

use systole_core::systolic::{systolic_interval, witness_measure, SpecialOrbit};
use systole_core::toric::ToricProfile;

/// Spline through a perturbed ellipsoid's polar description; `None` when the
/// perturbation destroys positivity of the partial derivatives.
fn perturbed(a: f64, b: f64, c: [f64; 3], delta: f64) -> Option<ToricProfile> {
    let g = move |th: f64| {
        let bump: f64 = c.iter().enumerate().map(|(k, ck)| ck * (2.0 * (k + 1) as f64 * th).sin()).sum();
        (th.cos() / a + th.sin() / b) * (1.0 + delta * bump)
    };
    let p = ToricProfile::sampled_from_polar(g, 40).ok()?;
    let (d1, d2) = p.min_partials(256);
    (d1 > 0.0 && d2 > 0.0).then_some(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interval_contains_one(
        a in 0.5f64..3.0,
        b in 0.5f64..3.0,
        c in prop::array::uniform3(-1.0f64..1.0),
        delta in 0.0f64..0.1,
    ) {
        let p = perturbed(a, b, c, delta);
        prop_assume!(p.is_some());
        let r = systolic_interval(&p.unwrap(), 256).unwrap();
        prop_assert!(r.contains_one, "{:?}", r.interval);
        prop_assert!(r.interval.0 <= r.interval.1);
        prop_assert!(r.product_range.0 <= r.interval.0 + 1e-12 && r.interval.1 <= r.product_range.1 + 1e-12);
    }

    #[test]
    fn witness_fractions_grow_with_epsilon(
        a in 0.5f64..3.0,
        b in 0.5f64..3.0,
        c in prop::array::uniform3(-1.0f64..1.0),
        e1 in 0.01f64..0.98,
        e2 in 0.01f64..0.98,
    ) {
        let p = perturbed(a, b, c, 0.08);
        prop_assume!(p.is_some());
        let p = p.unwrap();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        for disk in [SpecialOrbit::Gamma1, SpecialOrbit::Gamma2] {
            let w_lo = witness_measure(&p, disk, lo).unwrap();
            let w_hi = witness_measure(&p, disk, hi).unwrap();
            prop_assert!(w_lo.high_fraction <= w_hi.high_fraction + 1e-12);
            prop_assert!(w_lo.low_fraction <= w_hi.low_fraction + 1e-12);
            prop_assert!((0.0..=1.0).contains(&w_hi.high_fraction) && (0.0..=1.0).contains(&w_hi.low_fraction));
        }
    }
}
