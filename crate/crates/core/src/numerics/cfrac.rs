//! Continued-fraction convergents of real numbers.

/// A convergent `num / den` of a non-negative real number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convergent {
    pub num: u64,
    pub den: u64,
}

/// Convergents of `x ≥ 0` with denominators up to `max_den`, in order of
/// increasing denominator. Expansion stops early when the remainder vanishes
/// to within `1e-12` (the number is treated as rational).
pub fn convergents(x: f64, max_den: u64) -> Vec<Convergent> {
    assert!(x >= 0.0 && x.is_finite(), "convergents need a finite non-negative input");
    let mut out = Vec::new();
    let (mut h_prev, mut h) = (1u64, x.floor() as u64);
    let (mut k_prev, mut k) = (0u64, 1u64);
    out.push(Convergent { num: h, den: k });
    let mut frac = x - x.floor();
    while frac > 1e-12 {
        let inv = 1.0 / frac;
        let a = inv.floor();
        if a > max_den as f64 {
            break;
        }
        let a = a as u64;
        let Some(k_next) = a.checked_mul(k).and_then(|v| v.checked_add(k_prev)) else {
            break;
        };
        if k_next > max_den {
            break;
        }
        let h_next = a * h + h_prev;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
        out.push(Convergent { num: h, den: k });
        frac = inv - inv.floor();
    }
    out
}

/// Best rational approximation `p/q` of the direction `(u, v)` in the closed
/// first quadrant, with `max(p, q) <= max_height`. Returns `(p, q)`.
pub fn direction_approximation(u: f64, v: f64, max_height: u64) -> (u64, u64) {
    assert!(u >= 0.0 && v >= 0.0 && (u > 0.0 || v > 0.0));
    if u >= v {
        let c = convergents(v / u, max_height);
        let last = c.last().expect("at least one convergent");
        (last.den, last.num)
    } else {
        let c = convergents(u / v, max_height);
        let last = c.last().expect("at least one convergent");
        (last.num, last.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_convergents_are_fibonacci() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let c = convergents(phi, 100);
        let dens: Vec<u64> = c.iter().map(|c| c.den).collect();
        assert_eq!(dens, vec![1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
        assert_eq!(c.last().unwrap().num, 144);
    }

    #[test]
    fn rationals_terminate() {
        let c = convergents(0.75, 1_000_000);
        assert_eq!(c.last().copied(), Some(Convergent { num: 3, den: 4 }));
    }

    #[test]
    fn pi_convergents() {
        let c = convergents(std::f64::consts::PI, 1000);
        assert_eq!(c[1], Convergent { num: 22, den: 7 });
        assert_eq!(c.last().copied(), Some(Convergent { num: 355, den: 113 }));
    }

    #[test]
    fn directions() {
        assert_eq!(direction_approximation(1.0, 2.0, 10), (1, 2));
        assert_eq!(direction_approximation(3.0, 0.0, 10), (1, 0));
        assert_eq!(direction_approximation(0.8, 0.6, 10), (4, 3));
    }
}
