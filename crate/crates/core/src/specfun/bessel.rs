use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_BESSEL_ORDER: u32 = 64;
pub const MAX_BESSEL_ARG: f64 = 1e6;

/// `J_l(x)` for `0 ≤ l ≤ 64` and `0 ≤ x ≤ 1e6`.
pub fn bessel_j(l: u32, x: f64) -> Result<f64> {
    if l > MAX_BESSEL_ORDER {
        return Err(Error::input(format!("Bessel order {l} exceeds {MAX_BESSEL_ORDER}")));
    }
    if !(0.0..=MAX_BESSEL_ARG).contains(&x) {
        return Err(Error::input(format!(
            "Bessel argument {x} outside [0, {MAX_BESSEL_ARG}]"
        )));
    }
    Ok(bessel_j_unchecked(l, x))
}

/// [`bessel_j`] without range checks; negative `x` uses `J_l(-x) = (-1)^l J_l(x)`.
pub fn bessel_j_unchecked(l: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j_unchecked(l, -x);
        return if l % 2 == 1 { -v } else { v };
    }
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x <= 2.0 {
        series(l, x)
    } else if x >= 50.0 && (l as f64) <= 0.5 * x {
        upward(l, x)
    } else {
        miller(l, x)
    }
}

fn series(l: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for k in 1..=l {
        lead *= half / k as f64;
    }
    let q = -half * half;
    let mut term = lead;
    let mut sum = lead;
    for k in 1..60 {
        term *= q / (k as f64 * (k + l) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion of `J_ν(x)` for `ν ∈ {0, 1}` and large `x`.
fn hankel(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..40 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let theta = (0.5 * nu as f64 + 0.25) * PI;
    let (s, c) = x.sin_cos();
    let (st, ct) = theta.sin_cos();
    let cos_chi = c * ct + s * st;
    let sin_chi = s * ct - c * st;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

fn upward(l: u32, x: f64) -> f64 {
    let j0 = hankel(0, x);
    if l == 0 {
        return j0;
    }
    let j1 = hankel(1, x);
    let (mut prev, mut cur) = (j0, j1);
    for k in 1..l {
        let next = 2.0 * k as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn miller(l: u32, x: f64) -> f64 {
    let top = (l as f64).max(x);
    let mut start = (top + 30.0 + (60.0 * top).sqrt()).ceil() as u32;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // cur now holds the unnormalised J_{k-1}
        if k - 1 == l {
            wanted = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    wanted / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    // mpmath besselj, 30 digits
    const REFERENCE: [(u32, f64, f64); 14] = [
        (0, 1.5, 0.51182767173591812875),
        (1, 3.7, 0.053833987745461790513),
        (5, 0.3, 6.3044326337710711158e-7),
        (10, 25.0, -0.075179843948523283841),
        (20, 40.0, 0.12779393355084889625),
        (0, 55.5, -0.0281040743011523956),
        (3, 100.0, 0.076284201720331943409),
        (64, 1e6, 0.00033252910232801970239),
        (7, 1e6, 0.00072596041157235503373),
        (40, 60.0, -0.077646197404715064971),
        (64, 70.0, 0.099019233739506266453),
        (2, 12345.678, -0.00003175001840243704248),
        (30, 2.0, 3.6502562664740971052e-33),
        (1, 1e-8, 5.0000000000000000421e-9),
    ];

    #[test]
    fn reference_values() {
        for (l, x, expected) in REFERENCE {
            let got = bessel_j(l, x).unwrap();
            let err = (got - expected).abs();
            assert!(
                err <= 1e-10 * expected.abs() || err <= 1e-12,
                "J_{l}({x}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
        assert!(bessel_j(65, 1.0).is_err());
        assert!(bessel_j(0, -1.0).is_err());
        assert!(bessel_j(0, 2e6).is_err());
    }

    #[test]
    fn first_zero_of_j0() {
        // bisection on the ascending series alone
        let series_j0 = |x: f64| {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..80 {
                term *= -(x * x / 4.0) / (k * k) as f64;
                sum += term;
            }
            sum
        };
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if series_j0(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 2.40482556).abs() < 1e-7);
        assert!(bessel_j(0, 2.40482556).unwrap().abs() < 1e-7);
        assert!(bessel_j(0, lo).unwrap().abs() < 1e-12);
    }

    #[test]
    fn recurrence_holds() {
        for l in 1..=20u32 {
            let mut x = 0.1;
            while x <= 100.0 {
                let lhs = bessel_j(l - 1, x).unwrap() + bessel_j(l + 1, x).unwrap();
                let rhs = 2.0 * l as f64 / x * bessel_j(l, x).unwrap();
                let scale = lhs.abs().max(rhs.abs()).max(1e-3);
                assert!((lhs - rhs).abs() <= 1e-9 * scale, "l = {l}, x = {x}: {lhs} vs {rhs}");
                x += 0.37;
            }
        }
    }

    #[test]
    fn regimes_agree_at_switch_points() {
        for l in [0u32, 1, 5, 20] {
            let a = series(l, 2.0);
            let b = miller(l, 2.0);
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300), "l = {l}");
        }
        for l in [0u32, 1, 7, 25] {
            let a = upward(l, 50.0);
            let b = miller(l, 50.0);
            assert!((a - b).abs() <= 1e-12, "l = {l}");
        }
    }
}
