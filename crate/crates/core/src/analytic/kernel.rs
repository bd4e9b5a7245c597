use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::w;

/// `K(x, p, t)` split as `U₀ + (U₁ - U₂)`; below the barrier top `U₀` is the
/// evanescent part, above it the transmitted plane-wave part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub u0: Complex64,
    pub remainder: Complex64,
}

impl KernelValue {
    pub fn total(&self) -> Complex64 {
        self.u0 + self.remainder
    }
}

fn rotated(a: f64, c: Complex64) -> Complex64 {
    // e^{iπ/4}(a + c)
    let e = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
    e * (c + a)
}

/// Evaluates the Erfc kernel through `w(ζ)`, `ζ₁,₂ = e^{iπ/4}(x/√(2t) ± q√(t/2))`,
/// so that only bounded quantities are formed.
pub fn kernel_k(x: f64, p: f64, t: f64, v: f64) -> Result<KernelValue> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::input(format!("kernel needs t > 0, got {t}")));
    }
    if !(x.is_finite() && p.is_finite() && v.is_finite()) {
        return Err(Error::input("kernel arguments must be finite"));
    }
    let q2 = p * p - 2.0 * v;
    let q = Complex64::new(q2, 0.0).sqrt();
    let a = x / (2.0 * t).sqrt();
    let c = q * (0.5 * t).sqrt();
    let zeta1 = rotated(a, c);
    let zeta2 = rotated(a, -c);
    let pref = Complex64::new(0.0, -v * t + x * x / (2.0 * t)).exp() / (2.0 * (2.0 * PI).sqrt());
    let mut u0 = Complex64::new(0.0, 0.0);
    let mut remainder = Complex64::new(0.0, 0.0);
    for (zeta, sign) in [(zeta1, 1.0), (zeta2, -1.0)] {
        if zeta.im >= 0.0 {
            remainder += pref * w(zeta);
        } else {
            // w(ζ) = 2e^{-ζ²} - w(-ζ); the Gaussian piece is a plane/evanescent wave
            remainder -= pref * w(-zeta);
            let expo = Complex64::new(0.0, -0.5 * p * p * t) + Complex64::new(0.0, -sign * x) * q;
            u0 += expo.exp() / (2.0 * PI).sqrt();
        }
    }
    Ok(KernelValue { u0, remainder })
}

/// `U₀ = (2π)^{-1/2} exp(-ip²t/2 - X sqrt(2V - p²))` for `p² < 2V`.
pub fn kernel_u0(x: f64, p: f64, t: f64, v: f64) -> Complex64 {
    let kappa = (2.0 * v - p * p).sqrt();
    Complex64::from_polar((-x * kappa).exp() / (2.0 * PI).sqrt(), -0.5 * p * p * t)
}
