//! Special functions: Faddeeva/complex erfc, real error functions, Γ, and
//! integer-order Bessel functions of the first kind.

mod bessel;

use errorfunctions::{ComplexErrorFunctions, RealErrorFunctions};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use bessel::{bessel_j, bessel_j_unchecked, MAX_BESSEL_ARG, MAX_BESSEL_ORDER};

/// Accuracy contract of the evaluators in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracySpec {
    pub target: f64,
    pub max_argument: f64,
}

impl Default for AccuracySpec {
    fn default() -> Self {
        AccuracySpec {
            target: 1e-12,
            max_argument: 50.0,
        }
    }
}

impl AccuracySpec {
    pub fn new(target: f64, max_argument: f64) -> Result<Self> {
        if !(target > 0.0 && target <= 1e-6) {
            return Err(Error::input(format!(
                "accuracy target must lie in (0, 1e-6], got {target}"
            )));
        }
        if !(max_argument > 0.0) {
            return Err(Error::input("maximum argument must be positive"));
        }
        Ok(AccuracySpec { target, max_argument })
    }
}

fn finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("non-finite argument {z}")))
    }
}

/// Faddeeva function `w(z) = exp(-z²) erfc(-iz)`.
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    finite(z)?;
    Ok(z.w())
}

/// `w(z)` without the finiteness check, for inner loops.
#[inline]
pub fn w(z: Complex64) -> Complex64 {
    z.w()
}

/// `erfc(z)` stored as `exp(exponent) · scaled` with `exponent = -z²` and
/// `scaled = w(iz)`, representable even where `erfc` itself is not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledErfc {
    pub exponent: Complex64,
    pub scaled: Complex64,
}

impl ScaledErfc {
    pub fn value(&self) -> Complex64 {
        self.exponent.exp() * self.scaled
    }
}

pub fn erfc_scaled(z: Complex64) -> Result<ScaledErfc> {
    finite(z)?;
    Ok(ScaledErfc {
        exponent: -z * z,
        scaled: Complex64::new(-z.im, z.re).w(),
    })
}

/// Complex complementary error function. Fails with [`Error::Overflow`]
/// where the value exceeds double range; use [`erfc_scaled`] there.
pub fn erfc_complex(z: Complex64) -> Result<Complex64> {
    finite(z)?;
    let v = z.erfc();
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { what: "erfc(z)" })
    }
}

pub fn erf_real(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::input(format!("non-finite argument {x}")));
    }
    Ok(erf(x))
}

/// [`erf_real`] without the finiteness check.
pub fn erf(x: f64) -> f64 {
    RealErrorFunctions::erf(x)
}

pub fn erfc_real(x: f64) -> f64 {
    RealErrorFunctions::erfc(x)
}

/// `exp(x²) erfc(x)`.
pub fn erfcx_real(x: f64) -> f64 {
    RealErrorFunctions::erfcx(x)
}

/// Γ(x) for `0 < x ≤ 50`.
pub fn gamma_real(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 50.0) {
        return Err(Error::input(format!("gamma is supported on (0, 50], got {x}")));
    }
    Ok(statrs::function::gamma::gamma(x))
}

pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::input(format!("ln Γ needs a positive argument, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    // mpmath, 30 digits
    const W_REFERENCE: [((f64, f64), (f64, f64)); 6] = [
        ((0.0, 1.0), (0.42758357615580700441, 0.0)),
        ((1.0, 1.0), (0.30474420525691259246, 0.20821893820283162729)),
        ((-3.5, 0.25), (0.013251686505177889586, -0.16769971774447693808)),
        ((10.0, 0.001), (5.7287175028417533439e-6, 0.056705393651106210677)),
        ((0.5, -0.5), (1.2220084158685705185, 1.1893393085928644093)),
        ((30.0, 40.0), (0.0090278263658235420678, 0.0067681625754047467571)),
    ];

    #[test]
    fn faddeeva_reference_values() {
        assert_eq!(faddeeva(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        for ((zr, zi), (wr, wi)) in W_REFERENCE {
            let got = faddeeva(c(zr, zi)).unwrap();
            assert!(rel(got, c(wr, wi)) < 1e-12, "w({zr}+{zi}i) = {got}");
        }
        assert!(faddeeva(c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn erfc_reference_values() {
        assert_eq!(erfc_complex(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let v = erfc_complex(c(2.0, 0.0)).unwrap();
        assert!((v.re - 0.0046777349810472658379).abs() < 1e-15);
        assert!(matches!(erfc_complex(c(1.0, 30.0)), Err(Error::Overflow { .. })));
        let s = erfc_scaled(c(1.0, 30.0)).unwrap();
        assert!(s.scaled.is_finite());
    }

    #[test]
    fn faddeeva_and_erfc_agree_on_grid() {
        for i in -20..=20 {
            for j in -20..=20 {
                let z = c(i as f64 * 0.5, j as f64 * 0.5);
                let direct = erfc_complex(z).unwrap();
                let via_w = erfc_scaled(z).unwrap().value();
                let scale = direct.norm().max(1e-300);
                assert!((direct - via_w).norm() <= 1e-12 * scale.max(1.0), "z = {z}");
            }
        }
    }

    #[test]
    fn erf_examples() {
        assert_eq!(erf_real(0.0).unwrap(), 0.0);
        assert_eq!(erf_real(20.0).unwrap(), 1.0);
        let bound = (-400f64).exp() / (20.0 * std::f64::consts::PI.sqrt());
        assert!(erfc_real(20.0) <= bound);
        assert!(erfc_real(20.0) > 0.0);
        assert!(erf_real(f64::INFINITY).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert!((gamma_real(0.5).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!((gamma_real(5.0).unwrap() - 24.0).abs() < 1e-12);
        assert!((gamma_real(0.25).unwrap() / 3.6256099082219083119 - 1.0).abs() < 1e-12);
        assert!(gamma_real(0.0).is_err());
        assert!(gamma_real(51.0).is_err());
        assert!(AccuracySpec::new(1e-3, 1.0).is_err());
        assert!(AccuracySpec::new(1e-12, 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn faddeeva_schwarz_reflection(re in -20.0f64..20.0, im in -5.0f64..20.0) {
            let z = c(re, im);
            let lhs = faddeeva(-z.conj()).unwrap();
            let rhs = faddeeva(z).unwrap().conj();
            prop_assert!((lhs - rhs).norm() <= 1e-13 * rhs.norm().max(1e-300));
        }

        #[test]
        fn erfc_reflection(re in -4.0f64..4.0, im in -4.0f64..4.0) {
            let z = c(re, im);
            let s = erfc_complex(z).unwrap() + erfc_complex(-z).unwrap();
            prop_assert!((s - c(2.0, 0.0)).norm() <= 1e-12 * (1.0 + erfc_complex(z).unwrap().norm()));
        }

        #[test]
        fn erf_is_odd_and_complements(x in -30.0f64..30.0) {
            prop_assert_eq!(erf_real(-x).unwrap(), -erf_real(x).unwrap());
            prop_assert!((erf_real(x).unwrap() + erfc_real(x) - 1.0).abs() <= 1e-15);
        }

        #[test]
        fn gamma_recurrence(x in 0.01f64..49.0) {
            let lhs = gamma_real(x + 1.0).unwrap();
            let rhs = x * gamma_real(x).unwrap();
            prop_assert!((lhs / rhs - 1.0).abs() <= 1e-12);
        }
    }
}
