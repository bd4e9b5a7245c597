use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::BarrierSpec;

/// Stationary reflection amplitude `R(p)` at `k = p²/(2mV)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionFactor {
    pub value: Complex64,
    pub k: f64,
}

impl ReflectionFactor {
    pub fn is_tunneling(&self) -> bool {
        self.k < 1.0
    }
}

/// `R(p) = -1 + 2k - 2 sqrt(k(k-1))` with `sqrt(k(k-1)) = i sqrt(k(1-k))` below the
/// barrier top. Above it `R` is real and in `(0, 1)`.
pub fn reflection_factor(p: f64, barrier: &BarrierSpec) -> Result<ReflectionFactor> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Boundary(format!("reflection factor needs p > 0, got {p}")));
    }
    let k = barrier.k(p);
    Ok(ReflectionFactor {
        value: reflection_value(k)?,
        k,
    })
}

pub(crate) fn reflection_value(k: f64) -> Result<Complex64> {
    if (k - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Err(Error::Boundary("k = 1 is the branch point of R".into()));
    }
    if !(k > 0.0) {
        return Err(Error::Boundary(format!("k = {k} must be positive")));
    }
    Ok(if k < 1.0 {
        Complex64::new(2.0 * k - 1.0, -2.0 * (k * (1.0 - k)).sqrt())
    } else {
        let s = 1.0 + (1.0 - 1.0 / k).sqrt();
        Complex64::new(1.0 / (k * s * s), 0.0)
    })
}

/// `ρ(s) = 2/(1 + sqrt(1 - V/(iħs))) - 1`, principal root, evaluated as the
/// limit from `Re s > 0` on the cut.
pub fn rho(s: Complex64, barrier_height: f64) -> Result<Complex64> {
    if s == Complex64::new(0.0, 0.0) || !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::input(format!("ρ(s) is undefined at s = {s}")));
    }
    let is = Complex64::new(-s.im, s.re);
    let mut z = Complex64::new(1.0, 0.0) - barrier_height / is;
    if z.im == 0.0 {
        z.im = 0.0;
    }
    Ok(2.0 / (1.0 + z.sqrt()) - 1.0)
}

/// Phases of `R` and `1 - R²` at `p0` and their common linear slope in `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLinearization {
    pub k0: f64,
    /// `Arg R(p0) = -arccos(2k0 - 1)`.
    pub arg_r: f64,
    /// `Arg(1 - R(p0)²) = arctan((2k0 - 1)/(2 sqrt(k0 - k0²)))`.
    pub arg_1m_r2: f64,
    /// `d Arg R/dp = d Arg(1 - R²)/dp = 2/sqrt(2mV - p0²)`.
    pub slope: f64,
}

pub fn phase_linearization(p0: f64, barrier: &BarrierSpec) -> Result<PhaseLinearization> {
    if !(p0 > 0.0) {
        return Err(Error::Boundary(format!("p0 = {p0} must be positive")));
    }
    let k0 = barrier.k(p0);
    if !(k0 < 1.0) {
        return Err(Error::Boundary(format!("k0 = {k0} is not below the barrier top")));
    }
    Ok(PhaseLinearization {
        k0,
        arg_r: -(2.0 * k0 - 1.0).acos(),
        arg_1m_r2: ((2.0 * k0 - 1.0) / (2.0 * (k0 - k0 * k0).sqrt())).atan(),
        slope: 2.0 / barrier.gamma(p0)?,
    })
}
