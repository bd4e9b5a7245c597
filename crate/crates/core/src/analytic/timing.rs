use crate::error::{Error, Result};
use crate::units::BarrierSpec;

use super::reflection::reflection_value;

/// Per-sub-packet record of the transmitted series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketTermSummary {
    pub l: u32,
    /// `exp(-d(2l+1)γ0)`.
    pub attenuation: f64,
    pub ln_attenuation: f64,
    /// `2(1+2l)/sqrt(2mV - p0²)`.
    pub phase_slope: f64,
    /// `δx_l = T_l p0/m`.
    pub shift: f64,
    /// `T_l = 2(1+2l) m ħ/(p0 sqrt(2mV - p0²))`.
    pub delay: f64,
    /// Centroid of `|term|²` when it has been measured.
    pub centroid: Option<f64>,
}

pub fn delay_times(l: u32, p0: f64, barrier: &BarrierSpec) -> Result<PacketTermSummary> {
    let gamma = barrier.gamma(p0)?;
    let order = (1 + 2 * l) as f64;
    let delay = 2.0 * order / (p0 * gamma);
    let ln_attenuation = -barrier.d * order * gamma;
    Ok(PacketTermSummary {
        l,
        attenuation: ln_attenuation.exp(),
        ln_attenuation,
        phase_slope: 2.0 * order / gamma,
        shift: delay * p0,
        delay,
        centroid: None,
    })
}

/// Hartmann time `T_0`.
pub fn hartmann_time(p0: f64, barrier: &BarrierSpec) -> Result<f64> {
    Ok(delay_times(0, p0, barrier)?.delay)
}

/// `(δx_{l+1} - δx_l)/Δx = 4ħ/(p0 Δx) sqrt(k0/(1-k0))`.
pub fn distinguishability_ratio(p0: f64, k0: f64, dx: f64) -> Result<f64> {
    if !(k0 > 0.0 && k0 < 1.0) {
        return Err(Error::Regime(format!("k0 = {k0} is outside (0, 1)")));
    }
    Ok(4.0 / (p0 * dx) * (k0 / (1.0 - k0)).sqrt())
}

/// Squared moduli of the reflected and transmitted factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conservation {
    pub reflected: f64,
    pub transmitted: f64,
}

impl Conservation {
    pub fn total(&self) -> f64 {
        self.reflected + self.transmitted
    }
}

/// `|{1 + e(R0² - 1)/(1 - eR0²)} R0|² + |√e (1 - R0²)/(1 - eR0²)|²` with
/// `e = exp(-2 dγ)` and `exponent = dγ`.
pub fn conservation_check(k0: f64, exponent: f64) -> Result<Conservation> {
    if !(k0 > 0.0 && k0 < 1.0) {
        return Err(Error::Regime(format!("k0 = {k0} is outside (0, 1)")));
    }
    if !(exponent >= 0.0) {
        return Err(Error::input(format!(
            "decay exponent must be non-negative, got {exponent}"
        )));
    }
    let r = reflection_value(k0)?;
    let r2 = r * r;
    let e = (-2.0 * exponent).exp();
    let denom = 1.0 - e * r2;
    let reflected = ((1.0 + e * (r2 - 1.0) / denom) * r).norm_sqr();
    let transmitted = ((-exponent).exp() * (1.0 - r2) / denom).norm_sqr();
    Ok(Conservation { reflected, transmitted })
}
