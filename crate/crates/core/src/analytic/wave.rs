use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::packet::{ConsistencyCheck, MomentumAmplitude, MomentumWindow, PacketSpec};
use crate::quad::{integrate_breaks, trapezoid, QuadOptions};
use crate::units::{BarrierSpec, ComplexField, Region};

use super::reflection::reflection_value;
use super::timing::{delay_times, PacketTermSummary};

/// Attenuation ratio below which the automatic truncation drops terms.
const TRUNCATION_THRESHOLD: f64 = 1e-15;
/// Momentum half-width of the transmitted-term domain, in units of `Δp`.
const TERM_DOMAIN_SIGMAS: f64 = 8.0;
/// Quadrature panel width in momentum, small enough to resolve the chirp.
const PANEL: f64 = 0.5;

fn quad_options() -> QuadOptions {
    QuadOptions::with_tolerances(1e-14, 1e-10)
}

fn panels(lo: f64, hi: f64) -> Vec<f64> {
    let n = ((hi - lo) / PANEL).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / n as f64
            }
        })
        .collect()
}

/// Sign of the spatial phase in the free-evolution integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `exp(+ipx)`: the packet itself.
    Forward,
    /// `exp(-ipx)`: its mirror image about `x = 0`.
    Mirrored,
}

/// `(2π)^{-1/2} ∫ exp(-ip²t/2) exp(±ipx) f(p) dp`.
pub fn free_evolution<F: MomentumAmplitude + ?Sized>(f: &F, x: f64, t: f64, direction: Direction) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(Error::input(format!("free evolution needs t ≥ 0, got {t}")));
    }
    let s = match direction {
        Direction::Forward => 1.0,
        Direction::Mirrored => -1.0,
    };
    let (lo, hi) = f.momentum_support();
    let integrand = |p: f64| Complex64::from_polar(1.0, -0.5 * p * p * t + s * p * x) * f.amplitude(p);
    let r = integrate_breaks(integrand, &panels(lo, hi), &quad_options())?;
    Ok(r.value / (2.0 * PI).sqrt())
}

/// Validity flags attached to an approximate value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Warnings {
    /// A transmitted term beyond the last `l` meeting the consistency condition.
    pub consistency_violated: bool,
    /// `t < 10ħ/V`, where the dropped convolution tail is not yet small.
    pub below_validity_time: bool,
    /// Evaluated outside the region the formula describes.
    pub outside_region: bool,
}

impl Warnings {
    pub fn any(&self) -> bool {
        self.consistency_violated || self.below_validity_time || self.outside_region
    }

    pub fn merge(self, other: Warnings) -> Warnings {
        Warnings {
            consistency_violated: self.consistency_violated || other.consistency_violated,
            below_validity_time: self.below_validity_time || other.below_validity_time,
            outside_region: self.outside_region || other.outside_region,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub value: Complex64,
    pub warnings: Warnings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationRule {
    Attenuation,
    Consistency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub l_max: u32,
    pub rule: TruncationRule,
}

/// How the transmitted wave for `x > d` is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransmittedMode {
    /// Geometric sum with `R(p0)` in front of the free evolution.
    Closed,
    /// Truncated sum of the same terms; `None` picks the automatic truncation.
    TermSum(Option<u32>),
    /// Sum of terms with `R(p)` kept under the momentum integral.
    Terms(Option<u32>),
}

/// The compact-support packet incident on a barrier in the tunneling regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunnelingModel {
    pub packet: PacketSpec,
    pub barrier: BarrierSpec,
    pub window: MomentumWindow,
    k0: f64,
    gamma0: f64,
    r0: Complex64,
    p_lo: f64,
    p_hi: f64,
}

impl TunnelingModel {
    pub fn new(packet: PacketSpec, barrier: BarrierSpec, window: MomentumWindow) -> Result<Self> {
        let k0 = barrier.k(packet.p0);
        if !(k0 > 0.0 && k0 < 1.0) {
            return Err(Error::Regime(format!(
                "k0 = {k0}: the packet's mean momentum must stay below sqrt(2mV)"
            )));
        }
        if (window.p_max + window.p_min - 2.0 * packet.p0).abs() > 1e-12 * packet.p0 {
            return Err(Error::input("momentum window is not centred on p0"));
        }
        window.check_below_barrier(&barrier)?;
        let sigma = packet.sigma_p();
        let p_lo = (packet.p0 - TERM_DOMAIN_SIGMAS * sigma).min(window.p_min).max(0.0);
        let p_hi = (packet.p0 + TERM_DOMAIN_SIGMAS * sigma)
            .max(window.p_max)
            .min(barrier.critical_momentum());
        Ok(TunnelingModel {
            packet,
            barrier,
            window,
            k0,
            gamma0: barrier.gamma(packet.p0)?,
            r0: reflection_value(k0)?,
            p_lo,
            p_hi,
        })
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// `sqrt(2mV - p0²)/ħ`.
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn r0(&self) -> Complex64 {
        self.r0
    }

    /// Momentum interval of the transmitted-term integrals.
    pub fn term_domain(&self) -> (f64, f64) {
        (self.p_lo, self.p_hi)
    }

    /// `10ħ/V`.
    pub fn validity_floor(&self) -> f64 {
        10.0 / self.barrier.v
    }

    pub fn consistency(&self, l: u32) -> Result<ConsistencyCheck> {
        self.packet
            .consistency_condition(self.barrier.d, l, self.k0, &self.window)
    }

    pub fn term_summary(&self, l: u32) -> Result<PacketTermSummary> {
        delay_times(l, self.packet.p0, &self.barrier)
    }

    /// Smaller of the last term above the attenuation threshold and the last term
    /// meeting the consistency condition.
    pub fn truncation(&self) -> Result<Truncation> {
        let per_term = 2.0 * self.barrier.d * self.gamma0;
        let by_attenuation = ((-TRUNCATION_THRESHOLD.ln()) / per_term).ceil() as u32;
        let l_tol = by_attenuation.saturating_sub(1).min(4096);
        let mut l_cons = None;
        for l in 0..=l_tol {
            if self.consistency(l)?.satisfied {
                l_cons = Some(l);
            } else {
                break;
            }
        }
        Ok(match l_cons {
            Some(l) if l >= l_tol => Truncation {
                l_max: l_tol,
                rule: TruncationRule::Attenuation,
            },
            Some(l) => Truncation {
                l_max: l,
                rule: TruncationRule::Consistency,
            },
            None => Truncation {
                l_max: 0,
                rule: TruncationRule::Consistency,
            },
        })
    }

    fn time_warnings(&self, t: f64) -> Warnings {
        Warnings {
            below_validity_time: t < self.validity_floor(),
            ..Default::default()
        }
    }

    fn check_time(t: f64) -> Result<()> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::input(format!("evaluation time must be positive, got {t}")));
        }
        Ok(())
    }

    /// Weight `R(p)^{2l}(1 - R(p)²)` of the `l`-th sub-packet.
    fn term_weight(&self, l: u32, p: f64) -> Complex64 {
        let r = reflection_value(self.barrier.k(p)).unwrap_or(Complex64::new(0.0, 0.0));
        let r2 = r * r;
        r2.powu(l) * (1.0 - r2)
    }

    /// `l`-th summand of the transmitted series with `R(p)` under the integral.
    pub fn transmitted_term(&self, l: u32, x: f64, t: f64) -> Result<Evaluated> {
        Self::check_time(t)?;
        let mut warnings = self.time_warnings(t);
        warnings.consistency_violated = !self.consistency(l)?.satisfied;
        warnings.outside_region = x <= self.barrier.d;
        let att = -(self.barrier.d * (2 * l + 1) as f64 * self.gamma0);
        let shift = x - self.barrier.d;
        let integrand = |p: f64| {
            Complex64::from_polar(1.0, -0.5 * p * p * t + p * shift) * self.term_weight(l, p) * self.packet.amplitude(p)
        };
        let r = integrate_breaks(integrand, &panels(self.p_lo, self.p_hi), &quad_options())?;
        Ok(Evaluated {
            value: r.value * (att.exp() / (2.0 * PI).sqrt()),
            warnings,
        })
    }

    /// `e^{-dγ}(1 - R0²)/(1 - e^{-2dγ}R0²)`.
    pub fn closed_transmitted_factor(&self) -> Complex64 {
        let e = (-self.barrier.d * self.gamma0).exp();
        let r2 = self.r0 * self.r0;
        e * (1.0 - r2) / (1.0 - e * e * r2)
    }

    /// Truncated geometric sum `Σ_{l ≤ l_max} e^{-d(2l+1)γ} R0^{2l}(1 - R0²)`.
    pub fn term_sum_factor(&self, l_max: u32) -> Complex64 {
        let r2 = self.r0 * self.r0;
        (0..=l_max)
            .map(|l| (-self.barrier.d * (2 * l + 1) as f64 * self.gamma0).exp() * r2.powu(l) * (1.0 - r2))
            .sum()
    }

    /// `{1 + e^{-2dγ}(R0² - 1)/(1 - e^{-2dγ}R0²)} R0`.
    pub fn reflected_factor(&self) -> Complex64 {
        let e = (-2.0 * self.barrier.d * self.gamma0).exp();
        let r2 = self.r0 * self.r0;
        (1.0 + e * (r2 - 1.0) / (1.0 - e * r2)) * self.r0
    }

    /// x-dependent factor multiplying the free evolution at the barrier entrance.
    pub fn barrier_factor(&self, x: f64) -> Complex64 {
        let d = self.barrier.d;
        let g = self.gamma0;
        let denom = 1.0 - (-2.0 * d * g).exp() * self.r0 * self.r0;
        let bracket = (1.0 - (-2.0 * (d - x) * g).exp() * self.r0) / denom;
        bracket * (self.r0 + 1.0) * (-x * g).exp()
    }

    /// `(1 + R0) e^{-xγ}`: the thick-barrier (potential step) limit of [`Self::barrier_factor`].
    pub fn step_factor(&self, x: f64) -> Complex64 {
        (self.r0 + 1.0) * (-x * self.gamma0).exp()
    }

    fn resolve(&self, l_max: Option<u32>) -> Result<(u32, Warnings)> {
        let mut w = Warnings::default();
        let l_max = match l_max {
            Some(l) => {
                w.consistency_violated = !self.consistency(l)?.satisfied;
                l
            }
            None => {
                let tr = self.truncation()?;
                w.consistency_violated = !self.consistency(tr.l_max)?.satisfied;
                tr.l_max
            }
        };
        Ok((l_max, w))
    }

    pub fn transmitted_wavefunction(&self, x: f64, t: f64, mode: TransmittedMode) -> Result<Evaluated> {
        Self::check_time(t)?;
        let mut warnings = self.time_warnings(t);
        warnings.outside_region = x <= self.barrier.d;
        let value = match mode {
            TransmittedMode::Closed => {
                self.closed_transmitted_factor()
                    * free_evolution(&self.packet, x - self.barrier.d, t, Direction::Forward)?
            }
            TransmittedMode::TermSum(l_max) => {
                let (l_max, w) = self.resolve(l_max)?;
                warnings = warnings.merge(w);
                self.term_sum_factor(l_max) * free_evolution(&self.packet, x - self.barrier.d, t, Direction::Forward)?
            }
            TransmittedMode::Terms(l_max) => {
                let (l_max, w) = self.resolve(l_max)?;
                warnings = warnings.merge(w);
                let mut sum = Complex64::new(0.0, 0.0);
                for l in 0..=l_max {
                    let term = self.transmitted_term(l, x, t)?;
                    warnings = warnings.merge(Warnings {
                        consistency_violated: false,
                        ..term.warnings
                    });
                    sum += term.value;
                }
                sum
            }
        };
        Ok(Evaluated { value, warnings })
    }

    /// Incoming free packet plus the reflected mirror packet, for `x < 0`.
    pub fn reflected_wavefunction(&self, x: f64, t: f64) -> Result<Evaluated> {
        Self::check_time(t)?;
        let mut warnings = self.time_warnings(t);
        warnings.outside_region = x >= 0.0;
        let incoming = free_evolution(&self.packet, x, t, Direction::Forward)?;
        let mirrored = free_evolution(&self.packet, x, t, Direction::Mirrored)?;
        Ok(Evaluated {
            value: incoming + self.reflected_factor() * mirrored,
            warnings,
        })
    }

    /// In-barrier wave for `0 < x < d`.
    pub fn barrier_wavefunction(&self, x: f64, t: f64) -> Result<Evaluated> {
        Self::check_time(t)?;
        let mut warnings = self.time_warnings(t);
        warnings.outside_region = !(x >= 0.0 && x < self.barrier.d);
        let entrance = free_evolution(&self.packet, 0.0, t, Direction::Forward)?;
        Ok(Evaluated {
            value: self.barrier_factor(x) * entrance,
            warnings,
        })
    }

    /// Region-wise composition of the three approximate solutions.
    pub fn wavefunction(&self, x: f64, t: f64, mode: TransmittedMode) -> Result<Evaluated> {
        match self.barrier.region(x) {
            Region::Left => self.reflected_wavefunction(x, t),
            Region::Barrier => self.barrier_wavefunction(x, t),
            Region::Right => self.transmitted_wavefunction(x, t, mode),
        }
    }

    /// Centroid of the free reference packet shifted by `d`.
    pub fn free_reference_centroid(&self, t: f64) -> f64 {
        self.barrier.d + self.packet.x0 + self.packet.p0 * t
    }

    /// Centroid of `|term l|²` at time `t` from its momentum representation:
    /// `d + ⟨i∂_p⟩ + t⟨p⟩` under the weight `|R^{2l}(1-R²) f₀|²`.
    pub fn term_centroid(&self, l: u32, t: f64) -> Result<f64> {
        let g2 = |p: f64| (self.term_weight(l, p) * self.packet.amplitude(p)).norm_sqr();
        // d/dp arg(R^{2l}(1-R²)f₀) = 2(2l+1)/sqrt(2V - p²) - x0
        let slope = |p: f64| 2.0 * (2 * l + 1) as f64 / (2.0 * self.barrier.v - p * p).sqrt() - self.packet.x0;
        let breaks = panels(self.p_lo, self.p_hi);
        let opts = QuadOptions::with_tolerances(0.0, 1e-12);
        let norm = integrate_breaks(g2, &breaks, &opts)?.value;
        let x_mean = -integrate_breaks(|p| g2(p) * slope(p), &breaks, &opts)?.value / norm;
        let p_mean = integrate_breaks(|p| g2(p) * p, &breaks, &opts)?.value / norm;
        Ok(self.barrier.d + x_mean + t * p_mean)
    }
}

/// What [`evaluate_field`] samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSource {
    TransmittedTerm(u32),
    Transmitted(TransmittedMode),
    Reflected,
    Barrier,
    /// The incident packet evolved without a barrier.
    Free,
    Piecewise(TransmittedMode),
}

/// Samples `source` on `grid` at time `t`, in parallel over grid points.
pub fn evaluate_field(
    model: &TunnelingModel,
    grid: &[f64],
    t: f64,
    source: FieldSource,
) -> Result<(ComplexField, Warnings)> {
    let evaluated: Vec<Evaluated> = grid
        .par_iter()
        .map(|&x| match source {
            FieldSource::TransmittedTerm(l) => model.transmitted_term(l, x, t),
            FieldSource::Transmitted(mode) => model.transmitted_wavefunction(x, t, mode),
            FieldSource::Reflected => model.reflected_wavefunction(x, t),
            FieldSource::Barrier => model.barrier_wavefunction(x, t),
            FieldSource::Free => Ok(Evaluated {
                value: free_evolution(&model.packet, x, t, Direction::Forward)?,
                warnings: Warnings::default(),
            }),
            FieldSource::Piecewise(mode) => model.wavefunction(x, t, mode),
        })
        .collect::<Result<_>>()?;
    let mut warnings = Warnings::default();
    let mut values = Vec::with_capacity(evaluated.len());
    for e in evaluated {
        values.push(e.value);
        warnings = warnings.merge(Warnings {
            outside_region: false,
            ..e.warnings
        });
    }
    Ok((ComplexField::new(grid.to_vec(), values, t, &model.barrier)?, warnings))
}

/// `∫x|ψ|²/∫|ψ|²` by the trapezoidal rule.
pub fn centroid(field: &ComplexField) -> Result<f64> {
    let density: Vec<f64> = field.values().iter().map(|v| v.norm_sqr()).collect();
    let moment: Vec<f64> = field.grid().iter().zip(&density).map(|(x, d)| x * d).collect();
    let norm = trapezoid(field.grid(), &density);
    if !(norm > 0.0) {
        return Err(Error::Analysis("centroid of a field with zero norm".into()));
    }
    Ok(trapezoid(field.grid(), &moment) / norm)
}
