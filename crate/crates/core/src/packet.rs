//! The compact-support Gaussian-polynomial packet, its full-line reference
//! function, and the closed forms attached to them.
//!
//! All quantities are dimensionless (`a = ħ = 1`): positions in `√a`,
//! momenta in `ħ/√a`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, integrate_to_infinity, QuadOptions};
use crate::specfun::{erf, erfcx_real};
use crate::units::{BarrierSpec, PhysicalScales, QuantityKind};

/// Above this half-width the `ε` closed form loses too many digits to
/// cancellation and the defining integral is used instead.
const EPSILON_CLOSED_FORM_MAX_L: f64 = 5.0;

fn poly_norm(l: f64) -> f64 {
    let l2 = l * l;
    105.0 + 8.0 * l2 * (-15.0 + 9.0 * l2 - 4.0 * l2 * l2 + 2.0 * l2 * l2 * l2)
}

fn edge(l: f64) -> f64 {
    let l2 = l * l;
    2.0 * l * (-105.0 + 50.0 * l2 - 20.0 * l2 * l2 + 8.0 * l2 * l2 * l2)
}

/// `16 N/√a`.
fn n_scaled(l: f64) -> f64 {
    (-l * l).exp() * edge(l) + poly_norm(l) * PI.sqrt() * erf(l)
}

fn check_half_width(l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::input(format!("support half-width L must be positive, got {l}")));
    }
    Ok(())
}

/// Normalization constant `N` (units of `√a`).
pub fn normalization(l: f64, a: f64) -> Result<f64> {
    check_half_width(l)?;
    if !(a > 0.0) {
        return Err(Error::input(format!("a must be positive, got {a}")));
    }
    Ok(a.sqrt() / 16.0 * n_scaled(l))
}

/// `((Δx)², (Δp)²)` in units of `a` and `ħ²/a` times the supplied scales.
pub fn variances(l: f64, a: f64, hbar: f64) -> Result<(f64, f64)> {
    check_half_width(l)?;
    let l2 = l * l;
    let g = (-l2).exp();
    let sqrt_pi_erf = PI.sqrt() * erf(l);
    let n = n_scaled(l);
    let dx2 = (g * 2.0 * l * (-945.0 + 210.0 * l2 - 52.0 * l2 * l2 + 8.0 * l2 * l2 * l2)
        + (945.0 - 840.0 * l2 + 360.0 * l2 * l2 - 96.0 * l2 * l2 * l2 + 16.0 * l2 * l2 * l2 * l2) * sqrt_pi_erf)
        / (2.0 * n);
    let dp2 = (g * 2.0 * l * (-225.0 + 18.0 * l2 + 12.0 * l2 * l2 + 8.0 * l2 * l2 * l2)
        + (225.0 + 8.0 * l2 * (-21.0 + 5.0 * l2 + 4.0 * l2 * l2 + 2.0 * l2 * l2 * l2)) * sqrt_pi_erf)
        / (2.0 * n);
    Ok((dx2 * a, dp2 * hbar * hbar / a))
}

/// `e^{L²} · 16 ∫_{|u|>L} e^{-u²}(u² - L²)⁴ du`, the numerator of `ε²` with the
/// Gaussian factor removed.
fn epsilon_numerator_scaled(l: f64) -> Result<f64> {
    if l <= EPSILON_CLOSED_FORM_MAX_L {
        return Ok(-edge(l) + poly_norm(l) * PI.sqrt() * erfcx_real(l));
    }
    // u = L + s: e^{-u²}(u²-L²)⁴ = e^{-L²} e^{-2Ls-s²} (2Ls+s²)⁴
    let f = |s: f64| (-2.0 * l * s - s * s).exp() * (2.0 * l * s + s * s).powi(4);
    let scale = 1.0 / l;
    let breaks: Vec<f64> = [0.0, 1.0, 4.0, 16.0, 64.0].iter().map(|b| b * scale).collect();
    let opts = QuadOptions::with_tolerances(0.0, 1e-13);
    let body = integrate_breaks(f, &breaks, &opts)?.value;
    let tail = integrate_to_infinity(f, 64.0 * scale, &opts)?.value;
    Ok(32.0 * (body + tail))
}

/// `ln ε`, finite even where `ε` underflows.
pub fn ln_epsilon(l: f64) -> Result<f64> {
    check_half_width(l)?;
    let b = epsilon_numerator_scaled(l)?;
    if !(b > 0.0) {
        return Err(Error::Analysis(format!("ε² numerator lost all digits at L = {l}")));
    }
    Ok(0.5 * (-l * l + b.ln() - n_scaled(l).ln()))
}

/// Norm of the difference between the reference function and the packet.
pub fn epsilon_norm(l: f64) -> Result<f64> {
    Ok(ln_epsilon(l)?.exp())
}

/// `ln` of `sqrt(24/√π) e^{-L²/2} L^{-9/2}`.
pub fn ln_epsilon_bound(l: f64) -> f64 {
    0.5 * (24.0 / PI.sqrt()).ln() - 0.5 * l * l - 4.5 * l.ln()
}

pub fn epsilon_bound(l: f64) -> f64 {
    ln_epsilon_bound(l).exp()
}

/// `1/sqrt(1 - K² k0)`, the blow-up factor of `1/sqrt(1-k)` at the window edge.
pub fn faktor2(k_window: f64, k0: f64) -> Result<f64> {
    let arg = 1.0 - k_window * k_window * k0;
    if !(arg > 0.0) {
        return Err(Error::Regime(format!(
            "window edge K = {k_window} reaches the barrier top at k0 = {k0}"
        )));
    }
    Ok(1.0 / arg.sqrt())
}

/// Momentum-space description of an initial packet.
pub trait MomentumAmplitude: Sync {
    /// `f(p)` with `∫|f|² dp` equal to the squared norm of the position-space function.
    fn amplitude(&self, p: f64) -> Complex64;
    /// Momentum expectation.
    fn center(&self) -> f64;
    /// Momentum spread used to size quadrature domains.
    fn sigma_p(&self) -> f64;
    /// Position-space function whose transform is [`MomentumAmplitude::amplitude`].
    fn position_value(&self, x: f64) -> Complex64;
    /// Interval outside which `|f|` is below double-precision relevance.
    fn momentum_support(&self) -> (f64, f64) {
        let w = 12.0 * self.sigma_p();
        (self.center() - w, self.center() + w)
    }
}

/// Compact-support packet of half-width `L` centred at `x0` with mean momentum `p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    pub x0: f64,
    pub p0: f64,
    pub l: f64,
    n_scaled: f64,
    sigma_p: f64,
}

impl PacketSpec {
    pub fn new(x0: f64, p0: f64, l: f64) -> Result<Self> {
        if !(l.is_finite() && l > 2.0) {
            return Err(Error::input(format!("support half-width L must exceed 2, got {l}")));
        }
        if !(p0.is_finite() && p0 > 0.0) {
            return Err(Error::input(format!("p0 must be positive, got {p0}")));
        }
        if !x0.is_finite() || x0 + l > 0.0 {
            return Err(Error::input(format!(
                "support [{}, {}] reaches into the barrier; need x0 + L ≤ 0",
                x0 - l,
                x0 + l
            )));
        }
        let (_, dp2) = variances(l, 1.0, 1.0)?;
        Ok(PacketSpec {
            x0,
            p0,
            l,
            n_scaled: n_scaled(l),
            sigma_p: dp2.sqrt(),
        })
    }

    pub fn from_physical(x0: f64, p0: f64, l: f64, scales: &PhysicalScales) -> Result<Self> {
        PacketSpec::new(
            scales.to_dimensionless(x0, QuantityKind::Position),
            scales.to_dimensionless(p0, QuantityKind::Momentum),
            l,
        )
    }

    pub fn normalization(&self) -> f64 {
        self.n_scaled / 16.0
    }

    pub fn derived(&self) -> Result<PacketDerived> {
        let (dx2, dp2) = variances(self.l, 1.0, 1.0)?;
        let ln_eps = ln_epsilon(self.l)?;
        Ok(PacketDerived {
            n: self.normalization(),
            dx2,
            dp2,
            eps: ln_eps.exp(),
            ln_eps,
        })
    }

    /// `ψ(x)`: exactly zero outside `|x - x0| < L`.
    pub fn packet_value(&self, x: f64) -> Complex64 {
        let u = x - self.x0;
        if u.abs() >= self.l {
            return Complex64::new(0.0, 0.0);
        }
        self.reference_value(x)
    }

    /// `ψ₀(x)`: the reference function, the packet formula on the whole line.
    pub fn reference_value(&self, x: f64) -> Complex64 {
        let u = x - self.x0;
        let poly = (u * u - self.l * self.l).powi(2);
        let modulus = poly * (-0.5 * u * u).exp() / self.normalization().sqrt();
        Complex64::from_polar(modulus, self.p0 * x)
    }

    /// `f₀(p)`, the momentum representation of the reference function.
    pub fn momentum_reference(&self, p: f64) -> Complex64 {
        let k = p - self.p0;
        let k2 = k * k;
        let l2 = self.l * self.l;
        let poly = 3.0 + l2 * l2 + 2.0 * l2 * (k2 - 1.0) - 6.0 * k2 + k2 * k2;
        let modulus = 4.0 * (-0.5 * k2).exp() * poly / self.n_scaled.sqrt();
        Complex64::from_polar(modulus, -k * self.x0)
    }

    /// Probability of `|f₀|²` outside the window.
    pub fn tail_probability(&self, window: &MomentumWindow) -> Result<f64> {
        if (window.p_max + window.p_min - 2.0 * self.p0).abs() > 1e-12 * self.p0 {
            return Err(Error::input("momentum window is not symmetric about p0"));
        }
        let u = self.p0 * (window.k - 1.0);
        let l2 = self.l * self.l;
        let u2 = u * u;
        let poly = -39.0 + 72.0 * l2 - 88.0 * l2 * l2
            + 32.0 * l2 * l2 * l2
            + 2.0 * u2 * (83.0 + 24.0 * l2 * (l2 - 3.0))
            + 4.0 * u2 * u2 * (8.0 * l2 - 17.0)
            + 8.0 * u2 * u2 * u2;
        let inner = 2.0 * u * poly + poly_norm(self.l) * PI.sqrt() * erfcx_real(u);
        Ok((-u2).exp() * inner / self.n_scaled.abs())
    }

    pub fn consistency_condition(&self, d: f64, l: u32, k0: f64, window: &MomentumWindow) -> Result<ConsistencyCheck> {
        if !(k0 > 0.0 && k0 < 1.0) {
            return Err(Error::Regime(format!("k0 = {k0} is outside (0, 1)")));
        }
        let lhs = d * self.p0 * (2 * l + 1) as f64 * ((1.0 - k0) / k0).sqrt();
        let eps = epsilon_norm(self.l)?;
        let rhs = -(eps + self.tail_probability(window)?).ln();
        let margin = rhs - lhs;
        Ok(ConsistencyCheck {
            lhs,
            rhs,
            margin,
            satisfied: margin >= -CONSISTENCY_SLACK,
        })
    }

    pub fn reference_shift_bound(&self) -> Result<ReferenceShift> {
        let ln_eps = ln_epsilon(self.l)?;
        let eps2 = (2.0 * ln_eps).exp();
        let ln_abs_delta = if self.x0 == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.x0.abs().ln() + 2.0 * ln_eps
        };
        let ln_bound = if self.x0 == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.x0.abs().ln() + (24.0 / PI.sqrt()).ln() - self.l * self.l - 9.0 * self.l.ln()
        };
        Ok(ReferenceShift {
            delta_x_ref: self.x0 * eps2,
            ln_abs_delta_x_ref: ln_abs_delta,
            bound: ln_bound.exp(),
            ln_bound,
        })
    }
}

/// Allowed excess of `lhs` over `rhs` for "lhs ≲ rhs", in e-folds.
pub const CONSISTENCY_SLACK: f64 = 1.0;

impl MomentumAmplitude for PacketSpec {
    fn amplitude(&self, p: f64) -> Complex64 {
        self.momentum_reference(p)
    }
    fn center(&self) -> f64 {
        self.p0
    }
    fn sigma_p(&self) -> f64 {
        self.sigma_p
    }
    fn position_value(&self, x: f64) -> Complex64 {
        self.reference_value(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketDerived {
    pub n: f64,
    pub dx2: f64,
    pub dp2: f64,
    pub eps: f64,
    pub ln_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceShift {
    pub delta_x_ref: f64,
    pub ln_abs_delta_x_ref: f64,
    pub bound: f64,
    pub ln_bound: f64,
}

impl ReferenceShift {
    /// True when the bound is at least a thousand times smaller than `delta_x_l`.
    pub fn negligible_vs(&self, delta_x_l: f64) -> bool {
        self.ln_bound < delta_x_l.abs().ln() - 1000f64.ln()
    }
}

/// Momentum interval `[p_min, p_max]` symmetric about `p0`, `K = p_max/p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumWindow {
    pub p_min: f64,
    pub p_max: f64,
    pub k: f64,
}

impl MomentumWindow {
    /// `K = 1` is the empty window.
    pub fn new(p0: f64, k: f64) -> Result<Self> {
        if !(p0 > 0.0) {
            return Err(Error::input(format!("p0 must be positive, got {p0}")));
        }
        if !(k.is_finite() && k >= 1.0) {
            return Err(Error::input(format!("window factor K = {k} puts p_max below p0")));
        }
        Ok(MomentumWindow {
            p_min: (2.0 - k) * p0,
            p_max: k * p0,
            k,
        })
    }

    /// Checks `p_max < sqrt(2mV)`.
    pub fn check_below_barrier(&self, barrier: &BarrierSpec) -> Result<()> {
        if self.p_max >= barrier.critical_momentum() {
            return Err(Error::Regime(format!(
                "window edge p_max = {} is not below sqrt(2mV) = {}",
                self.p_max,
                barrier.critical_momentum()
            )));
        }
        Ok(())
    }
}

/// Plain Gaussian `(πσ²)^{-1/4} e^{ip0x} e^{-(x-x0)²/(2σ²)}`, used by oracle tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

impl GaussianPacket {
    pub fn new(x0: f64, p0: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::input(format!("width must be positive, got {sigma}")));
        }
        Ok(GaussianPacket { x0, p0, sigma })
    }

    /// Freely evolved wavefunction at time `t` (`ħ = m = 1`).
    pub fn evolved(&self, x: f64, t: f64) -> Complex64 {
        let s2 = self.sigma * self.sigma;
        let alpha = Complex64::new(s2, t);
        let u = x - self.x0 - self.p0 * t;
        let phase = Complex64::new(
            0.0,
            self.p0 * (x - self.x0) - 0.5 * self.p0 * self.p0 * t + self.p0 * self.x0,
        );
        let pref = (self.sigma / (PI.sqrt() * alpha)).sqrt();
        pref * (-(u * u) / (2.0 * alpha) + phase).exp()
    }

    /// `⟨(x - ⟨x⟩)²⟩` at time `t`.
    pub fn width2(&self, t: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        0.5 * s2 * (1.0 + (t / s2).powi(2))
    }
}

impl MomentumAmplitude for GaussianPacket {
    fn amplitude(&self, p: f64) -> Complex64 {
        let k = p - self.p0;
        let modulus = (self.sigma * self.sigma / PI).powf(0.25) * (-0.5 * self.sigma * self.sigma * k * k).exp();
        Complex64::from_polar(modulus, -p * self.x0 + self.p0 * self.x0)
    }
    fn center(&self) -> f64 {
        self.p0
    }
    fn sigma_p(&self) -> f64 {
        1.0 / (std::f64::consts::SQRT_2 * self.sigma)
    }
    fn position_value(&self, x: f64) -> Complex64 {
        self.evolved(x, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use proptest::prelude::*;

    // mpmath, 50 digits: (L, N, dx², dp², ε², ln ε)
    const CLOSED: [(f64, f64, f64, f64, f64, f64); 6] = [
        (
            3.0,
            9582.8817245776941668,
            0.33256346642884199913,
            0.75288682462969977755,
            8.3347440027469076628e-8,
            -8.1501239708744718718,
        ),
        (
            5.0,
            641639.92575619330836,
            0.42773266368617001361,
            0.58450468353042547084,
            9.5030738957156418241e-17,
            -18.446165633329520084,
        ),
        (
            7.0,
            9819299.6185139010277,
            0.46123333545241213687,
            0.54202698480451272403,
            1.7449224382911285651e-28,
            -31.957836248568714475,
        ),
        (
            8.0,
            28839395.545349939186,
            0.46995629290867044603,
            0.53196505291842483153,
            1.6073893468220071759e-35,
            -40.057933457800375752,
        ),
        (
            20.0,
            45149215351.308131899,
            0.49503119460254702258,
            0.50501867954317809582,
            5.0587789900914702666e-185,
            -212.17855852801208104,
        ),
        (
            2.01,
            326.42272369176427219,
            0.22682234590846366755,
            1.114068155729466972,
            0.00043964843941903639361,
            -3.864767575872012166,
        ),
    ];

    #[test]
    fn closed_forms_match_high_precision() {
        for (l, n, dx2, dp2, _, ln_eps) in CLOSED {
            assert!((normalization(l, 1.0).unwrap() / n - 1.0).abs() < 1e-13, "N at L = {l}");
            let (x, p) = variances(l, 1.0, 1.0).unwrap();
            assert!((x / dx2 - 1.0).abs() < 1e-12, "dx2 at L = {l}");
            assert!((p / dp2 - 1.0).abs() < 1e-12, "dp2 at L = {l}");
            assert!(
                (ln_epsilon(l).unwrap() - ln_eps).abs() < 1e-9 * ln_eps.abs(),
                "ln eps at L = {l}"
            );
        }
    }

    #[test]
    fn epsilon_branches_agree() {
        let l = EPSILON_CLOSED_FORM_MAX_L;
        let closed = epsilon_numerator_scaled(l).unwrap();
        let f = |s: f64| (-2.0 * l * s - s * s).exp() * (2.0 * l * s + s * s).powi(4);
        let quad = 32.0
            * integrate_to_infinity(f, 0.0, &QuadOptions::with_rel(1e-13))
                .unwrap()
                .value;
        assert!((closed / quad - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scaled_normalization() {
        assert!((normalization(3.0, 4.0).unwrap() / normalization(3.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let (x, p) = variances(20.0, 4.0, 2.0).unwrap();
        assert!((x - 4.0 * 0.49503119460254702258).abs() < 1e-12);
        assert!((p - 0.50501867954317809582).abs() < 1e-12);
    }

    #[test]
    fn packet_value_examples() {
        let spec = PacketSpec::new(-20.0, 10.0, 5.0).unwrap();
        assert_eq!(spec.packet_value(-15.0), Complex64::new(0.0, 0.0));
        let at_center = spec.packet_value(-20.0);
        let expected = Complex64::from_polar(625.0 / spec.normalization().sqrt(), 10.0 * -20.0);
        assert!((at_center - expected).norm() < 1e-15);
        // |ψ| falls off quadratically at the edge, so the one-sided slope vanishes with h
        let edge = -15.0;
        let slopes: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|h| (spec.packet_value(edge - h).norm() - spec.packet_value(edge).norm()) / h)
            .collect();
        assert!(slopes[1].abs() < 0.2 * slopes[0].abs());
        assert!(slopes[2].abs() < 0.2 * slopes[1].abs());
    }

    #[test]
    fn support_invariant_rejects_barrier_overlap() {
        assert!(PacketSpec::new(-5.0, 10.0, 20.0).is_err());
        assert!(PacketSpec::new(-20.0, 10.0, 20.0).is_ok());
        assert!(PacketSpec::new(-20.0, 10.0, 2.0).is_err());
        assert!(PacketSpec::new(-20.0, 0.0, 3.0).is_err());
    }

    #[test]
    fn momentum_reference_at_center() {
        let spec = PacketSpec::new(-20.0, 10.0, 20.0).unwrap();
        let f = spec.momentum_reference(10.0);
        let l2: f64 = 400.0;
        let expected = 4.0 * (3.0 + l2 * l2 - 2.0 * l2) / n_scaled(20.0).sqrt();
        assert!((f.norm() / expected - 1.0).abs() < 1e-14);
        assert!(f.arg().abs() < 1e-15);
        let g = spec.momentum_reference(10.5);
        let phase = Complex64::from_polar(1.0, 0.5 * 20.0);
        assert!((g / g.norm() - phase).norm() < 1e-12);
    }

    #[test]
    fn tail_probability_reference_values() {
        let spec = PacketSpec::new(-20.0, 10.0, 20.0).unwrap();
        // mpmath quadrature of |f₀|² outside the window
        for (k, expected) in [
            (1.4, 1.8108181428465215313e-8),
            (1.2, 0.004887125442700389817),
            (1.05, 0.48169496324119077316),
        ] {
            let w = MomentumWindow::new(10.0, k).unwrap();
            let got = spec.tail_probability(&w).unwrap();
            assert!((got / expected - 1.0).abs() < 1e-10, "K = {k}: {got}");
        }
        let empty = MomentumWindow::new(10.0, 1.0).unwrap();
        assert!((spec.tail_probability(&empty).unwrap() - 1.0).abs() < 1e-14);
        assert!(MomentumWindow::new(10.0, 0.9).is_err());
    }

    #[test]
    fn consistency_at_fig1_parameters() {
        let spec = PacketSpec::new(-20.0, 10.0, 20.0).unwrap();
        let w = MomentumWindow::new(10.0, 1.4).unwrap();
        let c = spec.consistency_condition(1.8, 0, 0.5, &w).unwrap();
        assert!((c.lhs - 18.0).abs() < 1e-12);
        assert!((c.rhs - 17.826901988179174957).abs() < 1e-8);
        assert!(c.satisfied);
        let c1 = spec.consistency_condition(1.8, 1, 0.5, &w).unwrap();
        assert!(!c1.satisfied);
        assert!((faktor2(1.4, 0.5).unwrap() - 7.0710678118654752).abs() < 1e-12);
        assert!(faktor2(1.5, 0.5).is_err());
    }

    #[test]
    fn reference_shift_examples() {
        let zero = PacketSpec::new(0.0 - 3.0, 10.0, 3.0).unwrap();
        assert!(zero.reference_shift_bound().unwrap().delta_x_ref < 0.0);
        let centered = PacketSpec { x0: 0.0, ..zero };
        assert_eq!(centered.reference_shift_bound().unwrap().delta_x_ref, 0.0);

        let fig1 = PacketSpec::new(-20.0, 10.0, 20.0).unwrap();
        let r = fig1.reference_shift_bound().unwrap();
        assert!(r.ln_abs_delta_x_ref < (1e-170f64).ln());
        assert!(r.ln_abs_delta_x_ref <= r.ln_bound);
        assert!(r.negligible_vs(0.2));

        let r3 = zero.reference_shift_bound().unwrap();
        assert!(r3.delta_x_ref.abs() <= r3.bound);
    }

    #[test]
    fn epsilon_bound_holds() {
        assert!(epsilon_norm(3.0).unwrap() <= epsilon_bound(3.0));
        for l in [3.01, 3.5, 4.0, 6.0, 10.0, 20.0] {
            assert!(ln_epsilon(l).unwrap() <= ln_epsilon_bound(l), "L = {l}");
        }
    }

    #[test]
    fn gaussian_evolution_reduces_at_t0() {
        let g = GaussianPacket::new(-3.0, 2.0, 1.5).unwrap();
        let norm = integrate(
            |x: f64| g.evolved(x, 2.0).norm_sqr(),
            -60.0,
            60.0,
            &QuadOptions::default(),
        )
        .unwrap()
        .value;
        assert!((norm - 1.0).abs() < 1e-10);
        let pnorm = integrate(|p: f64| g.amplitude(p).norm_sqr(), -20.0, 24.0, &QuadOptions::default())
            .unwrap()
            .value;
        assert!((pnorm - 1.0).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn variance_bounds_above_two(l in 2.0001f64..40.0) {
            let (dx2, dp2) = variances(l, 1.0, 1.0).unwrap();
            prop_assert!(dx2 <= 0.5);
            prop_assert!(dp2 <= 1.2);
        }

        #[test]
        fn tail_probability_decreases_in_k(k in 1.0f64..1.41) {
            let spec = PacketSpec::new(-20.0, 10.0, 20.0).unwrap();
            let a = spec.tail_probability(&MomentumWindow::new(10.0, k).unwrap()).unwrap();
            let b = spec.tail_probability(&MomentumWindow::new(10.0, k + 0.001).unwrap()).unwrap();
            prop_assert!(b < a);
        }

        #[test]
        fn consistency_lhs_increases_in_l(d in 0.05f64..2.0, l in 0u32..10) {
            let spec = PacketSpec::new(-20.0, 10.0, 20.0).unwrap();
            let w = MomentumWindow::new(10.0, 1.4).unwrap();
            let a = spec.consistency_condition(d, l, 0.5, &w).unwrap();
            let b = spec.consistency_condition(d, l + 1, 0.5, &w).unwrap();
            prop_assert!(b.lhs > a.lhs);
        }
    }
}
