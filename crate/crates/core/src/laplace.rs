//! Inverse Laplace transforms of powers of `ρ(s)`, the coefficient functions of
//! the multi-packet series, the Schwarz bound on the neglected convolution tail,
//! and a direct evaluator of the finite convolution for small cases.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analytic::rho;
use crate::error::{Error, Result};
use crate::packet::MomentumAmplitude;
use crate::quad::{integrate, integrate_breaks, QuadOptions};
use crate::specfun::{bessel_j, ln_gamma};
use crate::units::BarrierSpec;

fn i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `L⁻¹(ρ^l)(t) = l/(iˡ t) J_l(Vt/2) e^{-iVt/2}`.
pub fn inverse_rho_power(l: u32, t: f64, v: f64) -> Result<Complex64> {
    if l == 0 {
        return Err(Error::input(
            "ρ⁰ = 1 transforms to δ(t); use a coefficient function's delta weight",
        ));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::input(format!("inverse transform needs t > 0, got {t}")));
    }
    if !(v >= 0.0) {
        return Err(Error::input(format!("barrier height must be non-negative, got {v}")));
    }
    let y = 0.5 * v * t;
    let j = bessel_j(l, y)?;
    Ok(Complex64::from_polar(l as f64 * j / t, -y) / i_pow(l))
}

/// `ρ(s)` with the `s → 0` limit `-1` made explicit.
fn rho_or_limit(s: Complex64, v: f64) -> Result<Complex64> {
    if s == Complex64::new(0.0, 0.0) {
        Ok(if v > 0.0 {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        })
    } else {
        rho(s, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    /// `ρ^{2l+1}(1 - ρ²)`
    A,
    /// `ρ^{2l}(1 + ρ)`
    B,
    /// `ρ^{2l+1}(1 + ρ)`
    C,
    /// `ρ^{2l}(1 - ρ²)`
    G,
}

impl CoefficientKind {
    fn polynomial(self, l: u32) -> [(u32, f64); 2] {
        match self {
            CoefficientKind::A => [(2 * l + 1, 1.0), (2 * l + 3, -1.0)],
            CoefficientKind::B => [(2 * l, 1.0), (2 * l + 1, 1.0)],
            CoefficientKind::C => [(2 * l + 1, 1.0), (2 * l + 2, 1.0)],
            CoefficientKind::G => [(2 * l, 1.0), (2 * l + 2, -1.0)],
        }
    }
}

/// Time-domain coefficient `δ-weight · δ(t) + smooth(t)` of a polynomial in `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFunction {
    pub kind: CoefficientKind,
    pub l: u32,
    pub delta_weight: Complex64,
    /// `(power, coefficient)` pairs with power ≥ 1.
    terms: Vec<(u32, f64)>,
    v: f64,
}

pub fn coefficient_function(kind: CoefficientKind, l: u32, v: f64) -> Result<CoefficientFunction> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::input(format!("barrier height must be positive, got {v}")));
    }
    let mut delta = 0.0;
    let mut terms = Vec::new();
    for (power, c) in kind.polynomial(l) {
        if power == 0 {
            delta += c;
        } else {
            terms.push((power, c));
        }
    }
    Ok(CoefficientFunction {
        kind,
        l,
        delta_weight: Complex64::new(delta, 0.0),
        terms,
        v,
    })
}

impl CoefficientFunction {
    pub fn smooth(&self, t: f64) -> Result<Complex64> {
        let mut sum = Complex64::new(0.0, 0.0);
        for &(n, c) in &self.terms {
            sum += c * inverse_rho_power(n, t, self.v)?;
        }
        Ok(sum)
    }

    /// Laplace-domain value at `s`, the defining polynomial in `ρ(s)`.
    pub fn symbol(&self, s: Complex64) -> Result<Complex64> {
        let r = rho_or_limit(s, self.v)?;
        Ok(self.delta_weight + self.terms.iter().map(|&(n, c)| c * r.powu(n)).sum::<Complex64>())
    }

    /// Numerical forward transform `δ-weight + ∫₀^∞ e^{-st} smooth(t) dt` for real `s > 0`.
    pub fn forward_transform(&self, s: f64) -> Result<Complex64> {
        Ok(self.delta_weight + forward_smooth(|t| self.smooth(t), s, self.v)?)
    }

    /// `∫_t^∞ e^{ip²τ/2} smooth(τ) dτ`, the neglected tail of the convolution.
    pub fn tail(&self, p: f64, t: f64) -> Result<Complex64> {
        let mut sum = Complex64::new(0.0, 0.0);
        for &(n, c) in &self.terms {
            sum += c * rho_power_tail(n, p, t, self.v)?;
        }
        Ok(sum)
    }
}

fn forward_smooth(f: impl Fn(f64) -> Result<Complex64>, s: f64, v: f64) -> Result<Complex64> {
    if !(s > 0.0) {
        return Err(Error::input(format!("forward transform needs real s > 0, got {s}")));
    }
    let t_end = 60.0 / s;
    let panel = if v > 0.0 { (2.0 * PI / v).min(t_end) } else { t_end };
    let n = (t_end / panel).ceil() as usize;
    let breaks: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
    let failed = std::cell::Cell::new(None);
    let integrand = |t: f64| {
        if t == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match f(t) {
            Ok(value) => value * (-s * t).exp(),
            Err(e) => {
                failed.set(Some(e));
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let r = integrate_breaks(integrand, &breaks, &QuadOptions::with_tolerances(1e-14, 1e-12))?;
    match failed.into_inner() {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// Numerical forward transform of `L⁻¹(ρ^l)` at real `s > 0`.
pub fn forward_rho_power(l: u32, s: f64, v: f64) -> Result<Complex64> {
    forward_smooth(|t| inverse_rho_power(l, t, v), s, v)
}

/// `u(n, t) = ∫_t^∞ e^{ip²τ/2} L⁻¹(ρⁿ)(τ) dτ`, from the stationary value
/// `ρ(-ip²/2)ⁿ` minus the finite integral over `[0, t]`.
pub fn rho_power_tail(n: u32, p: f64, t: f64, v: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::input(format!("tail integral needs t > 0, got {t}")));
    }
    let full = rho_or_limit(Complex64::new(0.0, -0.5 * p * p), v)?.powu(n);
    let head = head_integral(n, p, t, v)?;
    Ok(full - head)
}

fn head_integral(n: u32, p: f64, t: f64, v: f64) -> Result<Complex64> {
    // y = Vτ/2: ∫₀^{Vt/2} e^{iβy} n J_n(y)/y dy · i⁻ⁿ with β = p²/V - 1
    let beta = p * p / v - 1.0;
    let y_end = 0.5 * v * t;
    let panels = ((y_end / PI).ceil() as usize).max(1);
    let breaks: Vec<f64> = (0..=panels).map(|i| y_end * i as f64 / panels as f64).collect();
    let integrand = |y: f64| {
        let ratio = if y == 0.0 {
            if n == 1 {
                0.5
            } else {
                0.0
            }
        } else {
            crate::specfun::bessel_j_unchecked(n, y) / y
        };
        Complex64::from_polar(n as f64 * ratio, beta * y)
    };
    let r = integrate_breaks(integrand, &breaks, &QuadOptions::with_tolerances(1e-15, 1e-13))?;
    Ok(r.value / i_pow(n))
}

/// Schwarz bound on `|u(l, t)|` with exponent `ε ∈ (0, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaLBound {
    pub l: u32,
    pub epsilon: f64,
}

impl DeltaLBound {
    pub fn new(l: u32, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::input(format!("ε must lie in (0, 1/2), got {epsilon}")));
        }
        Ok(DeltaLBound { l, epsilon })
    }

    /// `l (2ε)^{-1/2} (2/(Vt))^ε (2^{2ε} Γ(1-2ε)/(2Γ(1-ε)²))^{1/2}`.
    pub fn value(&self, t: f64, v: f64) -> Result<f64> {
        if !(t > 0.0 && v > 0.0) {
            return Err(Error::input(format!(
                "bound needs t > 0 and V > 0, got t = {t}, V = {v}"
            )));
        }
        let e = self.epsilon;
        let ln_moment = 2.0 * e * 2f64.ln() + ln_gamma(1.0 - 2.0 * e)? - 2f64.ln() - 2.0 * ln_gamma(1.0 - e)?;
        Ok(self.l as f64 / (2.0 * e).sqrt() * (2.0 / (v * t)).powf(e) * (0.5 * ln_moment).exp())
    }
}

pub fn delta_l_bound(l: u32, t: f64, v: f64, epsilon: f64) -> Result<f64> {
    DeltaLBound::new(l, epsilon)?.value(t, v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselMoment {
    pub closed: f64,
    pub quadrature: f64,
    /// Spread of the last two acceleration levels of the oscillatory tail.
    pub error_estimate: f64,
}

/// `2^{2ε} Γ(1-2ε) Γ(l+ε) / (2 Γ(1-ε)² Γ(1+l-ε))`.
pub fn bessel_moment_closed(l: u32, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::input(format!("ε must lie in (0, 1/2), got {epsilon}")));
    }
    let l = l as f64;
    let e = epsilon;
    let ln = 2.0 * e * 2f64.ln() + ln_gamma(1.0 - 2.0 * e)? + ln_gamma(l + e)?
        - 2f64.ln()
        - 2.0 * ln_gamma(1.0 - e)?
        - ln_gamma(1.0 + l - e)?;
    Ok(ln.exp())
}

/// Non-oscillatory part `(J² + Y²)/2 ≈ (πy)⁻¹ Σ c_k y^{-2k}` of `J_l(y)²`.
fn modulus_coefficients(l: u32, terms: usize) -> Vec<f64> {
    let mu = 4.0 * (l as f64).powi(2);
    let mut c = vec![1.0];
    let mut ratio = 1.0;
    let mut product = 1.0;
    for k in 1..terms {
        let kf = k as f64;
        ratio *= (2.0 * kf - 1.0) / (2.0 * kf);
        product *= mu - (2.0 * kf - 1.0).powi(2);
        c.push(ratio * product / 4f64.powi(k as i32));
    }
    c
}

/// `∫₀^∞ J_l(y)² y^{2ε-1} dy` by quadrature: substitution near the origin,
/// panels up to a split point, the non-oscillatory asymptotic tail in closed form
/// and the oscillatory remainder summed over half-periods with repeated averaging.
pub fn bessel_moment_integral(l: u32, epsilon: f64) -> Result<BesselMoment> {
    let closed = bessel_moment_closed(l, epsilon)?;
    let e = epsilon;
    let opts = QuadOptions::with_tolerances(1e-15, 1e-13);
    let j2 = |y: f64| crate::specfun::bessel_j_unchecked(l, y).powi(2);

    let inv = 1.0 / (2.0 * e);
    let near = integrate(|u: f64| j2(u.powf(inv)), 0.0, 1.0, &opts)?.value * inv;

    let half = 0.5 * PI;
    let first = ((30.0 / half).ceil() as usize).max(l as usize + 2);
    let split = (l as f64 + 1.0) * half + (first - l as usize - 1) as f64 * half;
    let n_mid = ((split - 1.0) / 2.0).ceil() as usize;
    let mid_breaks: Vec<f64> = (0..=n_mid)
        .map(|i| 1.0 + (split - 1.0) * i as f64 / n_mid as f64)
        .collect();
    let middle = integrate_breaks(|y: f64| j2(y) * y.powf(2.0 * e - 1.0), &mid_breaks, &opts)?.value;

    let coeffs = modulus_coefficients(l, 4);
    let smooth = |y: f64| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * y.powi(-2 * k as i32))
            .sum::<f64>()
            / (PI * y)
    };
    let smooth_tail: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let power = 2.0 * e - 1.0 - 2.0 * k as f64;
            c * split.powf(power) / (-power)
        })
        .sum::<f64>()
        / PI;

    const PANELS: usize = 80;
    const LEVELS: usize = 24;
    let mut partial = Vec::with_capacity(PANELS);
    let mut acc = 0.0;
    for j in 0..PANELS {
        let a = split + j as f64 * half;
        let piece = integrate(|y: f64| (j2(y) - smooth(y)) * y.powf(2.0 * e - 1.0), a, a + half, &opts)?.value;
        acc += piece;
        partial.push(acc);
    }
    let mut level = partial;
    let mut previous = f64::NAN;
    for _ in 0..LEVELS {
        previous = *level.last().expect("non-empty");
        level = level.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    let oscillatory = *level.last().expect("non-empty");

    Ok(BesselMoment {
        closed,
        quadrature: near + middle + smooth_tail + oscillatory,
        error_estimate: (oscillatory - previous).abs(),
    })
}

/// Direct evaluation of one term of the finite convolution against its product form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionAudit {
    pub l: u32,
    pub x: f64,
    pub t: f64,
    /// `∫₀ᵗ F(t-τ) g_l(τ) dτ` including the δ part.
    pub reference: Complex64,
    /// `(2π)^{-1/2} ∫ e^{-ip²t/2} e^{ip(x-d)} w(p) R(p)^{2l}(1-R(p)²) f(p) dp`.
    pub product: Complex64,
    pub discrepancy: f64,
    /// `(2π)^{-1/2} ∫|w f| dp · (B(2l, t) + B(2l+2, t))` at `ε = 1/4`.
    pub envelope: f64,
}

/// `F(σ) = (2π)^{-1/2} ∫ e^{-ip²σ/2} e^{ip(x-d)} e^{iX_l q(p)} f(p) dp` with `q = sqrt(p² - 2V)`.
fn u0_momentum_integral<F: MomentumAmplitude + ?Sized>(
    f: &F,
    weight: &(dyn Fn(f64) -> Complex64 + Sync),
    x: f64,
    sigma: f64,
    breaks: &[f64],
) -> Result<Complex64> {
    let integrand = |p: f64| Complex64::from_polar(1.0, -0.5 * p * p * sigma + p * x) * weight(p) * f.amplitude(p);
    Ok(integrate_breaks(integrand, breaks, &QuadOptions::with_tolerances(1e-15, 1e-11))?.value / (2.0 * PI).sqrt())
}

pub fn convolution_reference<F: MomentumAmplitude + ?Sized>(
    l: u32,
    x: f64,
    t: f64,
    packet: &F,
    barrier: &BarrierSpec,
) -> Result<ConvolutionAudit> {
    if l > 2 {
        return Err(Error::input(format!(
            "the reference convolution is limited to l ≤ 2, got {l}"
        )));
    }
    if !(x > barrier.d) {
        return Err(Error::input(format!(
            "the transmitted convolution needs x > d, got x = {x}"
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::input(format!("convolution needs t > 0, got {t}")));
    }
    let v = barrier.v;
    let g = coefficient_function(CoefficientKind::G, l, v)?;
    let x_l = barrier.d * (2 * l + 1) as f64;
    let weight = move |p: f64| (Complex64::new(0.0, x_l) * Complex64::new(p * p - 2.0 * v, 0.0).sqrt()).exp();
    let (lo, hi) = packet.momentum_support();
    let n = ((hi - lo) / 0.5).ceil() as usize;
    let breaks: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let shift = x - barrier.d;

    let failed = std::cell::Cell::new(None);
    let convolution = |tau: f64| {
        if tau == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let value = g
            .smooth(tau)
            .and_then(|s| Ok(s * u0_momentum_integral(packet, &weight, shift, t - tau, &breaks)?));
        value.unwrap_or_else(|e| {
            failed.set(Some(e));
            Complex64::new(0.0, 0.0)
        })
    };
    let tau_panels = ((t * v / (2.0 * PI)).ceil() as usize).max(4);
    let tau_breaks: Vec<f64> = (0..=tau_panels).map(|i| t * i as f64 / tau_panels as f64).collect();
    let smooth_part = integrate_breaks(convolution, &tau_breaks, &QuadOptions::with_tolerances(1e-14, 1e-9))?.value;
    if let Some(e) = failed.into_inner() {
        return Err(e);
    }
    let reference = g.delta_weight * u0_momentum_integral(packet, &weight, shift, t, &breaks)? + smooth_part;

    let symbol = |p: f64| {
        g.symbol(Complex64::new(0.0, -0.5 * p * p))
            .unwrap_or(Complex64::new(0.0, 0.0))
    };
    let product_weight = |p: f64| weight(p) * symbol(p);
    let product = u0_momentum_integral(packet, &product_weight, shift, t, &breaks)?;

    let mass = integrate_breaks(
        |p: f64| weight(p).norm() * packet.amplitude(p).norm(),
        &breaks,
        &QuadOptions::with_tolerances(1e-15, 1e-10),
    )?
    .value
        / (2.0 * PI).sqrt();
    let envelope = mass * (delta_l_bound(2 * l, t, v, 0.25)? + delta_l_bound(2 * l + 2, t, v, 0.25)?);
    Ok(ConvolutionAudit {
        l,
        x,
        t,
        reference,
        product,
        discrepancy: (product - reference).norm(),
        envelope,
    })
}
