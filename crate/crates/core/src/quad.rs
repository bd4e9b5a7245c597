//! Globally adaptive 21-point Gauss–Kronrod quadrature for real and complex
//! integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values the integrator can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-11,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }

    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525452681,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    resabs: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Segment<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = T::zero();
    let mut resabs = WGK[10] * fc.magnitude();
    let mut f1 = [T::zero(); 10];
    let mut f2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let v1 = f(center - dx);
        let v2 = f(center + dx);
        f1[j] = v1;
        f2[j] = v2;
        let sum = v1 + v2;
        res_k = res_k + sum * WGK[j];
        resabs += WGK[j] * (v1.magnitude() + v2.magnitude());
        if j % 2 == 1 {
            res_g = res_g + sum * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut resasc = WGK[10] * (fc - mean).magnitude();
    for j in 0..10 {
        resasc += WGK[j] * ((f1[j] - mean).magnitude() + (f2[j] - mean).magnitude());
    }
    let scale = half.abs();
    let value = res_k * half;
    resabs *= scale;
    resasc *= scale;
    let mut error = ((res_k - res_g) * half).magnitude();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Segment {
        a,
        b,
        value,
        error,
        resabs,
    }
}

fn adapt<T: QuadValue, F: Fn(f64) -> T>(f: &F, breaks: &[f64], opts: &QuadOptions) -> Result<QuadResult<T>> {
    if breaks.len() < 2 {
        return Err(Error::input("quadrature needs at least two breakpoints"));
    }
    if breaks.iter().any(|x| !x.is_finite()) {
        return Err(Error::input("quadrature limits must be finite"));
    }
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[0] != w[1] {
            heap.push(kronrod21(f, w[0], w[1]));
        }
    }
    let (lower, upper) = (breaks[0], breaks[breaks.len() - 1]);
    let mut total = T::zero();
    let mut error = 0.0;
    let mut resabs = 0.0;
    for s in heap.iter() {
        total = total + s.value;
        error += s.error;
        resabs += s.resabs;
    }
    loop {
        let tol = opts
            .abs_tol
            .max(opts.rel_tol * total.magnitude())
            .max(100.0 * f64::EPSILON * resabs);
        if error <= tol || heap.is_empty() {
            // re-sum to shed the drift of the running totals
            let mut exact = T::zero();
            let mut exact_error = 0.0;
            for s in heap.iter() {
                exact = exact + s.value;
                exact_error += s.error;
            }
            return Ok(QuadResult {
                value: exact,
                error: exact_error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        let too_narrow = (worst.b - worst.a).abs() <= 1e3 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE);
        if heap.len() + 2 > opts.max_intervals || too_narrow || !error.is_finite() {
            return Err(Error::Quadrature {
                lower,
                upper,
                estimate: total.magnitude(),
                error,
                intervals: heap.len() + 1,
            });
        }
        let left = kronrod21(f, worst.a, mid);
        let right = kronrod21(f, mid, worst.b);
        total = total - worst.value + left.value + right.value;
        error = (error - worst.error + left.error + right.error).max(0.0);
        resabs += left.resabs + right.resabs - worst.resabs;
        heap.push(left);
        heap.push(right);
    }
}

/// `∫_a^b f(x) dx`.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult<T>> {
    adapt(&f, &[a, b], opts)
}

/// Integral over consecutive `breaks`, which seed the initial partition.
pub fn integrate_breaks<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult<T>> {
    adapt(&f, breaks, opts)
}

/// `∫_a^∞ f(x) dx` through `x = a + (1 - u)/u`.
pub fn integrate_to_infinity<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, opts: &QuadOptions) -> Result<QuadResult<T>> {
    let g = |u: f64| {
        let x = a + (1.0 - u) / u;
        f(x) * (1.0 / (u * u))
    };
    adapt(&g, &[0.0, 1.0], opts)
}

/// Trapezoidal rule over sampled data on a (possibly non-uniform) grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(7) - 3.0 * x * x, -1.0, 2.0, &QuadOptions::default()).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn gaussian_to_infinity() {
        let r = integrate_to_infinity(|x: f64| (-x * x).exp(), 0.0, &QuadOptions::default()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn complex_oscillation() {
        let r = integrate(
            |x: f64| Complex64::new(0.0, 20.0 * x).exp(),
            0.0,
            1.0,
            &QuadOptions::default(),
        )
        .unwrap();
        let exact = (Complex64::new(0.0, 20.0).exp() - 1.0) / Complex64::new(0.0, 20.0);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn kink_with_breakpoint() {
        let r = integrate_breaks(|x: f64| x.abs().sqrt(), &[-1.0, 0.0, 1.0], &QuadOptions::default()).unwrap();
        assert!((r.value - 4.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let grid = [0.0, 0.5, 2.0, 3.0];
        let values: Vec<f64> = grid.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((trapezoid(&grid, &values) - 12.0).abs() < 1e-15);
    }

    #[test]
    fn non_convergence_is_reported() {
        let opts = QuadOptions {
            max_intervals: 10,
            ..Default::default()
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { intervals, .. } if intervals <= 10));
    }
}
