//! Physical scales, the barrier, and the sampled-field container shared by the
//! analytic evaluator and the oracle.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `ħ`, `m` and the packet width parameter `a` (a squared length).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScales {
    pub hbar: f64,
    pub mass: f64,
    pub a: f64,
}

impl Default for PhysicalScales {
    fn default() -> Self {
        PhysicalScales {
            hbar: 1.0,
            mass: 1.0,
            a: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantityKind {
    Position,
    Momentum,
    Length,
    Time,
    Energy,
}

impl FromStr for QuantityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "position" => Ok(QuantityKind::Position),
            "momentum" => Ok(QuantityKind::Momentum),
            "length" => Ok(QuantityKind::Length),
            "time" => Ok(QuantityKind::Time),
            "energy" => Ok(QuantityKind::Energy),
            other => Err(Error::input(format!("unknown quantity kind `{other}`"))),
        }
    }
}

impl fmt::Display for QuantityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            QuantityKind::Position => "position",
            QuantityKind::Momentum => "momentum",
            QuantityKind::Length => "length",
            QuantityKind::Time => "time",
            QuantityKind::Energy => "energy",
        };
        f.write_str(name)
    }
}

impl PhysicalScales {
    pub fn new(hbar: f64, mass: f64, a: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("a", a)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::input(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(PhysicalScales { hbar, mass, a })
    }

    /// Multiplier taking a physical quantity of `kind` to its dimensionless value.
    fn factor(&self, kind: QuantityKind) -> f64 {
        let sqrt_a = self.a.sqrt();
        match kind {
            QuantityKind::Position | QuantityKind::Length => 1.0 / sqrt_a,
            QuantityKind::Momentum => sqrt_a / self.hbar,
            QuantityKind::Time => self.hbar / (self.mass * self.a),
            QuantityKind::Energy => self.mass * self.a / (self.hbar * self.hbar),
        }
    }

    pub fn to_dimensionless(&self, value: f64, kind: QuantityKind) -> f64 {
        value * self.factor(kind)
    }

    pub fn from_dimensionless(&self, value: f64, kind: QuantityKind) -> f64 {
        value / self.factor(kind)
    }

    /// String-keyed variant used by configuration overrides.
    pub fn convert(&self, value: f64, kind: &str) -> Result<f64> {
        Ok(self.to_dimensionless(value, kind.parse()?))
    }
}

/// Dimensionless packet/barrier parameters: `P0 = √a p0/ħ`, `X0 = x0/√a`,
/// `D = d/√a`. The time unit is `m a/ħ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    pub p0: f64,
    pub x0: f64,
    pub d: f64,
}

impl DimensionlessParams {
    pub fn from_physical(p0: f64, x0: f64, d: f64, scales: &PhysicalScales) -> Result<Self> {
        let params = DimensionlessParams {
            p0: scales.to_dimensionless(p0, QuantityKind::Momentum),
            x0: scales.to_dimensionless(x0, QuantityKind::Position),
            d: scales.to_dimensionless(d, QuantityKind::Length),
        };
        if !(params.p0 > 0.0) {
            return Err(Error::input(format!("P0 must be positive, got {}", params.p0)));
        }
        Ok(params)
    }

    pub fn time_unit(scales: &PhysicalScales) -> f64 {
        scales.mass * scales.a / scales.hbar
    }
}

/// Rectangular barrier of height `v` on `0 < x < d` (dimensionless).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    pub v: f64,
    pub d: f64,
}

impl BarrierSpec {
    pub fn new(v: f64, d: f64) -> Result<Self> {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::input(format!("barrier height must be positive, got {v}")));
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::input(format!("barrier width must be positive, got {d}")));
        }
        Ok(BarrierSpec { v, d })
    }

    /// Free-particle control; only the oracle and the Laplace checks accept it.
    pub fn free(d: f64) -> Self {
        BarrierSpec { v: 0.0, d }
    }

    /// Barrier whose height puts momentum `p0` at `k0 = p0²/(2V)`.
    pub fn from_k0(p0: f64, k0: f64, d: f64) -> Result<Self> {
        if !(k0.is_finite() && k0 > 0.0) {
            return Err(Error::input(format!("k0 must be positive, got {k0}")));
        }
        BarrierSpec::new(p0 * p0 / (2.0 * k0), d)
    }

    pub fn k(&self, p: f64) -> f64 {
        p * p / (2.0 * self.v)
    }

    pub fn is_tunneling(&self, p: f64) -> bool {
        let k = self.k(p);
        k > 0.0 && k < 1.0
    }

    /// `√(2mV)`: the momentum at which the barrier stops being opaque.
    pub fn critical_momentum(&self) -> f64 {
        (2.0 * self.v).sqrt()
    }

    /// Evanescent decay rate `γ = sqrt(2mV - p²)/ħ`, defined only in the tunneling regime.
    pub fn gamma(&self, p: f64) -> Result<f64> {
        if !self.is_tunneling(p) {
            return Err(Error::Regime(format!(
                "k = {} for p = {p}; the decay rate needs 0 < k < 1",
                self.k(p)
            )));
        }
        Ok((2.0 * self.v - p * p).sqrt())
    }

    pub fn region(&self, x: f64) -> Region {
        if x < 0.0 {
            Region::Left
        } else if x < self.d {
            Region::Barrier
        } else {
            Region::Right
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Left,
    Barrier,
    Right,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Left => "left",
            Region::Barrier => "barrier",
            Region::Right => "right",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Complex wavefunction sampled on a strictly increasing grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Vec<f64>,
    values: Vec<Complex64>,
    regions: Vec<Region>,
    time: f64,
}

impl ComplexField {
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>, time: f64, barrier: &BarrierSpec) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::input(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::input("grid must be strictly increasing"));
        }
        if !(time >= 0.0) {
            return Err(Error::input(format!("time must be non-negative, got {time}")));
        }
        let regions = grid.iter().map(|&x| barrier.region(x)).collect();
        Ok(ComplexField {
            grid,
            values,
            regions,
            time,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64, Region)> + '_ {
        self.grid
            .iter()
            .zip(&self.values)
            .zip(&self.regions)
            .map(|((&x, &v), &r)| (x, v, r))
    }
}

/// `n` evenly spaced points from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let step = (max - min) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { max } else { min + step * i as f64 })
                .collect()
        }
    }
}
