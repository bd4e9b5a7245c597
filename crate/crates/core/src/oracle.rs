//! Crank–Nicolson integration of the time-dependent Schrödinger equation on a
//! uniform grid with hard walls, used as an independent reference.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::packet::{GaussianPacket, MomentumAmplitude, PacketSpec};
use crate::quad::{integrate_breaks, trapezoid, QuadOptions};
use crate::units::{BarrierSpec, ComplexField};

/// Momentum spread multiple that defines the highest resolved momentum.
const SPECTRAL_SIGMAS: f64 = 8.0;

/// Initial wavefunction of an oracle run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Compact(PacketSpec),
    Gaussian(GaussianPacket),
}

impl InitialState {
    pub fn value(&self, x: f64) -> Complex64 {
        match self {
            InitialState::Compact(p) => p.packet_value(x),
            InitialState::Gaussian(g) => g.evolved(x, 0.0),
        }
    }

    pub fn x0(&self) -> f64 {
        match self {
            InitialState::Compact(p) => p.x0,
            InitialState::Gaussian(g) => g.x0,
        }
    }

    pub fn p0(&self) -> f64 {
        match self {
            InitialState::Compact(p) => p.p0,
            InitialState::Gaussian(g) => g.p0,
        }
    }

    fn amplitude(&self) -> &dyn MomentumAmplitude {
        match self {
            InitialState::Compact(p) => p,
            InitialState::Gaussian(g) => g,
        }
    }

    /// Largest momentum the grid has to resolve.
    pub fn p_max_effective(&self) -> f64 {
        let a = self.amplitude();
        a.center().abs() + SPECTRAL_SIGMAS * a.sigma_p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dt: f64,
    pub t_end: f64,
    pub barrier: BarrierSpec,
    pub initial: InitialState,
}

impl OracleConfig {
    /// Builds a grid of spacing `h` on `[x_min, x_max]`; `x_max` is moved up to
    /// the next grid point if needed.
    pub fn with_spacing(
        x_min: f64,
        x_max: f64,
        h: f64,
        dt: f64,
        t_end: f64,
        barrier: BarrierSpec,
        initial: InitialState,
    ) -> Result<Self> {
        if !(h > 0.0 && x_max > x_min) {
            return Err(Error::Config(format!(
                "invalid grid [{x_min}, {x_max}] with spacing {h}"
            )));
        }
        let intervals = ((x_max - x_min) / h - 1e-9).ceil() as usize;
        let config = OracleConfig {
            x_min,
            x_max: x_min + intervals as f64 * h,
            n_points: intervals + 1,
            dt,
            t_end,
            barrier,
            initial,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_points).map(|j| self.x_min + j as f64 * h).collect()
    }

    /// Same domain with half the spacing and half the time step.
    pub fn refined(&self) -> Self {
        OracleConfig {
            n_points: 2 * self.n_points - 1,
            dt: 0.5 * self.dt,
            ..*self
        }
    }

    fn node_index(&self, x: f64) -> Option<usize> {
        let u = (x - self.x_min) / self.spacing();
        let j = u.round();
        ((u - j).abs() < 1e-6 && j >= 0.0 && j < self.n_points as f64).then_some(j as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 3 || !(self.x_max > self.x_min) {
            return Err(Error::Config(
                "oracle grid needs at least three points on a non-empty domain".into(),
            ));
        }
        if !(self.dt > 0.0 && self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "dt = {} and t_end = {} must be positive",
                self.dt, self.t_end
            )));
        }
        let h = self.spacing();
        let p_max = self.initial.p_max_effective().max((2.0 * self.barrier.v).sqrt());
        if h > 2.0 * PI / (12.0 * p_max) {
            return Err(Error::Config(format!(
                "grid spacing {h} does not resolve momentum {p_max}; need h ≤ {}",
                2.0 * PI / (12.0 * p_max)
            )));
        }
        let e_max = 0.5 * p_max * p_max + self.barrier.v;
        if self.dt * e_max > 1.0 {
            return Err(Error::Config(format!(
                "time step {} too coarse for energies up to {e_max}; need dt ≤ {}",
                self.dt,
                1.0 / e_max
            )));
        }
        if self.barrier.v != 0.0 && (self.node_index(0.0).is_none() || self.node_index(self.barrier.d).is_none()) {
            return Err(Error::Config("barrier edges 0 and d must be grid points".into()));
        }
        Ok(())
    }

    fn potential(&self, x: f64) -> f64 {
        let h = self.spacing();
        let d = self.barrier.d;
        let edge = 1e-6 * h;
        if (x - 0.0).abs() < edge || (x - d).abs() < edge {
            0.5 * self.barrier.v
        } else if x > 0.0 && x < d {
            self.barrier.v
        } else {
            0.0
        }
    }
}

/// Pre-factored `(1 + iHΔt/2)` with the constant off-diagonal of the kinetic term.
struct CrankNicolson {
    off: Complex64,
    diag_b: Vec<Complex64>,
    c_prime: Vec<Complex64>,
    inv_denom: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl CrankNicolson {
    fn new(potential: &[f64], h: f64, dt: f64) -> Self {
        let n = potential.len();
        let half = Complex64::new(0.0, 0.5 * dt);
        let off = half * (-0.5 / (h * h));
        let diag_a: Vec<Complex64> = potential.iter().map(|v| 1.0 + half * (1.0 / (h * h) + v)).collect();
        let diag_b: Vec<Complex64> = potential.iter().map(|v| 1.0 - half * (1.0 / (h * h) + v)).collect();
        let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
        let mut inv_denom = vec![Complex64::new(0.0, 0.0); n];
        let mut prev = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let denom = diag_a[j] - off * prev;
            inv_denom[j] = 1.0 / denom;
            c_prime[j] = off * inv_denom[j];
            prev = c_prime[j];
        }
        CrankNicolson {
            off,
            diag_b,
            c_prime,
            inv_denom,
            rhs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// One step on the interior unknowns; `psi` excludes the wall nodes.
    fn step(&mut self, psi: &mut [Complex64]) {
        let n = psi.len();
        let off_b = -self.off;
        for j in 0..n {
            let mut r = self.diag_b[j] * psi[j];
            if j > 0 {
                r += off_b * psi[j - 1];
            }
            if j + 1 < n {
                r += off_b * psi[j + 1];
            }
            self.rhs[j] = r;
        }
        let mut prev = Complex64::new(0.0, 0.0);
        for j in 0..n {
            prev = (self.rhs[j] - self.off * prev) * self.inv_denom[j];
            self.rhs[j] = prev;
        }
        let mut next = Complex64::new(0.0, 0.0);
        for j in (0..n).rev() {
            next = self.rhs[j] - self.c_prime[j] * next;
            psi[j] = next;
        }
    }
}

/// Evolves the initial state and returns frames at `times` (each a multiple of `dt`).
pub fn evolve(config: &OracleConfig, times: &[f64]) -> Result<Vec<ComplexField>> {
    config.validate()?;
    let mut steps = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 0.0 && t <= config.t_end * (1.0 + 1e-12)) {
            return Err(Error::Config(format!(
                "frame time {t} is outside [0, {}]",
                config.t_end
            )));
        }
        let n = (t / config.dt).round();
        if (n * config.dt - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::Config(format!(
                "frame time {t} is not a multiple of dt = {}",
                config.dt
            )));
        }
        steps.push(n as usize);
    }
    let grid = config.grid();
    let h = config.spacing();
    let interior = &grid[1..grid.len() - 1];
    let potential: Vec<f64> = interior.iter().map(|&x| config.potential(x)).collect();
    let mut solver = CrankNicolson::new(&potential, h, config.dt);
    let mut psi: Vec<Complex64> = interior.iter().map(|&x| config.initial.value(x)).collect();

    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by_key(|&i| steps[i]);
    let mut frames: Vec<Option<ComplexField>> = vec![None; times.len()];
    let mut done = 0;
    for i in order {
        while done < steps[i] {
            solver.step(&mut psi);
            done += 1;
        }
        let mut values = Vec::with_capacity(grid.len());
        values.push(Complex64::new(0.0, 0.0));
        values.extend_from_slice(&psi);
        values.push(Complex64::new(0.0, 0.0));
        frames[i] = Some(ComplexField::new(
            grid.clone(),
            values,
            done as f64 * config.dt,
            &config.barrier,
        )?);
    }
    Ok(frames.into_iter().map(|f| f.expect("every frame is filled")).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSet {
    pub norm: f64,
    pub centroid: f64,
    pub p_left: f64,
    pub p_barrier: f64,
    pub p_right: f64,
    /// Centroid of `|ψ|²` restricted to `x > d`.
    pub right_centroid: Option<f64>,
    pub peak_position: f64,
}

/// Trapezoidal integrals of `|ψ|²` split at the grid nodes closest to `0` and `d`.
pub fn observables(frame: &ComplexField, barrier: &BarrierSpec) -> ObservableSet {
    let grid = frame.grid();
    let density: Vec<f64> = frame.values().iter().map(|v| v.norm_sqr()).collect();
    let moment: Vec<f64> = grid.iter().zip(&density).map(|(x, r)| x * r).collect();
    let split = |x: f64| grid.partition_point(|&g| g < x - 1e-9).min(grid.len() - 1);
    let i0 = split(0.0);
    let id = split(barrier.d).max(i0);
    let norm = trapezoid(grid, &density);
    let p_left = trapezoid(&grid[..=i0], &density[..=i0]);
    let p_barrier = trapezoid(&grid[i0..=id], &density[i0..=id]);
    let p_right = trapezoid(&grid[id..], &density[id..]);
    let right_moment = trapezoid(&grid[id..], &moment[id..]);
    let (imax, _) = density
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc });
    let mut peak = grid[imax];
    if imax > 0 && imax + 1 < grid.len() {
        let (a, b, c) = (density[imax - 1], density[imax], density[imax + 1]);
        let curvature = a - 2.0 * b + c;
        if curvature < 0.0 {
            peak += 0.5 * (a - c) / curvature * (grid[imax + 1] - grid[imax]);
        }
    }
    ObservableSet {
        norm,
        centroid: trapezoid(grid, &moment) / norm,
        p_left,
        p_barrier,
        p_right,
        right_centroid: (p_right > 0.0).then(|| right_moment / p_right),
        peak_position: peak,
    }
}

/// Straight-line fit of transmitted and reference centroids over the frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalAnalysis {
    /// `(reference intercept + d) - transmitted intercept`; positive for a delay.
    pub centroid_lag: f64,
    pub inferred_delay: f64,
    /// `(t, reference + d - transmitted centroid)` per frame.
    pub frame_lags: Vec<(f64, f64)>,
    /// Fitted velocity of the transmitted centroid.
    pub transmitted_velocity: f64,
}

fn line_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let slope = sxy / sxx;
    (my - slope * mt, slope)
}

/// Minimum transmitted probability for a meaningful centroid.
pub const MIN_TRANSMITTED: f64 = 1e-8;

pub fn arrival_analysis(
    frames: &[ComplexField],
    barrier: &BarrierSpec,
    p0: f64,
    reference: impl Fn(f64) -> f64,
) -> Result<ArrivalAnalysis> {
    if frames.is_empty() {
        return Err(Error::Analysis("arrival analysis needs at least one frame".into()));
    }
    let mut transmitted = Vec::with_capacity(frames.len());
    let mut shifted = Vec::with_capacity(frames.len());
    for f in frames {
        let obs = observables(f, barrier);
        let c = match obs.right_centroid {
            Some(c) if obs.p_right > MIN_TRANSMITTED => c,
            _ => {
                return Err(Error::Analysis(format!(
                    "transmitted probability {:e} at t = {} is below {MIN_TRANSMITTED:e}",
                    obs.p_right,
                    f.time()
                )))
            }
        };
        transmitted.push((f.time(), c));
        shifted.push((f.time(), reference(f.time()) + barrier.d));
    }
    let frame_lags = transmitted
        .iter()
        .zip(&shifted)
        .map(|(a, b)| (a.0, b.1 - a.1))
        .collect();
    let (lag, velocity) = if frames.len() == 1 {
        (shifted[0].1 - transmitted[0].1, 0.0)
    } else {
        let (ti, tv) = line_fit(&transmitted);
        let (ri, _) = line_fit(&shifted);
        (ri - ti, tv)
    };
    Ok(ArrivalAnalysis {
        centroid_lag: lag,
        inferred_delay: lag / p0,
        frame_lags,
        transmitted_velocity: velocity,
    })
}

/// Above-barrier share of the initial momentum distribution against the transmitted probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageAudit {
    pub above_barrier_probability: f64,
    pub p_right: f64,
    pub ratio: f64,
}

/// `∫_{p > sqrt(2V)} |f(p)|² dp`, an upper bound on the over-barrier part of `P_right`.
pub fn leakage_audit(initial: &InitialState, barrier: &BarrierSpec, p_right: f64) -> Result<LeakageAudit> {
    let amp = initial.amplitude();
    let p_c = barrier.critical_momentum();
    let (_, hi) = amp.momentum_support();
    let above = if p_c >= hi {
        0.0
    } else {
        let n = (((hi - p_c) / 0.5).ceil() as usize).max(1);
        let breaks: Vec<f64> = (0..=n).map(|i| p_c + (hi - p_c) * i as f64 / n as f64).collect();
        integrate_breaks(
            |p| amp.amplitude(p).norm_sqr(),
            &breaks,
            &QuadOptions::with_tolerances(1e-300, 1e-10),
        )?
        .value
    };
    if !(p_right > 0.0) {
        return Err(Error::Analysis(
            "leakage audit needs a positive transmitted probability".into(),
        ));
    }
    Ok(LeakageAudit {
        above_barrier_probability: above,
        p_right,
        ratio: above / p_right,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConvergence {
    pub p_right: (f64, f64),
    pub lag: (f64, f64),
    /// `|fine - coarse|/|coarse|`.
    pub p_right_delta: f64,
    pub lag_delta: f64,
}

/// Reruns with halved spacing and time step and compares `P_right` at the last frame and the lag.
pub fn grid_convergence(
    config: &OracleConfig,
    times: &[f64],
    reference: impl Fn(f64) -> f64 + Copy + Sync,
) -> Result<GridConvergence> {
    let run = |c: &OracleConfig| -> Result<(f64, f64)> {
        let frames = evolve(c, times)?;
        let last = frames
            .last()
            .ok_or_else(|| Error::Analysis("no frames requested".into()))?;
        let pr = observables(last, &c.barrier).p_right;
        let lag = arrival_analysis(&frames, &c.barrier, c.initial.p0(), reference)?.centroid_lag;
        Ok((pr, lag))
    };
    let (coarse, fine) = rayon::join(|| run(config), || run(&config.refined()));
    let (coarse, fine) = (coarse?, fine?);
    Ok(GridConvergence {
        p_right: (coarse.0, fine.0),
        lag: (coarse.1, fine.1),
        p_right_delta: ((fine.0 - coarse.0) / coarse.0).abs(),
        lag_delta: ((fine.1 - coarse.1) / coarse.1).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{free_evolution, Direction};

    fn gaussian_config(h: f64, dt: f64) -> OracleConfig {
        let g = GaussianPacket::new(0.0, 0.0, 1.0).unwrap();
        OracleConfig::with_spacing(
            -30.0,
            30.0,
            h,
            dt,
            2.0,
            BarrierSpec::free(1.0),
            InitialState::Gaussian(g),
        )
        .unwrap()
    }

    #[test]
    fn free_gaussian_dispersion() {
        let config = gaussian_config(0.01, 1e-3);
        let frames = evolve(&config, &[2.0]).unwrap();
        let f = &frames[0];
        let density: Vec<f64> = f.values().iter().map(|v| v.norm_sqr()).collect();
        let x2: Vec<f64> = f.grid().iter().zip(&density).map(|(x, r)| x * x * r).collect();
        let width2 = trapezoid(f.grid(), &x2) / trapezoid(f.grid(), &density);
        let expected = GaussianPacket::new(0.0, 0.0, 1.0).unwrap().width2(2.0);
        assert!((width2 / expected - 1.0).abs() < 1e-4, "{width2} vs {expected}");
        let obs = observables(f, &config.barrier);
        assert!((obs.norm - 1.0).abs() < 1e-10);
        assert!(obs.centroid.abs() < config.spacing());
        assert!((obs.p_left + obs.p_barrier + obs.p_right - obs.norm).abs() < 1e-12);
    }

    #[test]
    fn compact_packet_matches_quadrature_evolution() {
        let packet = PacketSpec::new(-6.0, 1.0, 5.0).unwrap();
        let config = OracleConfig::with_spacing(
            -25.0,
            25.0,
            0.002,
            2.5e-4,
            1.0,
            BarrierSpec::free(1.0),
            InitialState::Compact(packet),
        )
        .unwrap();
        let frames = evolve(&config, &[1.0]).unwrap();
        let f = &frames[0];
        let mut worst: f64 = 0.0;
        for (x, v, _) in f.iter().step_by(50) {
            let exact = free_evolution(&packet, x, 1.0, Direction::Forward).unwrap();
            worst = worst.max((v - exact).norm());
        }
        assert!(worst < 1e-5, "max deviation {worst}");
    }

    #[test]
    fn norm_is_conserved_through_a_barrier() {
        let packet = PacketSpec::new(-8.0, 3.0, 4.0).unwrap();
        let barrier = BarrierSpec::from_k0(3.0, 0.5, 0.5).unwrap();
        let config =
            OracleConfig::with_spacing(-30.0, 30.0, 0.01, 1e-3, 10.0, barrier, InitialState::Compact(packet)).unwrap();
        let frames = evolve(&config, &[0.0, 10.0]).unwrap();
        let n0 = observables(&frames[0], &barrier).norm;
        let n1 = observables(&frames[1], &barrier).norm;
        assert!((n1 - n0).abs() < 1e-10, "{n0} → {n1}");
        let obs = observables(&frames[1], &barrier);
        assert!((obs.p_left + obs.p_barrier + obs.p_right - obs.norm).abs() < 1e-12);
        assert!(obs.p_right > 0.0 && obs.p_left > obs.p_right);
    }

    #[test]
    fn configuration_guards() {
        let packet = PacketSpec::new(-20.0, 10.0, 20.0).unwrap();
        let barrier = BarrierSpec::from_k0(10.0, 0.5, 0.4).unwrap();
        let init = InitialState::Compact(packet);
        assert!(matches!(
            OracleConfig::with_spacing(-80.0, 80.0, 0.05, 1e-3, 5.0, barrier, init),
            Err(Error::Config(_))
        ));
        assert!(OracleConfig::with_spacing(-80.0, 80.0, 0.01, 1e-2, 5.0, barrier, init).is_err());
        let odd = BarrierSpec::from_k0(10.0, 0.5, 0.405).unwrap();
        assert!(OracleConfig::with_spacing(-80.0, 80.0, 0.01, 1e-3, 5.0, odd, init).is_err());
        let ok = OracleConfig::with_spacing(-80.0, 80.0, 0.01, 1e-3, 5.0, barrier, init).unwrap();
        assert!(evolve(&ok, &[0.0005]).is_err());
        assert!(evolve(&ok, &[6.0]).is_err());
    }

    #[test]
    fn free_control_has_no_lag() {
        let packet = GaussianPacket::new(-6.0, 4.0, 3.0).unwrap();
        let barrier = BarrierSpec::free(0.5);
        let config =
            OracleConfig::with_spacing(-30.0, 40.0, 0.005, 5e-4, 5.0, barrier, InitialState::Gaussian(packet)).unwrap();
        let frames = evolve(&config, &[4.0, 4.5, 5.0]).unwrap();
        let a = arrival_analysis(&frames, &barrier, 4.0, |t| packet.x0 + packet.p0 * t - barrier.d).unwrap();
        assert!(a.centroid_lag.abs() < config.spacing(), "lag {}", a.centroid_lag);
        assert!((a.transmitted_velocity - 4.0).abs() < 1e-3);
    }

    #[test]
    fn leakage_of_fig1_packet_is_tiny() {
        let packet = PacketSpec::new(-20.0, 10.0, 20.0).unwrap();
        let barrier = BarrierSpec::from_k0(10.0, 0.5, 0.4).unwrap();
        let audit = leakage_audit(&InitialState::Compact(packet), &barrier, 1e-3).unwrap();
        assert!(audit.above_barrier_probability > 0.0);
        assert!(audit.ratio < 0.05);
    }
}
