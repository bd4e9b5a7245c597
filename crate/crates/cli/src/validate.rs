//! Fixed suite of reference checks with a pass/fail table.

use std::fmt::Write as _;

use serde::Serialize;
use tunnel_core::analytic::{conservation_check, delay_times, hartmann_time, reflection_factor, rho, TunnelingModel};
use tunnel_core::laplace::{bessel_moment_integral, forward_rho_power};
use tunnel_core::packet::{epsilon_bound, epsilon_norm, faktor2, variances, MomentumWindow, PacketSpec};
use tunnel_core::units::BarrierSpec;
use tunnel_core::Complex64;

use crate::config::RunConfig;
use crate::output::{render_json, with_suffix};
use crate::pipelines::Outcome;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn near(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            value,
            reference,
            tolerance,
            pass: (value - reference).abs() <= tolerance,
        }
    }

    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Check {
        Check {
            name: name.into(),
            value,
            reference: limit,
            tolerance: 0.0,
            pass: value <= limit,
        }
    }

    fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: name.into(),
            value,
            reference: 0.5 * (lo + hi),
            tolerance: 0.5 * (hi - lo),
            pass: (lo..=hi).contains(&value),
        }
    }
}

const P0: f64 = 10.0;
const K0: f64 = 0.5;

fn fig1_model(d: f64) -> Result<TunnelingModel, CliError> {
    Ok(TunnelingModel::new(
        PacketSpec::new(-20.0, P0, 20.0)?,
        BarrierSpec::from_k0(P0, K0, d)?,
        MomentumWindow::new(P0, 1.4)?,
    )?)
}

fn max_over<I: IntoIterator<Item = Result<f64, CliError>>>(items: I) -> Result<f64, CliError> {
    items.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

pub fn checks() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();

    let grid: Vec<(f64, f64)> = (0..10)
        .flat_map(|i| [0.1, 0.5, 1.0, 2.0, 5.0].map(|d| (0.05 + 0.1 * i as f64, d)))
        .collect();
    let conservation = max_over(grid.iter().map(|&(k0, d)| {
        let gamma = BarrierSpec::from_k0(P0, k0, d)?.gamma(P0)?;
        Ok((conservation_check(k0, d * gamma)?.total() - 1.0).abs())
    }))?;
    out.push(Check::at_most("conservation |R|²+|T|²-1", conservation, 1e-12));

    let (dx2, dp2) = variances(20.0, 1.0, 1.0)?;
    out.push(Check::near("variance (Δx)² at L=20", dx2, 0.49, 0.01));
    out.push(Check::near("variance (Δp)² at L=20", dp2, 0.51, 0.01));
    out.push(Check::near("Faktor2 at K=1.4, k0=1/2", faktor2(1.4, K0)?, 7.07, 0.01));

    let m = fig1_model(0.3)?;
    out.push(Check::within(
        "consistency -ln(ε+P_rest)",
        m.consistency(0)?.rhs,
        17.0,
        19.0,
    ));

    let t0 = hartmann_time(P0, &BarrierSpec::from_k0(P0, K0, 1.0)?)?;
    out.push(Check::near("Hartmann time T0", t0, 0.02, 1e-15));

    let unit = BarrierSpec::from_k0(P0, K0, 1.0)?;
    let ratio = (delay_times(1, P0, &unit)?.ln_attenuation - delay_times(0, P0, &unit)?.ln_attenuation).exp();
    out.push(Check::near(
        "attenuation ratio at D=1 / e^-20",
        ratio / (-20.0f64).exp(),
        1.0,
        1e-12,
    ));

    for (l, expected) in [(0u32, 0.2), (1, 0.6), (2, 1.0)] {
        let lag = m.free_reference_centroid(2.2) - m.term_centroid(l, 2.2)?;
        out.push(Check::near(format!("lag of transmitted term {l}"), lag, expected, 0.05));
    }

    out.push(Check::at_most(
        "ε(L=3) against its bound",
        epsilon_norm(3.0)?,
        epsilon_bound(3.0),
    ));

    let barrier = BarrierSpec::new(100.0, 1.0)?;
    let momenta: Vec<f64> = (1..=140).map(|i| 0.1 * i as f64).collect();
    let unimodular = max_over(
        momenta
            .iter()
            .map(|&p| Ok((reflection_factor(p, &barrier)?.value.norm() - 1.0).abs())),
    )?;
    out.push(Check::at_most("unimodular |R| - 1", unimodular, 1e-13));
    let stationary = max_over(momenta.iter().map(|&p| {
        let r = reflection_factor(p, &barrier)?.value;
        Ok((rho(Complex64::new(0.0, -0.5 * p * p), barrier.v)? - r).norm())
    }))?;
    out.push(Check::at_most("stationary R(p) = ρ(-ip²/2)", stationary, 1e-10));

    let moment = bessel_moment_integral(0, 0.25)?;
    out.push(Check::near(
        "Bessel moment l=0, ε=1/4",
        moment.quadrature,
        moment.closed,
        1e-6,
    ));

    let v = 4.0;
    let forward = max_over([0.5, 2.0, 8.0].map(|s| {
        let exact = rho(Complex64::new(s, 0.0), v)?;
        Ok((forward_rho_power(1, s, v)? - exact).norm())
    }))?;
    out.push(Check::at_most("forward Laplace of L⁻¹(ρ)", forward, 1e-6));

    Ok(out)
}

pub fn table(checks: &[Check]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<36} {:>24} {:>24} {:>10}  status",
        "check", "value", "reference", "tolerance"
    );
    for c in checks {
        let _ = writeln!(
            s,
            "{:<36} {:>24.16e} {:>24.16e} {:>10.1e}  {}",
            c.name,
            c.value,
            c.reference,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    s
}

pub fn suite(config: &RunConfig) -> Result<Outcome, CliError> {
    let checks = checks()?;
    let passed = checks.iter().all(|c| c.pass);
    let json = render_json(&config.echo(), &checks)?;
    Ok(Outcome {
        files: vec![(with_suffix(&config.output, "_summary.json"), json)],
        report: table(&checks),
        passed,
    })
}
