//! Subcommand pipelines. Each returns its artifacts in memory; [`Outcome::write`]
//! puts them on disk.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::Serialize;
use tunnel_core::analytic::{
    centroid, conservation_check, evaluate_field, hartmann_time, FieldSource, TruncationRule, TunnelingModel, Warnings,
};
use tunnel_core::oracle::{
    arrival_analysis, evolve, grid_convergence, leakage_audit, observables, InitialState, OracleConfig,
};
use tunnel_core::packet::{epsilon_bound, faktor2};
use tunnel_core::{Error as CoreError, VERSION};

use crate::config::{Mode, Resolved, RunConfig};
use crate::output::{records, render_csv, render_json, with_suffix, write_file, FrameRecord};
use crate::CliError;

/// Files to write, text for stdout and whether every gate passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<(PathBuf, String)>,
    pub report: String,
    pub passed: bool,
}

impl Outcome {
    pub fn write(&self) -> Result<(), CliError> {
        for (path, contents) in &self.files {
            write_file(path, contents)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WarningFlags {
    pub consistency_violated: bool,
    pub below_validity_time: bool,
    pub outside_region: bool,
}

impl From<Warnings> for WarningFlags {
    fn from(w: Warnings) -> Self {
        WarningFlags {
            consistency_violated: w.consistency_violated,
            below_validity_time: w.below_validity_time,
            outside_region: w.outside_region,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationReport {
    pub l_max: u32,
    pub rule: &'static str,
}

fn model(resolved: &Resolved) -> Result<TunnelingModel, CliError> {
    let p = &resolved.physics;
    Ok(TunnelingModel::new(p.packet, p.barrier, p.window)?)
}

fn truncation_report(m: &TunnelingModel) -> Result<TruncationReport, CliError> {
    let t = m.truncation()?;
    Ok(TruncationReport {
        l_max: t.l_max,
        rule: match t.rule {
            TruncationRule::Attenuation => "attenuation",
            TruncationRule::Consistency => "consistency",
        },
    })
}

fn summary_path(config: &RunConfig) -> PathBuf {
    with_suffix(&config.output, "_summary.json")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermReport {
    pub l: u32,
    /// Trapezoidal centroid of `|term|²` on the output grid.
    pub centroid: f64,
    /// Same centroid from the momentum representation.
    pub centroid_momentum: f64,
    pub free_reference: f64,
    pub lag: f64,
    pub expected_lag: f64,
    pub attenuation: f64,
    pub consistency_lhs: f64,
    pub consistency_rhs: f64,
    pub consistency_margin: f64,
    pub consistency_satisfied: bool,
    pub warnings: WarningFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure1Summary {
    pub t: f64,
    /// Multiplier applied to `|ψ|²` in the CSV files.
    pub density_scale: f64,
    pub terms: Vec<TermReport>,
    /// `exp(-2dγ0)`, the attenuation between consecutive terms.
    pub attenuation_ratio: f64,
    pub truncation: TruncationReport,
}

pub const FIGURE1_TERMS: u32 = 3;

/// First three transmitted terms on the configured grid at the first evaluation time.
pub fn figure1(config: &RunConfig) -> Result<(Outcome, Figure1Summary), CliError> {
    let resolved = config.resolve()?;
    let m = model(&resolved)?;
    let t = resolved.times[0];
    let echo = config.echo();
    let scale = PI.powf(0.25);
    let mut files = Vec::new();
    let mut terms = Vec::new();
    for l in 0..FIGURE1_TERMS {
        let (field, warnings) = evaluate_field(&m, &resolved.grid, t, FieldSource::TransmittedTerm(l))?;
        let rows = records(&field, &format!("analytic_term_{l}"), scale);
        files.push((
            with_suffix(&config.output, &format!("_l{l}.csv")),
            render_csv(&echo, &rows),
        ));
        let summary = m.term_summary(l)?;
        let consistency = m.consistency(l)?;
        let c = centroid(&field)?;
        let free_reference = m.free_reference_centroid(t);
        terms.push(TermReport {
            l,
            centroid: c,
            centroid_momentum: m.term_centroid(l, t)?,
            free_reference,
            lag: free_reference - c,
            expected_lag: summary.shift,
            attenuation: summary.attenuation,
            consistency_lhs: consistency.lhs,
            consistency_rhs: consistency.rhs,
            consistency_margin: consistency.margin,
            consistency_satisfied: consistency.satisfied,
            warnings: warnings.into(),
        });
    }
    let summary = Figure1Summary {
        t,
        density_scale: PI.sqrt(),
        terms,
        attenuation_ratio: (-2.0 * m.barrier.d * m.gamma0()).exp(),
        truncation: truncation_report(&m)?,
    };
    let json = render_json(&echo, &summary)?;
    files.push((summary_path(config), json.clone()));
    Ok((
        Outcome {
            files,
            report: json,
            passed: true,
        },
        summary,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticTerm {
    pub l: u32,
    pub attenuation: f64,
    pub delay: f64,
    pub shift: f64,
    pub consistency_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticSummary {
    pub k0: f64,
    pub gamma0: f64,
    pub hartmann_time: f64,
    pub transmission: f64,
    pub reflection: f64,
    pub truncation: TruncationReport,
    pub validity_floor: f64,
    pub terms: Vec<AnalyticTerm>,
    pub warnings: Vec<(f64, WarningFlags)>,
}

const LISTED_TERMS: u32 = 8;

/// Piecewise wavefunction on the configured grid at every evaluation time.
pub fn analytic(config: &RunConfig) -> Result<Outcome, CliError> {
    let resolved = config.resolve()?;
    let m = model(&resolved)?;
    let echo = config.echo();
    let mut rows: Vec<FrameRecord> = Vec::new();
    let mut warnings = Vec::new();
    for &t in &resolved.times {
        let (field, w) = evaluate_field(&m, &resolved.grid, t, FieldSource::Piecewise(resolved.transmitted))?;
        rows.extend(records(&field, "analytic_sum", 1.0));
        warnings.push((t, w.into()));
    }
    let truncation = truncation_report(&m)?;
    let gamma0 = m.gamma0();
    let c = conservation_check(m.k0(), m.barrier.d * gamma0)?;
    let terms = (0..=truncation.l_max.min(LISTED_TERMS))
        .map(|l| {
            let s = m.term_summary(l)?;
            Ok(AnalyticTerm {
                l,
                attenuation: s.attenuation,
                delay: s.delay,
                shift: s.shift,
                consistency_margin: m.consistency(l)?.margin,
            })
        })
        .collect::<Result<_, CoreError>>()?;
    let summary = AnalyticSummary {
        k0: m.k0(),
        gamma0,
        hartmann_time: hartmann_time(m.packet.p0, &m.barrier)?,
        transmission: c.transmitted,
        reflection: c.reflected,
        truncation,
        validity_floor: m.validity_floor(),
        terms,
        warnings,
    };
    let json = render_json(&echo, &summary)?;
    Ok(Outcome {
        files: vec![
            (with_suffix(&config.output, ".csv"), render_csv(&echo, &rows)),
            (summary_path(config), json.clone()),
        ],
        report: json,
        passed: true,
    })
}

fn oracle_config(resolved: &Resolved, h: f64, dt: f64) -> Result<OracleConfig, CliError> {
    let o = &resolved.oracle;
    let t_end = resolved.times.iter().copied().fold(0.0, f64::max);
    let p = &resolved.physics;
    Ok(OracleConfig::with_spacing(
        o.x_min,
        o.x_max,
        h,
        dt,
        t_end,
        p.barrier,
        InitialState::Compact(p.packet),
    )?)
}

fn free_reference(resolved: &Resolved) -> impl Fn(f64) -> f64 + Copy + Sync {
    let (x0, p0) = (resolved.physics.packet.x0, resolved.physics.packet.p0);
    move |t| x0 + p0 * t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameObservables {
    pub t: f64,
    pub norm: f64,
    pub centroid: f64,
    pub p_left: f64,
    pub p_barrier: f64,
    pub p_right: f64,
    pub right_centroid: Option<f64>,
    pub peak_position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub spacing: f64,
    pub dt: f64,
    pub frames: Vec<FrameObservables>,
    pub centroid_lag: Option<f64>,
    pub inferred_delay: Option<f64>,
    pub leakage_ratio: Option<f64>,
}

/// Crank–Nicolson frames at every evaluation time.
pub fn oracle(config: &RunConfig) -> Result<Outcome, CliError> {
    let resolved = config.resolve()?;
    let oc = oracle_config(&resolved, resolved.oracle.h, resolved.oracle.dt)?;
    let frames = evolve(&oc, &resolved.times)?;
    let echo = config.echo();
    let mut rows = Vec::new();
    let mut obs = Vec::new();
    for f in &frames {
        rows.extend(records(f, "oracle", 1.0));
        let o = observables(f, &oc.barrier);
        obs.push(FrameObservables {
            t: f.time(),
            norm: o.norm,
            centroid: o.centroid,
            p_left: o.p_left,
            p_barrier: o.p_barrier,
            p_right: o.p_right,
            right_centroid: o.right_centroid,
            peak_position: o.peak_position,
        });
    }
    let arrival = arrival_analysis(&frames, &oc.barrier, oc.initial.p0(), free_reference(&resolved)).ok();
    let last_p_right = obs.last().map_or(0.0, |o| o.p_right);
    let leakage = if oc.barrier.v > 0.0 {
        leakage_audit(&oc.initial, &oc.barrier, last_p_right)
            .ok()
            .map(|l| l.ratio)
    } else {
        None
    };
    let summary = OracleSummary {
        spacing: oc.spacing(),
        dt: oc.dt,
        frames: obs,
        centroid_lag: arrival.as_ref().map(|a| a.centroid_lag),
        inferred_delay: arrival.as_ref().map(|a| a.inferred_delay),
        leakage_ratio: leakage,
    };
    let json = render_json(&echo, &summary)?;
    Ok(Outcome {
        files: vec![
            (with_suffix(&config.output, ".csv"), render_csv(&echo, &rows)),
            (summary_path(config), json.clone()),
        ],
        report: json,
        passed: true,
    })
}

/// One tolerance check of the compare report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gate {
    pub measured: f64,
    pub reference: f64,
    /// Relative deviation, or absolute where the reference is zero.
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Gate {
    fn relative(measured: f64, reference: f64, tolerance: f64) -> Gate {
        let deviation = ((measured - reference) / reference).abs();
        Gate {
            measured,
            reference,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    fn absolute(measured: f64, reference: f64, tolerance: f64) -> Gate {
        let deviation = (measured - reference).abs();
        Gate {
            measured,
            reference,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    fn upper(measured: f64, tolerance: f64) -> Gate {
        Gate {
            measured,
            reference: 0.0,
            deviation: measured,
            tolerance,
            pass: measured <= tolerance,
        }
    }
}

pub const TRANSMISSION_TOLERANCE: f64 = 0.15;
pub const DELAY_TOLERANCE: f64 = 0.30;
pub const LEAKAGE_TOLERANCE: f64 = 0.05;
pub const P_RIGHT_CONVERGENCE: f64 = 0.01;
pub const LAG_CONVERGENCE: f64 = 0.10;
/// Free-control tolerance on the lag about `d`, in units of length.
pub const CONTROL_LAG_TOLERANCE: f64 = 0.05;
/// Transmitted probabilities below this are lost in the oracle's roundoff.
pub const NOISE_FLOOR: f64 = 1e-14;
pub const SAFE_DP0: (f64, f64) = (3.0, 5.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub d_p0: f64,
    pub control: bool,
    pub p_right: f64,
    pub analytic_transmission: f64,
    pub transmission: Gate,
    pub centroid_lag: Option<f64>,
    pub inferred_delay: Option<f64>,
    pub hartmann_time: f64,
    pub delay: Option<Gate>,
    pub leakage: Option<Gate>,
    pub p_right_convergence: Option<Gate>,
    pub lag_convergence: Option<Gate>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

/// Oracle against the closed transmitted factor and the Hartmann time.
pub fn compare(config: &RunConfig, force: bool) -> Result<(Outcome, CompareReport), CliError> {
    let resolved = config.resolve()?;
    let p = &resolved.physics;
    let control = p.barrier.v == 0.0;
    let d_p0 = p.barrier.d * p.packet.p0;
    if !control && !(SAFE_DP0.0..=SAFE_DP0.1).contains(&d_p0) && !force {
        return Err(CliError::Config(format!(
            "D·P0 = {d_p0} is outside the oracle-safe range [{}, {}]; pass --force to run anyway",
            SAFE_DP0.0, SAFE_DP0.1
        )));
    }
    let mut warnings = Vec::new();
    let (analytic_transmission, t0) = if control {
        (1.0, 0.0)
    } else {
        let m = model(&resolved)?;
        (
            m.closed_transmitted_factor().norm_sqr(),
            hartmann_time(p.packet.p0, &p.barrier)?,
        )
    };
    if analytic_transmission < NOISE_FLOOR {
        warnings.push(format!(
            "analytic transmission {analytic_transmission:e} is below the oracle noise floor {NOISE_FLOOR:e}"
        ));
    }
    let oc = oracle_config(&resolved, resolved.oracle.h, resolved.oracle.dt)?;
    let reference = free_reference(&resolved);
    let (frames, convergence) = rayon::join(
        || evolve(&oc, &resolved.times),
        || grid_convergence(&oc, &resolved.times, reference),
    );
    let frames = frames?;
    let last = frames
        .last()
        .ok_or_else(|| CliError::Config("no oracle frames requested".into()))?;
    let p_right = observables(last, &oc.barrier).p_right;
    let arrival = match arrival_analysis(&frames, &oc.barrier, p.packet.p0, reference) {
        Ok(a) => Some(a),
        Err(CoreError::Analysis(msg)) => {
            warnings.push(msg);
            None
        }
        Err(e) => return Err(e.into()),
    };
    let convergence = match convergence {
        Ok(c) => Some(c),
        Err(CoreError::Analysis(msg)) => {
            warnings.push(format!("grid convergence: {msg}"));
            None
        }
        Err(e) => return Err(e.into()),
    };

    let transmission = Gate::relative(p_right, analytic_transmission, TRANSMISSION_TOLERANCE);
    let delay = arrival.as_ref().map(|a| {
        if control {
            Gate::absolute(a.centroid_lag, p.barrier.d, CONTROL_LAG_TOLERANCE)
        } else {
            Gate::relative(a.inferred_delay, t0, DELAY_TOLERANCE)
        }
    });
    let leakage = if control {
        None
    } else {
        Some(Gate::upper(
            leakage_audit(&oc.initial, &oc.barrier, p_right.max(f64::MIN_POSITIVE))?.ratio,
            LEAKAGE_TOLERANCE,
        ))
    };
    let p_right_convergence = convergence
        .as_ref()
        .map(|c| Gate::upper(c.p_right_delta, P_RIGHT_CONVERGENCE));
    let lag_convergence = convergence.as_ref().map(|c| Gate::upper(c.lag_delta, LAG_CONVERGENCE));
    let passed = transmission.pass
        && delay.is_some_and(|g| g.pass)
        && leakage.is_none_or(|g| g.pass)
        && p_right_convergence.is_some_and(|g| g.pass)
        && (control || lag_convergence.is_some_and(|g| g.pass));
    let report = CompareReport {
        d_p0,
        control,
        p_right,
        analytic_transmission,
        transmission,
        centroid_lag: arrival.as_ref().map(|a| a.centroid_lag),
        inferred_delay: arrival.as_ref().map(|a| {
            if control {
                (a.centroid_lag - p.barrier.d) / p.packet.p0
            } else {
                a.inferred_delay
            }
        }),
        hartmann_time: t0,
        delay,
        leakage,
        p_right_convergence,
        lag_convergence,
        warnings,
        passed,
    };
    let json = render_json(&config.echo(), &report)?;
    Ok((
        Outcome {
            files: vec![(with_suffix(&config.output, "_report.json"), json.clone())],
            report: json,
            passed,
        },
        report,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketInfo {
    pub version: &'static str,
    pub x0: f64,
    pub p0: f64,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub normalization: f64,
    pub dx2: f64,
    pub dp2: f64,
    pub epsilon: f64,
    pub ln_epsilon: f64,
    pub epsilon_bound: f64,
    pub window: (f64, f64),
    pub p_rest: f64,
    pub v: f64,
    pub d: f64,
    pub k0: Option<f64>,
    pub gamma0: Option<f64>,
    pub hartmann_time: Option<f64>,
    pub faktor2: Option<f64>,
}

/// Derived packet quantities as JSON on stdout.
pub fn packet_info(config: &RunConfig) -> Result<Outcome, CliError> {
    let resolved = config.resolve()?;
    let p = &resolved.physics;
    let derived = p.packet.derived()?;
    let tunneling = p.k0.filter(|k| *k < 1.0);
    let info = PacketInfo {
        version: VERSION,
        x0: p.packet.x0,
        p0: p.packet.p0,
        half_width: p.packet.l,
        normalization: derived.n,
        dx2: derived.dx2,
        dp2: derived.dp2,
        epsilon: derived.eps,
        ln_epsilon: derived.ln_eps,
        epsilon_bound: epsilon_bound(p.packet.l),
        window: (p.window.p_min, p.window.p_max),
        p_rest: p.packet.tail_probability(&p.window)?,
        v: p.barrier.v,
        d: p.barrier.d,
        k0: tunneling,
        gamma0: tunneling.map(|_| p.barrier.gamma(p.packet.p0)).transpose()?,
        hartmann_time: tunneling.map(|_| hartmann_time(p.packet.p0, &p.barrier)).transpose()?,
        faktor2: tunneling.and_then(|k| faktor2(p.window.k, k).ok()),
    };
    let json = render_json(&config.echo(), &info)?;
    Ok(Outcome {
        files: Vec::new(),
        report: json,
        passed: true,
    })
}

/// Runs the pipeline for `config.mode`.
pub fn run(config: &RunConfig, force: bool) -> Result<Outcome, CliError> {
    match config.mode {
        Mode::Analytic => analytic(config),
        Mode::Oracle => oracle(config),
        Mode::Compare => compare(config, force).map(|(o, _)| o),
        Mode::Figure1 => figure1(config).map(|(o, _)| o),
        Mode::Validate => crate::validate::suite(config),
        Mode::PacketInfo => packet_info(config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn figure1_lags() {
        let c = parse_config("{}", Mode::Figure1, &["output=\"/nonexistent/fig\"".into()]).unwrap();
        let (outcome, summary) = figure1(&c).unwrap();
        assert_eq!(outcome.files.len(), 4);
        for (term, expected) in summary.terms.iter().zip([0.2, 0.6, 1.0]) {
            assert!((term.lag - expected).abs() < 0.05, "{term:?}");
            assert!((term.centroid - term.centroid_momentum).abs() < 1e-3, "{term:?}");
        }
        assert!(outcome.files[0].1.lines().nth(2) == Some(crate::output::CSV_HEADER));
    }

    #[test]
    fn attenuation_ratio_at_unit_width() {
        let c = parse_config("{}", Mode::Figure1, &["barrier.D=1.0".into()]).unwrap();
        let resolved = c.resolve().unwrap();
        let m = model(&resolved).unwrap();
        let ratio = (-2.0 * m.barrier.d * m.gamma0()).exp();
        assert!((ratio / (-20.0f64).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unsafe_scenario_needs_force() {
        let c = parse_config("{}", Mode::Compare, &["barrier.D=2.0".into()]).unwrap();
        assert!(matches!(compare(&c, false), Err(CliError::Config(m)) if m.contains("--force")));
    }

    #[test]
    fn packet_info_fields() {
        let c = parse_config("{}", Mode::PacketInfo, &[]).unwrap();
        let out = packet_info(&c).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.report).unwrap();
        let r = &v["result"];
        assert!((r["dx2"].as_f64().unwrap() - 0.49503).abs() < 1e-4);
        assert!((r["hartmann_time"].as_f64().unwrap() - 0.02).abs() < 1e-15);
        assert!((r["faktor2"].as_f64().unwrap() - 7.0711).abs() < 1e-3);
    }
}
