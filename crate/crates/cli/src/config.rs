//! Run configuration: a JSON document merged over per-mode defaults, with
//! dotted-path overrides, validated into dimensionless model inputs.

use std::collections::HashSet;
use std::fmt;

use serde::de::{self, DeserializeSeed, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{json, Map, Value};
use tunnel_core::analytic::TransmittedMode;
use tunnel_core::packet::{MomentumWindow, PacketSpec};
use tunnel_core::units::{linspace, BarrierSpec, PhysicalScales, QuantityKind};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Analytic,
    Oracle,
    Compare,
    Figure1,
    Validate,
    PacketInfo,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Analytic => "analytic",
            Mode::Oracle => "oracle",
            Mode::Compare => "compare",
            Mode::Figure1 => "figure1",
            Mode::Validate => "validate",
            Mode::PacketInfo => "packet-info",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalesInput {
    pub hbar: f64,
    pub mass: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketInput {
    /// Centre, in units of length.
    pub x0: f64,
    /// Mean momentum.
    pub p0: f64,
    /// Support half-width in units of `√a`.
    #[serde(rename = "L")]
    pub half_width: f64,
}

/// Exactly one of `V`/`k0` and one of `d`/`D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierInput {
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    /// Width in units of length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Width in units of `√a`.
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d_scaled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowInput {
    #[serde(rename = "K")]
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridInput {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmittedKind {
    Closed,
    TermSum,
    Terms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmittedInput {
    pub mode: TransmittedKind,
    #[serde(default)]
    pub l_max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleInput {
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
    pub dt: f64,
    pub frames: Vec<f64>,
}

/// Normalized configuration; its compact JSON form is echoed into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub scales: ScalesInput,
    pub packet: PacketInput,
    pub barrier: BarrierInput,
    pub window: WindowInput,
    pub times: Vec<f64>,
    pub grid: GridInput,
    pub transmitted: TransmittedInput,
    pub oracle: OracleInput,
    pub output: String,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
}

fn default_width(mode: Mode) -> f64 {
    match mode {
        Mode::Oracle | Mode::Compare => 0.4,
        _ => 0.3,
    }
}

fn defaults(mode: Mode) -> Value {
    json!({
        "mode": mode,
        "scales": {"hbar": 1.0, "mass": 1.0, "a": 1.0},
        "packet": {"x0": -20.0, "p0": 10.0, "L": 20.0},
        "barrier": {"k0": 0.5, "D": default_width(mode)},
        "window": {"K": 1.4},
        "transmitted": {"mode": "closed", "l_max": null},
        "oracle": {"x_min": -80.0, "x_max": 80.0, "h": 0.01, "dt": 0.001, "frames": [3.5, 4.0, 4.5, 5.0]},
        "output": mode.to_string(),
        "threads": 0
    })
}

fn merge(base: &mut Value, user: Value) {
    match (base, user) {
        (Value::Object(b), Value::Object(u)) => {
            for (key, value) in u {
                match b.get_mut(&key) {
                    Some(slot) if slot.is_object() && value.is_object() => merge(slot, value),
                    _ => {
                        b.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

fn merge_barrier(base: &mut Value, user: &Value) {
    // a user-given member of an exclusive pair displaces the default partner
    if let (Some(b), Some(u)) = (
        base.get_mut("barrier").and_then(Value::as_object_mut),
        user.get("barrier"),
    ) {
        for (one, other) in [("V", "k0"), ("k0", "V"), ("d", "D"), ("D", "d")] {
            if u.get(one).is_some() {
                b.remove(other);
            }
        }
    }
}

/// Applies `a.b.c=value`; the value is parsed as JSON and falls back to a string.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!(
            "override key `{path}` has an empty component"
        )));
    }
    if keys[0] == "barrier" && keys.len() == 2 {
        let mut shadow = json!({"barrier": {}});
        shadow["barrier"][keys[1]] = Value::Null;
        merge_barrier(doc, &shadow);
    }
    let mut slot = doc;
    for key in &keys[..keys.len() - 1] {
        let map = slot
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override path `{path}` crosses a non-object")))?;
        slot = map.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let map = slot
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("override path `{path}` crosses a non-object")))?;
    map.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

struct DuplicateCheck;

impl<'de> DeserializeSeed<'de> for DuplicateCheck {
    type Value = ();
    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<(), D::Error> {
        d.deserialize_any(self)
    }
}

impl<'de> Visitor<'de> for DuplicateCheck {
    type Value = ();
    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a JSON value")
    }
    fn visit_bool<E>(self, _: bool) -> Result<(), E> {
        Ok(())
    }
    fn visit_i64<E>(self, _: i64) -> Result<(), E> {
        Ok(())
    }
    fn visit_u64<E>(self, _: u64) -> Result<(), E> {
        Ok(())
    }
    fn visit_f64<E>(self, _: f64) -> Result<(), E> {
        Ok(())
    }
    fn visit_str<E>(self, _: &str) -> Result<(), E> {
        Ok(())
    }
    fn visit_unit<E>(self) -> Result<(), E> {
        Ok(())
    }
    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<(), A::Error> {
        while seq.next_element_seed(DuplicateCheck)?.is_some() {}
        Ok(())
    }
    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<(), A::Error> {
        let mut seen = HashSet::new();
        while let Some(key) = map.next_key::<String>()? {
            if !seen.insert(key.clone()) {
                return Err(de::Error::custom(format!("duplicate key `{key}`")));
            }
            map.next_value_seed(DuplicateCheck)?;
        }
        Ok(())
    }
}

fn config_error(err: impl fmt::Display) -> CliError {
    CliError::Config(err.to_string())
}

/// Parses `text` over the defaults of `mode`, applies `overrides` and validates.
pub fn parse_config(text: &str, mode: Mode, overrides: &[String]) -> Result<RunConfig, CliError> {
    let user: Value = if text.trim().is_empty() {
        json!({})
    } else {
        let mut de = serde_json::Deserializer::from_str(text);
        DuplicateCheck.deserialize(&mut de).map_err(config_error)?;
        serde_json::from_str(text).map_err(config_error)?
    };
    if !user.is_object() {
        return Err(CliError::Config("configuration must be a JSON object".into()));
    }
    if let Some(m) = user.get("mode") {
        if m != &json!(mode) {
            return Err(CliError::Config(format!("configuration is for mode {m}, not {mode}")));
        }
    }
    let mut doc = defaults(mode);
    merge_barrier(&mut doc, &user);
    merge(&mut doc, user);
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let fill = doc.as_object_mut().expect("defaults are an object");
    let mut partial = fill.clone();
    partial.remove("times");
    partial.remove("grid");
    let mut config: RunConfig = {
        let mut probe = Value::Object(partial);
        probe["times"] = json!([]);
        probe["grid"] = json!({"min": 0.0, "max": 1.0, "n": 2});
        serde_path_to_error::deserialize(probe).map_err(|e| CliError::Config(format!("{}: {}", e.path(), e.inner())))?
    };
    let resolved = config.resolve_physics()?;
    if let Some(times) = fill.get("times") {
        config.times = serde_path_to_error::deserialize(times.clone())
            .map_err(|e| CliError::Config(format!("times{}: {}", e.path(), e.inner())))?;
    } else {
        config.times = config.default_times(&resolved);
    }
    match fill.get("grid") {
        Some(grid) => {
            config.grid = serde_path_to_error::deserialize(grid.clone())
                .map_err(|e| CliError::Config(format!("grid.{}: {}", e.path(), e.inner())))?
        }
        None => config.grid = config.default_grid(&resolved),
    }
    config.resolve()?;
    Ok(config)
}

/// Physics inputs in dimensionless form.
#[derive(Debug, Clone)]
pub struct Physics {
    pub scales: PhysicalScales,
    pub packet: PacketSpec,
    pub barrier: BarrierSpec,
    /// `None` without a barrier.
    pub k0: Option<f64>,
    pub window: MomentumWindow,
}

/// Everything a pipeline needs, dimensionless.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub physics: Physics,
    pub times: Vec<f64>,
    pub grid: Vec<f64>,
    pub transmitted: TransmittedMode,
    pub oracle: OracleInput,
}

impl RunConfig {
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    fn resolve_physics(&self) -> Result<Physics, CliError> {
        let s = &self.scales;
        let scales = PhysicalScales::new(s.hbar, s.mass, s.a).map_err(config_error)?;
        let dimless = |v: f64, kind| scales.to_dimensionless(v, kind);
        let x0 = dimless(self.packet.x0, QuantityKind::Position);
        let p0 = dimless(self.packet.p0, QuantityKind::Momentum);
        let packet = PacketSpec::new(x0, p0, self.packet.half_width).map_err(config_error)?;
        let b = &self.barrier;
        let d = match (b.d, b.d_scaled) {
            (Some(d), None) => dimless(d, QuantityKind::Length),
            (None, Some(d)) => d,
            _ => return Err(CliError::Config("barrier: give exactly one of `d` and `D`".into())),
        };
        if !(d > 0.0 && d.is_finite()) {
            return Err(CliError::Config(format!("barrier: width must be positive, got {d}")));
        }
        let v = match (b.v, b.k0) {
            (Some(v), None) => dimless(v, QuantityKind::Energy),
            (None, Some(k0)) => {
                if !(k0 > 0.0 && k0 < 1.0) {
                    return Err(CliError::Config(format!(
                        "barrier.k0 = {k0}: the tunneling regime needs 0 < k0 < 1 (all momenta below sqrt(2mV))"
                    )));
                }
                p0 * p0 / (2.0 * k0)
            }
            _ => return Err(CliError::Config("barrier: give exactly one of `V` and `k0`".into())),
        };
        let (barrier, k0) = if v == 0.0 {
            (BarrierSpec::free(d), None)
        } else {
            let barrier = BarrierSpec::new(v, d).map_err(config_error)?;
            (barrier, Some(barrier.k(p0)))
        };
        let window = MomentumWindow::new(p0, self.window.k).map_err(config_error)?;
        Ok(Physics {
            scales,
            packet,
            barrier,
            k0,
            window,
        })
    }

    fn default_times(&self, physics: &Physics) -> Vec<f64> {
        let p = &physics.packet;
        let t = match self.mode {
            Mode::Oracle | Mode::Compare => return self.oracle.frames.clone(),
            // barrier arrival plus the free travel of two length units
            _ => (-p.x0 + 2.0) / p.p0,
        };
        vec![physics.scales.from_dimensionless(t, QuantityKind::Time)]
    }

    fn default_grid(&self, physics: &Physics) -> GridInput {
        let centre = physics.barrier.d + 2.0;
        let to_phys = |x: f64| physics.scales.from_dimensionless(x, QuantityKind::Position);
        GridInput {
            min: to_phys(centre - 16.0),
            max: to_phys(centre + 16.0),
            n: 1601,
        }
    }

    /// Validates and converts to dimensionless form.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let physics = self.resolve_physics()?;
        if let Some(k0) = physics.k0 {
            if k0 >= 1.0 {
                return Err(CliError::Config(format!(
                    "k0 = {k0}: the tunneling regime needs all momenta below sqrt(2mV)"
                )));
            }
        }
        let sc = &physics.scales;
        let times: Vec<f64> = self
            .times
            .iter()
            .map(|&t| sc.to_dimensionless(t, QuantityKind::Time))
            .collect();
        if times.is_empty() || times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(CliError::Config(
                "times: need at least one positive evaluation time".into(),
            ));
        }
        let g = &self.grid;
        if g.n < 2 || !(g.max > g.min) {
            return Err(CliError::Config(format!("grid: need n ≥ 2 and max > min, got {g:?}")));
        }
        let grid = linspace(
            sc.to_dimensionless(g.min, QuantityKind::Position),
            sc.to_dimensionless(g.max, QuantityKind::Position),
            g.n,
        );
        let transmitted = match self.transmitted.mode {
            TransmittedKind::Closed => TransmittedMode::Closed,
            TransmittedKind::TermSum => TransmittedMode::TermSum(self.transmitted.l_max),
            TransmittedKind::Terms => TransmittedMode::Terms(self.transmitted.l_max),
        };
        let o = &self.oracle;
        let oracle = OracleInput {
            x_min: sc.to_dimensionless(o.x_min, QuantityKind::Position),
            x_max: sc.to_dimensionless(o.x_max, QuantityKind::Position),
            h: sc.to_dimensionless(o.h, QuantityKind::Length),
            dt: sc.to_dimensionless(o.dt, QuantityKind::Time),
            frames: o
                .frames
                .iter()
                .map(|&t| sc.to_dimensionless(t, QuantityKind::Time))
                .collect(),
        };
        if oracle.frames.is_empty() {
            return Err(CliError::Config("oracle.frames: need at least one frame time".into()));
        }
        Ok(Resolved {
            physics,
            times,
            grid,
            transmitted,
            oracle,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = parse_config("{}", Mode::Figure1, &[]).unwrap();
        assert_eq!(c.times, vec![2.2]);
        assert_eq!(c.grid.n, 1601);
        assert!((c.grid.min - (0.3 + 2.0 - 16.0)).abs() < 1e-12);
        let echo = c.echo();
        let again = parse_config(&echo, Mode::Figure1, &[]).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.echo(), echo);
    }

    #[test]
    fn exclusive_pairs() {
        let c = parse_config(r#"{"barrier": {"V": 100.0}}"#, Mode::Figure1, &[]).unwrap();
        assert_eq!(c.barrier.v, Some(100.0));
        assert_eq!(c.barrier.k0, None);
        let err = parse_config(r#"{"barrier": {"V": 100.0, "k0": 0.5}}"#, Mode::Figure1, &[]).unwrap_err();
        assert!(matches!(err, CliError::Config(m) if m.contains("exactly one")));
        let c = parse_config("{}", Mode::Figure1, &["barrier.d=0.7".into()]).unwrap();
        assert_eq!((c.barrier.d, c.barrier.d_scaled), (Some(0.7), None));
    }

    #[test]
    fn regime_and_support_errors() {
        let err = parse_config(r#"{"barrier": {"k0": 1.2}}"#, Mode::Analytic, &[]).unwrap_err();
        assert!(matches!(err, CliError::Config(m) if m.contains("tunneling regime")));
        let err = parse_config(r#"{"packet": {"x0": -5.0}}"#, Mode::Analytic, &[]).unwrap_err();
        assert!(matches!(err, CliError::Config(m) if m.contains("x0 + L")));
    }

    #[test]
    fn duplicate_and_unknown_keys() {
        let err = parse_config(r#"{"window": {"K": 1.2, "K": 1.3}}"#, Mode::Analytic, &[]).unwrap_err();
        assert!(matches!(err, CliError::Config(m) if m.contains("duplicate key `K`")));
        let err = parse_config(r#"{"packet": {"width": 3}}"#, Mode::Analytic, &[]).unwrap_err();
        assert!(matches!(err, CliError::Config(m) if m.contains("packet") && m.contains("width")));
    }

    #[test]
    fn overrides() {
        let c = parse_config("{}", Mode::Compare, &["barrier.D=0.5".into(), "times=[1.0,2.0]".into()]).unwrap();
        assert_eq!(c.barrier.d_scaled, Some(0.5));
        assert_eq!(c.times, vec![1.0, 2.0]);
        assert!(parse_config("{}", Mode::Compare, &["nonsense".into()]).is_err());
        assert!(parse_config(r#"{"mode": "oracle"}"#, Mode::Compare, &[]).is_err());
    }
}
