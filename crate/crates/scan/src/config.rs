//! JSON scan configuration.
//!
//! Every physical quantity is written with a unit suffix: `_rad_s` or `_hz`
//! for angular frequencies (Hz values are multiplied by 2π), `_s` for times,
//! `_tesla` for fields. Keys not consumed by the parser are rejected.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use floquet_dd::sensors::DonorModel;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::ScanError;

pub const DEFAULT_N_P: u32 = 10;
pub const DEFAULT_CROSSING_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanConfig {
    pub system: SystemConfig,
    pub sequence: SequenceConfig,
    pub tau_axis: TauAxis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_axis: Option<FieldAxis>,
    pub outputs: OutputOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SystemConfig {
    Pseudospin {
        x_rad_s: f64,
        z_u_rad_s: f64,
        z_d_rad_s: f64,
    },
    Nv {
        #[serde(skip_serializing_if = "Option::is_none")]
        omega_x_rad_s: Option<f64>,
        omega_z_rad_s: f64,
        a_par_rad_s: f64,
    },
    DonorPair {
        delta_a_rad_s: f64,
        c12_rad_s: f64,
        donor: DonorConfig,
        #[serde(skip_serializing_if = "Option::is_none")]
        b0_tesla: Option<f64>,
    },
    Cluster3(ClusterConfig),
    IndependentPairs(ClusterConfig),
    JointFull(ClusterConfig),
}

impl SystemConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SystemConfig::Pseudospin { .. } => "pseudospin",
            SystemConfig::Nv { .. } => "nv",
            SystemConfig::DonorPair { .. } => "donor_pair",
            SystemConfig::Cluster3(_) => "cluster3",
            SystemConfig::IndependentPairs(_) => "independent_pairs",
            SystemConfig::JointFull(_) => "joint_full",
        }
    }

    /// Unit of the field axis this system accepts, if any.
    pub fn field_unit(&self) -> Option<FieldUnit> {
        match self {
            SystemConfig::Pseudospin { .. } => None,
            SystemConfig::Nv { .. } => Some(FieldUnit::RadS),
            SystemConfig::DonorPair { .. } | SystemConfig::JointFull(_) => Some(FieldUnit::Tesla),
            SystemConfig::Cluster3(c) | SystemConfig::IndependentPairs(c) => {
                c.polarization.is_donor().then_some(FieldUnit::Tesla)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DonorConfig {
    pub hyperfine_a_rad_s: f64,
    pub nuclear_spin: f64,
    pub gamma_e_rad_s_per_tesla: f64,
    pub delta_gamma: f64,
    pub level_u: usize,
    pub level_d: usize,
}

impl DonorConfig {
    pub fn model(&self) -> DonorModel {
        DonorModel {
            hyperfine_a: self.hyperfine_a_rad_s,
            nuclear_spin: self.nuclear_spin,
            gamma_e: self.gamma_e_rad_s_per_tesla,
            delta_gamma: self.delta_gamma,
            level_u: self.level_u,
            level_d: self.level_d,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterConfig {
    pub a_rad_s: [f64; 3],
    pub c12_rad_s: f64,
    pub c23_rad_s: f64,
    pub c31_rad_s: f64,
    pub polarization: Polarization,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    Fixed { p_u: f64, p_d: f64 },
    Donor {
        donor: DonorConfig,
        #[serde(skip_serializing_if = "Option::is_none")]
        b0_tesla: Option<f64>,
    },
}

impl Polarization {
    fn is_donor(&self) -> bool {
        matches!(self, Polarization::Donor { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceConfig {
    pub n_p: u32,
    pub pulse_duration_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauAxis {
    pub start_s: f64,
    pub stop_s: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl TauAxis {
    pub fn values(&self) -> Vec<f64> {
        grid(self.start_s, self.stop_s, self.count, self.spacing)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldUnit {
    Tesla,
    RadS,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldAxis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub unit: FieldUnit,
}

impl FieldAxis {
    pub fn values(&self) -> Vec<f64> {
        grid(self.start, self.stop, self.count, Spacing::Linear)
    }
}

fn grid(start: f64, stop: f64, count: usize, spacing: Spacing) -> Vec<f64> {
    let last = count - 1;
    (0..count)
        .map(|i| {
            if i == last {
                return stop;
            }
            let f = i as f64 / last as f64;
            match spacing {
                Spacing::Linear => start + (stop - start) * f,
                Spacing::Log => start * (stop / start).powf(f),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputOptions {
    pub overlay: bool,
    pub crossing_threshold_rad: f64,
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<(ScanConfig, Vec<u8>), ScanError> {
    let raw = std::fs::read(path)
        .map_err(|e| ScanError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = parse_config(&raw)?;
    Ok((cfg, raw))
}

pub fn parse_config(raw: &[u8]) -> Result<ScanConfig, ScanError> {
    let value: Value = serde_json::from_slice(raw).map_err(|e| {
        ScanError::Config(format!("parse error at line {}, column {}: {e}", e.line(), e.column()))
    })?;
    let Value::Object(map) = value else {
        return Err(ScanError::Config("top level must be a JSON object".into()));
    };
    let mut top = Section::new("config", map);
    let system = parse_system(top.object("system")?.ok_or_else(|| top.missing("system"))?)?;
    let sequence = match top.object("sequence")? {
        Some(s) => parse_sequence(s)?,
        None => SequenceConfig { n_p: DEFAULT_N_P, pulse_duration_s: 0.0 },
    };
    let mut axes = top.object("axes")?.ok_or_else(|| top.missing("axes"))?;
    let tau_axis = parse_tau_axis(axes.object("tau")?.ok_or_else(|| axes.missing("tau"))?)?;
    let field_axis = match axes.object("field")? {
        Some(f) => Some(parse_field_axis(f, &system)?),
        None => None,
    };
    axes.finish()?;
    let outputs = match top.object("outputs")? {
        Some(mut o) => {
            let overlay = o.boolean("overlay")?.unwrap_or(true);
            let crossing_threshold_rad = o.number("crossing_threshold_rad")?.unwrap_or(DEFAULT_CROSSING_THRESHOLD);
            if !(crossing_threshold_rad > 0.0) {
                return Err(ScanError::Config("crossing_threshold_rad must be positive".into()));
            }
            o.finish()?;
            OutputOptions { overlay, crossing_threshold_rad }
        }
        None => OutputOptions { overlay: true, crossing_threshold_rad: DEFAULT_CROSSING_THRESHOLD },
    };
    top.finish()?;

    let cfg = ScanConfig { system, sequence, tau_axis, field_axis, outputs };
    check_scalar_fields(&cfg)?;
    Ok(cfg)
}

// Without a field axis the system must carry its own scalar field value.
fn check_scalar_fields(cfg: &ScanConfig) -> Result<(), ScanError> {
    if cfg.field_axis.is_some() {
        return Ok(());
    }
    let missing = match &cfg.system {
        SystemConfig::Nv { omega_x_rad_s: None, .. } => Some("omega_x_rad_s (or a field axis)"),
        SystemConfig::DonorPair { b0_tesla: None, .. } => Some("b0_tesla (or a field axis)"),
        SystemConfig::Cluster3(c) | SystemConfig::IndependentPairs(c) | SystemConfig::JointFull(c) => {
            match c.polarization {
                Polarization::Donor { b0_tesla: None, .. } => Some("b0_tesla (or a field axis)"),
                _ => None,
            }
        }
        _ => None,
    };
    match missing {
        Some(m) => Err(ScanError::Config(format!("system needs {m}"))),
        None => Ok(()),
    }
}

fn parse_system(mut s: Section) -> Result<SystemConfig, ScanError> {
    let kind = s.string("type")?.ok_or_else(|| s.missing("type"))?;
    let sys = match kind.as_str() {
        "pseudospin" => SystemConfig::Pseudospin {
            x_rad_s: s.req_angular("x")?,
            z_u_rad_s: s.req_angular("z_u")?,
            z_d_rad_s: s.req_angular("z_d")?,
        },
        "nv" => {
            let a_par = s.req_angular("a_par")?;
            if a_par < 0.0 {
                return Err(ScanError::Config("a_par must be non-negative".into()));
            }
            SystemConfig::Nv {
                omega_x_rad_s: s.angular("omega_x")?,
                omega_z_rad_s: s.angular("omega_z")?.unwrap_or(0.0),
                a_par_rad_s: a_par,
            }
        }
        "donor_pair" => {
            let delta_a = s.req_angular("delta_a")?;
            let c12 = s.angular("c12")?;
            let r = s.number("r")?;
            let c12 = match (c12, r) {
                (Some(c), None) => c,
                (None, Some(r)) if r != 0.0 => delta_a / r,
                (None, Some(_)) => return Err(ScanError::Config("r must be non-zero".into())),
                (Some(_), Some(_)) => {
                    return Err(ScanError::Config("give either c12 or r, not both".into()))
                }
                (None, None) => return Err(ScanError::Config("donor_pair needs c12_rad_s, c12_hz or r".into())),
            };
            SystemConfig::DonorPair {
                delta_a_rad_s: delta_a,
                c12_rad_s: c12,
                donor: parse_donor(s.object("donor")?)?,
                b0_tesla: s.tesla("b0")?,
            }
        }
        "cluster3" | "independent_pairs" | "joint_full" => {
            let a = s.angular_list("a")?.ok_or_else(|| s.missing("a_rad_s"))?;
            let a_rad_s: [f64; 3] = a
                .try_into()
                .map_err(|_| ScanError::Config("a must list exactly 3 hyperfine couplings".into()))?;
            let c12_rad_s = s.req_angular("c12")?;
            let c23_rad_s = s.req_angular("c23")?;
            let c31_rad_s = s.req_angular("c31")?;
            let p_u = s.number("p_u")?;
            let p_d = s.number("p_d")?;
            let polarization = match (p_u, p_d) {
                (Some(p_u), Some(p_d)) => {
                    if kind == "joint_full" {
                        return Err(ScanError::Config(
                            "joint_full derives polarizations from the donor; remove p_u and p_d".into(),
                        ));
                    }
                    if p_u.abs() > 1.0 || p_d.abs() > 1.0 {
                        return Err(ScanError::Config("polarizations must lie in [-1, 1]".into()));
                    }
                    Polarization::Fixed { p_u, p_d }
                }
                (None, None) => Polarization::Donor {
                    donor: parse_donor(s.object("donor")?)?,
                    b0_tesla: s.tesla("b0")?,
                },
                _ => return Err(ScanError::Config("give both p_u and p_d, or neither".into())),
            };
            let c = ClusterConfig { a_rad_s, c12_rad_s, c23_rad_s, c31_rad_s, polarization };
            match kind.as_str() {
                "cluster3" => SystemConfig::Cluster3(c),
                "independent_pairs" => SystemConfig::IndependentPairs(c),
                _ => SystemConfig::JointFull(c),
            }
        }
        other => {
            return Err(ScanError::Config(format!(
                "unknown system type `{other}`; expected pseudospin, nv, donor_pair, cluster3, independent_pairs or joint_full"
            )))
        }
    };
    s.finish()?;
    if let SystemConfig::DonorPair { b0_tesla: Some(b), .. } = &sys {
        check_field(*b)?;
    }
    Ok(sys)
}

fn check_field(b: f64) -> Result<(), ScanError> {
    if b < 0.0 {
        return Err(ScanError::Config(format!("b0_tesla must be non-negative, got {b}")));
    }
    Ok(())
}

fn parse_donor(s: Option<Section>) -> Result<DonorConfig, ScanError> {
    let d = DonorModel::si_bi();
    let mut cfg = DonorConfig {
        hyperfine_a_rad_s: d.hyperfine_a,
        nuclear_spin: d.nuclear_spin,
        gamma_e_rad_s_per_tesla: d.gamma_e,
        delta_gamma: d.delta_gamma,
        level_u: d.level_u,
        level_d: d.level_d,
    };
    if let Some(mut s) = s {
        if let Some(a) = s.angular("hyperfine_a")? {
            cfg.hyperfine_a_rad_s = a;
        }
        if let Some(i) = s.number("nuclear_spin")? {
            cfg.nuclear_spin = i;
        }
        if let Some(g) = s.angular_with("gamma_e", "_rad_s_per_tesla", "_hz_per_tesla")? {
            cfg.gamma_e_rad_s_per_tesla = g;
        }
        if let Some(g) = s.number("delta_gamma")? {
            cfg.delta_gamma = g;
        }
        if let Some(l) = s.integer("level_u")? {
            cfg.level_u = l as usize;
        }
        if let Some(l) = s.integer("level_d")? {
            cfg.level_d = l as usize;
        }
        s.finish()?;
    }
    cfg.model().validate().map_err(|e| ScanError::Config(e.to_string()))?;
    Ok(cfg)
}

fn parse_sequence(mut s: Section) -> Result<SequenceConfig, ScanError> {
    let n_p = s.integer("n_p")?;
    let n_pulses = s.integer("n_pulses")?;
    let n_p = match (n_p, n_pulses) {
        (Some(_), Some(_)) => return Err(ScanError::Config("give either n_p or n_pulses, not both".into())),
        (Some(n), None) => n,
        (None, Some(n)) => {
            if n % 2 != 0 {
                return Err(ScanError::Config(format!("n_pulses must be even, got {n}")));
            }
            n / 2
        }
        (None, None) => DEFAULT_N_P as u64,
    };
    if n_p == 0 || n_p > u32::MAX as u64 {
        return Err(ScanError::Config(format!("n_p must be a positive 32-bit integer, got {n_p}")));
    }
    let pulse_duration_s = s.time("pulse_duration")?.unwrap_or(0.0);
    if !(pulse_duration_s >= 0.0) {
        return Err(ScanError::Config("pulse_duration_s must be non-negative".into()));
    }
    s.finish()?;
    Ok(SequenceConfig { n_p: n_p as u32, pulse_duration_s })
}

fn parse_tau_axis(mut s: Section) -> Result<TauAxis, ScanError> {
    let start_s = s.time("start")?.ok_or_else(|| s.missing("start_s"))?;
    let stop_s = s.time("stop")?.ok_or_else(|| s.missing("stop_s"))?;
    let count = s.integer("count")?.ok_or_else(|| s.missing("count"))? as usize;
    let spacing = match s.string("spacing")?.as_deref() {
        None | Some("linear") => Spacing::Linear,
        Some("log") => Spacing::Log,
        Some(o) => return Err(ScanError::Config(format!("spacing must be linear or log, got `{o}`"))),
    };
    s.finish()?;
    if count < 2 {
        return Err(ScanError::Config(format!("tau count must be at least 2, got {count}")));
    }
    if !(start_s > 0.0) {
        return Err(ScanError::Config(format!("tau_start must be positive, got {start_s}")));
    }
    if !(start_s < stop_s) {
        return Err(ScanError::Config(format!("tau_start ({start_s}) must be below tau_stop ({stop_s})")));
    }
    Ok(TauAxis { start_s, stop_s, count, spacing })
}

fn parse_field_axis(mut s: Section, system: &SystemConfig) -> Result<FieldAxis, ScanError> {
    let unit = system
        .field_unit()
        .ok_or_else(|| ScanError::Config(format!("system `{}` has no field axis", system.name())))?;
    let (start, stop) = match unit {
        FieldUnit::Tesla => (
            s.tesla("start")?.ok_or_else(|| s.missing("start_tesla"))?,
            s.tesla("stop")?.ok_or_else(|| s.missing("stop_tesla"))?,
        ),
        FieldUnit::RadS => (s.req_angular("start")?, s.req_angular("stop")?),
    };
    let count = s.integer("count")?.ok_or_else(|| s.missing("count"))? as usize;
    s.finish()?;
    if count < 2 {
        return Err(ScanError::Config(format!("field count must be at least 2, got {count}")));
    }
    if !(start < stop) {
        return Err(ScanError::Config(format!("field start ({start}) must be below stop ({stop})")));
    }
    if unit == FieldUnit::Tesla {
        check_field(start)?;
    }
    Ok(FieldAxis { start, stop, count, unit })
}

/// One JSON object being consumed key by key.
struct Section {
    path: String,
    map: Map<String, Value>,
    /// Base names asked for with a unit suffix, for error hints.
    unit_bases: BTreeSet<String>,
}

impl Section {
    fn new(path: &str, map: Map<String, Value>) -> Self {
        Self { path: path.to_string(), map, unit_bases: BTreeSet::new() }
    }

    fn missing(&self, key: &str) -> ScanError {
        ScanError::Config(format!("{}: missing `{key}`", self.path))
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.map.remove(key)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, ScanError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Number(n)) => {
                let v = n.as_f64().filter(|v| v.is_finite());
                v.map(Some).ok_or_else(|| ScanError::Config(format!("{}.{key}: not a finite number", self.path)))
            }
            Some(other) => Err(ScanError::Config(format!("{}.{key}: expected a number, got {other}", self.path))),
        }
    }

    fn integer(&mut self, key: &str) -> Result<Option<u64>, ScanError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Number(n)) if n.as_u64().is_some() => Ok(n.as_u64()),
            Some(other) => Err(ScanError::Config(format!(
                "{}.{key}: expected a non-negative integer, got {other}",
                self.path
            ))),
        }
    }

    fn boolean(&mut self, key: &str) -> Result<Option<bool>, ScanError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(b)),
            Some(other) => Err(ScanError::Config(format!("{}.{key}: expected true or false, got {other}", self.path))),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, ScanError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(ScanError::Config(format!("{}.{key}: expected a string, got {other}", self.path))),
        }
    }

    fn object(&mut self, key: &str) -> Result<Option<Section>, ScanError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Object(m)) => Ok(Some(Section::new(&format!("{}.{key}", self.path), m))),
            Some(other) => Err(ScanError::Config(format!("{}.{key}: expected an object, got {other}", self.path))),
        }
    }

    fn angular_with(&mut self, base: &str, rad: &str, hz: &str) -> Result<Option<f64>, ScanError> {
        self.unit_bases.insert(base.to_string());
        let r = self.number(&format!("{base}{rad}"))?;
        let h = self.number(&format!("{base}{hz}"))?;
        match (r, h) {
            (Some(_), Some(_)) => Err(ScanError::Config(format!(
                "{}: give {base}{rad} or {base}{hz}, not both",
                self.path
            ))),
            (Some(r), None) => Ok(Some(r)),
            (None, Some(h)) => Ok(Some(2.0 * PI * h)),
            (None, None) => Ok(None),
        }
    }

    fn angular(&mut self, base: &str) -> Result<Option<f64>, ScanError> {
        self.angular_with(base, "_rad_s", "_hz")
    }

    fn req_angular(&mut self, base: &str) -> Result<f64, ScanError> {
        self.angular(base)?
            .ok_or_else(|| ScanError::Config(format!("{}: missing `{base}_rad_s` (or `{base}_hz`)", self.path)))
    }

    fn angular_list(&mut self, base: &str) -> Result<Option<Vec<f64>>, ScanError> {
        self.unit_bases.insert(base.to_string());
        let list = |s: &mut Section, key: String, scale: f64| -> Result<Option<Vec<f64>>, ScanError> {
            match s.take(&key) {
                None => Ok(None),
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|v| {
                        v.as_f64()
                            .filter(|x| x.is_finite())
                            .map(|x| x * scale)
                            .ok_or_else(|| ScanError::Config(format!("{}.{key}: entries must be numbers", s.path)))
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map(Some),
                Some(other) => Err(ScanError::Config(format!("{}.{key}: expected an array, got {other}", s.path))),
            }
        };
        let r = list(self, format!("{base}_rad_s"), 1.0)?;
        let h = list(self, format!("{base}_hz"), 2.0 * PI)?;
        match (r, h) {
            (Some(_), Some(_)) => Err(ScanError::Config(format!("{}: give {base}_rad_s or {base}_hz, not both", self.path))),
            (r, h) => Ok(r.or(h)),
        }
    }

    fn time(&mut self, base: &str) -> Result<Option<f64>, ScanError> {
        self.unit_bases.insert(base.to_string());
        self.number(&format!("{base}_s"))
    }

    fn tesla(&mut self, base: &str) -> Result<Option<f64>, ScanError> {
        self.unit_bases.insert(base.to_string());
        self.number(&format!("{base}_tesla"))
    }

    fn finish(self) -> Result<(), ScanError> {
        if let Some(key) = self.map.keys().next() {
            let hint = if self.unit_bases.contains(key.as_str()) {
                " (missing unit suffix, e.g. `_s`, `_rad_s`, `_hz` or `_tesla`)"
            } else {
                ""
            };
            return Err(ScanError::Config(format!("{}: unknown key `{key}`{hint}", self.path)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{
            "system": {"type": "pseudospin", "x_rad_s": 1.0, "z_u_rad_s": 2.0, "z_d_rad_s": -1.0},
            "axes": {"tau": {"start_s": 0.1, "stop_s": 2.0, "count": 5}}
        }"#
    }

    #[test]
    fn defaults_applied() {
        let cfg = parse_config(minimal().as_bytes()).unwrap();
        assert_eq!(cfg.sequence, SequenceConfig { n_p: 10, pulse_duration_s: 0.0 });
        assert!(cfg.field_axis.is_none());
        assert_eq!(cfg.tau_axis.values(), vec![0.1, 0.575, 1.05, 1.525, 2.0]);
    }

    #[test]
    fn hz_is_converted() {
        let raw = minimal().replace("\"x_rad_s\": 1.0", "\"x_hz\": 1.0");
        let cfg = parse_config(raw.as_bytes()).unwrap();
        let SystemConfig::Pseudospin { x_rad_s, .. } = cfg.system else { panic!() };
        assert_eq!(x_rad_s, 2.0 * PI);
    }

    #[test]
    fn pulse_count_echoes_cells() {
        let raw = minimal().replace("\"axes\"", "\"sequence\": {\"n_pulses\": 40}, \"axes\"");
        let cfg = parse_config(raw.as_bytes()).unwrap();
        assert_eq!(cfg.sequence.n_p, 20);
        let echo = serde_json::to_value(&cfg).unwrap();
        assert_eq!(echo["sequence"]["n_p"], 20);
    }

    #[test]
    fn reversed_tau_rejected() {
        let raw = minimal().replace("\"start_s\": 0.1", "\"start_s\": 3.0");
        assert!(matches!(parse_config(raw.as_bytes()), Err(ScanError::Config(_))));
    }

    #[test]
    fn unit_suffix_required() {
        let raw = minimal().replace("\"x_rad_s\"", "\"x\"");
        let err = parse_config(raw.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("x_rad_s"), "{err}");
        let raw = minimal().replace("\"start_s\"", "\"start\"");
        let err = parse_config(raw.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("start_s"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let raw = minimal().replace("\"type\"", "\"colour\": 1, \"type\"");
        let err = parse_config(raw.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn stray_suffixless_key_gets_hint() {
        let raw = minimal().replace("\"count\": 5", "\"count\": 5, \"stop\": 4");
        let err = parse_config(raw.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("unit suffix"), "{err}");
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_config(b"{\n  \"system\": }").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn pseudospin_has_no_field_axis() {
        let raw = minimal().replace(
            "\"count\": 5}",
            "\"count\": 5}, \"field\": {\"start_tesla\": 0.1, \"stop_tesla\": 0.2, \"count\": 3}",
        );
        assert!(parse_config(raw.as_bytes()).is_err());
    }

    #[test]
    fn donor_pair_ratio() {
        let raw = r#"{
            "system": {"type": "donor_pair", "delta_a_rad_s": 1000.0, "r": 100, "b0_tesla": 0.1},
            "axes": {"tau": {"start_s": 1e-5, "stop_s": 1e-2, "count": 10, "spacing": "log"}}
        }"#;
        let cfg = parse_config(raw.as_bytes()).unwrap();
        let SystemConfig::DonorPair { c12_rad_s, donor, .. } = &cfg.system else { panic!() };
        assert_eq!(*c12_rad_s, 10.0);
        assert_eq!((donor.level_u, donor.level_d), (12, 9));
        let t = cfg.tau_axis.values();
        assert_eq!(t[0], 1e-5);
        assert_eq!(t[9], 1e-2);
    }

    #[test]
    fn donor_pair_needs_a_field() {
        let raw = r#"{
            "system": {"type": "donor_pair", "delta_a_rad_s": 1000.0, "r": 100},
            "axes": {"tau": {"start_s": 1e-5, "stop_s": 1e-2, "count": 10}}
        }"#;
        assert!(parse_config(raw.as_bytes()).is_err());
    }
}
