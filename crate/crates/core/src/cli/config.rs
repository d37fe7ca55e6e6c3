//! Typed run configurations. Every field has a default; a JSON file and
//! command-line flags are layered on top, flags last.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::curve::ClosureOptions;
use crate::diagnostics::{ScanOptions, DEFAULT_SUPPORT_THRESHOLD};
use crate::error::{Error, Result};
use crate::evolve::{EvolutionConfig, DEFAULT_OVERFLOW_FACTOR};
use crate::profile::{BuildConfig, Experiment};
use crate::shooting::{InitialPair, DEFAULT_DX};

/// Reads a JSON object from `path`, or an empty object.
pub fn load_object(path: Option<&Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Error::InvalidConfig(format!(
            "{}: expected a JSON object",
            path.display()
        ))),
        Err(e) => Err(Error::InvalidConfig(format!("{}: {e}", path.display()))),
    }
}

/// Sets `key` (a dotted path) to `value`, creating nested objects.
pub fn set_path(obj: &mut Map<String, Value>, key: &str, value: Value) {
    match key.split_once('.') {
        None => {
            obj.insert(key.to_string(), value);
        }
        Some((head, rest)) => {
            let entry = obj.entry(head.to_string()).or_insert_with(|| Value::Object(Map::new()));
            if !entry.is_object() {
                *entry = Value::Object(Map::new());
            }
            if let Value::Object(inner) = entry {
                set_path(inner, rest, value);
            }
        }
    }
}

/// Overlays `top` onto `base`, merging nested objects.
pub fn merge(base: &mut Map<String, Value>, top: Map<String, Value>) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Object(b)), Value::Object(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn parse<T: DeserializeOwned>(obj: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(obj)).map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn check_pair_range(name: &str, r: [f64; 2]) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
        return Err(Error::InvalidConfig(format!("{name} must satisfy lo < hi, got {r:?}")));
    }
    Ok(())
}

fn check_dx(dx: f64) -> Result<()> {
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::InvalidConfig(format!("dx must be positive, got {dx}")));
    }
    Ok(())
}

fn experiment(k: u32) -> Result<Experiment> {
    Experiment::from_number(k).ok_or_else(|| Error::InvalidConfig(format!("unknown experiment {k}; use 1, 2 or 3")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShootConfig {
    pub u0: f64,
    /// Integrate this slope directly.
    pub v0: Option<f64>,
    /// Bisect the admissible slope inside `[lo, hi]` instead.
    pub bracket: Option<[f64; 2]>,
    /// Bisection stops at this bracket width; zero means `f64` resolution.
    pub tol: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    /// Every `stride`-th integration step is written.
    pub stride: usize,
}

impl Default for ShootConfig {
    fn default() -> Self {
        ShootConfig {
            u0: InitialPair::reference().u0,
            v0: None,
            bracket: None,
            tol: 0.0,
            x_min: -80.0,
            x_max: 20.0,
            dx: DEFAULT_DX,
            stride: 5000,
        }
    }
}

impl ShootConfig {
    pub fn validate(&self) -> Result<()> {
        check_dx(self.dx)?;
        if !self.u0.is_finite() {
            return Err(Error::InvalidConfig("u0 must be finite".into()));
        }
        if !(self.x_min <= 0.0 && self.x_max > 0.0) {
            return Err(Error::InvalidConfig("need x_min <= 0 < x_max".into()));
        }
        if let Some(b) = self.bracket {
            check_pair_range("bracket", b)?;
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("stride must be positive".into()));
        }
        if self.tol < 0.0 {
            return Err(Error::InvalidConfig("tol must be non-negative".into()));
        }
        if self.bracket.is_none() && self.v0.is_none() && self.u0 != InitialPair::reference().u0 {
            return Err(Error::InvalidConfig("give v0 or a bracket for this u0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMethod {
    /// Continuation in `u0` over `u0_range`.
    Continuation,
    /// Arc-length continuation from `start`.
    Arc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub method: TraceMethod,
    pub u0_range: [f64; 2],
    pub count: usize,
    /// Seed bracket in `v0` for the first `u0`.
    pub bracket: [f64; 2],
    pub start: InitialPair,
    pub direction: [f64; 2],
    pub step: f64,
    pub tol: f64,
    pub x_max: f64,
    pub dx: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            method: TraceMethod::Arc,
            u0_range: [0.0, 0.72],
            count: 120,
            bracket: [-1.0, 1.0],
            start: InitialPair { u0: 0.0, v0: 0.0 },
            direction: [1.0, -0.725],
            step: 0.05,
            tol: 0.0,
            x_max: 20.0,
            dx: DEFAULT_DX,
        }
    }
}

impl TraceConfig {
    pub fn validate(&self) -> Result<()> {
        check_dx(self.dx)?;
        if self.count == 0 {
            return Err(Error::InvalidConfig("count must be positive".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig("tol must be non-negative".into()));
        }
        match self.method {
            TraceMethod::Continuation => {
                check_pair_range("bracket", self.bracket)?;
                if !(self.u0_range[0].is_finite() && self.u0_range[1].is_finite()) {
                    return Err(Error::InvalidConfig("u0_range must be finite".into()));
                }
            }
            TraceMethod::Arc => {
                if !(self.step > 0.0) {
                    return Err(Error::InvalidConfig("step must be positive".into()));
                }
                if self.direction[0] == 0.0 && self.direction[1] == 0.0 {
                    return Err(Error::InvalidConfig("direction must be nonzero".into()));
                }
            }
        }
        Ok(())
    }

    pub fn u0_samples(&self) -> Vec<f64> {
        let [a, b] = self.u0_range;
        if self.count == 1 {
            return vec![a];
        }
        (0..self.count)
            .map(|i| a + (b - a) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RasterConfig {
    pub u0_range: [f64; 2],
    pub v0_range: [f64; 2],
    pub counts: [usize; 2],
    pub x_max: f64,
    pub dx: f64,
}

impl Default for RasterConfig {
    fn default() -> Self {
        RasterConfig {
            u0_range: [-1.5, 1.5],
            v0_range: [-1.5, 1.5],
            counts: [41, 41],
            x_max: 20.0,
            dx: DEFAULT_DX,
        }
    }
}

impl RasterConfig {
    pub fn validate(&self) -> Result<()> {
        check_dx(self.dx)?;
        check_pair_range("u0_range", self.u0_range)?;
        check_pair_range("v0_range", self.v0_range)?;
        if self.counts[0] == 0 || self.counts[1] == 0 {
            return Err(Error::InvalidConfig("raster counts must be positive".into()));
        }
        if !(self.x_max > 0.0) {
            return Err(Error::InvalidConfig("x_max must be positive".into()));
        }
        Ok(())
    }
}

/// Preset number plus field overrides of [`BuildConfig`].
pub fn build_config(mut obj: Map<String, Value>) -> Result<(u32, BuildConfig)> {
    let number = match obj.remove("experiment") {
        None => 1,
        Some(v) => v
            .as_u64()
            .and_then(|k| u32::try_from(k).ok())
            .ok_or_else(|| Error::InvalidConfig("experiment must be 1, 2 or 3".into()))?,
    };
    let preset = experiment(number)?.config();
    let mut base = match serde_json::to_value(&preset)? {
        Value::Object(m) => m,
        _ => unreachable!("BuildConfig serializes to an object"),
    };
    for key in obj.keys() {
        if !base.contains_key(key) {
            return Err(Error::InvalidConfig(format!("unknown field `{key}`")));
        }
    }
    merge(&mut base, obj);
    let cfg: BuildConfig = parse(base)?;
    cfg.validate()?;
    Ok((number, cfg))
}

/// Where an evolution-type command gets its initial datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSource {
    /// A `profile.json` written by `build-profile` or `close`.
    pub profile: Option<PathBuf>,
    /// Otherwise built from this preset.
    pub experiment: u32,
}

impl ProfileSource {
    fn validate(&self) -> Result<()> {
        if self.profile.is_none() {
            experiment(self.experiment)?;
        }
        Ok(())
    }

    pub fn preset(&self) -> Result<Experiment> {
        experiment(self.experiment)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub profile: Option<PathBuf>,
    pub experiment: u32,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub cadence: usize,
    pub dealias: bool,
    pub overflow_factor: f64,
    pub support_threshold: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        let e = EvolutionConfig::default();
        EvolveConfig {
            profile: None,
            experiment: 1,
            dt: e.dt,
            t_end: e.t_end,
            snapshot_times: Vec::new(),
            cadence: e.cadence,
            dealias: false,
            overflow_factor: DEFAULT_OVERFLOW_FACTOR,
            support_threshold: DEFAULT_SUPPORT_THRESHOLD,
        }
    }
}

impl EvolveConfig {
    pub fn source(&self) -> ProfileSource {
        ProfileSource {
            profile: self.profile.clone(),
            experiment: self.experiment,
        }
    }

    pub fn evolution(&self) -> EvolutionConfig {
        EvolutionConfig {
            dt: self.dt,
            t_end: self.t_end,
            snapshot_times: self.snapshot_times.clone(),
            cadence: self.cadence,
            dealias: self.dealias,
            overflow_factor: self.overflow_factor,
        }
    }

    /// Checks that do not need the initial datum; the time direction is
    /// checked against the datum's `t` once it is loaded.
    pub fn validate(&self) -> Result<()> {
        self.source().validate()?;
        if !(self.support_threshold > 0.0) {
            return Err(Error::InvalidConfig("support_threshold must be positive".into()));
        }
        if !(self.overflow_factor > 0.0) {
            return Err(Error::InvalidConfig("overflow_factor must be positive".into()));
        }
        if self.profile.is_none() {
            self.evolution().validate(1.0)
        } else if !(self.dt.is_finite() && self.dt != 0.0 && self.t_end > 0.0 && self.cadence > 0) {
            Err(Error::InvalidConfig(
                "need finite nonzero dt, t_end > 0 and cadence > 0".into(),
            ))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CloseConfig {
    pub profile: Option<PathBuf>,
    pub experiment: u32,
    pub alpha_bracket: [f64; 2],
    pub beta_bracket: [f64; 2],
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub max_iterations: usize,
}

impl Default for CloseConfig {
    fn default() -> Self {
        let o = ClosureOptions::default();
        CloseConfig {
            profile: None,
            experiment: 2,
            alpha_bracket: [o.alpha_bracket.0, o.alpha_bracket.1],
            beta_bracket: [o.beta_bracket.0, o.beta_bracket.1],
            inner_tol: o.inner_tol,
            outer_tol: o.outer_tol,
            max_iterations: o.max_iterations,
        }
    }
}

impl CloseConfig {
    pub fn source(&self) -> ProfileSource {
        ProfileSource {
            profile: self.profile.clone(),
            experiment: self.experiment,
        }
    }

    pub fn options(&self) -> ClosureOptions {
        ClosureOptions {
            alpha_bracket: (self.alpha_bracket[0], self.alpha_bracket[1]),
            beta_bracket: (self.beta_bracket[0], self.beta_bracket[1]),
            inner_tol: self.inner_tol,
            outer_tol: self.outer_tol,
            max_iterations: self.max_iterations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.source().validate()?;
        check_pair_range("alpha_bracket", self.alpha_bracket)?;
        check_pair_range("beta_bracket", self.beta_bracket)?;
        if !(self.alpha_bracket[0] > 0.0 && self.alpha_bracket[1] < 1.0) {
            return Err(Error::InvalidConfig("alpha_bracket must lie inside (0, 1)".into()));
        }
        if !(self.beta_bracket[0] > 0.0) {
            return Err(Error::InvalidConfig("beta_bracket must be positive".into()));
        }
        if !(self.inner_tol >= 0.0 && self.outer_tol >= 0.0) {
            return Err(Error::InvalidConfig("tolerances must be non-negative".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// `u0,v0` file, e.g. the output of `trace`.
    pub samples: Option<PathBuf>,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub node_dx: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let o = ScanOptions::default();
        ScanConfig {
            samples: None,
            x_min: o.x_min,
            x_max: o.x_max,
            dx: o.dx,
            node_dx: o.node_dx,
        }
    }
}

impl ScanConfig {
    pub fn options(&self) -> ScanOptions {
        ScanOptions {
            x_min: self.x_min,
            x_max: self.x_max,
            dx: self.dx,
            node_dx: self.node_dx,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_none() {
            return Err(Error::InvalidConfig("scan needs a samples file".into()));
        }
        check_dx(self.dx)?;
        if !(self.x_min < 0.0 && self.x_max > 0.0) {
            return Err(Error::InvalidConfig("need x_min < 0 < x_max".into()));
        }
        if !(self.node_dx >= self.dx) {
            return Err(Error::InvalidConfig("node_dx must be at least dx".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackConfig {
    pub profile: Option<PathBuf>,
    pub experiment: u32,
    pub s0: f64,
    /// Starting position; defaults to the position on the reconstructed curve.
    pub z0: Option<[f64; 2]>,
    pub dt: f64,
    pub t_end: f64,
    pub cadence: usize,
    pub dealias: bool,
}

impl Default for TrackConfig {
    fn default() -> Self {
        let e = EvolutionConfig::default();
        TrackConfig {
            profile: None,
            experiment: 1,
            s0: 0.0,
            z0: None,
            dt: e.dt,
            t_end: e.t_end,
            cadence: e.cadence,
            dealias: false,
        }
    }
}

impl TrackConfig {
    pub fn source(&self) -> ProfileSource {
        ProfileSource {
            profile: self.profile.clone(),
            experiment: self.experiment,
        }
    }

    pub fn evolution(&self) -> EvolutionConfig {
        EvolutionConfig {
            dt: self.dt,
            t_end: self.t_end,
            snapshot_times: Vec::new(),
            cadence: self.cadence,
            dealias: self.dealias,
            overflow_factor: DEFAULT_OVERFLOW_FACTOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.source().validate()?;
        if !self.s0.is_finite() {
            return Err(Error::InvalidConfig("s0 must be finite".into()));
        }
        if self.profile.is_none() {
            self.evolution().validate(1.0)?;
        } else if !(self.dt.is_finite() && self.dt != 0.0 && self.t_end > 0.0) {
            return Err(Error::InvalidConfig("need finite nonzero dt and t_end > 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn obj(v: Value) -> Map<String, Value> {
        match v {
            Value::Object(m) => m,
            _ => panic!("not an object"),
        }
    }

    #[test]
    fn flags_override_file_values() {
        let mut base = obj(json!({"dt": -1e-4, "t_end": 0.5, "cadence": 7}));
        let mut flags = Map::new();
        set_path(&mut flags, "dt", json!(-5e-5));
        merge(&mut base, flags);
        let cfg: EvolveConfig = parse(base).unwrap();
        assert_eq!((cfg.dt, cfg.t_end, cfg.cadence), (-5e-5, 0.5, 7));
    }

    #[test]
    fn rejects_bad_values() {
        let bad_dt: EvolveConfig = parse(obj(json!({"dt": 1e-4}))).unwrap();
        assert!(bad_dt.validate().is_err());
        let bad_end: EvolveConfig = parse(obj(json!({"t_end": 0.0}))).unwrap();
        assert!(bad_end.validate().is_err());
        assert!(build_config(obj(json!({"n": 5000}))).is_err());
        assert!(build_config(obj(json!({"experiment": 4}))).is_err());
        assert!(build_config(obj(json!({"colour": 1}))).is_err());
        assert!(parse::<ShootConfig>(obj(json!({"u00": 1.0}))).is_err());
    }

    #[test]
    fn build_overrides_apply_to_the_preset() {
        let mut m = obj(json!({"experiment": 2}));
        set_path(&mut m, "pair.v0", json!(1.16));
        let (k, cfg) = build_config(m).unwrap();
        assert_eq!(k, 2);
        assert_eq!(cfg.n, 16384);
        assert_eq!(cfg.pair.v0, 1.16);
        assert_eq!(cfg.pair.u0, 0.72);
    }

    #[test]
    fn trace_samples_span_the_range() {
        let c = TraceConfig {
            u0_range: [0.0, 1.0],
            count: 5,
            ..Default::default()
        };
        assert_eq!(c.u0_samples(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
