//! Declarative scenarios: a strict TOML schema naming the pre/post-selected
//! states, the observables, an optional meter coupling and sweep ranges.
//!
//! Angles (`theta`, `alpha`) are written in units of pi, so `theta = 0.5`
//! means pi/2.
//!
//! ```toml
//! name = "disembodiment"
//! observables = ["sigma_z_L", "sigma_z_R", "LxSx_L", "LxSx_R"]
//! preselect = { state = "disembody_in", theta = 0.5 }
//! postselect = { state = "disembody_f", alpha = 0.25 }
//!
//! [coupling]
//! variant = "measure_sigma_zR_noisy"
//! g = 1e-3
//!
//! [meter]
//! n = 64
//! delta = 4.0
//!
//! [sweep.theta]
//! start = 0.2
//! stop = 0.8
//! steps = 4
//! ```

mod bundles;
mod output;
mod run;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{CouplingSpec, CouplingVariant, KickSign, Noise};
use crate::optics::{StateName, StateParams};
use crate::weakvalue::ObservableId;

pub use bundles::{bundle, bundle_names, BUNDLES};
pub use output::{csv_header, write_csv, write_records};
pub use run::{run_scenario, FitRecord, ObservableValue, ResultRecord};

pub const DEFAULT_N: usize = 64;
pub const DEFAULT_DELTA: f64 = 4.0;
pub const DEFAULT_G: f64 = 1e-3;
pub const DEFAULT_G_PRIME: f64 = 1e-3;
pub const DEFAULT_T: f64 = 1.0;
pub const DEFAULT_KICK_TIME: f64 = 0.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown id `{id}` in field `{field}`")]
    UnknownId { field: String, id: String },

    #[error("`{field}` out of range: {reason}")]
    OutOfRange { field: String, reason: String },

    #[error("unknown parameter path `{0}`")]
    UnknownPath(String),

    #[error("unknown bundle `{name}` (available: {available})")]
    UnknownBundle { name: String, available: String },
}

type SResult<T> = std::result::Result<T, ScenarioError>;

fn out_of_range(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::OutOfRange {
        field: field.into(),
        reason: reason.into(),
    }
}

// --- on-disk form ------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    observables: Vec<String>,
    preselect: RawState,
    postselect: RawState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coupling: Option<RawCoupling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meter: Option<RawMeter>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    sweep: BTreeMap<String, RawSweep>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kick_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    observable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sign: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    start: f64,
    stop: f64,
    steps: i64,
}

// --- validated form ----------------------------------------------------------

/// A named state with its angles in units of pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpec {
    pub state: StateName,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
}

impl StateSpec {
    pub fn new(state: StateName) -> Self {
        Self {
            state,
            theta: None,
            alpha: None,
        }
    }

    /// Angles converted to radians.
    pub fn params(&self) -> StateParams {
        StateParams {
            theta: self.theta.map(|x| x * std::f64::consts::PI),
            alpha: self.alpha.map(|x| x * std::f64::consts::PI),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingDoc {
    pub variant: CouplingVariant,
    pub g: f64,
    pub g_prime: f64,
    pub t: f64,
    pub kick_time: f64,
    pub observable: ObservableId,
    pub noise: Option<Noise>,
    pub sign: KickSign,
}

impl CouplingDoc {
    pub fn new(variant: CouplingVariant) -> Self {
        Self {
            variant,
            g: DEFAULT_G,
            g_prime: DEFAULT_G_PRIME,
            t: DEFAULT_T,
            kick_time: DEFAULT_KICK_TIME,
            observable: ObservableId::SigmaZ,
            noise: None,
            sign: KickSign::Standard,
        }
    }

    pub fn spec(&self) -> CouplingSpec {
        CouplingSpec {
            variant: self.variant,
            g: self.g,
            g_prime: self.g_prime,
            t: self.t,
            kick_time: self.kick_time,
            observable: self.observable,
            noise: self.noise,
            sign: self.sign,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeterDoc {
    pub n: usize,
    pub delta: f64,
}

impl Default for MeterDoc {
    fn default() -> Self {
        Self {
            n: DEFAULT_N,
            delta: DEFAULT_DELTA,
        }
    }
}

/// Inclusive grid `start, ..., stop` with `steps` points.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub path: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == self.steps - 1 {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDoc {
    pub name: String,
    pub preselect: StateSpec,
    pub postselect: StateSpec,
    pub coupling: Option<CouplingDoc>,
    pub meter: MeterDoc,
    pub observables: Vec<ObservableId>,
    /// Sorted by canonical path; the first axis varies slowest.
    pub sweep: Vec<SweepAxis>,
}

/// Numeric fields addressable by overrides and sweeps.
const NUMERIC_PATHS: [&str; 10] = [
    "preselect.theta",
    "preselect.alpha",
    "postselect.theta",
    "postselect.alpha",
    "coupling.g",
    "coupling.g_prime",
    "coupling.t",
    "coupling.kick_time",
    "meter.n",
    "meter.delta",
];

/// Parse and validate a scenario, filling every default.
pub fn parse_scenario(text: &str) -> SResult<ScenarioDoc> {
    let raw: RawDoc = toml::from_str(text).map_err(|e| syntax_error(text, &e))?;
    let doc = ScenarioDoc::from_raw(raw)?;
    doc.validate()?;
    Ok(doc)
}

fn syntax_error(text: &str, e: &toml::de::Error) -> ScenarioError {
    let offset = e.span().map(|s| s.start).unwrap_or(0).min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
    ScenarioError::Syntax {
        line,
        column,
        message: e.message().trim().to_string(),
    }
}

fn parse_id<T: std::str::FromStr>(field: &str, id: &str) -> SResult<T> {
    id.parse().map_err(|_| ScenarioError::UnknownId {
        field: field.to_string(),
        id: id.to_string(),
    })
}

impl ScenarioDoc {
    fn from_raw(raw: RawDoc) -> SResult<Self> {
        let state = |field: &str, s: RawState| -> SResult<StateSpec> {
            Ok(StateSpec {
                state: parse_id(&format!("{field}.state"), &s.state)?,
                theta: s.theta,
                alpha: s.alpha,
            })
        };
        let coupling = match raw.coupling {
            None => None,
            Some(c) => Some(CouplingDoc {
                variant: parse_id("coupling.variant", &c.variant)?,
                g: c.g.unwrap_or(DEFAULT_G),
                g_prime: c.g_prime.unwrap_or(DEFAULT_G_PRIME),
                t: c.t.unwrap_or(DEFAULT_T),
                kick_time: c.kick_time.unwrap_or(DEFAULT_KICK_TIME),
                observable: match c.observable {
                    Some(o) => parse_id("coupling.observable", &o)?,
                    None => ObservableId::SigmaZ,
                },
                noise: c.noise.map(|n| parse_id("coupling.noise", &n)).transpose()?,
                sign: match c.sign {
                    Some(s) => parse_id("coupling.sign", &s)?,
                    None => KickSign::Standard,
                },
            }),
        };
        let meter = match raw.meter {
            None => MeterDoc::default(),
            Some(m) => {
                let n = m.n.unwrap_or(DEFAULT_N as i64);
                if n < 1 {
                    return Err(out_of_range("meter.n", format!("must be >= 1, got {n}")));
                }
                MeterDoc {
                    n: n as usize,
                    delta: m.delta.unwrap_or(DEFAULT_DELTA),
                }
            }
        };
        let observables = raw
            .observables
            .iter()
            .map(|o| parse_id("observables", o))
            .collect::<SResult<Vec<ObservableId>>>()?;
        let mut sweep = Vec::with_capacity(raw.sweep.len());
        for (path, s) in raw.sweep {
            let canonical = canonical_path_for(&path, raw_state_ids(&raw.preselect, &raw.postselect))?;
            if s.steps < 1 {
                return Err(out_of_range(
                    format!("sweep.{path}.steps"),
                    format!("must be >= 1, got {}", s.steps),
                ));
            }
            sweep.push(SweepAxis {
                path: canonical,
                start: s.start,
                stop: s.stop,
                steps: s.steps as usize,
            });
        }
        sweep.sort_by(|a, b| a.path.cmp(&b.path));
        if sweep.windows(2).any(|w| w[0].path == w[1].path) {
            return Err(out_of_range("sweep", "the same parameter is swept twice"));
        }
        Ok(Self {
            name: raw.name,
            preselect: state("preselect", raw.preselect)?,
            postselect: state("postselect", raw.postselect)?,
            coupling,
            meter,
            observables,
            sweep,
        })
    }

    fn to_raw(&self) -> RawDoc {
        let state = |s: &StateSpec| RawState {
            state: s.state.as_str().to_string(),
            theta: s.theta,
            alpha: s.alpha,
        };
        RawDoc {
            name: self.name.clone(),
            observables: self.observables.iter().map(|o| o.as_str().to_string()).collect(),
            preselect: state(&self.preselect),
            postselect: state(&self.postselect),
            coupling: self.coupling.map(|c| RawCoupling {
                variant: c.variant.as_str().to_string(),
                g: Some(c.g),
                g_prime: Some(c.g_prime),
                t: Some(c.t),
                kick_time: Some(c.kick_time),
                observable: Some(c.observable.as_str().to_string()),
                noise: c.noise.map(|n| n.as_str().to_string()),
                sign: Some(c.sign.as_str().to_string()),
            }),
            meter: Some(RawMeter {
                n: Some(self.meter.n as i64),
                delta: Some(self.meter.delta),
            }),
            sweep: self
                .sweep
                .iter()
                .map(|a| {
                    (
                        a.path.clone(),
                        RawSweep {
                            start: a.start,
                            stop: a.stop,
                            steps: a.steps as i64,
                        },
                    )
                })
                .collect(),
        }
    }

    /// Canonical TOML with every default written out.
    pub fn print(&self) -> String {
        toml::to_string(&self.to_raw()).expect("scenario documents always serialize")
    }

    /// SHA-256 of the canonical text.
    pub fn provenance_hash(&self) -> String {
        hex::encode(Sha256::digest(self.print().as_bytes()))
    }

    pub fn validate(&self) -> SResult<()> {
        if self.name.trim().is_empty() {
            return Err(out_of_range("name", "must not be empty"));
        }
        for (field, spec) in [("preselect", &self.preselect), ("postselect", &self.postselect)] {
            validate_state(field, spec)?;
        }
        let sig = self.preselect.state.signature();
        if sig != self.postselect.state.signature() {
            return Err(out_of_range(
                "postselect.state",
                format!(
                    "`{}` lives on [{}] but `{}` on [{}]",
                    self.postselect.state,
                    self.postselect.state.signature(),
                    self.preselect.state,
                    sig
                ),
            ));
        }
        for o in &self.observables {
            if !o.fits(&sig) {
                return Err(out_of_range("observables", format!("`{o}` is not defined on [{sig}]")));
            }
        }
        if let Some(c) = &self.coupling {
            c.spec().validate().map_err(|e| match e {
                crate::Error::InvalidParameter { name, reason } => out_of_range(format!("coupling.{name}"), reason),
                other => out_of_range("coupling", other.to_string()),
            })?;
            if c.variant == CouplingVariant::NoiselessKick && !c.observable.fits(&sig) {
                return Err(out_of_range(
                    "coupling.observable",
                    format!("`{}` is not defined on [{sig}]", c.observable),
                ));
            }
        }
        if !(self.meter.delta.is_finite() && self.meter.delta > 0.0) {
            return Err(out_of_range(
                "meter.delta",
                format!("must be positive, got {}", self.meter.delta),
            ));
        }
        for axis in &self.sweep {
            if !(axis.start.is_finite() && axis.stop.is_finite()) {
                return Err(out_of_range(format!("sweep.{}", axis.path), "endpoints must be finite"));
            }
            if axis.path.starts_with("coupling.") && self.coupling.is_none() {
                return Err(ScenarioError::UnknownPath(axis.path.clone()));
            }
            for v in axis.values() {
                let mut probe = self.clone();
                probe.sweep.clear();
                probe.set_numeric(&axis.path, v)?;
                probe.validate()?;
            }
        }
        Ok(())
    }

    /// Resolve a user-facing path (`theta`, `coupling.g`, ...) to its canonical form.
    pub fn canonical_path(&self, path: &str) -> SResult<String> {
        canonical_path_for(path, (self.preselect.state, self.postselect.state))
    }

    /// Apply one `path=value` override. Id-valued fields take their string ids.
    pub fn set(&mut self, path: &str, value: &str) -> SResult<()> {
        let value = value.trim();
        match path {
            "name" => {
                self.name = value.to_string();
                return Ok(());
            }
            "preselect.state" => {
                self.preselect.state = parse_id(path, value)?;
                return Ok(());
            }
            "postselect.state" => {
                self.postselect.state = parse_id(path, value)?;
                return Ok(());
            }
            "coupling.variant" => {
                let variant = parse_id(path, value)?;
                match &mut self.coupling {
                    Some(c) => c.variant = variant,
                    None => self.coupling = Some(CouplingDoc::new(variant)),
                }
                return Ok(());
            }
            "coupling.observable" | "coupling.noise" | "coupling.sign" => {
                let c = self
                    .coupling
                    .as_mut()
                    .ok_or_else(|| ScenarioError::UnknownPath(path.to_string()))?;
                match path {
                    "coupling.observable" => c.observable = parse_id(path, value)?,
                    "coupling.noise" => c.noise = Some(parse_id(path, value)?),
                    _ => c.sign = parse_id(path, value)?,
                }
                return Ok(());
            }
            _ => {}
        }
        let canonical = self.canonical_path(path)?;
        let number: f64 = value
            .parse()
            .map_err(|_| out_of_range(canonical.clone(), format!("`{value}` is not a number")))?;
        self.set_numeric(&canonical, number)?;
        // A pinned value replaces any sweep over the same field.
        self.sweep.retain(|a| a.path != canonical);
        Ok(())
    }

    /// Add or replace the sweep axis over `path`.
    pub fn set_sweep(&mut self, path: &str, start: f64, stop: f64, steps: usize) -> SResult<()> {
        let canonical = self.canonical_path(path)?;
        if steps == 0 {
            return Err(out_of_range(format!("sweep.{canonical}.steps"), "must be at least 1"));
        }
        self.sweep.retain(|a| a.path != canonical);
        self.sweep.push(SweepAxis {
            path: canonical,
            start,
            stop,
            steps,
        });
        self.sweep.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(())
    }

    /// Set a numeric field by canonical path.
    pub fn set_numeric(&mut self, path: &str, value: f64) -> SResult<()> {
        fn coupling<'a>(doc: &'a mut ScenarioDoc, path: &str) -> SResult<&'a mut CouplingDoc> {
            doc.coupling
                .as_mut()
                .ok_or_else(|| ScenarioError::UnknownPath(path.to_string()))
        }
        match path {
            "preselect.theta" => self.preselect.theta = Some(value),
            "preselect.alpha" => self.preselect.alpha = Some(value),
            "postselect.theta" => self.postselect.theta = Some(value),
            "postselect.alpha" => self.postselect.alpha = Some(value),
            "coupling.g" => coupling(self, path)?.g = value,
            "coupling.g_prime" => coupling(self, path)?.g_prime = value,
            "coupling.t" => coupling(self, path)?.t = value,
            "coupling.kick_time" => coupling(self, path)?.kick_time = value,
            "meter.delta" => self.meter.delta = value,
            "meter.n" => {
                if !(value.fract() == 0.0 && value >= 1.0 && value <= u32::MAX as f64) {
                    return Err(out_of_range(
                        "meter.n",
                        format!("must be a positive integer, got {value}"),
                    ));
                }
                self.meter.n = value as usize;
            }
            _ => return Err(ScenarioError::UnknownPath(path.to_string())),
        }
        Ok(())
    }

    /// Parameter columns reported with each record: state angles first, then
    /// any other swept field.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (prefix, s) in [("preselect", &self.preselect), ("postselect", &self.postselect)] {
            for (key, v) in [("theta", s.theta), ("alpha", s.alpha)] {
                let path = format!("{prefix}.{key}");
                if v.is_some() || self.sweep.iter().any(|a| a.path == path) {
                    names.push(path);
                }
            }
        }
        for axis in &self.sweep {
            if !names.contains(&axis.path) {
                names.push(axis.path.clone());
            }
        }
        names
    }

    pub fn numeric(&self, path: &str) -> Option<f64> {
        match path {
            "preselect.theta" => self.preselect.theta,
            "preselect.alpha" => self.preselect.alpha,
            "postselect.theta" => self.postselect.theta,
            "postselect.alpha" => self.postselect.alpha,
            "coupling.g" => self.coupling.map(|c| c.g),
            "coupling.g_prime" => self.coupling.map(|c| c.g_prime),
            "coupling.t" => self.coupling.map(|c| c.t),
            "coupling.kick_time" => self.coupling.map(|c| c.kick_time),
            "meter.n" => Some(self.meter.n as f64),
            "meter.delta" => Some(self.meter.delta),
            _ => None,
        }
    }

    /// Every point of the sweep grid as a concrete document, in sweep order.
    pub fn points(&self) -> SResult<Vec<ScenarioDoc>> {
        let mut points = vec![{
            let mut base = self.clone();
            base.sweep.clear();
            base
        }];
        for axis in &self.sweep {
            let mut next = Vec::with_capacity(points.len() * axis.steps);
            for p in &points {
                for v in axis.values() {
                    let mut q = p.clone();
                    q.set_numeric(&axis.path, v)?;
                    next.push(q);
                }
            }
            points = next;
        }
        Ok(points)
    }
}

/// Column label of a canonical path: the bare angle name for state angles.
pub fn param_label(path: &str) -> &str {
    match path {
        "preselect.theta" | "postselect.theta" => "theta",
        "preselect.alpha" | "postselect.alpha" => "alpha",
        other => other,
    }
}

fn raw_state_ids(pre: &RawState, post: &RawState) -> (StateName, StateName) {
    // Unknown ids are reported by `from_raw`; fall back to a state without angles.
    let parse = |s: &RawState| s.state.parse().unwrap_or(StateName::CheshireIn);
    (parse(pre), parse(post))
}

fn canonical_path_for(path: &str, states: (StateName, StateName)) -> SResult<String> {
    if NUMERIC_PATHS.contains(&path) {
        return Ok(path.to_string());
    }
    if path == "theta" || path == "alpha" {
        let (pre, post) = states;
        for (prefix, s) in [("preselect", pre), ("postselect", post)] {
            if s.required_param() == Some(path) {
                return Ok(format!("{prefix}.{path}"));
            }
        }
    }
    Err(ScenarioError::UnknownPath(path.to_string()))
}

fn validate_state(field: &str, spec: &StateSpec) -> SResult<()> {
    let needed = spec.state.required_param();
    for (key, v) in [("theta", spec.theta), ("alpha", spec.alpha)] {
        match (v, needed == Some(key)) {
            (None, true) => {
                return Err(out_of_range(
                    format!("{field}.{key}"),
                    format!("required by state `{}`", spec.state),
                ))
            }
            (Some(_), false) => {
                return Err(out_of_range(
                    format!("{field}.{key}"),
                    format!("state `{}` takes no {key}", spec.state),
                ))
            }
            (Some(x), true) if !x.is_finite() => return Err(out_of_range(format!("{field}.{key}"), "must be finite")),
            _ => {}
        }
    }
    if spec.state == StateName::AmpIn {
        let theta = spec.theta.unwrap_or_default();
        if !(theta > -1.0 && theta < 1.0) {
            return Err(out_of_range(
                format!("{field}.theta"),
                format!("amp_in needs theta in (-1, 1) (units of pi), got {theta}"),
            ));
        }
    }
    Ok(())
}

impl fmt::Display for ScenarioDoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "quartet"
observables = ["Pi_L", "Pi_R", "sigma_z_L", "sigma_z_R"]
preselect = { state = "cheshire_in" }
postselect = { state = "cheshire_f" }
"#;

    #[test]
    fn minimal_doc_gets_defaults() {
        let doc = parse_scenario(MINIMAL).unwrap();
        assert_eq!(doc.meter, MeterDoc { n: 64, delta: 4.0 });
        assert_eq!(doc.observables.len(), 4);
        assert!(doc.coupling.is_none());

        let with_coupling = format!("{MINIMAL}\n[coupling]\nvariant = \"noiseless_kick\"\n");
        let c = parse_scenario(&with_coupling).unwrap().coupling.unwrap();
        assert_eq!((c.g, c.g_prime, c.t, c.kick_time), (1e-3, 1e-3, 1.0, 0.0));
    }

    #[test]
    fn unknown_observable_names_field() {
        let text = MINIMAL.replace("\"sigma_z_R\"", "\"sigma_y_R\"");
        assert_eq!(
            parse_scenario(&text).unwrap_err(),
            ScenarioError::UnknownId {
                field: "observables".into(),
                id: "sigma_y_R".into()
            }
        );
    }

    #[test]
    fn unknown_state_names_field() {
        let text = MINIMAL.replace("cheshire_f", "cheshire_out");
        assert!(matches!(
            parse_scenario(&text).unwrap_err(),
            ScenarioError::UnknownId { field, .. } if field == "postselect.state"
        ));
    }

    #[test]
    fn syntax_error_has_location() {
        let text = "name = \"x\"\npreselect = { state = \"cheshire_in\" \n";
        match parse_scenario(text).unwrap_err() {
            ScenarioError::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nsurprise = 1\n");
        assert!(matches!(
            parse_scenario(&text).unwrap_err(),
            ScenarioError::Syntax { .. }
        ));
    }

    #[test]
    fn out_of_range_parameters() {
        let text = format!("{MINIMAL}\n[coupling]\nvariant = \"noiseless_kick\"\ng = -1.0\n");
        assert!(matches!(
            parse_scenario(&text).unwrap_err(),
            ScenarioError::OutOfRange { field, .. } if field == "coupling.g"
        ));
        let text = format!("{MINIMAL}\n[meter]\nn = 0\n");
        assert!(matches!(
            parse_scenario(&text).unwrap_err(),
            ScenarioError::OutOfRange { .. }
        ));
        let amp = r#"
name = "amp"
preselect = { state = "amp_in", theta = 1.5 }
postselect = { state = "amp_f" }
"#;
        assert!(matches!(
            parse_scenario(amp).unwrap_err(),
            ScenarioError::OutOfRange { .. }
        ));
    }

    #[test]
    fn missing_angle_is_reported() {
        let text = r#"
name = "amp"
preselect = { state = "amp_in" }
postselect = { state = "amp_f" }
"#;
        assert!(matches!(
            parse_scenario(text).unwrap_err(),
            ScenarioError::OutOfRange { field, .. } if field == "preselect.theta"
        ));
    }

    #[test]
    fn overrides_and_aliases() {
        let mut doc = parse_scenario(bundle("disembodiment").unwrap()).unwrap();
        doc.set("theta", "0.25").unwrap();
        doc.set("alpha", "0.125").unwrap();
        doc.set("coupling.g", "1e-4").unwrap();
        assert_eq!(doc.preselect.theta, Some(0.25));
        assert_eq!(doc.postselect.alpha, Some(0.125));
        assert_eq!(doc.coupling.unwrap().g, 1e-4);
        assert_eq!(
            doc.set("coupling.h", "1").unwrap_err(),
            ScenarioError::UnknownPath("coupling.h".into())
        );
        assert!(matches!(
            doc.set("coupling.g", "abc").unwrap_err(),
            ScenarioError::OutOfRange { .. }
        ));
    }

    #[test]
    fn print_parse_round_trip() {
        for name in bundle_names() {
            let doc = parse_scenario(bundle(name).unwrap()).unwrap();
            let again = parse_scenario(&doc.print()).unwrap();
            assert_eq!(doc, again, "{name}");
            assert_eq!(doc.provenance_hash(), again.provenance_hash());
        }
    }

    #[test]
    fn sweep_grid_is_inclusive() {
        let axis = SweepAxis {
            path: "preselect.theta".into(),
            start: 0.2,
            stop: 2.8,
            steps: 9,
        };
        let v = axis.values();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], 0.2);
        assert_eq!(v[8], 2.8);
    }

    #[test]
    fn zero_steps_rejected() {
        let text = format!("{MINIMAL}\n[sweep.\"meter.delta\"]\nstart = 1.0\nstop = 2.0\nsteps = 0\n");
        assert!(matches!(
            parse_scenario(&text).unwrap_err(),
            ScenarioError::OutOfRange { .. }
        ));
    }

    #[test]
    fn sweep_of_unknown_path() {
        let text = format!("{MINIMAL}\n[sweep.theta]\nstart = 0.1\nstop = 0.2\nsteps = 2\n");
        assert_eq!(
            parse_scenario(&text).unwrap_err(),
            ScenarioError::UnknownPath("theta".into())
        );
    }
}
