use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use graftlab::grafting::{CurveRole, LengthInterval, LengthState, WeightedMulticurve};
use graftlab::Constants;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const CONSTANTS_ENV: &str = "GRAFTLAB_CONSTANTS";

/// Malformed input: bad JSON, schema violations, preconditions. Exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// A grafting weight: a number, or a multiple of pi such as `"2pi"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weight {
    Number(f64),
    Text(String),
}

impl Weight {
    pub fn value(&self) -> Result<f64, String> {
        match self {
            Weight::Number(v) => Ok(*v),
            Weight::Text(s) => parse_weight(s),
        }
    }
}

fn parse_weight(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(coef) = t.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        if coef.is_empty() {
            return Ok(PI);
        }
        return coef
            .parse::<f64>()
            .map(|c| c * PI)
            .map_err(|_| format!("bad weight {s:?}"));
    }
    t.parse::<f64>().map_err(|_| format!("bad weight {s:?}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub id: String,
    #[serde(default = "support_role")]
    pub role: CurveRole,
    /// Exact length; shorthand for `lo = hi = length`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

fn support_role() -> CurveRole {
    CurveRole::Support
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mode {
    /// `steps` successive graftings along the lamination.
    Iterate { steps: usize },
    /// Grafting rays `gr_{s lam}` for every `s` of the grid.
    Ray { s: Vec<f64> },
    /// Rates along the ray of the single curve of the lamination.
    Accumulation { steps: usize },
    /// Two equal curves with weights `pi` and `2 pi`; uses `l0` only.
    Counterexample { l0: f64, steps: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub curves: Vec<CurveSpec>,
    #[serde(default)]
    pub lamination: BTreeMap<String, Weight>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Partial overrides of the constants in force.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

impl Scenario {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| input_error(format!("reading scenario {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| input_error(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> anyhow::Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.curves {
            if !seen.insert(c.id.as_str()) {
                return Err(input_error(format!("curve {:?} is defined twice", c.id)));
            }
            self.interval(c)?;
        }
        for (id, w) in &self.lamination {
            if !seen.contains(id.as_str()) {
                return Err(input_error(format!(
                    "lamination refers to undefined curve {id:?}"
                )));
            }
            let v = w.value().map_err(input_error)?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(input_error(format!(
                    "weight of {id:?} must be positive, got {v}"
                )));
            }
        }
        match &self.mode {
            Some(Mode::Iterate { .. })
            | Some(Mode::Ray { .. })
            | Some(Mode::Accumulation { .. }) => {
                if self.lamination.is_empty() {
                    return Err(input_error("lamination is empty"));
                }
            }
            _ => {}
        }
        match &self.mode {
            Some(Mode::Ray { s }) if s.is_empty() || s.iter().any(|v| !(*v > 0.0)) => {
                return Err(input_error(
                    "ray grid must be non-empty with positive entries",
                ));
            }
            Some(Mode::Accumulation { steps }) if *steps == 0 => {
                return Err(input_error("accumulation needs steps >= 1"));
            }
            Some(Mode::Accumulation { .. }) if self.lamination.len() != 1 => {
                return Err(input_error("accumulation needs a single-curve lamination"));
            }
            Some(Mode::Counterexample { l0, .. }) if !(*l0 > 0.0 && l0.is_finite()) => {
                return Err(input_error(format!("l0 must be positive, got {l0}")));
            }
            _ => {}
        }
        if let Some(n) = self.lattice {
            if n < graftlab::qcmaps::MIN_LATTICE {
                return Err(input_error(format!(
                    "lattice {n} is below the minimum {}",
                    graftlab::qcmaps::MIN_LATTICE
                )));
            }
        }
        for (k, v) in &self.tolerances {
            if !(*v >= 0.0 && v.is_finite()) {
                return Err(input_error(format!(
                    "tolerance {k} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn interval(&self, c: &CurveSpec) -> anyhow::Result<LengthInterval> {
        let (lo, hi) = match (c.length, c.lo, c.hi) {
            (Some(l), None, None) => (l, l),
            (None, Some(lo), Some(hi)) => (lo, hi),
            _ => {
                return Err(input_error(format!(
                    "curve {:?} needs either `length` or both `lo` and `hi`",
                    c.id
                )))
            }
        };
        LengthInterval::new(lo, hi).map_err(|e| input_error(format!("curve {:?}: {e}", c.id)))
    }

    pub fn state(&self, epsilon: f64) -> anyhow::Result<LengthState> {
        let curves = self
            .curves
            .iter()
            .map(|c| Ok((c.id.as_str().into(), c.role, self.interval(c)?)))
            .collect::<anyhow::Result<Vec<_>>>()?;
        LengthState::new(curves, epsilon).map_err(|e| input_error(e.to_string()))
    }

    pub fn multicurve(&self) -> anyhow::Result<WeightedMulticurve> {
        let entries = self
            .lamination
            .iter()
            .map(|(id, w)| Ok((id.as_str(), w.value().map_err(input_error)?)))
            .collect::<anyhow::Result<Vec<_>>>()?;
        WeightedMulticurve::new(entries).map_err(|e| input_error(e.to_string()))
    }
}

fn overlay(base: &mut Value, patch: &Value) -> anyhow::Result<()> {
    let (Value::Object(b), Value::Object(p)) = (base, patch) else {
        return Err(input_error("constants must be a JSON object"));
    };
    for (k, v) in p {
        b.insert(k.clone(), v.clone());
    }
    Ok(())
}

/// Defaults, then the file named by `GRAFTLAB_CONSTANTS`, then the scenario's
/// own `constants` block.
pub fn resolve_constants(scenario: Option<&Scenario>) -> anyhow::Result<Constants> {
    let mut v = serde_json::to_value(Constants::default())?;
    if let Some(path) = std::env::var_os(CONSTANTS_ENV).filter(|p| !p.is_empty()) {
        let text = std::fs::read_to_string(&path).map_err(|e| {
            input_error(format!(
                "reading {CONSTANTS_ENV}={}: {e}",
                Path::new(&path).display()
            ))
        })?;
        let patch: Value = serde_json::from_str(&text)
            .map_err(|e| input_error(format!("{CONSTANTS_ENV}: {e}")))?;
        overlay(&mut v, &patch)?;
    }
    if let Some(patch) = scenario.and_then(|s| s.constants.as_ref()) {
        overlay(&mut v, patch)?;
    }
    let c: Constants =
        serde_json::from_value(v).map_err(|e| input_error(format!("constants: {e}")))?;
    c.validate()
        .map_err(|e| input_error(format!("constants: {e}")))?;
    Ok(c)
}
