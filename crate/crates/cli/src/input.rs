//! Curve and bundle arguments.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use selflink::bundles::Bundle;
use selflink::TrigCurve;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Where a curve comes from: a spec file or an inline preset such as
/// `preset:example1?A=1.3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveSource {
    File(PathBuf),
    Preset { name: String, a: f64 },
}

impl FromStr for CurveSource {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let Some(rest) = text.strip_prefix("preset:") else {
            return Ok(CurveSource::File(PathBuf::from(text)));
        };
        let (name, query) = rest.split_once('?').unwrap_or((rest, ""));
        if name.is_empty() {
            return Err(format!("`{text}`: missing preset name"));
        }
        let mut a = None;
        for pair in query.split('&').filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| format!("`{text}`: expected key=value, got `{pair}`"))?;
            match key {
                "A" | "a" => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| format!("`{text}`: A must be a number, got `{value}`"))?;
                    if !v.is_finite() {
                        return Err(format!("`{text}`: A must be finite"));
                    }
                    a = Some(v);
                }
                other => return Err(format!("`{text}`: unknown preset parameter `{other}`")),
            }
        }
        let a = a.ok_or_else(|| format!("`{text}`: preset needs a parameter, e.g. `?A=1`"))?;
        Ok(CurveSource::Preset {
            name: name.to_string(),
            a,
        })
    }
}

impl fmt::Display for CurveSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSource::File(p) => write!(f, "{}", p.display()),
            CurveSource::Preset { name, a } => write!(f, "preset:{name}?A={a}"),
        }
    }
}

impl CurveSource {
    pub fn load(&self) -> Result<TrigCurve, CliError> {
        match self {
            CurveSource::Preset { name, a } => {
                TrigCurve::from_preset(name, *a).map_err(|e| CliError::Input(e.to_string()))
            }
            CurveSource::File(path) => {
                let text = read(path)?;
                TrigCurve::from_json_str(&text)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
            }
        }
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// `osculating`, `orthogonal`, `coordinate` (the first three axes) or
/// `custom:<file>` with `{"fields": [spec, spec, spec]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleChoice {
    Osculating,
    Orthogonal,
    Coordinate,
    Custom(PathBuf),
}

impl FromStr for BundleChoice {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        match text {
            "osculating" => Ok(BundleChoice::Osculating),
            "orthogonal" => Ok(BundleChoice::Orthogonal),
            "coordinate" => Ok(BundleChoice::Coordinate),
            "custom" => Err("custom bundles need a file: `custom:<fields.json>`".into()),
            other => match other.strip_prefix("custom:") {
                Some(p) if !p.is_empty() => Ok(BundleChoice::Custom(PathBuf::from(p))),
                _ => Err(format!(
                    "unknown bundle `{other}` (osculating, orthogonal, coordinate, custom:<file>)"
                )),
            },
        }
    }
}

impl fmt::Display for BundleChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleChoice::Osculating => write!(f, "osculating"),
            BundleChoice::Orthogonal => write!(f, "orthogonal"),
            BundleChoice::Coordinate => write!(f, "coordinate"),
            BundleChoice::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

impl BundleChoice {
    /// The bundle along `curve`.
    pub fn build(&self, curve: &TrigCurve) -> Result<Bundle, CliError> {
        match self {
            BundleChoice::Osculating => Ok(Bundle::osculating(curve)),
            BundleChoice::Orthogonal => Ok(Bundle::orthogonal(curve)),
            BundleChoice::Coordinate => Ok(Bundle::coordinate(curve.dim())),
            BundleChoice::Custom(path) => {
                let text = read(path)?;
                let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
                let value: Value = serde_json::from_str(&text)
                    .map_err(|e| bad(format!("line {}, column {}: {e}", e.line(), e.column())))?;
                let fields = value
                    .get("fields")
                    .and_then(Value::as_array)
                    .ok_or_else(|| bad("fields: expected an array of three curve specs".into()))?;
                if fields.len() != 3 {
                    return Err(bad(format!(
                        "fields: expected 3 entries, got {}",
                        fields.len()
                    )));
                }
                let mut parsed = Vec::with_capacity(3);
                for (i, f) in fields.iter().enumerate() {
                    parsed.push(
                        TrigCurve::from_json_value(f)
                            .map_err(|e| bad(format!("fields[{i}]: {e}")))?,
                    );
                }
                let fields: [TrigCurve; 3] = parsed.try_into().expect("three fields");
                if fields[0].dim() != curve.dim() {
                    return Err(bad(format!(
                        "fields live in R^{} but the curve is in R^{}",
                        fields[0].dim(),
                        curve.dim()
                    )));
                }
                Bundle::from_fields(fields).map_err(|e| bad(e.to_string()))
            }
        }
    }

    /// The push-off order the bundle is built for, when it has one.
    pub fn natural_order(&self, dim: usize) -> Option<usize> {
        match self {
            BundleChoice::Osculating => Some(1),
            BundleChoice::Orthogonal => Some(dim - 2),
            _ => None,
        }
    }
}
