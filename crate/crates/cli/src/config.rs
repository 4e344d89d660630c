//! Command settings from flags and an optional JSON config file.
//!
//! Each subcommand's flags form one struct whose fields are all optional.
//! A config file holds the same keys (flag names without the dashes); the
//! two are merged with flags taking precedence, then defaults are applied.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use regen_core::distributions::{LifetimeModel, ModelSpec};
use regen_core::Error as CoreError;

/// A configuration problem (exit status 1).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl ConfigError {
    pub fn field(name: &str, detail: impl fmt::Display) -> Self {
        ConfigError(format!("invalid `{name}`: {detail}"))
    }

    pub fn missing(name: &str) -> Self {
        ConfigError(format!("missing required `{name}`"))
    }
}

/// Overlay `flags` on the contents of `config_path` (if any).
pub fn merge<T>(flags: &T, config_path: Option<&Path>) -> Result<T, ConfigError>
where
    T: Serialize + DeserializeOwned,
{
    let Some(path) = config_path else {
        return Ok(serde_json::from_value(to_value(flags)?).expect("flag values round-trip"));
    };
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::field("config", format!("{}: {e}", path.display())))?;
    let mut base: Map<String, Value> = serde_json::from_str(&text)
        .map_err(|e| ConfigError::field("config", format!("{}: {e}", path.display())))?;
    if let Value::Object(over) = to_value(flags)? {
        for (k, v) in over {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base))
        .map_err(|e| ConfigError(format!("config file: {e}")))
}

fn to_value<T: Serialize>(flags: &T) -> Result<Value, ConfigError> {
    serde_json::to_value(flags).map_err(|e| ConfigError(e.to_string()))
}

pub fn require<T: Clone>(value: &Option<T>, name: &str) -> Result<T, ConfigError> {
    value.clone().ok_or_else(|| ConfigError::missing(name))
}

/// Parse `--dist`, given either as a JSON object or as a string holding one.
pub fn parse_model(dist: &Option<Value>) -> Result<LifetimeModel, ConfigError> {
    let value = require(dist, "dist")?;
    let value = match value {
        Value::String(s) => serde_json::from_str(&s).map_err(|e| ConfigError::field("dist", e))?,
        v => v,
    };
    let spec: ModelSpec =
        serde_json::from_value(value).map_err(|e| ConfigError::field("dist", e))?;
    LifetimeModel::from_spec(&spec).map_err(|e| match e {
        CoreError::InvalidModel(m) => ConfigError::field("dist", m),
        other => ConfigError::field("dist", other),
    })
}

/// A numeric flag that also accepts the word `auto`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutoOr {
    Auto,
    Value(f64),
}

impl Serialize for AutoOr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            AutoOr::Auto => s.serialize_str("auto"),
            AutoOr::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl std::str::FromStr for AutoOr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(AutoOr::Auto);
        }
        s.parse::<f64>()
            .map(AutoOr::Value)
            .map_err(|_| format!("expected a number or `auto`, got `{s}`"))
    }
}

impl<'de> Deserialize<'de> for AutoOr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => Ok(AutoOr::Value(n.as_f64().unwrap_or(f64::NAN))),
            Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!(
                "expected a number or `auto`, got {other}"
            ))),
        }
    }
}

/// Time grid: `1,2,5`, `lin:a:b:n` or `log:a:b:n`, or a JSON array in a config file.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "Vec<f64>")]
pub struct TimeGrid(pub Vec<f64>);

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.0
    }
}

impl std::str::FromStr for TimeGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let points = if let Some(rest) = s.strip_prefix("lin:").or_else(|| s.strip_prefix("log:")) {
            let parts: Vec<&str> = rest.split(':').collect();
            let [a, b, n] = parts.as_slice() else {
                return Err(format!("expected `kind:start:end:count`, got `{s}`"));
            };
            let a: f64 = a.parse().map_err(|_| format!("bad start `{a}`"))?;
            let b: f64 = b.parse().map_err(|_| format!("bad end `{b}`"))?;
            let n: usize = n.parse().map_err(|_| format!("bad count `{n}`"))?;
            if n < 2 {
                return Err("grid count must be at least 2".into());
            }
            let step = |k: usize| k as f64 / (n - 1) as f64;
            if s.starts_with("lin:") {
                (0..n).map(|k| a + (b - a) * step(k)).collect()
            } else {
                if !(a > 0.0 && b > 0.0) {
                    return Err("log grid needs positive ends".into());
                }
                (0..n).map(|k| a * (b / a).powf(step(k))).collect()
            }
        } else {
            s.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("bad time `{x}`"))
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        TimeGrid::new(points)
    }
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self, String> {
        if points.is_empty() {
            return Err("time grid is empty".into());
        }
        if points.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err("times must be finite and nonnegative".into());
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err("times must be strictly increasing".into());
        }
        Ok(TimeGrid(points))
    }
}

impl<'de> Deserialize<'de> for TimeGrid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            v => {
                let points: Vec<f64> =
                    serde_json::from_value(v).map_err(serde::de::Error::custom)?;
                TimeGrid::new(points).map_err(serde::de::Error::custom)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!("1, 2,5".parse::<TimeGrid>().unwrap().0, vec![1.0, 2.0, 5.0]);
        let g: TimeGrid = "log:1:100:3".parse().unwrap();
        assert!((g.0[1] - 10.0).abs() < 1e-12);
        assert_eq!(
            "lin:0:1:3".parse::<TimeGrid>().unwrap().0,
            vec![0.0, 0.5, 1.0]
        );
        assert!("2,1".parse::<TimeGrid>().is_err());
        let j: TimeGrid = serde_json::from_str("[1, 3]").unwrap();
        assert_eq!(j.0, vec![1.0, 3.0]);
    }

    #[test]
    fn auto_or_value() {
        assert_eq!("auto".parse::<AutoOr>().unwrap(), AutoOr::Auto);
        assert_eq!(
            serde_json::from_str::<AutoOr>("2.5").unwrap(),
            AutoOr::Value(2.5)
        );
        assert_eq!(serde_json::to_string(&AutoOr::Auto).unwrap(), "\"auto\"");
        assert!("x".parse::<AutoOr>().is_err());
    }

    #[test]
    fn model_errors_name_the_field() {
        let bad = Some(Value::String(
            r#"{"family":"exponential","rate":-1}"#.into(),
        ));
        assert!(parse_model(&bad).unwrap_err().0.contains("`dist`"));
        assert!(parse_model(&None).unwrap_err().0.contains("`dist`"));
    }
}
