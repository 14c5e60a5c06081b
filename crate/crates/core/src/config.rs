//! Experiment configuration: flat TOML files, `key=value` overrides, and
//! reloading a previous run's `metadata.json`.
//!
//! Every key of [`ExperimentSpec`] may appear. Keys not given anywhere keep
//! their defaults; defaults listed in the `assumed` set stay flagged until
//! something sets them explicitly.

use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::simulate::{ExperimentSpec, DEFAULT_ASSUMED};

/// A spec together with the keys whose values were not chosen explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSpec {
    pub spec: ExperimentSpec,
    pub assumed: BTreeSet<String>,
}

impl ResolvedSpec {
    pub fn new(spec: ExperimentSpec, assumed: BTreeSet<String>) -> Self {
        Self { spec, assumed }
    }

    /// Library defaults with the default `assumed` set.
    pub fn defaults() -> Self {
        Self::new(ExperimentSpec::default(), DEFAULT_ASSUMED.iter().map(|s| s.to_string()).collect())
    }

    /// Applies a flat key/value table on top of the current spec.
    pub fn merge(&mut self, table: Map<String, Value>) -> Result<()> {
        let mut current = match serde_json::to_value(&self.spec) {
            Ok(Value::Object(m)) => m,
            _ => unreachable!("spec serializes to an object"),
        };
        let mut touched = Vec::new();
        for (key, value) in table {
            if !current.contains_key(&key) {
                return Err(Error::InvalidConfig(format!("unknown configuration key '{key}'")));
            }
            current.insert(key.clone(), value);
            touched.push(key);
        }
        self.spec = serde_json::from_value(Value::Object(current))
            .map_err(|e| Error::InvalidConfig(format!("invalid configuration: {e}")))?;
        for key in touched {
            self.assumed.remove(&key);
        }
        Ok(())
    }

    /// Parses and applies `key=value` overrides. Values are read as TOML
    /// scalars or arrays; bare words are taken as strings, and
    /// comma-separated lists are accepted for list-valued keys.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        let mut table = Map::new();
        for raw in overrides {
            let raw = raw.as_ref();
            let (key, value) = raw
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("override '{raw}' is not of the form key=value")))?;
            let key = key.trim();
            table.insert(key.to_string(), parse_override_value(key, value.trim()));
        }
        self.merge(table)
    }

    /// Value and `assumed` flag of every key.
    pub fn parameters(&self) -> Map<String, Value> {
        let Ok(Value::Object(values)) = serde_json::to_value(&self.spec) else {
            unreachable!("spec serializes to an object")
        };
        values
            .into_iter()
            .map(|(k, v)| {
                let assumed = self.assumed.contains(&k);
                (k, serde_json::json!({ "value": v, "assumed": assumed }))
            })
            .collect()
    }
}

const LIST_KEYS: [&str; 2] = ["schemes", "sweep_values"];

fn parse_override_value(key: &str, raw: &str) -> Value {
    if let Ok(table) = format!("v = {raw}").parse::<toml::Table>() {
        if let Some(v) = table.get("v") {
            let json = toml_to_json(v.clone());
            if LIST_KEYS.contains(&key) && !json.is_array() {
                return Value::Array(vec![json]);
            }
            return json;
        }
    }
    if LIST_KEYS.contains(&key) {
        return Value::Array(raw.split(',').map(|item| parse_override_value("", item.trim())).collect());
    }
    Value::String(raw.to_string())
}

fn toml_to_json(value: toml::Value) -> Value {
    match value {
        toml::Value::String(s) => Value::String(s),
        toml::Value::Integer(i) => Value::from(i),
        toml::Value::Float(f) => Value::from(f),
        toml::Value::Boolean(b) => Value::Bool(b),
        toml::Value::Datetime(d) => Value::String(d.to_string()),
        toml::Value::Array(a) => Value::Array(a.into_iter().map(toml_to_json).collect()),
        toml::Value::Table(t) => Value::Object(t.into_iter().map(|(k, v)| (k, toml_to_json(v))).collect()),
    }
}

/// Loads a config file onto `base`.
///
/// `.json` files are read as a previous run's metadata: its resolved spec
/// and `assumed` flags replace `base` entirely. Anything else is parsed as a
/// flat TOML table and merged.
pub fn load(path: &Path, base: ResolvedSpec) -> Result<ResolvedSpec> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        return from_metadata(&text);
    }
    let table: toml::Table =
        text.parse().map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    let json = match toml_to_json(toml::Value::Table(table)) {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    let mut resolved = base;
    resolved.merge(json)?;
    Ok(resolved)
}

/// Rebuilds a [`ResolvedSpec`] from a `metadata.json` document.
pub fn from_metadata(text: &str) -> Result<ResolvedSpec> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("metadata: {e}")))?;
    let spec = doc
        .get("spec")
        .cloned()
        .ok_or_else(|| Error::InvalidConfig("metadata has no 'spec' object".into()))?;
    let spec: ExperimentSpec =
        serde_json::from_value(spec).map_err(|e| Error::InvalidConfig(format!("metadata spec: {e}")))?;
    let assumed = doc
        .get("parameters")
        .and_then(Value::as_object)
        .map(|params| {
            params
                .iter()
                .filter(|(_, v)| v.get("assumed").and_then(Value::as_bool).unwrap_or(false))
                .map(|(k, _)| k.clone())
                .collect()
        })
        .unwrap_or_default();
    Ok(ResolvedSpec { spec, assumed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{Scheme, SweepAxis};

    #[test]
    fn overrides_parse_types() {
        let mut r = ResolvedSpec::defaults();
        r.apply_overrides(&["snr_db=10", "n=32", "schemes=unknown-csi,no-an", "sweep_axis=l_b", "sweep_values=1,2,3"])
            .unwrap();
        assert_eq!(r.spec.snr_db, 10.0);
        assert_eq!(r.spec.n, 32);
        assert_eq!(r.spec.schemes, vec![Scheme::UnknownCsi, Scheme::NoAn]);
        assert_eq!(r.spec.sweep_axis, Some(SweepAxis::LB));
        assert_eq!(r.spec.sweep_values, vec![1.0, 2.0, 3.0]);
        assert!(!r.assumed.contains("n"));
        assert!(!r.assumed.contains("snr_db"));
        assert!(r.assumed.contains("l_e"));
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        let mut r = ResolvedSpec::defaults();
        assert!(r.apply_overrides(&["bogus=1"]).is_err());
        assert!(r.apply_overrides(&["n=-3"]).is_err());
        assert!(r.apply_overrides(&["novalue"]).is_err());
        assert_eq!(r.spec, ExperimentSpec::default());
    }

    #[test]
    fn toml_file_merges() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "n = 128\nalpha = 0.25\nschemes = [\"known-csi-two-stage\"]\n").unwrap();
        let r = load(&path, ResolvedSpec::defaults()).unwrap();
        assert_eq!(r.spec.n, 128);
        assert_eq!(r.spec.alpha, 0.25);
        assert_eq!(r.spec.schemes, vec![Scheme::KnownCsiTwoStage]);
        assert!(r.assumed.contains("n_cp") && !r.assumed.contains("alpha"));
    }

    #[test]
    fn metadata_round_trip() {
        let mut r = ResolvedSpec::defaults();
        r.apply_overrides(&["seed=99"]).unwrap();
        let doc = serde_json::json!({ "spec": r.spec, "parameters": r.parameters() });
        assert_eq!(from_metadata(&doc.to_string()).unwrap(), r);
    }
}
