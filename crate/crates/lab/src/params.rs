//! Experiment configuration: per-experiment defaults overlaid with a TOML
//! file (or a previous run's manifest), flattened to dotted keys.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{LabError, Result};

/// Where a default value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Paper,
    Choice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDef {
    pub key: &'static str,
    pub value: Value,
    pub origin: Origin,
}

pub fn paper(key: &'static str, value: impl Into<Value>) -> ParamDef {
    ParamDef {
        key,
        value: value.into(),
        origin: Origin::Paper,
    }
}

pub fn choice(key: &'static str, value: impl Into<Value>) -> ParamDef {
    ParamDef {
        key,
        value: value.into(),
        origin: Origin::Choice,
    }
}

/// Contents of a `--config` file before resolution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub values: BTreeMap<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::config("--config", format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_manifest(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| LabError::config("--config", e.to_string()))?;
        let mut values = BTreeMap::new();
        flatten_toml("", &table, &mut values)?;
        Self::split_reserved(values)
    }

    /// Reads the `params` object of a manifest written by a previous run.
    pub fn from_manifest(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| LabError::config("--config", e.to_string()))?;
        let params = v
            .get("params")
            .and_then(Value::as_object)
            .ok_or_else(|| LabError::config("params", "manifest has no params object"))?;
        let mut values: BTreeMap<String, Value> = params.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        if let Some(name) = v.get("experiment") {
            values.insert("experiment".into(), name.clone());
        }
        if let Some(seed) = v.get("seed") {
            values.insert("seed".into(), seed.clone());
        }
        Self::split_reserved(values)
    }

    fn split_reserved(mut values: BTreeMap<String, Value>) -> Result<Self> {
        let experiment = match values.remove("experiment") {
            Some(Value::String(s)) => Some(s),
            Some(_) => return Err(LabError::config("experiment", "must be a string")),
            None => None,
        };
        let seed = match values.remove("seed") {
            Some(v) => Some(v.as_u64().ok_or_else(|| LabError::config("seed", "must be a non-negative integer"))?),
            None => None,
        };
        Ok(ConfigFile {
            experiment,
            seed,
            values,
        })
    }
}

fn flatten_toml(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) -> Result<()> {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten_toml(&key, t, out)?,
            other => {
                let value = toml_to_json(&key, other)?;
                out.insert(key, value);
            }
        }
    }
    Ok(())
}

fn toml_to_json(key: &str, v: &toml::Value) -> Result<Value> {
    Ok(match v {
        toml::Value::String(s) => Value::String(s.clone()),
        toml::Value::Integer(i) => json!(i),
        toml::Value::Float(f) => json!(f),
        toml::Value::Boolean(b) => Value::Bool(*b),
        toml::Value::Array(items) => Value::Array(items.iter().map(|i| toml_to_json(key, i)).collect::<Result<_>>()?),
        toml::Value::Datetime(_) | toml::Value::Table(_) => {
            return Err(LabError::config(key, "unsupported value type"));
        }
    })
}

fn same_kind(default: &Value, given: &Value) -> bool {
    match (default, given) {
        (Value::Number(d), Value::Number(g)) => !(d.is_u64() || d.is_i64()) || g.is_u64() || g.is_i64(),
        (Value::String(_), Value::String(_)) | (Value::Bool(_), Value::Bool(_)) => true,
        (Value::Array(_), Value::Array(items)) => items.iter().all(Value::is_number),
        _ => false,
    }
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    experiment: String,
    seed: u64,
    values: BTreeMap<String, Value>,
    choices: BTreeSet<String>,
    overridden: BTreeSet<String>,
}

impl Params {
    /// Overlays `file` (then `cli_seed`) on `defs`. Unknown keys and type
    /// mismatches are rejected by name.
    pub fn resolve(experiment: &str, defs: &[ParamDef], file: &ConfigFile, cli_seed: Option<u64>) -> Result<Self> {
        if let Some(name) = &file.experiment {
            if name != experiment {
                return Err(LabError::config(
                    "experiment",
                    format!("config is for `{name}`, not `{experiment}`"),
                ));
            }
        }
        let seed = cli_seed
            .or(file.seed)
            .ok_or_else(|| LabError::config("seed", "a seed is required (--seed or `seed` in the config)"))?;
        let mut values: BTreeMap<String, Value> = defs.iter().map(|d| (d.key.to_string(), d.value.clone())).collect();
        let mut overridden = BTreeSet::new();
        for (k, v) in &file.values {
            let default = values
                .get(k)
                .ok_or_else(|| LabError::config(k.clone(), format!("unknown key for `{experiment}`")))?;
            if !same_kind(default, v) {
                return Err(LabError::config(k.clone(), format!("expected a value like {default}, got {v}")));
            }
            values.insert(k.clone(), v.clone());
            overridden.insert(k.clone());
        }
        let choices = defs
            .iter()
            .filter(|d| d.origin == Origin::Choice && !overridden.contains(d.key))
            .map(|d| d.key.to_string())
            .collect();
        Ok(Params {
            experiment: experiment.to_string(),
            seed,
            values,
            choices,
            overridden,
        })
    }

    pub fn experiment(&self) -> &str {
        &self.experiment
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn values(&self) -> &BTreeMap<String, Value> {
        &self.values
    }

    /// Resolved configuration as written to `manifest.json`.
    pub fn manifest(&self) -> Value {
        let params: Map<String, Value> = self.values.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        json!({
            "experiment": self.experiment,
            "seed": self.seed,
            "params": params,
            "non_paper_defaults": self.choices.iter().collect::<Vec<_>>(),
            "overridden": self.overridden.iter().collect::<Vec<_>>(),
        })
    }

    fn get(&self, key: &str) -> Result<&Value> {
        self.values
            .get(key)
            .ok_or_else(|| LabError::config(key, format!("not defined for `{}`", self.experiment)))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.get(key)?
            .as_f64()
            .ok_or_else(|| LabError::config(key, "expected a number"))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.get(key)?
            .as_u64()
            .ok_or_else(|| LabError::config(key, "expected a non-negative integer"))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.u64(key)? as usize)
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        self.get(key)?
            .as_bool()
            .ok_or_else(|| LabError::config(key, "expected true or false"))
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.get(key)?
            .as_str()
            .ok_or_else(|| LabError::config(key, "expected a string"))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let arr = self
            .get(key)?
            .as_array()
            .ok_or_else(|| LabError::config(key, "expected a list of numbers"))?;
        arr.iter()
            .map(|v| v.as_f64().ok_or_else(|| LabError::config(key, "expected a list of numbers")))
            .collect()
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        let arr = self
            .get(key)?
            .as_array()
            .ok_or_else(|| LabError::config(key, "expected a list of integers"))?;
        arr.iter()
            .map(|v| {
                v.as_u64()
                    .map(|u| u as usize)
                    .ok_or_else(|| LabError::config(key, "expected a list of non-negative integers"))
            })
            .collect()
    }

    /// A positive number.
    pub fn positive(&self, key: &str) -> Result<f64> {
        let v = self.f64(key)?;
        if !(v > 0.0) {
            return Err(LabError::config(key, format!("must be > 0, got {v}")));
        }
        Ok(v)
    }
}
