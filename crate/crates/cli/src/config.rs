//! Experiment config files: `key = value` lines or a JSON object.
//!
//! Lists are comma-separated in the line format (`values = 1, 3.5, 6`).

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    pub fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchFile {
    /// `exp1`..`exp4` or the swept parameter (`m`, `d_max`, `sigma_db`, `eps`).
    #[serde(alias = "swept")]
    pub experiment: Option<String>,
    pub name: Option<String>,
    pub values: Option<OneOrMany<f64>>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub gamma_p: Option<f64>,
    pub sigma_db: Option<f64>,
    #[serde(alias = "epsilon")]
    pub eps: Option<f64>,
    #[serde(alias = "dmax")]
    pub d_max: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    #[serde(alias = "method")]
    pub methods: Option<OneOrMany<String>>,
    pub jobs: Option<usize>,
}

fn scalar(raw: &str) -> Value {
    let raw = raw.trim();
    serde_json::from_str::<Value>(raw)
        .ok()
        .filter(|v| v.is_number() || v.is_boolean())
        .unwrap_or_else(|| Value::String(raw.trim_matches('"').to_string()))
}

fn parse_lines(text: &str) -> Result<Value> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, raw) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let value = if raw.contains(',') {
            Value::Array(raw.split(',').filter(|s| !s.trim().is_empty()).map(scalar).collect())
        } else {
            scalar(raw)
        };
        if map.insert(key.clone(), value).is_some() {
            bail!("line {}: duplicate key '{key}'", lineno + 1);
        }
    }
    Ok(Value::Object(map.into_iter().collect()))
}

pub fn parse(text: &str) -> Result<BenchFile> {
    let value = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).context("config is not valid JSON")?
    } else {
        parse_lines(text)?
    };
    serde_json::from_value(value).context("bad config")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let f = parse("# sigma sweep\nexperiment = exp3\nvalues = 1, 3.5, 6\ntrials=4\nmethods = plain\n").unwrap();
        assert_eq!(f.experiment.as_deref(), Some("exp3"));
        assert_eq!(f.values.unwrap().into_vec(), vec![1.0, 3.5, 6.0]);
        assert_eq!(f.trials, Some(4));
        assert_eq!(f.methods.unwrap().into_vec(), vec!["plain".to_string()]);
    }

    #[test]
    fn json_format_and_aliases() {
        let f = parse(r#"{"swept": "d_max", "values": [0.3, 0.4], "dmax": 0.5, "seed": 9}"#).unwrap();
        assert_eq!(f.experiment.as_deref(), Some("d_max"));
        assert_eq!(f.d_max, Some(0.5));
        assert_eq!(f.seed, Some(9));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("trials = many").is_err());
        assert!(parse("colour = red").is_err());
        assert!(parse("no equals sign").is_err());
        assert!(parse("n = 3\nn = 4").is_err());
    }
}
