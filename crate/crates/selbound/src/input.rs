//! Distribution files and flat `key=value` configuration files.
//!
//! A distribution file is either plain text with one weight per line (`#`
//! starts a comment) or JSON: a bare array of numbers, or an object whose
//! `"distribution"` field is such an array. Weights need not be normalized.

use std::collections::BTreeMap;
use std::path::Path;

use selbound_core::oracle::{Sampler, SweepConfig};
use selbound_core::scenarios::{Popularity, ScenarioConfig, ScenarioKind};
use selbound_core::BoundOptions;

use crate::error::CliError;

/// Parses distribution weights from file contents. `flag` names the source
/// in errors.
pub fn parse_weights(text: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        return parse_json_weights(trimmed, flag);
    }
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let v: f64 = body.parse().map_err(|_| {
            CliError::invalid(
                flag,
                format!("line {}: `{body}` is not a number", lineno + 1),
            )
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::invalid(flag, "no weights found"));
    }
    Ok(out)
}

fn parse_json_weights(text: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::invalid(flag, format!("invalid JSON: {e}")))?;
    let array = match &value {
        serde_json::Value::Array(a) => a,
        serde_json::Value::Object(o) => match o.get("distribution") {
            Some(serde_json::Value::Array(a)) => a,
            _ => {
                return Err(CliError::invalid(
                    flag,
                    "JSON object needs a \"distribution\" array",
                ))
            }
        },
        _ => return Err(CliError::invalid(flag, "expected a JSON array of numbers")),
    };
    array
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64()
                .ok_or_else(|| CliError::invalid(flag, format!("entry {i} is not a number")))
        })
        .collect()
}

pub fn read_text(path: &Path, flag: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(flag, path, e))
}

pub fn read_weights(path: &Path, flag: &str) -> Result<Vec<f64>, CliError> {
    parse_weights(&read_text(path, flag)?, flag)
}

/// `key=value` pairs with their line numbers. Duplicate keys are rejected.
#[derive(Debug, Default)]
pub struct KeyValues {
    flag: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str, flag: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(CliError::invalid(
                    flag,
                    format!("line {}: expected key=value", i + 1),
                ));
            };
            let key = k.trim().to_string();
            if entries
                .insert(key.clone(), (i + 1, v.trim().to_string()))
                .is_some()
            {
                return Err(CliError::invalid(flag, format!("duplicate key `{key}`")));
            }
        }
        Ok(KeyValues {
            flag: flag.to_string(),
            entries,
        })
    }

    /// Errors on any key not in `known`.
    pub fn only(&self, known: &[&str]) -> Result<(), CliError> {
        match self.entries.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(CliError::invalid(
                &self.flag,
                format!("unknown key `{k}`; expected one of {}", known.join(", ")),
            )),
            None => Ok(()),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| {
                CliError::invalid(
                    &self.flag,
                    format!("line {line}: `{key}={v}` has the wrong type"),
                )
            }),
        }
    }

    pub fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.get(key)?
            .ok_or_else(|| CliError::invalid(&self.flag, format!("missing required key `{key}`")))
    }
}

const SCENARIO_KEYS: &[&str] = &[
    "kind",
    "n",
    "m",
    "k",
    "zipf_s",
    "weights_file",
    "trials",
    "seed",
    "threshold_note",
];

/// Builds a scenario from a config file. Relative `weights_file` paths are
/// resolved against `base_dir`. `default_seed` applies when `seed` is absent.
pub fn scenario_config(
    text: &str,
    base_dir: &Path,
    default_seed: u64,
) -> Result<ScenarioConfig, CliError> {
    let flag = "--config";
    let kv = KeyValues::parse(text, flag)?;
    kv.only(SCENARIO_KEYS)?;
    let kind_str: String = kv.require("kind")?;
    let kind = ScenarioKind::parse(&kind_str).ok_or_else(|| {
        CliError::invalid(
            flag,
            format!(
                "kind `{kind_str}`: expected cache_single, cache_multipage, cache_multiuser or scheduling"
            ),
        )
    })?;
    let n: usize = kv.require("n")?;
    let m: usize = kv.require("m")?;
    let k: usize = match kv.get("k")? {
        Some(k) => k,
        None if kind == ScenarioKind::Scheduling => m,
        None => 1,
    };
    let popularity = match (kv.get::<f64>("zipf_s")?, kv.raw("weights_file")) {
        (Some(s), None) => Popularity::Zipf(s),
        (None, Some(file)) => {
            let path = base_dir.join(file);
            Popularity::Weights(read_weights(&path, flag)?)
        }
        _ => {
            return Err(CliError::invalid(
                flag,
                "exactly one of `zipf_s` or `weights_file` is required",
            ))
        }
    };
    Ok(ScenarioConfig {
        kind,
        n,
        m,
        k,
        popularity,
        trials: kv.get("trials")?.unwrap_or(100_000),
        seed: kv.get("seed")?.unwrap_or(default_seed),
        threshold_note: kv.raw("threshold_note").map(str::to_string),
    })
}

const SWEEP_KEYS: &[&str] = &[
    "shapes",
    "scenarios_per_shape",
    "seed",
    "samplers",
    "eps",
    "grid",
];

/// Builds a sweep from a config file, e.g.
///
/// ```text
/// shapes = 20x6, 30x20
/// scenarios_per_shape = 100
/// samplers = dirichlet:1.0, spiky:0.2
/// ```
pub fn sweep_config(text: &str, default_seed: u64, eps: f64) -> Result<SweepConfig, CliError> {
    let flag = "--config";
    let kv = KeyValues::parse(text, flag)?;
    kv.only(SWEEP_KEYS)?;
    let shapes_str: String = kv.require("shapes")?;
    let shapes = shapes_str
        .split(',')
        .map(|s| {
            parse_shape(s.trim()).ok_or_else(|| {
                CliError::invalid(flag, format!("shape `{}`: expected NxM", s.trim()))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut cfg = SweepConfig::new(shapes, kv.get("seed")?.unwrap_or(default_seed));
    if let Some(s) = kv.get("scenarios_per_shape")? {
        cfg.scenarios_per_shape = s;
    }
    if let Some(samplers) = kv.raw("samplers") {
        cfg.samplers = samplers
            .split(',')
            .map(|s| {
                parse_sampler(s.trim()).ok_or_else(|| {
                    CliError::invalid(
                        flag,
                        format!(
                            "sampler `{}`: expected dirichlet:ALPHA or spiky:ALPHA",
                            s.trim()
                        ),
                    )
                })
            })
            .collect::<Result<_, _>>()?;
    }
    cfg.eps = kv.get("eps")?.unwrap_or(eps);
    if let Some(grid) = kv.get("grid")? {
        cfg.bounds = BoundOptions { grid, ..cfg.bounds };
    }
    Ok(cfg)
}

fn parse_shape(s: &str) -> Option<(usize, usize)> {
    let (n, m) = s.split_once(['x', 'X'])?;
    Some((n.trim().parse().ok()?, m.trim().parse().ok()?))
}

fn parse_sampler(s: &str) -> Option<Sampler> {
    let (name, alpha) = s.split_once(':')?;
    let alpha: f64 = alpha.trim().parse().ok()?;
    match name.trim() {
        "dirichlet" => Some(Sampler::Dirichlet(alpha)),
        "spiky" => Some(Sampler::Spiky(alpha)),
        _ => None,
    }
}
