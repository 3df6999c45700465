//! Key-value configuration files and engine resolution.
//!
//! The format is one `key = value` pair per line; `#` starts a comment.
//! Recognized keys are documented in the README (`instances`, `methods`,
//! `deltas`, `t_values`, `k_values`, `time_limit`, `workers`, `seed`,
//! `delta_sweep`, `out_csv`, `out_md`, `engine`, `engine_args`,
//! `keep_files`).

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use ddid::milp::{Engine, ExternalEngine, HighsEngine};

/// Parsed key-value pairs, last occurrence wins.
pub type ConfigMap = BTreeMap<String, String>;

/// Parse the key-value format.
pub fn parse_config(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`, got {raw:?}", lineno + 1);
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Engine selection: the `DDID_ENGINE` environment variable wins, then the
/// config file's `engine` key, then the in-process engine.
pub fn resolve_engine(config: &ConfigMap) -> Box<dyn Engine> {
    let from_env = std::env::var("DDID_ENGINE").ok().filter(|s| !s.trim().is_empty());
    let binary = from_env.or_else(|| config.get("engine").cloned());
    match binary {
        Some(path) => {
            let mut engine = ExternalEngine::new(path);
            if let Some(args) = config.get("engine_args") {
                engine =
                    engine.with_args(args.split_whitespace().map(str::to_string).collect());
            }
            if config.get("keep_files").map(|v| v == "true") == Some(true) {
                engine = engine.keep_files(true);
            }
            Box::new(engine)
        }
        None => Box::new(HighsEngine::new()),
    }
}

/// Comma-separated list helper.
pub fn parse_list(value: &str) -> Vec<String> {
    value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

/// Comma-separated numeric list helper.
pub fn parse_f64_list(value: &str) -> Result<Vec<f64>> {
    parse_list(value)
        .iter()
        .map(|s| s.parse::<f64>().with_context(|| format!("bad number {s:?}")))
        .collect()
}
