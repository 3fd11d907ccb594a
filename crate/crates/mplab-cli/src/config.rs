//! Merging a JSON config file under the command-line flags.

use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Reads `path` and picks the section for `command` if there is one, else the whole object.
pub fn load_section(path: &Path, command: &str) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read config", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("{}: malformed JSON", path.display()))?;
    let Value::Object(mut obj) = v else {
        anyhow::bail!("{}: config must be a JSON object", path.display());
    };
    Ok(match obj.remove(command) {
        Some(Value::Object(section)) => section,
        _ => obj,
    })
}

/// Fields set on the command line win; missing ones are taken from the config.
pub fn merge<T: Serialize + DeserializeOwned>(cli: &T, config: Option<&Map<String, Value>>, source: &str) -> Result<T> {
    let Some(config) = config else {
        return Ok(serde_json::from_value(serde_json::to_value(cli)?)?);
    };
    let Value::Object(flags) = serde_json::to_value(cli)? else {
        anyhow::bail!("arguments did not serialize to an object");
    };
    let mut out = config.clone();
    for (k, v) in flags {
        if !v.is_null() {
            out.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(out)).with_context(|| format!("{source}: invalid field"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct A {
        s: Option<f64>,
        eps: Option<f64>,
    }

    #[test]
    fn flags_override_file() {
        let mut cfg = Map::new();
        cfg.insert("s".into(), 2.0.into());
        cfg.insert("eps".into(), 1.0.into());
        let a = merge(&A { s: None, eps: Some(3.0) }, Some(&cfg), "c.json").unwrap();
        assert_eq!(a, A { s: Some(2.0), eps: Some(3.0) });
    }
}
