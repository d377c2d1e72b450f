//! Flat `key = value` configuration files whose keys are long flag names.

use crate::error::{Error, Result};

/// Parses the file body. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidRequest(format!("config line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(Error::InvalidRequest(format!("config line {}: empty key", lineno + 1)));
        }
        pairs.push((key.replace('_', "-"), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Turns pairs into command-line arguments. Keys listed in `switches`
/// are boolean flags: `true` emits the bare flag and `false` nothing.
pub fn config_to_args(pairs: &[(String, String)], switches: &[&str]) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (key, value) in pairs {
        if switches.contains(&key.as_str()) {
            match value.as_str() {
                "true" | "yes" | "1" => args.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                _ => return Err(Error::InvalidRequest(format!("config key '{key}' expects true or false"))),
            }
        } else {
            args.push(format!("--{key}"));
            args.push(value.clone());
        }
    }
    Ok(args)
}
