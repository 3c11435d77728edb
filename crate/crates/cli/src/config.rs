//! Config files merged under the command-line flags.
//!
//! A config file holds either `key = value` lines (`#` starts a comment) or one JSON
//! object. Keys are flag names with or without the leading `--`; underscores and
//! dashes are interchangeable. Boolean `true` turns a switch on, `false` leaves it
//! off. The resulting flags are inserted right after the subcommand, ahead of the
//! explicit flags, and clap keeps the last occurrence, so explicit flags win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn flag(key: &str) -> String {
    format!("--{}", key.trim().trim_start_matches("--").replace('_', "-"))
}

fn push_value(out: &mut Vec<OsString>, key: &str, value: &Value) -> Result<()> {
    match value {
        Value::Bool(true) => out.push(flag(key).into()),
        Value::Bool(false) | Value::Null => {}
        Value::Number(n) => out.extend([flag(key).into(), n.to_string().into()]),
        Value::String(s) => out.extend([flag(key).into(), s.into()]),
        Value::Array(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|v| match v {
                    Value::Number(n) => Ok(n.to_string()),
                    Value::String(s) => Ok(s.clone()),
                    other => bail!("unsupported list item {other} for {key}"),
                })
                .collect::<Result<_>>()?;
            out.extend([flag(key).into(), parts.join(",").into()]);
        }
        Value::Object(_) => bail!("nested objects are not supported ({key})"),
    }
    Ok(())
}

/// Flags encoded by the config file at `path`.
pub fn config_flags(path: &Path) -> Result<Vec<OsString>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing JSON config {}", path.display()))?;
        for (k, v) in v.as_object().expect("checked to be an object") {
            push_value(&mut out, k, v)?;
        }
        return Ok(out);
    }
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected key = value", path.display(), n + 1);
        };
        let v = v.trim();
        let value = match v {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => Value::String(v.trim_matches('"').to_string()),
        };
        push_value(&mut out, k, &value)?;
    }
    Ok(out)
}

/// Inserts the flags of a `--config` file after the subcommand name.
pub fn merge_config_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    if args.len() < 2 {
        return Ok(args);
    }
    let mut out = args[..2].to_vec();
    out.extend(config_flags(Path::new(&path))?);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}
