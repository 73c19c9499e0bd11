//! Key-value configuration files. Each non-blank line not starting with `#`
//! is `key = value` or `key value`; keys are flag names with or without the
//! leading `--`, and `_` is accepted for `-`.

use std::ffi::OsString;
use std::path::Path;

use crate::error::CliError;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => match line.split_once(char::is_whitespace) {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (line, ""),
            },
        };
        let key = key.trim_start_matches("--").replace('_', "-");
        let valid = !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-');
        if !valid || value.is_empty() {
            return Err(CliError::Input(format!("config line {}: cannot parse '{raw}'", lineno + 1)));
        }
        out.push((key, value.to_string()));
    }
    if out.is_empty() {
        return Err(CliError::Input("config file has no entries".into()));
    }
    Ok(out)
}

fn flag_present(args: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_eq = format!("{flag}=");
    args.iter()
        .filter_map(|a| a.to_str())
        .any(|a| a == flag || a.starts_with(&with_eq))
}

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

/// Insert file entries after the subcommand name for every key the command
/// line does not already set.
pub fn merge(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let entries = parse(&text)?;
    if args.len() < 2 {
        return Ok(args);
    }
    let mut extra = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err(CliError::Input("config files cannot include other config files".into()));
        }
        if !flag_present(&args, &key) {
            extra.push(OsString::from(format!("--{key}")));
            extra.push(OsString::from(value));
        }
    }
    let mut merged = args[..2].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&args[2..]);
    Ok(merged)
}
