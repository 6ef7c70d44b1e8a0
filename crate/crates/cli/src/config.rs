//! `--config FILE` support.
//!
//! The file is a JSON object keyed by long flag names (`_` and `-` both
//! accepted). Its entries are spliced into argv right after the subcommand
//! path, ahead of the user's own flags; since every argument overrides
//! itself, whatever the user typed wins.

use clap::Command;
use serde_json::{Map, Value};

use crate::{io_error, CliError};

/// Global options that take a value and may precede the subcommand path.
const GLOBAL_VALUED: [&str; 2] = ["--config", "--out"];

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter().skip(1);
    let mut found = None;
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            found = it.next().cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            found = Some(p.to_string());
        }
    }
    found
}

/// Index just past the subcommand path, plus the subcommand itself.
fn locate<'a>(root: &'a Command, argv: &[String]) -> (usize, &'a Command) {
    let mut cmd = root;
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if GLOBAL_VALUED.contains(&a.as_str()) {
            i += 2;
            continue;
        }
        if a.starts_with('-') {
            i += 1;
            continue;
        }
        match cmd.find_subcommand(a) {
            Some(sub) => {
                cmd = sub;
                i += 1;
                if !cmd.has_subcommands() {
                    return (i, cmd);
                }
            }
            None => break,
        }
    }
    (i, cmd)
}

fn knows(cmd: &Command, flag: &str) -> bool {
    cmd.get_arguments().any(|a| a.get_long() == Some(flag))
}

fn known_anywhere(cmd: &Command, flag: &str) -> bool {
    knows(cmd, flag) || cmd.get_subcommands().any(|s| known_anywhere(s, flag))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flags_from(map: &Map<String, Value>, root: &Command, target: &Command) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for (key, value) in map {
        let flag = key.replace('_', "-");
        if matches!(flag.as_str(), "config" | "out") {
            if flag == "out" && !value.is_null() {
                out.push(format!("--out={}", scalar(value)));
            }
            continue;
        }
        if !knows(target, &flag) {
            if known_anywhere(root, &flag) {
                continue;
            }
            return Err(CliError::Usage(format!("config key `{key}` is not a flag of any subcommand")));
        }
        let arg = target
            .get_arguments()
            .find(|a| a.get_long() == Some(flag.as_str()))
            .expect("checked above");
        let takes_value = arg.get_action().takes_values();
        match value {
            Value::Null => {}
            Value::Bool(b) if !takes_value => {
                if *b {
                    out.push(format!("--{flag}"));
                }
            }
            Value::Array(items) => {
                for item in items {
                    out.push(format!("--{flag}={}", scalar(item)));
                }
            }
            Value::Object(_) => {
                return Err(CliError::Usage(format!("config key `{key}` must be a scalar or array")));
            }
            v => out.push(format!("--{flag}={}", scalar(v))),
        }
    }
    Ok(out)
}

pub fn merge(root: &Command, argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::Input(format!("{path}: config must be a JSON object")));
    };
    let (at, target) = locate(root, &argv);
    let extra = flags_from(&map, root, target)?;
    let mut merged = argv[..at].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[at..]);
    Ok(merged)
}
