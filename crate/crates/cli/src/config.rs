//! `--config PATH`: a flat JSON object whose keys mirror long flag names.
//!
//! Keys become `--key=value` arguments placed ahead of the user's own flags.
//! Every command overrides repeated flags, so explicit flags win. Keys that
//! belong to a different subcommand are ignored so one file can serve several
//! commands; keys no subcommand knows are rejected.

use std::fs;

use clap::Command;
use serde_json::Value;

fn config_path(argv: &[String]) -> Result<Option<&str>, String> {
    let mut path = None;
    let mut i = 1;
    while i < argv.len() {
        let t = argv[i].as_str();
        if t == "--" {
            break;
        }
        if t == "--config" {
            path = Some(argv.get(i + 1).ok_or("--config needs a path")?.as_str());
            i += 1;
        } else if let Some(p) = t.strip_prefix("--config=") {
            path = Some(p);
        }
        i += 1;
    }
    Ok(path)
}

/// The deepest subcommand named on the line and the index just past it.
fn leaf<'a>(root: &'a Command, argv: &[String]) -> (&'a Command, usize) {
    let (mut cur, mut at, mut i) = (root, 1, 1);
    while i < argv.len() {
        let t = argv[i].as_str();
        if t == "--config" {
            i += 2;
            continue;
        }
        if t.starts_with('-') {
            i += 1;
            continue;
        }
        match cur.find_subcommand(t) {
            Some(sub) => {
                cur = sub;
                i += 1;
                at = i;
            }
            None => break,
        }
    }
    (cur, at)
}

fn known_anywhere(cmd: &Command, long: &str) -> bool {
    cmd.get_arguments().any(|a| a.get_long() == Some(long))
        || cmd.get_subcommands().any(|s| known_anywhere(s, long))
}

fn text(key: &str, v: &Value) -> Result<String, String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        Value::Bool(b) => Ok(b.to_string()),
        // lists are comma separated; pairs inside a list are colon separated
        Value::Array(items) => items
            .iter()
            .map(|x| match x {
                Value::Array(pair) => pair
                    .iter()
                    .map(|p| text(key, p))
                    .collect::<Result<Vec<_>, _>>()
                    .map(|p| p.join(":")),
                other => text(key, other),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|parts| parts.join(",")),
        Value::Null | Value::Object(_) => Err(format!(
            "config key {key:?} must be a number, string, boolean or list"
        )),
    }
}

/// Returns `argv` with the config file's flags spliced in, or unchanged when no
/// config is given.
pub fn expand(root: &Command, argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let raw = fs::read_to_string(path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let Value::Object(map) =
        serde_json::from_str(&raw).map_err(|e| format!("config {path}: {e}"))?
    else {
        return Err(format!("config {path}: expected a JSON object"));
    };
    let (cmd, at) = leaf(root, &argv);
    let mut global = Vec::new();
    let mut local = Vec::new();
    for (key, value) in &map {
        let long = key.replace('_', "-");
        if long == "config" {
            return Err("a config file cannot name another config".into());
        }
        let (arg, dest) = match cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(long.as_str()))
        {
            Some(a) => (a, &mut local),
            None => match root
                .get_arguments()
                .find(|a| a.get_long() == Some(long.as_str()))
            {
                Some(a) => (a, &mut global),
                None if known_anywhere(root, &long) => continue,
                None => return Err(format!("config {path}: unknown key {key:?}")),
            },
        };
        if arg.get_action().takes_values() {
            dest.push(format!("--{long}={}", text(key, value)?));
        } else {
            match value {
                Value::Bool(true) => dest.push(format!("--{long}")),
                Value::Bool(false) => {}
                _ => {
                    return Err(format!(
                        "config key {key:?} is a switch and takes true or false"
                    ))
                }
            }
        }
    }
    let mut out = Vec::with_capacity(argv.len() + global.len() + local.len());
    out.push(argv[0].clone());
    out.extend(global);
    out.extend(argv[1..at].iter().cloned());
    out.extend(local);
    out.extend(argv[at..].iter().cloned());
    Ok(out)
}
