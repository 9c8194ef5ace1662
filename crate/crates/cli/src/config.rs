//! Flat `key = value` config files merged under command-line flags.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::Cli;

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", no + 1));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key {key:?}", no + 1));
        }
    }
    Ok(out)
}

/// Finds `--config PATH` (or `--config=PATH`) and removes it from `args`.
fn take_config_path(args: &mut Vec<OsString>) -> Result<Option<String>, String> {
    let mut i = 0;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--config" {
            if i + 1 >= args.len() {
                return Err("--config needs a path".into());
            }
            let p = args.remove(i + 1).to_string_lossy().into_owned();
            args.remove(i);
            return Ok(Some(p));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            let p = p.to_string();
            args.remove(i);
            return Ok(Some(p));
        }
        i += 1;
    }
    Ok(None)
}

/// Inserts the config file's settings as flags right after the subcommand
/// name, so that flags given on the command line (which come later) win.
pub fn merge_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = take_config_path(&mut args)? else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let entries = parse_config(&text)?;
    let cmd = Cli::command();
    let pos = args
        .iter()
        .position(|a| cmd.find_subcommand(a.to_string_lossy().as_ref()).is_some())
        .ok_or_else(|| "a config file needs a subcommand on the command line".to_string())?;
    let sub = cmd.find_subcommand(args[pos].to_string_lossy().as_ref()).expect("found above");
    let mut extra: Vec<OsString> = vec![];
    for (key, value) in entries {
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| format!("unknown config key {key:?} for {}", sub.get_name()))?;
        let takes_value = arg.get_action().takes_values();
        if takes_value {
            extra.push(format!("--{key}").into());
            extra.push(value.into());
        } else {
            match value.as_str() {
                "true" => extra.push(format!("--{key}").into()),
                "false" => {}
                other => return Err(format!("config key {key:?} is a switch; expected true or false, got {other:?}")),
            }
        }
    }
    args.splice(pos + 1..pos + 1, extra);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let c = parse_config("# run\nsamples = 1e5  # many\n\nseed=7\n").unwrap();
        assert_eq!(c.get("samples").map(String::as_str), Some("1e5"));
        assert_eq!(c.get("seed").map(String::as_str), Some("7"));
        assert!(parse_config("oops").is_err());
        assert!(parse_config("a = 1\na = 2").is_err());
    }
}
