use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use clap::Command;

/// A usage or configuration mistake; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str, source: &str) -> Result<Vec<(String, String)>, UsageError> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(UsageError(format!("{source}:{}: expected `key = value`", i + 1)));
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(UsageError(format!("{source}:{}: empty key", i + 1)));
        }
        if entries.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(UsageError(format!("{source}:{}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(entries.into_iter().collect())
}

fn long_names(cmd: &Command) -> HashSet<String> {
    cmd.get_arguments()
        .filter_map(|a| a.get_long())
        .map(str::to_string)
        .collect()
}

/// Index of the subcommand token in `args`, skipping global options.
fn subcommand_position(cmd: &Command, args: &[String]) -> Option<usize> {
    let names: HashSet<&str> = cmd.get_subcommands().map(Command::get_name).collect();
    let mut i = 1;
    while i < args.len() {
        let a = args[i].as_str();
        if names.contains(a) {
            return Some(i);
        }
        // global options all take a value
        if a.starts_with("--") && !a.contains('=') {
            i += 1;
        }
        i += 1;
    }
    None
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Appends `--key value` for every config entry the chosen subcommand
/// accepts and the command line does not already set. Keys that no
/// subcommand knows are rejected.
pub fn merge_config(cmd: &Command, args: Vec<String>) -> anyhow::Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| UsageError(format!("cannot read config file {path}: {e}")))?;
    let entries = parse_config(&text, &path)?;

    let global = long_names(cmd);
    let mut known = global.clone();
    for sub in cmd.get_subcommands() {
        known.extend(long_names(sub));
    }
    known.remove("config");
    known.remove("help");

    let accepted = match subcommand_position(cmd, &args) {
        Some(i) => {
            let sub = cmd
                .find_subcommand(&args[i])
                .expect("position points at a subcommand");
            let mut names = long_names(sub);
            names.extend(global);
            names
        }
        None => global,
    };
    let present: HashSet<&str> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a))
        .collect();

    let mut extra = Vec::new();
    for (key, value) in entries {
        let flag = key.replace('_', "-");
        if !known.contains(&flag) {
            return Err(UsageError(format!("{path}: unknown config key `{key}`")).into());
        }
        if accepted.contains(&flag) && !present.contains(flag.as_str()) {
            extra.push(format!("--{flag}"));
            extra.push(value);
        }
    }
    let mut merged = args;
    merged.extend(extra);
    Ok(merged)
}
