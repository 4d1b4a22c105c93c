//! `key=value` config files, merged into the argument list ahead of the
//! user's own flags so that flags win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::CommandFactory;

use crate::args::Cli;
use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub path: PathBuf,
    pub entries: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got {line:?}", i + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        entries.insert(key, value.trim().to_string());
    }
    Ok(entries)
}

/// Locate `--config` after the subcommand.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(2);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse_config(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(ConfigFile { path: path.to_path_buf(), entries })
}

/// Insert the config file's flags directly after the subcommand name.
pub fn expand(args: Vec<OsString>) -> Result<(Vec<OsString>, Option<ConfigFile>), CliError> {
    let Some(path) = config_path(&args) else {
        return Ok((args, None));
    };
    let config = read_config(&path)?;
    let sub_name = args[1].to_string_lossy().into_owned();
    let root = Cli::command();
    let sub = root
        .find_subcommand(&sub_name)
        .ok_or_else(|| CliError::usage(format!("unknown subcommand {sub_name:?}")))?;
    let mut injected = Vec::new();
    for (key, value) in &config.entries {
        if key == "config" {
            return Err(CliError::usage("config files cannot include other config files"));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| CliError::usage(format!("unknown config key {key:?} for {sub_name}")))?;
        if arg.get_action().takes_values() {
            injected.push(OsString::from(format!("--{key}={value}")));
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => injected.push(OsString::from(format!("--{key}"))),
                "false" | "no" | "0" => {}
                other => {
                    return Err(CliError::usage(format!("config key {key} expects true/false, got {other:?}")))
                }
            }
        }
    }
    let mut out = args[..2].to_vec();
    out.extend(injected);
    out.extend(args[2..].iter().cloned());
    Ok((out, Some(config)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blanks() {
        let e = parse_config("# header\np = 0.25  # trailing\n\nmin_history=24\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e["p"], "0.25");
        assert_eq!(e["min-history"], "24");
        assert!(parse_config("oops").is_err());
    }
}
