//! `--config FILE`: `key=value` lines turned into flags of the chosen
//! subcommand. Flags given on the command line win.

use clap::{ArgAction, Command};

/// Path given with `--config`, if any.
fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn given(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let eq = format!("--{key}=");
    args.iter().any(|a| *a == flag || a.starts_with(&eq))
}

/// Splices config entries in right after the subcommand name.
pub fn expand(args: Vec<String>, cmd: &Command) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("config {path}: {e}"))?;
    let Some((pos, sub)) = args
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| cmd.find_subcommand(a).map(|s| (i, s)))
    else {
        return Ok(args);
    };
    let known = |key: &str| {
        sub.get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key))
    };
    let mut inject = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config {path}:{}: expected key=value", lineno + 1))?;
        let (k, v) = (k.trim().trim_start_matches("--"), v.trim());
        let arg = known(k)
            .filter(|_| k != "config")
            .ok_or_else(|| format!("config {path}:{}: unknown key '{k}'", lineno + 1))?;
        if given(&args, k) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match v {
                "true" | "1" | "yes" => inject.push(format!("--{k}")),
                "false" | "0" | "no" => {}
                _ => return Err(format!("config {path}:{}: '{k}' takes true or false", lineno + 1)),
            }
        } else {
            inject.push(format!("--{k}={v}"));
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(inject);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}
