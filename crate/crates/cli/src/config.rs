//! `--config` support: entries of a key-value file become command-line
//! flags placed before the user's own arguments, so explicit flags win.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Command};
use road_core::kvconfig::KvConfig;

/// Finds `--config <path>` (or `--config=<path>`) after the subcommand.
fn config_path(args: &[OsString]) -> Result<Option<(usize, usize, OsString)>> {
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let v = args.get(i + 1).context("--config needs a path")?;
            return Ok(Some((i, 2, v.clone())));
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Ok(Some((i, 1, v.into())));
        }
    }
    Ok(None)
}

fn flag_args(sub: &Command, kv: &KvConfig, path: &Path) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (key, value) in kv.entries() {
        let long = key.replace('_', "-");
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(long.as_str())) else {
            bail!("{}: unknown key {key:?} for `{}`", path.display(), sub.get_name());
        };
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value {
                "true" => out.push(format!("--{long}").into()),
                "false" => {}
                _ => bail!("{}: {key} must be true or false", path.display()),
            }
        } else {
            let joined: Vec<&str> = value.split(',').map(str::trim).collect();
            out.push(format!("--{long}").into());
            out.push(joined.join(",").into());
        }
    }
    Ok(out)
}

/// Rewrites `argv` with the config file's entries spliced in right after
/// the subcommand name.
pub fn expand(argv: Vec<OsString>, cmd: &Command) -> Result<Vec<OsString>> {
    let Some(sub_pos) = argv
        .iter()
        .skip(1)
        .position(|a| cmd.find_subcommand(a).is_some())
        .map(|p| p + 1)
    else {
        return Ok(argv);
    };
    let rest = &argv[sub_pos + 1..];
    let Some((i, len, path)) = config_path(rest)? else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let kv = KvConfig::load(path).with_context(|| format!("reading config {}", path.display()))?;
    let sub = cmd
        .find_subcommand(&argv[sub_pos])
        .expect("subcommand located above");
    let mut out: Vec<OsString> = argv[..=sub_pos].to_vec();
    out.extend(flag_args(sub, &kv, path)?);
    out.extend(rest[..i].iter().cloned());
    out.extend(rest[i + len..].iter().cloned());
    Ok(out)
}
