//! Flat `key = value` config files. Keys are long flag names; command-line
//! flags given after them win.

use crate::CliError;
use std::ffi::OsString;
use std::path::Path;

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value, got {raw:?}", lineno + 1))
        })?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("config line {}: bad key {:?}", lineno + 1, k.trim())));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Flag tokens for config entries. `key = true` becomes a bare switch and
/// `key = false` is dropped.
fn config_tokens(entries: &[(String, String)]) -> Vec<OsString> {
    let mut tokens = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => tokens.push(format!("--{k}").into()),
            "false" => {}
            _ => {
                tokens.push(format!("--{k}").into());
                tokens.push(v.into());
            }
        }
    }
    tokens
}

/// Removes `--config FILE` from `argv` and splices the file's flags in
/// right after the subcommand path, so explicit flags override them.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config: Option<OsString> = None;
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            config = Some(
                it.next()
                    .ok_or_else(|| CliError::Usage("--config needs a file argument".into()))?,
            );
        } else if let Some(v) = s.strip_prefix("--config=") {
            config = Some(v.into());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let tokens = config_tokens(&parse_config(&text)?);

    // program name, subcommand and, for `experiment`, its kind
    let mut at = 1;
    if rest.len() > at && !rest[at].to_string_lossy().starts_with('-') {
        at += 1;
        if rest[at - 1] == "experiment" && rest.len() > at && !rest[at].to_string_lossy().starts_with('-') {
            at += 1;
        }
    }
    let at = at.min(rest.len());
    let mut out: Vec<OsString> = rest[..at].to_vec();
    out.extend(tokens);
    out.extend_from_slice(&rest[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_switches() {
        let entries = parse_config("# header\nsamples = 10 # inline\nseed=3\n\nmoments = true\nfoo_bar = false\n").unwrap();
        assert_eq!(
            entries,
            vec![
                ("samples".into(), "10".into()),
                ("seed".into(), "3".into()),
                ("moments".into(), "true".into()),
                ("foo-bar".into(), "false".into())
            ]
        );
        let toks: Vec<String> = config_tokens(&entries).into_iter().map(|s| s.into_string().unwrap()).collect();
        assert_eq!(toks, ["--samples", "10", "--seed", "3", "--moments"]);
        assert!(parse_config("just text").is_err());
    }
}
