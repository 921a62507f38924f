//! `--config FILE` support: a flat `key=value` file whose entries become
//! flags placed ahead of the command-line ones, so explicit flags win.

use anyhow::{bail, Context};

const SUBCOMMANDS: [&str; 4] = ["honest", "attack", "sweep", "practicality"];

/// Removes `--config` from `argv` and splices the file's entries in right
/// after the subcommand name.
pub fn expand(argv: Vec<String>) -> anyhow::Result<Vec<String>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            match it.next() {
                Some(p) => path = Some(p),
                None => bail!("--config requires a file path"),
            }
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config file {path}"))?;
    let extra = parse(&text).with_context(|| format!("in config file {path}"))?;
    match rest.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) {
        Some(at) => {
            rest.splice(at + 1..at + 1, extra);
            Ok(rest)
        }
        None => bail!("--config needs a subcommand"),
    }
}

/// Turns `key = value` lines into `--key value` pairs. Underscores in keys
/// map to dashes; `#` starts a comment.
pub fn parse(text: &str) -> anyhow::Result<Vec<String>> {
    let mut args = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key=value", lineno + 1);
        };
        let key = key.trim().trim_start_matches('-').replace('_', "-");
        if key.is_empty() || key == "config" {
            bail!("line {}: invalid key", lineno + 1);
        }
        args.push(format!("--{key}"));
        args.push(value.trim().to_string());
    }
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_pairs_and_comments() {
        let args = parse("# defaults\ntrials = 500\neta_m=0.1 # inline\n\n").unwrap();
        assert_eq!(args, v(&["--trials", "500", "--eta-m", "0.1"]));
        assert!(parse("trials 500").is_err());
    }

    #[test]
    fn without_config_is_identity() {
        let argv = v(&["qbc", "honest", "--trials", "10"]);
        assert_eq!(expand(argv.clone()).unwrap(), argv);
    }

    #[test]
    fn config_entries_precede_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "trials=500\nseed=3\n").unwrap();
        let argv = v(&["qbc", "--config", path.to_str().unwrap(), "honest", "--trials", "10"]);
        let out = expand(argv).unwrap();
        assert_eq!(out, v(&["qbc", "honest", "--trials", "500", "--seed", "3", "--trials", "10"]));
    }

    #[test]
    fn missing_file_is_an_error() {
        assert!(expand(v(&["qbc", "honest", "--config", "/nonexistent/qbc.conf"])).is_err());
    }
}
