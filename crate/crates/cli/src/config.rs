//! Flat key=value configuration files, expanded into command-line flags.
//!
//! Keys are the long flag names of the subcommand (without the leading
//! dashes). Config entries are inserted ahead of the user's own flags, so
//! anything given explicitly on the command line wins.

use std::path::Path;

use anyhow::Context;

/// Read a config file into `(key, value)` pairs. Blank lines and lines
/// starting with `#` are ignored.
pub fn read_config(path: &Path) -> anyhow::Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Expand `--config <file>` in `argv`: the file's entries are spliced in
/// as `--key value` right after the subcommand token.
pub fn expand_config_args(argv: &[String]) -> anyhow::Result<Vec<String>> {
    let mut config_path: Option<String> = None;
    let mut iter = argv.iter().enumerate();
    while let Some((_, arg)) = iter.next() {
        if arg == "--config" {
            if let Some((_, value)) = iter.next() {
                config_path = Some(value.clone());
            }
        } else if let Some(value) = arg.strip_prefix("--config=") {
            config_path = Some(value.to_string());
        }
    }
    let Some(path) = config_path else {
        return Ok(argv.to_vec());
    };
    let mut pairs = read_config(Path::new(&path))?;

    // Flags given explicitly on the command line take precedence: drop the
    // config entry entirely (clap rejects repeated occurrences).
    let explicit: Vec<String> = argv
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    pairs.retain(|(key, _)| !explicit.contains(key));

    // The subcommand is the first non-flag token after the program name.
    let mut out: Vec<String> = Vec::with_capacity(argv.len() + 2 * pairs.len());
    let mut inserted = false;
    let mut skip_value = false;
    for (i, arg) in argv.iter().enumerate() {
        out.push(arg.clone());
        if inserted {
            continue;
        }
        if i == 0 {
            continue;
        }
        if skip_value {
            skip_value = false;
            continue;
        }
        if arg.starts_with("--") {
            // Global flags with a separate value before the subcommand.
            if arg == "--config" || arg == "--jobs" {
                skip_value = true;
            }
            continue;
        }
        // First bare token: the subcommand. Splice config flags here.
        for (key, value) in &pairs {
            out.push(format!("--{key}"));
            out.push(value.clone());
        }
        inserted = true;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn expands_after_subcommand() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# comment\nn-xi = 200\ndx=0.5").unwrap();
        let argv: Vec<String> = [
            "solimg",
            "--config",
            file.path().to_str().unwrap(),
            "fisher-gauss",
            "--n-xi",
            "100",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let out = expand_config_args(&argv).unwrap();
        let joined = out.join(" ");
        // The explicit --n-xi hides the config entry; --dx comes from the
        // config file.
        assert!(!joined.contains("--n-xi 200"));
        assert!(joined.contains("--n-xi 100"));
        assert!(joined.contains("--dx 0.5"));
    }

    #[test]
    fn no_config_is_identity() {
        let argv: Vec<String> =
            ["solimg", "modes", "--pairs", "3"].iter().map(|s| s.to_string()).collect();
        assert_eq!(expand_config_args(&argv).unwrap(), argv);
    }
}
