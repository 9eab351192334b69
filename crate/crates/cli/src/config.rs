//! Flat `key = value` config files. Each entry becomes `--key value` inserted
//! right after the subcommand, so flags given on the command line win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context};

use crate::args::SUBCOMMANDS;
use crate::output::ConfigEcho;

pub fn parse(text: &str) -> anyhow::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key = value, got {line:?}", i + 1);
        };
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if k.is_empty() || k == "config" || k == "out" {
            bail!("line {}: key {k:?} is not allowed here", i + 1);
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Expands `--config FILE` into the argument list.
pub fn expand(argv: Vec<OsString>) -> anyhow::Result<(Vec<OsString>, Option<ConfigEcho>)> {
    let Some(path) = config_path(&argv) else {
        return Ok((argv, None));
    };
    let text = fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config {}", Path::new(&path).display()))?;
    let entries = parse(&text)?;
    let Some(pos) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref())) else {
        return Ok((argv, None));
    };
    let mut injected = Vec::new();
    for (k, v) in &entries {
        match v.as_str() {
            "true" => injected.push(format!("--{k}").into()),
            "false" => {}
            _ => injected.push(format!("--{k}={v}").into()),
        }
    }
    let mut out = argv[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[pos + 1..]);
    let echo = ConfigEcho {
        path: Path::new(&path).display().to_string(),
        entries,
    };
    Ok((out, Some(echo)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_keys() {
        let e = parse("# run\nh = 0.05\nwindow=0.7:0.9\nboundary_samples = 512\n").unwrap();
        assert_eq!(e[0], ("h".into(), "0.05".into()));
        assert_eq!(e[2].0, "boundary-samples");
        assert!(parse("h 0.05").is_err());
        assert!(parse("out = x").is_err());
    }

    #[test]
    fn command_line_comes_last() {
        let dir = std::env::temp_dir().join(format!("edge-spectra-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("run.cfg");
        fs::write(&p, "h = 0.05\ncrosscheck = true\n").unwrap();
        let argv: Vec<OsString> = ["x", "--config", p.to_str().unwrap(), "lowlying", "--h", "0.02"]
            .iter()
            .map(OsString::from)
            .collect();
        let (out, echo) = expand(argv).unwrap();
        let out: Vec<String> = out.iter().map(|s| s.to_string_lossy().into_owned()).collect();
        assert_eq!(&out[3..], ["lowlying", "--h=0.05", "--crosscheck", "--h", "0.02"]);
        assert_eq!(echo.unwrap().entries.len(), 2);
        fs::remove_dir_all(dir).unwrap();
    }
}
