use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use serde::Serialize;

use crate::Context;

/// Write `csv` to `out`, or to stdout when `out` is absent. With `--json` a
/// JSON mirror goes next to the file (`x.csv` → `x.json`), or replaces the
/// CSV on stdout.
pub fn emit<T: Serialize + ?Sized>(ctx: &Context, out: Option<&Path>, csv: &str, mirror: &T) -> Result<()> {
    match out {
        Some(path) => {
            write(path, csv)?;
            if ctx.json {
                write(&path.with_extension("json"), &to_json(mirror)?)?;
            }
        }
        None if ctx.json => print!("{}", to_json(mirror)?),
        None => print!("{csv}"),
    }
    Ok(())
}

/// Reproducibility record stored beside an output file (`x.csv` →
/// `x.sidecar.json`).
pub fn write_sidecar<T: Serialize + ?Sized>(out: &Path, record: &T) -> Result<PathBuf> {
    let path = out.with_extension("sidecar.json");
    write(&path, &to_json(record)?)?;
    Ok(path)
}

pub fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
