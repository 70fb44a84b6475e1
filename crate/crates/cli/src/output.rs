use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::{config_error, CliResult};

/// Version tag stamped on every JSON document.
pub const FORMAT_VERSION: u32 = 1;

/// Write `contents` to `path` through a sibling temporary file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = parent_dir(path);
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Serialize with a leading `format_version` and `command` field.
pub fn to_json<T: Serialize>(command: &str, body: &T) -> CliResult<String> {
    let mut value = serde_json::to_value(body)?;
    let serde_json::Value::Object(fields) = &mut value else {
        return Err(anyhow::anyhow!("output body must be a JSON object").into());
    };
    let mut doc = serde_json::Map::new();
    doc.insert("format_version".into(), FORMAT_VERSION.into());
    doc.insert("command".into(), command.into());
    doc.append(fields);
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(doc))?;
    text.push('\n');
    Ok(text)
}

/// JSON to `out`, or to stdout when no path is given.
pub fn emit_json<T: Serialize>(command: &str, body: &T, out: Option<&Path>) -> CliResult<()> {
    let text = to_json(command, body)?;
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Read a JSON document and check its version tag.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    match value.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        Some(v) => return Err(config_error(format!("{} has format_version {v}, expected {FORMAT_VERSION}", path.display()))),
        None => return Err(config_error(format!("{} has no format_version", path.display()))),
    }
    Ok(serde_json::from_value(value).with_context(|| format!("decoding {}", path.display()))?)
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Fail early on missing inputs or output directories.
pub fn check_paths(inputs: &[&Path], outputs: &[Option<&Path>]) -> CliResult<()> {
    for p in inputs {
        if !p.is_file() {
            return Err(config_error(format!("input file {} does not exist", p.display())));
        }
    }
    for p in outputs.iter().flatten() {
        let dir = parent_dir(p);
        if !dir.is_dir() {
            return Err(config_error(format!("output directory {} does not exist", dir.display())));
        }
    }
    Ok(())
}
