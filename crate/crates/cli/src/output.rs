//! File output: atomic writes, CSV tables and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| CliError::io(path, e))
}

/// Serializes `rows` as CSV with a header row.
pub fn csv_string<T: Serialize>(rows: &[T], header: &[&str]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Config(format!("csv output: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

/// Record of one command run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputRecord>,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub bytes: u64,
}

impl Manifest {
    pub fn new(command: &'static str, config: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            tool: "isothc",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        let bytes = fs::metadata(path).map(|m| m.len()).unwrap_or(0);
        self.inputs.push(InputRecord {
            path: path.to_path_buf(),
            bytes,
        });
    }
}

/// Destination for a command's artifacts: a directory, or stdout only.
pub struct Sink {
    dir: Option<PathBuf>,
    manifest: Manifest,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>, manifest: Manifest) -> Self {
        Self { dir, manifest }
    }

    pub fn manifest_mut(&mut self) -> &mut Manifest {
        &mut self.manifest
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes `name` into the output directory, or prints it when
    /// `to_stdout` is set and there is no directory.
    pub fn emit(&mut self, name: &str, contents: &str, to_stdout: bool) -> CliResult<()> {
        match &self.dir {
            Some(dir) => {
                write_atomic(&dir.join(name), contents.as_bytes())?;
                self.manifest.outputs.push(name.to_string());
            }
            None if to_stdout => print!("{contents}"),
            None => {}
        }
        Ok(())
    }

    /// Writes `manifest.json` when there is an output directory.
    pub fn finish(self) -> CliResult<Manifest> {
        if let Some(dir) = &self.dir {
            let text = serde_json::to_string_pretty(&self.manifest).expect("plain data");
            write_atomic(&dir.join("manifest.json"), text.as_bytes())?;
        }
        Ok(self.manifest)
    }
}
