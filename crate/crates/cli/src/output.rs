use std::path::{Path, PathBuf};

use antisym_core::report;
use serde::Serialize;
use serde_json::Value;

use crate::Failure;

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    config: &'a Value,
    seeds: &'a [u64],
    artifact_version: &'static str,
    outputs: &'a [String],
}

/// Collects the files of one command and writes `manifest.json` last.
pub struct Artifacts {
    dir: PathBuf,
    command: String,
    config: Value,
    seeds: Vec<u64>,
    outputs: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path, command: &str, config: Value, seeds: Vec<u64>) -> Self {
        Artifacts { dir: dir.to_path_buf(), command: command.into(), config, seeds, outputs: Vec::new() }
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = report::write_file(&self.dir, name, contents)?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let s = report::to_json(value)?;
        self.write(name, &s)
    }

    pub fn finish(self) -> Result<PathBuf, Failure> {
        let manifest = RunManifest {
            command: &self.command,
            config: &self.config,
            seeds: &self.seeds,
            artifact_version: env!("CARGO_PKG_VERSION"),
            outputs: &self.outputs,
        };
        Ok(report::write_file(&self.dir, "manifest.json", &report::to_json(&manifest)?)?)
    }
}
