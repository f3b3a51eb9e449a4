//! Per-run output directories and their manifests.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

/// Environment variable holding the default parent of run directories.
pub const OUT_ENV: &str = "GRAPHON_PATHS_OUT";

pub struct RunDir {
    path: PathBuf,
    artifacts: Vec<String>,
}

impl RunDir {
    /// `explicit`, or `$GRAPHON_PATHS_OUT/<command>`, or `runs/<command>`.
    pub fn create(explicit: Option<&Path>, command: &str) -> anyhow::Result<Self> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs")).join(command),
        };
        fs::create_dir_all(&path).with_context(|| format!("cannot create {}", path.display()))?;
        Ok(Self { path, artifacts: Vec::new() })
    }

    pub fn write<F>(&mut self, name: &str, body: F) -> anyhow::Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>,
    {
        let target = self.path.join(name);
        let file = File::create(&target).with_context(|| format!("cannot create {}", target.display()))?;
        let mut out = BufWriter::new(file);
        body(&mut out)?;
        out.flush()?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        self.write(name, |out| {
            serde_json::to_writer_pretty(&mut *out, value)?;
            writeln!(out)?;
            Ok(())
        })
    }

    /// Writes `manifest.json` with the resolved configuration.
    pub fn finish<T: Serialize>(mut self, command: &str, config: &T) -> anyhow::Result<PathBuf> {
        #[derive(Serialize)]
        struct Manifest<'a, T> {
            tool: &'a str,
            version: &'a str,
            command: &'a str,
            config: &'a T,
            artifacts: &'a [String],
        }
        let artifacts = std::mem::take(&mut self.artifacts);
        let manifest = Manifest {
            tool: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            artifacts: &artifacts,
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(self.path)
    }
}
