//! Atomic artifact writing and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use tempfile::NamedTempFile;

use qstime::bounds::Tolerances;

/// Written next to every set of outputs; enough to re-run the command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub graph: Option<String>,
    pub set: Option<String>,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub artifacts: Vec<String>,
    pub tool_version: &'static str,
    pub argv: Vec<String>,
}

impl RunManifest {
    pub fn new(tol: &Tolerances) -> Self {
        RunManifest {
            command: String::new(),
            graph: None,
            set: None,
            seed: None,
            tolerances: *tol,
            artifacts: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION"),
            argv: std::env::args().collect(),
        }
    }
}

pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Writes through a temporary file in the same directory and renames it
    /// into place, so readers never see a partial file.
    fn atomic(&mut self, name: &str, body: impl FnOnce(&mut NamedTempFile) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let mut tmp = NamedTempFile::new_in(&self.dir).with_context(|| format!("creating a file in {}", self.dir.display()))?;
        body(&mut tmp)?;
        tmp.flush()?;
        tmp.persist(&path).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        self.atomic(name, |f| {
            serde_json::to_writer_pretty(&mut *f, value)?;
            writeln!(f)?;
            Ok(())
        })
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        self.atomic(name, |f| {
            let mut w = csv::Writer::from_writer(f);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
            Ok(())
        })
    }

    pub fn finish(mut self, mut manifest: RunManifest) -> Result<()> {
        manifest.artifacts = self.written.clone();
        self.json("manifest.json", &manifest)
    }
}
