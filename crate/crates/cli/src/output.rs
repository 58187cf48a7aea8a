use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{Check, CliError};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
}

/// Index of a run's outputs. Contains no timestamps or absolute paths, so
/// it is itself reproducible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub name: Option<String>,
    pub seed: u64,
    pub status: String,
    pub checks: Vec<Check>,
    pub failures: Vec<String>,
    pub files: Vec<ManifestEntry>,
}

/// Output directory that records every file written through it.
pub struct OutputDir {
    root: PathBuf,
    files: BTreeMap<String, u64>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    /// Writes `bytes` to `rel` (forward slashes) below the root.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, bytes).map_err(io_err(&path))?;
        self.files.insert(rel.to_string(), bytes.len() as u64);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("json output serialises");
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    pub fn finish(
        self,
        command: &str,
        name: Option<String>,
        seed: u64,
        checks: Vec<Check>,
    ) -> Result<Manifest, CliError> {
        let failures: Vec<String> = checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.clone())
            .collect();
        let manifest = Manifest {
            command: command.into(),
            name,
            seed,
            status: if failures.is_empty() { "pass" } else { "fail" }.into(),
            checks,
            failures,
            files: self
                .files
                .into_iter()
                .map(|(path, bytes)| ManifestEntry { path, bytes })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        text.push('\n');
        let path = self.root.join(MANIFEST);
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_files_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write("b.txt", b"abc").unwrap();
        out.write("a/x.csv", b"1").unwrap();
        let m = out.finish("moments", None, 7, vec![]).unwrap();
        let paths: Vec<_> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, ["a/x.csv", "b.txt"]);
        assert_eq!(m.files[1].bytes, 3);
        assert_eq!(m.status, "pass");
        assert!(dir.path().join(MANIFEST).exists());
    }

    #[test]
    fn failing_check_marks_run() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(dir.path()).unwrap();
        let m = out
            .finish("kg-suite", None, 0, vec![Check::at_most("x", 2.0, 1.0)])
            .unwrap();
        assert_eq!(m.status, "fail");
        assert_eq!(m.failures, ["x"]);
    }
}
