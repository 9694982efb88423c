//! Output directories that clean up after a failed run.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{io_at, Result};

#[derive(Debug)]
enum Created {
    File(PathBuf),
    Dir(PathBuf),
}

/// Tracks everything a command writes. Dropping it without [`commit`]
/// removes those files, then any directories it created that are left empty.
///
/// [`commit`]: OutputDir::commit
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    created: Vec<Created>,
    committed: bool,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        let mut out = OutputDir { root: root.to_path_buf(), created: Vec::new(), committed: false };
        out.ensure_dir(root)?;
        Ok(out)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn ensure_dir(&mut self, dir: &Path) -> Result<()> {
        let mut missing = Vec::new();
        let mut cur = Some(dir);
        while let Some(d) = cur.filter(|d| !d.as_os_str().is_empty() && !d.exists()) {
            missing.push(d.to_path_buf());
            cur = d.parent();
        }
        for d in missing.into_iter().rev() {
            fs::create_dir(&d).map_err(io_at(&d))?;
            self.created.push(Created::Dir(d));
        }
        Ok(())
    }

    /// Writes `bytes` to `rel`, creating parent directories as needed.
    pub fn write(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            self.ensure_dir(parent)?;
        }
        self.created.push(Created::File(path.clone()));
        fs::write(&path, bytes).map_err(io_at(&path))?;
        Ok(path)
    }

    /// Buffers whatever `f` produces, then writes it to `rel`.
    pub fn write_with(
        &mut self,
        rel: impl AsRef<Path>,
        f: impl FnOnce(&mut Vec<u8>) -> swcs::Result<()>,
    ) -> Result<PathBuf> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(rel, &buf)
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for c in self.created.iter().rev() {
            // Best effort: a directory that still holds foreign files stays.
            let _ = match c {
                Created::File(p) => fs::remove_file(p),
                Created::Dir(p) => fs::remove_dir(p),
            };
        }
    }
}
