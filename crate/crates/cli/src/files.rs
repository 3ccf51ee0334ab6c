//! File plumbing: whole-file reads, all-or-nothing writes, and locked disk images.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use stegkit::vfs::DiskImage;
use stegkit::{Error, Result};

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Usage(format!("{}: {e}", path.display()))
}

pub fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| io_error(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read(path)?).map_err(|_| Error::Format(format!("{} is not UTF-8 text", path.display())))
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so `path` is either untouched or complete.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

/// A disk image held under an advisory lock for the life of a command.
pub struct LockedDisk {
    file: File,
    pub disk: DiskImage,
}

#[cfg(unix)]
fn same_file(file: &File, path: &Path) -> bool {
    use std::os::unix::fs::MetadataExt;
    match (file.metadata(), std::fs::metadata(path)) {
        (Ok(a), Ok(b)) => a.dev() == b.dev() && a.ino() == b.ino(),
        _ => false,
    }
}

#[cfg(not(unix))]
fn same_file(_: &File, _: &Path) -> bool {
    true
}

impl LockedDisk {
    /// Opens and locks `path`: exclusively when `write`, shared otherwise.
    pub fn open(path: &Path, write: bool) -> Result<Self> {
        loop {
            let mut file = File::open(path).map_err(|e| io_error(path, e))?;
            if write { file.lock() } else { file.lock_shared() }.map_err(|e| io_error(path, e))?;
            // A writer may have replaced the file while we waited for the lock.
            if !same_file(&file, path) {
                continue;
            }
            let mut bytes = Vec::new();
            file.read_to_end(&mut bytes).map_err(|e| io_error(path, e))?;
            let disk = DiskImage::from_bytes(&bytes)?;
            return Ok(LockedDisk { file, disk });
        }
    }

    /// Replaces the image file while the lock on the old one is still held.
    pub fn save(self, path: &Path) -> Result<()> {
        write_atomic(path, &self.disk.to_bytes())?;
        drop(self.file);
        Ok(())
    }
}
