//! Named alternate data streams attached to files.

use std::fmt;

use super::{normalize_path, DiskImage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamInfo {
    pub path: String,
    pub stream: String,
    pub size: u64,
}

/// `path:stream:$DATA size`
impl fmt::Display for StreamInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:$DATA {}", self.path, self.stream, self.size)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedFile {
    pub main: Vec<u8>,
    /// Streams carried along (`include_streams = true`), by name.
    pub streams: Vec<(String, Vec<u8>)>,
    /// Streams lost by the export (`include_streams = false`).
    pub dropped: Vec<String>,
}

fn check_stream_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains([':', '/']) || name.len() > u16::MAX as usize {
        return Err(Error::usage(format!("invalid stream name {name:?}")));
    }
    Ok(())
}

impl DiskImage {
    pub fn ads_attach(&mut self, path: &str, stream: &str, content: &[u8]) -> Result<()> {
        check_stream_name(stream)?;
        let (p, entry) = self.entry(path)?;
        if entry.streams.contains_key(stream) {
            return Err(Error::usage(format!("{p} already has a stream named {stream}")));
        }
        let ext = self.store(content)?;
        self.files.get_mut(&p).expect("checked").streams.insert(stream.to_string(), ext);
        Ok(())
    }

    pub fn ads_read(&self, path: &str, stream: &str) -> Result<Vec<u8>> {
        let (p, entry) = self.entry(path)?;
        let ext = entry
            .streams
            .get(stream)
            .ok_or_else(|| Error::usage(format!("{p} has no stream named {stream}")))?;
        Ok(self.load_extent(ext))
    }

    pub fn ads_remove(&mut self, path: &str, stream: &str) -> Result<()> {
        let p = normalize_path(path)?;
        let ext = self
            .files
            .get_mut(&p)
            .ok_or_else(|| Error::usage(format!("no such file: {p}")))?
            .streams
            .remove(stream)
            .ok_or_else(|| Error::usage(format!("{p} has no stream named {stream}")))?;
        self.free_chain(ext.first);
        Ok(())
    }

    /// Every stream of files in scope, sorted by path then stream name.
    pub fn ads_scan(&self, root: &str, levels: usize) -> Result<Vec<StreamInfo>> {
        Ok(self
            .files_in_scope(root, levels)?
            .into_iter()
            .flat_map(|(path, e)| {
                e.streams.iter().map(move |(name, ext)| StreamInfo {
                    path: path.clone(),
                    stream: name.clone(),
                    size: ext.size,
                })
            })
            .collect())
    }

    /// Copies a file off the disk. Without `include_streams` the copy behaves
    /// like one onto a file system with no stream support: the streams are
    /// listed in `dropped`.
    pub fn export_file(&self, path: &str, include_streams: bool) -> Result<ExportedFile> {
        let (_, entry) = self.entry(path)?;
        let main = self.load_extent(&entry.main);
        let names = entry.streams.keys().cloned();
        Ok(if include_streams {
            ExportedFile {
                main,
                streams: entry.streams.iter().map(|(n, x)| (n.clone(), self.load_extent(x))).collect(),
                dropped: Vec::new(),
            }
        } else {
            ExportedFile { main, streams: Vec::new(), dropped: names.collect() }
        })
    }
}
