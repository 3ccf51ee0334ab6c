//! A portable virtual disk: 512-byte sectors grouped into clusters, a
//! cluster allocation table, files with named alternate streams, and
//! slack-space hiding on top of it.
//!
//! On-disk image layout (little-endian):
//!
//! ```text
//! superblock, 64 bytes
//!   0   magic "VFS1"
//!   4   u16 format version (1)
//!   6   u16 sector size (512)
//!   8   u32 sectors per cluster (power of two, 1..=128)
//!   12  u32 cluster count
//!   16  u64 allocation table offset
//!   24  u64 file table offset
//!   32  u64 file table length
//!   40  u64 data region offset
//!   48  16 reserved zero bytes
//! allocation table: one u32 per cluster
//!   0xFFFFFFFE free, 0xFFFFFFFF end of chain, otherwise the next cluster
//! file table
//!   u32 file count, then per file (sorted by path):
//!     u16 path length, path, u64 size, u32 first cluster (0xFFFFFFFF = none),
//!     u16 stream count, then per stream (sorted by name):
//!       u16 name length, name, u64 size, u32 first cluster
//! data region: cluster count * cluster bytes
//! ```

mod ads;
mod slack;

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};

pub use ads::{ExportedFile, StreamInfo};
pub use slack::{Obfuscation, Selection, SlackExtent, SlackHideOptions, SlackKind};

pub const SECTOR_SIZE: usize = 512;
pub const MAGIC: [u8; 4] = *b"VFS1";
pub const FORMAT_VERSION: u16 = 1;
const SUPERBLOCK_LEN: usize = 64;
const FREE: u32 = 0xFFFF_FFFE;
const END_OF_CHAIN: u32 = 0xFFFF_FFFF;
const NO_CLUSTER: u32 = 0xFFFF_FFFF;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterState {
    Free,
    EndOfChain,
    Next(u32),
}

impl ClusterState {
    fn encode(self) -> u32 {
        match self {
            ClusterState::Free => FREE,
            ClusterState::EndOfChain => END_OF_CHAIN,
            ClusterState::Next(n) => n,
        }
    }

    fn decode(v: u32) -> Self {
        match v {
            FREE => ClusterState::Free,
            END_OF_CHAIN => ClusterState::EndOfChain,
            n => ClusterState::Next(n),
        }
    }
}

/// Content of a file or stream: its byte size and the head of its cluster chain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Extent {
    size: u64,
    first: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct FileEntry {
    main: Extent,
    streams: BTreeMap<String, Extent>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiskImage {
    sectors_per_cluster: u32,
    table: Vec<ClusterState>,
    files: BTreeMap<String, FileEntry>,
    data: Vec<u8>,
}

/// Canonical form of a user path: no leading/trailing `/`, no empty, `.`,
/// or `..` components, no `:` (reserved for stream names).
pub fn normalize_path(path: &str) -> Result<String> {
    let trimmed = path.trim_matches('/');
    if trimmed.is_empty() {
        return Err(Error::usage("empty path"));
    }
    for comp in trimmed.split('/') {
        if comp.is_empty() || comp == "." || comp == ".." || comp.contains(':') {
            return Err(Error::usage(format!("invalid path {path:?}")));
        }
    }
    Ok(trimmed.to_string())
}

/// Directory form of a root argument: `""` for the whole disk.
pub(crate) fn normalize_root(root: &str) -> Result<String> {
    if root.trim_matches('/').is_empty() {
        Ok(String::new())
    } else {
        normalize_path(root)
    }
}

impl DiskImage {
    pub fn format(cluster_count: u32, sectors_per_cluster: u32) -> Result<Self> {
        if !(1..=128).contains(&sectors_per_cluster) || !sectors_per_cluster.is_power_of_two() {
            return Err(Error::usage(format!(
                "sectors per cluster must be a power of two in 1..=128, got {sectors_per_cluster}"
            )));
        }
        if cluster_count == 0 || cluster_count >= FREE {
            return Err(Error::usage(format!("cluster count {cluster_count} out of range")));
        }
        let cluster_bytes = sectors_per_cluster as usize * SECTOR_SIZE;
        let total = (cluster_count as usize)
            .checked_mul(cluster_bytes)
            .filter(|&t| t <= 1 << 34)
            .ok_or_else(|| Error::usage("disk image too large"))?;
        Ok(DiskImage {
            sectors_per_cluster,
            table: vec![ClusterState::Free; cluster_count as usize],
            files: BTreeMap::new(),
            data: vec![0; total],
        })
    }

    pub fn sectors_per_cluster(&self) -> u32 {
        self.sectors_per_cluster
    }

    pub fn cluster_bytes(&self) -> usize {
        self.sectors_per_cluster as usize * SECTOR_SIZE
    }

    pub fn cluster_count(&self) -> usize {
        self.table.len()
    }

    pub fn cluster_state(&self, index: usize) -> Option<ClusterState> {
        self.table.get(index).copied()
    }

    pub fn free_clusters(&self) -> usize {
        self.table.iter().filter(|s| **s == ClusterState::Free).count()
    }

    /// Paths of all files, sorted.
    pub fn list(&self) -> Vec<(String, u64)> {
        self.files.iter().map(|(p, e)| (p.clone(), e.main.size)).collect()
    }

    pub fn exists(&self, path: &str) -> bool {
        normalize_path(path).is_ok_and(|p| self.files.contains_key(&p))
    }

    pub fn file_size(&self, path: &str) -> Result<u64> {
        Ok(self.entry(path)?.1.main.size)
    }

    fn entry(&self, path: &str) -> Result<(String, &FileEntry)> {
        let p = normalize_path(path)?;
        let e = self
            .files
            .get(&p)
            .ok_or_else(|| Error::usage(format!("no such file: {p}")))?;
        Ok((p, e))
    }

    fn clusters_for(&self, size: u64) -> usize {
        (size as usize).div_ceil(self.cluster_bytes())
    }

    pub(crate) fn chain(&self, first: Option<u32>) -> Vec<u32> {
        let mut out = Vec::new();
        let mut cur = first;
        while let Some(c) = cur {
            out.push(c);
            cur = match self.table[c as usize] {
                ClusterState::Next(n) => Some(n),
                _ => None,
            };
        }
        out
    }

    fn allocate(&mut self, count: usize) -> Result<Vec<u32>> {
        let free: Vec<u32> = self
            .table
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == ClusterState::Free)
            .map(|(i, _)| i as u32)
            .take(count)
            .collect();
        if free.len() < count {
            return Err(Error::Capacity {
                needed: count * self.cluster_bytes(),
                available: self.free_clusters() * self.cluster_bytes(),
            });
        }
        self.link(&free);
        Ok(free)
    }

    fn link(&mut self, clusters: &[u32]) {
        for w in clusters.windows(2) {
            self.table[w[0] as usize] = ClusterState::Next(w[1]);
        }
        if let Some(&last) = clusters.last() {
            self.table[last as usize] = ClusterState::EndOfChain;
        }
    }

    fn free_chain(&mut self, first: Option<u32>) {
        for c in self.chain(first) {
            self.table[c as usize] = ClusterState::Free;
        }
    }

    /// Copies `content` into `clusters` and zeroes the rest of the last
    /// written sector. Later sectors of the last cluster keep their bytes.
    fn fill(&mut self, clusters: &[u32], content: &[u8]) {
        let cb = self.cluster_bytes();
        for (c, chunk) in clusters.iter().zip(content.chunks(cb)) {
            let base = *c as usize * cb;
            self.data[base..base + chunk.len()].copy_from_slice(chunk);
            let sector_end = chunk.len().div_ceil(SECTOR_SIZE) * SECTOR_SIZE;
            self.data[base + chunk.len()..base + sector_end].fill(0);
        }
    }

    fn store(&mut self, content: &[u8]) -> Result<Extent> {
        let clusters = self.allocate(self.clusters_for(content.len() as u64))?;
        self.fill(&clusters, content);
        Ok(Extent {
            size: content.len() as u64,
            first: clusters.first().copied(),
        })
    }

    fn load_extent(&self, extent: &Extent) -> Vec<u8> {
        let cb = self.cluster_bytes();
        let mut out = Vec::with_capacity(extent.size as usize);
        for c in self.chain(extent.first) {
            let base = c as usize * cb;
            let take = (extent.size as usize - out.len()).min(cb);
            out.extend_from_slice(&self.data[base..base + take]);
        }
        out
    }

    pub fn write_file(&mut self, path: &str, content: &[u8]) -> Result<()> {
        let p = normalize_path(path)?;
        if self.files.contains_key(&p) {
            return Err(Error::usage(format!("file exists: {p}")));
        }
        let prefix = format!("{p}/");
        if self.files.keys().any(|k| k.starts_with(&prefix) || p.starts_with(&format!("{k}/"))) {
            return Err(Error::usage(format!("path {p} collides with an existing file or directory")));
        }
        let main = self.store(content)?;
        self.files.insert(p, FileEntry { main, streams: BTreeMap::new() });
        Ok(())
    }

    /// Rewrites an existing file in place, as an editor saving over it would:
    /// the current chain is reused from its head, then extended or trimmed.
    pub fn replace_file(&mut self, path: &str, content: &[u8]) -> Result<()> {
        let (p, entry) = self.entry(path)?;
        let old = self.chain(entry.main.first);
        let need = self.clusters_for(content.len() as u64);
        let mut clusters: Vec<u32> = old.iter().copied().take(need).collect();
        if need > old.len() {
            let extra = need - old.len();
            if self.free_clusters() < extra {
                return Err(Error::Capacity {
                    needed: extra * self.cluster_bytes(),
                    available: self.free_clusters() * self.cluster_bytes(),
                });
            }
            // Detach the old chain first so allocation cannot hand it back.
            self.link(&old);
            clusters.extend(self.allocate(extra)?);
        } else {
            for &c in &old[need..] {
                self.table[c as usize] = ClusterState::Free;
            }
        }
        self.link(&clusters);
        self.fill(&clusters, content);
        let e = self.files.get_mut(&p).expect("checked");
        e.main = Extent {
            size: content.len() as u64,
            first: clusters.first().copied(),
        };
        Ok(())
    }

    pub fn read_file(&self, path: &str) -> Result<Vec<u8>> {
        let (_, e) = self.entry(path)?;
        Ok(self.load_extent(&e.main))
    }

    /// Removes the file-table entry and frees its clusters (and those of its
    /// streams). Cluster contents are left in place.
    pub fn delete_file(&mut self, path: &str) -> Result<()> {
        let p = normalize_path(path)?;
        let e = self
            .files
            .remove(&p)
            .ok_or_else(|| Error::usage(format!("no such file: {p}")))?;
        self.free_chain(e.main.first);
        for s in e.streams.values() {
            self.free_chain(s.first);
        }
        Ok(())
    }

    /// Raw bytes of a cluster regardless of allocation state.
    pub fn read_raw(&self, cluster: usize) -> Result<&[u8]> {
        if cluster >= self.cluster_count() {
            return Err(Error::usage(format!(
                "cluster {cluster} out of range (disk has {})",
                self.cluster_count()
            )));
        }
        let cb = self.cluster_bytes();
        Ok(&self.data[cluster * cb..(cluster + 1) * cb])
    }

    pub(crate) fn data(&self) -> &[u8] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    /// Files under `root` whose depth below it is at most `levels`.
    /// `levels = 0` selects files directly inside `root`.
    pub(crate) fn files_in_scope(&self, root: &str, levels: usize) -> Result<Vec<(&String, &FileEntry)>> {
        let root = normalize_root(root)?;
        let prefix = if root.is_empty() { String::new() } else { format!("{root}/") };
        if !root.is_empty() && !self.files.keys().any(|k| k.starts_with(&prefix)) {
            return Err(Error::usage(format!("no such directory: {root}")));
        }
        Ok(self
            .files
            .iter()
            .filter(|(p, _)| {
                p.strip_prefix(&prefix)
                    .is_some_and(|rel| rel.matches('/').count() <= levels)
            })
            .collect())
    }

    /// Checks that chains are acyclic, sized to their content, disjoint, and
    /// that no allocated cluster is unowned.
    pub fn check_allocation(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::format(format!("inconsistent allocation: {msg}")));
        let n = self.table.len();
        let mut owned = HashSet::new();
        let extents = self.files.iter().flat_map(|(p, e)| {
            std::iter::once((p.clone(), &e.main))
                .chain(e.streams.iter().map(move |(s, x)| (format!("{p}:{s}"), x)))
        });
        for (name, ext) in extents {
            let mut cur = ext.first;
            let mut len = 0;
            while let Some(c) = cur {
                if c as usize >= n {
                    return bad(format!("{name} points at cluster {c} beyond the disk"));
                }
                if !owned.insert(c) {
                    return bad(format!("cluster {c} of {name} is shared or cyclic"));
                }
                len += 1;
                cur = match self.table[c as usize] {
                    ClusterState::Next(next) => Some(next),
                    ClusterState::EndOfChain => None,
                    ClusterState::Free => return bad(format!("{name} runs into free cluster {c}")),
                };
            }
            if len != self.clusters_for(ext.size) {
                return bad(format!("{name} has {len} clusters for {} bytes", ext.size));
            }
        }
        let used = self.table.iter().filter(|s| **s != ClusterState::Free).count();
        if used != owned.len() {
            return bad(format!("{} allocated clusters are not owned by any file", used - owned.len()));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut table = Vec::with_capacity(self.table.len() * 4);
        for s in &self.table {
            table.extend_from_slice(&s.encode().to_le_bytes());
        }
        let mut files = Vec::new();
        files.extend_from_slice(&(self.files.len() as u32).to_le_bytes());
        let put_extent = |buf: &mut Vec<u8>, name: &str, e: &Extent| {
            buf.extend_from_slice(&(name.len() as u16).to_le_bytes());
            buf.extend_from_slice(name.as_bytes());
            buf.extend_from_slice(&e.size.to_le_bytes());
            buf.extend_from_slice(&e.first.unwrap_or(NO_CLUSTER).to_le_bytes());
        };
        for (p, e) in &self.files {
            put_extent(&mut files, p, &e.main);
            files.extend_from_slice(&(e.streams.len() as u16).to_le_bytes());
            for (s, x) in &e.streams {
                put_extent(&mut files, s, x);
            }
        }
        let alloc_off = SUPERBLOCK_LEN as u64;
        let files_off = alloc_off + table.len() as u64;
        let data_off = files_off + files.len() as u64;

        let mut out = Vec::with_capacity(data_off as usize + self.data.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(SECTOR_SIZE as u16).to_le_bytes());
        out.extend_from_slice(&self.sectors_per_cluster.to_le_bytes());
        out.extend_from_slice(&(self.table.len() as u32).to_le_bytes());
        out.extend_from_slice(&alloc_off.to_le_bytes());
        out.extend_from_slice(&files_off.to_le_bytes());
        out.extend_from_slice(&(files.len() as u64).to_le_bytes());
        out.extend_from_slice(&data_off.to_le_bytes());
        out.extend_from_slice(&[0; 16]);
        out.extend_from_slice(&table);
        out.extend_from_slice(&files);
        out.extend_from_slice(&self.data);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::format("not a VFS1 disk image"));
        }
        let version = r.u16()?;
        if version != FORMAT_VERSION {
            return Err(Error::format(format!("disk image version {version} (expected {FORMAT_VERSION})")));
        }
        let sector = r.u16()?;
        if sector as usize != SECTOR_SIZE {
            return Err(Error::format(format!("sector size {sector} (expected {SECTOR_SIZE})")));
        }
        let spc = r.u32()?;
        let count = r.u32()?;
        let mut disk = DiskImage::format(count, spc).map_err(|e| Error::format(e.to_string()))?;
        let alloc_off = r.u64()?;
        let files_off = r.u64()?;
        let files_len = r.u64()?;
        let data_off = r.u64()?;
        let expect_files = SUPERBLOCK_LEN as u64 + 4 * count as u64;
        if alloc_off != SUPERBLOCK_LEN as u64 || files_off != expect_files || data_off != files_off + files_len {
            return Err(Error::format("superblock offsets are not in canonical layout"));
        }
        r.pos = alloc_off as usize;
        for slot in disk.table.iter_mut() {
            *slot = ClusterState::decode(r.u32()?);
            if let ClusterState::Next(n) = slot {
                if *n >= count {
                    return Err(Error::format(format!("allocation entry points at cluster {n} beyond the disk")));
                }
            }
        }
        let nfiles = r.u32()?;
        for _ in 0..nfiles {
            let (path, main) = r.extent()?;
            let path = normalize_path(&path).map_err(|_| Error::format(format!("bad path {path:?} in file table")))?;
            let nstreams = r.u16()?;
            let mut streams = BTreeMap::new();
            for _ in 0..nstreams {
                let (name, ext) = r.extent()?;
                streams.insert(name, ext);
            }
            disk.files.insert(path, FileEntry { main, streams });
        }
        if r.pos as u64 != data_off {
            return Err(Error::format("file table length mismatch"));
        }
        let data = r.take(disk.data.len())?;
        disk.data.copy_from_slice(data);
        if r.pos != bytes.len() {
            return Err(Error::format("trailing bytes after data region"));
        }
        disk.check_allocation()?;
        Ok(disk)
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Truncated(format!("disk image ends at byte {}", self.buf.len())))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn extent(&mut self) -> Result<(String, Extent)> {
        let len = self.u16()? as usize;
        let name = std::str::from_utf8(self.take(len)?)
            .map_err(|_| Error::format("non-UTF-8 name in file table"))?
            .to_string();
        let size = self.u64()?;
        let first = self.u32()?;
        Ok((name, Extent { size, first: (first != NO_CLUSTER).then_some(first) }))
    }
}
