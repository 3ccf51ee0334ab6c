//! Slack-space mapping, hiding, and restoration.
//!
//! Hidden bytes go only into file slack (whole sectors past the end of a
//! file's last written sector). The tracking metadata is a record list
//! wrapped in a passphrase-encrypted payload frame:
//!
//! ```text
//! "SLK1"
//! u8  obfuscation (0 none, 1 random key, 2 xor file)
//! [32-byte key, random key mode only]
//! u16 name length, name
//! u64 payload length, u32 payload CRC-32
//! u32 chunk count, then per chunk in payload order:
//!   u16 path length, path, u32 cluster, u32 offset, u32 length,
//!   u32 CRC-32 of the bytes as stored on disk
//! ```

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};

use super::{DiskImage, SECTOR_SIZE};
use crate::error::{Error, Result};
use crate::payload::{self, crc32, Passphrase, Unframed};

const RECORD_MAGIC: [u8; 4] = *b"SLK1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlackKind {
    Ram,
    File,
}

impl SlackKind {
    pub fn name(self) -> &'static str {
        match self {
            SlackKind::Ram => "ram_slack",
            SlackKind::File => "file_slack",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackExtent {
    pub path: String,
    pub cluster: u32,
    pub offset: usize,
    pub len: usize,
    pub kind: SlackKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Extents in path order.
    Dumb,
    /// Seeded shuffle of the extents.
    Random(u64),
    /// Largest extent first, path order among equals.
    Intelligent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Obfuscation {
    None,
    /// ChaCha20 keystream; the 32-byte key is drawn from the seed and kept
    /// in the metadata.
    RandomKey(u64),
    /// Repeating XOR with the given bytes. The key is not stored.
    XorFile(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackHideOptions {
    pub root: String,
    pub levels: usize,
    pub selection: Selection,
    pub obfuscation: Obfuscation,
    /// Name recorded with the payload (for example its original file name).
    pub name: String,
}

impl Default for SlackHideOptions {
    fn default() -> Self {
        SlackHideOptions {
            root: "/".into(),
            levels: usize::MAX,
            selection: Selection::Dumb,
            obfuscation: Obfuscation::None,
            name: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Chunk {
    path: String,
    cluster: u32,
    offset: u32,
    len: u32,
    crc: u32,
}

enum Mode {
    None,
    RandomKey([u8; 32]),
    XorFile,
}

fn keystream(mode: &Mode, xor_key: Option<&[u8]>, len: usize) -> Result<Option<Vec<u8>>> {
    Ok(match mode {
        Mode::None => None,
        Mode::RandomKey(key) => {
            let mut ks = vec![0; len];
            ChaCha20Rng::from_seed(*key).fill_bytes(&mut ks);
            Some(ks)
        }
        Mode::XorFile => {
            let key = xor_key.ok_or_else(|| Error::usage("payload was hidden with an XOR key file; supply it"))?;
            if key.is_empty() {
                return Err(Error::usage("XOR key file is empty"));
            }
            Some(key.iter().copied().cycle().take(len).collect())
        }
    })
}

impl DiskImage {
    /// Slack extents of files under `root` at depth `<= levels`, ordered by
    /// path then offset.
    pub fn slack_map(&self, root: &str, levels: usize) -> Result<Vec<SlackExtent>> {
        let cb = self.cluster_bytes();
        let mut out = Vec::new();
        for (path, entry) in self.files_in_scope(root, levels)? {
            let Some(&last) = self.chain(entry.main.first).last() else { continue };
            let used = entry.main.size as usize - (self.clusters_for(entry.main.size) - 1) * cb;
            let sector_end = used.div_ceil(SECTOR_SIZE) * SECTOR_SIZE;
            let mut push = |offset: usize, end: usize, kind| {
                if end > offset {
                    out.push(SlackExtent { path: path.clone(), cluster: last, offset, len: end - offset, kind });
                }
            };
            push(used, sector_end, SlackKind::Ram);
            push(sector_end, cb, SlackKind::File);
        }
        Ok(out)
    }

    /// Total bytes `slack_hide` can place under `root`.
    pub fn slack_capacity(&self, root: &str, levels: usize) -> Result<usize> {
        Ok(self
            .slack_map(root, levels)?
            .iter()
            .filter(|e| e.kind == SlackKind::File)
            .map(|e| e.len)
            .sum())
    }

    /// Writes `payload` into file slack and returns the encrypted metadata
    /// needed to get it back. Readable file contents are not touched.
    pub fn slack_hide(&mut self, payload: &[u8], pass: &Passphrase, opts: &SlackHideOptions) -> Result<Vec<u8>> {
        let mut extents: Vec<SlackExtent> = self
            .slack_map(&opts.root, opts.levels)?
            .into_iter()
            .filter(|e| e.kind == SlackKind::File)
            .collect();
        let available: usize = extents.iter().map(|e| e.len).sum();
        if payload.len() > available {
            return Err(Error::Capacity { needed: payload.len(), available });
        }
        match opts.selection {
            Selection::Dumb => {}
            Selection::Random(seed) => extents.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
            Selection::Intelligent => extents.sort_by_key(|e| std::cmp::Reverse(e.len)),
        }

        let (mode, xor_key) = match &opts.obfuscation {
            Obfuscation::None => (Mode::None, None),
            Obfuscation::RandomKey(seed) => {
                let mut key = [0u8; 32];
                ChaCha8Rng::seed_from_u64(*seed).fill_bytes(&mut key);
                (Mode::RandomKey(key), None)
            }
            Obfuscation::XorFile(k) => (Mode::XorFile, Some(k.as_slice())),
        };
        let mut stored = payload.to_vec();
        if let Some(ks) = keystream(&mode, xor_key, payload.len())? {
            stored.iter_mut().zip(ks).for_each(|(b, k)| *b ^= k);
        }

        let cb = self.cluster_bytes();
        let mut chunks = Vec::new();
        let mut rest = stored.as_slice();
        for e in extents {
            if rest.is_empty() {
                break;
            }
            let (piece, tail) = rest.split_at(e.len.min(rest.len()));
            let at = e.cluster as usize * cb + e.offset;
            self.data_mut()[at..at + piece.len()].copy_from_slice(piece);
            chunks.push(Chunk {
                path: e.path,
                cluster: e.cluster,
                offset: e.offset as u32,
                len: piece.len() as u32,
                crc: crc32(piece),
            });
            rest = tail;
        }

        let mut rec = RECORD_MAGIC.to_vec();
        match mode {
            Mode::None => rec.push(0),
            Mode::RandomKey(key) => {
                rec.push(1);
                rec.extend_from_slice(&key);
            }
            Mode::XorFile => rec.push(2),
        }
        put_str(&mut rec, &opts.name)?;
        rec.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        rec.extend_from_slice(&crc32(payload).to_le_bytes());
        rec.extend_from_slice(&(chunks.len() as u32).to_le_bytes());
        for c in &chunks {
            put_str(&mut rec, &c.path)?;
            for v in [c.cluster, c.offset, c.len, c.crc] {
                rec.extend_from_slice(&v.to_le_bytes());
            }
        }
        payload::frame_payload(&rec, "", Some(pass))
    }

    /// Reassembles a payload hidden by [`DiskImage::slack_hide`]. `xor_key`
    /// is required when it was hidden with [`Obfuscation::XorFile`].
    pub fn slack_restore(&self, metadata: &[u8], pass: &Passphrase, xor_key: Option<&[u8]>) -> Result<Unframed> {
        let rec = payload::parse_frame(metadata, Some(pass))?.body;
        let mut r = Cursor { buf: &rec, pos: 0 };
        if r.take(4)? != RECORD_MAGIC {
            return Err(Error::format("metadata is not a slack record list"));
        }
        let mode = match r.take(1)?[0] {
            0 => Mode::None,
            1 => Mode::RandomKey(r.take(32)?.try_into().unwrap()),
            2 => Mode::XorFile,
            m => return Err(Error::format(format!("unknown obfuscation mode {m}"))),
        };
        let name = r.string()?;
        let len = r.u64()? as usize;
        let total_crc = r.u32()?;
        let count = r.u32()?;

        let cb = self.cluster_bytes();
        let mut stored = Vec::new();
        for index in 0..count {
            let path = r.string()?;
            let (cluster, offset, clen, crc) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
            let (cluster, offset, clen) = (cluster as usize, offset as usize, clen as usize);
            if cluster >= self.cluster_count() || offset + clen > cb {
                return Err(Error::format(format!("chunk {index} lies outside the disk")));
            }
            let at = cluster * cb + offset;
            let piece = &self.data()[at..at + clen];
            if crc32(piece) != crc {
                return Err(Error::ChunkCrc { path, chunk: index as usize });
            }
            stored.extend_from_slice(piece);
        }
        if stored.len() != len {
            return Err(Error::format(format!("chunks hold {} bytes, record says {len}", stored.len())));
        }
        if let Some(ks) = keystream(&mode, xor_key, len)? {
            stored.iter_mut().zip(ks).for_each(|(b, k)| *b ^= k);
        }
        if crc32(&stored) != total_crc {
            return Err(Error::CrcMismatch);
        }
        Ok(Unframed { body: stored, name })
    }
}

fn put_str(buf: &mut Vec<u8>, s: &str) -> Result<()> {
    let len: u16 = s.len().try_into().map_err(|_| Error::usage("name longer than 65535 bytes"))?;
    buf.extend_from_slice(&len.to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Truncated("slack metadata record".into()));
        }
        self.pos += n;
        Ok(&self.buf[self.pos - n..self.pos])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let n = u16::from_le_bytes(self.take(2)?.try_into().unwrap()) as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::format("non-UTF-8 text in slack metadata"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pass() -> Passphrase {
        Passphrase::new("slacker").unwrap()
    }

    #[test]
    fn two_hundred_byte_file_slack() {
        let mut d = DiskImage::format(8, 4).unwrap();
        d.write_file("file.txt", &[b'a'; 200]).unwrap();
        let m = d.slack_map("/", 0).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!((m[0].kind, m[0].offset, m[0].len), (SlackKind::Ram, 200, 312));
        assert_eq!((m[1].kind, m[1].offset, m[1].len), (SlackKind::File, 512, 1536));
        assert_eq!(m.iter().map(|e| e.len).sum::<usize>(), 1848);
    }

    #[test]
    fn full_and_empty_files_have_no_slack() {
        let mut d = DiskImage::format(8, 4).unwrap();
        d.write_file("full", &[1; 2048]).unwrap();
        d.write_file("none", &[]).unwrap();
        assert!(d.slack_map("/", 0).unwrap().is_empty());
    }

    #[test]
    fn sector_aligned_file_has_no_ram_slack() {
        let mut d = DiskImage::format(8, 4).unwrap();
        d.write_file("a", &[1; 2048 + 1024]).unwrap();
        let m = d.slack_map("/", 0).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].kind, m[0].cluster, m[0].offset, m[0].len), (SlackKind::File, 1, 1024, 1024));
    }

    #[test]
    fn levels_filter_depth() {
        let mut d = DiskImage::format(16, 1).unwrap();
        d.write_file("top", b"x").unwrap();
        d.write_file("dir/mid", b"x").unwrap();
        d.write_file("dir/sub/deep", b"x").unwrap();
        let paths = |root: &str, l| {
            let mut p: Vec<String> = d.slack_map(root, l).unwrap().into_iter().map(|e| e.path).collect();
            p.dedup();
            p
        };
        assert_eq!(paths("/", 0), ["top"]);
        assert_eq!(paths("/", 1), ["dir/mid", "top"]);
        assert_eq!(paths("/", 2), ["dir/mid", "dir/sub/deep", "top"]);
        assert_eq!(paths("dir", 0), ["dir/mid"]);
        assert!(matches!(d.slack_map("nowhere", 0), Err(Error::Usage(_))));
    }

    #[test]
    fn single_chunk_hide_restore() {
        let mut d = DiskImage::format(8, 4).unwrap();
        d.write_file("carrier", &[b'c'; 200]).unwrap();
        let secret: Vec<u8> = (0..1000).map(|i| (i * 7) as u8).collect();
        let meta = d.slack_hide(&secret, &pass(), &SlackHideOptions::default()).unwrap();
        assert_eq!(&d.read_raw(0).unwrap()[512..1512], &secret[..]);
        assert_eq!(d.read_file("carrier").unwrap(), vec![b'c'; 200]);
        assert_eq!(d.slack_restore(&meta, &pass(), None).unwrap().body, secret);
    }

    #[test]
    fn capacity_boundary() {
        let mut d = DiskImage::format(8, 4).unwrap();
        d.write_file("a", &[1; 200]).unwrap();
        d.write_file("b", &[1; 600]).unwrap();
        let cap = d.slack_capacity("/", 0).unwrap();
        assert_eq!(cap, 1536 + 1024);
        let mut d2 = d.clone();
        assert!(d2.slack_hide(&vec![9; cap], &pass(), &SlackHideOptions::default()).is_ok());
        match d.slack_hide(&vec![9; cap + 1], &pass(), &SlackHideOptions::default()) {
            Err(Error::Capacity { needed, available }) => assert_eq!((needed, available), (cap + 1, cap)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn intelligent_picks_largest_first() {
        let mut d = DiskImage::format(8, 4).unwrap();
        d.write_file("a", &[1; 1500]).unwrap();
        d.write_file("b", &[1; 10]).unwrap();
        let opts = SlackHideOptions { selection: Selection::Intelligent, ..Default::default() };
        d.slack_hide(&[0xAB; 100], &pass(), &opts).unwrap();
        assert_eq!(&d.read_raw(1).unwrap()[512..612], &[0xAB; 100][..]);
        assert!(d.read_raw(0).unwrap()[1536..].iter().all(|&b| b == 0));
    }

    #[test]
    fn obfuscation_hides_plaintext_and_xor_key_is_required() {
        let mut d = DiskImage::format(8, 4).unwrap();
        d.write_file("a", &[1; 10]).unwrap();
        let secret = vec![0u8; 64];
        let opts = SlackHideOptions { obfuscation: Obfuscation::XorFile(b"key!".to_vec()), ..Default::default() };
        let meta = d.slack_hide(&secret, &pass(), &opts).unwrap();
        assert_eq!(&d.read_raw(0).unwrap()[512..516], b"key!");
        assert!(matches!(d.slack_restore(&meta, &pass(), None), Err(Error::Usage(_))));
        assert!(matches!(d.slack_restore(&meta, &pass(), Some(b"nope")), Err(Error::CrcMismatch)));
        assert_eq!(d.slack_restore(&meta, &pass(), Some(b"key!")).unwrap().body, secret);

        let mut d = DiskImage::format(8, 4).unwrap();
        d.write_file("a", &[1; 10]).unwrap();
        let opts = SlackHideOptions { obfuscation: Obfuscation::RandomKey(3), ..Default::default() };
        let meta = d.slack_hide(&secret, &pass(), &opts).unwrap();
        assert_ne!(&d.read_raw(0).unwrap()[512..576], &secret[..]);
        assert_eq!(d.slack_restore(&meta, &pass(), None).unwrap().body, secret);
    }

    #[test]
    fn overwrite_names_the_carrier() {
        let mut d = DiskImage::format(16, 4).unwrap();
        for name in ["a", "b", "c"] {
            d.write_file(name, &[1; 700]).unwrap();
        }
        let meta = d.slack_hide(&[5; 2500], &pass(), &SlackHideOptions::default()).unwrap();
        d.replace_file("b", &[2; 2000]).unwrap();
        match d.slack_restore(&meta, &pass(), None) {
            Err(Error::ChunkCrc { path, chunk }) => assert_eq!((path.as_str(), chunk), ("b", 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_pass_and_garbage_metadata() {
        let mut d = DiskImage::format(8, 4).unwrap();
        d.write_file("a", &[1; 10]).unwrap();
        let meta = d.slack_hide(b"x", &pass(), &SlackHideOptions::default()).unwrap();
        let other = Passphrase::new("other").unwrap();
        assert_eq!(d.slack_restore(&meta, &other, None).unwrap_err().kind(), crate::ErrorKind::Integrity);
        assert!(d.slack_restore(b"garbage", &pass(), None).is_err());
    }

    #[test]
    fn deterministic() {
        let build = || {
            let mut d = DiskImage::format(32, 2).unwrap();
            for (i, n) in ["x/1", "x/2", "y"].iter().enumerate() {
                d.write_file(n, &vec![i as u8; 100 + 300 * i]).unwrap();
            }
            let opts = SlackHideOptions {
                selection: Selection::Random(7),
                obfuscation: Obfuscation::RandomKey(7),
                ..Default::default()
            };
            let meta = d.slack_hide(&[3; 900], &pass(), &opts).unwrap();
            (d.to_bytes(), meta)
        };
        assert_eq!(build(), build());
    }
}
