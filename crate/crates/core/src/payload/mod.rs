//! Payload framing shared by every carrier.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "STEG"
//! 4       1     version (1)
//! 5       1     flags (bit 0: body is DES-CBC ciphertext)
//! 6       2     name_len (LE)
//! 8       4     body_len (LE)
//! 12      n     name (UTF-8)
//! 12+n    b     body
//! 12+n+b  4     CRC-32 of the plaintext body (LE)
//! ```
//!
//! The frame is self-describing: once the first 12 bytes are known, the total
//! length follows, so carriers can stop reading exactly at the end.

pub mod bits;
pub mod des;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use bits::{from_bits, to_bits, BitReader, BitStream};

pub const MAGIC: [u8; 4] = *b"STEG";
pub const VERSION: u8 = 1;
pub const FLAG_ENCRYPTED: u8 = 0x01;
pub const HEADER_LEN: usize = 12;
pub const CRC_LEN: usize = 4;
/// Bytes a frame adds around an empty name and empty plaintext body.
pub const OVERHEAD: usize = HEADER_LEN + CRC_LEN;

/// A user passphrase. DES key and IV are derived from it with SHA-256.
#[derive(Clone, PartialEq, Eq)]
pub struct Passphrase(String);

impl Passphrase {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.is_empty() {
            return Err(Error::usage("passphrase must not be empty"));
        }
        Ok(Passphrase(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn key(&self) -> [u8; 8] {
        let digest = Sha256::digest(self.0.as_bytes());
        digest[..8].try_into().expect("sha256 is 32 bytes")
    }

    pub fn iv(&self) -> [u8; 8] {
        let mut hasher = Sha256::new();
        hasher.update(self.0.as_bytes());
        hasher.update(b"iv");
        hasher.finalize()[..8].try_into().expect("sha256 is 32 bytes")
    }
}

impl std::fmt::Debug for Passphrase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Passphrase(..)")
    }
}

pub fn crc32(data: &[u8]) -> u32 {
    crc32fast::hash(data)
}

pub fn des_encrypt(plain: &[u8], pass: &Passphrase) -> Vec<u8> {
    des::cbc_encrypt(pass.key(), pass.iv(), plain)
}

pub fn des_decrypt(cipher: &[u8], pass: &Passphrase) -> Result<Vec<u8>> {
    des::cbc_decrypt(pass.key(), pass.iv(), cipher)
}

/// Fixed-size prefix of a frame; enough to learn how many bytes follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub flags: u8,
    pub name_len: u16,
    pub body_len: u32,
}

impl FrameHeader {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Truncated(format!(
                "frame header needs {HEADER_LEN} bytes, got {}",
                bytes.len()
            )));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes[4] != VERSION {
            return Err(Error::format(format!("frame version {} (expected {VERSION})", bytes[4])));
        }
        let flags = bytes[5];
        if flags & !FLAG_ENCRYPTED != 0 {
            return Err(Error::format(format!("reserved frame flag bits set: {flags:#04x}")));
        }
        Ok(FrameHeader {
            flags,
            name_len: u16::from_le_bytes([bytes[6], bytes[7]]),
            body_len: u32::from_le_bytes(bytes[8..12].try_into().unwrap()),
        })
    }

    pub fn encrypted(&self) -> bool {
        self.flags & FLAG_ENCRYPTED != 0
    }

    /// Length of the whole serialized frame, header and CRC included.
    pub fn frame_len(&self) -> usize {
        HEADER_LEN + self.name_len as usize + self.body_len as usize + CRC_LEN
    }
}

/// A decoded frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unframed {
    pub body: Vec<u8>,
    pub name: String,
}

pub fn frame_payload(body: &[u8], name: &str, pass: Option<&Passphrase>) -> Result<Vec<u8>> {
    if name.len() > u16::MAX as usize {
        return Err(Error::usage(format!("name is {} bytes, limit is {}", name.len(), u16::MAX)));
    }
    let crc = crc32(body);
    let (flags, stored) = match pass {
        Some(p) => (FLAG_ENCRYPTED, des_encrypt(body, p)),
        None => (0, body.to_vec()),
    };
    let body_len = u32::try_from(stored.len())
        .map_err(|_| Error::usage(format!("body of {} bytes exceeds 4 GiB", stored.len())))?;

    let mut out = Vec::with_capacity(OVERHEAD + name.len() + stored.len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(flags);
    out.extend_from_slice(&(name.len() as u16).to_le_bytes());
    out.extend_from_slice(&body_len.to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    out.extend_from_slice(&stored);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

/// Parses the frame at the start of `data`. Bytes after the frame are ignored.
pub fn parse_frame(data: &[u8], pass: Option<&Passphrase>) -> Result<Unframed> {
    let header = FrameHeader::parse(data)?;
    let total = header.frame_len();
    if data.len() < total {
        return Err(Error::Truncated(format!("frame needs {total} bytes, got {}", data.len())));
    }
    let name_end = HEADER_LEN + header.name_len as usize;
    let body_end = name_end + header.body_len as usize;
    let name = std::str::from_utf8(&data[HEADER_LEN..name_end])
        .map_err(|_| Error::format("frame name is not UTF-8"))?
        .to_string();
    let stored = &data[name_end..body_end];
    let crc = u32::from_le_bytes(data[body_end..total].try_into().unwrap());

    let body = if header.encrypted() {
        let pass = pass.ok_or(Error::PassphraseRequired)?;
        // A wrong key nearly always breaks the padding; report it like a CRC miss.
        des_decrypt(stored, pass).map_err(|e| match e {
            Error::BadPadding => Error::CrcMismatch,
            other => other,
        })?
    } else {
        stored.to_vec()
    };
    if crc32(&body) != crc {
        return Err(Error::CrcMismatch);
    }
    Ok(Unframed { body, name })
}
