//! Low-bit substitution over an ordered sequence of carrier bytes.
//!
//! Each carrier byte holds `k` stream bits in its `k` low positions, the
//! earlier stream bit in position `k - 1`. Carrier bytes past the end of the
//! stream keep their cover values, as do the unused low bits of a final
//! partially filled byte.

use crate::error::{Error, Result};
use crate::payload::bits::{BitReader, ByteCollector};
use crate::payload::{self, FrameHeader, Passphrase, Unframed, HEADER_LEN};

/// Number of low bits per carrier byte that carry payload (1..=8).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitDepth(u8);

impl BitDepth {
    pub fn new(k: u8) -> Result<Self> {
        if (1..=8).contains(&k) {
            Ok(BitDepth(k))
        } else {
            Err(Error::usage(format!("bit depth must be in 1..=8, got {k}")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = BitDepth> {
        (1..=8).map(BitDepth)
    }
}

/// Whole payload bytes that `slots` carrier bytes can hold at depth `k`.
pub fn capacity_bytes(slots: usize, k: BitDepth) -> usize {
    slots * k.0 as usize / 8
}

pub fn embed_slots<'a>(
    slots: impl ExactSizeIterator<Item = &'a mut u8>,
    stream: &[u8],
    k: BitDepth,
) -> Result<()> {
    let available = capacity_bytes(slots.len(), k);
    if stream.len() * 8 > slots.len() * k.0 as usize {
        return Err(Error::Capacity {
            needed: stream.len(),
            available,
        });
    }
    let k = k.0 as u32;
    let mut reader = BitReader::new(stream);
    for slot in slots {
        let (value, got) = reader.read_up_to(k);
        if got == 0 {
            break;
        }
        // `got` bits land at positions k-1 .. k-got.
        let shift = k - got;
        let mask = (((1u16 << got) - 1) << shift) as u8;
        *slot = (*slot & !mask) | ((value << shift) & mask);
    }
    Ok(())
}

/// Reads `n` bytes of stream from the carrier bytes, or fewer if the carrier runs out.
pub fn read_stream<'a>(slots: impl Iterator<Item = &'a u8>, n: usize, k: BitDepth) -> Vec<u8> {
    let k = k.0 as u32;
    let mask = ((1u16 << k) - 1) as u8;
    let mut collector = ByteCollector::default();
    for &slot in slots {
        if collector.bytes().len() >= n {
            break;
        }
        collector.push_bits(slot & mask, k);
    }
    let mut out = collector.bytes().to_vec();
    out.truncate(n);
    out
}

/// Locates and decodes a payload frame at the start of the carrier's bit stream.
pub fn extract_frame(slots: &[u8], k: BitDepth, pass: Option<&Passphrase>) -> Result<Unframed> {
    let head = read_stream(slots.iter(), HEADER_LEN, k);
    if head.len() < 4 || head[..4] != payload::MAGIC {
        return Err(Error::BadMagic);
    }
    let header = FrameHeader::parse(&head)?;
    let total = header.frame_len();
    let available = capacity_bytes(slots.len(), k);
    if total > available {
        return Err(Error::Truncated(format!(
            "frame claims {total} bytes but the carrier holds {available} at k={}",
            k.0
        )));
    }
    let frame = read_stream(slots.iter(), total, k);
    payload::parse_frame(&frame, pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_range() {
        assert!(BitDepth::new(0).is_err());
        assert!(BitDepth::new(9).is_err());
        assert_eq!(BitDepth::all().count(), 8);
    }

    #[test]
    fn eight_ones_into_zero_bytes() {
        let mut cover = [0u8; 8];
        embed_slots(cover.iter_mut(), &[0xFF], BitDepth::new(1).unwrap()).unwrap();
        assert_eq!(cover, [1u8; 8]);
    }

    #[test]
    fn two_bit_position_rule() {
        let mut cover = [0xFFu8; 4];
        embed_slots(cover.iter_mut(), &[0b1011_0100], BitDepth::new(2).unwrap()).unwrap();
        assert_eq!(cover, [0xFE, 0xFF, 0xFD, 0xFC]);
    }

    #[test]
    fn partial_final_group_keeps_low_cover_bits() {
        // 8 bits at k=3: groups 101, 101, 01 -> the last byte gets 01 in positions 2..1.
        let mut cover = [0xFFu8; 4];
        embed_slots(cover.iter_mut(), &[0b1011_0101], BitDepth::new(3).unwrap()).unwrap();
        assert_eq!(cover, [0xFD, 0xFD, 0b1111_1011, 0xFF]);
        assert_eq!(read_stream(cover.iter(), 1, BitDepth::new(3).unwrap()), [0b1011_0101]);
    }

    #[test]
    fn capacity_error_reports_sizes() {
        let mut cover = [0u8; 7];
        match embed_slots(cover.iter_mut(), &[1], BitDepth::new(1).unwrap()) {
            Err(Error::Capacity { needed, available }) => assert_eq!((needed, available), (1, 0)),
            other => panic!("{other:?}"),
        }
    }
}
