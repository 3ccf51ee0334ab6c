//! MSB-first bit streams.

use crate::error::{Error, Result};

/// A growable sequence of bits, packed MSB-first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitStream {
    bytes: Vec<u8>,
    len: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        (index < self.len).then(|| self.bytes[index / 8] & (0x80 >> (index % 8)) != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.bytes[i / 8] & (0x80 >> (i % 8)) != 0)
    }

    /// Bytes completed so far; a trailing partial byte is left out.
    pub fn whole_bytes(&self) -> &[u8] {
        &self.bytes[..self.len / 8]
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut s = BitStream::new();
        for b in iter {
            s.push(b);
        }
        s
    }
}

pub fn to_bits(data: &[u8]) -> BitStream {
    BitStream {
        bytes: data.to_vec(),
        len: data.len() * 8,
    }
}

pub fn from_bits(bits: &BitStream) -> Result<Vec<u8>> {
    if !bits.len.is_multiple_of(8) {
        return Err(Error::usage(format!("bit count {} is not a multiple of 8", bits.len)));
    }
    Ok(bits.bytes.clone())
}

/// Cursor over a borrowed byte slice, reading MSB-first.
pub struct BitReader<'a> {
    data: &'a [u8],
    cursor: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        BitReader { data, cursor: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.data.len() * 8 - self.cursor
    }

    pub fn next_bit(&mut self) -> Option<bool> {
        let byte = self.data.get(self.cursor / 8)?;
        let bit = byte & (0x80 >> (self.cursor % 8)) != 0;
        self.cursor += 1;
        Some(bit)
    }

    /// Reads up to `k` bits as an integer, earliest bit most significant.
    /// Returns the value and how many bits were actually available.
    pub fn read_up_to(&mut self, k: u32) -> (u8, u32) {
        let mut value = 0u8;
        let mut got = 0;
        while got < k {
            match self.next_bit() {
                Some(b) => {
                    value = (value << 1) | b as u8;
                    got += 1;
                }
                None => break,
            }
        }
        (value, got)
    }
}

/// Accumulates k-bit groups back into bytes (the inverse of `BitReader::read_up_to`).
#[derive(Default)]
pub(crate) struct ByteCollector {
    out: Vec<u8>,
    acc: u16,
    nbits: u32,
}

impl ByteCollector {
    pub fn push_bits(&mut self, value: u8, k: u32) {
        for i in (0..k).rev() {
            self.acc = (self.acc << 1) | ((value >> i) & 1) as u16;
            self.nbits += 1;
            if self.nbits == 8 {
                self.out.push(self.acc as u8);
                self.acc = 0;
                self.nbits = 0;
            }
        }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn letter_a_msb_first() {
        let bits: Vec<bool> = to_bits(&[0x41]).iter().collect();
        let expect = [false, true, false, false, false, false, false, true];
        assert_eq!(bits, expect);
        assert!(to_bits(&[0]).iter().all(|b| !b));
    }

    #[test]
    fn ragged_rejected() {
        let s: BitStream = [true, false, true].into_iter().collect();
        assert!(matches!(from_bits(&s), Err(Error::Usage(_))));
    }

    #[test]
    fn reader_groups() {
        let mut r = BitReader::new(&[0b1011_0100]);
        assert_eq!(r.read_up_to(2), (0b10, 2));
        assert_eq!(r.read_up_to(3), (0b110, 3));
        assert_eq!(r.read_up_to(5), (0b100, 3));
        assert_eq!(r.remaining(), 0);
    }

    proptest! {
        #[test]
        fn bijective(data in proptest::collection::vec(any::<u8>(), 0..64)) {
            let s = to_bits(&data);
            prop_assert_eq!(s.len(), data.len() * 8);
            let rebuilt: BitStream = s.iter().collect();
            prop_assert_eq!(from_bits(&rebuilt).unwrap(), data);
        }
    }
}
