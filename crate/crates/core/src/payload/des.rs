//! Single DES (FIPS 46-3) with CBC chaining and PKCS#7 padding.
//!
//! DES is here because the hiding tool it reproduces used it. It is not a
//! secure cipher and nothing in this crate should be read as claiming otherwise.

use crate::error::{Error, Result};

pub const BLOCK_LEN: usize = 8;

const IP: [u8; 64] = [
    58, 50, 42, 34, 26, 18, 10, 2, 60, 52, 44, 36, 28, 20, 12, 4, 62, 54, 46, 38, 30, 22, 14, 6,
    64, 56, 48, 40, 32, 24, 16, 8, 57, 49, 41, 33, 25, 17, 9, 1, 59, 51, 43, 35, 27, 19, 11, 3,
    61, 53, 45, 37, 29, 21, 13, 5, 63, 55, 47, 39, 31, 23, 15, 7,
];

const FP: [u8; 64] = [
    40, 8, 48, 16, 56, 24, 64, 32, 39, 7, 47, 15, 55, 23, 63, 31, 38, 6, 46, 14, 54, 22, 62, 30,
    37, 5, 45, 13, 53, 21, 61, 29, 36, 4, 44, 12, 52, 20, 60, 28, 35, 3, 43, 11, 51, 19, 59, 27,
    34, 2, 42, 10, 50, 18, 58, 26, 33, 1, 41, 9, 49, 17, 57, 25,
];

const E: [u8; 48] = [
    32, 1, 2, 3, 4, 5, 4, 5, 6, 7, 8, 9, 8, 9, 10, 11, 12, 13, 12, 13, 14, 15, 16, 17, 16, 17, 18,
    19, 20, 21, 20, 21, 22, 23, 24, 25, 24, 25, 26, 27, 28, 29, 28, 29, 30, 31, 32, 1,
];

const P: [u8; 32] = [
    16, 7, 20, 21, 29, 12, 28, 17, 1, 15, 23, 26, 5, 18, 31, 10, 2, 8, 24, 14, 32, 27, 3, 9, 19,
    13, 30, 6, 22, 11, 4, 25,
];

const PC1: [u8; 56] = [
    57, 49, 41, 33, 25, 17, 9, 1, 58, 50, 42, 34, 26, 18, 10, 2, 59, 51, 43, 35, 27, 19, 11, 3,
    60, 52, 44, 36, 63, 55, 47, 39, 31, 23, 15, 7, 62, 54, 46, 38, 30, 22, 14, 6, 61, 53, 45, 37,
    29, 21, 13, 5, 28, 20, 12, 4,
];

const PC2: [u8; 48] = [
    14, 17, 11, 24, 1, 5, 3, 28, 15, 6, 21, 10, 23, 19, 12, 4, 26, 8, 16, 7, 27, 20, 13, 2, 41,
    52, 31, 37, 47, 55, 30, 40, 51, 45, 33, 48, 44, 49, 39, 56, 34, 53, 46, 42, 50, 36, 29, 32,
];

const SHIFTS: [u32; 16] = [1, 1, 2, 2, 2, 2, 2, 2, 1, 2, 2, 2, 2, 2, 2, 1];

const SBOX: [[u8; 64]; 8] = [
    [
        14, 4, 13, 1, 2, 15, 11, 8, 3, 10, 6, 12, 5, 9, 0, 7, 0, 15, 7, 4, 14, 2, 13, 1, 10, 6,
        12, 11, 9, 5, 3, 8, 4, 1, 14, 8, 13, 6, 2, 11, 15, 12, 9, 7, 3, 10, 5, 0, 15, 12, 8, 2, 4,
        9, 1, 7, 5, 11, 3, 14, 10, 0, 6, 13,
    ],
    [
        15, 1, 8, 14, 6, 11, 3, 4, 9, 7, 2, 13, 12, 0, 5, 10, 3, 13, 4, 7, 15, 2, 8, 14, 12, 0, 1,
        10, 6, 9, 11, 5, 0, 14, 7, 11, 10, 4, 13, 1, 5, 8, 12, 6, 9, 3, 2, 15, 13, 8, 10, 1, 3,
        15, 4, 2, 11, 6, 7, 12, 0, 5, 14, 9,
    ],
    [
        10, 0, 9, 14, 6, 3, 15, 5, 1, 13, 12, 7, 11, 4, 2, 8, 13, 7, 0, 9, 3, 4, 6, 10, 2, 8, 5,
        14, 12, 11, 15, 1, 13, 6, 4, 9, 8, 15, 3, 0, 11, 1, 2, 12, 5, 10, 14, 7, 1, 10, 13, 0, 6,
        9, 8, 7, 4, 15, 14, 3, 11, 5, 2, 12,
    ],
    [
        7, 13, 14, 3, 0, 6, 9, 10, 1, 2, 8, 5, 11, 12, 4, 15, 13, 8, 11, 5, 6, 15, 0, 3, 4, 7, 2,
        12, 1, 10, 14, 9, 10, 6, 9, 0, 12, 11, 7, 13, 15, 1, 3, 14, 5, 2, 8, 4, 3, 15, 0, 6, 10,
        1, 13, 8, 9, 4, 5, 11, 12, 7, 2, 14,
    ],
    [
        2, 12, 4, 1, 7, 10, 11, 6, 8, 5, 3, 15, 13, 0, 14, 9, 14, 11, 2, 12, 4, 7, 13, 1, 5, 0,
        15, 10, 3, 9, 8, 6, 4, 2, 1, 11, 10, 13, 7, 8, 15, 9, 12, 5, 6, 3, 0, 14, 11, 8, 12, 7, 1,
        14, 2, 13, 6, 15, 0, 9, 10, 4, 5, 3,
    ],
    [
        12, 1, 10, 15, 9, 2, 6, 8, 0, 13, 3, 4, 14, 7, 5, 11, 10, 15, 4, 2, 7, 12, 9, 5, 6, 1, 13,
        14, 0, 11, 3, 8, 9, 14, 15, 5, 2, 8, 12, 3, 7, 0, 4, 10, 1, 13, 11, 6, 4, 3, 2, 12, 9, 5,
        15, 10, 11, 14, 1, 7, 6, 0, 8, 13,
    ],
    [
        4, 11, 2, 14, 15, 0, 8, 13, 3, 12, 9, 7, 5, 10, 6, 1, 13, 0, 11, 7, 4, 9, 1, 10, 14, 3, 5,
        12, 2, 15, 8, 6, 1, 4, 11, 13, 12, 3, 7, 14, 10, 15, 6, 8, 0, 5, 9, 2, 6, 11, 13, 8, 1, 4,
        10, 7, 9, 5, 0, 15, 14, 2, 3, 12,
    ],
    [
        13, 2, 8, 4, 6, 15, 11, 1, 10, 9, 3, 14, 5, 0, 12, 7, 1, 15, 13, 8, 10, 3, 7, 4, 12, 5, 6,
        11, 0, 14, 9, 2, 7, 11, 4, 1, 9, 12, 14, 2, 0, 6, 10, 13, 15, 3, 5, 8, 2, 1, 14, 7, 4, 10,
        8, 13, 15, 12, 9, 0, 3, 5, 6, 11,
    ],
];

/// Table positions are 1-based counting from the most significant of `width` bits.
fn permute(input: u64, width: u32, table: &[u8]) -> u64 {
    table
        .iter()
        .fold(0, |out, &pos| (out << 1) | ((input >> (width - pos as u32)) & 1))
}

fn feistel(right: u32, subkey: u64) -> u32 {
    let expanded = permute(right as u64, 32, &E) ^ subkey;
    let mut sboxed = 0u32;
    for (i, sbox) in SBOX.iter().enumerate() {
        let six = ((expanded >> (42 - 6 * i)) & 0x3f) as usize;
        let row = ((six & 0x20) >> 4) | (six & 1);
        let col = (six >> 1) & 0xf;
        sboxed = (sboxed << 4) | sbox[row * 16 + col] as u32;
    }
    permute(sboxed as u64, 32, &P) as u32
}

/// A keyed DES block cipher.
#[derive(Clone)]
pub struct Des {
    subkeys: [u64; 16],
}

impl Des {
    pub fn new(key: [u8; 8]) -> Self {
        let cd = permute(u64::from_be_bytes(key), 64, &PC1);
        let mut c = (cd >> 28) as u32 & 0x0fff_ffff;
        let mut d = cd as u32 & 0x0fff_ffff;
        let mut subkeys = [0u64; 16];
        for (subkey, &shift) in subkeys.iter_mut().zip(SHIFTS.iter()) {
            c = ((c << shift) | (c >> (28 - shift))) & 0x0fff_ffff;
            d = ((d << shift) | (d >> (28 - shift))) & 0x0fff_ffff;
            *subkey = permute(((c as u64) << 28) | d as u64, 56, &PC2);
        }
        Des { subkeys }
    }

    fn crypt(&self, block: u64, decrypt: bool) -> u64 {
        let permuted = permute(block, 64, &IP);
        let mut left = (permuted >> 32) as u32;
        let mut right = permuted as u32;
        for round in 0..16 {
            let k = if decrypt { self.subkeys[15 - round] } else { self.subkeys[round] };
            let next = left ^ feistel(right, k);
            left = right;
            right = next;
        }
        // final swap: R16 L16
        permute(((right as u64) << 32) | left as u64, 64, &FP)
    }

    pub fn encrypt_block(&self, block: [u8; 8]) -> [u8; 8] {
        self.crypt(u64::from_be_bytes(block), false).to_be_bytes()
    }

    pub fn decrypt_block(&self, block: [u8; 8]) -> [u8; 8] {
        self.crypt(u64::from_be_bytes(block), true).to_be_bytes()
    }
}

/// CBC-encrypts `plain` after PKCS#7 padding. Output length is `8 * (len / 8 + 1)`.
pub fn cbc_encrypt(key: [u8; 8], iv: [u8; 8], plain: &[u8]) -> Vec<u8> {
    let cipher = Des::new(key);
    let pad = BLOCK_LEN - plain.len() % BLOCK_LEN;
    let mut padded = plain.to_vec();
    padded.extend(std::iter::repeat_n(pad as u8, pad));

    let mut chain = iv;
    let mut out = Vec::with_capacity(padded.len());
    for block in padded.chunks_exact(BLOCK_LEN) {
        let mut input = [0u8; 8];
        for (i, b) in input.iter_mut().enumerate() {
            *b = block[i] ^ chain[i];
        }
        chain = cipher.encrypt_block(input);
        out.extend_from_slice(&chain);
    }
    out
}

pub fn cbc_decrypt(key: [u8; 8], iv: [u8; 8], data: &[u8]) -> Result<Vec<u8>> {
    if data.is_empty() || !data.len().is_multiple_of(BLOCK_LEN) {
        return Err(Error::usage(format!(
            "ciphertext length {} is not a positive multiple of {BLOCK_LEN}",
            data.len()
        )));
    }
    let cipher = Des::new(key);
    let mut chain = iv;
    let mut out = Vec::with_capacity(data.len());
    for block in data.chunks_exact(BLOCK_LEN) {
        let block: [u8; 8] = block.try_into().expect("chunk of 8");
        let plain = cipher.decrypt_block(block);
        out.extend(plain.iter().zip(chain.iter()).map(|(p, c)| p ^ c));
        chain = block;
    }

    let pad = *out.last().expect("non-empty") as usize;
    if pad == 0 || pad > BLOCK_LEN || out[out.len() - pad..].iter().any(|&b| b as usize != pad) {
        return Err(Error::BadPadding);
    }
    out.truncate(out.len() - pad);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex8(s: &str) -> [u8; 8] {
        let v: Vec<u8> = (0..16)
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
            .collect();
        v.try_into().unwrap()
    }

    #[test]
    fn textbook_known_answer() {
        let des = Des::new(hex8("133457799BBCDFF1"));
        let ct = des.encrypt_block(hex8("0123456789ABCDEF"));
        assert_eq!(ct, hex8("85E813540F0AB405"));
        assert_eq!(des.decrypt_block(ct), hex8("0123456789ABCDEF"));
    }

    #[test]
    fn nist_variable_plaintext_vectors() {
        // SP 800-17 Table A.1, first two rows (key 0101010101010101).
        let des = Des::new(hex8("0101010101010101"));
        assert_eq!(des.encrypt_block(hex8("8000000000000000")), hex8("95F8A5E5DD31D900"));
        assert_eq!(des.encrypt_block(hex8("4000000000000000")), hex8("DD7F121CA5015619"));
    }

    #[test]
    fn padded_length() {
        for len in 0..40 {
            let ct = cbc_encrypt([1; 8], [2; 8], &vec![0xAA; len]);
            assert_eq!(ct.len(), 8 * ((len + 1).div_ceil(8)));
            assert_eq!(cbc_decrypt([1; 8], [2; 8], &ct).unwrap(), vec![0xAA; len]);
        }
    }

    #[test]
    fn chaining_propagates_first_block() {
        let a = cbc_encrypt([7; 8], [0; 8], b"AAAAAAAABBBBBBBB");
        let b = cbc_encrypt([7; 8], [0; 8], b"AAAAAAAXBBBBBBBB");
        assert_ne!(a[8..16], b[8..16]);
    }

    #[test]
    fn ragged_ciphertext_rejected() {
        assert!(matches!(cbc_decrypt([0; 8], [0; 8], &[1, 2, 3]), Err(Error::Usage(_))));
        assert!(matches!(cbc_decrypt([0; 8], [0; 8], &[]), Err(Error::Usage(_))));
    }
}
