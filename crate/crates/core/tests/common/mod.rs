//! Helpers shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, RngExt};

/// Bit-at-a-time reflected CRC-32 (polynomial 0xEDB88320), no tables.
pub fn crc32_bitwise(data: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &b in data {
        crc ^= b as u32;
        for _ in 0..8 {
            crc = if crc & 1 == 1 { (crc >> 1) ^ 0xEDB8_8320 } else { crc >> 1 };
        }
    }
    !crc
}

/// Source text of a random grammar that satisfies the mimic validator.
///
/// Every alternative opens with a terminal unique to it, or with a reference
/// to a later production that nothing else opens with and whose own
/// alternatives all open with unique terminals, so FIRST sets never overlap.
/// Alternative 0 only refers forward, so it always terminates. Later
/// alternatives may refer back (never in first position), and the start
/// production's last alternative ends by recursing into itself.
pub fn random_grammar<R: Rng>(rng: &mut R) -> String {
    const WORDS: [&str; 6] = ["alpha", "beta", "gamma", "delta", "and", "the"];
    const GLUE: [&str; 3] = ["~,", "~!", "~."];
    let n = rng.random_range(2..7usize);
    let mut out = String::new();
    let mut openers: Vec<usize> = Vec::new();
    for i in 0..n {
        let m = if i == 0 { rng.random_range(2..5) } else { rng.random_range(1..5) };
        out.push_str(&format!("p{i}:\n"));
        for a in 0..m {
            let mut alt: Vec<String> = Vec::new();
            let later: Vec<usize> = (i + 1..n).filter(|j| !openers.contains(j)).collect();
            if !openers.contains(&i) && !later.is_empty() && rng.random_bool(0.3) {
                let j = later[rng.random_range(0..later.len())];
                openers.push(j);
                alt.push(format!("<p{j}>"));
            } else {
                alt.push(format!("w{i}x{a}"));
            }
            for _ in 0..rng.random_range(0..4) {
                let roll = rng.random_range(0..10);
                if roll < 4 {
                    alt.push(WORDS[rng.random_range(0..WORDS.len())].into());
                } else if roll < 6 {
                    alt.push(GLUE[rng.random_range(0..GLUE.len())].into());
                } else if roll < 8 && i + 1 < n {
                    alt.push(format!("<p{}>", rng.random_range(i + 1..n)));
                } else if a > 0 {
                    alt.push(format!("<p{}>", rng.random_range(0..=i)));
                }
            }
            if i == 0 && a == m - 1 {
                alt.push("<p0>".into());
            }
            out.push_str(&format!("| {}\n", alt.join(" ")));
        }
    }
    out
}
