//! Canonical prefix codes for equal-weight choices.
//!
//! With `m` equally likely alternatives an optimal code uses lengths
//! `L - 1` and `L`, `L = ceil(log2 m)`. The `2^L - m` short codewords go to
//! the lowest-indexed alternatives and codewords are assigned canonically,
//! so alternative 0 always gets the all-zero codeword.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceCode {
    alternatives: usize,
    long_len: u32,
    short_count: usize,
}

/// Outcome of feeding one more bit to a [`ChoiceCode`] decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Need,
    Chose(usize),
}

impl ChoiceCode {
    pub fn new(alternatives: usize) -> Self {
        assert!(alternatives >= 1);
        let long_len = alternatives.next_power_of_two().trailing_zeros();
        ChoiceCode {
            alternatives,
            long_len,
            short_count: (1usize << long_len) - alternatives,
        }
    }

    pub fn alternatives(&self) -> usize {
        self.alternatives
    }

    /// Codeword for `alt`: (value, length), value read MSB-first.
    pub fn codeword(&self, alt: usize) -> (u32, u32) {
        assert!(alt < self.alternatives);
        if alt < self.short_count {
            (alt as u32, self.long_len - 1)
        } else {
            ((2 * self.short_count + (alt - self.short_count)) as u32, self.long_len)
        }
    }

    /// Given the bits read so far (`value` of length `len`), decides whether
    /// they form a complete codeword. A single alternative needs no bits.
    pub fn step(&self, value: u32, len: u32) -> Step {
        if self.alternatives == 1 {
            return Step::Chose(0);
        }
        if len + 1 == self.long_len && (value as usize) < self.short_count {
            return Step::Chose(value as usize);
        }
        if len == self.long_len {
            return Step::Chose(self.short_count + value as usize - 2 * self.short_count);
        }
        Step::Need
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    /// Code lengths from an actual Huffman merge over equal weights.
    fn huffman_lengths(m: usize) -> Vec<u32> {
        if m == 1 {
            return vec![0];
        }
        let mut heap: BinaryHeap<Reverse<(u64, usize, Vec<usize>)>> =
            (0..m).map(|i| Reverse((1, i, vec![i]))).collect();
        let mut lengths = vec![0u32; m];
        let mut next_id = m;
        while heap.len() > 1 {
            let Reverse((wa, _, a)) = heap.pop().unwrap();
            let Reverse((wb, _, b)) = heap.pop().unwrap();
            for &leaf in a.iter().chain(&b) {
                lengths[leaf] += 1;
            }
            heap.push(Reverse((wa + wb, next_id, [a, b].concat())));
            next_id += 1;
        }
        lengths
    }

    #[test]
    fn lengths_match_huffman() {
        for m in 1..=40 {
            let code = ChoiceCode::new(m);
            let mut ours: Vec<u32> = (0..m).map(|a| code.codeword(a).1).collect();
            let mut theirs = huffman_lengths(m);
            ours.sort();
            theirs.sort();
            assert_eq!(ours, theirs, "m = {m}");
        }
    }

    #[test]
    fn prefix_free_and_complete() {
        for m in 2..=40 {
            let code = ChoiceCode::new(m);
            let words: Vec<String> = (0..m)
                .map(|a| {
                    let (v, l) = code.codeword(a);
                    (0..l).rev().map(|i| if v >> i & 1 == 1 { '1' } else { '0' }).collect()
                })
                .collect();
            for (i, a) in words.iter().enumerate() {
                for (j, b) in words.iter().enumerate() {
                    assert!(i == j || !b.starts_with(a.as_str()), "m={m}: {a} prefixes {b}");
                }
            }
            let kraft: f64 = words.iter().map(|w| 0.5f64.powi(w.len() as i32)).sum();
            assert!((kraft - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_tables() {
        let c = ChoiceCode::new(3);
        assert_eq!((0..3).map(|a| c.codeword(a)).collect::<Vec<_>>(), [(0, 1), (2, 2), (3, 2)]);
        let c = ChoiceCode::new(5);
        assert_eq!(
            (0..5).map(|a| c.codeword(a)).collect::<Vec<_>>(),
            [(0, 2), (1, 2), (2, 2), (6, 3), (7, 3)]
        );
        assert_eq!(ChoiceCode::new(1).codeword(0), (0, 0));
    }

    #[test]
    fn step_decodes_every_codeword() {
        for m in 1..=20 {
            let code = ChoiceCode::new(m);
            for alt in 0..m {
                let (v, l) = code.codeword(alt);
                let mut got = None;
                for n in 0..=l {
                    if let Step::Chose(a) = code.step(v >> (l - n), n) {
                        got = Some((a, n));
                        break;
                    }
                }
                assert_eq!(got, Some((alt, l)), "m={m} alt={alt}");
            }
        }
    }
}
