//! Grammar-driven text mimicry.
//!
//! Payload bits steer a leftmost derivation: every production with several
//! alternatives consumes one codeword of its [`ChoiceCode`]. Once the bits
//! run out, zero bits are fed until the derivation closes (alternative 0
//! everywhere). If bits remain when a derivation closes, a new one starts
//! from the start symbol, so stego text is one or more concatenated
//! derivations. Decoding is an LL(1) parse that replays the codewords.

pub mod code;
pub mod grammar;

use crate::error::{Error, Result};
use crate::payload::bits::{BitReader, BitStream};
use crate::payload::{self, FrameHeader, Passphrase, Unframed, HEADER_LEN};

pub use code::ChoiceCode;
pub use grammar::{MimicGrammar, Symbol, Terminal, ValidationReport, Violation};

use code::Step;

/// Source of the shipped spam-register grammar.
pub const DEFAULT_GRAMMAR: &str = include_str!("../../assets/spam.grammar");

pub fn default_grammar() -> MimicGrammar {
    MimicGrammar::load(DEFAULT_GRAMMAR).expect("shipped grammar is valid")
}

pub fn load_grammar(bytes: &[u8]) -> Result<MimicGrammar> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Format(format!("grammar is not UTF-8: {e}")))?;
    MimicGrammar::load(text)
}

pub fn validate_grammar(g: &MimicGrammar) -> ValidationReport {
    g.validate()
}

enum Frame<'g> {
    Sym(&'g Symbol),
    Start,
}

fn render(out: &mut String, t: &Terminal) {
    if !t.glue && !out.is_empty() {
        out.push(' ');
    }
    out.push_str(&t.text);
}

/// Encodes a serialized payload frame as grammar text.
pub fn mimic_encode(frame: &[u8], g: &MimicGrammar) -> Result<String> {
    g.ensure_valid()?;
    let mut bits = BitReader::new(frame);
    let mut out = String::new();
    loop {
        let mut stack = vec![Frame::Start];
        while let Some(top) = stack.pop() {
            let prod = match top {
                Frame::Start => g.start(),
                Frame::Sym(Symbol::Terminal(t)) => {
                    render(&mut out, t);
                    continue;
                }
                Frame::Sym(Symbol::NonTerminal(n)) => g.lookup(n).expect("validated"),
            };
            let code = g.code(prod);
            let (mut value, mut len) = (0u32, 0u32);
            let alt = loop {
                match code.step(value, len) {
                    Step::Chose(a) => break a,
                    Step::Need => {
                        value = (value << 1) | bits.next_bit().unwrap_or(false) as u32;
                        len += 1;
                    }
                }
            };
            let symbols = &g.productions()[prod].alternatives[alt];
            stack.extend(symbols.iter().rev().map(Frame::Sym));
        }
        if bits.remaining() == 0 {
            return Ok(out);
        }
    }
}

/// Splits text into terminals: whitespace separates words, and glued
/// tokens are peeled off the end of each word.
fn tokenize(text: &str, g: &MimicGrammar) -> Vec<Terminal> {
    let glue = g.glue_tokens();
    let mut by_len: Vec<&str> = glue.into_iter().collect();
    by_len.sort_by_key(|s| std::cmp::Reverse(s.len()));
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let mut rest = word;
        let mut suffixes = Vec::new();
        while let Some(g) = by_len.iter().find(|g| rest.ends_with(**g)) {
            rest = &rest[..rest.len() - g.len()];
            suffixes.push(Terminal { text: g.to_string(), glue: true });
            if rest.is_empty() {
                break;
            }
        }
        if !rest.is_empty() {
            tokens.push(Terminal { text: rest.to_string(), glue: false });
        }
        tokens.extend(suffixes.into_iter().rev());
    }
    tokens
}

/// Replays the derivation(s) behind `text` and returns the choice bits.
pub fn parse_bits(text: &str, g: &MimicGrammar) -> Result<BitStream> {
    g.ensure_valid()?;
    let firsts = g.first_sets();
    let tokens = tokenize(text, g);
    if tokens.is_empty() {
        return Err(Error::Parse { index: 0, message: "empty text".into() });
    }
    let mut bits = BitStream::new();
    let mut pos = 0;
    while pos < tokens.len() {
        let mut stack = vec![Frame::Start];
        while let Some(top) = stack.pop() {
            let prod = match top {
                Frame::Start => g.start(),
                Frame::Sym(Symbol::Terminal(t)) => {
                    match tokens.get(pos) {
                        Some(tok) if tok == t => pos += 1,
                        Some(tok) => {
                            return Err(Error::Parse {
                                index: pos,
                                message: format!("expected {t}, found {tok}"),
                            })
                        }
                        None => {
                            return Err(Error::Parse {
                                index: pos,
                                message: format!("text ends where {t} was expected"),
                            })
                        }
                    }
                    continue;
                }
                Frame::Sym(Symbol::NonTerminal(n)) => g.lookup(n).expect("validated"),
            };
            let p = &g.productions()[prod];
            let alt = if p.alternatives.len() == 1 {
                0
            } else {
                let tok = tokens.get(pos).ok_or_else(|| Error::Parse {
                    index: pos,
                    message: format!("text ends inside <{}>", p.name),
                })?;
                firsts[prod].iter().position(|set| set.contains(tok)).ok_or_else(|| Error::Parse {
                    index: pos,
                    message: format!("{tok} cannot start <{}>", p.name),
                })?
            };
            let (value, len) = g.code(prod).codeword(alt);
            for i in (0..len).rev() {
                bits.push((value >> i) & 1 == 1);
            }
            stack.extend(p.alternatives[alt].iter().rev().map(Frame::Sym));
        }
    }
    Ok(bits)
}

/// True when `text` is a sequence of complete derivations of the grammar.
pub fn is_member(text: &str, g: &MimicGrammar) -> bool {
    parse_bits(text, g).is_ok()
}

/// Recovers the serialized frame (without decrypting or checking it).
pub fn mimic_decode_frame(text: &str, g: &MimicGrammar) -> Result<Vec<u8>> {
    let bits = parse_bits(text, g)?;
    let bytes = bits.whole_bytes();
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated(format!(
            "text carries {} whole bytes, a frame header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    let total = FrameHeader::parse(bytes)?.frame_len();
    if bytes.len() < total {
        return Err(Error::Truncated(format!("frame needs {total} bytes, text carries {}", bytes.len())));
    }
    Ok(bytes[..total].to_vec())
}

pub fn mimic_decode(text: &str, g: &MimicGrammar, pass: Option<&Passphrase>) -> Result<Unframed> {
    payload::parse_frame(&mimic_decode_frame(text, g)?, pass)
}
