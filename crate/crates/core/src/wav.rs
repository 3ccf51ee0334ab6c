//! 16-bit PCM WAV codec, sample-LSB hiding, and tone injection.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lsb::{self, BitDepth};
use crate::payload::{Passphrase, Unframed};

const FORMAT_PCM: u16 = 1;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// A decoded PCM file. Bytes before and after the sample data are kept so an
/// untouched file re-serializes exactly; the sample count is fixed after load.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WavAudio {
    sample_rate: u32,
    channels: u16,
    prefix: Vec<u8>,
    samples: Vec<i16>,
    trailer: Vec<u8>,
}

impl WavAudio {
    /// Builds a canonical 44-byte-header file around interleaved samples.
    pub fn new(sample_rate: u32, channels: u16, samples: Vec<i16>) -> Result<Self> {
        if !(1..=2).contains(&channels) {
            return Err(Error::usage(format!("channels must be 1 or 2, got {channels}")));
        }
        if !samples.len().is_multiple_of(channels as usize) {
            return Err(Error::usage("sample count is not a whole number of frames"));
        }
        let data_len = (samples.len() * 2) as u32;
        let block_align = channels * 2;
        let mut p = Vec::with_capacity(44);
        p.extend_from_slice(b"RIFF");
        p.extend_from_slice(&(36 + data_len).to_le_bytes());
        p.extend_from_slice(b"WAVE");
        p.extend_from_slice(b"fmt ");
        p.extend_from_slice(&16u32.to_le_bytes());
        p.extend_from_slice(&FORMAT_PCM.to_le_bytes());
        p.extend_from_slice(&channels.to_le_bytes());
        p.extend_from_slice(&sample_rate.to_le_bytes());
        p.extend_from_slice(&(sample_rate * block_align as u32).to_le_bytes());
        p.extend_from_slice(&block_align.to_le_bytes());
        p.extend_from_slice(&16u16.to_le_bytes());
        p.extend_from_slice(b"data");
        p.extend_from_slice(&data_len.to_le_bytes());
        let trailer = if data_len % 2 == 1 { vec![0] } else { Vec::new() };
        Ok(WavAudio {
            sample_rate,
            channels,
            prefix: p,
            samples,
            trailer,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> u16 {
        self.channels
    }

    /// Interleaved samples.
    pub fn samples(&self) -> &[i16] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [i16] {
        &mut self.samples
    }

    pub fn frames(&self) -> usize {
        self.samples.len() / self.channels as usize
    }

    /// Channel-averaged signal scaled to [-1, 1).
    pub fn to_signal(&self) -> Vec<f64> {
        self.samples
            .chunks_exact(self.channels as usize)
            .map(|frame| frame.iter().map(|&s| s as f64 / 32768.0).sum::<f64>() / frame.len() as f64)
            .collect()
    }
}

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

pub fn load_wav(data: &[u8]) -> Result<WavAudio> {
    if data.len() < 12 || &data[..4] != b"RIFF" || &data[8..12] != b"WAVE" {
        return Err(Error::format("not a RIFF/WAVE file"));
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u32)> = None;
    while pos + 8 <= data.len() {
        let id = &data[pos..pos + 4];
        let size = le_u32(data, pos + 4) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if size < 16 || body + size > data.len() {
                    return Err(Error::format("fmt chunk too short"));
                }
                let code = le_u16(data, body);
                let channels = le_u16(data, body + 2);
                let rate = le_u32(data, body + 4);
                let bits = le_u16(data, body + 14);
                let pcm = match code {
                    FORMAT_PCM => true,
                    FORMAT_EXTENSIBLE => size >= 26 && le_u16(data, body + 24) == FORMAT_PCM,
                    _ => false,
                };
                if !pcm {
                    return Err(Error::format(format!("format code {code:#06x}: only PCM is supported")));
                }
                if bits != 16 {
                    return Err(Error::format(format!("bits per sample {bits}: only 16-bit PCM is supported")));
                }
                if !(1..=2).contains(&channels) {
                    return Err(Error::format(format!("channels {channels}: only mono or stereo")));
                }
                fmt = Some((channels, rate));
            }
            b"data" => {
                let (channels, sample_rate) =
                    fmt.ok_or_else(|| Error::format("data chunk before fmt chunk"))?;
                if body + size > data.len() {
                    return Err(Error::Truncated(format!(
                        "data chunk declares {size} bytes, {} present",
                        data.len() - body
                    )));
                }
                if !size.is_multiple_of(2 * channels as usize) {
                    return Err(Error::format(format!("data size {size} is not a whole number of frames")));
                }
                let samples = data[body..body + size]
                    .chunks_exact(2)
                    .map(|b| i16::from_le_bytes([b[0], b[1]]))
                    .collect();
                return Ok(WavAudio {
                    sample_rate,
                    channels,
                    prefix: data[..body].to_vec(),
                    samples,
                    trailer: data[body + size..].to_vec(),
                });
            }
            _ => {}
        }
        pos = body + size + (size & 1);
    }
    Err(Error::Truncated("no data chunk".into()))
}

pub fn save_wav(audio: &WavAudio) -> Vec<u8> {
    let mut out = Vec::with_capacity(audio.prefix.len() + audio.samples.len() * 2 + audio.trailer.len());
    out.extend_from_slice(&audio.prefix);
    for s in &audio.samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out.extend_from_slice(&audio.trailer);
    out
}

pub fn capacity(audio: &WavAudio, k: BitDepth) -> usize {
    lsb::capacity_bytes(audio.samples.len(), k)
}

/// Hides `frame` in the low byte of each sample, in stored order.
pub fn embed_audio(audio: &WavAudio, frame: &[u8], k: BitDepth) -> Result<WavAudio> {
    let mut low: Vec<u8> = audio.samples.iter().map(|&s| s as u16 as u8).collect();
    lsb::embed_slots(low.iter_mut(), frame, k)?;
    let mut out = audio.clone();
    for (s, l) in out.samples.iter_mut().zip(low) {
        *s = ((*s as u16 & 0xFF00) | l as u16) as i16;
    }
    Ok(out)
}

pub fn extract_audio(audio: &WavAudio, k: BitDepth, pass: Option<&Passphrase>) -> Result<Unframed> {
    let low: Vec<u8> = audio.samples.iter().map(|&s| s as u16 as u8).collect();
    lsb::extract_frame(&low, k, pass)
}

/// Result of adding a tone: the new audio and how many samples were clipped.
#[derive(Debug, Clone)]
pub struct Toned {
    pub audio: WavAudio,
    pub clipped: usize,
}

/// Adds `amplitude * 32767 * cos(pi * omega_over_pi * n)` to every channel of frame `n`.
pub fn add_tone(audio: &WavAudio, omega_over_pi: f64, amplitude: f64) -> Result<Toned> {
    if !(omega_over_pi > 0.0 && omega_over_pi < 1.0) {
        return Err(Error::usage(format!("omega/pi must be in (0, 1), got {omega_over_pi}")));
    }
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::usage(format!("amplitude must be non-negative, got {amplitude}")));
    }
    let mut out = audio.clone();
    let mut clipped = 0;
    let ch = audio.channels as usize;
    for (n, frame) in out.samples.chunks_exact_mut(ch).enumerate() {
        let tone = (amplitude * 32767.0 * (PI * omega_over_pi * n as f64).cos()).round() as i64;
        for s in frame {
            let v = *s as i64 + tone;
            let c = v.clamp(i16::MIN as i64, i16::MAX as i64);
            if c != v {
                clipped += 1;
            }
            *s = c as i16;
        }
    }
    Ok(Toned { audio: out, clipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_zero_samples() -> Vec<u8> {
        let mut f = Vec::new();
        f.extend_from_slice(b"RIFF");
        f.extend_from_slice(&44u32.to_le_bytes());
        f.extend_from_slice(b"WAVEfmt ");
        f.extend_from_slice(&16u32.to_le_bytes());
        f.extend_from_slice(&1u16.to_le_bytes());
        f.extend_from_slice(&1u16.to_le_bytes());
        f.extend_from_slice(&8000u32.to_le_bytes());
        f.extend_from_slice(&16000u32.to_le_bytes());
        f.extend_from_slice(&2u16.to_le_bytes());
        f.extend_from_slice(&16u16.to_le_bytes());
        f.extend_from_slice(b"data");
        f.extend_from_slice(&8u32.to_le_bytes());
        f.extend_from_slice(&[0; 8]);
        f
    }

    #[test]
    fn minimal_round_trip() {
        let f = four_zero_samples();
        assert_eq!(f.len(), 52);
        let a = load_wav(&f).unwrap();
        assert_eq!(a.samples(), &[0; 4]);
        assert_eq!(save_wav(&a), f);
        assert_eq!(save_wav(&WavAudio::new(8000, 1, vec![0; 4]).unwrap()), f);
    }

    #[test]
    fn unknown_chunks_preserved() {
        let mut f = four_zero_samples();
        // Insert a LIST chunk with odd size (padded) between fmt and data.
        let list = [b"LIST".as_slice(), &3u32.to_le_bytes(), b"abc", &[0]].concat();
        f.splice(36..36, list);
        f.extend_from_slice(b"junk");
        let a = load_wav(&f).unwrap();
        assert_eq!(a.samples().len(), 4);
        assert_eq!(save_wav(&a), f);
    }

    #[test]
    fn sample_encoding() {
        let a = WavAudio::new(8000, 1, vec![1]).unwrap();
        assert_eq!(&save_wav(&a)[44..], &[0x01, 0x00]);
    }

    #[test]
    fn truncated_data() {
        let f = four_zero_samples();
        assert!(matches!(load_wav(&f[..50]), Err(Error::Truncated(_))));
    }

    #[test]
    fn rejects_non_pcm16() {
        let mut f = four_zero_samples();
        f[34] = 8;
        assert!(load_wav(&f).unwrap_err().to_string().contains("bits per sample"));
        let mut f = four_zero_samples();
        f[20] = 3;
        assert!(load_wav(&f).unwrap_err().to_string().contains("format code"));
    }

    #[test]
    fn lsb_twos_complement() {
        let k1 = BitDepth::new(1).unwrap();
        let a = WavAudio::new(8000, 1, vec![0, -2, 0, 0, 0, 0, 0, 0]).unwrap();
        let s = embed_audio(&a, &[0b1100_0000], k1).unwrap();
        assert_eq!(s.samples()[0], 1);
        assert_eq!(s.samples()[1], -1);
    }

    #[test]
    fn tone_identity_and_values() {
        let a = WavAudio::new(8000, 1, vec![100, -5, 7]).unwrap();
        assert_eq!(add_tone(&a, 0.4, 0.0).unwrap().audio, a);

        let silence = WavAudio::new(8000, 1, vec![0; 16]).unwrap();
        let t = add_tone(&silence, 0.4, 1.0).unwrap();
        assert_eq!(t.audio.samples()[0], 32767);
        assert_eq!(t.audio.samples()[5], 32767);
        assert_eq!(t.clipped, 0);
    }

    #[test]
    fn tone_clips_full_scale() {
        let a = WavAudio::new(8000, 2, vec![i16::MAX; 8]).unwrap();
        let t = add_tone(&a, 0.25, 1.0).unwrap();
        assert!(t.clipped > 0);
        assert_eq!(t.audio.samples()[0], i16::MAX);
        assert!(add_tone(&a, 1.0, 1.0).is_err());
    }
}
