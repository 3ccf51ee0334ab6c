//! 24-bit uncompressed BMP codec and LSB image hiding.
//!
//! Everything before the pixel array (file header, info header, any extra
//! header bytes) is kept verbatim, as are row padding bytes and anything after
//! the pixel array, so an untouched image re-serializes byte for byte.

use crate::error::{Error, Result};
use crate::lsb::{self, BitDepth};
use crate::payload::{Passphrase, Unframed};

const FILE_HEADER_LEN: usize = 14;
const INFO_HEADER_MIN: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BmpImage {
    width: usize,
    height: usize,
    top_down: bool,
    header: Vec<u8>,
    /// Pixel array exactly as stored: rows in file order, BGR, padded to 4 bytes.
    stored: Vec<u8>,
    trailer: Vec<u8>,
}

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn row_stride(width: usize) -> usize {
    (width * 3).div_ceil(4) * 4
}

impl BmpImage {
    /// Builds a fresh image with a canonical 54-byte header, all pixels black.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || width > i32::MAX as usize || height > i32::MAX as usize {
            return Err(Error::usage(format!("invalid image size {width}x{height}")));
        }
        let stride = row_stride(width);
        let image_size = stride * height;
        let file_size = 54 + image_size;
        let mut h = Vec::with_capacity(54);
        h.extend_from_slice(b"BM");
        h.extend_from_slice(&(file_size as u32).to_le_bytes());
        h.extend_from_slice(&[0; 4]);
        h.extend_from_slice(&54u32.to_le_bytes());
        h.extend_from_slice(&40u32.to_le_bytes());
        h.extend_from_slice(&(width as i32).to_le_bytes());
        h.extend_from_slice(&(height as i32).to_le_bytes());
        h.extend_from_slice(&1u16.to_le_bytes());
        h.extend_from_slice(&24u16.to_le_bytes());
        h.extend_from_slice(&0u32.to_le_bytes());
        h.extend_from_slice(&(image_size as u32).to_le_bytes());
        h.extend_from_slice(&2835i32.to_le_bytes());
        h.extend_from_slice(&2835i32.to_le_bytes());
        h.extend_from_slice(&[0; 8]);
        Ok(BmpImage {
            width,
            height,
            top_down: false,
            header: h,
            stored: vec![0; image_size],
            trailer: Vec::new(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn offset_of(&self, x: usize, y: usize) -> usize {
        let row = if self.top_down { y } else { self.height - 1 - y };
        row * row_stride(self.width) + x * 3
    }

    /// Pixel at column `x`, row `y` counted from the top, as (R, G, B).
    pub fn pixel(&self, x: usize, y: usize) -> (u8, u8, u8) {
        let o = self.offset_of(x, y);
        (self.stored[o + 2], self.stored[o + 1], self.stored[o])
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, (r, g, b): (u8, u8, u8)) {
        let o = self.offset_of(x, y);
        self.stored[o] = b;
        self.stored[o + 1] = g;
        self.stored[o + 2] = r;
    }

    /// All pixels, row-major from the top.
    pub fn pixels(&self) -> Vec<(u8, u8, u8)> {
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| (x, y)))
            .map(|(x, y)| self.pixel(x, y))
            .collect()
    }

    /// Channel bytes in stored-file order (row padding skipped).
    pub fn channel_bytes(&self) -> impl ExactSizeIterator<Item = &u8> + '_ {
        let row_len = self.width * 3;
        let stride = row_stride(self.width);
        let bytes: Vec<&u8> = self
            .stored
            .chunks_exact(stride)
            .flat_map(|row| row[..row_len].iter())
            .collect();
        bytes.into_iter()
    }

    fn channel_bytes_mut(&mut self) -> impl ExactSizeIterator<Item = &mut u8> + '_ {
        let row_len = self.width * 3;
        let stride = row_stride(self.width);
        let bytes: Vec<&mut u8> = self
            .stored
            .chunks_exact_mut(stride)
            .flat_map(|row| row[..row_len].iter_mut())
            .collect();
        bytes.into_iter()
    }

    pub fn channel_count(&self) -> usize {
        self.width * self.height * 3
    }
}

pub fn load_bmp(data: &[u8]) -> Result<BmpImage> {
    if data.len() < FILE_HEADER_LEN + INFO_HEADER_MIN {
        return Err(Error::format(format!("file of {} bytes is too short for BMP headers", data.len())));
    }
    if &data[..2] != b"BM" {
        return Err(Error::format("magic: not a BMP file (expected \"BM\")"));
    }
    let pixel_offset = le_u32(data, 10) as usize;
    let info_len = le_u32(data, 14) as usize;
    if info_len < INFO_HEADER_MIN {
        return Err(Error::format(format!("info header size {info_len}: only BITMAPINFOHEADER (40) or later is supported")));
    }
    let width = i32::from_le_bytes(data[18..22].try_into().unwrap());
    let height = i32::from_le_bytes(data[22..26].try_into().unwrap());
    let planes = le_u16(data, 26);
    let bpp = le_u16(data, 28);
    let compression = le_u32(data, 30);
    if bpp != 24 {
        return Err(Error::format(format!("bits per pixel {bpp}: only 24-bit images are supported")));
    }
    if compression != 0 {
        return Err(Error::format(format!("compression {compression}: only uncompressed (0) is supported")));
    }
    if planes != 1 {
        return Err(Error::format(format!("planes {planes}: expected 1")));
    }
    if width <= 0 || height == 0 {
        return Err(Error::format(format!("dimensions {width}x{height}")));
    }
    if pixel_offset < FILE_HEADER_LEN + info_len || pixel_offset > data.len() {
        return Err(Error::format(format!("pixel array offset {pixel_offset} out of range")));
    }
    let width = width as usize;
    let top_down = height < 0;
    let height = height.unsigned_abs() as usize;
    let size = row_stride(width)
        .checked_mul(height)
        .ok_or_else(|| Error::format("dimensions overflow"))?;
    let end = pixel_offset + size;
    if end > data.len() {
        return Err(Error::Truncated(format!(
            "pixel array needs {size} bytes at offset {pixel_offset}, file has {}",
            data.len()
        )));
    }
    Ok(BmpImage {
        width,
        height,
        top_down,
        header: data[..pixel_offset].to_vec(),
        stored: data[pixel_offset..end].to_vec(),
        trailer: data[end..].to_vec(),
    })
}

pub fn save_bmp(img: &BmpImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.header.len() + img.stored.len() + img.trailer.len());
    out.extend_from_slice(&img.header);
    out.extend_from_slice(&img.stored);
    out.extend_from_slice(&img.trailer);
    out
}

/// Payload bytes (frame included) the image can carry at depth `k`.
pub fn capacity(img: &BmpImage, k: BitDepth) -> usize {
    lsb::capacity_bytes(img.channel_count(), k)
}

pub fn embed(img: &BmpImage, frame: &[u8], k: BitDepth) -> Result<BmpImage> {
    let mut out = img.clone();
    lsb::embed_slots(out.channel_bytes_mut(), frame, k)?;
    Ok(out)
}

pub fn extract(img: &BmpImage, k: BitDepth, pass: Option<&Passphrase>) -> Result<Unframed> {
    let channels: Vec<u8> = img.channel_bytes().copied().collect();
    lsb::extract_frame(&channels, k, pass)
}

/// Distortion between a cover and a stego image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distortion {
    pub mse: f64,
    /// `None` when the images are identical (infinite PSNR).
    pub psnr_db: Option<f64>,
}

impl Distortion {
    pub fn identical(&self) -> bool {
        self.psnr_db.is_none()
    }
}

pub fn distortion(cover: &BmpImage, stego: &BmpImage) -> Result<Distortion> {
    if cover.width != stego.width || cover.height != stego.height {
        return Err(Error::usage(format!(
            "dimension mismatch: {}x{} vs {}x{}",
            cover.width, cover.height, stego.width, stego.height
        )));
    }
    let sum: f64 = (0..cover.height)
        .flat_map(|y| (0..cover.width).map(move |x| (x, y)))
        .map(|(x, y)| {
            let (a, b) = (cover.pixel(x, y), stego.pixel(x, y));
            [(a.0, b.0), (a.1, b.1), (a.2, b.2)]
                .iter()
                .map(|&(p, q)| (p as f64 - q as f64).powi(2))
                .sum::<f64>()
        })
        .sum();
    let mse = sum / cover.channel_count() as f64;
    let psnr_db = (mse > 0.0).then(|| 10.0 * (255.0f64 * 255.0 / mse).log10());
    Ok(Distortion { mse, psnr_db })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 2x2 black image assembled field by field.
    fn two_by_two_black() -> Vec<u8> {
        let mut f = Vec::new();
        f.extend_from_slice(b"BM");
        f.extend_from_slice(&70u32.to_le_bytes());
        f.extend_from_slice(&[0, 0, 0, 0]);
        f.extend_from_slice(&54u32.to_le_bytes());
        f.extend_from_slice(&40u32.to_le_bytes());
        f.extend_from_slice(&2i32.to_le_bytes());
        f.extend_from_slice(&2i32.to_le_bytes());
        f.extend_from_slice(&1u16.to_le_bytes());
        f.extend_from_slice(&24u16.to_le_bytes());
        f.extend_from_slice(&0u32.to_le_bytes());
        f.extend_from_slice(&16u32.to_le_bytes());
        f.extend_from_slice(&[0; 16]);
        f.extend_from_slice(&[0; 16]);
        f
    }

    #[test]
    fn minimal_round_trip() {
        let f = two_by_two_black();
        assert_eq!(f.len(), 70);
        let img = load_bmp(&f).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), vec![(0, 0, 0); 4]);
        assert_eq!(save_bmp(&img), f);
    }

    #[test]
    fn nonzero_padding_preserved() {
        let mut f = two_by_two_black();
        f[54 + 6] = 0xAB;
        f[54 + 15] = 0xCD;
        f.extend_from_slice(b"trailing");
        assert_eq!(save_bmp(&load_bmp(&f).unwrap()), f);
    }

    #[test]
    fn single_white_pixel() {
        let mut img = BmpImage::new(1, 1).unwrap();
        img.set_pixel(0, 0, (255, 255, 255));
        let bytes = save_bmp(&img);
        assert_eq!(bytes.len(), 58);
        assert_eq!(load_bmp(&bytes).unwrap().pixels(), vec![(255, 255, 255)]);
    }

    #[test]
    fn stored_order_is_bottom_up_bgr() {
        let mut img = BmpImage::new(1, 2).unwrap();
        img.set_pixel(0, 0, (1, 2, 3));
        img.set_pixel(0, 1, (4, 5, 6));
        let order: Vec<u8> = img.channel_bytes().copied().collect();
        assert_eq!(order, vec![6, 5, 4, 3, 2, 1]);
    }

    #[test]
    fn rejects_unsupported() {
        let mut f = two_by_two_black();
        f[28] = 8;
        let e = load_bmp(&f).unwrap_err().to_string();
        assert!(e.contains("bits per pixel"), "{e}");

        let mut f = two_by_two_black();
        f[30] = 1;
        let e = load_bmp(&f).unwrap_err().to_string();
        assert!(e.contains("compression"), "{e}");

        let mut f = two_by_two_black();
        f[0] = b'P';
        let e = load_bmp(&f).unwrap_err().to_string();
        assert!(e.contains("magic"), "{e}");
    }

    #[test]
    fn truncated_pixels() {
        let f = two_by_two_black();
        assert!(matches!(load_bmp(&f[..69]), Err(Error::Truncated(_))));
    }

    #[test]
    fn capacity_arithmetic() {
        let k = |n| BitDepth::new(n).unwrap();
        assert_eq!(capacity(&BmpImage::new(640, 480).unwrap(), k(1)), 115_200);
        assert_eq!(capacity(&BmpImage::new(1, 1).unwrap(), k(8)), 3);
        assert_eq!(capacity(&BmpImage::new(2, 2).unwrap(), k(2)), 3);
    }

    #[test]
    fn distortion_values() {
        let a = BmpImage::new(1, 1).unwrap();
        let d = distortion(&a, &a).unwrap();
        assert_eq!(d.mse, 0.0);
        assert!(d.identical());

        let mut b = a.clone();
        b.set_pixel(0, 0, (0, 1, 0));
        let d = distortion(&a, &b).unwrap();
        assert!((d.mse - 1.0 / 3.0).abs() < 1e-12);
        assert!((d.psnr_db.unwrap() - 10.0 * (3.0 * 255.0f64 * 255.0).log10()).abs() < 1e-9);

        let c = BmpImage::new(2, 1).unwrap();
        assert!(matches!(distortion(&a, &c), Err(Error::Usage(_))));
    }

    #[test]
    fn pixel_listing_only_lsbs_move() {
        // Three pixels from the worked example; at k=1 only bit 0 of any byte may change.
        let cover = [
            0b0010_0111u8, 0b1110_1001, 0b1100_1000, 0b0010_0111, 0b1100_1000, 0b1110_1001,
            0b1100_1000, 0b0010_0111, 0b1110_1001,
        ];
        let mut stego = cover;
        lsb::embed_slots(stego.iter_mut(), &[0x41], BitDepth::new(1).unwrap()).unwrap();
        for (c, s) in cover.iter().zip(stego.iter()) {
            assert_eq!(c & !1, s & !1);
        }
        assert_eq!(stego[8], cover[8]);
        let lsbs: Vec<u8> = stego[..8].iter().map(|b| b & 1).collect();
        assert_eq!(lsbs, [0, 1, 0, 0, 0, 0, 0, 1]);
    }
}
