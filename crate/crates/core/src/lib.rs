//! Steganography and steganalysis toolkit.
//!
//! Carriers: 24-bit BMP images and 16-bit PCM WAV audio (low-bit substitution),
//! grammar-generated spam text, and slack space or named streams on a
//! virtual disk image. All carriers share the payload frame in [`payload`].
//! [`spectral`] holds the power-spectrum estimators used to look for a hidden
//! tone in audio.

pub mod bmp;
pub mod error;
pub mod lsb;
pub mod mimic;
pub mod payload;
pub mod spectral;
pub mod vfs;
pub mod wav;

pub use error::{Error, ErrorKind, Result};
pub use lsb::BitDepth;
pub use payload::{Passphrase, Unframed};
