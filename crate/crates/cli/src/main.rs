mod audio;
mod files;
mod image;
mod spectrum;
mod text;
mod vfs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stegkit::{BitDepth, Passphrase, Result};

/// Steganography and steganalysis toolkit.
///
/// Exit codes: 0 success, 1 usage, 2 format/parse, 3 capacity,
/// 4 integrity (wrong passphrase, CRC), 5 numeric.
#[derive(Parser)]
#[command(name = "stegkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hide data in the low bits of 24-bit BMP images.
    #[command(subcommand)]
    Image(image::ImageCmd),
    /// Hide data in 16-bit PCM WAV audio, or add a test tone.
    #[command(subcommand)]
    Audio(audio::AudioCmd),
    /// Power spectrum estimation and tone detection.
    #[command(subcommand)]
    Spectrum(spectrum::SpectrumCmd),
    /// Encode data as grammar-generated spam text.
    #[command(subcommand)]
    Text(text::TextCmd),
    /// Virtual disk images: files, slack space, alternate data streams.
    #[command(subcommand)]
    Vfs(vfs::VfsCmd),
}

#[derive(Args, Debug)]
pub struct PassArg {
    /// Passphrase for DES encryption of the payload.
    #[arg(long)]
    pass: Option<String>,
}

impl PassArg {
    fn get(&self) -> Result<Option<Passphrase>> {
        self.pass.as_deref().map(Passphrase::new).transpose()
    }
}

#[derive(Args, Debug)]
pub struct BitsArg {
    /// Low bits used per carrier byte (1-8).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=8))]
    bits: u8,
}

impl BitsArg {
    fn get(&self) -> BitDepth {
        BitDepth::new(self.bits).expect("range checked by clap")
    }
}

/// The payload name to record: explicit, or the input's file name.
fn payload_name(explicit: &Option<String>, input: &Path) -> String {
    explicit.clone().unwrap_or_else(|| {
        input
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    })
}

fn out_path(p: &Option<PathBuf>) -> Option<&Path> {
    p.as_deref()
}

/// Prints text to stdout, or writes it to `out` when given.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => files::write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Image(c) => image::run(c),
        Command::Audio(c) => audio::run(c),
        Command::Spectrum(c) => spectrum::run(c),
        Command::Text(c) => text::run(c),
        Command::Vfs(c) => vfs::run(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stegkit: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}
