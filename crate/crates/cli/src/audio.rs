use std::path::PathBuf;

use clap::Subcommand;
use stegkit::payload::frame_payload;
use stegkit::{wav, Result};

use crate::files::{read, write_atomic};
use crate::{payload_name, BitsArg, PassArg};

#[derive(Subcommand)]
pub enum AudioCmd {
    /// Embed a file into the low bits of each sample.
    Hide {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        bits: BitsArg,
        #[command(flatten)]
        pass: PassArg,
    },
    /// Recover a hidden file.
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        bits: BitsArg,
        #[command(flatten)]
        pass: PassArg,
    },
    /// Add amplitude * cos(pi * freq * n) to every channel (full scale = 1).
    Tone {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Normalized frequency omega/pi, in (0, 1).
        #[arg(long, default_value_t = 0.4)]
        freq: f64,
        #[arg(long, default_value_t = 0.25)]
        amplitude: f64,
    },
}

pub fn run(cmd: AudioCmd) -> Result<()> {
    match cmd {
        AudioCmd::Hide { cover, input, out, name, bits, pass } => {
            let a = wav::load_wav(&read(&cover)?)?;
            let frame = frame_payload(&read(&input)?, &payload_name(&name, &input), pass.get()?.as_ref())?;
            write_atomic(&out, &wav::save_wav(&wav::embed_audio(&a, &frame, bits.get())?))
        }
        AudioCmd::Extract { input, out, bits, pass } => {
            let a = wav::load_wav(&read(&input)?)?;
            let u = wav::extract_audio(&a, bits.get(), pass.get()?.as_ref())?;
            write_atomic(&out, &u.body)?;
            println!("{} bytes, stored name {:?}", u.body.len(), u.name);
            Ok(())
        }
        AudioCmd::Tone { input, out, freq, amplitude } => {
            let a = wav::load_wav(&read(&input)?)?;
            let t = wav::add_tone(&a, freq, amplitude)?;
            write_atomic(&out, &wav::save_wav(&t.audio))?;
            if t.clipped > 0 {
                eprintln!("clipped {} samples", t.clipped);
            }
            Ok(())
        }
    }
}
