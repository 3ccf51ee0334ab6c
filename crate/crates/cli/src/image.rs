use std::path::PathBuf;

use clap::Subcommand;
use stegkit::payload::{frame_payload, OVERHEAD};
use stegkit::{bmp, BitDepth, Result};

use crate::files::{read, write_atomic};
use crate::{payload_name, BitsArg, PassArg};

#[derive(Subcommand)]
pub enum ImageCmd {
    /// Embed a file into a cover image.
    Hide {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Name stored with the payload (default: input file name).
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        bits: BitsArg,
        #[command(flatten)]
        pass: PassArg,
    },
    /// Recover a hidden file. The bit depth must match the one used to hide.
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
    /// Print how many bytes an image can carry (all depths unless --bits).
    Capacity {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        bits: Option<u8>,
    },
    /// Distortion between a cover and a stego image (MSE and PSNR).
    Analyze {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        stego: PathBuf,
    },
}

pub fn run(cmd: ImageCmd) -> Result<()> {
    match cmd {
        ImageCmd::Hide { cover, input, out, name, bits, pass } => {
            let img = bmp::load_bmp(&read(&cover)?)?;
            let frame = frame_payload(&read(&input)?, &payload_name(&name, &input), pass.get()?.as_ref())?;
            let stego = bmp::embed(&img, &frame, bits.get())?;
            write_atomic(&out, &bmp::save_bmp(&stego))
        }
        ImageCmd::Extract { input, out, bits, pass } => {
            let img = bmp::load_bmp(&read(&input)?)?;
            let u = bmp::extract(&img, bits.get(), pass.get()?.as_ref())?;
            write_atomic(&out, &u.body)?;
            println!("{} bytes, stored name {:?}", u.body.len(), u.name);
            Ok(())
        }
        ImageCmd::Capacity { cover, bits } => {
            let img = bmp::load_bmp(&read(&cover)?)?;
            let depths: Vec<BitDepth> = match bits {
                Some(k) => vec![BitDepth::new(k)?],
                None => BitDepth::all().collect(),
            };
            println!("bits,capacity_bytes,max_unnamed_payload_bytes");
            for k in depths {
                let cap = bmp::capacity(&img, k);
                // Encryption pads the body to a multiple of 8, so this is the plain-text figure.
                println!("{},{},{}", k.get(), cap, cap.saturating_sub(OVERHEAD));
            }
            Ok(())
        }
        ImageCmd::Analyze { cover, stego } => {
            let a = bmp::load_bmp(&read(&cover)?)?;
            let b = bmp::load_bmp(&read(&stego)?)?;
            let d = bmp::distortion(&a, &b)?;
            println!("mse {}", d.mse);
            match d.psnr_db {
                Some(p) => println!("psnr_db {p}"),
                None => println!("psnr_db inf (identical)"),
            }
            Ok(())
        }
    }
}
