use std::path::{Path, PathBuf};

use clap::Subcommand;
use stegkit::mimic::{self, MimicGrammar};
use stegkit::payload::frame_payload;
use stegkit::{Error, Result};

use crate::files::{read, read_text, write_atomic};
use crate::{payload_name, PassArg};

#[derive(Subcommand)]
pub enum TextCmd {
    /// Turn a file into spam-like text.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Grammar file (default: the built-in spam grammar).
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        pass: PassArg,
    },
    /// Recover a file from text produced by `encode` with the same grammar.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[command(flatten)]
        pass: PassArg,
    },
    /// Validate a grammar (or print the built-in one with --print-default).
    CheckGrammar {
        #[arg(long, required_unless_present = "print_default")]
        grammar: Option<PathBuf>,
        #[arg(long)]
        print_default: bool,
    },
}

fn grammar(path: &Option<PathBuf>) -> Result<MimicGrammar> {
    match path {
        Some(p) => mimic::load_grammar(&read(p)?),
        None => Ok(mimic::default_grammar()),
    }
}

fn check(path: &Path) -> Result<()> {
    let g = MimicGrammar::parse(&read_text(path)?)?;
    let report = mimic::validate_grammar(&g);
    print!("{report}");
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::Format(format!("{} violation(s) in {}", report.violations.len(), path.display())))
    }
}

pub fn run(cmd: TextCmd) -> Result<()> {
    match cmd {
        TextCmd::Encode { input, out, grammar: g, name, pass } => {
            let g = grammar(&g)?;
            let frame = frame_payload(&read(&input)?, &payload_name(&name, &input), pass.get()?.as_ref())?;
            let mut text = mimic::mimic_encode(&frame, &g)?;
            text.push('\n');
            write_atomic(&out, text.as_bytes())
        }
        TextCmd::Decode { input, out, grammar: g, pass } => {
            let g = grammar(&g)?;
            let u = mimic::mimic_decode(&read_text(&input)?, &g, pass.get()?.as_ref())?;
            write_atomic(&out, &u.body)?;
            println!("{} bytes, stored name {:?}", u.body.len(), u.name);
            Ok(())
        }
        TextCmd::CheckGrammar { grammar, print_default } => {
            if print_default {
                print!("{}", mimic::DEFAULT_GRAMMAR);
                return Ok(());
            }
            check(grammar.as_deref().expect("required by clap"))
        }
    }
}
