use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use stegkit::vfs::{DiskImage, Obfuscation, Selection, SlackHideOptions};
use stegkit::{Error, Passphrase, Result};

use crate::files::{read, write_atomic, LockedDisk};

#[derive(Args, Debug)]
pub struct Scope {
    /// Directory to search.
    #[arg(long, default_value = "/")]
    root: String,
    /// Subdirectory depth below --root (0 = files directly inside it; default: unlimited).
    #[arg(long)]
    levels: Option<usize>,
}

impl Scope {
    fn levels(&self) -> usize {
        self.levels.unwrap_or(usize::MAX)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Select {
    Dumb,
    Random,
    Intelligent,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Obfuscate {
    None,
    RandomKey,
    XorFile,
}

#[derive(Subcommand)]
pub enum VfsCmd {
    /// Create an empty disk image.
    Format {
        image: PathBuf,
        #[arg(long)]
        clusters: u32,
        /// Sectors (512 bytes) per cluster: a power of two up to 128.
        #[arg(long, default_value_t = 4)]
        sectors_per_cluster: u32,
        /// Replace an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Copy a local file onto the disk.
    Put {
        image: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Destination path on the disk (default: input file name).
        #[arg(long)]
        path: Option<String>,
    },
    /// Copy a file off the disk.
    Get {
        image: PathBuf,
        #[arg(long)]
        path: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Delete a file (its clusters keep their contents until reused).
    Rm {
        image: PathBuf,
        #[arg(long)]
        path: String,
    },
    /// List files and sizes.
    Ls { image: PathBuf },
    /// Dump one cluster regardless of allocation.
    Raw {
        image: PathBuf,
        #[arg(long)]
        cluster: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// List RAM and file slack; CSV `path,cluster,offset,length,kind`.
    SlackMap {
        image: PathBuf,
        #[command(flatten)]
        scope: Scope,
    },
    /// Store a file in file slack and write the encrypted tracking metadata.
    SlackHide {
        image: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Where to write the metadata file.
        #[arg(long)]
        meta: PathBuf,
        /// Passphrase for the metadata.
        #[arg(long)]
        pass: String,
        #[command(flatten)]
        scope: Scope,
        #[arg(long = "select", value_enum, default_value_t = Select::Dumb)]
        select: Select,
        #[arg(long, value_enum, default_value_t = Obfuscate::None)]
        obfuscate: Obfuscate,
        /// Key file for --obfuscate xor-file (not stored in the metadata).
        #[arg(long)]
        xor_file: Option<PathBuf>,
        /// Seed for --select random and --obfuscate random-key.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Restore a file from slack using its metadata.
    SlackRestore {
        image: PathBuf,
        #[arg(long)]
        meta: PathBuf,
        #[arg(long)]
        pass: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        xor_file: Option<PathBuf>,
    },
    /// Attach a local file as a named stream.
    AdsAttach {
        image: PathBuf,
        #[arg(long)]
        path: String,
        #[arg(long)]
        stream: String,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Read a named stream.
    AdsRead {
        image: PathBuf,
        #[arg(long)]
        path: String,
        #[arg(long)]
        stream: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// List named streams as `path:stream:$DATA size`.
    AdsScan {
        image: PathBuf,
        #[command(flatten)]
        scope: Scope,
    },
    /// Delete a named stream.
    AdsRemove {
        image: PathBuf,
        #[arg(long)]
        path: String,
        #[arg(long)]
        stream: String,
    },
    /// Copy a file out as if onto a file system without streams; streams are
    /// reported lost unless --include-streams writes them as `<out>.<stream>`.
    Export {
        image: PathBuf,
        #[arg(long)]
        path: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        include_streams: bool,
    },
}

fn mutate(image: &Path, f: impl FnOnce(&mut DiskImage) -> Result<()>) -> Result<()> {
    let mut locked = LockedDisk::open(image, true)?;
    f(&mut locked.disk)?;
    locked.save(image)
}

fn inspect<T>(image: &Path, f: impl FnOnce(&DiskImage) -> Result<T>) -> Result<T> {
    f(&LockedDisk::open(image, false)?.disk)
}

fn stream_out_path(out: &Path, stream: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".");
    s.push(stream);
    PathBuf::from(s)
}

pub fn run(cmd: VfsCmd) -> Result<()> {
    match cmd {
        VfsCmd::Format { image, clusters, sectors_per_cluster, force } => {
            if image.exists() && !force {
                return Err(Error::Usage(format!("{} exists (use --force to replace it)", image.display())));
            }
            let d = DiskImage::format(clusters, sectors_per_cluster)?;
            write_atomic(&image, &d.to_bytes())
        }
        VfsCmd::Put { image, input, path } => {
            let content = read(&input)?;
            let dest = path.unwrap_or_else(|| crate::payload_name(&None, &input));
            mutate(&image, |d| d.write_file(&dest, &content))
        }
        VfsCmd::Get { image, path, out } => {
            let content = inspect(&image, |d| d.read_file(&path))?;
            write_atomic(&out, &content)
        }
        VfsCmd::Rm { image, path } => mutate(&image, |d| d.delete_file(&path)),
        VfsCmd::Ls { image } => inspect(&image, |d| {
            for (p, size) in d.list() {
                println!("{p} {size}");
            }
            Ok(())
        }),
        VfsCmd::Raw { image, cluster, out } => {
            let bytes = inspect(&image, |d| Ok(d.read_raw(cluster)?.to_vec()))?;
            write_atomic(&out, &bytes)
        }
        VfsCmd::SlackMap { image, scope } => inspect(&image, |d| {
            println!("path,cluster,offset,length,kind");
            for e in d.slack_map(&scope.root, scope.levels())? {
                println!("{},{},{},{},{}", e.path, e.cluster, e.offset, e.len, e.kind.name());
            }
            Ok(())
        }),
        VfsCmd::SlackHide { image, input, meta, pass, scope, select, obfuscate, xor_file, seed } => {
            let pass = Passphrase::new(pass)?;
            let payload = read(&input)?;
            let obfuscation = match (obfuscate, xor_file) {
                (Obfuscate::XorFile, Some(k)) => Obfuscation::XorFile(read(&k)?),
                (Obfuscate::XorFile, None) => return Err(Error::Usage("--obfuscate xor-file needs --xor-file".into())),
                (_, Some(_)) => return Err(Error::Usage("--xor-file only applies to --obfuscate xor-file".into())),
                (Obfuscate::None, None) => Obfuscation::None,
                (Obfuscate::RandomKey, None) => Obfuscation::RandomKey(seed),
            };
            let opts = SlackHideOptions {
                root: scope.root.clone(),
                levels: scope.levels(),
                selection: match select {
                    Select::Dumb => Selection::Dumb,
                    Select::Random => Selection::Random(seed),
                    Select::Intelligent => Selection::Intelligent,
                },
                obfuscation,
                name: crate::payload_name(&None, &input),
            };
            mutate(&image, |d| {
                let m = d.slack_hide(&payload, &pass, &opts)?;
                // Metadata first: if it cannot be written the disk is left as it was.
                write_atomic(&meta, &m)
            })
        }
        VfsCmd::SlackRestore { image, meta, pass, out, xor_file } => {
            let pass = Passphrase::new(pass)?;
            let m = read(&meta)?;
            let key = xor_file.as_deref().map(read).transpose()?;
            let u = inspect(&image, |d| d.slack_restore(&m, &pass, key.as_deref()))?;
            write_atomic(&out, &u.body)?;
            println!("{} bytes, stored name {:?}", u.body.len(), u.name);
            Ok(())
        }
        VfsCmd::AdsAttach { image, path, stream, input } => {
            let content = read(&input)?;
            mutate(&image, |d| d.ads_attach(&path, &stream, &content))
        }
        VfsCmd::AdsRead { image, path, stream, out } => {
            let content = inspect(&image, |d| d.ads_read(&path, &stream))?;
            write_atomic(&out, &content)
        }
        VfsCmd::AdsScan { image, scope } => inspect(&image, |d| {
            for s in d.ads_scan(&scope.root, scope.levels())? {
                println!("{s}");
            }
            Ok(())
        }),
        VfsCmd::AdsRemove { image, path, stream } => mutate(&image, |d| d.ads_remove(&path, &stream)),
        VfsCmd::Export { image, path, out, include_streams } => {
            let x = inspect(&image, |d| d.export_file(&path, include_streams))?;
            for (name, bytes) in &x.streams {
                write_atomic(&stream_out_path(&out, name), bytes)?;
            }
            write_atomic(&out, &x.main)?;
            for name in &x.dropped {
                eprintln!("warning: stream {path}:{name} is lost in the exported copy");
            }
            Ok(())
        }
    }
}
