use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use stegkit::spectral::montecarlo::{frequency_recovery, variance_comparison, NoiseModel};
use stegkit::spectral::{estimate, peak_frequency, EstimatorConfig, Method, Signal};
use stegkit::{wav, Error, Result};

use crate::files::read;
use crate::{emit, out_path};

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct EstimatorArgs {
    /// AR model order (Yule-Walker, modified covariance) or Capon filter order.
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// FFT grid size (power of two).
    #[arg(long, default_value_t = 1024)]
    nfft: usize,
    /// Blackman-Tukey maximum lag (default N/5).
    #[arg(long)]
    max_lag: Option<usize>,
}

impl EstimatorArgs {
    fn config(&self) -> EstimatorConfig {
        EstimatorConfig {
            nfft: self.nfft,
            order: self.order,
            bt_max_lag: self.max_lag,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Noise {
    White,
    Ar1,
}

#[derive(Subcommand)]
pub enum SpectrumCmd {
    /// Estimate the power spectrum of a signal; CSV `freq,power`.
    Estimate {
        /// WAV file, or text with one number per line or comma.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "periodogram", value_parser = parse_method)]
        method: Method,
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the strongest non-DC peak frequency (cycles per sample).
    Peak {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "periodogram", value_parser = parse_method)]
        method: Method,
        #[command(flatten)]
        est: EstimatorArgs,
    },
    /// Compare estimators: peaks on a signal (--in), seeded tone-recovery
    /// trials (default), or per-bin variance of periodogram vs
    /// Blackman-Tukey (--variance).
    Compare {
        #[arg(long = "in", conflicts_with = "variance")]
        input: Option<PathBuf>,
        #[arg(long)]
        variance: bool,
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Signal length per trial.
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        /// Tone frequency omega/pi.
        #[arg(long, default_value_t = 0.4)]
        freq: f64,
        #[arg(long, value_enum, default_value_t = Noise::White)]
        noise: Noise,
        /// White noise standard deviation.
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        /// AR(1) noise coefficient.
        #[arg(long, default_value_t = 0.9)]
        ar_coef: f64,
        /// Tone-to-noise ratio for AR(1) noise.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        snr_db: f64,
        /// Hit tolerance in cycles per sample.
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Loads a WAV (channels averaged, scaled to [-1, 1)) or a list of numbers.
fn load_signal(path: &Path) -> Result<Signal> {
    let bytes = read(path)?;
    if bytes.starts_with(b"RIFF") {
        return Signal::new(wav::load_wav(&bytes)?.to_signal());
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::Format(format!("{} is neither WAV nor text", path.display())))?;
    let values = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .enumerate()
        .map(|(i, t)| t.parse::<f64>().map_err(|_| Error::Parse { index: i, message: format!("{t:?} is not a number") }))
        .collect::<Result<Vec<f64>>>()?;
    Signal::new(values)
}

pub fn run(cmd: SpectrumCmd) -> Result<()> {
    match cmd {
        SpectrumCmd::Estimate { input, method, est, out } => {
            let s = estimate(method, &load_signal(&input)?, &est.config())?;
            if s.clamped > 0 {
                eprintln!("{} negative bins clamped to zero", s.clamped);
            }
            emit(out_path(&out), &s.to_csv())
        }
        SpectrumCmd::Peak { input, method, est } => {
            let s = estimate(method, &load_signal(&input)?, &est.config())?;
            println!("{}", peak_frequency(&s)?);
            Ok(())
        }
        SpectrumCmd::Compare {
            input,
            variance,
            est,
            trials,
            samples,
            freq,
            noise,
            sigma,
            ar_coef,
            snr_db,
            tolerance,
            seed,
            out,
        } => {
            let cfg = est.config();
            if let Some(path) = input {
                let x = load_signal(&path)?;
                let mut csv = String::from("method,peak_freq\n");
                for m in Method::ALL {
                    match estimate(m, &x, &cfg).and_then(|s| peak_frequency(&s)) {
                        Ok(f) => csv.push_str(&format!("{m},{f}\n")),
                        Err(e) => {
                            eprintln!("{m}: {e}");
                            csv.push_str(&format!("{m},\n"));
                        }
                    }
                }
                return emit(out_path(&out), &csv);
            }
            if trials < 2 {
                return Err(Error::Usage("need at least 2 trials".into()));
            }
            if variance {
                let r = variance_comparison(&cfg, samples, sigma, trials, seed)?;
                eprintln!("blackman-tukey variance lower at {:.1}% of bins", 100.0 * r.bt_lower_fraction());
                return emit(out_path(&out), &r.to_csv());
            }
            let model = match noise {
                Noise::White => NoiseModel::White { sigma },
                Noise::Ar1 => NoiseModel::Ar1 { a: ar_coef, snr_db },
            };
            let mut csv = String::from("method,trials,hits\n");
            for m in Method::ALL {
                let r = frequency_recovery(m, &cfg, freq, model, samples, trials, tolerance, seed)?;
                csv.push_str(&format!("{m},{},{}\n", r.trials, r.hits));
            }
            emit(out_path(&out), &csv)
        }
    }
}
