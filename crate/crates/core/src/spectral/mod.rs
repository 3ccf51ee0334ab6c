//! Power spectral density estimators and a tone-detection harness.
//!
//! All estimators produce power on the same one-sided grid
//! `f_i = i / nfft`, `i = 0..=nfft/2`, in cycles per sample.

mod ar;
mod blackman_tukey;
mod capon;
pub mod montecarlo;
mod periodogram;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub use ar::{levinson_durbin, modified_covariance, yule_walker, ArModel};
pub use blackman_tukey::blackman_tukey;
pub use capon::capon;
pub use periodogram::periodogram;

/// A finite real-valued sequence of at least two samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal(Vec<f64>);

impl Signal {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::usage(format!("signal needs at least 2 samples, got {}", samples.len())));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::usage(format!("sample {i} is not finite")));
        }
        Ok(Signal(samples))
    }

    pub fn samples(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Periodogram,
    BlackmanTukey,
    Capon,
    YuleWalker,
    ModifiedCovariance,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Periodogram,
        Method::BlackmanTukey,
        Method::Capon,
        Method::YuleWalker,
        Method::ModifiedCovariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Periodogram => "periodogram",
            Method::BlackmanTukey => "bt",
            Method::Capon => "capon",
            Method::YuleWalker => "yw",
            Method::ModifiedCovariance => "modcov",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown method {s:?} (periodogram, bt, capon, yw, modcov)")))
    }
}

/// Estimator parameters. `bt_max_lag = None` means `floor(N / 5)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorConfig {
    pub nfft: usize,
    pub order: usize,
    pub bt_max_lag: Option<usize>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            nfft: 1024,
            order: 4,
            bt_max_lag: None,
        }
    }
}

impl EstimatorConfig {
    fn check_nfft(&self) -> Result<()> {
        if self.nfft < 2 || !self.nfft.is_power_of_two() {
            return Err(Error::usage(format!("nfft must be a power of two >= 2, got {}", self.nfft)));
        }
        Ok(())
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if self.order < 1 || 2 * self.order >= n {
            return Err(Error::usage(format!(
                "order must satisfy 1 <= p < N/2 (p = {}, N = {n})",
                self.order
            )));
        }
        Ok(())
    }

    fn max_lag(&self, n: usize) -> Result<usize> {
        let m = self.bt_max_lag.unwrap_or(n / 5);
        if m < 1 || m >= n {
            return Err(Error::usage(format!("Blackman-Tukey lag must satisfy 1 <= M < N (M = {m}, N = {n})")));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub method: Method,
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    /// Bins where a negative estimate was clamped to zero (Blackman-Tukey only).
    pub clamped: usize,
}

impl SpectrumEstimate {
    fn new(method: Method, nfft: usize, power: Vec<f64>) -> Self {
        debug_assert_eq!(power.len(), nfft / 2 + 1);
        SpectrumEstimate {
            method,
            freqs: grid(nfft),
            power,
            clamped: 0,
        }
    }

    pub fn nfft(&self) -> usize {
        (self.freqs.len() - 1) * 2
    }

    /// CSV with header `freq,power`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq,power\n");
        for (f, p) in self.freqs.iter().zip(&self.power) {
            out.push_str(&format!("{f},{p}\n"));
        }
        out
    }
}

pub fn grid(nfft: usize) -> Vec<f64> {
    (0..=nfft / 2).map(|i| i as f64 / nfft as f64).collect()
}

/// Biased autocorrelation `r(m) = (1/N) sum x(n) x(n+m)` for `m = 0..=max_lag`.
pub fn autocorrelation(x: &Signal, max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if max_lag >= n {
        return Err(Error::usage(format!("max lag {max_lag} must be below N = {n}")));
    }
    let s = x.samples();
    Ok((0..=max_lag)
        .map(|m| s[..n - m].iter().zip(&s[m..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect())
}

/// `sum_m seq[m] e^{-j 2 pi i m / nfft}` for `i = 0..=nfft/2`, where `seq` is
/// indexed from `first_lag`. Lags are wrapped modulo `nfft`, which samples
/// the transform exactly on the grid even when the sequence is longer.
pub(crate) fn dtft_on_grid(seq: &[f64], first_lag: isize, nfft: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for (i, &v) in seq.iter().enumerate() {
        let lag = (first_lag + i as isize).rem_euclid(nfft as isize) as usize;
        buf[lag].re += v;
    }
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    buf.truncate(nfft / 2 + 1);
    buf
}

/// Frequency of the strongest spectral peak away from DC.
///
/// A peak is a bin above its lower neighbour and not below its upper one
/// (the last bin only needs the first condition), searched over bins
/// `1..=nfft/2`. A lobe falling away from DC is therefore not a peak.
/// Spectra with no such bin (flat or monotone) fall back to the plain argmax
/// over the same bins. Ties go to the lowest frequency.
pub fn peak_frequency(s: &SpectrumEstimate) -> Result<f64> {
    let p = &s.power;
    let last = p.len() - 1;
    let is_peak = |i: usize| p[i] > p[i - 1] && (i == last || p[i] >= p[i + 1]);
    let argmax = |candidates: &mut dyn Iterator<Item = usize>| {
        candidates.fold(None, |best: Option<usize>, i| match best {
            Some(b) if p[b] >= p[i] => Some(b),
            _ => Some(i),
        })
    };
    let best = argmax(&mut (1..=last).filter(|&i| is_peak(i))).or_else(|| argmax(&mut (1..=last)));
    match best {
        Some(i) if p[i] > 0.0 => Ok(s.freqs[i]),
        _ => Err(Error::NoPeak),
    }
}

pub fn estimate(method: Method, x: &Signal, cfg: &EstimatorConfig) -> Result<SpectrumEstimate> {
    match method {
        Method::Periodogram => periodogram(x, cfg),
        Method::BlackmanTukey => blackman_tukey(x, cfg),
        Method::Capon => capon(x, cfg),
        Method::YuleWalker => yule_walker(x, cfg),
        Method::ModifiedCovariance => modified_covariance(x, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocorrelation_constant() {
        let x = Signal::new(vec![1.0; 4]).unwrap();
        assert_eq!(autocorrelation(&x, 2).unwrap(), vec![1.0, 0.75, 0.5]);
        assert!(autocorrelation(&x, 4).is_err());
    }

    #[test]
    fn autocorrelation_zero() {
        let x = Signal::new(vec![0.0; 8]).unwrap();
        assert!(autocorrelation(&x, 7).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn autocorrelation_lag_zero_is_mean_square() {
        let v: Vec<f64> = (0..50).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3).collect();
        let ms = v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64;
        let x = Signal::new(v).unwrap();
        assert!((autocorrelation(&x, 0).unwrap()[0] - ms).abs() < 1e-12);
    }

    fn spectrum(power: Vec<f64>) -> SpectrumEstimate {
        let nfft = (power.len() - 1) * 2;
        SpectrumEstimate::new(Method::Periodogram, nfft, power)
    }

    #[test]
    fn peak_of_delta() {
        let mut p = vec![0.0; 513];
        p[205] = 1.0;
        assert_eq!(peak_frequency(&spectrum(p)).unwrap(), 205.0 / 1024.0);
    }

    #[test]
    fn peak_of_flat_is_first_bin() {
        assert_eq!(peak_frequency(&spectrum(vec![1.0; 513])).unwrap(), 1.0 / 1024.0);
    }

    #[test]
    fn peak_ignores_dc() {
        let mut p = vec![0.0; 9];
        p[0] = 5.0;
        assert!(matches!(peak_frequency(&spectrum(p.clone())), Err(Error::NoPeak)));
        p[3] = 1.0;
        assert_eq!(peak_frequency(&spectrum(p)).unwrap(), 3.0 / 16.0);
    }

    #[test]
    fn peak_skips_lobe_falling_from_dc() {
        // Decaying low-frequency lobe whose skirt at bin 1 exceeds a later tone.
        let mut p: Vec<f64> = (0..=512).map(|i| 100.0 / (1.0 + i as f64)).collect();
        p[205] = 50.0;
        assert_eq!(peak_frequency(&spectrum(p)).unwrap(), 205.0 / 1024.0);
    }

    #[test]
    fn monotone_spectrum_falls_back_to_argmax() {
        let p: Vec<f64> = (0..=8).map(|i| 10.0 - i as f64).collect();
        assert_eq!(peak_frequency(&spectrum(p)).unwrap(), 1.0 / 16.0);
        let p: Vec<f64> = (0..=8).map(|i| i as f64).collect();
        assert_eq!(peak_frequency(&spectrum(p)).unwrap(), 0.5);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("welch".parse::<Method>().is_err());
    }

    #[test]
    fn signal_validation() {
        assert!(Signal::new(vec![1.0]).is_err());
        assert!(Signal::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn csv_layout() {
        let s = spectrum(vec![0.5, 0.25, 1e-20]);
        let csv = s.to_csv();
        assert_eq!(csv, "freq,power\n0,0.5\n0.25,0.25\n0.5,0.00000000000000000001\n");
    }
}
