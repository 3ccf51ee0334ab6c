//! Minimum-variance (Capon) spectrum from the Toeplitz autocorrelation matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{autocorrelation, EstimatorConfig, Method, Signal, SpectrumEstimate};
use crate::error::{Error, Result};

const DIAGONAL_LOADING: f64 = 1e-8;

/// `P(f) = (p+1) / (e^H R^-1 e)` with `e(f) = [1, e^{j2pi f}, ..., e^{j2pi f p}]`.
pub fn capon(x: &Signal, cfg: &EstimatorConfig) -> Result<SpectrumEstimate> {
    cfg.check_nfft()?;
    cfg.check_order(x.len())?;
    let p = cfg.order;
    let r = autocorrelation(x, p)?;
    let toeplitz = DMatrix::from_fn(p + 1, p + 1, |i, j| r[i.abs_diff(j)]);

    let chol = match toeplitz.clone().cholesky() {
        Some(c) => c,
        None => {
            let loaded = &toeplitz + DMatrix::identity(p + 1, p + 1) * (DIAGONAL_LOADING * r[0]);
            loaded.cholesky().ok_or(Error::Singular {
                condition: f64::INFINITY,
            })?
        }
    };
    let inv = chol.inverse();

    // e^H R^-1 e = q(0) + 2 sum_{d>0} q(d) cos(2 pi f d), q(d) = sum of the d-th diagonal.
    let diag: Vec<f64> = (0..=p)
        .map(|d| (0..=p - d).map(|i| inv[(i, i + d)]).sum())
        .collect();
    let power = (0..=cfg.nfft / 2)
        .map(|i| {
            let f = i as f64 / cfg.nfft as f64;
            let quad = diag[0] + 2.0 * (1..=p).map(|d| diag[d] * (2.0 * PI * f * d as f64).cos()).sum::<f64>();
            (p + 1) as f64 / quad
        })
        .collect::<Vec<_>>();
    if power.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Numeric("Capon quadratic form not positive".into()));
    }
    Ok(SpectrumEstimate::new(Method::Capon, cfg.nfft, power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::peak_frequency;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn noise(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, sigma).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn matches_complex_quadratic_form() {
        let x = Signal::new(noise(200, 1.0, 9)).unwrap();
        let cfg = EstimatorConfig { order: 3, nfft: 64, ..Default::default() };
        let s = capon(&x, &cfg).unwrap();
        let r = autocorrelation(&x, 3).unwrap();
        let inv = DMatrix::from_fn(4, 4, |i, j| r[i.abs_diff(j)]).try_inverse().unwrap();
        for (f, pw) in s.freqs.iter().zip(&s.power) {
            let e: Vec<Complex64> = (0..4).map(|k| Complex64::from_polar(1.0, 2.0 * PI * f * k as f64)).collect();
            let mut q = Complex64::new(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    q += e[i].conj() * inv[(i, j)] * e[j];
                }
            }
            assert!((pw - 4.0 / q.re).abs() < 1e-9 * pw.abs().max(1.0));
        }
    }

    #[test]
    fn white_noise_is_flat() {
        let sigma2: f64 = 2.0;
        let x = Signal::new(noise(8192, sigma2.sqrt(), 21)).unwrap();
        let cfg = EstimatorConfig { order: 8, ..Default::default() };
        let s = capon(&x, &cfg).unwrap();
        for p in &s.power {
            assert!((p / sigma2 - 1.0).abs() < 0.2, "{p}");
        }
    }

    #[test]
    fn tone_in_noise() {
        let w = noise(1024, 0.3, 2);
        let v: Vec<f64> = (0..1024).map(|i| (0.4 * PI * i as f64).cos() + w[i]).collect();
        let s = capon(&Signal::new(v).unwrap(), &EstimatorConfig::default()).unwrap();
        assert!((peak_frequency(&s).unwrap() - 0.2).abs() <= 0.01);
    }

    #[test]
    fn zero_signal_is_singular() {
        let x = Signal::new(vec![0.0; 64]).unwrap();
        assert!(matches!(capon(&x, &EstimatorConfig::default()), Err(Error::Singular { .. })));
    }
}
