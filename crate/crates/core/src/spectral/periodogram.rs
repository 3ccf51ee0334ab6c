use super::{dtft_on_grid, EstimatorConfig, Method, Signal, SpectrumEstimate};
use crate::error::Result;

/// `|X(f)|^2 / N` on the zero-padded `nfft` grid.
pub fn periodogram(x: &Signal, cfg: &EstimatorConfig) -> Result<SpectrumEstimate> {
    cfg.check_nfft()?;
    let n = x.len() as f64;
    let power = dtft_on_grid(x.samples(), 0, cfg.nfft)
        .into_iter()
        .map(|c| c.norm_sqr() / n)
        .collect();
    Ok(SpectrumEstimate::new(Method::Periodogram, cfg.nfft, power))
}
