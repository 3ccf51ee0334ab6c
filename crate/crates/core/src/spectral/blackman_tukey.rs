use super::{autocorrelation, dtft_on_grid, EstimatorConfig, Method, Signal, SpectrumEstimate};
use crate::error::Result;

/// Bartlett-windowed autocorrelation transform, truncated at lag `M`.
/// Negative values (possible from truncation) are clamped to zero and counted.
pub fn blackman_tukey(x: &Signal, cfg: &EstimatorConfig) -> Result<SpectrumEstimate> {
    cfg.check_nfft()?;
    let m = cfg.max_lag(x.len())?;
    let r = autocorrelation(x, m)?;
    let window = |lag: usize| 1.0 - lag as f64 / (m + 1) as f64;
    // lags -M..=M
    let seq: Vec<f64> = (0..=2 * m)
        .map(|i| {
            let lag = i.abs_diff(m);
            window(lag) * r[lag]
        })
        .collect();
    let mut clamped = 0;
    let power = dtft_on_grid(&seq, -(m as isize), cfg.nfft)
        .into_iter()
        .map(|c| {
            if c.re < 0.0 {
                clamped += 1;
                0.0
            } else {
                c.re
            }
        })
        .collect();
    let mut s = SpectrumEstimate::new(Method::BlackmanTukey, cfg.nfft, power);
    s.clamped = clamped;
    Ok(s)
}
