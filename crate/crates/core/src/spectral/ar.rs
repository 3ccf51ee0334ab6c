//! Autoregressive estimators: Yule-Walker (Levinson-Durbin) and modified covariance.

use nalgebra::{DMatrix, DVector};

use super::{autocorrelation, dtft_on_grid, EstimatorConfig, Method, Signal, SpectrumEstimate};
use crate::error::{Error, Result};

/// Normal equations whose condition estimate exceeds this are treated as singular.
const MAX_CONDITION: f64 = 1e12;

/// AR model `x(n) + a_1 x(n-1) + ... + a_p x(n-p) = e(n)` with `E[e^2] = error_power`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    /// `a_1 ..= a_p`.
    pub coeffs: Vec<f64>,
    pub error_power: f64,
    /// Reflection coefficients from the recursion (empty for least-squares fits).
    pub reflection: Vec<f64>,
}

impl ArModel {
    /// `error_power / |A(f)|^2` on the one-sided `nfft` grid.
    pub fn spectrum(&self, nfft: usize) -> Vec<f64> {
        let mut poly = Vec::with_capacity(self.coeffs.len() + 1);
        poly.push(1.0);
        poly.extend_from_slice(&self.coeffs);
        dtft_on_grid(&poly, 0, nfft)
            .into_iter()
            .map(|a| self.error_power / a.norm_sqr())
            .collect()
    }
}

/// Solves the order-`p` Yule-Walker equations from `r(0..=p)`.
pub fn levinson_durbin(r: &[f64], p: usize) -> Result<ArModel> {
    if r.len() <= p {
        return Err(Error::usage(format!("need r(0..={p}), got {} lags", r.len())));
    }
    if r[0] == 0.0 {
        return Err(Error::DegenerateSignal("zero autocorrelation at lag 0".into()));
    }
    let mut a = vec![0.0; p];
    let mut err = r[0];
    let mut reflection = Vec::with_capacity(p);
    for m in 0..p {
        let acc = r[m + 1] + (0..m).map(|k| a[k] * r[m - k]).sum::<f64>();
        let k = -acc / err;
        if !k.is_finite() {
            return Err(Error::Numeric(format!("reflection coefficient at order {} is not finite", m + 1)));
        }
        let prev = a.clone();
        for j in 0..m {
            a[j] = prev[j] + k * prev[m - 1 - j];
        }
        a[m] = k;
        err *= 1.0 - k * k;
        reflection.push(k);
        if !(err.is_finite() && err > 0.0) {
            return Err(Error::Numeric(format!("prediction error power {err} at order {}", m + 1)));
        }
    }
    Ok(ArModel {
        coeffs: a,
        error_power: err,
        reflection,
    })
}

pub fn yule_walker(x: &Signal, cfg: &EstimatorConfig) -> Result<SpectrumEstimate> {
    cfg.check_nfft()?;
    cfg.check_order(x.len())?;
    if x.is_zero() {
        return Err(Error::DegenerateSignal("signal is identically zero".into()));
    }
    let r = autocorrelation(x, cfg.order)?;
    let model = levinson_durbin(&r, cfg.order)?;
    Ok(SpectrumEstimate::new(Method::YuleWalker, cfg.nfft, model.spectrum(cfg.nfft)))
}

/// Forward-backward least-squares AR fit of order `p`.
pub fn modified_covariance_model(x: &Signal, p: usize) -> Result<ArModel> {
    let s = x.samples();
    let n = s.len();
    if n <= 2 * p || p == 0 {
        return Err(Error::usage(format!("modified covariance needs N > 2p >= 2 (N = {n}, p = {p})")));
    }
    if x.is_zero() {
        return Err(Error::DegenerateSignal("signal is identically zero".into()));
    }
    // c(j,k) = sum_{t=p}^{N-1} x(t-j) x(t-k) + x(t-p+j) x(t-p+k)
    let c = DMatrix::from_fn(p + 1, p + 1, |j, k| {
        (p..n)
            .map(|t| s[t - j] * s[t - k] + s[t - p + j] * s[t - p + k])
            .sum::<f64>()
    });
    let normal = c.view((1, 1), (p, p)).into_owned();
    let rhs = -c.view((1, 0), (p, 1)).into_owned();

    let sv = normal.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::Singular { condition });
    }
    let a: DVector<f64> = normal
        .lu()
        .solve(&rhs.column(0).into_owned())
        .ok_or(Error::Singular { condition })?;

    let scale = 2.0 * (n - p) as f64;
    let residual = c[(0, 0)] + (0..p).map(|k| a[k] * c[(0, k + 1)]).sum::<f64>();
    // Exact fits leave a rounding-level (possibly negative) residual.
    let error_power = (residual / scale).max(c[(0, 0)] / scale * 1e-15);
    if !error_power.is_finite() {
        return Err(Error::Numeric("non-finite residual power".into()));
    }
    Ok(ArModel {
        coeffs: a.iter().copied().collect(),
        error_power,
        reflection: Vec::new(),
    })
}

pub fn modified_covariance(x: &Signal, cfg: &EstimatorConfig) -> Result<SpectrumEstimate> {
    cfg.check_nfft()?;
    let model = modified_covariance_model(x, cfg.order)?;
    Ok(SpectrumEstimate::new(Method::ModifiedCovariance, cfg.nfft, model.spectrum(cfg.nfft)))
}
