//! Frequency-domain Granger causality for bivariate VAR models.
//!
//! Frequencies are in radians per sample. Curves are sampled at the `F`
//! midpoints `(k + 1/2) pi / F` of `[0, pi)`; for a real process the spectrum
//! is even, so the mean of the samples is the periodic trapezoid estimate of
//! `(1 / 2pi) * integral over [-pi, pi]`.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::var::{fit_var_trials, VarModel};
use crate::Series;

/// Default grid size.
pub const DEFAULT_GRID: usize = 1024;
const MIN_GRID: usize = 64;
const DENOM_GUARD: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

/// Midpoint grid of `f` frequencies on `[0, pi)`.
pub fn frequency_grid(f: usize) -> Vec<f64> {
    (0..f)
        .map(|k| (k as f64 + 0.5) * std::f64::consts::PI / f as f64)
        .collect()
}

fn check_grid(f: usize) -> Result<()> {
    if f < MIN_GRID {
        return Err(Error::Parameter(format!("grid size {f} below the minimum {MIN_GRID}")));
    }
    Ok(())
}

/// Lag polynomial `B(f) = I - sum_k A_k e^{-i f k}`.
pub fn lag_polynomial(model: &VarModel, freq: f64) -> CMatrix {
    let d = model.nvars;
    let mut b = CMatrix::identity(d, d);
    for (k, a) in model.coeffs.iter().enumerate() {
        let w = Complex64::from_polar(1.0, -freq * (k + 1) as f64);
        for i in 0..d {
            for j in 0..d {
                b[(i, j)] -= w * a[(i, j)];
            }
        }
    }
    b
}

/// `H(f) = B(f)^{-1}` at a single frequency.
pub fn transfer_at(model: &VarModel, freq: f64) -> Result<CMatrix> {
    let b = lag_polynomial(model, freq);
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let lu = b.lu();
    let d = model.nvars;
    let pivot_min = (0..d).map(|i| lu.u()[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if d > 0 && !(pivot_min > 1e-12 * scale) {
        return Err(Error::SingularTransfer { frequency: freq });
    }
    lu.try_inverse().ok_or(Error::SingularTransfer { frequency: freq })
}

/// Transfer matrices over the `f`-point grid.
pub fn transfer_function(model: &VarModel, f: usize) -> Result<Vec<CMatrix>> {
    check_grid(f)?;
    if !model.is_stationary() {
        return Err(Error::NonStationary(model.spectral_radius()));
    }
    frequency_grid(f).into_iter().map(|w| transfer_at(model, w)).collect()
}

fn complex_sigma(sigma: &DMatrix<f64>) -> CMatrix {
    sigma.map(|v| Complex64::new(v, 0.0))
}

/// `S(f) = H(f) Sigma H(f)^*` over the grid.
pub fn spectral_density(model: &VarModel, f: usize) -> Result<Vec<CMatrix>> {
    let sigma = complex_sigma(&model.sigma);
    Ok(transfer_function(model, f)?
        .iter()
        .map(|h| h * &sigma * h.adjoint())
        .collect())
}

/// Bivariate transfer functions after the covariance-orthogonalising
/// transform, with the target ordered first.
#[derive(Debug, Clone)]
pub struct TransferDecomposition {
    pub h: Vec<CMatrix>,
    pub h_tilde: Vec<CMatrix>,
    /// Target innovation variance.
    pub sigma11: f64,
    /// `Sigma22 - Sigma12^2 / Sigma11`.
    pub sigma_tilde22: f64,
}

impl TransferDecomposition {
    /// Intrinsic and causal parts of the target autospectrum at grid index `k`.
    pub fn split(&self, k: usize) -> (f64, f64) {
        let intrinsic = self.sigma11 * self.h_tilde[k][(0, 0)].norm_sqr();
        let causal = self.sigma_tilde22 * self.h[k][(0, 1)].norm_sqr();
        (intrinsic, causal)
    }

    /// `S~11 = H~11 Sigma11 H~11^* + H12 Sigma~22 H12^*`.
    pub fn target_autospectrum(&self, k: usize) -> f64 {
        let (a, b) = self.split(k);
        a + b
    }
}

fn reorder(h: &CMatrix, target: usize) -> CMatrix {
    if target == 0 {
        h.clone()
    } else {
        CMatrix::from_fn(2, 2, |i, j| h[(1 - i, 1 - j)])
    }
}

/// Geweke's transform of bivariate transfer matrices for `target` (0 or 1).
pub fn geweke_transform(h: &[CMatrix], sigma: &DMatrix<f64>, target: usize) -> Result<TransferDecomposition> {
    if sigma.shape() != (2, 2) || h.iter().any(|m| m.shape() != (2, 2)) || target > 1 {
        return Err(Error::Dimension("Geweke transform needs a bivariate model and target 0 or 1".into()));
    }
    let s = if target == 0 {
        sigma.clone()
    } else {
        DMatrix::from_fn(2, 2, |i, j| sigma[(1 - i, 1 - j)])
    };
    let s11 = s[(0, 0)];
    if !(s11 > 0.0) {
        return Err(Error::DegenerateCovariance(format!("target innovation variance {s11}")));
    }
    let ratio = s[(0, 1)] / s11;
    let mut sigma_tilde22 = s[(1, 1)] - s[(0, 1)] * s[(0, 1)] / s11;
    if sigma_tilde22 < 0.0 {
        if sigma_tilde22 > -DENOM_GUARD * s[(1, 1)].abs() {
            log::warn!("clamping transformed source variance {sigma_tilde22:e} to zero");
            sigma_tilde22 = 0.0;
        } else {
            return Err(Error::DegenerateCovariance("innovation covariance is not positive semidefinite".into()));
        }
    }
    let h: Vec<CMatrix> = h.iter().map(|m| reorder(m, target)).collect();
    let h_tilde = h
        .iter()
        .map(|m| {
            let mut t = m.clone();
            t[(0, 0)] = m[(0, 0)] + m[(0, 1)] * ratio;
            t[(1, 0)] = m[(1, 0)] + m[(1, 1)] * ratio;
            t
        })
        .collect();
    Ok(TransferDecomposition {
        h,
        h_tilde,
        sigma11: s11,
        sigma_tilde22,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGcCurve {
    pub source: usize,
    pub target: usize,
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
    pub integral: f64,
}

impl SpectralGcCurve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "freq,value")?;
        for (f, v) in self.freqs.iter().zip(&self.values) {
            writeln!(out, "{f:?},{v:?}")?;
        }
        Ok(())
    }
}

/// `(1 / 2pi) * integral of I(f)` over `[-pi, pi]` from the half grid.
pub fn integrate_spectral_gc(curve: &SpectralGcCurve) -> f64 {
    integrate(&curve.values)
}

fn integrate(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

fn influence(intrinsic: f64, causal: f64, freq: f64) -> Result<f64> {
    let total = intrinsic + causal;
    if intrinsic <= 0.0 {
        if total <= 0.0 || intrinsic.abs() <= DENOM_GUARD * total {
            return Err(Error::Numerical(format!("intrinsic power vanishes at frequency {freq:.6}")));
        }
        return Err(Error::Numerical(format!("negative intrinsic power at frequency {freq:.6}")));
    }
    let v = (total / intrinsic).ln();
    Ok(if v < 0.0 { 0.0 } else { v })
}

/// Spectral GC `I_{source -> target}(f)` of a bivariate model.
pub fn spectral_gc(model: &VarModel, source: usize, target: usize, f: usize) -> Result<SpectralGcCurve> {
    if model.nvars != 2 {
        return Err(Error::Parameter(format!(
            "spectral GC needs a bivariate model, got {} channels; use spectral_gc_series",
            model.nvars
        )));
    }
    if source > 1 || target > 1 || source == target {
        return Err(Error::Parameter(format!("invalid source/target ({source}, {target})")));
    }
    let h = transfer_function(model, f)?;
    let dec = geweke_transform(&h, &model.sigma, target)?;
    let freqs = frequency_grid(f);
    let values = freqs
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let (a, b) = dec.split(k);
            influence(a, b, w)
        })
        .collect::<Result<Vec<_>>>()?;
    let integral = integrate(&values);
    Ok(SpectralGcCurve {
        source,
        target,
        freqs,
        values,
        integral,
    })
}

/// `I_{source -> target}` at a single frequency.
pub fn spectral_gc_at(model: &VarModel, source: usize, target: usize, freq: f64) -> Result<f64> {
    if model.nvars != 2 || source > 1 || target > 1 || source == target {
        return Err(Error::Parameter("spectral GC needs a bivariate model".into()));
    }
    let h = transfer_at(model, freq)?;
    let dec = geweke_transform(&[h], &model.sigma, target)?;
    let (a, b) = dec.split(0);
    influence(a, b, freq)
}

/// Refits the `(source, target)` pair of a multichannel series as a
/// bivariate VAR(p) and returns its spectral GC curve, indexed in the
/// original channel numbering.
pub fn spectral_gc_series(trials: &[Series], source: usize, target: usize, p: usize, f: usize) -> Result<SpectralGcCurve> {
    let d = trials.first().map(|s| s.nrows()).unwrap_or(0);
    if source >= d || target >= d || source == target {
        return Err(Error::Parameter(format!("invalid source/target ({source}, {target}) for {d} channels")));
    }
    let pair: Vec<Series> = trials
        .iter()
        .map(|s| DMatrix::from_fn(2, s.ncols(), |v, t| s[(if v == 0 { target } else { source }, t)]))
        .collect();
    let model = fit_var_trials(&pair, p)?;
    let mut curve = spectral_gc(&model, 1, 0, f)?;
    curve.source = source;
    curve.target = target;
    Ok(curve)
}

/// Spectral matrix of white noise with covariance `sigma`.
pub fn white_spectrum(sigma: &DMatrix<f64>) -> CMatrix {
    complex_sigma(sigma)
}
