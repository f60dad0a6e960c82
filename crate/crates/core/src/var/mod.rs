//! Vector autoregression fitting and time-domain Granger causality.
//!
//! Series are `nvars x len` matrices. Several series of the same channels can
//! be pooled as independent trials: lag windows never cross trial boundaries
//! and each trial gets its own intercept.

mod autocov;
mod connectivity;
mod design;
mod gc;

pub use autocov::{autocovariance, spectral_radius, whittle_innovation};
pub use connectivity::{connectivity_from_series, connectivity_with, ConnectivityMatrix};
pub use design::LagGram;
pub use gc::{
    clamp_ratio, estimator_registry, gc_conditional, gc_from_context, gc_from_context_default, gc_pairwise, gc_significance, DualRegression, GcContext,
    GcResult, GrangerEstimator, SingleRegression, DEFAULT_ALPHA, DEFAULT_ESTIMATOR,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::Series;

/// Upper bound on candidate orders used throughout the experiments.
pub const DEFAULT_MAX_LAGS: usize = 30;

/// `x_t = c + sum_l A_l x_{t-l} + e_t`, `cov(e) = sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarModel {
    /// `A_1 .. A_p`, each `nvars x nvars`.
    pub coeffs: Vec<DMatrix<f64>>,
    /// One intercept per pooled trial.
    pub intercepts: Vec<DVector<f64>>,
    /// Residual covariance normalised by `nobs`.
    pub sigma: DMatrix<f64>,
    pub order: usize,
    pub nobs: usize,
    pub nvars: usize,
}

impl VarModel {
    /// Builds a model from known parameters (zero intercept).
    pub fn from_parts(coeffs: Vec<DMatrix<f64>>, sigma: DMatrix<f64>) -> Result<Self> {
        let nvars = sigma.nrows();
        if sigma.ncols() != nvars || coeffs.iter().any(|a| a.shape() != (nvars, nvars)) {
            return Err(Error::Dimension("coefficient and covariance shapes disagree".into()));
        }
        Ok(Self {
            order: coeffs.len(),
            coeffs,
            intercepts: vec![DVector::zeros(nvars)],
            sigma,
            nobs: 0,
            nvars,
        })
    }

    /// Companion matrix of the lag polynomial.
    pub fn companion(&self) -> DMatrix<f64> {
        let (d, p) = (self.nvars, self.order);
        let mut c = DMatrix::zeros(d * p, d * p);
        for (l, a) in self.coeffs.iter().enumerate() {
            c.view_mut((0, l * d), (d, d)).copy_from(a);
        }
        for i in d..d * p {
            c[(i, i - d)] = 1.0;
        }
        c
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(self)
    }

    pub fn is_stationary(&self) -> bool {
        self.order == 0 || self.spectral_radius() < 1.0
    }

    /// Simulates `len` samples after `burn_in` discarded ones, driven by
    /// Gaussian innovations with covariance `sigma`.
    pub fn simulate(&self, len: usize, burn_in: usize, seed: u64) -> Result<Series> {
        let d = self.nvars;
        let chol = self
            .sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::DegenerateCovariance("sigma is not positive definite".into()))?;
        let l = chol.l();
        let mut normals = crate::rng::normals(seed, crate::rng::STREAM_SIGNAL);
        let total = len + burn_in;
        let mut x = DMatrix::<f64>::zeros(d, total);
        let c = self.intercepts.first().cloned().unwrap_or_else(|| DVector::zeros(d));
        for t in 0..total {
            let e = &l * DVector::from_vec(normals.fill(d));
            let mut v = &c + e;
            for (k, a) in self.coeffs.iter().enumerate() {
                if t > k {
                    v += a * x.column(t - k - 1);
                }
            }
            x.set_column(t, &v);
        }
        Ok(x.columns(burn_in, len).into_owned())
    }
}

fn check_trials(trials: &[Series]) -> Result<usize> {
    let first = trials.first().ok_or_else(|| Error::Input("no series given".into()))?;
    let d = first.nrows();
    if d == 0 {
        return Err(Error::Input("series has no channels".into()));
    }
    for (k, s) in trials.iter().enumerate() {
        if s.nrows() != d {
            return Err(Error::Dimension(format!("trial {k} has {} channels, expected {d}", s.nrows())));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!("trial {k} contains non-finite values")));
        }
    }
    for v in 0..d {
        let constant = trials.iter().all(|s| {
            let row = s.row(v);
            row.iter().all(|x| *x == row[0])
        });
        if constant {
            return Err(Error::Input(format!("channel {v} has zero variance")));
        }
    }
    Ok(d)
}

/// OLS fit of a VAR(p) with intercept to one series.
pub fn fit_var(series: &Series, p: usize) -> Result<VarModel> {
    fit_var_trials(std::slice::from_ref(series), p)
}

/// OLS fit of a VAR(p) pooling `trials`, each with its own intercept.
pub fn fit_var_trials(trials: &[Series], p: usize) -> Result<VarModel> {
    let d = check_trials(trials)?;
    let rows: usize = trials.iter().map(|s| s.ncols().saturating_sub(p)).sum();
    if rows <= p * d + 10 {
        return Err(Error::Input(format!(
            "{rows} usable observations are too few for a VAR({p}) in {d} channels"
        )));
    }
    let gram = LagGram::build(trials, p, p)?;
    gram.fit(trials, p)
}

/// AIC order selection over `1..=max_lags` on a common window that trims the
/// first `max_lags` samples of every trial. Ties go to the smaller order.
pub fn select_order_aic(trials: &[Series], max_lags: usize) -> Result<usize> {
    if max_lags == 0 {
        return Err(Error::Parameter("max_lags must be at least 1".into()));
    }
    let d = check_trials(trials)?;
    let gram = LagGram::build(trials, max_lags, max_lags)?;
    let nobs = gram.nobs as f64;
    let mut best: Option<(f64, usize)> = None;
    for p in 1..=max_lags {
        if gram.nobs <= p * d + 10 {
            break;
        }
        let Some(sigma) = gram.residual_covariance(p) else { continue };
        let Some(lndet) = linalg::ln_det_spd(&sigma) else { continue };
        let aic = lndet + 2.0 * (p * d * d) as f64 / nobs;
        if best.map_or(true, |(b, _)| aic < b) {
            best = Some((aic, p));
        }
    }
    best.map(|(_, p)| p).ok_or(Error::NoOrder)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var1() -> VarModel {
        VarModel::from_parts(
            vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.3, 0.4])],
            DMatrix::identity(2, 2) * 0.1,
        )
        .unwrap()
    }

    #[test]
    fn recovers_known_var1() {
        let x = var1().simulate(10_000, 200, 3).unwrap();
        let fit = fit_var(&x, 1).unwrap();
        let truth = [0.5, 0.0, 0.3, 0.4];
        for (k, t) in truth.iter().enumerate() {
            let (i, j) = (k / 2, k % 2);
            assert!((fit.coeffs[0][(i, j)] - t).abs() < 0.03, "{:?}", fit.coeffs[0]);
        }
        assert_eq!(fit.nobs, 9_999);
        assert!((fit.sigma[(0, 0)] - 0.1).abs() < 0.01);
    }

    #[test]
    fn white_noise_coefficients_near_zero() {
        let wn = VarModel::from_parts(vec![], DMatrix::identity(2, 2)).unwrap();
        let x = wn.simulate(5000, 0, 8).unwrap();
        let fit = fit_var(&x, 1).unwrap();
        assert!(fit.coeffs[0].iter().all(|v| v.abs() < 0.05));
    }

    #[test]
    fn intercept_absorbs_offset() {
        let wn = VarModel::from_parts(vec![], DMatrix::identity(2, 2)).unwrap();
        let mut x = wn.simulate(5000, 0, 9).unwrap();
        x.row_mut(0).add_scalar_mut(50.0);
        let fit = fit_var(&x, 1).unwrap();
        assert!(fit.coeffs[0].iter().all(|v| v.abs() < 0.05));
        let implied_mean = fit.intercepts[0][0] / (1.0 - fit.coeffs[0][(0, 0)]);
        assert!((implied_mean - 50.0).abs() < 0.1, "{implied_mean}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut x = DMatrix::from_fn(2, 100, |i, t| ((i + 1) * t) as f64 % 7.0);
        assert!(fit_var(&x, 45).is_err());
        x.row_mut(1).fill(3.0);
        assert!(matches!(fit_var(&x, 1), Err(Error::Input(_))));
        assert!(select_order_aic(&[x], 0).is_err());
    }

    #[test]
    fn aic_picks_low_order_for_var1() {
        let mut hits = 0;
        for seed in 0..20 {
            let x = var1().simulate(10_000, 200, seed).unwrap();
            if select_order_aic(&[x], 30).unwrap() <= 2 {
                hits += 1;
            }
        }
        assert!(hits >= 19, "{hits}/20");
    }

    #[test]
    fn aic_white_noise_prefers_order_one() {
        let wn = VarModel::from_parts(vec![], DMatrix::identity(2, 2)).unwrap();
        let mut ones = 0;
        for seed in 0..10 {
            let x = wn.simulate(3000, 0, 100 + seed).unwrap();
            if select_order_aic(&[x], 10).unwrap() == 1 {
                ones += 1;
            }
        }
        assert!(ones >= 8);
    }

    #[test]
    fn stationarity() {
        assert!(var1().is_stationary());
        assert!((var1().spectral_radius() - 0.5).abs() < 1e-12);
        let unit = VarModel::from_parts(vec![DMatrix::identity(2, 2)], DMatrix::identity(2, 2)).unwrap();
        assert!(!unit.is_stationary());
    }
}
