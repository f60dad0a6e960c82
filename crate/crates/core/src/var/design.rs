use nalgebra::{DMatrix, DVector};

use super::VarModel;
use crate::error::{Error, Result};
use crate::linalg;
use crate::Series;

/// Cross-product matrices of a lagged regression, pooled over trials.
///
/// Regressor column `(l - 1) * nvars + v` holds channel `v` at lag `l`, so
/// the regressors of a VAR(p) are the first `p * nvars` columns for every
/// `p <= lags`. Every column is centred within its trial, which is the same
/// as giving each trial its own intercept.
#[derive(Debug, Clone)]
pub struct LagGram {
    pub nvars: usize,
    pub lags: usize,
    pub trim: usize,
    pub nobs: usize,
    pub xx: DMatrix<f64>,
    pub xy: DMatrix<f64>,
    pub yy: DMatrix<f64>,
}

pub(crate) struct TrialBlock {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub x_mean: DVector<f64>,
    pub y_mean: DVector<f64>,
}

fn center(m: &mut DMatrix<f64>) -> DVector<f64> {
    let rows = m.nrows() as f64;
    let mut means = DVector::zeros(m.ncols());
    for (c, mut col) in m.column_iter_mut().enumerate() {
        let mean = col.sum() / rows;
        col.add_scalar_mut(-mean);
        means[c] = mean;
    }
    means
}

pub(crate) fn trial_block(s: &Series, lags: usize, trim: usize) -> TrialBlock {
    let d = s.nrows();
    let rows = s.ncols().saturating_sub(trim);
    let mut x = DMatrix::from_fn(rows, d * lags, |r, c| s[(c % d, trim + r - (c / d + 1))]);
    let mut y = DMatrix::from_fn(rows, d, |r, v| s[(v, trim + r)]);
    let x_mean = center(&mut x);
    let y_mean = center(&mut y);
    TrialBlock { x, y, x_mean, y_mean }
}

impl LagGram {
    pub fn build(trials: &[Series], lags: usize, trim: usize) -> Result<Self> {
        assert!(trim >= lags);
        let d = trials[0].nrows();
        let k = d * lags;
        let mut xx = DMatrix::zeros(k, k);
        let mut xy = DMatrix::zeros(k, d);
        let mut yy = DMatrix::zeros(d, d);
        let mut nobs = 0;
        for s in trials {
            if s.ncols() <= trim + 1 {
                continue;
            }
            let b = trial_block(s, lags, trim);
            xx += b.x.tr_mul(&b.x);
            xy += b.x.tr_mul(&b.y);
            yy += b.y.tr_mul(&b.y);
            nobs += b.y.nrows();
        }
        if nobs == 0 {
            return Err(Error::Input(format!("no trial is longer than {} samples", trim + 1)));
        }
        Ok(Self {
            nvars: d,
            lags,
            trim,
            nobs,
            xx,
            xy,
            yy,
        })
    }

    /// Residual covariance of the VAR(p) fitted from the Gram prefix, or
    /// `None` when the regressors are rank deficient.
    pub fn residual_covariance(&self, p: usize) -> Option<DMatrix<f64>> {
        let k = p * self.nvars;
        let g = self.xx.view((0, 0), (k, k)).into_owned();
        let r = self.xy.rows(0, k).into_owned();
        let sol = linalg::solve_gram(&g, &r);
        if sol.rank_deficient {
            return None;
        }
        let s = (&self.yy - r.transpose() * &sol.x) / self.nobs as f64;
        Some((&s + s.transpose()) * 0.5)
    }

    /// Residual sum of squares of `target` regressed on the given columns.
    pub fn restricted_rss(&self, target: usize, cols: &[usize]) -> f64 {
        let g = DMatrix::from_fn(cols.len(), cols.len(), |a, b| self.xx[(cols[a], cols[b])]);
        let r = DMatrix::from_fn(cols.len(), 1, |a, _| self.xy[(cols[a], target)]);
        let sol = linalg::solve_gram(&g, &r);
        let explained = (r.transpose() * sol.x)[(0, 0)];
        self.yy[(target, target)] - explained
    }

    /// Full OLS fit; requires a Gram built with `lags = trim = p`.
    pub fn fit(&self, trials: &[Series], p: usize) -> Result<VarModel> {
        if self.lags != p || self.trim != p {
            return Err(Error::Parameter(format!(
                "Gram matrix was built for {} lags, not {p}",
                self.lags
            )));
        }
        let d = self.nvars;
        let sol = linalg::solve_gram(&self.xx, &self.xy);
        if sol.rank_deficient {
            log::warn!("VAR({p}) regressors are rank deficient; coefficients are minimum-norm");
        }
        let b = sol.x;
        let coeffs: Vec<DMatrix<f64>> = (0..p)
            .map(|l| b.rows(l * d, d).transpose())
            .collect();
        let mut sigma = DMatrix::zeros(d, d);
        let mut intercepts = Vec::with_capacity(trials.len());
        for s in trials {
            if s.ncols() <= p + 1 {
                intercepts.push(DVector::zeros(d));
                continue;
            }
            let blk = trial_block(s, p, p);
            let e = &blk.y - &blk.x * &b;
            sigma += e.tr_mul(&e);
            intercepts.push(&blk.y_mean - b.tr_mul(&blk.x_mean));
        }
        sigma /= self.nobs as f64;
        let sigma = (&sigma + sigma.transpose()) * 0.5;
        Ok(VarModel {
            coeffs,
            intercepts,
            sigma,
            order: p,
            nobs: self.nobs,
            nvars: d,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_layout() {
        let s = DMatrix::from_fn(2, 6, |v, t| (10 * v + t) as f64);
        let b = trial_block(&s, 2, 2);
        // row 0 is t = 2: lag 1 -> (1, 11), lag 2 -> (0, 10), all centred
        let raw = |r: usize, c: usize| b.x[(r, c)] + b.x_mean[c];
        assert_eq!([raw(0, 0), raw(0, 1), raw(0, 2), raw(0, 3)], [1.0, 11.0, 0.0, 10.0]);
        assert_eq!(b.y[(0, 0)] + b.y_mean[0], 2.0);
        assert!(b.x.column(0).sum().abs() < 1e-12);
    }

    #[test]
    fn gram_prefix_matches_direct_fit() {
        let s = DMatrix::from_fn(2, 300, |v, t| ((t * 37 + v * 11) % 17) as f64 + (t as f64 * 0.1).sin());
        let trials = [s];
        let big = LagGram::build(&trials, 4, 4).unwrap();
        let sig_prefix = big.residual_covariance(2).unwrap();
        let small = LagGram::build(&trials, 2, 4).unwrap();
        let sig_direct = small.residual_covariance(2).unwrap();
        assert!((sig_prefix - sig_direct).abs().max() < 1e-9);
    }
}
