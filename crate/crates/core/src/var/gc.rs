use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{autocovariance, spectral_radius, whittle_innovation, LagGram, VarModel};
use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::Series;

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_ESTIMATOR: &str = "single-regression";

/// Largest negative rounding error silently clamped to zero.
const CLAMP_FLOOR: f64 = 1e-12;
/// Autocovariance decay level that fixes the reduced-model order.
const DECAY_LEVEL: f64 = 1e-10;
const MAX_REDUCED_ORDER: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcResult {
    pub source: usize,
    pub target: usize,
    /// Other channels kept in both models; empty for a pairwise test.
    pub conditioning: Vec<usize>,
    pub f_stat: f64,
    pub p_value: f64,
    pub significant: bool,
    pub order: usize,
    pub nobs: usize,
}

/// Chi-square test of `nobs * f_stat` with `p * n_sources` degrees of freedom.
pub fn gc_significance(f_stat: f64, nobs: usize, p: usize, n_sources: usize, alpha: f64) -> (f64, bool) {
    let df = (p * n_sources) as f64;
    let stat = nobs as f64 * f_stat;
    let p_value = if stat <= 0.0 || df == 0.0 {
        1.0
    } else {
        ChiSquared::new(df).map(|c| c.sf(stat)).unwrap_or(1.0)
    };
    (p_value, p_value < alpha)
}

/// Clamps rounding-level negative statistics to zero; larger negative
/// values are reported as numerical failures.
pub fn clamp_ratio(f: f64) -> Result<f64> {
    if f.is_nan() {
        return Err(Error::Numerical("Granger statistic is NaN".into()));
    }
    if f >= 0.0 {
        Ok(f)
    } else if f > -CLAMP_FLOOR {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("negative Granger statistic {f:e}")))
    }
}

/// A fitted VAR plus the cached quantities estimators need.
pub struct GcContext {
    pub model: VarModel,
    pub gram: LagGram,
    rho: f64,
    gammas: OnceLock<std::result::Result<Vec<DMatrix<f64>>, String>>,
}

impl GcContext {
    pub fn new(trials: &[Series], p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Parameter("order must be at least 1".into()));
        }
        let model = super::fit_var_trials(trials, p)?;
        let gram = LagGram::build(trials, p, p)?;
        let rho = spectral_radius(&model);
        Ok(Self {
            model,
            gram,
            rho,
            gammas: OnceLock::new(),
        })
    }

    pub fn spectral_radius(&self) -> f64 {
        self.rho
    }

    /// Order of the finite predictor used for reduced models: long enough for
    /// the autocovariances to decay to `1e-10` of their size.
    pub fn reduced_order(&self) -> usize {
        let p = self.model.order;
        if self.rho <= 0.0 {
            return p;
        }
        let q = (DECAY_LEVEL.ln() / self.rho.ln()).ceil();
        (q as usize).clamp(p, MAX_REDUCED_ORDER)
    }

    pub fn autocovariances(&self) -> Result<&[DMatrix<f64>]> {
        if self.rho >= 1.0 {
            return Err(Error::NonStationary(self.rho));
        }
        let q = self.reduced_order();
        self.gammas
            .get_or_init(|| autocovariance(&self.model, q).map_err(|e| e.to_string()))
            .as_deref()
            .map_err(|e| Error::Numerical(e.clone()))
    }
}

/// Time-domain Granger estimator: residual-variance log ratios for every
/// target when the `dropped` channels are removed from the regressors.
pub trait GrangerEstimator: Send + Sync {
    /// One entry per channel, `None` for dropped channels. Values are not
    /// yet clamped.
    fn log_ratios(&self, ctx: &GcContext, dropped: &[usize]) -> Result<Vec<Option<f64>>>;
}

/// Reduced model from two OLS fits on the same window and order.
#[derive(Debug, Default, Clone, Copy)]
pub struct DualRegression;

impl GrangerEstimator for DualRegression {
    fn log_ratios(&self, ctx: &GcContext, dropped: &[usize]) -> Result<Vec<Option<f64>>> {
        let g = &ctx.gram;
        let d = g.nvars;
        let all: Vec<usize> = (0..d * g.lags).collect();
        let kept: Vec<usize> = all.iter().copied().filter(|c| !dropped.contains(&(c % d))).collect();
        (0..d)
            .map(|i| {
                if dropped.contains(&i) {
                    return Ok(None);
                }
                let full = g.restricted_rss(i, &all);
                let reduced = g.restricted_rss(i, &kept);
                if full <= 0.0 {
                    return Err(Error::DegenerateFit(format!("channel {i} is fitted exactly")));
                }
                Ok(Some((reduced / full).ln()))
            })
            .collect()
    }
}

/// Reduced model derived from the full fit: the autocovariance of the fitted
/// VAR is restricted to the kept channels and the innovation covariance of
/// that subprocess is obtained by a long Whittle recursion. Avoids the
/// truncation bias of refitting the reduced model at the full-model order.
#[derive(Debug, Default, Clone, Copy)]
pub struct SingleRegression;

impl GrangerEstimator for SingleRegression {
    fn log_ratios(&self, ctx: &GcContext, dropped: &[usize]) -> Result<Vec<Option<f64>>> {
        let gammas = match ctx.autocovariances() {
            Ok(g) => g,
            Err(Error::NonStationary(rho)) => {
                log::warn!("fitted VAR is not stationary (radius {rho:.4}); using dual regression");
                return DualRegression.log_ratios(ctx, dropped);
            }
            Err(e) => return Err(e),
        };
        let d = ctx.model.nvars;
        let kept: Vec<usize> = (0..d).filter(|v| !dropped.contains(v)).collect();
        let sub: Vec<DMatrix<f64>> = gammas
            .iter()
            .map(|g| DMatrix::from_fn(kept.len(), kept.len(), |a, b| g[(kept[a], kept[b])]))
            .collect();
        let q = sub.len() - 1;
        let vr = whittle_innovation(&sub, q)?;
        let mut out = vec![None; d];
        for (a, &i) in kept.iter().enumerate() {
            let full = ctx.model.sigma[(i, i)];
            if full <= 0.0 {
                return Err(Error::DegenerateFit(format!("channel {i} is fitted exactly")));
            }
            out[i] = Some((vr[(a, a)] / full).ln());
        }
        Ok(out)
    }
}

pub fn estimator_registry() -> Registry<dyn GrangerEstimator> {
    let mut reg: Registry<dyn GrangerEstimator> = Registry::new("Granger estimator");
    reg.register("single-regression", Box::new(SingleRegression));
    reg.register("dual-regression", Box::new(DualRegression));
    reg
}

/// Granger causality from `source` to `target` conditioned on all other
/// channels of `series`, with the default estimator and `alpha = 0.01`.
pub fn gc_conditional(series: &Series, source: usize, target: usize, p: usize) -> Result<GcResult> {
    let ctx = GcContext::new(std::slice::from_ref(series), p)?;
    gc_from_context(&ctx, &SingleRegression, source, target, DEFAULT_ALPHA)
}

/// Granger causality from `x` to `z` in the bivariate model.
pub fn gc_pairwise(x: &[f64], z: &[f64], p: usize) -> Result<GcResult> {
    if x.len() != z.len() {
        return Err(Error::Dimension(format!("series lengths differ: {} vs {}", x.len(), z.len())));
    }
    let series = DMatrix::from_fn(2, x.len(), |v, t| if v == 0 { x[t] } else { z[t] });
    gc_conditional(&series, 0, 1, p)
}

pub fn gc_from_context(
    ctx: &GcContext,
    estimator: &dyn GrangerEstimator,
    source: usize,
    target: usize,
    alpha: f64,
) -> Result<GcResult> {
    let d = ctx.model.nvars;
    if source >= d || target >= d || source == target {
        return Err(Error::Parameter(format!(
            "invalid source/target ({source}, {target}) for {d} channels"
        )));
    }
    let ratios = estimator.log_ratios(ctx, &[source])?;
    let f = clamp_ratio(ratios[target].expect("target kept"))?;
    Ok(result(ctx, source, target, f, alpha))
}

/// [`gc_from_context`] with the default estimator and `alpha = 0.01`.
pub fn gc_from_context_default(ctx: &GcContext, source: usize, target: usize) -> Result<GcResult> {
    gc_from_context(ctx, &SingleRegression, source, target, DEFAULT_ALPHA)
}

pub(crate) fn result(ctx: &GcContext, source: usize, target: usize, f: f64, alpha: f64) -> GcResult {
    let (p_value, significant) = gc_significance(f, ctx.model.nobs, ctx.model.order, 1, alpha);
    GcResult {
        source,
        target,
        conditioning: (0..ctx.model.nvars).filter(|&v| v != source && v != target).collect(),
        f_stat: f,
        p_value,
        significant,
        order: ctx.model.order,
        nobs: ctx.model.nobs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coupled() -> VarModel {
        // x1 -> x2 with coupling 0.5
        VarModel::from_parts(
            vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.5, 0.4])],
            DMatrix::identity(2, 2) * 0.1,
        )
        .unwrap()
    }

    #[test]
    fn significance_hand_values() {
        assert_eq!(gc_significance(0.0, 1000, 2, 1, 0.01), (1.0, false));
        let (pv, sig) = gc_significance(0.05, 1000, 2, 1, 0.01);
        // chi2(2) tail is exp(-x/2)
        assert!((pv - (-25.0f64).exp()).abs() < 1e-15 && sig);
    }

    #[test]
    fn clamp_rules() {
        assert_eq!(clamp_ratio(-5e-13).unwrap(), 0.0);
        assert!(clamp_ratio(-1e-9).is_err());
        assert_eq!(clamp_ratio(0.2).unwrap(), 0.2);
    }

    #[test]
    fn detects_direction() {
        let x = coupled().simulate(5000, 100, 1).unwrap();
        let fwd = gc_pairwise(x.row(0).transpose().as_slice(), x.row(1).transpose().as_slice(), 1).unwrap();
        let rev = gc_pairwise(x.row(1).transpose().as_slice(), x.row(0).transpose().as_slice(), 1).unwrap();
        assert!(fwd.significant && fwd.f_stat > 0.1);
        assert!(!rev.significant);
    }

    #[test]
    fn estimators_agree_for_var1_pairs_at_large_samples() {
        // for a VAR(1) with lower-triangular coupling the reduced model of the
        // source is exactly AR(1), so both estimators target the same value
        let x = coupled().simulate(50_000, 100, 2).unwrap();
        let ctx = GcContext::new(&[x], 1).unwrap();
        let s = SingleRegression.log_ratios(&ctx, &[1]).unwrap()[0].unwrap();
        let d = DualRegression.log_ratios(&ctx, &[1]).unwrap()[0].unwrap();
        assert!((s - d).abs() < 1e-3, "{s} {d}");
    }

    #[test]
    fn pairwise_equals_conditional_without_conditioning() {
        let x = coupled().simulate(2000, 100, 3).unwrap();
        let a = gc_conditional(&x, 0, 1, 2).unwrap();
        let b = gc_pairwise(x.row(0).transpose().as_slice(), x.row(1).transpose().as_slice(), 2).unwrap();
        assert_eq!(a.f_stat.to_bits(), b.f_stat.to_bits());
        assert!(a.conditioning.is_empty());
    }

    #[test]
    fn chain_conditioning_removes_indirect_link() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, 0.0, 0.0, 0.8, 0.3, 0.0, 0.0, 0.8, 0.3]);
        let m = VarModel::from_parts(vec![a], DMatrix::identity(3, 3)).unwrap();
        let x = m.simulate(20_000, 200, 4).unwrap();
        let cond = gc_conditional(&x, 0, 2, 2).unwrap();
        assert!(!cond.significant, "{cond:?}");
        let pair = gc_pairwise(x.row(0).transpose().as_slice(), x.row(2).transpose().as_slice(), 2).unwrap();
        assert!(pair.significant);
    }

    #[test]
    fn registry_lists_both_estimators() {
        let reg = estimator_registry();
        assert_eq!(reg.names(), vec!["single-regression", "dual-regression"]);
        assert_eq!(DEFAULT_ESTIMATOR, reg.names()[0]);
    }
}
