use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gc::{clamp_ratio, gc_significance, GcContext, GrangerEstimator, SingleRegression};
use super::{select_order_aic, DEFAULT_MAX_LAGS};
use crate::error::{Error, Result};
use crate::Series;

/// Directed connectivity, entry `(i, j)` describing `j -> i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityMatrix {
    pub adjacency: DMatrix<bool>,
    pub fstats: DMatrix<f64>,
    pub p_values: DMatrix<f64>,
    pub order: usize,
    pub nobs: usize,
    pub alpha: f64,
    pub reference: Option<DMatrix<bool>>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

impl ConnectivityMatrix {
    pub fn nvars(&self) -> usize {
        self.adjacency.nrows()
    }

    /// Off-diagonal confusion counts `(tp, fp, tn, fn)` against `reference`.
    pub fn confusion(&self, reference: &DMatrix<bool>) -> (usize, usize, usize, usize) {
        let n = self.nvars();
        let (mut tp, mut fp, mut tn, mut fneg) = (0, 0, 0, 0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                match (self.adjacency[(i, j)], reference[(i, j)]) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, false) => tn += 1,
                    (false, true) => fneg += 1,
                }
            }
        }
        (tp, fp, tn, fneg)
    }

    /// Attaches a ground truth and scores against it. With no true edges the
    /// sensitivity is reported as 1 (nothing to miss), and likewise the
    /// specificity with no true non-edges.
    pub fn score(&mut self, reference: DMatrix<bool>) -> Result<()> {
        if reference.shape() != self.adjacency.shape() {
            return Err(Error::Dimension(format!(
                "reference is {:?}, adjacency is {:?}",
                reference.shape(),
                self.adjacency.shape()
            )));
        }
        let (tp, fp, tn, fneg) = self.confusion(&reference);
        let ratio = |a: usize, b: usize| if a + b == 0 { 1.0 } else { a as f64 / (a + b) as f64 };
        self.sensitivity = Some(ratio(tp, fneg));
        self.specificity = Some(ratio(tn, fp));
        self.reference = Some(reference);
        Ok(())
    }

    /// Long format `source,target,f_stat,p_value,significant` over ordered
    /// pairs, sorted by target then source.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "source,target,f_stat,p_value,significant")?;
        let n = self.nvars();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                writeln!(
                    out,
                    "{j},{i},{:?},{:?},{}",
                    self.fstats[(i, j)],
                    self.p_values[(i, j)],
                    self.adjacency[(i, j)]
                )?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("connectivity serialises")
    }
}

/// AIC order selection (up to 30 lags) followed by conditional GC over every
/// ordered pair with the default estimator.
pub fn connectivity_from_series(
    trials: &[Series],
    alpha: f64,
    reference: Option<DMatrix<bool>>,
) -> Result<ConnectivityMatrix> {
    let p = select_order_aic(trials, DEFAULT_MAX_LAGS)?;
    let mut c = connectivity_with(trials, p, alpha, &SingleRegression)?;
    if let Some(r) = reference {
        c.score(r)?;
    }
    Ok(c)
}

/// Conditional GC for every ordered pair at a fixed order. Sources are
/// processed in parallel and merged by index.
pub fn connectivity_with(
    trials: &[Series],
    p: usize,
    alpha: f64,
    estimator: &dyn GrangerEstimator,
) -> Result<ConnectivityMatrix> {
    let ctx = GcContext::new(trials, p)?;
    let d = ctx.model.nvars;
    if d < 2 {
        return Err(Error::Input("connectivity needs at least two channels".into()));
    }
    let columns: Vec<Vec<Option<f64>>> = (0..d)
        .into_par_iter()
        .map(|j| estimator.log_ratios(&ctx, &[j]))
        .collect::<Result<_>>()?;
    let mut fstats = DMatrix::zeros(d, d);
    let mut p_values = DMatrix::from_element(d, d, 1.0);
    let mut adjacency = DMatrix::from_element(d, d, false);
    for (j, col) in columns.iter().enumerate() {
        for (i, f) in col.iter().enumerate() {
            let Some(f) = f else { continue };
            let f = clamp_ratio(*f)?;
            let (pv, sig) = gc_significance(f, ctx.model.nobs, p, 1, alpha);
            fstats[(i, j)] = f;
            p_values[(i, j)] = pv;
            adjacency[(i, j)] = sig;
        }
    }
    Ok(ConnectivityMatrix {
        adjacency,
        fstats,
        p_values,
        order: p,
        nobs: ctx.model.nobs,
        alpha,
        reference: None,
        sensitivity: None,
        specificity: None,
    })
}
