use nalgebra::{DMatrix, DVector};

use super::{check_measurements, norm2, residual, RecoveryResult, SparseSolver};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sensing::SensingMatrix;

/// Orthogonal matching pursuit, stopping when `||r|| <= rel_tol * ||y||`.
#[derive(Debug, Clone, Copy)]
pub struct Omp {
    pub rel_tol: f64,
}

impl Default for Omp {
    fn default() -> Self {
        Self { rel_tol: 1e-10 }
    }
}

impl SparseSolver for Omp {
    fn recover(&self, y: &[f64], phi: &SensingMatrix, k_max: usize) -> Result<RecoveryResult> {
        recover_omp(y, phi, k_max, self.rel_tol * norm2(y))
    }
}

/// Greedy recovery with a least-squares refit on the selected support at every
/// step. Stops once the residual norm drops below `tol` or `k_max` atoms are
/// selected. Correlation ties go to the lowest column index.
pub fn recover_omp(y: &[f64], phi: &SensingMatrix, k_max: usize, tol: f64) -> Result<RecoveryResult> {
    check_measurements(y, phi)?;
    let (m, n) = (phi.m(), phi.n());
    if 2 * k_max > m {
        return Err(Error::Parameter(format!("k_max = {k_max} exceeds m/2 = {}", m / 2)));
    }
    let mut z_hat = vec![0.0; n];
    let mut r = y.to_vec();
    let mut rnorm = norm2(&r);
    let mut support: Vec<usize> = Vec::new();
    let mut selected = vec![false; n];
    let mut cols = DMatrix::<f64>::zeros(m, 0);
    let mut full_rank = true;
    let yv = DVector::from_column_slice(y);

    while rnorm > tol && support.len() < k_max {
        let corr = phi.apply_adjoint(&r)?;
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in corr.iter().enumerate() {
            if selected[j] {
                continue;
            }
            let a = c.abs();
            if best.map_or(true, |(_, b)| a > b) {
                best = Some((j, a));
            }
        }
        let Some((j, _)) = best else { break };
        selected[j] = true;
        support.push(j);
        let s = support.len();
        cols = cols.insert_column(s - 1, 0.0);
        cols.set_column(s - 1, &DVector::from_vec(phi.column(j)));

        let (coef, ok) = linalg::least_squares(&cols, &yv);
        full_rank = ok;
        let fit = &cols * &coef;
        for i in 0..m {
            r[i] = y[i] - fit[i];
        }
        rnorm = norm2(&r);
        z_hat.iter_mut().for_each(|v| *v = 0.0);
        for (idx, &col) in support.iter().enumerate() {
            z_hat[col] = coef[idx];
        }
    }
    let (_, residual_norm) = residual(y, phi, &z_hat)?;
    Ok(RecoveryResult {
        z_hat,
        residual_norm,
        iterations: support.len(),
        converged: full_rank && rnorm <= tol,
    })
}
