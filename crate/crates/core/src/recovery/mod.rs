//! Sparse reconstruction from compressed measurements.

mod bp;
mod omp;

pub use bp::{recover_basis_pursuit, BasisPursuit, BasisPursuitOptions};
pub use omp::{recover_omp, Omp};

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::sensing::SensingMatrix;
use crate::sigsim::SparsePair;

/// Default success threshold on the per-sample reconstruction MSE.
pub const SUCCESS_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub z_hat: Vec<f64>,
    /// `||y - phi z_hat||`, recomputed after the final iterate.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// A sparse solver usable from the experiment harness.
pub trait SparseSolver: Send + Sync {
    /// Recovers `z` from `y = phi z`. `k_max` is the sparsity budget, which
    /// solvers without an explicit budget may ignore.
    fn recover(&self, y: &[f64], phi: &SensingMatrix, k_max: usize) -> Result<RecoveryResult>;
}

/// Registry holding `omp` (default) and `basis-pursuit`.
pub fn solver_registry() -> Registry<dyn SparseSolver> {
    let mut reg: Registry<dyn SparseSolver> = Registry::new("sparse solver");
    reg.register("omp", Box::new(Omp::default()));
    reg.register("basis-pursuit", Box::new(BasisPursuit::default()));
    reg
}

/// OMP budget used when the caller does not know the sparsity: `m / 4`.
pub fn default_budget(m: usize) -> usize {
    (m / 4).max(1)
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn residual(y: &[f64], phi: &SensingMatrix, z: &[f64]) -> Result<(Vec<f64>, f64)> {
    let yz = phi.apply(z)?;
    let r: Vec<f64> = y.iter().zip(&yz).map(|(a, b)| a - b).collect();
    let nr = norm2(&r);
    Ok((r, nr))
}

pub(crate) fn check_measurements(y: &[f64], phi: &SensingMatrix) -> Result<()> {
    if y.len() != phi.m() {
        return Err(Error::Dimension(format!(
            "measurement vector has length {}, matrix has {} rows",
            y.len(),
            phi.m()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("measurements contain non-finite values".into()));
    }
    Ok(())
}

/// `(1/N) sum (z_i - zhat_i)^2`.
pub fn reconstruction_mse(z: &[f64], z_hat: &[f64]) -> Result<f64> {
    if z.len() != z_hat.len() {
        return Err(Error::Dimension(format!("lengths differ: {} vs {}", z.len(), z_hat.len())));
    }
    if z.is_empty() {
        return Err(Error::Dimension("empty signals".into()));
    }
    let sum: f64 = z.iter().zip(z_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / z.len() as f64)
}

/// Reconstruction MSE of both channels of a compressed pair.
pub fn pair_reconstruction_mse(
    pair: &SparsePair,
    phi: &SensingMatrix,
    solver: &dyn SparseSolver,
    k_max: usize,
) -> Result<(f64, f64)> {
    let mut out = [0.0; 2];
    for (slot, z) in out.iter_mut().zip([&pair.z1, &pair.z2]) {
        let y = phi.apply(z)?;
        let rec = solver.recover(&y, phi, k_max)?;
        *slot = reconstruction_mse(z, &rec.z_hat)?;
    }
    Ok((out[0], out[1]))
}

/// True when both channels reconstruct with MSE below `threshold`, using
/// OMP with budget `m / 4`.
pub fn recovery_success(pair: &SparsePair, phi: &SensingMatrix, threshold: f64) -> Result<bool> {
    let (a, b) = pair_reconstruction_mse(pair, phi, &Omp::default(), default_budget(phi.m()))?;
    Ok(mse_pass(a, b, threshold))
}

pub fn mse_pass(mse1: f64, mse2: f64, threshold: f64) -> bool {
    mse1 < threshold && mse2 < threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigsim::{simulate_sparse_pair, SparsePairConfig};

    #[test]
    fn mse_hand_values() {
        assert_eq!(reconstruction_mse(&[1.0, 0.0, 0.0, 0.0], &[0.0; 4]).unwrap(), 0.25);
        assert_eq!(reconstruction_mse(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert!(reconstruction_mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn threshold_semantics() {
        assert!(mse_pass(0.0, 0.0, SUCCESS_THRESHOLD));
        assert!(!mse_pass(0.0, 1e-4, SUCCESS_THRESHOLD));
        assert!(!mse_pass(1e-5, 0.0, SUCCESS_THRESHOLD));
    }

    #[test]
    fn registry_names() {
        let reg = solver_registry();
        assert_eq!(reg.names(), vec!["omp", "basis-pursuit"]);
        assert!(reg.resolve("lasso").is_err());
    }

    #[test]
    fn perfect_pair_reconstruction() {
        let pair = simulate_sparse_pair(&SparsePairConfig { seed: 4, ..Default::default() }).unwrap();
        let phi = SensingMatrix::gen_circulant(2000, 200, 4).unwrap();
        assert!(recovery_success(&pair, &phi, SUCCESS_THRESHOLD).unwrap());
    }
}
