use nalgebra::{DMatrix, DVector};

use super::{check_measurements, norm2, residual, RecoveryResult, SparseSolver};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sensing::SensingMatrix;

#[derive(Debug, Clone, Copy)]
pub struct BasisPursuitOptions {
    pub lambda: f64,
    pub max_iter: usize,
    /// Relative change between successive iterates that counts as converged.
    pub tol: f64,
    /// Least-squares refit on the detected support.
    pub debias: bool,
    /// Magnitude above which an entry counts as part of the support.
    pub support_threshold: f64,
}

/// Basis pursuit denoising with `lambda = lambda_rel * ||phi^T y||_inf`.
#[derive(Debug, Clone, Copy)]
pub struct BasisPursuit {
    pub lambda_rel: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub debias: bool,
}

impl Default for BasisPursuit {
    fn default() -> Self {
        Self {
            lambda_rel: 1e-4,
            max_iter: 20_000,
            tol: 1e-10,
            debias: true,
        }
    }
}

impl SparseSolver for BasisPursuit {
    fn recover(&self, y: &[f64], phi: &SensingMatrix, _k_max: usize) -> Result<RecoveryResult> {
        let corr = phi.apply_adjoint(y)?;
        let scale = corr.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            return Ok(RecoveryResult {
                z_hat: vec![0.0; phi.n()],
                residual_norm: norm2(y),
                iterations: 0,
                converged: true,
            });
        }
        let opts = BasisPursuitOptions {
            lambda: self.lambda_rel * scale,
            max_iter: self.max_iter,
            tol: self.tol,
            debias: self.debias,
            support_threshold: 1e-6,
        };
        recover_basis_pursuit(y, phi, &opts)
    }
}

/// Largest eigenvalue of `phi^T phi` by power iteration.
pub(crate) fn lipschitz(phi: &SensingMatrix) -> Result<f64> {
    let n = phi.n();
    // fixed, non-symmetric start vector keeps the estimate deterministic
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0).collect();
    let mut est = 0.0;
    for _ in 0..200 {
        let nv = norm2(&v);
        if nv == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let w = phi.apply_adjoint(&phi.apply(&v)?)?;
        let next = norm2(&w);
        let done = (next - est).abs() <= 1e-9 * next;
        est = next;
        v = w;
        if done {
            break;
        }
    }
    Ok(est)
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Solves `min 0.5 ||phi z - y||^2 + lambda ||z||_1` with FISTA.
///
/// The step is `1/L` with `L` the largest squared singular value of `phi`
/// (power iteration, inflated by 1% for safety).
pub fn recover_basis_pursuit(y: &[f64], phi: &SensingMatrix, opts: &BasisPursuitOptions) -> Result<RecoveryResult> {
    check_measurements(y, phi)?;
    if !(opts.lambda > 0.0) {
        return Err(Error::Parameter(format!("lambda must be positive, got {}", opts.lambda)));
    }
    let n = phi.n();
    let lip = lipschitz(phi)? * 1.01;
    if lip == 0.0 {
        return Err(Error::Input("sensing matrix is zero".into()));
    }
    let step = 1.0 / lip;
    let thresh = opts.lambda * step;

    let mut x = vec![0.0; n];
    let mut prev = x.clone();
    let mut w = x.clone();
    let mut t = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let pw = phi.apply(&w)?;
        let r: Vec<f64> = pw.iter().zip(y).map(|(a, b)| a - b).collect();
        let g = phi.apply_adjoint(&r)?;
        std::mem::swap(&mut prev, &mut x);
        for i in 0..n {
            x[i] = soft(w[i] - step * g[i], thresh);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        t = t_next;
        let mut diff = 0.0;
        let mut size = 0.0;
        for i in 0..n {
            let d = x[i] - prev[i];
            diff += d * d;
            size += x[i] * x[i];
            w[i] = x[i] + mom * d;
        }
        if size > 0.0 && diff.sqrt() < opts.tol * size.sqrt() {
            converged = true;
            break;
        }
        if size == 0.0 && diff == 0.0 && it > 1 {
            converged = true;
            break;
        }
    }

    if opts.debias {
        let support: Vec<usize> = (0..n).filter(|&i| x[i].abs() > opts.support_threshold).collect();
        if !support.is_empty() && support.len() <= phi.m() {
            let cols = DMatrix::from_fn(phi.m(), support.len(), |i, c| phi.entry(i, support[c]));
            let (coef, _) = linalg::least_squares(&cols, &DVector::from_column_slice(y));
            x.iter_mut().for_each(|v| *v = 0.0);
            for (c, &j) in support.iter().enumerate() {
                x[j] = coef[c];
            }
        }
    }
    let (_, residual_norm) = residual(y, phi, &x)?;
    Ok(RecoveryResult {
        z_hat: x,
        residual_norm,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::{recover_omp, Omp};
    use crate::sigsim::{simulate_sparse_pair, SparsePairConfig};

    #[test]
    fn zero_measurements() {
        let phi = SensingMatrix::gen_circulant(64, 16, 1).unwrap();
        let rec = BasisPursuit::default().recover(&[0.0; 16], &phi, 4).unwrap();
        assert!(rec.z_hat.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lambda_must_be_positive() {
        let phi = SensingMatrix::gen_circulant(64, 16, 1).unwrap();
        let opts = BasisPursuitOptions { lambda: 0.0, max_iter: 10, tol: 1e-6, debias: false, support_threshold: 1e-6 };
        assert!(recover_basis_pursuit(&[1.0; 16], &phi, &opts).is_err());
    }

    #[test]
    fn lipschitz_matches_dense_svd() {
        let phi = SensingMatrix::gen_toeplitz(40, 12, 2).unwrap();
        let smax = phi.materialize().singular_values().max();
        assert!((lipschitz(&phi).unwrap() - smax * smax).abs() < 1e-6 * smax * smax);
    }

    #[test]
    fn support_and_agreement_with_omp() {
        let pair = simulate_sparse_pair(&SparsePairConfig { seed: 21, ..Default::default() }).unwrap();
        let phi = SensingMatrix::gen_circulant(2000, 200, 21).unwrap();
        let y = phi.apply(&pair.z1).unwrap();
        let bp = BasisPursuit::default().recover(&y, &phi, 50).unwrap();
        let detected: Vec<usize> = (0..2000).filter(|&i| bp.z_hat[i].abs() > 1e-6).collect();
        assert_eq!(detected, pair.support1);
        let omp = recover_omp(&y, &phi, 50, Omp::default().rel_tol * norm2(&y)).unwrap();
        let diff: f64 = omp.z_hat.iter().zip(&bp.z_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(diff / norm2(&pair.z1) < 1e-3);
    }
}
