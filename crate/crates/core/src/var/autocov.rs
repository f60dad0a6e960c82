use nalgebra::DMatrix;

use super::VarModel;
use crate::error::{Error, Result};

/// Largest eigenvalue modulus of the companion matrix (0 for order 0).
pub fn spectral_radius(model: &VarModel) -> f64 {
    if model.order == 0 {
        return 0.0;
    }
    model
        .companion()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Population autocovariances `Gamma_k = E[x_t x_{t-k}^T]` for `k = 0..=max_lag`.
///
/// `Gamma_0..Gamma_{p-1}` come from the discrete Lyapunov equation of the
/// companion form (solved by squaring iterations); later lags follow the
/// Yule-Walker recursion.
pub fn autocovariance(model: &VarModel, max_lag: usize) -> Result<Vec<DMatrix<f64>>> {
    let (d, p) = (model.nvars, model.order);
    if p == 0 {
        let mut out = vec![model.sigma.clone()];
        out.extend((0..max_lag).map(|_| DMatrix::zeros(d, d)));
        return Ok(out);
    }
    let rho = spectral_radius(model);
    if rho >= 1.0 {
        return Err(Error::NonStationary(rho));
    }
    let mut a = model.companion();
    let mut x = DMatrix::zeros(d * p, d * p);
    x.view_mut((0, 0), (d, d)).copy_from(&model.sigma);
    let mut converged = false;
    for _ in 0..64 {
        let inc = &a * &x * a.transpose();
        let size = inc.abs().max();
        x += &inc;
        if size <= 1e-17 * x.abs().max() {
            converged = true;
            break;
        }
        a = &a * &a;
    }
    if !converged {
        return Err(Error::Numerical("Lyapunov iteration did not converge".into()));
    }
    let mut gammas: Vec<DMatrix<f64>> = (0..p.min(max_lag + 1))
        .map(|k| x.view((0, k * d), (d, d)).into_owned())
        .collect();
    while gammas.len() <= max_lag {
        let k = gammas.len();
        let mut g = DMatrix::zeros(d, d);
        for (l, a) in model.coeffs.iter().enumerate() {
            g += a * &gammas[k - l - 1];
        }
        gammas.push(g);
    }
    Ok(gammas)
}

/// One-step forward prediction error covariance of the best order-`q`
/// linear predictor, from autocovariances `gammas[0..=q]` (Whittle's
/// multivariate Levinson recursion).
///
/// Stops early once the diagonal of the error covariance has stopped moving
/// for a run of consecutive orders.
pub fn whittle_innovation(gammas: &[DMatrix<f64>], q: usize) -> Result<DMatrix<f64>> {
    if gammas.len() <= q {
        return Err(Error::Parameter(format!(
            "need {} autocovariances for order {q}, got {}",
            q + 1,
            gammas.len()
        )));
    }
    let d = gammas[0].nrows();
    let mut fwd: Vec<DMatrix<f64>> = Vec::new();
    let mut bwd: Vec<DMatrix<f64>> = Vec::new();
    let mut vf = gammas[0].clone();
    let mut vb = gammas[0].clone();
    let mut quiet = 0;
    for k in 1..=q {
        let mut delta = gammas[k].clone();
        for (l, a) in fwd.iter().enumerate() {
            delta -= a * &gammas[k - 1 - l];
        }
        let chol_b = vb
            .clone()
            .cholesky()
            .ok_or_else(|| Error::DegenerateCovariance(format!("backward error covariance at order {k}")))?;
        let chol_f = vf
            .clone()
            .cholesky()
            .ok_or_else(|| Error::DegenerateCovariance(format!("forward error covariance at order {k}")))?;
        // ak = delta vb^-1, bk = delta^T vf^-1
        let ak = chol_b.solve(&delta.transpose()).transpose();
        let bk = chol_f.solve(&delta).transpose();
        let new_fwd: Vec<DMatrix<f64>> = (0..k - 1).map(|l| &fwd[l] - &ak * &bwd[k - 2 - l]).collect();
        let new_bwd: Vec<DMatrix<f64>> = (0..k - 1).map(|l| &bwd[l] - &bk * &fwd[k - 2 - l]).collect();
        fwd = new_fwd;
        bwd = new_bwd;
        fwd.push(ak.clone());
        bwd.push(bk.clone());
        let vf_next = &vf - &ak * delta.transpose();
        let vb_next = &vb - &bk * &delta;
        let moved = (0..d)
            .map(|i| ((vf_next[(i, i)] - vf[(i, i)]) / vf[(i, i)]).abs())
            .fold(0.0, f64::max);
        vf = (&vf_next + vf_next.transpose()) * 0.5;
        vb = (&vb_next + vb_next.transpose()) * 0.5;
        quiet = if moved < 1e-15 { quiet + 1 } else { 0 };
        if quiet >= 10 {
            break;
        }
    }
    Ok(vf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_ar1_autocovariance() {
        let m = VarModel::from_parts(vec![DMatrix::from_element(1, 1, 0.6)], DMatrix::from_element(1, 1, 2.0)).unwrap();
        let g = autocovariance(&m, 3).unwrap();
        let g0 = 2.0 / (1.0 - 0.36);
        for (k, gk) in g.iter().enumerate() {
            assert!((gk[(0, 0)] - g0 * 0.6f64.powi(k as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn lyapunov_solution_satisfies_equation() {
        let a1 = DMatrix::from_row_slice(2, 2, &[0.4, 0.2, -0.1, 0.3]);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.2, -0.2]);
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]);
        let m = VarModel::from_parts(vec![a1.clone(), a2.clone()], sigma.clone()).unwrap();
        let g = autocovariance(&m, 4).unwrap();
        // Gamma_0 = A1 Gamma_1^T + A2 Gamma_2^T + Sigma
        let rhs = &a1 * g[1].transpose() + &a2 * g[2].transpose() + &sigma;
        assert!((&g[0] - rhs).abs().max() < 1e-12);
        // Gamma_1 = A1 Gamma_0 + A2 Gamma_1^T
        let rhs1 = &a1 * &g[0] + &a2 * g[1].transpose();
        assert!((&g[1] - rhs1).abs().max() < 1e-12);
    }

    #[test]
    fn whittle_recovers_innovation_of_var() {
        let a1 = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.2, 0.3]);
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.7]);
        let m = VarModel::from_parts(vec![a1], sigma.clone()).unwrap();
        let g = autocovariance(&m, 5).unwrap();
        let v = whittle_innovation(&g, 5).unwrap();
        assert!((v - sigma).abs().max() < 1e-12);
    }

    #[test]
    fn whittle_univariate_ma_decays() {
        // x = e_t + 0.5 e_{t-1}: innovation variance 1 approached from above
        let g = vec![
            DMatrix::from_element(1, 1, 1.25),
            DMatrix::from_element(1, 1, 0.5),
        ];
        let mut gammas = g.clone();
        gammas.extend((0..60).map(|_| DMatrix::from_element(1, 1, 0.0)));
        let v1 = whittle_innovation(&gammas, 1).unwrap()[(0, 0)];
        let v60 = whittle_innovation(&gammas, 60).unwrap()[(0, 0)];
        assert!(v1 > v60 && (v60 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn nonstationary_rejected() {
        let m = VarModel::from_parts(vec![DMatrix::from_element(1, 1, 1.01)], DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert!(matches!(autocovariance(&m, 3), Err(Error::NonStationary(_))));
    }
}
