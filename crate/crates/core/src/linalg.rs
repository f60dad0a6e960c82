//! Small dense solvers shared by the regression and recovery code.

use nalgebra::{DMatrix, DVector};

/// Reciprocal condition threshold below which a system is treated as rank deficient.
const RCOND_FLOOR: f64 = 1e-13;

/// Solution of a symmetric positive semidefinite system.
#[derive(Debug, Clone)]
pub struct GramSolution {
    pub x: DMatrix<f64>,
    /// True when Cholesky failed or the system was too ill-conditioned and a
    /// minimum-norm pseudo-inverse solution was returned instead.
    pub rank_deficient: bool,
}

/// Solves `G x = rhs` for a Gram matrix `G`.
///
/// The system is equilibrated to unit diagonal first, which makes the result
/// invariant (to rounding) under rescaling of the regressors. Falls back to a
/// truncated-SVD minimum-norm solution when the Cholesky factorisation fails.
pub fn solve_gram(gram: &DMatrix<f64>, rhs: &DMatrix<f64>) -> GramSolution {
    let n = gram.nrows();
    assert_eq!(n, gram.ncols());
    assert_eq!(n, rhs.nrows());
    if n == 0 {
        return GramSolution {
            x: DMatrix::zeros(0, rhs.ncols()),
            rank_deficient: false,
        };
    }
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let d = gram[(i, i)];
            if d > 0.0 && d.is_finite() {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let eq = DMatrix::from_fn(n, n, |i, j| gram[(i, j)] * scale[i] * scale[j]);
    let eq_rhs = DMatrix::from_fn(n, rhs.ncols(), |i, j| rhs[(i, j)] * scale[i]);

    let unscale = |mut u: DMatrix<f64>| {
        for i in 0..n {
            for j in 0..u.ncols() {
                u[(i, j)] *= scale[i];
            }
        }
        u
    };

    if let Some(chol) = eq.clone().cholesky() {
        let l = chol.l_dirty();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let v = l[(i, i)].abs();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi > 0.0 && (lo / hi).powi(2) > RCOND_FLOOR {
            return GramSolution {
                x: unscale(chol.solve(&eq_rhs)),
                rank_deficient: false,
            };
        }
    }
    log::warn!("ill-conditioned Gram matrix ({n}x{n}); using minimum-norm solution");
    let svd = eq.svd(true, true);
    let smax = svd.singular_values.max();
    let u = svd
        .solve(&eq_rhs, smax * 1e-12)
        .unwrap_or_else(|_| DMatrix::zeros(n, rhs.ncols()));
    GramSolution {
        x: unscale(u),
        rank_deficient: true,
    }
}

/// Least-squares solution of `a x = b` for a tall matrix.
///
/// Returns the solution and whether `a` had full column rank; rank-deficient
/// systems get the minimum-norm solution.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, bool) {
    let cols = a.ncols();
    if cols == 0 {
        return (DVector::zeros(0), true);
    }
    if a.nrows() >= cols {
        let qr = a.clone().qr();
        let r = qr.r();
        let rmax = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        let rmin = (0..cols).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if rmax > 0.0 && rmin > rmax * 1e-10 {
            let qtb = qr.q().transpose() * b;
            if let Some(x) = r.solve_upper_triangular(&qtb) {
                return (x, true);
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd
        .solve(b, smax * 1e-12)
        .unwrap_or_else(|_| DVector::zeros(cols));
    (x, false)
}

/// Log-determinant of a symmetric positive definite matrix, `None` otherwise.
pub fn ln_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    let chol = m.clone().cholesky()?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        acc += l[(i, i)].ln();
    }
    Some(2.0 * acc)
}
