use rand::seq::index;
use rand::RngCore;

use super::SensingMatrix;
use crate::error::{Error, Result};
use crate::rng::{self, NormalStream};

/// `| ||phi z||^2 - ||z||^2 | / ||z||^2` for a single probe vector.
pub fn rip_deviation(phi: &SensingMatrix, z: &[f64]) -> Result<f64> {
    let zz: f64 = z.iter().map(|v| v * v).sum();
    if zz == 0.0 {
        return Err(Error::Input("RIP probe must be nonzero".into()));
    }
    let y = phi.apply(z)?;
    let yy: f64 = y.iter().map(|v| v * v).sum();
    Ok((yy - zz).abs() / zz)
}

/// A uniformly supported `k`-sparse vector with Gaussian amplitudes, scaled to unit norm.
pub fn random_sparse_unit<R: RngCore>(n: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let support = index::sample(rng, n, k);
    let mut normals = NormalStream::new(rng);
    let mut z = vec![0.0; n];
    for i in support.iter() {
        z[i] = normals.next();
    }
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    z.iter_mut().for_each(|v| *v /= norm);
    z
}

/// Monte-Carlo lower bound on the restricted isometry constant `delta_k`.
///
/// The maximum deviation over `trials` random unit-norm `k`-sparse probes.
/// This only bounds the true constant from below: the supremum over all
/// `k`-sparse vectors can only be larger.
pub fn estimate_rip_delta(phi: &SensingMatrix, k: usize, trials: usize, seed: u64) -> Result<f64> {
    if k == 0 || k > phi.n() {
        return Err(Error::Parameter(format!("sparsity k = {k} must lie in 1..={}", phi.n())));
    }
    if trials == 0 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    let mut rng = rng::stream(seed, rng::STREAM_PROBE);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let z = random_sparse_unit(phi.n(), k, &mut rng);
        worst = worst.max(rip_deviation(phi, &z)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_isometry_has_zero_delta() {
        let mut g = vec![0.0; 32];
        g[0] = 1.0;
        let phi = SensingMatrix::circulant_from_generator(g, 32).unwrap();
        assert!(estimate_rip_delta(&phi, 5, 50, 1).unwrap() < 1e-14);
    }

    #[test]
    fn single_trial_matches_direct_probe() {
        let phi = SensingMatrix::gen_circulant(300, 60, 3).unwrap().normalized();
        let est = estimate_rip_delta(&phi, 6, 1, 99).unwrap();
        let mut rng = rng::stream(99, rng::STREAM_PROBE);
        let z = random_sparse_unit(300, 6, &mut rng);
        let y = phi.apply(&z).unwrap();
        let direct = (y.iter().map(|v| v * v).sum::<f64>() - 1.0).abs();
        assert!((est - direct).abs() < 1e-14);
    }

    #[test]
    fn probes_are_unit_norm_and_sparse() {
        let mut rng = rng::stream(5, 0);
        let z = random_sparse_unit(100, 7, &mut rng);
        assert_eq!(z.iter().filter(|v| **v != 0.0).count(), 7);
        assert!((z.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_arguments() {
        let phi = SensingMatrix::gen_gaussian(20, 5, 0).unwrap();
        assert!(estimate_rip_delta(&phi, 0, 1, 0).is_err());
        assert!(estimate_rip_delta(&phi, 2, 0, 0).is_err());
    }
}
