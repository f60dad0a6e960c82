use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::check_finite;
use crate::error::{Error, Result};
use crate::rng::{self, NormalStream};

/// Samples discarded from the latent processes before the observed window.
pub const BURN_IN: usize = 200;

/// Sparse coupled autoregressive pair, driver `z1` and driven `z2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsePairConfig {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Variance of each innovation.
    pub noise_var: f64,
    pub seed: u64,
}

impl Default for SparsePairConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            k: 20,
            alpha: 0.8,
            beta: 0.08,
            gamma: 0.75,
            noise_var: 0.1,
            seed: 0,
        }
    }
}

impl SparsePairConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Parameter(format!("series length n = {} too short", self.n)));
        }
        if self.k > self.n - 1 {
            return Err(Error::Parameter(format!(
                "sparsity k = {} exceeds n - 1 = {}",
                self.k,
                self.n - 1
            )));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            check_finite(name, v)?;
        }
        if self.alpha.abs() >= 1.0 || self.beta.abs() >= 1.0 {
            return Err(Error::Parameter(format!(
                "AR coefficients must satisfy |alpha|, |beta| < 1 (got {}, {})",
                self.alpha, self.beta
            )));
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return Err(Error::Parameter(format!("noise_var must be positive, got {}", self.noise_var)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SparsePair {
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
    /// Sorted retained time points of `z1`.
    pub support1: Vec<usize>,
    /// `support1` shifted by one sample.
    pub support2: Vec<usize>,
}

/// Simulates the sparsified pair
///
/// ```text
/// Z1(t) = alpha Z1(t-1) + e1(t)                    z1 = Z1 on T1, 0 elsewhere
/// Z2(t) = beta  Z2(t-1) + gamma z1(t-1) + e2(t)     z2 = Z2 on T1 + 1, 0 elsewhere
/// ```
///
/// `T1` holds `k` points drawn without replacement from `0..n-1`, so `T1 + 1`
/// stays inside the window. Both latent processes run [`BURN_IN`] samples
/// before the window starts (with `z1 = 0` there).
pub fn simulate_sparse_pair(cfg: &SparsePairConfig) -> Result<SparsePair> {
    cfg.validate()?;
    let n = cfg.n;
    let sd = cfg.noise_var.sqrt();
    let mut rng = rng::stream(cfg.seed, rng::STREAM_SIGNAL);
    let mut support1: Vec<usize> = index::sample(&mut rng, n - 1, cfg.k).into_vec();
    support1.sort_unstable();

    let mut normals = NormalStream::new(rng);
    let total = BURN_IN + n;
    let e1 = normals.fill(total);
    let e2 = normals.fill(total);

    let mut latent1 = vec![0.0; total];
    for t in 1..total {
        latent1[t] = cfg.alpha * latent1[t - 1] + sd * e1[t];
    }
    let mut z1 = vec![0.0; n];
    for &t in &support1 {
        z1[t] = latent1[BURN_IN + t];
    }

    let mut latent2 = vec![0.0; total];
    for t in 1..total {
        let drive = if t > BURN_IN { z1[t - 1 - BURN_IN] } else { 0.0 };
        latent2[t] = cfg.beta * latent2[t - 1] + cfg.gamma * drive + sd * e2[t];
    }
    let support2: Vec<usize> = support1.iter().map(|t| t + 1).collect();
    let mut z2 = vec![0.0; n];
    for &t in &support2 {
        z2[t] = latent2[BURN_IN + t];
    }
    Ok(SparsePair {
        z1,
        z2,
        support1,
        support2,
    })
}
