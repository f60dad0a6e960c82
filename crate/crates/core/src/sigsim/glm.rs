use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::check_finite;
use crate::error::{Error, Result};
use crate::rng;

/// Binary spike raster, rows are nodes.
pub type SpikeMatrix = DMatrix<f64>;

/// Discrete-time logistic GLM spiking network.
///
/// `connectivity[(i, j)]` is the weight of node `j`'s history on node `i`.
/// Tap `l` (1-based) of a kernel multiplies the spike at `t - l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmNetworkConfig {
    pub n_nodes: usize,
    pub length: usize,
    pub connectivity: DMatrix<f64>,
    pub baseline: Vec<f64>,
    pub history_taps: usize,
    pub self_kernel: Vec<f64>,
    pub cross_kernel: Vec<f64>,
    pub seed: u64,
}

/// Edges of [`default_network_10`] as `(source, target, weight)`.
///
/// Sources 0..5 each drive two targets in 5..10; no node is both a driver
/// and a target.
pub const DEFAULT_NETWORK_EDGES: [(usize, usize, f64); 10] = [
    (0, 5, 2.5),
    (0, 6, -3.0),
    (1, 6, 2.5),
    (1, 7, 2.5),
    (2, 7, -3.0),
    (2, 8, 2.5),
    (3, 8, 2.5),
    (3, 9, -3.0),
    (4, 9, 2.5),
    (4, 5, 2.5),
];

/// The 10-node reference network: base rate 0.03, five-tap refractory
/// self kernel `-3 exp(-(l-1))`, cross kernel `exp(-(l-1)/1.5)` normalised
/// to unit sum, length 10000.
pub fn default_network_10(seed: u64) -> GlmNetworkConfig {
    let n = 10;
    let taps = 5;
    let mut connectivity = DMatrix::zeros(n, n);
    for &(src, tgt, w) in &DEFAULT_NETWORK_EDGES {
        connectivity[(tgt, src)] = w;
    }
    let p0: f64 = 0.03;
    let self_kernel = (0..taps).map(|l| -3.0 * (-(l as f64)).exp()).collect();
    let raw: Vec<f64> = (0..taps).map(|l| (-(l as f64) / 1.5).exp()).collect();
    let total: f64 = raw.iter().sum();
    GlmNetworkConfig {
        n_nodes: n,
        length: 10_000,
        connectivity,
        baseline: vec![(p0 / (1.0 - p0)).ln(); n],
        history_taps: taps,
        self_kernel,
        cross_kernel: raw.iter().map(|v| v / total).collect(),
        seed,
    }
}

impl GlmNetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.n_nodes;
        if n == 0 || self.length == 0 {
            return Err(Error::Parameter("network needs at least one node and one bin".into()));
        }
        if self.connectivity.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "connectivity is {:?}, expected ({n}, {n})",
                self.connectivity.shape()
            )));
        }
        if self.baseline.len() != n {
            return Err(Error::Dimension(format!("baseline has {} entries, expected {n}", self.baseline.len())));
        }
        let taps = self.history_taps;
        if self.self_kernel.len() != taps || self.cross_kernel.len() != taps {
            return Err(Error::Dimension(format!(
                "kernels must have {taps} taps (self {}, cross {})",
                self.self_kernel.len(),
                self.cross_kernel.len()
            )));
        }
        for i in 0..n {
            if self.connectivity[(i, i)] != 0.0 {
                return Err(Error::Parameter(format!(
                    "connectivity diagonal must be zero (node {i}); self history goes in self_kernel"
                )));
            }
        }
        for v in self.connectivity.iter().chain(&self.baseline).chain(&self.self_kernel).chain(&self.cross_kernel) {
            check_finite("network parameter", *v)?;
        }
        Ok(())
    }

    /// Ground-truth adjacency: `true` at `(i, j)` for an edge `j -> i`.
    pub fn ground_truth(&self) -> DMatrix<bool> {
        self.connectivity.map(|w| w != 0.0)
    }

    pub fn edge_count(&self) -> usize {
        self.connectivity.iter().filter(|w| **w != 0.0).count()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Simulates the network; the first `history_taps` bins see an empty history.
pub fn simulate_glm_network(cfg: &GlmNetworkConfig) -> Result<SpikeMatrix> {
    cfg.validate()?;
    let (n, len, taps) = (cfg.n_nodes, cfg.length, cfg.history_taps);
    let mut rng = rng::stream(cfg.seed, rng::STREAM_SIGNAL);
    let mut spikes = DMatrix::<f64>::zeros(n, len);
    let mut cross = vec![0.0; n];
    let mut own = vec![0.0; n];
    for t in 0..len {
        for v in 0..n {
            let (mut c, mut s) = (0.0, 0.0);
            for l in 1..=taps.min(t) {
                let x = spikes[(v, t - l)];
                if x != 0.0 {
                    c += cfg.cross_kernel[l - 1] * x;
                    s += cfg.self_kernel[l - 1] * x;
                }
            }
            cross[v] = c;
            own[v] = s;
        }
        for i in 0..n {
            let mut eta = cfg.baseline[i] + own[i];
            for j in 0..n {
                let w = cfg.connectivity[(i, j)];
                if w != 0.0 {
                    eta += w * cross[j];
                }
            }
            let p = logistic(eta);
            let u: f64 = rng.random();
            if u < p {
                spikes[(i, t)] = 1.0;
            }
        }
    }
    Ok(spikes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_network_shape() {
        let cfg = default_network_10(0);
        cfg.validate().unwrap();
        assert_eq!(cfg.n_nodes, 10);
        assert_eq!(cfg.edge_count(), 10);
        assert!((0..10).all(|i| cfg.connectivity[(i, i)] == 0.0));
        assert!(cfg.connectivity.iter().any(|w| *w < 0.0));
        assert!((cfg.cross_kernel.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rates_in_range() {
        let spikes = simulate_glm_network(&default_network_10(11)).unwrap();
        assert!(spikes.iter().all(|v| *v == 0.0 || *v == 1.0));
        for i in 0..10 {
            let rate = spikes.row(i).sum() / 10_000.0;
            assert!((0.005..=0.1).contains(&rate), "node {i} rate {rate}");
        }
    }

    #[test]
    fn rejects_self_edges() {
        let mut cfg = default_network_10(0);
        cfg.connectivity[(3, 3)] = 1.0;
        assert!(simulate_glm_network(&cfg).is_err());
    }

    #[test]
    fn logistic_is_bounded() {
        for x in [-800.0, -30.0, 0.0, 30.0] {
            let p = logistic(x);
            assert!((0.0..=1.0).contains(&p) && p.is_finite());
        }
        assert!(logistic(-30.0) > 0.0 && logistic(30.0) < 1.0);
    }

    #[test]
    fn excitatory_edge_raises_target_rate() {
        let mut cfg = default_network_10(2);
        cfg.length = 20_000;
        let with = simulate_glm_network(&cfg).unwrap();
        cfg.connectivity.fill(0.0);
        let without = simulate_glm_network(&cfg).unwrap();
        // node 5 has two excitatory parents
        assert!(with.row(5).sum() > without.row(5).sum() * 1.2);
    }
}
