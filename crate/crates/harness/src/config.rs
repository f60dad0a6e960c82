//! Experiment configuration files.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use cs_causality::sensing::Structure;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SparsitySweep,
    StructuredRowsSweep,
    CouplingSweep,
    Network,
    SingleRun,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::SparsitySweep,
        ExperimentKind::StructuredRowsSweep,
        ExperimentKind::CouplingSweep,
        ExperimentKind::Network,
        ExperimentKind::SingleRun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SparsitySweep => "sparsity-sweep",
            ExperimentKind::StructuredRowsSweep => "structured-rows-sweep",
            ExperimentKind::CouplingSweep => "coupling-sweep",
            ExperimentKind::Network => "network",
            ExperimentKind::SingleRun => "single-run",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                HarnessError::Config(format!("unknown experiment `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixChoice {
    Circulant,
    Toeplitz,
    Both,
}

impl MatrixChoice {
    pub fn structures(self) -> Vec<Structure> {
        match self {
            MatrixChoice::Circulant => vec![Structure::Circulant],
            MatrixChoice::Toeplitz => vec![Structure::Toeplitz],
            MatrixChoice::Both => vec![Structure::Circulant, Structure::Toeplitz],
        }
    }
}

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step).round() as usize;
    (0..=count).map(|i| start + i as f64 * step).collect()
}

/// All fields are optional in the JSON file; missing ones take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub realizations: usize,
    pub base_seed: u64,
    pub matrix_kind: MatrixChoice,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub noise_var: f64,
    pub k_values: Vec<usize>,
    pub s_values: Vec<usize>,
    pub gamma_values: Vec<f64>,
    pub output_dir: Option<PathBuf>,
    /// Significance level of the Granger tests.
    pub significance: f64,
    pub max_lags: usize,
    /// Sparse solver name, see `recovery::solver_registry`.
    pub solver: String,
    /// Granger estimator name, see `var::estimator_registry`.
    pub estimator: String,
    /// OMP budget; `m / 4` when absent.
    pub k_max: Option<usize>,
    pub network_length: usize,
    pub network_m: usize,
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            realizations: 100,
            base_seed: 0,
            matrix_kind: MatrixChoice::Both,
            n: 2000,
            m: 200,
            k: 20,
            alpha: 0.8,
            beta: 0.08,
            gamma: 0.75,
            noise_var: 0.1,
            k_values: (1..=10).map(|i| 5 * i).collect(),
            s_values: (0..=10).map(|i| 20 * i).collect(),
            gamma_values: range(0.0, 4.0, 0.5),
            output_dir: None,
            significance: 0.01,
            max_lags: 30,
            solver: "omp".into(),
            estimator: cs_causality::var::DEFAULT_ESTIMATOR.into(),
            k_max: None,
            network_length: 10_000,
            network_m: 2000,
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn budget(&self) -> usize {
        self.k_max.unwrap_or_else(|| cs_causality::recovery::default_budget(self.m))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        if self.m == 0 || self.m >= self.n {
            return bad(format!("need 0 < m < n (m = {}, n = {})", self.m, self.n));
        }
        if self.k_values.is_empty() || self.s_values.is_empty() || self.gamma_values.is_empty() {
            return bad("sweep lists must be nonempty".into());
        }
        if let Some(&k) = self.k_values.iter().chain([&self.k]).find(|&&k| k >= self.n) {
            return bad(format!("sparsity {k} must be below n = {}", self.n));
        }
        if let Some(s) = self.s_values.iter().find(|&&s| s > self.m) {
            return bad(format!("structured rows {s} exceed m = {}", self.m));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return bad(format!("significance {} outside (0, 1)", self.significance));
        }
        if self.max_lags == 0 {
            return bad("max_lags must be at least 1".into());
        }
        if 2 * self.budget() > self.m {
            return bad(format!("k_max {} exceeds m / 2", self.budget()));
        }
        if self.network_m == 0 || self.network_m >= self.network_length {
            return bad(format!(
                "need 0 < network_m < network_length ({} vs {})",
                self.network_m, self.network_length
            ));
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if cs_causality::recovery::solver_registry().get(&self.solver).is_none() {
            return bad(format!("unknown solver `{}`", self.solver));
        }
        if cs_causality::var::estimator_registry().get(&self.estimator).is_none() {
            return bad(format!("unknown estimator `{}`", self.estimator));
        }
        Ok(())
    }
}
