//! Simulators with known causal ground truth.

mod glm;
mod pair;

pub use glm::{
    default_network_10, simulate_glm_network, GlmNetworkConfig, SpikeMatrix,
    DEFAULT_NETWORK_EDGES,
};
pub use pair::{simulate_sparse_pair, SparsePair, SparsePairConfig, BURN_IN};

use std::io::Write;

use crate::error::{Error, Result};

/// Writes channels as CSV: header `ch0,ch1,...`, then one row per time step.
pub fn write_channels_csv<W: Write>(mut out: W, channels: &[&[f64]]) -> std::io::Result<()> {
    let header: Vec<String> = (0..channels.len()).map(|c| format!("ch{c}")).collect();
    writeln!(out, "{}", header.join(","))?;
    let len = channels.iter().map(|c| c.len()).max().unwrap_or(0);
    for t in 0..len {
        let row: Vec<String> = channels
            .iter()
            .map(|c| c.get(t).map(|v| format!("{v:?}")).unwrap_or_default())
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub(crate) fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::Parameter(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}
