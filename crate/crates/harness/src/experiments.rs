//! The experiments, each behind the [`Experiment`] trait.

use std::io::Write;

use cs_causality::recovery::{solver_registry, SUCCESS_THRESHOLD};
use cs_causality::sensing::{SensingMatrix, Structure};
use cs_causality::sigsim::{default_network_10, simulate_glm_network, simulate_sparse_pair, write_channels_csv, SparsePairConfig};
use cs_causality::spectral::{spectral_gc_series, SpectralGcCurve, DEFAULT_GRID};
use cs_causality::var::{
    connectivity_with, estimator_registry, gc_from_context, select_order_aic, ConnectivityMatrix, GcContext, GcResult,
};
use cs_causality::{rng, Registry, Series};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::output::OutputDir;
use crate::pair::{build_matrix, compress_rows, realization_seeds, PairOutcome, PairPipeline};
use crate::plot::{heatmap_svg, line_plot_svg, LinePlot, LineSeries};

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub pct_recovery_success: f64,
    pub pct_causality_success: f64,
    pub mean_f1: f64,
    pub mean_f2: f64,
    pub realizations_used: usize,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub row: SweepRow,
    /// Per-realization outcomes in realization order; failures are `Err`.
    pub outcomes: Vec<std::result::Result<PairOutcome, String>>,
}

impl SweepPoint {
    pub fn successes(&self) -> impl Iterator<Item = &PairOutcome> {
        self.outcomes.iter().filter_map(|o| o.as_ref().ok())
    }

    /// Fraction of realizations with `y2 -> y1` significant.
    pub fn f2_rejection_rate(&self) -> f64 {
        let used = self.row.realizations_used.max(1) as f64;
        self.successes().filter(|o| o.sig2).count() as f64 / used
    }

    /// Sample standard deviation of `f1` over realizations.
    pub fn sd_f1(&self) -> f64 {
        let v: Vec<f64> = self.successes().map(|o| o.f1).collect();
        if v.len() < 2 {
            return 0.0;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub experiment: ExperimentKind,
    pub structure: Structure,
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.points.iter().map(|p| p.row.clone()).collect()
    }

    pub fn point(&self, value: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| (p.row.sweep_value - value).abs() < 1e-9)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "sweep_value,pct_recovery_success,pct_causality_success,mean_f1,mean_f2,realizations_used"
        )?;
        for r in self.rows() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.sweep_value, r.pct_recovery_success, r.pct_causality_success, r.mean_f1, r.mean_f2, r.realizations_used
            )?;
        }
        Ok(())
    }

    fn file_stem(&self) -> String {
        format!("{}_{}", self.experiment.name().replace('-', "_"), self.structure)
    }

    pub fn plot(&self) -> LinePlot {
        let rows = self.rows();
        let (x_label, title) = match self.experiment {
            ExperimentKind::SparsitySweep => ("sparsity k", "Success vs sparsity"),
            ExperimentKind::StructuredRowsSweep => ("structured rows S", "Success vs structured rows"),
            _ => ("coupling gamma", "Granger causality vs coupling"),
        };
        let title = format!("{title} ({})", self.structure);
        if self.experiment == ExperimentKind::CouplingSweep {
            return LinePlot {
                title,
                x_label: x_label.into(),
                y_label: "mean F".into(),
                series: vec![
                    LineSeries { label: "F1 (y1 to y2)".into(), points: rows.iter().map(|r| (r.sweep_value, r.mean_f1)).collect() },
                    LineSeries { label: "F2 (y2 to y1)".into(), points: rows.iter().map(|r| (r.sweep_value, r.mean_f2)).collect() },
                ],
                y_range: None,
            };
        }
        LinePlot {
            title,
            x_label: x_label.into(),
            y_label: "success (%)".into(),
            series: vec![
                LineSeries {
                    label: "reconstruction".into(),
                    points: rows.iter().map(|r| (r.sweep_value, r.pct_recovery_success)).collect(),
                },
                LineSeries {
                    label: "causality".into(),
                    points: rows.iter().map(|r| (r.sweep_value, r.pct_causality_success)).collect(),
                },
            ],
            y_range: Some((0.0, 100.0)),
        }
    }

    pub fn emit(&self, out: &mut OutputDir) -> Result<()> {
        let stem = self.file_stem();
        out.csv(&format!("{stem}.csv"), |w| self.write_csv(w))?;
        out.svg(&format!("{stem}.svg"), &line_plot_svg(&self.plot()))?;
        Ok(())
    }
}

fn aggregate(value: f64, outcomes: Vec<std::result::Result<PairOutcome, String>>) -> SweepPoint {
    let ok: Vec<&PairOutcome> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let used = ok.len();
    let pct = |count: usize| if used == 0 { 0.0 } else { 100.0 * count as f64 / used as f64 };
    let mean = |f: fn(&PairOutcome) -> f64| {
        if used == 0 {
            f64::NAN
        } else {
            ok.iter().map(|o| f(o)).sum::<f64>() / used as f64
        }
    };
    let row = SweepRow {
        sweep_value: value,
        pct_recovery_success: pct(ok.iter().filter(|o| o.recovered).count()),
        pct_causality_success: pct(ok.iter().filter(|o| o.causality_success()).count()),
        mean_f1: mean(|o| o.f1),
        mean_f2: mean(|o| o.f2),
        realizations_used: used,
    };
    SweepPoint { row, outcomes }
}

/// What varies along a sweep.
#[derive(Debug, Clone, Copy)]
enum Axis {
    Sparsity,
    StructuredRows,
    Coupling,
}

fn run_sweep(cfg: &ExperimentConfig, structure: Structure, axis: Axis) -> Result<SweepTable> {
    cfg.validate()?;
    let solvers = solver_registry();
    let estimators = estimator_registry();
    let pipeline = PairPipeline {
        solver: solvers.resolve(&cfg.solver)?,
        estimator: estimators.resolve(&cfg.estimator)?,
        k_max: cfg.budget(),
        max_lags: cfg.max_lags,
        significance: cfg.significance,
        threshold: SUCCESS_THRESHOLD,
    };
    let values: Vec<f64> = match axis {
        Axis::Sparsity => cfg.k_values.iter().map(|&k| k as f64).collect(),
        Axis::StructuredRows => cfg.s_values.iter().map(|&s| s as f64).collect(),
        Axis::Coupling => cfg.gamma_values.clone(),
    };
    let experiment = match axis {
        Axis::Sparsity => ExperimentKind::SparsitySweep,
        Axis::StructuredRows => ExperimentKind::StructuredRowsSweep,
        Axis::Coupling => ExperimentKind::CouplingSweep,
    };
    let mut points = Vec::with_capacity(values.len());
    for (idx, &value) in values.iter().enumerate() {
        let outcomes: Vec<_> = (0..cfg.realizations)
            .into_par_iter()
            .map(|r| {
                let (signal_seed, matrix_seed) = realization_seeds(cfg.base_seed, r, idx);
                let mut pc = SparsePairConfig {
                    n: cfg.n,
                    k: cfg.k,
                    alpha: cfg.alpha,
                    beta: cfg.beta,
                    gamma: cfg.gamma,
                    noise_var: cfg.noise_var,
                    seed: signal_seed,
                };
                let mut rows = None;
                match axis {
                    Axis::Sparsity => pc.k = value as usize,
                    Axis::StructuredRows => rows = Some(value as usize),
                    Axis::Coupling => pc.gamma = value,
                }
                let run = || -> Result<PairOutcome> {
                    let pair = simulate_sparse_pair(&pc)?;
                    let phi = build_matrix(structure, rows, cfg.n, cfg.m, matrix_seed)?;
                    pipeline.run(&pair, &phi)
                };
                run().map_err(|e| {
                    log::warn!("{} point {value} realization {r}: {e}", experiment.name());
                    e.to_string()
                })
            })
            .collect();
        points.push(aggregate(value, outcomes));
    }
    Ok(SweepTable {
        experiment,
        structure,
        points,
    })
}

pub fn run_sparsity_sweep(cfg: &ExperimentConfig, structure: Structure) -> Result<SweepTable> {
    run_sweep(cfg, structure, Axis::Sparsity)
}

pub fn run_structured_rows_sweep(cfg: &ExperimentConfig, structure: Structure) -> Result<SweepTable> {
    run_sweep(cfg, structure, Axis::StructuredRows)
}

pub fn run_coupling_sweep(cfg: &ExperimentConfig, structure: Structure) -> Result<SweepTable> {
    run_sweep(cfg, structure, Axis::Coupling)
}

#[derive(Debug, Clone, Serialize)]
pub struct NetworkResult {
    pub structure: Structure,
    pub realizations: usize,
    pub matrix: cs_causality::sensing::MatrixSpec,
    pub connectivity: ConnectivityMatrix,
    /// Mean firing rate per node over all realizations.
    pub rates: Vec<f64>,
}

/// Simulates `cfg.realizations` runs of the default 10-node network,
/// compresses every channel with one shared matrix and scans conditional
/// GC over the pooled trials.
pub fn run_network_experiment(cfg: &ExperimentConfig, structure: Structure, score: bool) -> Result<NetworkResult> {
    cfg.validate()?;
    let estimators = estimator_registry();
    let estimator = estimators.resolve(&cfg.estimator)?;
    let matrix_seed = rng::derive_seed(cfg.base_seed, &[u64::MAX]);
    let phi = build_matrix(structure, None, cfg.network_length, cfg.network_m, matrix_seed)?;
    let reference = default_network_10(0).ground_truth();
    let runs: Vec<(Series, Vec<f64>)> = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| {
            let mut net = default_network_10(realization_seeds(cfg.base_seed, r, 0).0);
            net.length = cfg.network_length;
            let spikes = simulate_glm_network(&net)?;
            let rows: Vec<Vec<f64>> = (0..net.n_nodes).map(|i| spikes.row(i).iter().copied().collect()).collect();
            let rates = rows.iter().map(|r| r.iter().sum::<f64>() / r.len() as f64).collect();
            let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            Ok((compress_rows(&phi, &refs)?, rates))
        })
        .collect::<Result<_>>()?;
    let nodes = reference.nrows();
    let mut rates = vec![0.0; nodes];
    for (_, r) in &runs {
        for (acc, v) in rates.iter_mut().zip(r) {
            *acc += v / runs.len() as f64;
        }
    }
    let trials: Vec<Series> = runs.into_iter().map(|(s, _)| s).collect();
    let p = select_order_aic(&trials, cfg.max_lags)?;
    let mut connectivity = connectivity_with(&trials, p, cfg.significance, estimator)?;
    if score {
        connectivity.score(reference)?;
    }
    Ok(NetworkResult {
        structure,
        realizations: cfg.realizations,
        matrix: phi.spec(),
        connectivity,
        rates,
    })
}

impl NetworkResult {
    pub fn emit(&self, out: &mut OutputDir) -> Result<()> {
        let stem = format!("network_{}", self.structure);
        out.csv(&format!("{stem}_connectivity.csv"), |w| self.connectivity.write_csv(w))?;
        out.json(&format!("{stem}.json"), self)?;
        let adj = self.connectivity.adjacency.map(|b| if b { 1.0 } else { 0.0 });
        let title = format!("Granger connectivity ({}, {} realizations)", self.structure, self.realizations);
        out.svg(&format!("{stem}_adjacency.svg"), &heatmap_svg(&title, &adj, "target", "source"))?;
        Ok(())
    }
}

/// One realization with every intermediate artifact kept.
#[derive(Debug, Clone, Serialize)]
pub struct SingleRunResult {
    pub structure: Structure,
    pub matrix: cs_causality::sensing::MatrixSpec,
    pub outcome: PairOutcome,
    pub gc: Vec<GcResult>,
    #[serde(skip)]
    pub original: Series,
    #[serde(skip)]
    pub compressed: Series,
    #[serde(skip)]
    pub spectral_original: Option<SpectralGcCurve>,
    #[serde(skip)]
    pub spectral_compressed: Option<SpectralGcCurve>,
}

pub fn run_single(cfg: &ExperimentConfig, structure: Structure) -> Result<SingleRunResult> {
    cfg.validate()?;
    let solvers = solver_registry();
    let estimators = estimator_registry();
    let estimator = estimators.resolve(&cfg.estimator)?;
    let pipeline = PairPipeline {
        solver: solvers.resolve(&cfg.solver)?,
        estimator,
        k_max: cfg.budget(),
        max_lags: cfg.max_lags,
        significance: cfg.significance,
        threshold: SUCCESS_THRESHOLD,
    };
    let (signal_seed, matrix_seed) = realization_seeds(cfg.base_seed, 0, 0);
    let pair = simulate_sparse_pair(&SparsePairConfig {
        n: cfg.n,
        k: cfg.k,
        alpha: cfg.alpha,
        beta: cfg.beta,
        gamma: cfg.gamma,
        noise_var: cfg.noise_var,
        seed: signal_seed,
    })?;
    let phi: SensingMatrix = build_matrix(structure, None, cfg.n, cfg.m, matrix_seed)?;
    let outcome = pipeline.run(&pair, &phi)?;
    let compressed = compress_rows(&phi, &[&pair.z1, &pair.z2])?;
    let original = Series::from_fn(2, cfg.n, |v, t| if v == 0 { pair.z1[t] } else { pair.z2[t] });

    let trials = std::slice::from_ref(&compressed);
    let ctx = GcContext::new(trials, outcome.order)?;
    let gc = vec![
        gc_from_context(&ctx, estimator, 0, 1, cfg.significance)?,
        gc_from_context(&ctx, estimator, 1, 0, cfg.significance)?,
    ];
    let curve = |s: &Series| -> Option<SpectralGcCurve> {
        let t = std::slice::from_ref(s);
        let p = select_order_aic(t, cfg.max_lags).ok()?;
        spectral_gc_series(t, 0, 1, p, DEFAULT_GRID)
            .map_err(|e| log::warn!("spectral GC unavailable: {e}"))
            .ok()
    };
    Ok(SingleRunResult {
        structure,
        matrix: phi.spec(),
        outcome,
        gc,
        spectral_original: curve(&original),
        spectral_compressed: curve(&compressed),
        original,
        compressed,
    })
}

fn series_rows(s: &Series) -> Vec<Vec<f64>> {
    (0..s.nrows()).map(|i| s.row(i).iter().copied().collect()).collect()
}

impl SingleRunResult {
    pub fn emit(&self, out: &mut OutputDir) -> Result<()> {
        let stem = format!("single_run_{}", self.structure);
        for (name, s) in [("series", &self.original), ("compressed", &self.compressed)] {
            let rows = series_rows(s);
            let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            out.csv(&format!("{stem}_{name}.csv"), |w| write_channels_csv(w, &refs))?;
        }
        out.csv(&format!("{stem}_gc.csv"), |w| {
            writeln!(w, "source,target,f_stat,p_value,significant")?;
            for g in &self.gc {
                writeln!(w, "{},{},{:?},{:?},{}", g.source, g.target, g.f_stat, g.p_value, g.significant)?;
            }
            Ok(())
        })?;
        out.json(&format!("{stem}.json"), self)?;
        out.json(&format!("{stem}_matrix.json"), &self.matrix)?;
        for (name, c) in [("original", &self.spectral_original), ("compressed", &self.spectral_compressed)] {
            if let Some(c) = c {
                out.csv(&format!("{stem}_spectral_{name}.csv"), |w| c.write_csv(w))?;
                let plot = LinePlot {
                    title: format!("Spectral GC y1 to y2 ({name})"),
                    x_label: "frequency (rad/sample)".into(),
                    y_label: "I(f)".into(),
                    series: vec![LineSeries {
                        label: name.into(),
                        points: c.freqs.iter().copied().zip(c.values.iter().copied()).collect(),
                    }],
                    y_range: None,
                };
                out.svg(&format!("{stem}_spectral_{name}.svg"), &line_plot_svg(&plot))?;
            }
        }
        Ok(())
    }
}

/// Human-readable result of running one experiment.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub lines: Vec<String>,
}

pub trait Experiment: Send + Sync {
    fn description(&self) -> &'static str;
    fn run(&self, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<ExperimentReport>;
}

fn sweep_report(tables: &[SweepTable]) -> ExperimentReport {
    let mut lines = Vec::new();
    for t in tables {
        for r in t.rows() {
            lines.push(format!(
                "{} {} value={} recovery={:.1}% causality={:.1}% mean_f1={:.4} mean_f2={:.4} used={}",
                t.experiment.name(),
                t.structure,
                r.sweep_value,
                r.pct_recovery_success,
                r.pct_causality_success,
                r.mean_f1,
                r.mean_f2,
                r.realizations_used
            ));
        }
    }
    ExperimentReport { lines }
}

fn run_sweeps(
    cfg: &ExperimentConfig,
    out: &mut OutputDir,
    f: fn(&ExperimentConfig, Structure) -> Result<SweepTable>,
) -> Result<ExperimentReport> {
    let mut tables = Vec::new();
    for s in cfg.matrix_kind.structures() {
        let t = f(cfg, s)?;
        if t.points.iter().all(|p| p.row.realizations_used == 0) {
            return Err(HarnessError::Experiment(format!("every realization failed for {s}")));
        }
        t.emit(out)?;
        tables.push(t);
    }
    Ok(sweep_report(&tables))
}

struct SparsitySweep;
struct StructuredRowsSweep;
struct CouplingSweep;
struct Network;
struct SingleRun;

impl Experiment for SparsitySweep {
    fn description(&self) -> &'static str {
        "reconstruction and causality success against sparsity k"
    }
    fn run(&self, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<ExperimentReport> {
        run_sweeps(cfg, out, run_sparsity_sweep)
    }
}

impl Experiment for StructuredRowsSweep {
    fn description(&self) -> &'static str {
        "causality success against the number of structured rows"
    }
    fn run(&self, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<ExperimentReport> {
        run_sweeps(cfg, out, run_structured_rows_sweep)
    }
}

impl Experiment for CouplingSweep {
    fn description(&self) -> &'static str {
        "Granger statistics against coupling strength"
    }
    fn run(&self, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<ExperimentReport> {
        run_sweeps(cfg, out, run_coupling_sweep)
    }
}

impl Experiment for Network {
    fn description(&self) -> &'static str {
        "connectivity of the 10-node spiking network from compressed trains"
    }
    fn run(&self, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<ExperimentReport> {
        let mut lines = Vec::new();
        for s in cfg.matrix_kind.structures() {
            let res = run_network_experiment(cfg, s, true)?;
            res.emit(out)?;
            let c = &res.connectivity;
            lines.push(format!(
                "network {s} order={} sensitivity={:.3} specificity={:.3} edges={}",
                c.order,
                c.sensitivity.unwrap_or(f64::NAN),
                c.specificity.unwrap_or(f64::NAN),
                c.adjacency.iter().filter(|b| **b).count()
            ));
        }
        Ok(ExperimentReport { lines })
    }
}

impl Experiment for SingleRun {
    fn description(&self) -> &'static str {
        "one realization with all intermediate artifacts"
    }
    fn run(&self, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<ExperimentReport> {
        let mut lines = Vec::new();
        for s in cfg.matrix_kind.structures() {
            let res = run_single(cfg, s)?;
            res.emit(out)?;
            let o = &res.outcome;
            lines.push(format!(
                "single-run {s} order={} f1={:.4} (p={:.2e}) f2={:.4} (p={:.2e}) mse1={:.2e} mse2={:.2e}",
                o.order, o.f1, o.p1, o.f2, o.p2, o.mse1, o.mse2
            ));
        }
        Ok(ExperimentReport { lines })
    }
}

pub fn experiment_registry() -> Registry<dyn Experiment> {
    let mut reg: Registry<dyn Experiment> = Registry::new("experiment");
    reg.register(ExperimentKind::SparsitySweep.name(), Box::new(SparsitySweep));
    reg.register(ExperimentKind::StructuredRowsSweep.name(), Box::new(StructuredRowsSweep));
    reg.register(ExperimentKind::CouplingSweep.name(), Box::new(CouplingSweep));
    reg.register(ExperimentKind::Network.name(), Box::new(Network));
    reg.register(ExperimentKind::SingleRun.name(), Box::new(SingleRun));
    reg
}
