use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cs_causality::sensing::Structure;
use cs_causality::var::{connectivity_from_series, DEFAULT_ALPHA};
use cs_causality_harness::config::{ExperimentConfig, ExperimentKind};
use cs_causality_harness::error::{HarnessError, Result};
use cs_causality_harness::experiments::experiment_registry;
use cs_causality_harness::ingest::{ingest_spike_trains, SpikeFormat};
use cs_causality_harness::output::OutputDir;
use cs_causality_harness::pair::{build_matrix, compress_rows};
use cs_causality_harness::plot::heatmap_svg;
use cs_causality_harness::{verify, with_workers, worker_count};

#[derive(Parser)]
#[command(name = "cs-causality", version, about = "Granger causality on compressively sensed sparse signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON configuration.
    Run {
        /// sparsity-sweep, structured-rows-sweep, coupling-sweep, network or single-run
        experiment: String,
        #[arg(long)]
        config: PathBuf,
        /// Overrides base_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides output_dir (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compress a multichannel recording and scan its Granger connectivity.
    Connect {
        #[arg(long)]
        input: PathBuf,
        /// circulant or toeplitz
        #[arg(long, default_value = "circulant")]
        matrix: String,
        #[arg(long)]
        m: usize,
        /// csv or events
        #[arg(long, default_value = "csv")]
        format: String,
        /// Bin width for event lists, in timestamp units.
        #[arg(long, default_value_t = 1.0)]
        bin_width: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the numerical identities used by the pipeline.
    Verify,
}

fn run(experiment: &str, config: PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let kind: ExperimentKind = experiment.parse()?;
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(k) = cfg.experiment {
        if k != kind {
            return Err(HarnessError::Config(format!(
                "config is for `{}` but `{}` was requested",
                k.name(),
                kind.name()
            )));
        }
    }
    cfg.experiment = Some(kind);
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    if out.is_some() {
        cfg.output_dir = out;
    }
    cfg.validate()?;
    let workers = worker_count(cfg.workers)?;
    let registry = experiment_registry();
    let exp = registry.resolve(kind.name()).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut dir = OutputDir::create(cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from(".")))?;
    log::info!("running {} with {workers} workers", kind.name());
    let report = with_workers(workers, || exp.run(&cfg, &mut dir))??;
    for line in &report.lines {
        println!("{line}");
    }
    for path in dir.written() {
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn connect(
    input: PathBuf,
    matrix: &str,
    m: usize,
    format: &str,
    bin_width: f64,
    seed: u64,
    alpha: f64,
    out: Option<PathBuf>,
) -> Result<()> {
    let structure: Structure = matrix
        .parse()
        .map_err(|_| HarnessError::Config(format!("unknown matrix kind `{matrix}`")))?;
    let format = match format.parse::<SpikeFormat>()? {
        SpikeFormat::EventList { .. } => SpikeFormat::EventList { bin_width },
        f => f,
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HarnessError::Config(format!("alpha {alpha} outside (0, 1)")));
    }
    let series = ingest_spike_trains(&input, format)?;
    let n = series.ncols();
    if m == 0 || m >= n {
        return Err(HarnessError::Config(format!("need 0 < m < {n} (the recording length), got {m}")));
    }
    let phi = build_matrix(structure, None, n, m, seed)?;
    let rows: Vec<Vec<f64>> = (0..series.nrows()).map(|i| series.row(i).iter().copied().collect()).collect();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let workers = worker_count(None)?;
    let compressed = compress_rows(&phi, &refs)?;
    let conn = with_workers(workers, || connectivity_from_series(std::slice::from_ref(&compressed), alpha, None))??;
    let mut dir = OutputDir::create(out.unwrap_or_else(|| PathBuf::from(".")))?;
    dir.csv("connectivity.csv", |w| conn.write_csv(w))?;
    dir.json("connectivity.json", &conn)?;
    dir.json("matrix.json", &phi.spec())?;
    let adj = conn.adjacency.map(|b| if b { 1.0 } else { 0.0 });
    dir.svg("adjacency.svg", &heatmap_svg("Granger connectivity", &adj, "target", "source"))?;
    println!(
        "{} channels, {n} bins compressed to {m}; order {}; {} significant edges",
        series.nrows(),
        conn.order,
        conn.adjacency.iter().filter(|b| **b).count()
    );
    for path in dir.written() {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn verify_cmd() -> Result<bool> {
    let checks = verify::run_checks()?;
    let mut ok = true;
    for c in &checks {
        let tag = match c.passed {
            Some(true) => "PASS",
            Some(false) => {
                ok = false;
                "FAIL"
            }
            None => "INFO",
        };
        println!("{tag} {}: {}", c.name, c.detail);
    }
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run { experiment, config, seed, out } => run(&experiment, config, seed, out),
        Command::Connect { input, matrix, m, format, bin_width, seed, alpha, out } => {
            connect(input, &matrix, m, &format, bin_width, seed, alpha, out)
        }
        Command::Verify => match verify_cmd() {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
