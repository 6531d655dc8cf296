use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use floquet_ising::cli::{run, write_output, Experiment, ExperimentConfig, OutputFormat, PartialConfig, ScanSpec};
use floquet_ising::model::Boundary;
use floquet_ising::Result;

/// Driven transverse-field Ising chain: entanglement dynamics and Floquet analysis.
#[derive(Debug, Parser)]
#[command(name = "floquet-ising", version)]
struct Args {
    /// convergence | volume_law | frequency_scan | floquet_dump | gge_dump | quench_check
    experiment: Experiment,
    /// JSON file with ExperimentConfig fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    h0: Option<f64>,
    /// Drive amplitude.
    #[arg(long = "A", allow_negative_numbers = true)]
    amplitude: Option<f64>,
    #[arg(long)]
    omega0: Option<f64>,
    /// Chain length (even).
    #[arg(long = "L")]
    sites: Option<usize>,
    /// pbc | obc
    #[arg(long)]
    boundary: Option<Boundary>,
    /// Comma-separated subchain lengths.
    #[arg(long, value_delimiter = ',')]
    l: Option<Vec<usize>>,
    /// Last stroboscopic period.
    #[arg(long)]
    nmax: Option<usize>,
    /// Frequency grid start:stop:step.
    #[arg(long)]
    scan: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Also write a gnuplot script.
    #[arg(long)]
    plots: bool,
}

impl Args {
    fn overrides(&self) -> PartialConfig {
        PartialConfig {
            h0: self.h0,
            amplitude: self.amplitude,
            omega0: self.omega0,
            sites: self.sites,
            boundary: self.boundary,
            subchain_lengths: self.l.clone(),
            n_max: self.nmax,
            scan: self.scan.clone().map(ScanSpec::Range),
            output_path: self.out.clone(),
            format: self.format,
            emit_plots: self.plots.then_some(true),
            ..Default::default()
        }
    }
}

fn execute(args: &Args) -> Result<()> {
    let mut layers = Vec::new();
    if let Some(path) = &args.config {
        layers.push(PartialConfig::load(path)?);
    }
    layers.push(args.overrides());
    let cfg = ExperimentConfig::resolve(args.experiment, &layers)?;
    log::info!("running {} with L = {}", cfg.experiment, cfg.chain.sites);
    let outcome = run(&cfg)?;
    for path in write_output(&outcome.report(&cfg), &cfg)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
