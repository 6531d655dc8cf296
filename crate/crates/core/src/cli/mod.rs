//! Experiment orchestration for the `floquet-ising` binary.
//!
//! A run is described by an [`ExperimentConfig`], resolved from per-experiment
//! defaults, an optional JSON file and command-line overrides (later sources
//! win). [`run`] produces an [`Outcome`], and [`write_output`] turns it into
//! CSV, JSON and gnuplot files.

mod output;
mod run;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corr::{KIntegration, QuadratureSettings};
use crate::error::{Error, Result};
use crate::floquet::FloquetSettings;
use crate::model::{Boundary, ChainSpec, DriveParams};

pub use output::{format_float, read_csv, render_csv, write_output, Report, Table, Value};
pub use run::{
    entry_period, low_frequency_threshold, resonance_frequencies, revival_horizon, run, run_convergence,
    run_floquet_dump, run_frequency_scan, run_gge_dump, run_quench_check, run_volume_law, ConvergenceResult,
    GgeDumpResult, Outcome, ScanResult, ScanRow, VolumeLawResult, VolumeLawRow, ENTRY_MIN_PERIODS,
    ENTRY_TOLERANCE, RESONANCE_ORDER_CUTOFF,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Convergence,
    VolumeLaw,
    FrequencyScan,
    FloquetDump,
    GgeDump,
    QuenchCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Convergence,
        Experiment::VolumeLaw,
        Experiment::FrequencyScan,
        Experiment::FloquetDump,
        Experiment::GgeDump,
        Experiment::QuenchCheck,
    ];

    /// Name used on the command line and as the output file stem.
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::VolumeLaw => "volume_law",
            Experiment::FrequencyScan => "frequency_scan",
            Experiment::FloquetDump => "floquet_dump",
            Experiment::GgeDump => "gge_dump",
            Experiment::QuenchCheck => "quench_check",
        }
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// CSV table plus its JSON mirror.
    #[default]
    Csv,
    /// JSON only.
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

/// A fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(flatten)]
    pub drive: DriveParams,
    #[serde(flatten)]
    pub chain: ChainSpec,
    pub subchain_lengths: Vec<usize>,
    /// Last stroboscopic index; `None` stops at the revival horizon.
    pub n_max: Option<usize>,
    /// Driving frequencies of a frequency scan.
    pub scan: Vec<f64>,
    /// `(h_initial, h_final)` pairs of a quench check.
    pub quench_pairs: Vec<(f64, f64)>,
    pub output_path: PathBuf,
    pub format: OutputFormat,
    pub emit_plots: bool,
    pub integration: KIntegration,
    pub quadrature: QuadratureSettings,
    pub floquet: FloquetSettings,
}

impl ExperimentConfig {
    /// Reduced-scale defaults: `h0 = 2.3`, `A = 1`, `ω0 = 4`, with `L = 400`
    /// for the real-space convergence run and `L = 1000` otherwise.
    pub fn defaults(experiment: Experiment) -> Self {
        let sites = match experiment {
            Experiment::Convergence => 400,
            _ => 1000,
        };
        let subchain_lengths = match experiment {
            Experiment::Convergence => vec![20, 40, 60],
            _ => vec![20, 40, 80, 160],
        };
        let scan = match experiment {
            Experiment::FrequencyScan => scan_range(0.5, 7.0, 0.025).expect("valid default scan"),
            _ => Vec::new(),
        };
        ExperimentConfig {
            experiment,
            drive: DriveParams::new(2.3, 1.0, 4.0).expect("valid default drive"),
            chain: ChainSpec::new(sites, Boundary::SpinPbc).expect("valid default chain"),
            subchain_lengths,
            n_max: None,
            scan,
            quench_pairs: vec![(2.3, 2.3), (2.3, 1.5), (0.5, 1.5), (2.3, 0.5)],
            output_path: PathBuf::from("."),
            format: OutputFormat::Csv,
            emit_plots: false,
            integration: KIntegration::Spline,
            quadrature: QuadratureSettings::default(),
            floquet: FloquetSettings::default(),
        }
    }

    /// Defaults for `experiment`, overlaid with `layers` in order.
    pub fn resolve(experiment: Experiment, layers: &[PartialConfig]) -> Result<Self> {
        let mut merged = PartialConfig::default();
        for layer in layers {
            if let Some(e) = layer.experiment {
                if e != experiment {
                    return Err(Error::Config(format!(
                        "configuration is for '{e}' but '{experiment}' was requested"
                    )));
                }
            }
            merged = merged.overlay(layer.clone());
        }
        let mut cfg = ExperimentConfig::defaults(experiment);
        let d = cfg.drive;
        cfg.drive = DriveParams::new(
            merged.h0.unwrap_or(d.h0()),
            merged.amplitude.unwrap_or(d.amplitude()),
            merged.omega0.unwrap_or(d.omega0()),
        )?;
        cfg.chain = ChainSpec::new(
            merged.sites.unwrap_or(cfg.chain.sites),
            merged.boundary.unwrap_or(cfg.chain.boundary),
        )?;
        if let Some(v) = merged.subchain_lengths {
            cfg.subchain_lengths = v;
        }
        if merged.n_max.is_some() {
            cfg.n_max = merged.n_max;
        }
        if let Some(s) = merged.scan {
            cfg.scan = s.frequencies()?;
        }
        if let Some(q) = merged.quench_pairs {
            cfg.quench_pairs = q;
        }
        if let Some(p) = merged.output_path {
            cfg.output_path = p;
        }
        if let Some(f) = merged.format {
            cfg.format = f;
        }
        if let Some(b) = merged.emit_plots {
            cfg.emit_plots = b;
        }
        if let Some(m) = merged.integration {
            cfg.integration = m;
        }
        if let Some(q) = merged.quadrature {
            cfg.quadrature = q;
        }
        if let Some(f) = merged.floquet {
            cfg.floquet = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let needs_l = matches!(self.experiment, Experiment::Convergence | Experiment::VolumeLaw);
        if needs_l && self.subchain_lengths.is_empty() {
            return Err(Error::Config("subchain_lengths is empty".into()));
        }
        if self.subchain_lengths.contains(&0) {
            return Err(Error::Config("subchain lengths must be positive".into()));
        }
        if self.experiment == Experiment::FrequencyScan && self.scan.is_empty() {
            return Err(Error::Config("frequency scan needs a non-empty scan grid".into()));
        }
        if let Some(w) = self.scan.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Config(format!("scan frequency {w} is not positive")));
        }
        if let Some((a, b)) = self.quench_pairs.iter().find(|(a, b)| !(a.is_finite() && b.is_finite())) {
            return Err(Error::Config(format!("quench pair ({a}, {b}) is not finite")));
        }
        if self.floquet.samples_per_period == 0 {
            return Err(Error::Config("floquet.samples_per_period must be positive".into()));
        }
        if self.floquet.steps_per_period == Some(0) {
            return Err(Error::Config("floquet.steps_per_period must be positive".into()));
        }
        let q = &self.quadrature;
        if !(q.abs_tol >= 0.0 && q.rel_tol >= 0.0 && q.abs_tol + q.rel_tol > 0.0) {
            return Err(Error::Config("quadrature tolerances must be non-negative and not both zero".into()));
        }
        Ok(())
    }
}

/// Frequencies of a scan, given either as a list or as `"start:stop:step"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScanSpec {
    List(Vec<f64>),
    Range(String),
}

impl ScanSpec {
    pub fn frequencies(&self) -> Result<Vec<f64>> {
        match self {
            ScanSpec::List(v) => Ok(v.clone()),
            ScanSpec::Range(s) => parse_scan(s),
        }
    }
}

/// Parse `start:stop:step` into the inclusive grid `start + i·step`.
pub fn parse_scan(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(Error::Config(format!("scan '{s}' is not of the form start:stop:step")));
    };
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("scan '{s}': '{x}' is not a number")))
    };
    scan_range(num(a)?, num(b)?, num(c)?)
}

fn scan_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop >= start) {
        return Err(Error::Config(format!("invalid scan range {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// One layer of configuration: every field is optional. Field names match
/// [`ExperimentConfig`] so a serialized config reads back unchanged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub experiment: Option<Experiment>,
    pub h0: Option<f64>,
    #[serde(rename = "A")]
    pub amplitude: Option<f64>,
    pub omega0: Option<f64>,
    #[serde(rename = "L")]
    pub sites: Option<usize>,
    pub boundary: Option<Boundary>,
    pub subchain_lengths: Option<Vec<usize>>,
    pub n_max: Option<usize>,
    pub scan: Option<ScanSpec>,
    pub quench_pairs: Option<Vec<(f64, f64)>>,
    pub output_path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub emit_plots: Option<bool>,
    pub integration: Option<KIntegration>,
    pub quadrature: Option<QuadratureSettings>,
    pub floquet: Option<FloquetSettings>,
}

impl PartialConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` replace those of `self`.
    pub fn overlay(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            experiment: other.experiment.or(self.experiment),
            h0: other.h0.or(self.h0),
            amplitude: other.amplitude.or(self.amplitude),
            omega0: other.omega0.or(self.omega0),
            sites: other.sites.or(self.sites),
            boundary: other.boundary.or(self.boundary),
            subchain_lengths: other.subchain_lengths.or(self.subchain_lengths),
            n_max: other.n_max.or(self.n_max),
            scan: other.scan.or(self.scan),
            quench_pairs: other.quench_pairs.or(self.quench_pairs),
            output_path: other.output_path.or(self.output_path),
            format: other.format.or(self.format),
            emit_plots: other.emit_plots.or(self.emit_plots),
            integration: other.integration.or(self.integration),
            quadrature: other.quadrature.or(self.quadrature),
            floquet: other.floquet.or(self.floquet),
        }
    }
}
