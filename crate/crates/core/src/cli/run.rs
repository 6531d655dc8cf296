//! The experiment runners.

use rayon::prelude::*;

use super::{Experiment, ExperimentConfig};
use crate::bdg::{check_unitarity, default_dt, ground_state_bogoliubov, PeriodMap};
use crate::corr::{asymptotic_toeplitz, correlation_generic, QuadratureReport};
use crate::entropy::{
    asymptotic_entropy_density, gge_entropy_density, quench_limit_check, subchain_entropy, EntropyDensity,
    EntropyTrace, QuenchComparison,
};
use crate::error::{Error, Result};
use crate::floquet::{analyze_grid, FloquetMode, FloquetSettings, GGEData};
use crate::model::{ChainSpec, DriveParams, KGrid};

/// Relative band around `S_l^∞(0)` used for the entry time of a trace.
pub const ENTRY_TOLERANCE: f64 = 0.03;
/// Periods a trace must stay in the band, after entering, to count as converged.
pub const ENTRY_MIN_PERIODS: usize = 5;
/// Highest multi-photon order annotated in a frequency scan.
pub const RESONANCE_ORDER_CUTOFF: usize = 10;

/// Last stroboscopic index with `nτ ≤ L/4`. Quasiparticles move at speed at
/// most 1, so finite-size revivals are not expected before this point.
pub fn revival_horizon(chain: &ChainSpec, p: &DriveParams) -> usize {
    (0.25 * chain.sites as f64 / p.tau() + 1e-9).floor() as usize
}

/// Frequencies below which the momentum grid of `sites` sites under-resolves
/// the Floquet data: 0.3 up to `L = 2000`, then shrinking as `1/L`.
pub fn low_frequency_threshold(sites: usize) -> f64 {
    0.3 * (2000.0 / sites as f64).min(1.0)
}

/// `(2|h0 - 1|/p, 2|h0 + 1|/q)` for `p, q = 1..=cutoff`: the `k = 0` and
/// `k = π` multi-photon resonances.
pub fn resonance_frequencies(h0: f64, cutoff: usize) -> (Vec<f64>, Vec<f64>) {
    let zero = 2.0 * (h0 - 1.0).abs();
    let pi = 2.0 * (h0 + 1.0).abs();
    let list = |w: f64| {
        if w == 0.0 {
            Vec::new()
        } else {
            (1..=cutoff).map(|p| w / p as f64).collect()
        }
    };
    (list(zero), list(pi))
}

/// First index `n` after which `values[n..=last]` stays within
/// `tol·|reference|` of `reference`, with at least [`ENTRY_MIN_PERIODS`]
/// periods in the band after `n`.
pub fn entry_period(values: &[f64], reference: f64, tol: f64, last: usize) -> Option<usize> {
    if values.is_empty() {
        return None;
    }
    let last = last.min(values.len() - 1);
    let band = tol * reference.abs();
    let mut entry = None;
    for n in (0..=last).rev() {
        if (values[n] - reference).abs() > band {
            break;
        }
        entry = Some(n);
    }
    entry.filter(|&n| last - n >= ENTRY_MIN_PERIODS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    /// One stroboscopic trace per subchain length, `n = 0..=n_max`.
    pub traces: Vec<EntropyTrace>,
    /// `S_l^∞(0)` for each trace.
    pub asymptotic: Vec<f64>,
    pub quadrature: Vec<QuadratureReport>,
    /// Entry period into the [`ENTRY_TOLERANCE`] band, within the horizon.
    pub entry: Vec<Option<usize>>,
    pub horizon: usize,
    pub n_max: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeLawRow {
    pub l: usize,
    pub entropy: f64,
    pub linear: f64,
    /// `S_l^∞(0)/l - s^∞`.
    pub rescaled_difference: f64,
    pub quadrature: QuadratureReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeLawResult {
    pub density: EntropyDensity,
    pub rows: Vec<VolumeLawRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub omega0: f64,
    pub density: EntropyDensity,
    pub gge_density: EntropyDensity,
    pub degenerate_modes: usize,
    /// Order `p` when this point is the one nearest `2|h0-1|/p`, else 0.
    pub k0_order: usize,
    /// Order `q` when this point is the one nearest `2|h0+1|/q`, else 0.
    pub kpi_order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub k0_resonances: Vec<f64>,
    pub kpi_resonances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GgeDumpResult {
    pub gge: GGEData,
    pub gge_density: EntropyDensity,
    pub density: EntropyDensity,
}

/// Result of any experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Convergence(ConvergenceResult),
    VolumeLaw(VolumeLawResult),
    FrequencyScan(ScanResult),
    FloquetDump(Vec<FloquetMode>),
    GgeDump(GgeDumpResult),
    QuenchCheck(Vec<QuenchComparison>),
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        Experiment::Convergence => Outcome::Convergence(run_convergence(cfg)?),
        Experiment::VolumeLaw => Outcome::VolumeLaw(run_volume_law(cfg)?),
        Experiment::FrequencyScan => Outcome::FrequencyScan(run_frequency_scan(cfg)?),
        Experiment::FloquetDump => Outcome::FloquetDump(run_floquet_dump(cfg)?),
        Experiment::GgeDump => Outcome::GgeDump(run_gge_dump(cfg)?),
        Experiment::QuenchCheck => Outcome::QuenchCheck(run_quench_check(cfg)?),
    })
}

fn stroboscopic(cfg: &ExperimentConfig) -> FloquetSettings {
    FloquetSettings {
        samples_per_period: 1,
        ..cfg.floquet
    }
}

fn warn_low_frequency(omega0: f64, sites: usize) {
    let threshold = low_frequency_threshold(sites);
    if omega0 < threshold {
        log::warn!("ω0 = {omega0} is below {threshold}: the L = {sites} momentum grid may under-resolve the Floquet data");
    }
}

fn warn_degenerate(modes: &[FloquetMode], omega0: f64) {
    let n = modes.iter().filter(|m| m.degenerate).count();
    if n > 0 {
        log::warn!("ω0 = {omega0}: {n} momentum modes have degenerate quasi-energies");
    }
}

fn modes_for(cfg: &ExperimentConfig, p: &DriveParams, settings: &FloquetSettings) -> Result<Vec<FloquetMode>> {
    let grid = KGrid::abc(cfg.chain.sites)?;
    let modes = analyze_grid(p, &grid, p.field(0.0), settings)?;
    warn_degenerate(&modes, p.omega0());
    Ok(modes)
}

fn asymptotic_entropy(cfg: &ExperimentConfig, modes: &[FloquetMode], l: usize) -> Result<(f64, QuadratureReport)> {
    let (corr, report) = asymptotic_toeplitz(modes, l, 0.0, cfg.integration, &cfg.quadrature)?;
    if !report.all_converged {
        log::warn!("l = {l}: momentum quadrature did not converge (error {:e})", report.max_error);
    }
    Ok((subchain_entropy(&corr)?, report))
}

/// Stroboscopic entropies `S_l(nτ)` from the real-space frame, with the
/// asymptotic reference `S_l^∞(0)` from the momentum-space Floquet data.
/// Subchains start at the first site, the loose end of an open chain.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceResult> {
    let (p, chain) = (&cfg.drive, &cfg.chain);
    let horizon = revival_horizon(chain, p);
    let n_max = cfg.n_max.unwrap_or(horizon);
    if n_max > horizon {
        log::warn!(
            "n_max·τ = {} exceeds L/4 = {}: stroboscopic points beyond n = {horizon} may show finite-size revivals",
            n_max as f64 * p.tau(),
            0.25 * chain.sites as f64
        );
    }
    let max_l = chain.sites / 2;
    if let Some(&l) = cfg.subchain_lengths.iter().find(|&&l| l > max_l) {
        return Err(Error::SubchainTooLong { l, max: max_l });
    }
    warn_low_frequency(p.omega0(), chain.sites);

    let modes = modes_for(cfg, p, &stroboscopic(cfg))?;
    let mut asymptotic = Vec::new();
    let mut quadrature = Vec::new();
    for &l in &cfg.subchain_lengths {
        let (s, q) = asymptotic_entropy(cfg, &modes, l)?;
        asymptotic.push(s);
        quadrature.push(q);
    }

    let dt = default_dt(p);
    let mut traces: Vec<EntropyTrace> = cfg
        .subchain_lengths
        .iter()
        .map(|&l| EntropyTrace::new(l, *p, *chain))
        .collect();
    let mut frame = ground_state_bogoliubov(chain, p)?;
    let map = if n_max > 0 { Some(PeriodMap::new(chain, p, dt)?) } else { None };
    for n in 0..=n_max {
        let values = cfg
            .subchain_lengths
            .par_iter()
            .map(|&l| subchain_entropy(&correlation_generic(&frame, l)?))
            .collect::<Result<Vec<_>>>()?;
        for (trace, s) in traces.iter_mut().zip(values) {
            trace.push(n as f64 * p.tau(), s)?;
        }
        if n < n_max {
            frame = map.as_ref().expect("period map for n_max > 0").apply(&frame);
            log::debug!("period {} of {n_max}", n + 1);
        }
    }
    check_unitarity(&frame)?;

    let entry = traces
        .iter()
        .zip(&asymptotic)
        .map(|(t, &s)| entry_period(&t.values, s, ENTRY_TOLERANCE, horizon))
        .collect();
    Ok(ConvergenceResult {
        traces,
        asymptotic,
        quadrature,
        entry,
        horizon,
        n_max,
        dt,
    })
}

/// `S_l^∞(0)` against `l·s^∞` from the asymptotic Floquet data alone.
pub fn run_volume_law(cfg: &ExperimentConfig) -> Result<VolumeLawResult> {
    let p = &cfg.drive;
    warn_low_frequency(p.omega0(), cfg.chain.sites);
    let modes = modes_for(cfg, p, &stroboscopic(cfg))?;
    let density = asymptotic_entropy_density(&modes, cfg.integration, &cfg.quadrature)?;
    let rows = cfg
        .subchain_lengths
        .iter()
        .map(|&l| {
            let (entropy, quadrature) = asymptotic_entropy(cfg, &modes, l)?;
            let lf = l as f64;
            Ok(VolumeLawRow {
                l,
                entropy,
                linear: lf * density.value,
                rescaled_difference: entropy / lf - density.value,
                quadrature,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VolumeLawResult { density, rows })
}

/// `s^∞` over a grid of driving frequencies, with resonance annotations.
pub fn run_frequency_scan(cfg: &ExperimentConfig) -> Result<ScanResult> {
    let (h0, amplitude) = (cfg.drive.h0(), cfg.drive.amplitude());
    let settings = stroboscopic(cfg);
    let below: Vec<f64> = cfg
        .scan
        .iter()
        .copied()
        .filter(|&w| w < low_frequency_threshold(cfg.chain.sites))
        .collect();
    if let Some(lowest) = below.iter().copied().reduce(f64::min) {
        log::warn!(
            "{} scan points (down to ω0 = {lowest}) are below {}: the L = {} momentum grid may under-resolve them",
            below.len(),
            low_frequency_threshold(cfg.chain.sites),
            cfg.chain.sites
        );
    }
    let mut rows = cfg
        .scan
        .par_iter()
        .map(|&omega0| {
            let p = DriveParams::new(h0, amplitude, omega0)?;
            let modes = modes_for(cfg, &p, &settings)?;
            let density = asymptotic_entropy_density(&modes, cfg.integration, &cfg.quadrature)?;
            let gge = GGEData::from_modes(&modes);
            let gge_density = gge_entropy_density(&gge, cfg.integration, &cfg.quadrature)?;
            Ok(ScanRow {
                omega0,
                density,
                gge_density,
                degenerate_modes: modes.iter().filter(|m| m.degenerate).count(),
                k0_order: 0,
                kpi_order: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (k0, kpi) = resonance_frequencies(h0, RESONANCE_ORDER_CUTOFF);
    annotate(&mut rows, &k0, |r, p| r.k0_order = p);
    annotate(&mut rows, &kpi, |r, q| r.kpi_order = q);
    Ok(ScanResult {
        rows,
        k0_resonances: k0,
        kpi_resonances: kpi,
    })
}

/// Mark the scan point nearest each resonance inside the scanned range.
/// Lower orders take precedence.
fn annotate(rows: &mut [ScanRow], resonances: &[f64], set: impl Fn(&mut ScanRow, usize)) {
    let lo = rows.iter().map(|r| r.omega0).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.omega0).fold(f64::NEG_INFINITY, f64::max);
    for (i, &w) in resonances.iter().enumerate().rev() {
        if w < lo || w > hi {
            continue;
        }
        let nearest = rows
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.omega0 - w).abs().total_cmp(&(b.1.omega0 - w).abs()))
            .map(|(j, _)| j);
        if let Some(j) = nearest {
            set(&mut rows[j], i + 1);
        }
    }
}

/// Per-mode Floquet data on the ABC grid.
pub fn run_floquet_dump(cfg: &ExperimentConfig) -> Result<Vec<FloquetMode>> {
    warn_low_frequency(cfg.drive.omega0(), cfg.chain.sites);
    modes_for(cfg, &cfg.drive, &stroboscopic(cfg))
}

/// Floquet-GGE multipliers and occupations, with both entropy densities.
pub fn run_gge_dump(cfg: &ExperimentConfig) -> Result<GgeDumpResult> {
    warn_low_frequency(cfg.drive.omega0(), cfg.chain.sites);
    let modes = modes_for(cfg, &cfg.drive, &stroboscopic(cfg))?;
    let gge = GGEData::from_modes(&modes);
    Ok(GgeDumpResult {
        gge_density: gge_entropy_density(&gge, cfg.integration, &cfg.quadrature)?,
        density: asymptotic_entropy_density(&modes, cfg.integration, &cfg.quadrature)?,
        gge,
    })
}

/// Closed-form quench entropy density against the constant-drive pipeline.
pub fn run_quench_check(cfg: &ExperimentConfig) -> Result<Vec<QuenchComparison>> {
    let grid = KGrid::abc(cfg.chain.sites)?;
    let settings = stroboscopic(cfg);
    cfg.quench_pairs
        .iter()
        .map(|&(h0, h1)| quench_limit_check(h0, h1, &grid, &settings, cfg.integration, &cfg.quadrature))
        .collect()
}
