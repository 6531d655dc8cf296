//! Entanglement entropy of subchains and the asymptotic entropy density.
//!
//! Entropies are in nats.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::corr::{k_integral, Integral, KIntegration, Kernel, MajoranaCorrelation, QuadratureSettings};
use crate::error::{Error, Result};
use crate::floquet::{analyze_grid, FloquetMode, FloquetSettings, GGEData};
use crate::model::{bogoliubov_angle, ChainSpec, DriveParams, KGrid};

/// Largest `|ν_i + ν_{2l-1-i}|` of the sorted spectrum of `iΓ`.
pub const PAIRING_TOLERANCE: f64 = 1e-8;
/// Overshoot of `|ν|` beyond 1 that is clamped without comment.
pub const SILENT_CLAMP: f64 = 1e-9;
/// Overshoot of `|ν|` beyond 1 that is clamped with a warning; larger is an error.
pub const MAX_CLAMP: f64 = 1e-6;

/// Spectrum `ν_1 ≥ … ≥ ν_l ≥ 0` of `iΓ` (the non-negative branch).
pub fn correlation_spectrum(corr: &MajoranaCorrelation) -> Result<Vec<f64>> {
    let g = corr.gamma();
    let n = g.nrows();
    let l = n / 2;
    let h = DMatrix::<C64>::from_fn(n, n, |r, c| C64::new(0.0, g[(r, c)]));
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let mut nu = Vec::with_capacity(l);
    for m in 0..l {
        let (hi, lo) = (ev[m], ev[n - 1 - m]);
        if (hi + lo).abs() > PAIRING_TOLERANCE {
            return Err(Error::MalformedCorrelation(format!(
                "eigenvalues {hi} and {lo} are not a ± pair"
            )));
        }
        let v = 0.5 * (hi - lo);
        if v > 1.0 + MAX_CLAMP {
            return Err(Error::OutOfDomain(v));
        }
        if v > 1.0 + SILENT_CLAMP {
            log::warn!("clamping correlation eigenvalue {v} to 1");
        }
        nu.push(v.clamp(0.0, 1.0));
    }
    Ok(nu)
}

/// `H(x) = -((1+x)/2) log((1+x)/2) - ((1-x)/2) log((1-x)/2)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 + SILENT_CLAMP) {
        return Err(Error::OutOfDomain(x));
    }
    let x = x.clamp(-1.0, 1.0);
    let p = 0.5 * (1.0 + x);
    let q = 0.5 * (1.0 - x);
    Ok(-xlogx(p) - xlogx(q))
}

fn xlogx(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.ln()
    }
}

/// `S = Σ_m H(ν_m)`.
pub fn subchain_entropy(corr: &MajoranaCorrelation) -> Result<f64> {
    correlation_spectrum(corr)?
        .into_iter()
        .map(binary_entropy)
        .sum()
}

/// An entropy density with its quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyDensity {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl From<Integral> for EntropyDensity {
    fn from(i: Integral) -> Self {
        EntropyDensity {
            value: i.value / PI,
            error: i.error / PI,
            converged: i.converged,
        }
    }
}

fn density_of(k: &[f64], f: &[f64], method: KIntegration, settings: &QuadratureSettings) -> Result<EntropyDensity> {
    Ok(k_integral(k, f, Kernel::Cos(0), method, settings)?.into())
}

/// `s^∞ = (1/π)∫₀^π H(A_k) dk` with `A_k = 1 - 2|r⁻_k|²`.
pub fn asymptotic_entropy_density(
    modes: &[FloquetMode],
    method: KIntegration,
    settings: &QuadratureSettings,
) -> Result<EntropyDensity> {
    let k: Vec<f64> = modes.iter().map(|m| m.k).collect();
    let f = modes
        .iter()
        .map(|m| binary_entropy(m.bloch_amplitude()))
        .collect::<Result<Vec<_>>>()?;
    density_of(&k, &f, method, settings)
}

/// Per-mode GGE entropy `-p log p - (1-p) log(1-p)` integrated as `(1/π)∫₀^π`.
pub fn gge_entropy_density(gge: &GGEData, method: KIntegration, settings: &QuadratureSettings) -> Result<EntropyDensity> {
    let f: Vec<f64> = gge
        .n_expectation
        .iter()
        .map(|&p| -xlogx(p) - xlogx(1.0 - p))
        .collect();
    density_of(&gge.k, &f, method, settings)
}

/// Closed-form and pipeline values of `s^∞` after a sudden quench.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchComparison {
    pub h_initial: f64,
    pub h_final: f64,
    pub closed_form: EntropyDensity,
    pub pipeline: EntropyDensity,
}

impl QuenchComparison {
    pub fn deviation(&self) -> f64 {
        (self.closed_form.value - self.pipeline.value).abs()
    }
}

/// `|r⁺_k|² = cos²(Δθ_k/2)` for the ground state at `h0` in the eigenbasis at `h1`.
pub fn quench_occupation(h0: f64, h1: f64, k: f64) -> f64 {
    let dtheta = bogoliubov_angle(h0, k) - bogoliubov_angle(h1, k);
    (0.5 * dtheta).cos().powi(2)
}

/// A constant drive at `h1` whose frequency exceeds twice the bandwidth, so
/// no quasi-energy is folded.
pub fn quench_drive(h1: f64) -> Result<DriveParams> {
    DriveParams::constant(h1, 2.0 * (h1.abs() + 1.0) + 1.0)
}

/// Compare the closed-form quench entropy density with the Floquet pipeline
/// run on a constant drive at `h1`.
pub fn quench_limit_check(
    h0: f64,
    h1: f64,
    grid: &KGrid,
    floquet: &FloquetSettings,
    method: KIntegration,
    settings: &QuadratureSettings,
) -> Result<QuenchComparison> {
    let closed = GGEData {
        k: grid.momenta().to_vec(),
        lambda: vec![f64::NAN; grid.len()],
        n_expectation: grid.momenta().iter().map(|&k| quench_occupation(h0, h1, k)).collect(),
    };
    let closed_form = gge_entropy_density(&closed, method, settings)?;
    let p = quench_drive(h1)?;
    let modes = analyze_grid(&p, grid, h0, floquet)?;
    let pipeline = asymptotic_entropy_density(&modes, method, settings)?;
    Ok(QuenchComparison {
        h_initial: h0,
        h_final: h1,
        closed_form,
        pipeline,
    })
}

/// Entropy of a subchain sampled at a sequence of times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub l: usize,
    pub drive: DriveParams,
    pub chain: ChainSpec,
}

impl EntropyTrace {
    pub fn new(l: usize, drive: DriveParams, chain: ChainSpec) -> Self {
        EntropyTrace {
            times: Vec::new(),
            values: Vec::new(),
            l,
            drive,
            chain,
        }
    }

    pub fn push(&mut self, t: f64, s: f64) -> Result<()> {
        let bound = self.l as f64 * LN_2 + 1e-9;
        if !(s >= -1e-9 && s <= bound) {
            return Err(Error::OutOfDomain(s));
        }
        self.times.push(t);
        self.values.push(s);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
