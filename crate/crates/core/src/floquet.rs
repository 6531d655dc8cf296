//! Floquet analysis of a single momentum pair.
//!
//! The one-period propagator `F_k` is diagonalized directly; its eigenphases
//! `e^{∓iμτ}` give the quasi-energy and its eigenvectors the Floquet modes at
//! `t = 0`. Sampling the evolution of `φ⁺` over one period yields the periodic
//! components `u_P(t)`, `v_P(t)`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bdg::{default_steps_per_period, rk4_k_columns, NambuAmplitude, NORM_DRIFT_LIMIT};
use crate::error::{Error, Result};
use crate::model::{ground_state_amplitudes, DriveParams, KGrid};

/// `|λ₊ - λ₋|` below which the propagator is treated as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;
/// Squared overlaps below this are treated as exact zeros by [`gge_lambda`].
pub const OCCUPATION_FLOOR: f64 = 1e-300;
/// Default number of samples of the periodic components per period.
pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 64;

/// One-period propagator `F_k = U_k(τ, 0)`.
pub fn period_propagator(p: &DriveParams, k: f64, dt: f64) -> Result<Matrix2<C64>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("step dt = {dt} must be > 0")));
    }
    let one = C64::new(1.0, 0.0);
    let zero = C64::default();
    let [c0, c1] = rk4_k_columns(p, k, [[one, zero], [zero, one]], 0.0, p.tau(), dt);
    let f = Matrix2::new(c0[0], c1[0], c0[1], c1[1]);
    let defect = (f.adjoint() * f - Matrix2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if defect > NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift {
            drift: defect,
            limit: NORM_DRIFT_LIMIT,
        });
    }
    Ok(f)
}

/// Eigen-decomposition of a period propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetDecomposition {
    /// Folded quasi-energy in `[0, ω₀/2]`.
    pub mu: f64,
    /// Eigenvector for `e^{-iμτ}`.
    pub phi_plus: Vector2<C64>,
    /// Eigenvector for `e^{+iμτ}`.
    pub phi_minus: Vector2<C64>,
    pub degenerate: bool,
}

/// Fix the global phase so the first component is real and non-negative
/// (the second one if the first vanishes).
pub fn fix_gauge(v: Vector2<C64>) -> Vector2<C64> {
    let pivot = if v[0].norm() >= 1e-12 { v[0] } else { v[1] };
    if pivot.norm() == 0.0 {
        return v;
    }
    let mut out = v * C64::from_polar(1.0, -pivot.arg());
    let i = if v[0].norm() >= 1e-12 { 0 } else { 1 };
    out[i] = C64::new(pivot.norm(), 0.0);
    out
}

fn eigenvector(f: &Matrix2<C64>, lambda: C64) -> Option<Vector2<C64>> {
    let a = Vector2::new(f[(0, 1)], lambda - f[(0, 0)]);
    let b = Vector2::new(lambda - f[(1, 1)], f[(1, 0)]);
    let v = if a.norm() >= b.norm() { a } else { b };
    let n = v.norm();
    (n > 1e-14).then(|| v / C64::from(n))
}

/// Diagonalize a 2×2 unitary `F` with `F φ± = e^{∓iμτ} φ±`.
pub fn floquet_decompose(f: &Matrix2<C64>, omega0: f64) -> FloquetDecomposition {
    let tau = 2.0 * PI / omega0;
    let half_tr = (f[(0, 0)] + f[(1, 1)]) * 0.5;
    let det = f.determinant();
    let root = (half_tr * half_tr - det).sqrt();
    let (l1, l2) = (half_tr + root, half_tr - root);
    // the eigenvalue with the more negative phase carries φ⁺
    let (lp, lm) = if l1.arg() <= l2.arg() { (l1, l2) } else { (l2, l1) };
    let mu = (-lp.arg()).clamp(0.0, PI) / tau;
    let degenerate = (lp - lm).norm() < DEGENERACY_TOLERANCE;
    let phi_plus = if degenerate {
        None
    } else {
        eigenvector(f, lp)
    };
    let (phi_plus, degenerate) = match phi_plus {
        Some(v) => (v, degenerate),
        None => (Vector2::new(C64::new(1.0, 0.0), C64::default()), true),
    };
    let phi_minus = Vector2::new(-phi_plus[1].conj(), phi_plus[0].conj());
    FloquetDecomposition {
        mu,
        phi_plus: fix_gauge(phi_plus),
        phi_minus: fix_gauge(phi_minus),
        degenerate,
    }
}

/// `r± = ⟨φ±(0)|ψ₀⟩`.
pub fn overlaps(phi_plus: &Vector2<C64>, phi_minus: &Vector2<C64>, psi0: &NambuAmplitude) -> (C64, C64) {
    let psi = psi0.to_vector();
    (phi_plus.dotc(&psi), phi_minus.dotc(&psi))
}

/// Periodic components of the Floquet mode `φ⁺` with `F φ⁺ = e^{-iεt} φ⁺`,
/// sampled at `t_i = iτ/n_s`. `quasi_energy` is the signed `ε`.
pub fn periodic_components(
    p: &DriveParams,
    k: f64,
    quasi_energy: f64,
    phi_plus: &Vector2<C64>,
    n_s: usize,
    dt: f64,
) -> Result<(Vec<C64>, Vec<C64>)> {
    if n_s == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("step dt = {dt} must be > 0")));
    }
    let mut u = Vec::with_capacity(n_s);
    let mut v = Vec::with_capacity(n_s);
    let mut state = [phi_plus[0], phi_plus[1]];
    let norm0 = phi_plus.norm_squared();
    let sample_dt = p.tau() / n_s as f64;
    let mut t = 0.0;
    for i in 0..n_s {
        if i > 0 {
            let t_next = i as f64 * sample_dt;
            [state] = rk4_k_columns(p, k, [state], t, t_next, dt);
            t = t_next;
            let drift = (state[0].norm_sqr() + state[1].norm_sqr() - norm0).abs();
            if drift > NORM_DRIFT_LIMIT {
                return Err(Error::NormDrift {
                    drift,
                    limit: NORM_DRIFT_LIMIT,
                });
            }
        }
        let strip = C64::from_polar(1.0, quasi_energy * t);
        u.push(state[0] * strip);
        v.push(state[1] * strip);
    }
    Ok((u, v))
}

/// `λ = log(|r⁻|²/|r⁺|²)`, with `±∞` when one occupation vanishes.
pub fn gge_lambda(r_plus: C64, r_minus: C64) -> f64 {
    let (np, nm) = (r_plus.norm_sqr(), r_minus.norm_sqr());
    match (np < OCCUPATION_FLOOR, nm < OCCUPATION_FLOOR) {
        (true, true) => f64::NAN,
        (false, true) => f64::NEG_INFINITY,
        (true, false) => f64::INFINITY,
        (false, false) => (nm / np).ln(),
    }
}

/// Floquet data of one momentum pair for a given initial state.
///
/// The labels are oriented so that `φ⁺` is the mode carrying the larger
/// occupation `|r⁺|² ≥ 1/2`. `F φ⁺ = e^{-iσμτ} φ⁺` with `σ = branch`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMode {
    pub k: f64,
    /// Folded quasi-energy in `[0, ω₀/2]`.
    pub mu: f64,
    /// `±1`: sign of the quasi-energy carried by `φ⁺`.
    pub branch: f64,
    pub tau: f64,
    pub phi_plus_0: Vector2<C64>,
    pub phi_minus_0: Vector2<C64>,
    pub r_plus: C64,
    pub r_minus: C64,
    /// Periodic components on `t_i = iτ/N_s`; `u_p[0] = φ⁺(0)[0]`.
    pub u_p: Vec<C64>,
    pub v_p: Vec<C64>,
    pub degenerate: bool,
}

impl FloquetMode {
    /// Signed quasi-energy `σμ` of `φ⁺`.
    pub fn quasi_energy(&self) -> f64 {
        self.branch * self.mu
    }

    pub fn occupation_plus(&self) -> f64 {
        self.r_plus.norm_sqr()
    }

    pub fn occupation_minus(&self) -> f64 {
        self.r_minus.norm_sqr()
    }

    /// `A_k = 1 - 2|r⁻|²`.
    pub fn bloch_amplitude(&self) -> f64 {
        1.0 - 2.0 * self.occupation_minus()
    }

    pub fn lambda(&self) -> f64 {
        gge_lambda(self.r_plus, self.r_minus)
    }

    pub fn samples(&self) -> usize {
        self.u_p.len()
    }

    /// `(u_P(t), v_P(t))` at an intra-period offset, exact on the sample grid
    /// and trigonometrically interpolated elsewhere.
    pub fn periodic_at(&self, t_bar: f64) -> Result<NambuAmplitude> {
        let n = self.samples();
        let x = (t_bar / self.tau).rem_euclid(1.0) * n as f64;
        let nearest = x.round();
        if (x - nearest).abs() < 1e-9 {
            let i = (nearest as usize) % n;
            return Ok(NambuAmplitude::new(self.u_p[i], self.v_p[i]));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "periodic components were sampled only at t = 0; cannot evaluate t = {t_bar}"
            )));
        }
        Ok(NambuAmplitude::new(
            trig_interpolate(&self.u_p, x),
            trig_interpolate(&self.v_p, x),
        ))
    }
}

/// Trigonometric interpolant of periodic samples `f_j = f(j)`, `j = 0..n`,
/// evaluated at fractional index `x`.
pub fn trig_interpolate(samples: &[C64], x: f64) -> C64 {
    let n = samples.len();
    let nf = n as f64;
    let mut acc = C64::default();
    for m in 0..n {
        let c: C64 = samples
            .iter()
            .enumerate()
            .map(|(j, &f)| f * C64::from_polar(1.0, -2.0 * PI * (m * j) as f64 / nf))
            .sum::<C64>()
            / nf;
        let freq = 2.0 * PI * x / nf;
        if n % 2 == 0 && m == n / 2 {
            acc += c * (m as f64 * freq).cos();
        } else {
            let signed = if m > n / 2 { m as f64 - nf } else { m as f64 };
            acc += c * C64::from_polar(1.0, signed * freq);
        }
    }
    acc
}

/// Numerical settings for the per-mode Floquet analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetSettings {
    /// RK4 steps per period; `None` uses [`default_steps_per_period`].
    pub steps_per_period: Option<usize>,
    /// Samples of `u_P`, `v_P` per period; 1 keeps only `t = 0`.
    pub samples_per_period: usize,
}

impl Default for FloquetSettings {
    fn default() -> Self {
        FloquetSettings {
            steps_per_period: None,
            samples_per_period: DEFAULT_SAMPLES_PER_PERIOD,
        }
    }
}

impl FloquetSettings {
    pub fn stroboscopic_only() -> Self {
        FloquetSettings {
            samples_per_period: 1,
            ..Default::default()
        }
    }

    pub fn dt(&self, p: &DriveParams) -> f64 {
        let steps = self.steps_per_period.unwrap_or_else(|| default_steps_per_period(p));
        p.tau() / steps as f64
    }
}

/// Full Floquet analysis of one momentum pair starting from `psi0`.
pub fn analyze_mode(
    p: &DriveParams,
    k: f64,
    psi0: &NambuAmplitude,
    settings: &FloquetSettings,
) -> Result<FloquetMode> {
    let dt = settings.dt(p);
    let f = period_propagator(p, k, dt)?;
    let dec = floquet_decompose(&f, p.omega0());
    let (mut phi_plus, mut phi_minus) = (dec.phi_plus, dec.phi_minus);
    let (mut r_plus, mut r_minus) = overlaps(&phi_plus, &phi_minus, psi0);
    let mut branch = 1.0;
    if r_minus.norm_sqr() > r_plus.norm_sqr() {
        std::mem::swap(&mut phi_plus, &mut phi_minus);
        std::mem::swap(&mut r_plus, &mut r_minus);
        branch = -1.0;
    }
    let (u_p, v_p) = if settings.samples_per_period > 1 {
        periodic_components(p, k, branch * dec.mu, &phi_plus, settings.samples_per_period, dt)?
    } else {
        (vec![phi_plus[0]], vec![phi_plus[1]])
    };
    Ok(FloquetMode {
        k,
        mu: dec.mu,
        branch,
        tau: p.tau(),
        phi_plus_0: phi_plus,
        phi_minus_0: phi_minus,
        r_plus,
        r_minus,
        u_p,
        v_p,
        degenerate: dec.degenerate,
    })
}

/// Floquet analysis over a momentum grid, starting from the ground state at
/// `initial_field`.
pub fn analyze_grid(
    p: &DriveParams,
    grid: &KGrid,
    initial_field: f64,
    settings: &FloquetSettings,
) -> Result<Vec<FloquetMode>> {
    grid.momenta()
        .par_iter()
        .map(|&k| {
            let psi0 = ground_state_amplitudes(initial_field, k)?;
            analyze_mode(p, k, &psi0, settings)
        })
        .collect()
}

/// Floquet-GGE data: `λ_k` and conserved occupations `|r⁺_k|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GGEData {
    pub k: Vec<f64>,
    pub lambda: Vec<f64>,
    pub n_expectation: Vec<f64>,
}

impl GGEData {
    pub fn from_modes(modes: &[FloquetMode]) -> Self {
        GGEData {
            k: modes.iter().map(|m| m.k).collect(),
            lambda: modes.iter().map(|m| m.lambda()).collect(),
            n_expectation: modes.iter().map(|m| m.occupation_plus()).collect(),
        }
    }
}
