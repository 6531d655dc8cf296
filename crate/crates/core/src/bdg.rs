//! Bogoliubov-de Gennes time evolution.
//!
//! Two integrators share the same fourth-order Runge-Kutta scheme: the 2×2
//! k-space equations `i d/dt (u, v) = ℍ_k(t) (u, v)` for a single momentum
//! pair, and the real-space equations `i d𝕌/dt = 2ℍ(t) 𝕌` for an arbitrary
//! chain. Neither renormalizes the state; drift is measured and reported.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen, Vector2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ChainHamiltonian, ChainSpec, DriveParams, GAPLESS_TOLERANCE};

/// Norm drift beyond which a k-mode evolution is rejected.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
/// Unitarity drift beyond which a real-space evolution is rejected.
pub const UNITARITY_DRIFT_LIMIT: f64 = 1e-6;

/// Minimum number of RK4 steps per drive period.
pub const BASE_STEPS_PER_PERIOD: usize = 4096;
/// Largest `E_max · dt` admitted by [`default_steps_per_period`].
pub const MAX_PHASE_PER_STEP: f64 = 4e-3;

/// State `(u_k, v_k)` of one momentum pair in the basis `{c†_k c†_-k |0⟩, |0⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NambuAmplitude {
    pub u: C64,
    pub v: C64,
}

impl NambuAmplitude {
    pub fn new(u: C64, v: C64) -> Self {
        NambuAmplitude { u, v }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.u.norm_sqr() + self.v.norm_sqr()
    }

    pub fn to_vector(&self) -> Vector2<C64> {
        Vector2::new(self.u, self.v)
    }

    pub fn from_vector(v: &Vector2<C64>) -> Self {
        NambuAmplitude { u: v[0], v: v[1] }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &NambuAmplitude) -> C64 {
        self.u.conj() * other.u + self.v.conj() * other.v
    }
}

/// The 2×2 block `ℍ_k = ((ε, -iΔ), (iΔ, -ε))` with `ε = h - cos k`, `Δ = sin k`.
pub fn k_block(h: f64, k: f64) -> Matrix2<C64> {
    let eps = C64::from(h - k.cos());
    let delta = k.sin();
    Matrix2::new(eps, C64::new(0.0, -delta), C64::new(0.0, delta), -eps)
}

/// Steps per period used when the caller does not fix one: at least
/// [`BASE_STEPS_PER_PERIOD`], doubled until `E_max · dt <= MAX_PHASE_PER_STEP`.
pub fn default_steps_per_period(p: &DriveParams) -> usize {
    let phase = p.max_mode_energy() * p.tau();
    let mut steps = BASE_STEPS_PER_PERIOD;
    while phase / steps as f64 > MAX_PHASE_PER_STEP {
        steps *= 2;
    }
    steps
}

/// Default RK4 step for a drive.
pub fn default_dt(p: &DriveParams) -> f64 {
    p.tau() / default_steps_per_period(p) as f64
}

/// Sub-intervals `[t_a, t_b]` of length `dt` covering `[t0, t1]`; the last one
/// is shortened so the schedule ends exactly on `t1`.
fn step_schedule(t0: f64, t1: f64, dt: f64) -> impl Iterator<Item = (f64, f64)> {
    let n = if t1 > t0 {
        (((t1 - t0) / dt) - 1e-9).ceil().max(1.0) as usize
    } else {
        0
    };
    (0..n).map(move |i| {
        let ta = t0 + i as f64 * dt;
        let tb = if i + 1 == n { t1 } else { t0 + (i + 1) as f64 * dt };
        (ta, tb)
    })
}

fn check_interval(t0: f64, t1: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("step dt = {dt} must be > 0")));
    }
    if !(t1 >= t0) {
        return Err(Error::InvalidParameter(format!(
            "end time {t1} precedes start time {t0}"
        )));
    }
    Ok(())
}

#[inline]
fn k_rhs(eps: f64, delta: f64, psi: [C64; 2]) -> [C64; 2] {
    // -i ℍ_k ψ
    let [u, v] = psi;
    let i_eps = C64::new(0.0, eps);
    [-i_eps * u - v * delta, u * delta + i_eps * v]
}

/// RK4 for several k-mode columns sharing the same `ℍ_k(t)`.
pub(crate) fn rk4_k_columns<const N: usize>(
    p: &DriveParams,
    k: f64,
    mut cols: [[C64; 2]; N],
    t0: f64,
    t1: f64,
    dt: f64,
) -> [[C64; 2]; N] {
    let cos_k = k.cos();
    let delta = k.sin();
    let eps = |t: f64| p.field(t) - cos_k;
    let axpy = |a: [C64; 2], s: f64, b: [C64; 2]| [a[0] + b[0] * s, a[1] + b[1] * s];
    for (ta, tb) in step_schedule(t0, t1, dt) {
        let h = tb - ta;
        let e1 = eps(ta);
        let e2 = eps(ta + 0.5 * h);
        let e4 = eps(tb);
        for psi in cols.iter_mut() {
            let k1 = k_rhs(e1, delta, *psi);
            let k2 = k_rhs(e2, delta, axpy(*psi, 0.5 * h, k1));
            let k3 = k_rhs(e2, delta, axpy(*psi, 0.5 * h, k2));
            let k4 = k_rhs(e4, delta, axpy(*psi, h, k3));
            let w = h / 6.0;
            psi[0] += (k1[0] + (k2[0] + k3[0]) * 2.0 + k4[0]) * w;
            psi[1] += (k1[1] + (k2[1] + k3[1]) * 2.0 + k4[1]) * w;
        }
    }
    cols
}

/// Evolve one momentum pair from `t0` to `t1` with RK4 step `dt`.
pub fn evolve_k_mode(
    p: &DriveParams,
    k: f64,
    state: NambuAmplitude,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<NambuAmplitude> {
    check_interval(t0, t1, dt)?;
    let n0 = state.norm_sqr();
    let [out] = rk4_k_columns(p, k, [[state.u, state.v]], t0, t1, dt);
    let out = NambuAmplitude::new(out[0], out[1]);
    let drift = (out.norm_sqr() - n0).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift {
            drift,
            limit: NORM_DRIFT_LIMIT,
        });
    }
    Ok(out)
}

/// Bogoliubov coefficients `U(t)`, `V(t)` of the frame
/// `𝕌 = ((U, V*), (V, U*))`; columns index the quasiparticles.
#[derive(Debug, Clone)]
pub struct BogoliubovFrame {
    pub u: DMatrix<C64>,
    pub v: DMatrix<C64>,
    pub time: f64,
}

impl BogoliubovFrame {
    pub fn sites(&self) -> usize {
        self.u.nrows()
    }

    /// `(U; V)` stacked into a `2L × L` matrix.
    pub fn nambu(&self) -> DMatrix<C64> {
        let n = self.sites();
        let mut m = DMatrix::zeros(2 * n, n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.u);
        m.view_mut((n, 0), (n, n)).copy_from(&self.v);
        m
    }

    pub fn from_nambu(m: &DMatrix<C64>, time: f64) -> Self {
        let n = m.ncols();
        BogoliubovFrame {
            u: m.view((0, 0), (n, n)).clone_owned(),
            v: m.view((n, 0), (n, n)).clone_owned(),
            time,
        }
    }

    /// Largest entry of `𝕌†𝕌 - 1`, i.e. of `U†U + V†V - 1` and `UᵀV + VᵀU`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.sites();
        let g = self.u.adjoint() * &self.u + self.v.adjoint() * &self.v
            - DMatrix::<C64>::identity(n, n);
        let a = self.u.transpose() * &self.v + self.v.transpose() * &self.u;
        g.iter().chain(a.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Full `2L × 2L` matrix 𝕌.
    pub fn full_matrix(&self) -> DMatrix<C64> {
        let n = self.sites();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.u);
        m.view_mut((n, 0), (n, n)).copy_from(&self.v);
        m.view_mut((0, n), (n, n)).copy_from(&self.v.map(|z| z.conj()));
        m.view_mut((n, n), (n, n)).copy_from(&self.u.map(|z| z.conj()));
        m
    }
}

/// RK4 for every column of a `2L × m` Nambu block under `-2iℍ(t)`.
fn rk4_real_space(ham: &ChainHamiltonian, block: &mut DMatrix<C64>, t0: f64, t1: f64, dt: f64) {
    let rows = block.nrows();
    let schedule: Vec<(f64, f64)> = step_schedule(t0, t1, dt).collect();
    block
        .as_mut_slice()
        .par_chunks_mut(rows)
        .for_each(|col| {
            let mut k1 = vec![C64::default(); rows];
            let mut k2 = vec![C64::default(); rows];
            let mut k3 = vec![C64::default(); rows];
            let mut k4 = vec![C64::default(); rows];
            let mut tmp = vec![C64::default(); rows];
            for &(ta, tb) in &schedule {
                let h = tb - ta;
                let tm = ta + 0.5 * h;
                ham.apply_generator(ta, col, &mut k1);
                for i in 0..rows {
                    tmp[i] = col[i] + k1[i] * (0.5 * h);
                }
                ham.apply_generator(tm, &tmp, &mut k2);
                for i in 0..rows {
                    tmp[i] = col[i] + k2[i] * (0.5 * h);
                }
                ham.apply_generator(tm, &tmp, &mut k3);
                for i in 0..rows {
                    tmp[i] = col[i] + k3[i] * h;
                }
                ham.apply_generator(tb, &tmp, &mut k4);
                let w = h / 6.0;
                for i in 0..rows {
                    col[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
                }
            }
        });
}

pub(crate) fn check_unitarity(frame: &BogoliubovFrame) -> Result<()> {
    let drift = frame.unitarity_defect();
    if drift > UNITARITY_DRIFT_LIMIT {
        return Err(Error::UnitarityDrift {
            drift,
            limit: UNITARITY_DRIFT_LIMIT,
        });
    }
    Ok(())
}

/// Evolve a Bogoliubov frame to `t1` under `i d𝕌/dt = 2ℍ(t) 𝕌`.
pub fn evolve_real_space(
    chain: &ChainSpec,
    p: &DriveParams,
    frame: &BogoliubovFrame,
    t1: f64,
    dt: f64,
) -> Result<BogoliubovFrame> {
    check_interval(frame.time, t1, dt)?;
    if frame.sites() != chain.sites {
        return Err(Error::InvalidParameter(format!(
            "frame has {} sites, chain has {}",
            frame.sites(),
            chain.sites
        )));
    }
    let ham = ChainHamiltonian::new(*chain, *p);
    let mut block = frame.nambu();
    rk4_real_space(&ham, &mut block, frame.time, t1, dt);
    let out = BogoliubovFrame::from_nambu(&block, t1);
    check_unitarity(&out)?;
    Ok(out)
}

/// Frame whose quasiparticle vacuum is the ground state of `ℍ(0)`.
pub fn ground_state_bogoliubov(chain: &ChainSpec, p: &DriveParams) -> Result<BogoliubovFrame> {
    let n = chain.sites;
    let ham = ChainHamiltonian::new(*chain, *p);
    let eig = SymmetricEigen::new(ham.matrix(0.0));
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let smallest_positive = eig.eigenvalues[order[n - 1]];
    if smallest_positive < GAPLESS_TOLERANCE {
        log::warn!(
            "near-zero eigenvalue {smallest_positive:e} of ℍ(0): ground state is degenerate"
        );
    }
    let mut u = DMatrix::<C64>::zeros(n, n);
    let mut v = DMatrix::<C64>::zeros(n, n);
    for (col, &idx) in order.iter().take(n).enumerate() {
        let vec = eig.eigenvectors.column(idx);
        for j in 0..n {
            u[(j, col)] = C64::from(vec[j]);
            v[(j, col)] = C64::from(vec[n + j]);
        }
    }
    Ok(BogoliubovFrame { u, v, time: 0.0 })
}

/// One-period map of the real-space equations, `𝕌(t + τ) = F 𝕌(t)` for
/// frames on the period grid. Stored as real and imaginary parts.
#[derive(Debug, Clone)]
pub struct PeriodMap {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
    tau: f64,
}

impl PeriodMap {
    /// Build `F = ((a, b*), (b, a*))` by evolving the first `L` identity
    /// columns over one period.
    pub fn new(chain: &ChainSpec, p: &DriveParams, dt: f64) -> Result<Self> {
        check_interval(0.0, p.tau(), dt)?;
        let n = chain.sites;
        let ham = ChainHamiltonian::new(*chain, *p);
        let mut block = DMatrix::<C64>::zeros(2 * n, n);
        for j in 0..n {
            block[(j, j)] = C64::new(1.0, 0.0);
        }
        rk4_real_space(&ham, &mut block, 0.0, p.tau(), dt);
        let probe = BogoliubovFrame::from_nambu(&block, p.tau());
        check_unitarity(&probe)?;
        let mut re = DMatrix::<f64>::zeros(2 * n, 2 * n);
        let mut im = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for c in 0..n {
            for r in 0..2 * n {
                let z = block[(r, c)];
                re[(r, c)] = z.re;
                im[(r, c)] = z.im;
                // partner column: swap halves and conjugate
                let r2 = if r < n { r + n } else { r - n };
                re[(r2, c + n)] = z.re;
                im[(r2, c + n)] = -z.im;
            }
        }
        Ok(PeriodMap { re, im, tau: p.tau() })
    }

    /// Advance a frame by one period.
    pub fn apply(&self, frame: &BogoliubovFrame) -> BogoliubovFrame {
        let x = frame.nambu();
        let xr = x.map(|z| z.re);
        let xi = x.map(|z| z.im);
        let out_re = &self.re * &xr - &self.im * &xi;
        let out_im = &self.re * &xi + &self.im * &xr;
        let m = out_re.zip_map(&out_im, C64::new);
        BogoliubovFrame::from_nambu(&m, frame.time + self.tau)
    }
}

/// Frames at `t = nτ`, `n = 0..=n_max`, starting from the ground state of ℍ(0).
pub fn stroboscopic_frames(
    chain: &ChainSpec,
    p: &DriveParams,
    n_max: usize,
    dt: f64,
) -> Result<Vec<BogoliubovFrame>> {
    let mut frame = ground_state_bogoliubov(chain, p)?;
    let mut frames = Vec::with_capacity(n_max + 1);
    frames.push(frame.clone());
    if n_max == 0 {
        return Ok(frames);
    }
    let map = PeriodMap::new(chain, p, dt)?;
    for _ in 0..n_max {
        frame = map.apply(&frame);
        frames.push(frame.clone());
    }
    check_unitarity(&frame)?;
    Ok(frames)
}
