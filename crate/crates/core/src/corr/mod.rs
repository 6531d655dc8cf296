//! Majorana correlation matrices of a subchain.
//!
//! With `a_j = c_j + c_j†` and `b_j = i(c_j† - c_j)`, the Majoranas are
//! ordered `(a_1, b_1, a_2, b_2, ...)` and `⟨č_m č_n⟩ = δ_mn + iΓ_mn`.
//!
//! For a translationally invariant state the 2×2 block between sites `j` and
//! `j'` depends only on `d = j - j'`:
//!
//! ```text
//! Γ_aa(d) =  2 S_R(d)            Γ_ab(d) = -C_Q(d) + 2 S_I(d)
//! Γ_bb(d) = -2 S_R(d)            Γ_ba(d) =  C_Q(d) + 2 S_I(d)
//! ```
//!
//! where `S_X(d) = (1/π)∫₀^π X_k sin(dk) dk`, `C_X(d) = (1/π)∫₀^π X_k cos(dk) dk`
//! and `R_k = Re(u v*)`, `I_k = Im(u v*)`, `Q_k = |u|² - |v|²`.

pub mod quadrature;
pub mod spline;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bdg::{evolve_k_mode, BogoliubovFrame, NambuAmplitude};
use crate::error::{Error, Result};
use crate::floquet::FloquetMode;
use crate::model::{ground_state_amplitudes, DriveParams, KGrid};

pub use quadrature::{Integral, QuadratureSettings};
pub use spline::CubicSpline;

/// Largest `|Γ + Γᵀ|` accepted before exact antisymmetrization.
pub const ANTISYMMETRY_TOLERANCE: f64 = 1e-8;
/// Largest deviation of `Wᵀ W` from the identity on the subchain columns.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-6;

/// What time a correlation matrix describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeLabel {
    At(f64),
    /// The τ-periodic asymptotic state at intra-period offset `t_bar`.
    Asymptotic { t_bar: f64 },
}

/// Real antisymmetric `2l × 2l` Majorana correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaCorrelation {
    gamma: DMatrix<f64>,
    pub time_label: TimeLabel,
}

impl MajoranaCorrelation {
    /// Antisymmetrize `m` exactly; rejects inputs far from antisymmetric.
    pub fn from_matrix(m: &DMatrix<f64>, time_label: TimeLabel) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() || n % 2 != 0 {
            return Err(Error::MalformedCorrelation(format!(
                "expected a square matrix of even size, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut gamma = DMatrix::<f64>::zeros(n, n);
        let mut worst: f64 = 0.0;
        for c in 0..n {
            for r in (c + 1)..n {
                worst = worst.max((m[(r, c)] + m[(c, r)]).abs());
                let lower = 0.5 * (m[(r, c)] - m[(c, r)]);
                gamma[(r, c)] = lower;
                gamma[(c, r)] = -lower;
            }
            worst = worst.max(m[(c, c)].abs());
        }
        if worst > ANTISYMMETRY_TOLERANCE {
            return Err(Error::MalformedCorrelation(format!(
                "antisymmetry violated by {worst:e}"
            )));
        }
        Ok(MajoranaCorrelation { gamma, time_label })
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    /// Subchain length `l`.
    pub fn sites(&self) -> usize {
        self.gamma.nrows() / 2
    }
}

/// `(R_k, I_k, Q_k)` for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeTriple {
    pub r: f64,
    pub i: f64,
    pub q: f64,
}

impl ModeTriple {
    /// `4R² + 4I² + Q²`.
    pub fn bloch_norm(&self) -> f64 {
        4.0 * self.r * self.r + 4.0 * self.i * self.i + self.q * self.q
    }
}

/// Mode correlators sampled on a momentum grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCorrelators {
    pub k: Vec<f64>,
    pub triples: Vec<ModeTriple>,
}

impl ModeCorrelators {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Length of the chain whose ABC grid the samples live on.
    pub fn chain_length(&self) -> usize {
        2 * self.k.len()
    }
}

/// `R = Re(u v*)`, `I = Im(u v*)`, `Q = |u|² - |v|²`.
pub fn correlators_k(state: &NambuAmplitude) -> ModeTriple {
    let z = state.u * state.v.conj();
    ModeTriple {
        r: z.re,
        i: z.im,
        q: state.u.norm_sqr() - state.v.norm_sqr(),
    }
}

/// Finite-time correlators on a grid: every mode starts in the ground state
/// of `ℍ_k(0)` and is evolved to `t`.
pub fn finite_time_correlators(p: &DriveParams, grid: &KGrid, t: f64, dt: f64) -> Result<ModeCorrelators> {
    let triples = grid
        .momenta()
        .par_iter()
        .map(|&k| {
            let gs = ground_state_amplitudes(p.field(0.0), k)?;
            let psi = evolve_k_mode(p, k, gs, 0.0, t, dt)?;
            Ok(correlators_k(&psi))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeCorrelators {
        k: grid.momenta().to_vec(),
        triples,
    })
}

/// Asymptotic triple `((1-2|r⁻|²) Re(u_P v_P*), (1-2|r⁻|²) Im(u_P v_P*),
/// (2|r⁺|²-1)(|u_P|² - |v_P|²))` at intra-period offset `t_bar`.
pub fn asymptotic_correlators_k(mode: &FloquetMode, t_bar: f64) -> Result<ModeTriple> {
    let phi = mode.periodic_at(t_bar)?;
    let z = phi.u * phi.v.conj();
    let a = 1.0 - 2.0 * mode.occupation_minus();
    let b = 2.0 * mode.occupation_plus() - 1.0;
    Ok(ModeTriple {
        r: a * z.re,
        i: a * z.im,
        q: b * (phi.u.norm_sqr() - phi.v.norm_sqr()),
    })
}

pub fn asymptotic_correlators(modes: &[FloquetMode], t_bar: f64) -> Result<ModeCorrelators> {
    let triples = modes
        .iter()
        .map(|m| asymptotic_correlators_k(m, t_bar))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeCorrelators {
        k: modes.iter().map(|m| m.k).collect(),
        triples,
    })
}

/// Generic Majorana correlation of sites `0..l` of an arbitrary frame.
pub fn correlation_generic(frame: &BogoliubovFrame, l: usize) -> Result<MajoranaCorrelation> {
    correlation_generic_at(frame, l, 0)
}

/// Generic Majorana correlation of sites `offset..offset + l`, from
/// `Γ = Wᵀ Γ^γ W` restricted to the subchain columns of `W`.
pub fn correlation_generic_at(frame: &BogoliubovFrame, l: usize, offset: usize) -> Result<MajoranaCorrelation> {
    let n = frame.sites();
    if l == 0 || offset + l > n {
        return Err(Error::SubchainTooLong { l: offset + l, max: n });
    }
    // rows 2μ and 2μ+1 of W restricted to the subchain columns
    let mut x = DMatrix::<f64>::zeros(n, 2 * l);
    let mut y = DMatrix::<f64>::zeros(n, 2 * l);
    for mu in 0..n {
        for s in 0..l {
            let j = offset + s;
            let (u, v) = (frame.u[(j, mu)], frame.v[(j, mu)]);
            x[(mu, 2 * s)] = u.re + v.re;
            x[(mu, 2 * s + 1)] = u.im - v.im;
            y[(mu, 2 * s)] = -(u.im + v.im);
            y[(mu, 2 * s + 1)] = u.re - v.re;
        }
    }
    let gram = x.transpose() * &x + y.transpose() * &y;
    let defect = (gram - DMatrix::<f64>::identity(2 * l, 2 * l)).amax();
    if defect > ORTHOGONALITY_TOLERANCE {
        return Err(Error::UnitarityDrift {
            drift: defect,
            limit: ORTHOGONALITY_TOLERANCE,
        });
    }
    let xt_y = x.transpose() * &y;
    let gamma = &xt_y - xt_y.transpose();
    MajoranaCorrelation::from_matrix(&gamma, TimeLabel::At(frame.time))
}

/// How momentum integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KIntegration {
    /// Cubic spline of the grid samples, integrated adaptively over `[0, π]`.
    #[default]
    Spline,
    /// The exact finite-chain sum over the ABC grid.
    DiscreteSum,
}

/// Trigonometric weight of a momentum integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Cos(usize),
    Sin(usize),
}

impl Kernel {
    fn eval(&self, k: f64) -> f64 {
        match *self {
            Kernel::Cos(n) => (n as f64 * k).cos(),
            Kernel::Sin(n) => (n as f64 * k).sin(),
        }
    }
}

/// Spline of grid samples over `[0, π]` with the knots as quadrature breakpoints.
#[derive(Debug, Clone)]
pub struct KSpline {
    spline: CubicSpline,
    breakpoints: Vec<f64>,
}

impl KSpline {
    pub fn new(k: &[f64], f: &[f64]) -> Result<Self> {
        let spline = CubicSpline::new(k, f)?;
        let mut breakpoints = Vec::with_capacity(k.len() + 2);
        if k[0] > 0.0 {
            breakpoints.push(0.0);
        }
        breakpoints.extend_from_slice(k);
        if *k.last().unwrap() < PI {
            breakpoints.push(PI);
        }
        Ok(KSpline { spline, breakpoints })
    }

    pub fn eval(&self, k: f64) -> f64 {
        self.spline.eval(k)
    }

    /// `∫₀^π f(k) kernel(k) dk`.
    pub fn integrate(&self, kernel: Kernel, settings: &QuadratureSettings) -> Integral {
        quadrature::integrate(|k| self.spline.eval(k) * kernel.eval(k), &self.breakpoints, settings)
    }
}

/// `∫₀^π f(k) kernel(k) dk` from samples on an ABC grid.
pub fn k_integral(
    k: &[f64],
    f: &[f64],
    kernel: Kernel,
    method: KIntegration,
    settings: &QuadratureSettings,
) -> Result<Integral> {
    match method {
        KIntegration::Spline => Ok(KSpline::new(k, f)?.integrate(kernel, settings)),
        KIntegration::DiscreteSum => Ok(discrete_sum(k, f, kernel)),
    }
}

fn discrete_sum(k: &[f64], f: &[f64], kernel: Kernel) -> Integral {
    let w = PI / k.len() as f64;
    Integral {
        value: w * k.iter().zip(f).map(|(&k, &f)| f * kernel.eval(k)).sum::<f64>(),
        error: 0.0,
        converged: true,
    }
}

/// Quadrature diagnostics accumulated while assembling a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub max_error: f64,
    pub all_converged: bool,
}

impl QuadratureReport {
    fn exact() -> Self {
        QuadratureReport {
            max_error: 0.0,
            all_converged: true,
        }
    }

    fn absorb(&mut self, i: &Integral) {
        self.max_error = self.max_error.max(i.error);
        self.all_converged &= i.converged;
    }
}

/// Block-Toeplitz correlation matrix of `l` contiguous sites built from
/// mode correlators on an ABC grid.
pub fn toeplitz_blocks(
    samples: &ModeCorrelators,
    l: usize,
    method: KIntegration,
    settings: &QuadratureSettings,
    time_label: TimeLabel,
) -> Result<(MajoranaCorrelation, QuadratureReport)> {
    let chain = samples.chain_length();
    let max = match method {
        KIntegration::Spline => chain / 2,
        KIntegration::DiscreteSum => chain,
    };
    if l == 0 || l > max {
        return Err(Error::SubchainTooLong { l, max });
    }
    let col = |f: fn(&ModeTriple) -> f64| samples.triples.iter().map(f).collect::<Vec<f64>>();
    let (r, i, q) = (col(|t| t.r), col(|t| t.i), col(|t| t.q));
    let transform = |f: &[f64], kernel: fn(usize) -> Kernel| -> Result<Vec<Integral>> {
        match method {
            KIntegration::Spline => {
                let s = KSpline::new(&samples.k, f)?;
                Ok((0..l).into_par_iter().map(|d| s.integrate(kernel(d), settings)).collect())
            }
            KIntegration::DiscreteSum => Ok((0..l).map(|d| discrete_sum(&samples.k, f, kernel(d))).collect()),
        }
    };
    let s_r = transform(&r, Kernel::Sin)?;
    let s_i = transform(&i, Kernel::Sin)?;
    let c_q = transform(&q, Kernel::Cos)?;
    let mut report = QuadratureReport::exact();
    for x in s_r.iter().chain(&s_i).chain(&c_q) {
        report.absorb(x);
    }
    let sr: Vec<f64> = s_r.iter().map(|x| x.value / PI).collect();
    let si: Vec<f64> = s_i.iter().map(|x| x.value / PI).collect();
    let cq: Vec<f64> = c_q.iter().map(|x| x.value / PI).collect();
    let mut gamma = DMatrix::<f64>::zeros(2 * l, 2 * l);
    for j in 0..l {
        for jp in 0..l {
            let (d, sign) = if j >= jp { (j - jp, 1.0) } else { (jp - j, -1.0) };
            let (srd, sid, cqd) = (sign * sr[d], sign * si[d], cq[d]);
            gamma[(2 * j, 2 * jp)] = 2.0 * srd;
            gamma[(2 * j + 1, 2 * jp + 1)] = -2.0 * srd;
            gamma[(2 * j, 2 * jp + 1)] = -cqd + 2.0 * sid;
            gamma[(2 * j + 1, 2 * jp)] = cqd + 2.0 * sid;
        }
    }
    Ok((MajoranaCorrelation::from_matrix(&gamma, time_label)?, report))
}

/// Asymptotic τ-periodic correlation matrix at intra-period offset `t_bar`.
pub fn asymptotic_toeplitz(
    modes: &[FloquetMode],
    l: usize,
    t_bar: f64,
    method: KIntegration,
    settings: &QuadratureSettings,
) -> Result<(MajoranaCorrelation, QuadratureReport)> {
    let samples = asymptotic_correlators(modes, t_bar)?;
    toeplitz_blocks(&samples, l, method, settings, TimeLabel::Asymptotic { t_bar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdg::{default_dt, ground_state_bogoliubov};
    use crate::floquet::{analyze_grid, FloquetSettings};
    use crate::model::{Boundary, ChainSpec};
    use num_complex::Complex64 as C64;
    use proptest::prelude::*;

    fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    fn vacuum_blocks(l: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(2 * l, 2 * l);
        for j in 0..l {
            m[(2 * j, 2 * j + 1)] = 1.0;
            m[(2 * j + 1, 2 * j)] = -1.0;
        }
        m
    }

    #[test]
    fn correlator_examples() {
        let s = 0.5f64.sqrt();
        let t = correlators_k(&NambuAmplitude::new(C64::default(), C64::new(1.0, 0.0)));
        assert_eq!((t.r, t.i, t.q), (0.0, 0.0, -1.0));
        let t = correlators_k(&NambuAmplitude::new(C64::new(s, 0.0), C64::new(s, 0.0)));
        assert!((t.r - 0.5).abs() < 1e-15 && t.i == 0.0 && t.q.abs() < 1e-15);
        let t = correlators_k(&NambuAmplitude::new(C64::new(0.0, s), C64::new(s, 0.0)));
        assert!(t.r.abs() < 1e-15 && (t.i - 0.5).abs() < 1e-15 && t.q.abs() < 1e-15);
    }

    #[test]
    fn antisymmetrization_is_exact() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, -0.3 + 1e-12, 0.0]);
        let c = MajoranaCorrelation::from_matrix(&m, TimeLabel::At(0.0)).unwrap();
        assert_eq!(c.gamma().transpose(), -c.gamma());
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.3, 0.0]);
        assert!(MajoranaCorrelation::from_matrix(&bad, TimeLabel::At(0.0)).is_err());
    }

    #[test]
    fn polarized_vacuum_generic() {
        let chain = ChainSpec::new(8, Boundary::Obc).unwrap();
        let p = DriveParams::new(1e6, 0.0, 1.0).unwrap();
        let frame = ground_state_bogoliubov(&chain, &p).unwrap();
        for l in [1, 3, 8] {
            let c = correlation_generic(&frame, l).unwrap();
            assert!(max_diff(c.gamma(), &vacuum_blocks(l)) < 1e-6);
        }
        assert!(correlation_generic(&frame, 9).is_err());
        assert!(correlation_generic_at(&frame, 4, 5).is_err());
    }

    #[test]
    fn vacuum_toeplitz() {
        let grid = KGrid::abc(64).unwrap();
        let samples = ModeCorrelators {
            k: grid.momenta().to_vec(),
            triples: vec![ModeTriple { r: 0.0, i: 0.0, q: -1.0 }; 32],
        };
        let (c, rep) =
            toeplitz_blocks(&samples, 6, KIntegration::Spline, &QuadratureSettings::default(), TimeLabel::At(0.0))
                .unwrap();
        assert!(rep.all_converged);
        assert!(max_diff(c.gamma(), &vacuum_blocks(6)) < 1e-10);
        assert!(toeplitz_blocks(&samples, 33, KIntegration::Spline, &QuadratureSettings::default(), TimeLabel::At(0.0)).is_err());
    }

    #[test]
    fn ground_state_pipelines_agree_exactly_on_finite_chain() {
        let p = DriveParams::new(2.3, 1.0, 4.0).unwrap();
        for l_chain in [8, 16] {
            let chain = ChainSpec::new(l_chain, Boundary::SpinPbc).unwrap();
            let frame = ground_state_bogoliubov(&chain, &p).unwrap();
            let grid = KGrid::abc(l_chain).unwrap();
            let samples = finite_time_correlators(&p, &grid, 0.0, default_dt(&p)).unwrap();
            for l in [1, 3, l_chain / 2, l_chain] {
                let g = correlation_generic(&frame, l).unwrap();
                let (t, _) = toeplitz_blocks(
                    &samples,
                    l,
                    KIntegration::DiscreteSum,
                    &QuadratureSettings::default(),
                    TimeLabel::At(0.0),
                )
                .unwrap();
                let err = max_diff(g.gamma(), t.gamma());
                assert!(err < 1e-10, "L = {l_chain}, l = {l}: {err}");
            }
        }
    }

    #[test]
    fn k_integral_examples() {
        let grid = KGrid::abc(1000).unwrap();
        let k = grid.momenta();
        let s = QuadratureSettings::default();
        let ones = vec![1.0; k.len()];
        let r = k_integral(k, &ones, Kernel::Cos(0), KIntegration::Spline, &s).unwrap();
        assert!((r.value - PI).abs() < 1e-10);
        let sines: Vec<f64> = k.iter().map(|k| k.sin()).collect();
        let r = k_integral(k, &sines, Kernel::Sin(1), KIntegration::Spline, &s).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn sine_transform_matches_independent_quadrature() {
        // R_k = sin(k)/2: S_R(1) = (1/π)∫ sin²(k)/2 = 1/4, other orders vanish
        let grid = KGrid::abc(200).unwrap();
        let k = grid.momenta();
        let r: Vec<f64> = k.iter().map(|k| 0.5 * k.sin()).collect();
        let s = QuadratureSettings::default();
        for n in 0..6 {
            let got = k_integral(k, &r, Kernel::Sin(n), KIntegration::Spline, &s).unwrap().value / PI;
            // composite Simpson with 20000 panels as the oracle
            let m = 20000;
            let h = PI / m as f64;
            let f = |x: f64| 0.5 * x.sin() * (n as f64 * x).sin();
            let mut acc = f(0.0) + f(PI);
            for j in 1..m {
                acc += f(j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
            }
            let want = acc * h / 3.0 / PI;
            assert!((got - want).abs() < 1e-8, "n = {n}: {got} vs {want}");
        }
    }

    #[test]
    fn finite_time_bloch_norm_is_one() {
        let p = DriveParams::new(2.3, 1.0, 4.0).unwrap();
        let grid = KGrid::abc(40).unwrap();
        for t in [0.0, 0.7, p.tau() * 2.5] {
            let s = finite_time_correlators(&p, &grid, t, default_dt(&p)).unwrap();
            for tr in &s.triples {
                assert!((tr.bloch_norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn asymptotic_static_limit_is_ground_state() {
        let p = DriveParams::new(2.3, 0.0, 4.0).unwrap();
        let grid = KGrid::abc(40).unwrap();
        let modes = analyze_grid(&p, &grid, 2.3, &FloquetSettings::default()).unwrap();
        let gs = finite_time_correlators(&p, &grid, 0.0, default_dt(&p)).unwrap();
        for t_bar in [0.0, 0.3] {
            let asym = asymptotic_correlators(&modes, t_bar).unwrap();
            for (a, b) in asym.triples.iter().zip(&gs.triples) {
                assert!((a.r - b.r).abs() < 1e-8 && (a.i - b.i).abs() < 1e-8 && (a.q - b.q).abs() < 1e-8);
            }
        }
        let s = QuadratureSettings::default();
        let (a, _) = asymptotic_toeplitz(&modes, 8, 0.0, KIntegration::Spline, &s).unwrap();
        let (b, _) = toeplitz_blocks(&gs, 8, KIntegration::Spline, &s, TimeLabel::At(0.0)).unwrap();
        assert!(max_diff(a.gamma(), b.gamma()) < 1e-8);
    }

    #[test]
    fn asymptotic_bloch_norm_and_periodicity() {
        let p = DriveParams::new(2.3, 1.0, 4.0).unwrap();
        let grid = KGrid::abc(40).unwrap();
        let modes = analyze_grid(&p, &grid, p.field(0.0), &FloquetSettings::default()).unwrap();
        for m in &modes {
            let a2 = m.bloch_amplitude().powi(2);
            for t_bar in [0.0, 0.11, 0.5 * p.tau(), 1.3] {
                let t = asymptotic_correlators_k(m, t_bar).unwrap();
                assert!((t.bloch_norm() - a2).abs() < 1e-9);
            }
        }
        let s = QuadratureSettings::default();
        let (a, _) = asymptotic_toeplitz(&modes, 6, 0.0, KIntegration::Spline, &s).unwrap();
        let (b, _) = asymptotic_toeplitz(&modes, 6, p.tau(), KIntegration::Spline, &s).unwrap();
        assert_eq!(a.gamma(), b.gamma());
    }

    #[test]
    fn toeplitz_structure() {
        let p = DriveParams::new(1.7, 0.6, 3.0).unwrap();
        let grid = KGrid::abc(48).unwrap();
        let s = finite_time_correlators(&p, &grid, 1.9, default_dt(&p)).unwrap();
        let (c, _) =
            toeplitz_blocks(&s, 7, KIntegration::Spline, &QuadratureSettings::default(), TimeLabel::At(1.9)).unwrap();
        let g = c.gamma();
        for j in 1..7 {
            for jp in 1..7 {
                for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    assert_eq!(g[(2 * j + a, 2 * jp + b)], g[(2 * (j - 1) + a, 2 * (jp - 1) + b)]);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn pure_state_bloch_norm(re_u in -1.0f64..1.0, im_u in -1.0f64..1.0, re_v in -1.0f64..1.0, im_v in -1.0f64..1.0) {
            let n = (re_u * re_u + im_u * im_u + re_v * re_v + im_v * im_v).sqrt();
            prop_assume!(n > 1e-3);
            let s = NambuAmplitude::new(C64::new(re_u / n, im_u / n), C64::new(re_v / n, im_v / n));
            prop_assert!((correlators_k(&s).bloch_norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn evolved_frames_are_orthogonal(h0 in 0.2f64..3.0, a in 0.0f64..1.5, omega in 1.0f64..6.0, t in 0.0f64..3.0) {
            let chain = ChainSpec::new(10, Boundary::SpinPbc).unwrap();
            let p = DriveParams::new(h0, a, omega).unwrap();
            let frame = ground_state_bogoliubov(&chain, &p).unwrap();
            let frame = crate::bdg::evolve_real_space(&chain, &p, &frame, t, default_dt(&p)).unwrap();
            let c = correlation_generic(&frame, 10).unwrap();
            // Γ of the full chain is orthogonal: Γ Γᵀ = 1 for a pure state
            let g = c.gamma();
            prop_assert!((g * g.transpose() - DMatrix::<f64>::identity(20, 20)).amax() < 1e-8);
        }
    }
}
