//! The driven Ising chain: drive protocol, momentum grids, the static
//! dispersion, BCS ground-state amplitudes and the real-space quadratic
//! fermion Hamiltonian.
//!
//! Units: J = ħ = 1. The spin Hamiltonian is
//! `H(t) = -1/2 Σ_j (σᶻ_j σᶻ_{j+1} + h(t) σˣ_j)`, which after Jordan-Wigner
//! becomes `H = Ψ† ℍ Ψ` with the Nambu spinor `Ψ = (c_1..c_L, c_1†..c_L†)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bdg::NambuAmplitude;
use crate::error::{Error, Result};

/// Below this single-particle gap a mode is treated as gapless.
pub const GAPLESS_TOLERANCE: f64 = 1e-12;

/// Sinusoidal drive `h(t) = h0 + A sin(omega0 t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DriveSpec", into = "DriveSpec")]
pub struct DriveParams {
    h0: f64,
    amplitude: f64,
    omega0: f64,
    tau: f64,
}

/// Serialized form of [`DriveParams`]; the period is derived on load.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct DriveSpec {
    h0: f64,
    #[serde(rename = "A")]
    amplitude: f64,
    omega0: f64,
}

impl TryFrom<DriveSpec> for DriveParams {
    type Error = Error;
    fn try_from(s: DriveSpec) -> Result<Self> {
        DriveParams::new(s.h0, s.amplitude, s.omega0)
    }
}

impl From<DriveParams> for DriveSpec {
    fn from(p: DriveParams) -> Self {
        DriveSpec {
            h0: p.h0,
            amplitude: p.amplitude,
            omega0: p.omega0,
        }
    }
}

impl DriveParams {
    pub fn new(h0: f64, amplitude: f64, omega0: f64) -> Result<Self> {
        if !h0.is_finite() {
            return Err(Error::InvalidParameter(format!("h0 = {h0} is not finite")));
        }
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "drive amplitude A = {amplitude} must be finite and >= 0"
            )));
        }
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega0 = {omega0} must be finite and > 0"
            )));
        }
        Ok(DriveParams {
            h0,
            amplitude,
            omega0,
            tau: 2.0 * PI / omega0,
        })
    }

    /// A constant field `h`, viewed as a degenerate drive of frequency `omega0`.
    pub fn constant(h: f64, omega0: f64) -> Result<Self> {
        Self::new(h, 0.0, omega0)
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `h(t)`.
    pub fn field(&self, t: f64) -> f64 {
        drive_field(self, t)
    }

    /// Upper bound on `E_k(h(t))` over all k and t.
    pub fn max_mode_energy(&self) -> f64 {
        self.h0.abs() + self.amplitude + 1.0
    }
}

pub fn drive_field(p: &DriveParams, t: f64) -> f64 {
    p.h0 + p.amplitude * (p.omega0 * t).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    /// Periodic spins; anti-periodic fermions in the even-parity sector.
    #[serde(rename = "pbc")]
    SpinPbc,
    #[serde(rename = "obc")]
    Obc,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::SpinPbc => "pbc",
            Boundary::Obc => "obc",
        })
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pbc" => Ok(Boundary::SpinPbc),
            "obc" => Ok(Boundary::Obc),
            other => Err(Error::Config(format!("unknown boundary '{other}'"))),
        }
    }
}

/// Chain length and boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ChainSpecRaw")]
pub struct ChainSpec {
    #[serde(rename = "L")]
    pub sites: usize,
    pub boundary: Boundary,
}

#[derive(Deserialize)]
struct ChainSpecRaw {
    #[serde(rename = "L")]
    sites: usize,
    boundary: Boundary,
}

impl TryFrom<ChainSpecRaw> for ChainSpec {
    type Error = Error;
    fn try_from(r: ChainSpecRaw) -> Result<Self> {
        ChainSpec::new(r.sites, r.boundary)
    }
}

impl ChainSpec {
    pub fn new(sites: usize, boundary: Boundary) -> Result<Self> {
        if sites == 0 || sites % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "chain length L = {sites} must be a positive even integer"
            )));
        }
        Ok(ChainSpec { sites, boundary })
    }
}

/// Positive anti-periodic momenta `k = (2n+1)π/L`, `n = 0..L/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    momenta: Vec<f64>,
}

impl KGrid {
    /// ABC grid for a chain of `sites` sites (must be even).
    pub fn abc(sites: usize) -> Result<Self> {
        if sites == 0 || sites % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "chain length L = {sites} must be a positive even integer"
            )));
        }
        let l = sites as f64;
        let momenta = (0..sites / 2)
            .map(|n| (2 * n + 1) as f64 * PI / l)
            .collect();
        Ok(KGrid { momenta })
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    /// Number of sites of the chain the grid belongs to.
    pub fn chain_length(&self) -> usize {
        2 * self.momenta.len()
    }
}

pub fn build_k_grid(chain: &ChainSpec) -> Result<KGrid> {
    if chain.boundary == Boundary::Obc {
        return Err(Error::InvalidParameter(
            "open chains have no momentum decomposition".into(),
        ));
    }
    KGrid::abc(chain.sites)
}

/// `E_k(h) = sqrt((h - cos k)^2 + sin^2 k)`.
pub fn static_dispersion(h: f64, k: f64) -> f64 {
    (h - k.cos()).hypot(k.sin())
}

/// Bogoliubov angle θ_k ∈ (0, π) of the ground state at field `h`.
pub fn bogoliubov_angle(h: f64, k: f64) -> f64 {
    k.sin().atan2(h - k.cos())
}

/// Ground state `(u⁰, v⁰) = (i sin(θ/2), cos(θ/2))` of the 2×2 block at field `h`.
pub fn ground_state_amplitudes(h: f64, k: f64) -> Result<NambuAmplitude> {
    let gap = static_dispersion(h, k);
    if gap < GAPLESS_TOLERANCE {
        return Err(Error::DegenerateMode { k, gap });
    }
    let half = 0.5 * bogoliubov_angle(h, k);
    Ok(NambuAmplitude::new(
        C64::new(0.0, half.sin()),
        C64::new(half.cos(), 0.0),
    ))
}

/// Nearest-neighbour bond `i -> j`; `sign = -1` marks the anti-periodic wrap.
#[derive(Debug, Clone, Copy)]
struct Bond {
    i: usize,
    j: usize,
    sign: f64,
}

/// Real-space quadratic form `ℍ(t) = ((A, B), (-B, -A))`.
///
/// `A = h(t)/2 · 1 + A_bond` and `B` carry the bond couplings, so that the
/// Heisenberg equation `i dΨ/dt = 2ℍ Ψ` has single-particle frequencies `±E_k`.
#[derive(Debug, Clone)]
pub struct ChainHamiltonian {
    chain: ChainSpec,
    drive: DriveParams,
    /// Off-diagonal entries of the symmetric block A: (row, col, value).
    a_off: Vec<(usize, usize, f64)>,
    /// Entries of the antisymmetric block B: (row, col, value).
    b: Vec<(usize, usize, f64)>,
}

impl ChainHamiltonian {
    pub fn new(chain: ChainSpec, drive: DriveParams) -> Self {
        let n = chain.sites;
        let mut bonds: Vec<Bond> = (0..n - 1)
            .map(|i| Bond {
                i,
                j: i + 1,
                sign: 1.0,
            })
            .collect();
        if chain.boundary == Boundary::SpinPbc {
            bonds.push(Bond {
                i: n - 1,
                j: 0,
                sign: -1.0,
            });
        }
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = DMatrix::<f64>::zeros(n, n);
        for bond in &bonds {
            a[(bond.i, bond.j)] -= 0.25 * bond.sign;
            a[(bond.j, bond.i)] -= 0.25 * bond.sign;
            b[(bond.i, bond.j)] += 0.25 * bond.sign;
            b[(bond.j, bond.i)] -= 0.25 * bond.sign;
        }
        let collect = |m: &DMatrix<f64>| {
            let mut out = Vec::new();
            for c in 0..n {
                for r in 0..n {
                    if r != c && m[(r, c)] != 0.0 {
                        out.push((r, c, m[(r, c)]));
                    }
                }
            }
            out
        };
        ChainHamiltonian {
            chain,
            drive,
            a_off: collect(&a),
            b: collect(&b),
        }
    }

    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn drive(&self) -> &DriveParams {
        &self.drive
    }

    /// Dense `2L × 2L` matrix ℍ(t).
    pub fn matrix(&self, t: f64) -> DMatrix<f64> {
        let n = self.chain.sites;
        let half_h = 0.5 * self.drive.field(t);
        let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for j in 0..n {
            m[(j, j)] = half_h;
            m[(n + j, n + j)] = -half_h;
        }
        for &(r, c, v) in &self.a_off {
            m[(r, c)] += v;
            m[(n + r, n + c)] -= v;
        }
        for &(r, c, v) in &self.b {
            m[(r, n + c)] += v;
            m[(n + r, c)] -= v;
        }
        m
    }

    /// `out = -2i ℍ(t) ψ` for one Nambu column `ψ = (x; y)`.
    pub(crate) fn apply_generator(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        let n = self.chain.sites;
        let half_h = 0.5 * self.drive.field(t);
        let (x, y) = psi.split_at(n);
        let (ox, oy) = out.split_at_mut(n);
        for j in 0..n {
            ox[j] = x[j] * half_h;
            oy[j] = -y[j] * half_h;
        }
        for &(r, c, v) in &self.a_off {
            ox[r] += x[c] * v;
            oy[r] -= y[c] * v;
        }
        for &(r, c, v) in &self.b {
            ox[r] += y[c] * v;
            oy[r] -= x[c] * v;
        }
        // multiply by -2i
        for z in out.iter_mut() {
            *z = C64::new(2.0 * z.im, -2.0 * z.re);
        }
    }
}

pub fn build_real_space_hamiltonian(chain: &ChainSpec, p: &DriveParams, t: f64) -> DMatrix<f64> {
    ChainHamiltonian::new(*chain, *p).matrix(t)
}
