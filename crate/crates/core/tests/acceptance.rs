//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr
//! (bypassing output capture) before asserting.

use std::f64::consts::LN_2;
use std::io::Write;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use floquet_ising::bdg::{
    default_dt, evolve_k_mode, evolve_real_space, ground_state_bogoliubov, stroboscopic_frames, NambuAmplitude,
    NORM_DRIFT_LIMIT, UNITARITY_DRIFT_LIMIT,
};
use floquet_ising::cli::{
    parse_scan, run_convergence, run_frequency_scan, run_volume_law, ConvergenceResult, Experiment,
    ExperimentConfig, ScanResult, ENTRY_TOLERANCE,
};
use floquet_ising::corr::{
    asymptotic_correlators_k, correlation_generic, correlators_k, finite_time_correlators, toeplitz_blocks,
    KIntegration, QuadratureSettings, TimeLabel, ANTISYMMETRY_TOLERANCE,
};
use floquet_ising::entropy::{
    asymptotic_entropy_density, quench_limit_check, subchain_entropy, PAIRING_TOLERANCE, SILENT_CLAMP,
};
use floquet_ising::floquet::{analyze_grid, analyze_mode, overlaps, period_propagator, FloquetMode, FloquetSettings};
use floquet_ising::model::{ground_state_amplitudes, Boundary, ChainSpec, DriveParams, KGrid};

type Check = Result<String, String>;

fn report(id: u32, name: &str, outcome: Check) {
    let line = match &outcome {
        Ok(d) => format!("criterion {id:>2} PASS  {name}: {d}"),
        Err(d) => format!("criterion {id:>2} FAIL  {name}: {d}"),
    };
    let _ = writeln!(std::io::stderr().lock(), "{line}");
    if let Err(d) = outcome {
        panic!("criterion {id} ({name}) failed: {d}");
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn paper_drive() -> DriveParams {
    DriveParams::new(2.3, 1.0, 4.0).unwrap()
}

fn convergence(boundary: Boundary) -> &'static ConvergenceResult {
    static PBC: OnceLock<ConvergenceResult> = OnceLock::new();
    static OBC: OnceLock<ConvergenceResult> = OnceLock::new();
    let (cell, ls) = match boundary {
        Boundary::SpinPbc => (&PBC, vec![20, 40]),
        Boundary::Obc => (&OBC, vec![20]),
    };
    cell.get_or_init(|| {
        let mut cfg = ExperimentConfig::defaults(Experiment::Convergence);
        cfg.drive = paper_drive();
        cfg.chain = ChainSpec::new(400, boundary).unwrap();
        cfg.subchain_lengths = ls;
        run_convergence(&cfg).expect("convergence run")
    })
}

fn scan() -> &'static ScanResult {
    static SCAN: OnceLock<ScanResult> = OnceLock::new();
    SCAN.get_or_init(|| {
        let mut cfg = ExperimentConfig::defaults(Experiment::FrequencyScan);
        cfg.drive = paper_drive();
        cfg.chain = ChainSpec::new(1000, Boundary::SpinPbc).unwrap();
        cfg.scan = parse_scan("0.7:4.0:0.025").unwrap();
        run_frequency_scan(&cfg).expect("frequency scan")
    })
}

fn entry_of(r: &ConvergenceResult, l: usize) -> Option<usize> {
    let i = r.traces.iter().position(|t| t.l == l).unwrap();
    r.entry[i]
}

/// Largest relative deviation from `S_l^∞(0)` over the last `window`
/// periods before the horizon.
fn tail_deviation(r: &ConvergenceResult, l: usize, window: usize) -> f64 {
    let i = r.traces.iter().position(|t| t.l == l).unwrap();
    let s = r.asymptotic[i];
    let last = r.horizon.min(r.traces[i].values.len() - 1);
    r.traces[i].values[last.saturating_sub(window)..=last]
        .iter()
        .map(|v| ((v - s) / s).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_01_cross_pipeline_equivalence() {
    let check = || -> Check {
        let p = paper_drive();
        let dt = default_dt(&p);
        let s = QuadratureSettings::default();
        let mut worst: f64 = 0.0;
        for sites in [8, 16] {
            let chain = ChainSpec::new(sites, Boundary::SpinPbc).map_err(|e| e.to_string())?;
            let grid = KGrid::abc(sites).map_err(|e| e.to_string())?;
            let frames = stroboscopic_frames(&chain, &p, 3, dt).map_err(|e| e.to_string())?;
            for n in [0, 1, 3] {
                let t = n as f64 * p.tau();
                let samples = finite_time_correlators(&p, &grid, t, dt).map_err(|e| e.to_string())?;
                for l in 1..=sites / 2 {
                    let g = subchain_entropy(&correlation_generic(&frames[n], l).map_err(|e| e.to_string())?)
                        .map_err(|e| e.to_string())?;
                    let (c, _) = toeplitz_blocks(&samples, l, KIntegration::DiscreteSum, &s, TimeLabel::At(t))
                        .map_err(|e| e.to_string())?;
                    let k = subchain_entropy(&c).map_err(|e| e.to_string())?;
                    worst = worst.max((g - k).abs());
                }
            }
        }
        ensure(worst < 1e-7, || format!("max |ΔS| = {worst:e}"))?;
        Ok(format!("max |ΔS| = {worst:.2e} over L ∈ {{8, 16}}, t ∈ {{0, τ, 3τ}}, all l ≤ L/2"))
    };
    report(1, "cross-pipeline equivalence", check());
}

#[test]
fn criterion_02_undriven_fixed_point() {
    let check = || -> Check {
        let p = DriveParams::new(2.3, 0.0, 4.0).unwrap();
        let mut drift: f64 = 0.0;
        for boundary in [Boundary::SpinPbc, Boundary::Obc] {
            let chain = ChainSpec::new(64, boundary).unwrap();
            let frames = stroboscopic_frames(&chain, &p, 10, default_dt(&p)).map_err(|e| e.to_string())?;
            for l in [4, 8, 16] {
                let s: Vec<f64> = frames
                    .iter()
                    .map(|f| subchain_entropy(&correlation_generic(f, l).unwrap()).unwrap())
                    .collect();
                drift = s.iter().map(|v| (v - s[0]).abs()).fold(drift, f64::max);
            }
        }
        ensure(drift < 1e-8, || format!("S_l(nτ) drifts by {drift:e}"))?;
        let grid = KGrid::abc(1000).unwrap();
        let modes = analyze_grid(&p, &grid, 2.3, &FloquetSettings::stroboscopic_only()).map_err(|e| e.to_string())?;
        let occ = modes.iter().map(|m| (m.occupation_plus() - 1.0).abs()).fold(0.0, f64::max);
        ensure(occ < 1e-9, || format!("max ||r⁺|² - 1| = {occ:e}"))?;
        let s = asymptotic_entropy_density(&modes, KIntegration::Spline, &QuadratureSettings::default())
            .map_err(|e| e.to_string())?;
        ensure(s.value.abs() < 1e-9, || format!("s^∞ = {:e}", s.value))?;
        Ok(format!(
            "trace drift {drift:.1e}, max ||r⁺|²-1| {occ:.1e}, s^∞ = {:.1e}",
            s.value
        ))
    };
    report(2, "undriven fixed point", check());
}

#[test]
fn criterion_03_quench_reduction() {
    let check = || -> Check {
        let grid = KGrid::abc(1000).unwrap();
        let mut parts = Vec::new();
        for (h0, h1) in [(2.3, 1.5), (0.5, 1.5), (2.3, 0.5)] {
            let q = quench_limit_check(
                h0,
                h1,
                &grid,
                &FloquetSettings::stroboscopic_only(),
                KIntegration::Spline,
                &QuadratureSettings::default(),
            )
            .map_err(|e| e.to_string())?;
            ensure(q.deviation() < 1e-7, || format!("({h0} → {h1}): deviation {:e}", q.deviation()))?;
            parts.push(format!("({h0}→{h1}) s = {:.6} Δ = {:.1e}", q.closed_form.value, q.deviation()));
        }
        Ok(parts.join("; "))
    };
    report(3, "quench reduction", check());
}

#[test]
fn criterion_04_convergence_to_asymptotic_value() {
    let check = || -> Check {
        let r = convergence(Boundary::SpinPbc);
        let e20 = entry_of(r, 20);
        let e40 = entry_of(r, 40);
        let detail = format!(
            "entry(l=20) = {e20:?}, entry(l=40) = {e40:?} within horizon n ≤ {}; last-10-period max deviation {:.1}% / {:.1}% (band {:.0}%)",
            r.horizon,
            100.0 * tail_deviation(r, 20, 10),
            100.0 * tail_deviation(r, 40, 10),
            100.0 * ENTRY_TOLERANCE
        );
        match (e20, e40) {
            (Some(a), Some(b)) if b > a => Ok(detail),
            _ => Err(detail),
        }
    };
    report(4, "convergence to S_l^∞(0)", check());
}

#[test]
fn criterion_05_open_chain_factor_two() {
    let check = || -> Check {
        let pbc = entry_of(convergence(Boundary::SpinPbc), 20);
        let obc_run = convergence(Boundary::Obc);
        let obc = entry_of(obc_run, 20);
        let detail = format!(
            "entry(PBC) = {pbc:?}, entry(OBC) = {obc:?}; OBC last-10-period max deviation {:.1}%",
            100.0 * tail_deviation(obc_run, 20, 10)
        );
        match (pbc, obc) {
            (Some(a), Some(b)) if a > 0 => {
                let ratio = b as f64 / a as f64;
                let d = format!("{detail}; ratio {ratio:.2}");
                if (1.5..=3.0).contains(&ratio) {
                    Ok(d)
                } else {
                    Err(d)
                }
            }
            _ => Err(detail),
        }
    };
    report(5, "open-chain factor two", check());
}

#[test]
fn criterion_06_volume_law() {
    let check = || -> Check {
        let mut cfg = ExperimentConfig::defaults(Experiment::VolumeLaw);
        cfg.drive = paper_drive();
        cfg.chain = ChainSpec::new(1000, Boundary::SpinPbc).unwrap();
        cfg.subchain_lengths = vec![20, 40, 80, 160];
        let r = run_volume_law(&cfg).map_err(|e| e.to_string())?;
        let d: Vec<f64> = r.rows.iter().map(|row| row.rescaled_difference.abs()).collect();
        let text = format!("s^∞ = {:.6}, |S_l/l - s^∞| = {:?}", r.density.value, d.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>());
        ensure(d.windows(2).all(|w| w[1] < w[0]), || format!("not monotone: {text}"))?;
        ensure(d[3] < 0.02, || format!("l = 160 value too large: {text}"))?;
        Ok(text)
    };
    report(6, "volume law", check());
}

/// Topographic prominence of the local maximum at `i`.
fn prominence(y: &[f64], i: usize) -> f64 {
    let side = |range: &mut dyn Iterator<Item = usize>| {
        let mut low = y[i];
        for j in range {
            if y[j] > y[i] {
                break;
            }
            low = low.min(y[j]);
        }
        low
    };
    let left = side(&mut (0..i).rev());
    let right = side(&mut (i + 1..y.len()));
    y[i] - left.max(right)
}

/// Most prominent local maximum within `±0.05` of `w`.
fn peak_near(w: &[f64], y: &[f64], target: f64) -> Option<(f64, f64)> {
    (1..y.len() - 1)
        .filter(|&i| (w[i] - target).abs() <= 0.05 + 1e-9 && y[i] >= y[i - 1] && y[i] >= y[i + 1])
        .map(|i| (w[i], prominence(y, i)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

#[test]
fn criterion_07_resonance_peaks() {
    let check = || -> Check {
        let r = scan();
        let w: Vec<f64> = r.rows.iter().map(|x| x.omega0).collect();
        let y: Vec<f64> = r.rows.iter().map(|x| x.density.value).collect();
        let k0: Vec<_> = [2.6, 1.3].iter().map(|&t| (t, peak_near(&w, &y, t))).collect();
        let kpi: Vec<_> = [3.3, 2.2].iter().map(|&t| (t, peak_near(&w, &y, t))).collect();
        let detail = format!(
            "k=0 peaks {:?}; k=π features {:?}",
            k0.iter().map(|(t, p)| (t, p.map(|(a, b)| (a, format!("{b:.2e}"))))).collect::<Vec<_>>(),
            kpi.iter().map(|(t, p)| (t, p.map(|(a, b)| (a, format!("{b:.2e}"))))).collect::<Vec<_>>()
        );
        if k0.iter().any(|(_, p)| p.is_none()) {
            return Err(format!("missing k=0 peak: {detail}"));
        }
        let weakest_k0 = k0.iter().map(|(_, p)| p.unwrap().1).fold(f64::INFINITY, f64::min);
        let strongest_kpi = kpi.iter().map(|(_, p)| p.map_or(0.0, |x| x.1)).fold(0.0, f64::max);
        ensure(strongest_kpi < weakest_k0, || format!("k=π feature not weaker: {detail}"))?;
        Ok(detail)
    };
    report(7, "resonance peaks", check());
}

#[test]
fn criterion_08_sub_thermal_bound() {
    let check = || -> Check {
        let r = scan();
        let max_s = r.rows.iter().map(|x| x.density.value).fold(f64::NEG_INFINITY, f64::max);
        ensure(max_s < LN_2 - 1e-6, || format!("max s^∞ = {max_s}"))?;
        let mut margin = f64::INFINITY;
        for run in [convergence(Boundary::SpinPbc), convergence(Boundary::Obc)] {
            for t in &run.traces {
                for v in &t.values {
                    margin = margin.min(t.l as f64 * LN_2 + 1e-9 - v);
                }
            }
        }
        ensure(margin >= 0.0, || format!("finite-time S_l exceeds l log 2 by {}", -margin))?;
        Ok(format!(
            "max s^∞ = {max_s:.6} < log 2; smallest finite-time margin l·log 2 - S_l = {margin:.3}"
        ))
    };
    report(8, "sub-thermal bound", check());
}

#[test]
fn criterion_09_gge_identity() {
    let check = || -> Check {
        let r = scan();
        let worst = r
            .rows
            .iter()
            .map(|x| (x.gge_density.value - x.density.value).abs())
            .fold(0.0, f64::max);
        ensure(worst < 1e-8, || format!("max |s_GGE - s^∞| = {worst:e}"))?;
        Ok(format!("max |s_GGE - s^∞| = {worst:.1e} over {} scan points", r.rows.len()))
    };
    report(9, "GGE identity", check());
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config::with_cases(cases), TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn drive_strategy() -> impl Strategy<Value = DriveParams> {
    (0.1f64..3.0, 0.0f64..2.0, 0.8f64..8.0).prop_map(|(h, a, w)| DriveParams::new(h, a, w).unwrap())
}

fn hygiene_norm_and_unitarity() -> Result<(), String> {
    runner(32)
        .run(&(drive_strategy(), 0.01f64..3.1, 0.0f64..10.0), |(p, k, t)| {
            let psi = ground_state_amplitudes(p.h0() + 0.3, k).unwrap();
            let out = evolve_k_mode(&p, k, psi, 0.0, t, default_dt(&p)).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() <= NORM_DRIFT_LIMIT);
            let f = period_propagator(&p, k, default_dt(&p)).unwrap();
            let defect = (f.adjoint() * f - nalgebra::Matrix2::<C64>::identity()).camax();
            prop_assert!(defect <= UNITARITY_DRIFT_LIMIT, "F unitarity {}", defect);
            Ok(())
        })
        .map_err(|e| format!("norm/unitarity: {e}"))?;
    runner(12)
        .run(&(drive_strategy(), 2usize..6, any::<bool>(), 0.0f64..3.0), |(p, half, obc, t)| {
            let b = if obc { Boundary::Obc } else { Boundary::SpinPbc };
            let chain = ChainSpec::new(2 * half, b).unwrap();
            let g0 = ground_state_bogoliubov(&chain, &p).unwrap();
            let f = evolve_real_space(&chain, &p, &g0, t, default_dt(&p)).unwrap();
            prop_assert!(f.unitarity_defect() <= UNITARITY_DRIFT_LIMIT);
            Ok(())
        })
        .map_err(|e| format!("frame unitarity: {e}"))
}

fn hygiene_pairing_and_antisymmetry() -> Result<(), String> {
    runner(16)
        .run(&(drive_strategy(), 3usize..7, 0.0f64..4.0, 1usize..6), |(p, half, t, l)| {
            let chain = ChainSpec::new(2 * half, Boundary::SpinPbc).unwrap();
            let g0 = ground_state_bogoliubov(&chain, &p).unwrap();
            let f = evolve_real_space(&chain, &p, &g0, t, default_dt(&p)).unwrap();
            let l = l.min(2 * half);
            let c = correlation_generic(&f, l).unwrap();
            let g = c.gamma();
            prop_assert!((g + g.transpose()).amax() <= ANTISYMMETRY_TOLERANCE);
            let h = DMatrix::<C64>::from_fn(2 * l, 2 * l, |r, s| C64::new(0.0, g[(r, s)]));
            let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(|a, b| a.total_cmp(b));
            for m in 0..l {
                prop_assert!((ev[m] + ev[2 * l - 1 - m]).abs() <= PAIRING_TOLERANCE);
                prop_assert!(ev[2 * l - 1 - m] <= 1.0 + SILENT_CLAMP);
            }
            Ok(())
        })
        .map_err(|e| format!("pairing/antisymmetry: {e}"))
}

fn hygiene_bloch_norms() -> Result<(), String> {
    runner(32)
        .run(&(drive_strategy(), 0.01f64..3.1, 0.0f64..6.0), |(p, k, t)| {
            let psi = ground_state_amplitudes(p.h0(), k).unwrap();
            let out = evolve_k_mode(&p, k, psi, 0.0, t, default_dt(&p)).unwrap();
            prop_assert!((correlators_k(&out).bloch_norm() - 1.0).abs() <= 1e-9 + 4.0 * NORM_DRIFT_LIMIT);
            let mode = analyze_mode(&p, k, &psi, &FloquetSettings::default()).unwrap();
            let total = mode.occupation_plus() + mode.occupation_minus();
            prop_assert!((total - 1.0).abs() <= 1e-9);
            let a = mode.bloch_amplitude();
            let tri = asymptotic_correlators_k(&mode, 0.37 * mode.tau).unwrap();
            prop_assert!((tri.bloch_norm() - a * a).abs() <= 1e-8);
            Ok(())
        })
        .map_err(|e| format!("Bloch norms: {e}"))
}

fn rephase(mode: &FloquetMode, psi0: &NambuAmplitude, alpha: f64, beta: f64) -> FloquetMode {
    let (ea, eb) = (C64::from_polar(1.0, alpha), C64::from_polar(1.0, beta));
    let mut m = mode.clone();
    m.phi_plus_0 *= ea;
    m.phi_minus_0 *= eb;
    let (rp, rm) = overlaps(&m.phi_plus_0, &m.phi_minus_0, psi0);
    m.r_plus = rp;
    m.r_minus = rm;
    m.u_p.iter_mut().chain(m.v_p.iter_mut()).for_each(|z| *z *= ea);
    m
}

fn hygiene_gauge_invariance() -> Result<(), String> {
    runner(32)
        .run(
            &(drive_strategy(), 0.01f64..3.1, -3.2f64..3.2, -3.2f64..3.2, 0.0f64..1.0),
            |(p, k, alpha, beta, frac)| {
                let psi = ground_state_amplitudes(p.h0(), k).unwrap();
                let mode = analyze_mode(&p, k, &psi, &FloquetSettings::default()).unwrap();
                let moved = rephase(&mode, &psi, alpha, beta);
                let t = frac * mode.tau;
                let a = asymptotic_correlators_k(&mode, t).unwrap();
                let b = asymptotic_correlators_k(&moved, t).unwrap();
                prop_assert!((a.r - b.r).abs() + (a.i - b.i).abs() + (a.q - b.q).abs() <= 1e-12);
                prop_assert!((mode.lambda() - moved.lambda()).abs() <= 1e-12 * (1.0 + mode.lambda().abs()));
                Ok(())
            },
        )
        .map_err(|e| format!("gauge invariance: {e}"))
}

fn hygiene_rk4_order() -> Result<(), String> {
    runner(24)
        .run(&(drive_strategy(), 0.01f64..3.1), |(p, k)| {
            let psi = ground_state_amplitudes(p.h0() + 0.5, k).unwrap();
            // 16 coarse steps of phase 0.1: truncation dominates round-off
            // and the norm stays inside the drift guard
            let window = 1.6 / p.max_mode_energy();
            let at = |steps: f64| evolve_k_mode(&p, k, psi, 0.0, window, window / steps).unwrap().to_vector();
            let (a, b, c) = (at(16.0), at(32.0), at(64.0));
            let ratio = (a - b).norm() / (b - c).norm();
            prop_assert!((12.0..=20.0).contains(&ratio), "ratio {}", ratio);
            Ok(())
        })
        .map_err(|e| format!("RK4 order: {e}"))
}

#[test]
fn criterion_10_numerical_hygiene() {
    let checks: [(&str, fn() -> Result<(), String>); 5] = [
        ("norm and unitarity", hygiene_norm_and_unitarity),
        ("±ν pairing and antisymmetry", hygiene_pairing_and_antisymmetry),
        ("Bloch-norm identities", hygiene_bloch_norms),
        ("gauge invariance", hygiene_gauge_invariance),
        ("RK4 fourth-order convergence", hygiene_rk4_order),
    ];
    let mut failed = Vec::new();
    for (name, f) in checks {
        if let Err(e) = f() {
            failed.push(format!("{name}: {e}"));
        }
    }
    let outcome = if failed.is_empty() {
        Ok(checks.map(|c| c.0).join(", "))
    } else {
        Err(failed.join("; "))
    };
    report(10, "numerical hygiene", outcome);
}
