//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xtalk_core::budget::{
    detuning_threshold, offresonant_excitation, parasitic_excitation_trace, simulate_gate_error,
    ErrorScalingConfig, PhaseMode, ThresholdSettings,
};
use xtalk_core::capacitive::{lambda_direct_matrix, photon_loss_rate};
use xtalk_core::io::{ingest_crosstalk_dataset, read_capacitances};
use xtalk_core::lab::{
    ac_flux_calibration, derive_seed, measure_ac_crosstalk, measure_dc_crosstalk,
    measure_xy_crosstalk, AcEstimate, DcSettings, RamseyConfig, XyProtocol,
};
use xtalk_core::quantum::{
    evolve, Observable, OperatorMatrix, StateVector, TimeDependentHamiltonian,
};
use xtalk_core::{
    build_lattice, compensation_currents, db_to_amplitude_ratio, distance_fit, qubit_distance,
    CrosstalkKind, CrosstalkMatrix, FrequencyPlan, LatticeDevice,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_budget(start: Instant, budget: Duration, detail: String) -> Outcome {
    let spent = start.elapsed();
    check(
        spent < budget,
        format!("{detail}; {:.2?} of {:.0?}", spent, budget),
    )
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn device() -> LatticeDevice {
    build_lattice(5, 2.0, &FrequencyPlan::default()).expect("default lattice")
}

fn engine_oracles() -> Outcome {
    let start = Instant::now();
    // Resonant drive H = c sigma_x from the ground state: P1 = sin^2(c t).
    let rabi_ghz = 0.05;
    let c = PI * rabi_ghz;
    let mut h = TimeDependentHamiltonian::new(2);
    h.add_static(OperatorMatrix::sigma_x().scale_real(c))
        .map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (0..=200).map(|k| k as f64).collect();
    let run = evolve(
        &h,
        &StateVector::ground(2).unwrap(),
        &grid,
        0.01,
        &[Observable::new("p1", OperatorMatrix::excited_projector())],
    )
    .map_err(|e| e.to_string())?;
    let p1 = run.trace("p1").unwrap();
    let rabi_err = grid
        .iter()
        .zip(p1)
        .map(|(t, p)| (p - (c * t).sin().powi(2)).abs())
        .fold(0.0, f64::max);

    // Detuned drive: the first maximum sits at t = 1 / (2 sqrt(f^2 + d^2)).
    let mut off_err: f64 = 0.0;
    for (rabi_mhz, det_mhz) in [(10.0, 30.0), (25.0, 5.0), (2.0, 40.0)] {
        let general_ghz = f64::hypot(rabi_mhz, det_mhz) * 1e-3;
        let t_peak = 0.5 / general_ghz;
        let trace = parasitic_excitation_trace(rabi_mhz, det_mhz, &[0.0, t_peak], 0.001)
            .map_err(|e| e.to_string())?;
        off_err = off_err.max((trace[1] - offresonant_excitation(rabi_mhz, det_mhz)).abs());
    }
    let detail = format!(
        "Rabi max error {rabi_err:.2e} over 10 periods, off-resonant peak error {off_err:.2e}, norm drift {:.1e}",
        run.max_norm_drift
    );
    if rabi_err > 1e-6 || off_err > 1e-6 {
        return Err(detail);
    }
    within_budget(start, Duration::from_secs(1), detail)
}

fn xy_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a11_ce55);
    let injected: Vec<f64> = (0..50).map(|_| rng.random_range(-56.0..=-27.0)).collect();
    let base = device();
    let victim = 12;
    let sources = [7, 11, 13, 17, 6, 8, 16, 18, 2, 10];
    let cross = XyProtocol::default_cross_amplitudes();
    let results: Vec<std::result::Result<(f64, f64), String>> = {
        use rayon::prelude::*;
        injected
            .par_iter()
            .enumerate()
            .map(|(k, &lambda)| {
                let source = sources[k % sources.len()];
                let mut dev = base.clone();
                dev.set_xy_db(victim, source, lambda)
                    .map_err(|e| e.to_string())?;
                let clean = XyProtocol::default();
                let a = measure_xy_crosstalk(&dev, victim, source, &cross, &clean)
                    .map_err(|e| e.to_string())?;
                let mut noisy = XyProtocol::default();
                noisy.rabi.noise_sigma = 0.02;
                noisy.rabi.seed = derive_seed(0x5eed, &[k as u64]);
                let b = measure_xy_crosstalk(&dev, victim, source, &cross, &noisy)
                    .map_err(|e| e.to_string())?;
                Ok(((a.lambda_db - lambda).abs(), (b.lambda_db - lambda).abs()))
            })
            .collect()
    };
    let mut worst_clean: f64 = 0.0;
    let mut worst_noisy: f64 = 0.0;
    for r in results {
        let (a, b) = r?;
        worst_clean = worst_clean.max(a);
        worst_noisy = worst_noisy.max(b);
    }
    let detail = format!(
        "50 values, worst error {worst_clean:.2e} dB noiseless, {worst_noisy:.3} dB with noise"
    );
    if worst_clean > 0.1 || worst_noisy > 0.5 {
        return Err(detail);
    }
    within_budget(start, Duration::from_secs(60), detail)
}

fn coupling_conversion() -> Outcome {
    let strong = 100.0 * db_to_amplitude_ratio(-27.0);
    let weak = 100.0 * db_to_amplitude_ratio(-56.0);
    let strong_r = (strong * 100.0).round() / 100.0;
    let weak_r = (weak * 1000.0).round() / 1000.0;
    check(
        strong_r == 4.47 && weak_r == 0.158,
        format!("-27 dB -> {strong:.4} %, -56 dB -> {weak:.5} %"),
    )
}

fn offresonant_magnitude() -> Outcome {
    let parasitic = 25.0 * db_to_amplitude_ratio(-36.0);
    let p = offresonant_excitation(parasitic, 420.0);
    check(
        (4e-7..=2e-6).contains(&p),
        format!("excitation probability {p:.3e}"),
    )
}

fn detuning_thresholds() -> Outcome {
    let start = Instant::now();
    let s = ThresholdSettings::default();
    let (lo, hi) = rayon::join(
        || detuning_threshold(-27.0, 20.0, 0.999, &s),
        || detuning_threshold(-27.0, 20.0, 0.9999, &s),
    );
    let lo = lo.map_err(|e| e.to_string())?;
    let hi = hi.map_err(|e| e.to_string())?;
    let detail = format!("99.9 % at {lo:.2} MHz, 99.99 % at {hi:.2} MHz");
    if (lo / 28.0 - 1.0).abs() > 0.2 || (hi / 42.0 - 1.0).abs() > 0.2 {
        return Err(detail);
    }
    within_budget(start, Duration::from_secs(60), detail)
}

fn gate_error_scaling() -> Outcome {
    let start = Instant::now();
    let run = |m: f64, l0: f64, mode: PhaseMode, n: usize| -> std::result::Result<f64, String> {
        let mut cfg = ErrorScalingConfig {
            n,
            phase_mode: mode,
            ..ErrorScalingConfig::default()
        };
        cfg.model.m_db_per_mm = m;
        cfg.model.lambda0_db = l0;
        simulate_gate_error(&cfg)
            .map(|r| r.mean_error)
            .map_err(|e| e.to_string())
    };
    let zp = PhaseMode::ZeroPhase;
    let pp = PhaseMode::PropagationPhase;
    let a33 = run(-2.0, -50.0, zp, 33)?;
    let b33 = run(-1.5, -45.0, zp, 33)?;
    let a21 = run(-2.0, -50.0, zp, 21)?;
    let b21 = run(-1.5, -45.0, zp, 21)?;
    let pa = run(-2.0, -50.0, pp, 33)?;
    let pb = run(-1.5, -45.0, pp, 33)?;
    let growth_a = a33 / a21 - 1.0;
    let growth_b = b33 / b21 - 1.0;
    let detail = format!(
        "zero phase {a33:.3e} / {b33:.3e}, propagation fidelity {:.4} % / {:.4} %, growth 21->33 {:.1} % / {:.1} %",
        100.0 * (1.0 - pa),
        100.0 * (1.0 - pb),
        100.0 * growth_a,
        100.0 * growth_b
    );
    let ok = a33 <= 3e-4
        && 1.0 - b33 > 0.997
        && 1.0 - pa >= 0.9999
        && 1.0 - pb >= 0.9995
        && growth_a < 0.25
        && growth_b < 0.25;
    if !ok {
        return Err(detail);
    }
    within_budget(start, Duration::from_secs(600), detail)
}

fn dc_round_trip() -> Outcome {
    let start = Instant::now();
    let settings = DcSettings::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for beta in [0.0044, 0.0013, 0.0001, 0.0] {
        let mut dev = device();
        dev.set_dc_beta(0, 5, beta).map_err(|e| e.to_string())?;
        let m = measure_dc_crosstalk(&dev, 0, 5, &settings).map_err(|e| e.to_string())?;
        if beta == 0.0 {
            ok &= m.beta_abs < 3e-5;
            parts.push(format!("0 -> {:.1e}", m.beta_signed));
        } else {
            let rel = (m.beta_signed / beta - 1.0).abs();
            ok &= rel <= 0.05;
            parts.push(format!(
                "{beta} -> {:.6} ({:.2} %)",
                m.beta_signed,
                100.0 * rel
            ));
        }
    }
    let detail = parts.join(", ");
    if !ok {
        return Err(detail);
    }
    within_budget(start, Duration::from_secs(120), detail)
}

fn compensation() -> Outcome {
    let start = Instant::now();
    let dev = device();
    let n = dev.couplers.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0ffee);
    // True matrix at measured scale; the compensating matrix is a noisy
    // estimate of it, as a calibration would deliver.
    let mut truth = CrosstalkMatrix::new(CrosstalkKind::FluxSigned, n);
    let mut estimate = CrosstalkMatrix::new(CrosstalkKind::FluxSigned, n);
    for v in 0..n {
        for s in 0..n {
            if v == s {
                continue;
            }
            let magnitude = 10f64.powf(rng.random_range(-4.0..-2.36));
            let b = if rng.random_bool(0.5) {
                magnitude
            } else {
                -magnitude
            };
            truth.set(v, s, b).unwrap();
            let noisy = b * (1.0 + rng.random_range(-0.05..0.05)) + rng.random_range(-3e-5..3e-5);
            estimate.set(v, s, noisy).unwrap();
        }
    }
    let target: Vec<f64> = (0..n)
        .map(|k| 0.1 + 0.3 * ((k * 7) % 11) as f64 / 10.0)
        .collect();
    let dense = truth.to_dense(0.0);
    let realized = |applied: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|v| (0..n).map(|s| dense[v * n + s] * applied[s]).sum())
            .collect()
    };
    let worst = |applied: &[f64]| {
        realized(applied)
            .iter()
            .zip(&target)
            .map(|(r, t)| (r - t).abs())
            .fold(0.0, f64::max)
    };
    let plain = worst(&target);
    let comp = compensation_currents(&estimate, &target, 3.0).map_err(|e| e.to_string())?;
    let fixed = worst(&comp.applied_phi0);
    let exact = compensation_currents(&truth, &target, 3.0).map_err(|e| e.to_string())?;
    let exact_worst = worst(&exact.applied_phi0);
    let detail = format!(
        "{n} couplers, worst residual {plain:.2e} -> {fixed:.2e} Phi0 ({:.1}x), exact matrix {exact_worst:.1e}",
        plain / fixed
    );
    if plain / fixed < 10.0 || exact_worst > 1e-12 {
        return Err(detail);
    }
    within_budget(start, Duration::from_secs(1), detail)
}

fn ac_round_trip() -> Outcome {
    let start = Instant::now();
    let cfg = RamseyConfig::default();
    let mut dev = device();
    dev.set_ac_beta(0, 5, 0.0058).map_err(|e| e.to_string())?;
    let volts: Vec<f64> = (0..=8).map(|k| 0.05 * k as f64).collect();
    let (cal, ac) = rayon::join(
        || ac_flux_calibration(&dev, 0, &volts, &cfg),
        || measure_ac_crosstalk(&dev, 0, 5, &cfg),
    );
    let cal = cal.map_err(|e| e.to_string())?;
    let ac = ac.map_err(|e| e.to_string())?;
    let k_rel = (cal.k_volts_per_phi0 / 8.0 - 1.0).abs();
    let (beta, resolved) = match ac.beta {
        AcEstimate::Value(b) => (b, true),
        AcEstimate::UpperBound(b) => (b, false),
    };
    let beta_rel = (beta / 0.0058 - 1.0).abs();
    let detail = format!(
        "k = {:.4} ({:.2} %), beta = {beta:.6} ({:.2} %)",
        cal.k_volts_per_phi0,
        100.0 * k_rel,
        100.0 * beta_rel
    );
    if k_rel > 0.02 || !resolved || beta_rel > 0.10 {
        return Err(detail);
    }
    within_budget(start, Duration::from_secs(300), detail)
}

fn fixture_statistics() -> Outcome {
    let start = Instant::now();
    let stats = |name: &str| -> std::result::Result<(f64, f64), String> {
        let (_, agg) = ingest_crosstalk_dataset(&fixture(name), 2.0).map_err(|e| e.to_string())?;
        Ok((agg.mean, agg.std))
    };
    let (bm, bs) = stats("xy_bare_72.csv")?;
    let (tm, ts) = stats("xy_tunnel_72.csv")?;
    let (ds, _) =
        ingest_crosstalk_dataset(&fixture("xy_tunnel_72.csv"), 2.0).map_err(|e| e.to_string())?;
    let grid = build_lattice(3, 2.0, &FrequencyPlan::default()).map_err(|e| e.to_string())?;
    let points = ds
        .entries
        .iter()
        .map(|&(v, s, x)| qubit_distance(&grid, v, s).map(|d| (d, x)))
        .collect::<xtalk_core::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let fit = distance_fit(&points).map_err(|e| e.to_string())?;
    let p = fit.pairs;
    let detail = format!(
        "bare {bm:.2}±{bs:.2}, tunnel {tm:.2}±{ts:.2}, fit m = {:.3}±{:.3}, L0 = {:.2}±{:.2}, averages slope {:.3}",
        p.slope, p.slope_std, p.intercept, p.intercept_std, fit.averages_fit.slope
    );
    let ok = (bm + 39.4).abs() <= 0.05
        && (bs - 3.7).abs() <= 0.05
        && (tm + 37.4).abs() <= 0.05
        && (ts - 3.9).abs() <= 0.05
        && (p.slope + 1.1).abs() <= p.slope_std
        && (p.intercept + 33.9).abs() <= p.intercept_std
        && (fit.averages_fit.slope + 1.0).abs() <= 0.5;
    if !ok {
        return Err(detail);
    }
    within_budget(start, Duration::from_secs(1), detail)
}

fn capacitive_formulas() -> Outcome {
    let mut worst_square: f64 = 0.0;
    for ck in [0.01, 0.05, 0.2, 1.3] {
        for factor in [2.0, 3.0, 10.0] {
            let a = photon_loss_rate(50.0, ck, 4.5, 85.0);
            let b = photon_loss_rate(50.0, ck * factor, 4.5, 85.0);
            worst_square = worst_square.max((b / a / (factor * factor) - 1.0).abs());
        }
    }
    let caps = read_capacitances(
        std::fs::File::open(fixture("caps_self.csv")).map_err(|e| e.to_string())?,
        std::fs::File::open(fixture("caps_coupling.csv")).map_err(|e| e.to_string())?,
        50.0,
    )
    .map_err(|e| e.to_string())?;
    let base = lambda_direct_matrix(&caps).map_err(|e| e.to_string())?;
    let mut worst_scale: f64 = 0.0;
    for factor in [0.5, 2.0, 7.0] {
        let scaled = lambda_direct_matrix(&caps.scaled(factor)).map_err(|e| e.to_string())?;
        for (v, s, x) in base.off_diagonal() {
            worst_scale = worst_scale.max((scaled.get(v, s).unwrap() - x).abs());
        }
    }
    // 50 ohm, 0.05 fF, 4 GHz, 100 fF: kappa = 80 pi^2 per second.
    let kappa = photon_loss_rate(50.0, 0.05, 4.0, 100.0);
    let hand = 80.0 * PI * PI * 1e-9;
    let example_rel = (kappa / hand - 1.0).abs();
    let detail = format!(
        "kappa ratio error {worst_square:.1e}, scale invariance {worst_scale:.1e} dB, worked example {kappa:.6e} /ns (rel {example_rel:.1e})"
    );
    check(
        worst_square < 1e-12 && worst_scale < 1e-9 && example_rel < 1e-10,
        detail,
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("engine oracles", engine_oracles),
        ("xy round trip", xy_round_trip),
        ("coupling conversion", coupling_conversion),
        ("off-resonant magnitude", offresonant_magnitude),
        ("detuning thresholds", detuning_thresholds),
        ("gate-error scaling", gate_error_scaling),
        ("dc-flux round trip", dc_round_trip),
        ("compensation", compensation),
        ("ac-flux round trip", ac_round_trip),
        ("fixture statistics", fixture_statistics),
        ("capacitive formulas", capacitive_formulas),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
