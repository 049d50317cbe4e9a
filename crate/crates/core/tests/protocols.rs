use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use xtalk_core::lab::{
    dc_flux_spectroscopy, derive_seed, measure_ac_crosstalk, measure_dc_crosstalk,
    measure_xy_crosstalk, ramsey_fringe, synth_rabi_trace, AcEstimate, DcSettings, GainTable,
    RamseyConfig, XyProtocol,
};
use xtalk_core::{amplitude_ratio_to_db, build_lattice, Error, FrequencyPlan, LatticeDevice};

fn device() -> LatticeDevice {
    build_lattice(5, 2.0, &FrequencyPlan::default()).unwrap()
}

#[test]
fn xy_sweep_over_fifty_seeds() {
    let base = device();
    let cross = XyProtocol::default_cross_amplitudes();
    (0..50u64).into_par_iter().for_each(|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(11, &[seed]));
        let lambda = rng.random_range(-56.0..=-27.0);
        let victim = rng.random_range(0..25);
        let source = (victim + rng.random_range(1..25)) % 25;
        let mut dev = base.clone();
        dev.set_xy_db(victim, source, lambda).unwrap();
        let mut protocol = XyProtocol::default();
        protocol.rabi.noise_sigma = 0.02;
        protocol.rabi.seed = derive_seed(12, &[seed]);
        let m = measure_xy_crosstalk(&dev, victim, source, &cross, &protocol).unwrap();
        assert!(
            (m.lambda_db - lambda).abs() < 0.5,
            "seed {seed}: {lambda} -> {}",
            m.lambda_db
        );
        assert!((m.lambda_db - m.lambda_db_power_form).abs() < 1e-10);
    });
}

#[test]
fn xy_ratio_forms_and_self_pair() {
    let mut dev = device();
    dev.set_xy_db(3, 8, -40.0).unwrap();
    let p = XyProtocol::default();
    let m = measure_xy_crosstalk(&dev, 3, 8, &XyProtocol::default_cross_amplitudes(), &p).unwrap();
    let from_slopes = amplitude_ratio_to_db(m.k_cross_mhz_per_v / m.k_self_mhz_per_v).unwrap();
    assert!((from_slopes - m.lambda_db).abs() < 1e-10);
    assert!((m.lambda_db - m.lambda_db_power_form).abs() < 1e-10);
    let own = measure_xy_crosstalk(&dev, 3, 3, &p.self_amplitudes_v, &p).unwrap();
    assert_eq!(own.lambda_db, 0.0);
}

#[test]
fn xy_transfer_gain_is_corrected() {
    let mut dev = device();
    dev.set_xy_db(12, 7, -33.0).unwrap();
    let mut p = XyProtocol::default();
    let f_victim = dev.sites[12].frequency_ghz;
    let f_source = dev.sites[7].frequency_ghz;
    p.rabi.transfer = GainTable::new(vec![
        (f_victim.min(f_source), 0.7),
        (f_victim.max(f_source), 1.2),
    ])
    .unwrap();
    let m = measure_xy_crosstalk(&dev, 12, 7, &XyProtocol::default_cross_amplitudes(), &p).unwrap();
    assert!((m.lambda_db + 33.0).abs() < 0.1, "{}", m.lambda_db);
}

#[test]
fn rabi_traces_are_reproducible() {
    let dev = device();
    let mut s = xtalk_core::lab::RabiSettings {
        noise_sigma: 0.02,
        ..Default::default()
    };
    let a = synth_rabi_trace(&dev, 12, 12, 0.05, 500.0, &s).unwrap();
    let b = synth_rabi_trace(&dev, 12, 12, 0.05, 500.0, &s).unwrap();
    assert_eq!(a, b);
    s.seed += 1;
    let c = synth_rabi_trace(&dev, 12, 12, 0.05, 500.0, &s).unwrap();
    assert_ne!(a, c);
}

#[test]
fn dc_sweep_over_fifty_seeds() {
    let base = device();
    let settings = DcSettings::default();
    let n = base.couplers.len();
    (0..50u64).into_par_iter().for_each(|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(21, &[seed]));
        let magnitude = 10f64.powf(rng.random_range(-4.0..=-2.0));
        let beta = if rng.random_bool(0.5) {
            magnitude
        } else {
            -magnitude
        };
        let victim = rng.random_range(0..n);
        let source = (victim + rng.random_range(1..n)) % n;
        let mut dev = base.clone();
        dev.set_dc_beta(victim, source, beta).unwrap();
        let m = measure_dc_crosstalk(&dev, victim, source, &settings).unwrap();
        assert!(
            (m.beta_signed / beta - 1.0).abs() < 0.05,
            "seed {seed}: {beta} -> {}",
            m.beta_signed
        );
    });
}

#[test]
fn dc_calibration_recovers_offset_and_ignores_whole_flux_quanta() {
    let mut periods = Vec::new();
    for shift in [0.0, -1.0, 1.0, 2.0] {
        let mut dev = device();
        dev.couplers[0].model.flux_offset_phi0 = -0.035 + shift;
        let m = measure_dc_crosstalk(&dev, 0, 5, &DcSettings::default()).unwrap();
        assert!(
            (m.calibration.offset_phi0 + 0.035).abs() < 1e-3,
            "{}",
            m.calibration.offset_phi0
        );
        periods.push(m.calibration.period_ma);
    }
    for p in &periods {
        assert!((p - periods[0]).abs() < 1e-6 * periods[0], "{periods:?}");
    }
    assert!((periods[0] - 3.0).abs() < 0.01);
}

#[test]
fn dc_without_coupling_has_no_crossing() {
    let mut dev = device();
    dev.couplers[0].model.g_mhz = 0.0;
    let err = measure_dc_crosstalk(&dev, 0, 5, &DcSettings::default()).unwrap_err();
    assert!(matches!(err, Error::Calibration(_)), "{err}");
}

#[test]
fn spectroscopy_map_shape() {
    let dev = device();
    let currents: Vec<f64> = (0..=300).map(|k| -1.5 + 0.01 * k as f64).collect();
    let q = dev.sites[dev.probe_qubit(0).unwrap()].frequency_ghz;
    let probe: Vec<f64> = (0..=100).map(|k| q - 0.1 + 0.002 * k as f64).collect();
    let (map, _) = dc_flux_spectroscopy(&dev, 0, &currents, &probe, 2.0).unwrap();
    assert_eq!(map.currents_ma.len(), currents.len());
    assert_eq!(map.response.len(), currents.len());
    assert!(map.response.iter().all(|row| row.len() == probe.len()));
    assert!(map
        .response
        .iter()
        .flatten()
        .all(|r| (0.0..=1.0 + 1e-12).contains(r)));
}

#[test]
fn ramsey_zero_ac_fringe_matches_the_programmed_detuning() {
    let dev = device();
    let q = dev.sites[dev.probe_qubit(0).unwrap()].frequency_ghz;
    let mut cfg = RamseyConfig::default();
    for det in [3.0, 5.0, 8.0] {
        cfg.drive_detuning_mhz = det;
        let f = ramsey_fringe(q, &dev.couplers[0].model, &[], &cfg).unwrap();
        assert!(
            (f.fringe_mhz / det - 1.0).abs() < 1e-3,
            "{det} -> {}",
            f.fringe_mhz
        );
    }
}

#[test]
fn ac_round_trip_over_a_range_of_couplings() {
    let cfg = RamseyConfig::default();
    for (k, beta) in [0.0001, 0.001, 0.003, 0.0058, 0.01].into_iter().enumerate() {
        let mut dev = device();
        let source = 5 + k;
        dev.set_ac_beta(0, source, beta).unwrap();
        let m = measure_ac_crosstalk(&dev, 0, source, &cfg).unwrap();
        let AcEstimate::Value(b) = m.beta else {
            panic!("{beta} not resolved: {:?}", m.beta);
        };
        assert!((b / beta - 1.0).abs() < 0.1, "{beta} -> {b}");
        // The swept grid covers [0, 3 pi] with pi/8 spacing; 16 steps is one period.
        for i in 0..m.sweep.len() - 16 {
            let d = (m.sweep[i].1 - m.sweep[i + 16].1).abs();
            assert!(
                d < (0.05 * m.swing_mhz).max(m.resolution_mhz),
                "phase periodicity broken at {i}: {d}"
            );
        }
    }
}

#[test]
fn ac_without_coupling_is_an_upper_bound() {
    let cfg = RamseyConfig::default();
    let m = measure_ac_crosstalk(&device(), 0, 9, &cfg).unwrap();
    match m.beta {
        AcEstimate::UpperBound(b) => assert!(b < 1e-4, "{b}"),
        AcEstimate::Value(v) => panic!("unexpected resolved value {v}"),
    }
}
