use proptest::prelude::*;

use xtalk_core::capacitive::{lambda_direct, photon_loss_rate, CapacitanceSet};
use xtalk_core::flux::{apply_flux_crosstalk, hybridized_modes};
use xtalk_core::units::rabi_ratio_to_db_power_form;
use xtalk_core::{
    amplitude_ratio_to_db, build_lattice, compensation_currents, coupler_frequency,
    current_to_flux, db_to_amplitude_ratio, flux_to_current, hybridized_frequencies,
    model_crosstalk_db, CouplerModel, CrosstalkKind, CrosstalkMatrix, FrequencyPlan,
    LinearCrosstalkModel, Subgroup,
};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tiling_keeps_neighbours_apart(n in 1usize..=33) {
        let plan = FrequencyPlan::default();
        let dev = build_lattice(n, 2.0, &plan).unwrap();
        prop_assert_eq!(dev.sites.len(), n * n);
        let floor = plan.min_neighbour_detuning_ghz();
        prop_assert!(floor >= 0.42 - 1e-12);
        for s in &dev.sites {
            prop_assert_eq!(s.subgroup, Subgroup::at_cell(s.row, s.col));
            prop_assert_eq!(s.frequency_ghz, plan.frequency(s.subgroup));
            for t in &dev.sites {
                let adjacent = s.row.abs_diff(t.row) + s.col.abs_diff(t.col) == 1;
                if adjacent {
                    prop_assert!(s.subgroup.is_a() != t.subgroup.is_a());
                    prop_assert!((s.frequency_ghz - t.frequency_ghz).abs() >= floor - 1e-12);
                }
            }
        }
    }

    #[test]
    fn model_decreases_with_distance(
        m in -3.0f64..-0.01,
        l0 in -60.0f64..-20.0,
        d in 0.01f64..100.0,
        dd in 0.01f64..10.0,
    ) {
        let model = LinearCrosstalkModel::new(m, l0);
        prop_assert!(model_crosstalk_db(&model, d + dd) < model_crosstalk_db(&model, d));
        prop_assert_eq!(model_crosstalk_db(&model, 0.0), 0.0);
    }

    #[test]
    fn decibel_round_trip(l in -120.0f64..=0.0) {
        let back = amplitude_ratio_to_db(db_to_amplitude_ratio(l)).unwrap();
        prop_assert!((back - l).abs() < 1e-10);
    }

    #[test]
    fn ratio_forms_agree_and_ignore_common_scale(
        victim in 1e-4f64..10.0,
        source in 1e-3f64..100.0,
        scale in 1e-3f64..1e3,
    ) {
        let amplitude = amplitude_ratio_to_db(victim / source).unwrap();
        let power = rabi_ratio_to_db_power_form(victim, source).unwrap();
        prop_assert!((amplitude - power).abs() < 1e-10);
        let scaled = rabi_ratio_to_db_power_form(victim * scale, source * scale).unwrap();
        prop_assert!((scaled - power).abs() < 1e-10);
    }

    #[test]
    fn coupler_is_periodic_and_even_about_the_offset(
        phi in -3.0f64..3.0,
        offset in -0.5f64..0.5,
        k in -4i32..4,
    ) {
        let m = CouplerModel { flux_offset_phi0: offset, ..CouplerModel::default() };
        let f = coupler_frequency(&m, phi);
        prop_assert!((coupler_frequency(&m, phi + k as f64) - f).abs() < 1e-6);
        let mirrored = coupler_frequency(&m, -2.0 * offset - phi);
        prop_assert!((mirrored - f).abs() < 1e-6);
        prop_assert!(f <= m.omega_c0_ghz + 1e-12);
    }

    #[test]
    fn avoided_crossing_gap_is_at_least_twice_the_coupling(
        fq in 3.0f64..6.0,
        fc in 3.0f64..8.0,
        g in 0.0f64..200.0,
    ) {
        let (lo, hi) = hybridized_frequencies(fq, fc, g);
        prop_assert!(hi - lo >= 2.0 * g * 1e-3 - 1e-12);
        prop_assert!((lo + hi - fq - fc).abs() < 1e-9);
        let modes = hybridized_modes(fq, fc, g);
        prop_assert!((0.0..=1.0).contains(&modes.lower_qubit_weight));
        prop_assert!((modes.lower_qubit_weight + modes.upper_qubit_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compensation_restores_every_target(
        entries in proptest::collection::vec(-0.01f64..0.01, 30),
        target in proptest::collection::vec(-0.5f64..0.5, 6),
    ) {
        let n = 6;
        let mut beta = CrosstalkMatrix::new(CrosstalkKind::FluxSigned, n);
        let mut it = entries.iter();
        for v in 0..n {
            for s in 0..n {
                if v != s {
                    beta.set(v, s, *it.next().unwrap()).unwrap();
                }
            }
        }
        let comp = compensation_currents(&beta, &target, 3.0).unwrap();
        let realized = apply_flux_crosstalk(&beta, &comp.applied_phi0).unwrap();
        for (r, t) in realized.iter().zip(&target) {
            prop_assert!((r - t).abs() < 1e-12);
        }
        for (i, p) in comp.currents_ma.iter().zip(&comp.applied_phi0) {
            prop_assert!((i - 3.0 * p).abs() < 1e-12);
        }
    }

    #[test]
    fn current_and_flux_are_inverse(i in -20.0f64..20.0, mutual in 0.1f64..10.0) {
        let m = CouplerModel { mutual_ma_per_phi0: mutual, ..CouplerModel::default() };
        prop_assert!((flux_to_current(&m, current_to_flux(&m, i)) - i).abs() < 1e-12);
    }

    #[test]
    fn direct_crosstalk_ignores_overall_capacitance_scale(
        factor in 1e-3f64..1e3,
        c_self in proptest::collection::vec(50.0f64..120.0, 3),
        c_cross in proptest::collection::vec(1e-6f64..1e-2, 6),
    ) {
        let mut coupling = vec![0.0; 9];
        let mut it = c_cross.iter();
        for v in 0..3 {
            for s in 0..3 {
                coupling[v * 3 + s] = if v == s { 0.1 } else { *it.next().unwrap() };
            }
        }
        let caps = CapacitanceSet::new(c_self, vec![4.2, 4.8, 4.26], coupling, 50.0).unwrap();
        let scaled = caps.scaled(factor);
        for v in 0..3 {
            for s in 0..3 {
                let a = lambda_direct(&caps, v, s).unwrap();
                let b = lambda_direct(&scaled, v, s).unwrap();
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn loss_rate_homogeneity(
        z in 10.0f64..100.0,
        ck in 1e-3f64..1.0,
        f in 1.0f64..10.0,
        cq in 10.0f64..200.0,
        a in 0.1f64..10.0,
    ) {
        let k = photon_loss_rate(z, ck, f, cq);
        prop_assert!(rel_close(photon_loss_rate(a * z, ck, f, cq), a * k, 1e-12));
        prop_assert!(rel_close(photon_loss_rate(z, a * ck, f, cq), a * a * k, 1e-12));
        prop_assert!(rel_close(photon_loss_rate(z, ck, a * f, cq), a * a * k, 1e-12));
        prop_assert!(rel_close(photon_loss_rate(z, ck, f, a * cq), k / a, 1e-12));
    }
}
