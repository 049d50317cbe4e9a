use std::f64::consts::PI;

use xtalk_core::budget::{
    error_scaling_curve, idle_fidelity, simulate_gate_error, ErrorScalingConfig, FidelityMetric,
    PhaseMode, PulseShape, ThresholdSettings,
};
use xtalk_core::capacitive::{photon_loss_rate, pi_pulse_amplitude};
use xtalk_core::quantum::{evolve, OperatorMatrix, StateVector, TimeDependentHamiltonian};
use xtalk_core::Error;

fn config(n: usize, m: f64, l0: f64) -> ErrorScalingConfig {
    let mut c = ErrorScalingConfig {
        n,
        ..ErrorScalingConfig::default()
    };
    c.model.m_db_per_mm = m;
    c.model.lambda0_db = l0;
    c
}

#[test]
fn resonant_sources_add_error() {
    for n in [5, 9] {
        let full = simulate_gate_error(&config(n, -1.5, -45.0)).unwrap();
        let masked = simulate_gate_error(&ErrorScalingConfig {
            exclude_resonant_sources: true,
            ..config(n, -1.5, -45.0)
        })
        .unwrap();
        assert!(
            masked.mean_error < full.mean_error,
            "n={n}: {} vs {}",
            masked.mean_error,
            full.mean_error
        );
    }
}

#[test]
fn phase_modes_agree_on_a_tiny_array() {
    let mut zero = config(3, -1.1, -33.9);
    zero.pitch_mm = 0.01;
    let prop = ErrorScalingConfig {
        phase_mode: PhaseMode::PropagationPhase,
        ..zero.clone()
    };
    let a = simulate_gate_error(&zero).unwrap().mean_error;
    let b = simulate_gate_error(&prop).unwrap().mean_error;
    assert!((a / b - 1.0).abs() < 0.01, "{a} vs {b}");
}

#[test]
fn error_grows_with_stronger_crosstalk() {
    let mut last = 0.0;
    for l0 in [-60.0, -50.0, -45.0, -40.0] {
        let e = simulate_gate_error(&config(7, -1.5, l0))
            .unwrap()
            .mean_error;
        assert!(e >= last, "{l0}: {e} < {last}");
        last = e;
    }
    let mut last = 0.0;
    for m in [-3.0, -2.0, -1.5, -1.0] {
        let e = simulate_gate_error(&config(7, m, -45.0))
            .unwrap()
            .mean_error;
        assert!(e >= last, "{m}: {e} < {last}");
        last = e;
    }
}

#[test]
fn runs_are_bitwise_reproducible() {
    let c = config(9, -2.0, -50.0);
    let a = simulate_gate_error(&c).unwrap();
    let b = simulate_gate_error(&c).unwrap();
    assert_eq!(a, b);
    let seeded = ErrorScalingConfig {
        phase_mode: PhaseMode::Random { seed: 3 },
        ..c
    };
    assert_eq!(
        simulate_gate_error(&seeded).unwrap(),
        simulate_gate_error(&seeded).unwrap()
    );
}

#[test]
fn curve_follows_the_requested_sizes() {
    let curve = error_scaling_curve(&config(5, -2.0, -50.0), &[5, 9, 13]).unwrap();
    let sizes: Vec<usize> = curve.iter().map(|r| r.config.n).collect();
    assert_eq!(sizes, [5, 9, 13]);
    assert!(curve.iter().all(|r| r.per_frequency.len() == 8));
    assert!(matches!(
        error_scaling_curve(&config(5, -2.0, -50.0), &[5, 8]),
        Err(Error::Config(_))
    ));
}

#[test]
fn single_qubit_has_no_crosstalk_error() {
    let r = simulate_gate_error(&config(1, -1.1, -33.9)).unwrap();
    assert!(r.mean_error < 1e-12, "{}", r.mean_error);
}

#[test]
fn idle_fidelity_is_perfect_without_crosstalk_and_far_detuned() {
    let s = ThresholdSettings::default();
    let near = idle_fidelity(-27.0, 0.0, 20.0, &s).unwrap();
    let far = idle_fidelity(-27.0, 200.0, 20.0, &s).unwrap();
    assert!(near < far);
    let g = ThresholdSettings {
        metric: FidelityMetric::GroundState,
        ..s
    };
    assert!(idle_fidelity(-120.0, 0.0, 20.0, &g).unwrap() > 1.0 - 1e-10);
}

#[test]
fn capacitive_pi_pulse_drives_a_full_rotation() {
    let kappa = photon_loss_rate(50.0, 0.05, 4.5, 85.0);
    let t_pi = 20.0;
    for shape in [PulseShape::Square, PulseShape::Sine] {
        let a0 = pi_pulse_amplitude(kappa, shape, t_pi);
        let peak = kappa.sqrt() * a0;
        let mut h = TimeDependentHamiltonian::new(2);
        h.add_term(OperatorMatrix::sigma_x(), move |t| match shape {
            PulseShape::Square => peak,
            PulseShape::Sine => peak * (PI * t / t_pi).sin(),
        })
        .unwrap();
        let r = evolve(
            &h,
            &StateVector::ground(2).unwrap(),
            &[0.0, t_pi],
            0.01,
            &[],
        )
        .unwrap();
        let p1 = r.final_state.population(1);
        assert!((1.0 - p1).abs() < 1e-6, "{shape:?}: {p1}");
    }
}
