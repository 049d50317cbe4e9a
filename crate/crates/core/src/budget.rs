//! Gate-error projection under distance-scaled parasitic drives.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crosstalk::{model_crosstalk_db, LinearCrosstalkModel};
use crate::error::{Error, Result};
use crate::lattice::{build_lattice_with_origin, qubit_distance, FrequencyPlan, Subgroup};
use crate::quantum::{evolve, OperatorMatrix, StateVector, TimeDependentHamiltonian};
use crate::units::{db_to_amplitude_ratio, ghz_to_angular, SPEED_OF_LIGHT_MM_PER_NS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    ZeroPhase,
    /// Each source is delayed by its free-space travel time to the victim.
    PropagationPhase,
    /// Independent uniform phases drawn from a seeded generator.
    Random {
        seed: u64,
    },
}

impl PhaseMode {
    pub fn label(&self) -> String {
        match self {
            PhaseMode::ZeroPhase => "zero_phase".into(),
            PhaseMode::PropagationPhase => "propagation_phase".into(),
            PhaseMode::Random { seed } => format!("random_{seed}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Square,
    Sine,
}

impl PulseShape {
    /// Ratio of pulse area to peak amplitude times duration.
    pub fn area_factor(self) -> f64 {
        match self {
            PulseShape::Square => 1.0,
            PulseShape::Sine => 2.0 / PI,
        }
    }

    /// Drive coefficient in rad/ns whose integral over `[0, gate_time]` is `area`.
    pub fn envelope(
        self,
        gate_time_ns: f64,
        area: f64,
    ) -> impl Fn(f64) -> f64 + Send + Sync + Copy {
        let peak = area / (self.area_factor() * gate_time_ns);
        move |t: f64| {
            if !(0.0..=gate_time_ns).contains(&t) {
                return 0.0;
            }
            match self {
                PulseShape::Square => peak,
                PulseShape::Sine => peak * (PI * t / gate_time_ns).sin(),
            }
        }
    }
}

/// Integral of the drive coefficient for an X gate under `H = Omega(t) sigma_x`.
pub const X_GATE_AREA: f64 = PI / 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorScalingConfig {
    pub n: usize,
    pub pitch_mm: f64,
    pub model: LinearCrosstalkModel,
    pub phase_mode: PhaseMode,
    pub gate_time_ns: f64,
    pub pulse_shape: PulseShape,
    pub step_ns: f64,
    pub plan: FrequencyPlan,
    /// Drop sources sharing the victim's frequency.
    pub exclude_resonant_sources: bool,
}

impl Default for ErrorScalingConfig {
    fn default() -> Self {
        Self {
            n: 5,
            pitch_mm: 2.0,
            model: LinearCrosstalkModel::default(),
            phase_mode: PhaseMode::ZeroPhase,
            gate_time_ns: 20.0,
            pulse_shape: PulseShape::Sine,
            step_ns: 0.125,
            plan: FrequencyPlan::default(),
            exclude_resonant_sources: false,
        }
    }
}

impl ErrorScalingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "lattice side must be odd, got {}",
                self.n
            )));
        }
        if !(self.gate_time_ns > 0.0) || !(self.step_ns > 0.0) {
            return Err(Error::Config("gate time and step must be positive".into()));
        }
        let ratio = self.gate_time_ns / self.step_ns;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "step {} ns does not divide gate time {} ns",
                self.step_ns, self.gate_time_ns
            )));
        }
        if !self.model.m_db_per_mm.is_finite() || !self.model.lambda0_db.is_finite() {
            return Err(Error::Config("crosstalk model must be finite".into()));
        }
        self.plan.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyError {
    pub subgroup: Subgroup,
    pub frequency_ghz: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorScalingResult {
    pub config: ErrorScalingConfig,
    pub per_frequency: Vec<FrequencyError>,
    pub mean_error: f64,
}

impl ErrorScalingResult {
    pub fn qubit_count(&self) -> usize {
        self.config.n * self.config.n
    }

    pub fn mean_fidelity(&self) -> f64 {
        1.0 - self.mean_error
    }
}

/// A drive seen by the victim from another line, relative to the victim's own drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParasiticSource {
    pub relative_amplitude: f64,
    /// Source minus victim angular frequency, rad/ns.
    pub detuning: f64,
    /// Phase of the source tone at the victim, radians.
    pub phase: f64,
}

/// Victim state after one pulse window, in the frame of the victim's own frequency.
///
/// The victim sees `Omega(t) (sigma_+ z(t) + h.c.)` with
/// `z(t) = s + sum_j r_j exp(-i (delta_j t + phase_j))`, where `s` is 1 when
/// the victim's own X gate plays and 0 when it idles.
pub fn simulate_victim(
    psi0: &StateVector,
    self_drive: bool,
    sources: &[ParasiticSource],
    shape: PulseShape,
    gate_time_ns: f64,
    step_ns: f64,
) -> Result<StateVector> {
    let env = shape.envelope(gate_time_ns, X_GATE_AREA);
    let own = if self_drive { 1.0 } else { 0.0 };
    let src: Vec<ParasiticSource> = sources.to_vec();
    let mut h = TimeDependentHamiltonian::new(2);
    h.add_hermitian_pair(OperatorMatrix::sigma_plus(), move |t| {
        let mut z = Complex64::new(own, 0.0);
        for s in &src {
            z += Complex64::from_polar(s.relative_amplitude, -(s.detuning * t + s.phase));
        }
        z * env(t)
    })?;
    Ok(evolve(&h, psi0, &[0.0, gate_time_ns], step_ns, &[])?.final_state)
}

fn center_origin(n: usize, label: Subgroup) -> (usize, usize) {
    let c = n / 2;
    let (r0, c0) = label.cell_position();
    ((r0 + 2 - c % 2) % 2, (c0 + 4 - c % 4) % 4)
}

fn sources_for(
    config: &ErrorScalingConfig,
    label: Subgroup,
) -> Result<(f64, Vec<ParasiticSource>)> {
    let device = build_lattice_with_origin(
        config.n,
        config.pitch_mm,
        &config.plan,
        center_origin(config.n, label),
    )?;
    let victim = device.center();
    let fv = device.sites[victim].frequency_ghz;
    debug_assert_eq!(device.sites[victim].subgroup, label);
    let mut rng = match config.phase_mode {
        PhaseMode::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut sources = Vec::with_capacity(device.sites.len().saturating_sub(1));
    for site in &device.sites {
        if site.index == victim {
            continue;
        }
        if config.exclude_resonant_sources && site.frequency_ghz == fv {
            continue;
        }
        let d = qubit_distance(&device, victim, site.index)?;
        let phase = match config.phase_mode {
            PhaseMode::ZeroPhase => 0.0,
            PhaseMode::PropagationPhase => {
                -ghz_to_angular(site.frequency_ghz) * d / SPEED_OF_LIGHT_MM_PER_NS
            }
            PhaseMode::Random { .. } => rng.as_mut().expect("seeded").random_range(0.0..2.0 * PI),
        };
        sources.push(ParasiticSource {
            relative_amplitude: db_to_amplitude_ratio(model_crosstalk_db(&config.model, d)),
            detuning: ghz_to_angular(site.frequency_ghz - fv),
            phase,
        });
    }
    Ok((fv, sources))
}

/// Ground-state population left after the victim's X gate with every other
/// qubit's line playing the same gate, averaged over the eight victim frequencies.
pub fn simulate_gate_error(config: &ErrorScalingConfig) -> Result<ErrorScalingResult> {
    config.validate()?;
    let ground = StateVector::ground(2)?;
    let per_frequency = Subgroup::ALL
        .par_iter()
        .map(|&label| {
            let (fv, sources) = sources_for(config, label)?;
            let psi = simulate_victim(
                &ground,
                true,
                &sources,
                config.pulse_shape,
                config.gate_time_ns,
                config.step_ns,
            )?;
            Ok(FrequencyError {
                subgroup: label,
                frequency_ghz: fv,
                error: psi.population(0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_error =
        per_frequency.iter().map(|e| e.error).sum::<f64>() / per_frequency.len() as f64;
    Ok(ErrorScalingResult {
        config: config.clone(),
        per_frequency,
        mean_error,
    })
}

/// One result per lattice side, in the order given.
pub fn error_scaling_curve(
    config: &ErrorScalingConfig,
    n_list: &[usize],
) -> Result<Vec<ErrorScalingResult>> {
    if let Some(n) = n_list.iter().find(|n| *n % 2 == 0) {
        return Err(Error::Config(format!("lattice side must be odd, got {n}")));
    }
    n_list
        .par_iter()
        .map(|&n| {
            let c = ErrorScalingConfig {
                n,
                ..config.clone()
            };
            simulate_gate_error(&c)
        })
        .collect()
}

/// Analytic peak excitation `p^2 / (p^2 + d^2)` of an idle qubit under a detuned drive.
pub fn offresonant_excitation(parasitic_rabi_mhz: f64, detuning_mhz: f64) -> f64 {
    let p2 = parasitic_rabi_mhz * parasitic_rabi_mhz;
    if p2 == 0.0 {
        return 0.0;
    }
    p2 / (p2 + detuning_mhz * detuning_mhz)
}

/// Excited population of an idle qubit under a constant detuned drive whose
/// resonant Rabi rate is `parasitic_rabi_mhz`, sampled on `t_grid`.
pub fn parasitic_excitation_trace(
    parasitic_rabi_mhz: f64,
    detuning_mhz: f64,
    t_grid: &[f64],
    step_ns: f64,
) -> Result<Vec<f64>> {
    let coeff = PI * parasitic_rabi_mhz * 1e-3;
    let delta = ghz_to_angular(detuning_mhz * 1e-3);
    let mut h = TimeDependentHamiltonian::new(2);
    h.add_hermitian_pair(OperatorMatrix::sigma_plus(), move |t| {
        Complex64::from_polar(coeff, -delta * t)
    })?;
    let result = evolve(
        &h,
        &StateVector::ground(2)?,
        t_grid,
        step_ns,
        &[crate::quantum::Observable::new(
            "excited",
            OperatorMatrix::excited_projector(),
        )],
    )?;
    Ok(result.trace("excited").expect("requested").to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMetric {
    /// Average gate fidelity `(|Tr U|^2 + 2) / 6` against the identity.
    AverageGate,
    /// Ground-state survival probability.
    GroundState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSettings {
    pub shape: PulseShape,
    pub step_ns: f64,
    pub metric: FidelityMetric,
    /// Upper end of the search; defaults to the first spectral zero `1 / gate_time`.
    pub max_detuning_mhz: Option<f64>,
    pub scan_points: usize,
    pub tolerance_mhz: f64,
}

impl Default for ThresholdSettings {
    fn default() -> Self {
        Self {
            shape: PulseShape::Square,
            step_ns: 0.01,
            metric: FidelityMetric::AverageGate,
            max_detuning_mhz: None,
            scan_points: 64,
            tolerance_mhz: 1e-3,
        }
    }
}

/// Fidelity of an idle victim while a neighbour's line plays an X gate that
/// leaks in at `lambda_db` and `detuning_mhz`.
pub fn idle_fidelity(
    lambda_db: f64,
    detuning_mhz: f64,
    gate_time_ns: f64,
    settings: &ThresholdSettings,
) -> Result<f64> {
    let source = [ParasiticSource {
        relative_amplitude: db_to_amplitude_ratio(lambda_db),
        detuning: ghz_to_angular(detuning_mhz * 1e-3),
        phase: 0.0,
    }];
    let run = |k: usize| {
        simulate_victim(
            &StateVector::basis(2, k)?,
            false,
            &source,
            settings.shape,
            gate_time_ns,
            settings.step_ns,
        )
    };
    let col0 = run(0)?;
    match settings.metric {
        FidelityMetric::GroundState => Ok(col0.population(0)),
        FidelityMetric::AverageGate => {
            let col1 = run(1)?;
            let tr = col0.amplitudes()[0] + col1.amplitudes()[1];
            Ok((tr.norm_sqr() + 2.0) / 6.0)
        }
    }
}

/// Smallest detuning at which an idle victim keeps `target_fidelity` while a
/// neighbouring line plays an X gate leaking in at `lambda_db`.
pub fn detuning_threshold(
    lambda_db: f64,
    gate_time_ns: f64,
    target_fidelity: f64,
    settings: &ThresholdSettings,
) -> Result<f64> {
    if !(lambda_db < 0.0) {
        return Err(Error::Domain(format!(
            "crosstalk must be negative dB, got {lambda_db}"
        )));
    }
    if !(target_fidelity > 0.5 && target_fidelity < 1.0) {
        return Err(Error::Domain(format!(
            "target fidelity must lie in (0.5, 1), got {target_fidelity}"
        )));
    }
    if !(gate_time_ns > 0.0) || settings.scan_points < 2 {
        return Err(Error::Config(
            "gate time must be positive and the scan needs 2 points".into(),
        ));
    }
    let fid = |d: f64| idle_fidelity(lambda_db, d, gate_time_ns, settings);
    if fid(0.0)? >= target_fidelity {
        return Ok(0.0);
    }
    let hi = settings.max_detuning_mhz.unwrap_or(1e3 / gate_time_ns);
    let mut lo = 0.0;
    let mut upper = None;
    for k in 1..=settings.scan_points {
        let d = hi * k as f64 / settings.scan_points as f64;
        if fid(d)? >= target_fidelity {
            upper = Some(d);
            break;
        }
        lo = d;
    }
    let Some(mut up) = upper else {
        return Err(Error::Search(format!(
            "fidelity {target_fidelity} not reached below {hi} MHz detuning"
        )));
    };
    while up - lo > settings.tolerance_mhz {
        let mid = 0.5 * (lo + up);
        if fid(mid)? >= target_fidelity {
            up = mid;
        } else {
            lo = mid;
        }
    }
    Ok(up)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_takes_each_label() {
        for n in [1usize, 3, 5, 7, 9, 33] {
            for label in Subgroup::ALL {
                let dev = build_lattice_with_origin(
                    n,
                    2.0,
                    &FrequencyPlan::default(),
                    center_origin(n, label),
                )
                .unwrap();
                assert_eq!(dev.sites[dev.center()].subgroup, label);
            }
        }
    }

    #[test]
    fn envelopes_have_the_requested_area() {
        for shape in [PulseShape::Square, PulseShape::Sine] {
            let env = shape.envelope(20.0, X_GATE_AREA);
            let n = 200_000;
            let h = 20.0 / n as f64;
            let area: f64 = (0..n).map(|k| env((k as f64 + 0.5) * h) * h).sum();
            assert!((area - X_GATE_AREA).abs() < 1e-8, "{shape:?} {area}");
        }
    }

    #[test]
    fn even_side_rejected() {
        let c = ErrorScalingConfig {
            n: 4,
            ..Default::default()
        };
        assert!(simulate_gate_error(&c).is_err());
        let c = ErrorScalingConfig {
            step_ns: 0.3,
            ..Default::default()
        };
        assert!(simulate_gate_error(&c).is_err());
    }

    #[test]
    fn analytic_limits() {
        assert_eq!(offresonant_excitation(1.0, 0.0), 1.0);
        assert_eq!(offresonant_excitation(0.0, 10.0), 0.0);
    }
}
