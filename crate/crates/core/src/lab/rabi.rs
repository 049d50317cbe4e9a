use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::derive_seed;
use crate::error::{Error, Result};
use crate::fit::{fit_decaying_sinusoid, proportional_fit, SinusoidFit};
use crate::lattice::LatticeDevice;
use crate::quantum::{evolve, Observable, OperatorMatrix, StateVector, TimeDependentHamiltonian};
use crate::units::{amplitude_ratio_to_db, db_to_amplitude_ratio, rabi_ratio_to_db_power_form};

/// Amplitude gain of the drive chain versus frequency, linearly interpolated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GainTable {
    /// `(frequency GHz, gain)` pairs; empty means flat unit gain.
    pub points: Vec<(f64, f64)>,
}

impl GainTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(f, g)| !f.is_finite() || !(*g > 0.0)) {
            return Err(Error::Config(
                "gain table needs finite frequencies and positive gains".into(),
            ));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { points })
    }

    pub fn gain_at(&self, f_ghz: f64) -> f64 {
        let p = &self.points;
        match p.len() {
            0 => 1.0,
            1 => p[0].1,
            _ => {
                if f_ghz <= p[0].0 {
                    return p[0].1;
                }
                for w in p.windows(2) {
                    if f_ghz <= w[1].0 {
                        let u = (f_ghz - w[0].0) / (w[1].0 - w[0].0);
                        return w[0].1 + u * (w[1].1 - w[0].1);
                    }
                }
                p[p.len() - 1].1
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiSettings {
    /// Self-drive Rabi frequency per volt at unit chain gain, MHz/V.
    pub gain_mhz_per_volt: f64,
    /// Relaxation of the population toward 1/2; `None` keeps traces undamped.
    pub decay_time_ns: Option<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
    pub samples: usize,
    pub transfer: GainTable,
}

impl Default for RabiSettings {
    fn default() -> Self {
        Self {
            gain_mhz_per_volt: 250.0,
            decay_time_ns: Some(10_000.0),
            noise_sigma: 0.0,
            seed: 0x5eed,
            samples: 201,
            transfer: GainTable::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RabiTrace {
    pub times_ns: Vec<f64>,
    pub excited_population: Vec<f64>,
    pub drive_amplitude_v: f64,
}

/// Rabi frequency in GHz that line `source` at `amplitude_v` induces on `victim`.
fn true_rabi_ghz(
    device: &LatticeDevice,
    victim: usize,
    source: usize,
    amplitude_v: f64,
    settings: &RabiSettings,
) -> Result<f64> {
    let lambda = device.xy_crosstalk_db(victim, source)?;
    let f_drive = device.site(victim)?.frequency_ghz;
    Ok(settings.gain_mhz_per_volt
        * 1e-3
        * amplitude_v
        * db_to_amplitude_ratio(lambda)
        * settings.transfer.gain_at(f_drive))
}

/// Excited population of `victim` driven on resonance through line `source`.
pub fn synth_rabi_trace(
    device: &LatticeDevice,
    victim: usize,
    source: usize,
    amplitude_v: f64,
    duration_ns: f64,
    settings: &RabiSettings,
) -> Result<RabiTrace> {
    if !(amplitude_v >= 0.0) {
        return Err(Error::Domain(format!(
            "drive amplitude must be non-negative, got {amplitude_v}"
        )));
    }
    if !(duration_ns > 0.0) || settings.samples < 2 {
        return Err(Error::Config(
            "trace needs a positive duration and at least 2 samples".into(),
        ));
    }
    let f_rabi = true_rabi_ghz(device, victim, source, amplitude_v, settings)?;
    let n = settings.samples;
    let dt = duration_ns / (n - 1) as f64;
    let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();

    let coeff = PI * f_rabi;
    let mut h = TimeDependentHamiltonian::new(2);
    h.add_static(OperatorMatrix::sigma_x().scale_real(coeff))?;
    let step = if f_rabi > 0.0 {
        dt.min(0.01 / f_rabi)
    } else {
        dt
    };
    let result = evolve(
        &h,
        &StateVector::ground(2)?,
        &times,
        step,
        &[Observable::new(
            "excited",
            OperatorMatrix::excited_projector(),
        )],
    )?;
    let mut pop = result.trace("excited").expect("requested").to_vec();

    if let Some(tau) = settings.decay_time_ns {
        for (p, t) in pop.iter_mut().zip(&times) {
            *p = 0.5 + (*p - 0.5) * (-t / tau).exp();
        }
    }
    if settings.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, settings.noise_sigma)
            .map_err(|e| Error::Config(format!("noise sigma: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        for p in &mut pop {
            *p = (*p + normal.sample(&mut rng)).clamp(0.0, 1.0);
        }
    }
    Ok(RabiTrace {
        times_ns: times,
        excited_population: pop,
        drive_amplitude_v: amplitude_v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XyProtocol {
    pub rabi: RabiSettings,
    /// Amplitudes for the separate self-drive slope measurement, V.
    pub self_amplitudes_v: Vec<f64>,
    /// Periods covered by the final trace.
    pub target_periods: f64,
    /// Fewest periods a trace may cover, overriding `max_duration_ns`.
    pub min_periods: f64,
    pub probe_duration_ns: f64,
    pub max_probe_duration_ns: f64,
    pub max_duration_ns: f64,
    /// Divide fitted slopes by the drive-chain gain at the drive frequency.
    pub correct_transfer: bool,
}

impl Default for XyProtocol {
    fn default() -> Self {
        Self {
            rabi: RabiSettings::default(),
            self_amplitudes_v: vec![0.02, 0.04, 0.06, 0.08, 0.10],
            target_periods: 4.0,
            min_periods: 2.0,
            probe_duration_ns: 100.0,
            max_probe_duration_ns: 2.0e6,
            max_duration_ns: 10_000.0,
            correct_transfer: true,
        }
    }
}

impl XyProtocol {
    /// Default cross-drive amplitudes, V.
    pub fn default_cross_amplitudes() -> Vec<f64> {
        vec![0.6, 0.7, 0.8, 0.9, 1.0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XyMeasurement {
    pub victim: usize,
    pub source: usize,
    pub lambda_db: f64,
    /// The same ratio evaluated as `10 log10` of squared Rabi rates.
    pub lambda_db_power_form: f64,
    pub k_cross_mhz_per_v: f64,
    pub k_self_mhz_per_v: f64,
    pub k_cross_std: f64,
    pub k_self_std: f64,
    /// `(amplitude V, fitted Rabi frequency MHz)`.
    pub cross_points: Vec<(f64, f64)>,
    pub self_points: Vec<(f64, f64)>,
}

fn good_fit(fit: &SinusoidFit, min_periods: f64) -> bool {
    fit.periods_in_window >= min_periods && fit.amplitude > 0.2 && fit.frequency_ghz > 0.0
}

/// Fitted Rabi frequency in MHz with a trace length adapted to the oscillation.
fn rabi_frequency_mhz(
    device: &LatticeDevice,
    victim: usize,
    source: usize,
    amplitude_v: f64,
    protocol: &XyProtocol,
    tag: u64,
) -> Result<f64> {
    let settings_for = |stage: u64| RabiSettings {
        seed: derive_seed(
            protocol.rabi.seed,
            &[victim as u64, source as u64, tag, stage],
        ),
        ..protocol.rabi.clone()
    };
    let mut duration = protocol.probe_duration_ns;
    let mut stage = 0;
    let estimate = loop {
        let trace = synth_rabi_trace(
            device,
            victim,
            source,
            amplitude_v,
            duration,
            &settings_for(stage),
        )?;
        if let Ok(fit) = fit_decaying_sinusoid(&trace.times_ns, &trace.excited_population) {
            if good_fit(&fit, 1.5) {
                break fit.frequency_ghz;
            }
        }
        duration *= 4.0;
        stage += 1;
        if duration > protocol.max_probe_duration_ns {
            return Err(Error::Measurement(format!(
                "no Rabi oscillation resolved on qubit {victim} from line {source} at {amplitude_v} V"
            )));
        }
    };
    let final_duration = (protocol.target_periods / estimate)
        .min(protocol.max_duration_ns)
        .max(protocol.min_periods / estimate);
    let trace = synth_rabi_trace(
        device,
        victim,
        source,
        amplitude_v,
        final_duration,
        &settings_for(1000),
    )?;
    let fit = fit_decaying_sinusoid(&trace.times_ns, &trace.excited_population)?;
    if !good_fit(&fit, 1.0) {
        return Err(Error::Measurement(format!(
            "Rabi fit on qubit {victim} from line {source} at {amplitude_v} V is not identifiable"
        )));
    }
    Ok(fit.frequency_ghz * 1e3)
}

/// Slope, its standard error and the `(amplitude, rate)` points.
type SlopeFit = (f64, f64, Vec<(f64, f64)>);

fn slope(
    device: &LatticeDevice,
    victim: usize,
    source: usize,
    amplitudes: &[f64],
    protocol: &XyProtocol,
    role: u64,
) -> Result<SlopeFit> {
    if amplitudes.len() < 3 {
        return Err(Error::Config(format!(
            "need at least 3 amplitudes, got {}",
            amplitudes.len()
        )));
    }
    let points = amplitudes
        .par_iter()
        .enumerate()
        .map(|(k, &v)| {
            Ok((
                v,
                rabi_frequency_mhz(
                    device,
                    victim,
                    source,
                    v,
                    protocol,
                    role * 1_000_003 + k as u64,
                )?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = proportional_fit(&points)?;
    let gain = if protocol.correct_transfer {
        protocol
            .rabi
            .transfer
            .gain_at(device.site(victim)?.frequency_ghz)
    } else {
        1.0
    };
    if !(fit.slope > 0.0) {
        return Err(Error::Measurement(format!(
            "non-positive Rabi slope {} for qubit {victim}, line {source}",
            fit.slope
        )));
    }
    Ok((fit.slope / gain, fit.slope_std / gain, points))
}

/// Drive crosstalk of line `source` onto qubit `victim` from two Rabi slopes.
pub fn measure_xy_crosstalk(
    device: &LatticeDevice,
    victim: usize,
    source: usize,
    cross_amplitudes_v: &[f64],
    protocol: &XyProtocol,
) -> Result<XyMeasurement> {
    device.site(victim)?;
    device.site(source)?;
    let (k_self, k_self_std, self_points) = slope(
        device,
        source,
        source,
        &protocol.self_amplitudes_v,
        protocol,
        1,
    )?;
    let (k_cross, k_cross_std, cross_points) = if victim == source {
        (k_self, k_self_std, self_points.clone())
    } else {
        slope(device, victim, source, cross_amplitudes_v, protocol, 2)?
    };
    let (lambda_db, lambda_db_power_form) = if victim == source {
        (0.0, 0.0)
    } else {
        (
            amplitude_ratio_to_db(k_cross / k_self)?,
            rabi_ratio_to_db_power_form(k_cross, k_self)?,
        )
    };
    Ok(XyMeasurement {
        victim,
        source,
        lambda_db,
        lambda_db_power_form,
        k_cross_mhz_per_v: k_cross,
        k_self_mhz_per_v: k_self,
        k_cross_std,
        k_self_std,
        cross_points,
        self_points,
    })
}
