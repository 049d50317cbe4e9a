use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_decaying_sinusoid;
use crate::flux::{coupler_frequency, hybridized_modes, CouplerModel, FluxSignal};
use crate::lattice::LatticeDevice;
use crate::quantum::{
    evolve, expectation, tensor, OperatorMatrix, StateVector, TimeDependentHamiltonian,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyConfig {
    /// Drive frequency above the dressed qubit frequency, MHz.
    pub drive_detuning_mhz: f64,
    /// Idle times between the two pulses, ns.
    pub idle_times_ns: Vec<f64>,
    /// Victim coupler flux during the idle window. The ac phase is referenced
    /// to the start of the window.
    pub ac: FluxSignal,
    /// Relative phases of the source ac tone, radians.
    pub phase_offset_grid: Vec<f64>,
    pub pulse_duration_ns: f64,
    /// Integration step, ns.
    pub step_ns: f64,
    /// ac amplitude applied on the source line, flux quanta.
    pub source_ac_amplitude_phi0: f64,
    /// Spacing of the two calibration points around the victim amplitude.
    pub calibration_step_phi0: f64,
    /// Flux amplitudes simulated for the voltage-to-flux fit.
    pub simulated_flux_grid_phi0: Vec<f64>,
    /// Swing below this many fringe-frequency standard errors is not resolved.
    pub resolution_sigmas: f64,
    /// Absolute floor on the swing resolution, MHz.
    pub min_resolution_mhz: f64,
}

impl Default for RamseyConfig {
    fn default() -> Self {
        Self {
            drive_detuning_mhz: 5.0,
            idle_times_ns: (0..=200).map(|k| 5.0 * k as f64).collect(),
            ac: FluxSignal {
                dc_phi0: 0.3,
                ac_amplitude_phi0: 0.04,
                ac_frequency_ghz: 0.2,
                ac_phase_rad: 0.0,
            },
            phase_offset_grid: (0..=24).map(|k| 3.0 * PI * k as f64 / 24.0).collect(),
            pulse_duration_ns: 4.0,
            step_ns: 0.01,
            source_ac_amplitude_phi0: 0.5,
            calibration_step_phi0: 0.005,
            simulated_flux_grid_phi0: (0..=16).map(|k| 0.005 * k as f64).collect(),
            resolution_sigmas: 3.0,
            min_resolution_mhz: 1e-6,
        }
    }
}

impl RamseyConfig {
    fn validate(&self) -> Result<()> {
        if self.idle_times_ns.len() < 8
            || self.idle_times_ns[0] < 0.0
            || self.idle_times_ns.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(Error::Config(
                "idle grid needs at least 8 increasing non-negative times".into(),
            ));
        }
        if !(self.pulse_duration_ns > 0.0) || !(self.step_ns > 0.0) {
            return Err(Error::Config(
                "pulse duration and step must be positive".into(),
            ));
        }
        if !(self.drive_detuning_mhz > 0.0) {
            return Err(Error::Config("drive detuning must be positive".into()));
        }
        if !(self.ac.ac_frequency_ghz >= 0.0) {
            return Err(Error::Config("ac frequency must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamseyFringe {
    pub idle_times_ns: Vec<f64>,
    pub excited_population: Vec<f64>,
    pub fringe_mhz: f64,
    pub fringe_std_mhz: f64,
    pub residual_rms: f64,
}

/// Ramsey fringe of a qubit coupled to a coupler whose flux carries ac tones
/// `(amplitude, phase)` at `config.ac.ac_frequency_ghz` during the idle window.
///
/// Simulated in a frame rotating at the drive frequency for the qubit and at
/// the dc coupler frequency for the coupler.
pub fn ramsey_fringe(
    qubit_ghz: f64,
    model: &CouplerModel,
    ac_tones: &[(f64, f64)],
    config: &RamseyConfig,
) -> Result<RamseyFringe> {
    config.validate()?;
    model.validate()?;
    let dc = config.ac.dc_phi0;
    let fc_dc = coupler_frequency(model, dc);
    let dressed = hybridized_modes(qubit_ghz, fc_dc, model.g_mhz).qubit_like_ghz();
    let f_drive = dressed + config.drive_detuning_mhz * 1e-3;

    let two_pi = 2.0 * PI;
    let id = OperatorMatrix::identity(2);
    let qubit_z = tensor(&OperatorMatrix::sigma_z(), &id);
    let coupler_z = tensor(&id, &OperatorMatrix::sigma_z());
    let exchange = tensor(
        &OperatorMatrix::sigma_plus(),
        &OperatorMatrix::sigma_minus(),
    );
    let drive = tensor(&OperatorMatrix::sigma_x(), &id);

    let qubit_detuning = two_pi * (qubit_ghz - f_drive);
    let g = two_pi * model.g_mhz * 1e-3;
    let frame_rate = two_pi * (f_drive - fc_dc);
    let tp = config.pulse_duration_ns;
    let rabi = PI / (4.0 * tp);

    let base = |h: &mut TimeDependentHamiltonian| -> Result<()> {
        h.add_static(qubit_z.scale_real(-0.5 * qubit_detuning))?;
        h.add_hermitian_pair(exchange.clone(), move |t| {
            Complex64::from_polar(g, frame_rate * t)
        })?;
        Ok(())
    };
    let mut pulse = TimeDependentHamiltonian::new(4);
    base(&mut pulse)?;
    pulse.add_static(drive.scale_real(rabi))?;

    let mut idle = TimeDependentHamiltonian::new(4);
    base(&mut idle)?;
    if ac_tones.iter().any(|(a, _)| *a != 0.0) {
        let tones: Vec<(f64, f64)> = ac_tones.to_vec();
        let w_ac = two_pi * config.ac.ac_frequency_ghz;
        let m = *model;
        idle.add_term(coupler_z.clone(), move |t| {
            let phase = w_ac * (t - tp);
            let phi = dc
                + tones
                    .iter()
                    .map(|(a, th)| a * (phase + th).cos())
                    .sum::<f64>();
            -0.5 * two_pi * (coupler_frequency(&m, phi) - fc_dc)
        })?;
    }

    let ground = StateVector::ground(4)?;
    let after_first = evolve(&pulse, &ground, &[0.0, tp], config.step_ns, &[])?.final_state;
    let grid: Vec<f64> = config.idle_times_ns.iter().map(|t| tp + t).collect();
    let idle_run = evolve(&idle, &after_first, &grid, config.step_ns, &[])?;

    let population = idle_run
        .states
        .par_iter()
        .zip(grid.par_iter())
        .map(|(psi, &t)| {
            let out = evolve(&pulse, psi, &[t, t + tp], config.step_ns, &[])?.final_state;
            Ok(0.5 * (1.0 - expectation(&out, &qubit_z)?))
        })
        .collect::<Result<Vec<f64>>>()?;

    let fit = fit_decaying_sinusoid(&config.idle_times_ns, &population)?;
    Ok(RamseyFringe {
        idle_times_ns: config.idle_times_ns.clone(),
        excited_population: population,
        fringe_mhz: fit.frequency_ghz * 1e3,
        fringe_std_mhz: fit.frequency_std_ghz * 1e3,
        residual_rms: fit.residual_rms,
    })
}

/// Natural cubic spline through strictly increasing abscissae.
struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0;
                let b = 2.0 * (h0 + h1);
                let cc = h1;
                let r = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let denom = b - a * c[i - 1];
                c[i] = cc / denom;
                d[i] = (r - a * d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Self { x, y, m }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = match self.x.iter().position(|&xi| xi > t) {
            Some(0) => 0,
            Some(p) => p - 1,
            None => n - 2,
        };
        let (x0, x1) = (self.x[k], self.x[k + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        a * self.y[k]
            + b * self.y[k + 1]
            + ((a * a * a - a) * self.m[k] + (b * b * b - b) * self.m[k + 1]) * h * h / 6.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcCalibration {
    pub coupler: usize,
    pub k_volts_per_phi0: f64,
    /// `(voltage, fringe MHz)`.
    pub measured: Vec<(f64, f64)>,
    /// `(flux amplitude, fringe MHz)`.
    pub simulated: Vec<(f64, f64)>,
    pub residual_rms_mhz: f64,
}

/// Fits the line's voltage-per-flux factor by matching measured Ramsey fringe
/// shifts against simulated shifts versus flux amplitude.
pub fn ac_flux_calibration(
    device: &LatticeDevice,
    coupler: usize,
    voltage_grid: &[f64],
    config: &RamseyConfig,
) -> Result<AcCalibration> {
    let site = device.coupler(coupler)?;
    let qubit = device.sites[device.probe_qubit(coupler)?].frequency_ghz;
    let model = site.model;
    let k_true = site.ac_volts_per_phi0;
    if !(k_true > 0.0) {
        return Err(Error::Config("ac line factor must be positive".into()));
    }
    if voltage_grid.len() < 3 || voltage_grid.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Config(
            "voltage grid needs at least 3 non-negative points".into(),
        ));
    }
    let sim_grid = &config.simulated_flux_grid_phi0;
    if sim_grid.len() < 4 || sim_grid.windows(2).any(|w| !(w[1] > w[0])) || sim_grid[0] < 0.0 {
        return Err(Error::Config(
            "simulated flux grid needs at least 4 increasing points".into(),
        ));
    }
    let phase = config.ac.ac_phase_rad;

    let measured = voltage_grid
        .par_iter()
        .map(|&v| {
            Ok((
                v,
                ramsey_fringe(qubit, &model, &[(v / k_true, phase)], config)?.fringe_mhz,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let simulated = sim_grid
        .par_iter()
        .map(|&p| {
            Ok((
                p,
                ramsey_fringe(qubit, &model, &[(p, phase)], config)?.fringe_mhz,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let increasing = simulated.windows(2).all(|w| w[1].1 > w[0].1);
    let decreasing = simulated.windows(2).all(|w| w[1].1 < w[0].1);
    if !(increasing || decreasing) {
        return Err(Error::Measurement(
            "simulated fringe shift is not monotonic in flux amplitude".into(),
        ));
    }
    let spline = Spline::new(
        simulated.iter().map(|p| p.0).collect(),
        simulated.iter().map(|p| p.1).collect(),
    );

    let v_max = voltage_grid.iter().copied().fold(0.0, f64::max);
    let phi_max = sim_grid[sim_grid.len() - 1];
    if !(v_max > 0.0) {
        return Err(Error::Config(
            "voltage grid must contain a positive voltage".into(),
        ));
    }
    let k_min = v_max / phi_max;
    let sse = |k: f64| -> f64 {
        measured
            .iter()
            .map(|(v, d)| (d - spline.eval(v / k)).powi(2))
            .sum()
    };
    let scan = 400;
    let log_range = 3.0f64;
    let ks: Vec<f64> = (0..=scan)
        .map(|i| k_min * 10f64.powf(log_range * i as f64 / scan as f64))
        .collect();
    let best = (0..=scan)
        .min_by(|&a, &b| sse(ks[a]).total_cmp(&sse(ks[b])))
        .expect("non-empty");
    let lo = ks[best.saturating_sub(1)];
    let hi = ks[(best + 1).min(scan)];
    let k = golden_min(&sse, lo, hi, 1e-10 * hi);
    if best == scan {
        return Err(Error::Measurement(
            "voltage-per-flux factor lies beyond the search range".into(),
        ));
    }
    let residual_rms_mhz = (sse(k) / measured.len() as f64).sqrt();
    Ok(AcCalibration {
        coupler,
        k_volts_per_phi0: k,
        measured,
        simulated,
        residual_rms_mhz,
    })
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const R: f64 = 0.618_033_988_749_894_9;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "beta", rename_all = "snake_case")]
pub enum AcEstimate {
    Value(f64),
    /// Swing not resolved; the crosstalk is at most this.
    UpperBound(f64),
}

impl AcEstimate {
    pub fn value(&self) -> f64 {
        match self {
            AcEstimate::Value(v) | AcEstimate::UpperBound(v) => *v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcCrosstalk {
    pub victim: usize,
    pub source: usize,
    pub beta: AcEstimate,
    pub swing_mhz: f64,
    pub resolution_mhz: f64,
    /// Local flux change per fringe-frequency change, flux quanta per MHz.
    pub gamma_phi0_per_mhz: f64,
    /// `(relative source phase, fringe MHz)`.
    pub sweep: Vec<(f64, f64)>,
}

/// ac flux crosstalk from the swing of the victim's fringe frequency as the
/// source tone's relative phase is swept.
pub fn measure_ac_crosstalk(
    device: &LatticeDevice,
    victim: usize,
    source: usize,
    config: &RamseyConfig,
) -> Result<AcCrosstalk> {
    device.coupler(source)?;
    let site = device.coupler(victim)?;
    let qubit = device.sites[device.probe_qubit(victim)?].frequency_ghz;
    let model = site.model;
    let a_i = config.ac.ac_amplitude_phi0;
    let a_j = config.source_ac_amplitude_phi0;
    let theta = config.ac.ac_phase_rad;
    let h = config.calibration_step_phi0;
    if !(a_j > 0.0) || !(h > 0.0) || a_i - h < 0.0 {
        return Err(Error::Config(
            "source amplitude and calibration step must be positive, and the step must not exceed the victim amplitude".into(),
        ));
    }
    if config.phase_offset_grid.len() < 3 {
        return Err(Error::Config("phase grid needs at least 3 points".into()));
    }
    let beta = device.ac_beta(victim, source)?;

    let cal = [a_i - h, a_i + h]
        .par_iter()
        .map(|&a| ramsey_fringe(qubit, &model, &[(a, theta)], config))
        .collect::<Result<Vec<_>>>()?;
    let d_fringe = cal[1].fringe_mhz - cal[0].fringe_mhz;
    if d_fringe == 0.0 {
        return Err(Error::Measurement(
            "fringe frequency is insensitive to flux at this bias".into(),
        ));
    }
    let gamma = 2.0 * h / d_fringe;

    let fringes = config
        .phase_offset_grid
        .par_iter()
        .map(|&dt| {
            ramsey_fringe(
                qubit,
                &model,
                &[(a_i, theta), (beta * a_j, theta + dt)],
                config,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let sweep: Vec<(f64, f64)> = config
        .phase_offset_grid
        .iter()
        .zip(&fringes)
        .map(|(&dt, f)| (dt, f.fringe_mhz))
        .collect();
    let max = sweep.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = sweep.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let swing_mhz = max - min;
    let sigma = fringes.iter().map(|f| f.fringe_std_mhz).fold(0.0, f64::max);
    let resolution_mhz = (config.resolution_sigmas * sigma).max(config.min_resolution_mhz);
    let scale = gamma.abs() / (2.0 * a_j);
    let estimate = if swing_mhz < resolution_mhz {
        AcEstimate::UpperBound(scale * resolution_mhz)
    } else {
        AcEstimate::Value(scale * swing_mhz)
    };
    Ok(AcCrosstalk {
        victim,
        source,
        beta: estimate,
        swing_mhz,
        resolution_mhz,
        gamma_phi0_per_mhz: gamma,
        sweep,
    })
}
