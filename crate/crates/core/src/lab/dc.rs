use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::flux::{coupler_frequency, current_to_flux, hybridized_modes, HybridModes};
use crate::lattice::LatticeDevice;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcSettings {
    pub current_grid_ma: Vec<f64>,
    /// Defaults to the probe qubit frequency +/- 150 MHz in 1 MHz steps.
    pub probe_grid_ghz: Option<Vec<f64>>,
    /// Half width of the spectroscopic line, MHz.
    pub linewidth_mhz: f64,
    /// Reference point below the bare qubit frequency, MHz.
    pub probe_offset_mhz: f64,
    pub source_fluxes_phi0: Vec<f64>,
    /// Half width of the restoring-current search, flux quanta.
    pub bracket_phi0: f64,
    pub tolerance_phi0: f64,
}

impl Default for DcSettings {
    fn default() -> Self {
        Self {
            current_grid_ma: (0..=1200).map(|k| -6.0 + 0.01 * k as f64).collect(),
            probe_grid_ghz: None,
            linewidth_mhz: 2.0,
            probe_offset_mhz: 10.0,
            source_fluxes_phi0: vec![-1.0, 0.0, 1.0],
            bracket_phi0: 0.1,
            tolerance_phi0: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectroscopyMap {
    pub currents_ma: Vec<f64>,
    pub probe_ghz: Vec<f64>,
    /// One row per current, one column per probe frequency.
    pub response: Vec<Vec<f64>>,
    pub lower_ghz: Vec<f64>,
    pub upper_ghz: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcCalibration {
    pub coupler: usize,
    pub probe_qubit: usize,
    pub crossings_ma: Vec<f64>,
    /// Current per flux quantum.
    pub period_ma: f64,
    /// Residual flux at zero current, reduced to (-0.5, 0.5].
    pub offset_phi0: f64,
    /// A current at which the loop holds an integer number of flux quanta.
    pub zero_flux_current_ma: f64,
}

impl DcCalibration {
    pub fn flux_from_current(&self, current_ma: f64) -> f64 {
        current_ma / self.period_ma
    }
}

/// Truth model seen by the spectroscopy of one coupler.
struct Probe<'a> {
    device: &'a LatticeDevice,
    coupler: usize,
    qubit_ghz: f64,
}

impl Probe<'_> {
    fn modes_at_flux(&self, applied_phi0: f64) -> HybridModes {
        let model = &self.device.couplers[self.coupler].model;
        hybridized_modes(
            self.qubit_ghz,
            coupler_frequency(model, applied_phi0),
            model.g_mhz,
        )
    }

    fn modes(&self, current_ma: f64, extra_phi0: f64) -> HybridModes {
        let model = &self.device.couplers[self.coupler].model;
        self.modes_at_flux(current_to_flux(model, current_ma) + extra_phi0)
    }
}

fn mixing(m: &HybridModes) -> f64 {
    m.lower_qubit_weight.min(m.upper_qubit_weight())
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const R: f64 = 0.618_033_988_749_894_9;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
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

/// Sweeps the coupler's own bias current, records the probe qubit's dressed
/// spectrum and infers the current period and flux offset from the avoided
/// crossings.
pub fn dc_flux_spectroscopy(
    device: &LatticeDevice,
    coupler: usize,
    current_grid_ma: &[f64],
    probe_grid_ghz: &[f64],
    linewidth_mhz: f64,
) -> Result<(SpectroscopyMap, DcCalibration)> {
    device.coupler(coupler)?.model.validate()?;
    if current_grid_ma.len() < 3 || current_grid_ma.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(
            "current grid needs at least 3 increasing points".into(),
        ));
    }
    if !(linewidth_mhz > 0.0) {
        return Err(Error::Config("linewidth must be positive".into()));
    }
    let probe_qubit = device.probe_qubit(coupler)?;
    let qubit_ghz = device.sites[probe_qubit].frequency_ghz;
    let probe = Probe {
        device,
        coupler,
        qubit_ghz,
    };

    let gamma = linewidth_mhz * 1e-3;
    let lorentz = |x: f64| gamma * gamma / (x * x + gamma * gamma);
    let modes: Vec<HybridModes> = current_grid_ma
        .iter()
        .map(|&i| probe.modes(i, 0.0))
        .collect();
    let response = modes
        .iter()
        .map(|m| {
            probe_grid_ghz
                .iter()
                .map(|&p| {
                    m.lower_qubit_weight * lorentz(p - m.lower_ghz)
                        + m.upper_qubit_weight() * lorentz(p - m.upper_ghz)
                })
                .collect()
        })
        .collect();
    let map = SpectroscopyMap {
        currents_ma: current_grid_ma.to_vec(),
        probe_ghz: probe_grid_ghz.to_vec(),
        response,
        lower_ghz: modes.iter().map(|m| m.lower_ghz).collect(),
        upper_ghz: modes.iter().map(|m| m.upper_ghz).collect(),
    };

    let h: Vec<f64> = modes.iter().map(mixing).collect();
    let mut crossings = Vec::new();
    for k in 1..h.len() - 1 {
        if h[k] > h[k - 1] && h[k] >= h[k + 1] && h[k] > 0.0 {
            let i = golden_max(
                |i| mixing(&probe.modes(i, 0.0)),
                current_grid_ma[k - 1],
                current_grid_ma[k + 1],
                1e-10,
            );
            // A true crossing reaches equal participation; a mere approach does not.
            if mixing(&probe.modes(i, 0.0)) > 0.45 {
                crossings.push(i);
            }
        }
    }
    if crossings.len() < 2 {
        return Err(Error::Calibration(format!(
            "found {} avoided crossing(s) on coupler {coupler}; need at least 2",
            crossings.len()
        )));
    }

    // Midpoints where the coupler sits above the qubit pull the qubit line down: integer flux.
    let integer_mid: Vec<bool> = crossings
        .windows(2)
        .map(|w| probe.modes(0.5 * (w[0] + w[1]), 0.0).qubit_like_ghz() < qubit_ghz)
        .collect();

    let period_ma = if crossings.len() >= 3 {
        let spans: Vec<f64> = crossings.windows(3).map(|w| w[2] - w[0]).collect();
        spans.iter().sum::<f64>() / spans.len() as f64
    } else {
        let model = &device.couplers[coupler].model;
        let ratio = (qubit_ghz / model.omega_c0_ghz).powi(2);
        if ratio >= 1.0 {
            return Err(Error::Calibration(
                "qubit lies above the coupler maximum".into(),
            ));
        }
        let phi_x = ratio.acos() / std::f64::consts::PI;
        let gap = crossings[1] - crossings[0];
        if integer_mid[0] {
            gap / (2.0 * phi_x)
        } else {
            gap / (1.0 - 2.0 * phi_x)
        }
    };

    let zero_currents: Vec<f64> = crossings
        .windows(2)
        .zip(&integer_mid)
        .filter(|(_, &is_int)| is_int)
        .map(|(w, _)| 0.5 * (w[0] + w[1]))
        .collect();
    let zero_flux_current_ma = if let Some(&z) = zero_currents
        .iter()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
    {
        z
    } else {
        // Only a half-flux midpoint was seen; step half a period from it.
        0.5 * (crossings[0] + crossings[1]) - 0.5 * period_ma
    };
    let offset_phi0 = reduce_flux(-zero_flux_current_ma / period_ma);

    Ok((
        map,
        DcCalibration {
            coupler,
            probe_qubit,
            crossings_ma: crossings,
            period_ma,
            offset_phi0,
            zero_flux_current_ma,
        },
    ))
}

/// Reduces a flux to the interval (-0.5, 0.5].
pub fn reduce_flux(phi: f64) -> f64 {
    let r = phi - phi.round();
    if r <= -0.5 {
        r + 1.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcCrosstalk {
    pub victim: usize,
    pub source: usize,
    pub beta_signed: f64,
    pub beta_abs: f64,
    /// `(source flux, restoring applied flux on the victim)`.
    pub restoring: Vec<(f64, f64)>,
    pub fit: LinearFit,
    pub bias_current_ma: f64,
    pub reference_ghz: f64,
    pub calibration: DcCalibration,
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Flux crosstalk from line `source` onto coupler `victim` by restoring the
/// probe qubit's dressed frequency near an avoided crossing.
pub fn measure_dc_crosstalk(
    device: &LatticeDevice,
    victim: usize,
    source: usize,
    settings: &DcSettings,
) -> Result<DcCrosstalk> {
    device.coupler(source)?;
    let probe_qubit = device.probe_qubit(victim)?;
    let qubit_ghz = device.sites[probe_qubit].frequency_ghz;
    let probe_grid = settings.probe_grid_ghz.clone().unwrap_or_else(|| {
        (0..=300)
            .map(|k| qubit_ghz - 0.15 + 0.001 * k as f64)
            .collect()
    });
    let (_, cal) = dc_flux_spectroscopy(
        device,
        victim,
        &settings.current_grid_ma,
        &probe_grid,
        settings.linewidth_mhz,
    )?;
    let probe = Probe {
        device,
        coupler: victim,
        qubit_ghz,
    };
    let reference_ghz = qubit_ghz - settings.probe_offset_mhz * 1e-3;

    let next_crossing = cal
        .crossings_ma
        .iter()
        .copied()
        .find(|&c| c > cal.zero_flux_current_ma)
        .ok_or_else(|| Error::Calibration("no crossing above the integer-flux point".into()))?;
    let tol_ma = settings.tolerance_phi0 * cal.period_ma;
    let bias_current_ma = bisect(
        |i| probe.modes(i, 0.0).lower_ghz - reference_ghz,
        cal.zero_flux_current_ma,
        next_crossing,
        tol_ma * 1e-3,
    )
    .ok_or_else(|| {
        Error::Measurement(format!(
            "reference {reference_ghz} GHz not bracketed between {} and {next_crossing} mA",
            cal.zero_flux_current_ma
        ))
    })?;

    let beta = device.dc_beta(victim, source)?;
    let half = settings.bracket_phi0 * cal.period_ma;
    let mut restoring = Vec::with_capacity(settings.source_fluxes_phi0.len());
    for &s in &settings.source_fluxes_phi0 {
        let extra = if victim == source { s } else { beta * s };
        let i = bisect(
            |i| probe.modes(i, extra).lower_ghz - reference_ghz,
            bias_current_ma - half,
            bias_current_ma + half,
            tol_ma,
        )
        .ok_or_else(|| Error::Measurement(format!(
            "restoring current for source flux {s} not bracketed within +/-{} flux quanta of {bias_current_ma:.6} mA",
            settings.bracket_phi0
        )))?;
        restoring.push((s, cal.flux_from_current(i)));
    }
    let fit = linear_fit(&restoring)?;
    let beta_signed = -fit.slope;
    Ok(DcCrosstalk {
        victim,
        source,
        beta_signed,
        beta_abs: beta_signed.abs(),
        restoring,
        fit,
        bias_current_ma,
        reference_ghz,
        calibration: cal,
    })
}
