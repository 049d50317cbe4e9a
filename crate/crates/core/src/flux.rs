use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::crosstalk::{CrosstalkKind, CrosstalkMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplerModel {
    pub omega_c0_ghz: f64,
    pub g_mhz: f64,
    /// Residual flux threading the loop at zero applied flux.
    pub flux_offset_phi0: f64,
    pub mutual_ma_per_phi0: f64,
}

impl Default for CouplerModel {
    fn default() -> Self {
        Self {
            omega_c0_ghz: 7.9,
            g_mhz: 50.0,
            flux_offset_phi0: 0.0,
            mutual_ma_per_phi0: 3.0,
        }
    }
}

impl CouplerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c0_ghz > 0.0) {
            return Err(Error::Config(format!(
                "omega_c0 must be positive, got {}",
                self.omega_c0_ghz
            )));
        }
        if !(self.g_mhz >= 0.0) {
            return Err(Error::Config(format!(
                "g must be non-negative, got {}",
                self.g_mhz
            )));
        }
        if !(self.mutual_ma_per_phi0 > 0.0) {
            return Err(Error::Config(format!(
                "mutual current per flux quantum must be positive, got {}",
                self.mutual_ma_per_phi0
            )));
        }
        if !self.flux_offset_phi0.is_finite() {
            return Err(Error::Config("flux offset must be finite".into()));
        }
        Ok(())
    }
}

/// `dc + ac_amplitude * cos(2 pi ac_frequency t + ac_phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxSignal {
    pub dc_phi0: f64,
    pub ac_amplitude_phi0: f64,
    pub ac_frequency_ghz: f64,
    pub ac_phase_rad: f64,
}

impl FluxSignal {
    pub fn at(&self, t_ns: f64) -> f64 {
        self.dc_phi0
            + self.ac_amplitude_phi0
                * (2.0 * PI * self.ac_frequency_ghz * t_ns + self.ac_phase_rad).cos()
    }
}

/// Coupler frequency at applied flux `phi`; the model's residual offset is added.
pub fn coupler_frequency(model: &CouplerModel, phi: f64) -> f64 {
    model.omega_c0_ghz * (PI * (phi + model.flux_offset_phi0)).cos().abs().sqrt()
}

/// Eigenvalues of `[[w_q, g], [g, w_c]]`, ascending, in GHz.
pub fn hybridized_frequencies(omega_q_ghz: f64, omega_c_ghz: f64, g_mhz: f64) -> (f64, f64) {
    let m = hybridized_modes(omega_q_ghz, omega_c_ghz, g_mhz);
    (m.lower_ghz, m.upper_ghz)
}

/// Dressed branches of the single-excitation qubit-coupler block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridModes {
    pub lower_ghz: f64,
    pub upper_ghz: f64,
    /// Qubit participation of the lower branch; the upper branch has `1 - lower`.
    pub lower_qubit_weight: f64,
}

impl HybridModes {
    pub fn upper_qubit_weight(&self) -> f64 {
        1.0 - self.lower_qubit_weight
    }

    /// Frequency of the branch with the larger qubit participation.
    pub fn qubit_like_ghz(&self) -> f64 {
        if self.lower_qubit_weight >= 0.5 {
            self.lower_ghz
        } else {
            self.upper_ghz
        }
    }
}

pub fn hybridized_modes(omega_q_ghz: f64, omega_c_ghz: f64, g_mhz: f64) -> HybridModes {
    let g = g_mhz * 1e-3;
    if g == 0.0 {
        let qubit_low = omega_q_ghz <= omega_c_ghz;
        return HybridModes {
            lower_ghz: omega_q_ghz.min(omega_c_ghz),
            upper_ghz: omega_q_ghz.max(omega_c_ghz),
            lower_qubit_weight: if qubit_low { 1.0 } else { 0.0 },
        };
    }
    let mean = 0.5 * (omega_q_ghz + omega_c_ghz);
    let half = 0.5 * (omega_q_ghz - omega_c_ghz);
    let r = half.hypot(g);
    let lower_qubit_weight = 0.5 * (1.0 - half / r);
    HybridModes {
        lower_ghz: mean - r,
        upper_ghz: mean + r,
        lower_qubit_weight,
    }
}

/// Applied flux produced by a line current.
pub fn current_to_flux(model: &CouplerModel, current_ma: f64) -> f64 {
    current_ma / model.mutual_ma_per_phi0
}

pub fn flux_to_current(model: &CouplerModel, phi: f64) -> f64 {
    phi * model.mutual_ma_per_phi0
}

/// Flux seen by each victim, `beta * applied`.
pub fn apply_flux_crosstalk(beta: &CrosstalkMatrix, applied_phi0: &[f64]) -> Result<Vec<f64>> {
    let m = flux_dense(beta)?;
    if applied_phi0.len() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.ncols(),
            found: applied_phi0.len(),
        });
    }
    Ok((m * DVector::from_column_slice(applied_phi0))
        .iter()
        .copied()
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compensation {
    pub applied_phi0: Vec<f64>,
    pub currents_ma: Vec<f64>,
    pub condition_number: f64,
}

/// Condition number above which compensation logs a warning.
pub const CONDITION_WARNING: f64 = 1e8;

/// Solves `beta * applied = target` and converts applied flux to line currents.
pub fn compensation_currents(
    beta: &CrosstalkMatrix,
    target_phi0: &[f64],
    mutual_ma_per_phi0: f64,
) -> Result<Compensation> {
    if !(mutual_ma_per_phi0 > 0.0) {
        return Err(Error::Config(
            "mutual current per flux quantum must be positive".into(),
        ));
    }
    let m = flux_dense(beta)?;
    let n = m.nrows();
    if target_phi0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: target_phi0.len(),
        });
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition_number = if smin > smax * 1e-15 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !condition_number.is_finite() {
        return Err(Error::Singular("flux crosstalk matrix is singular".into()));
    }
    if condition_number > CONDITION_WARNING {
        log::warn!(
            "flux crosstalk matrix is ill-conditioned (condition number {condition_number:.3e})"
        );
    }
    let b = DVector::from_column_slice(target_phi0);
    let x = m
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("LU factorization failed".into()))?;
    let applied_phi0: Vec<f64> = x.iter().copied().collect();
    let currents_ma = applied_phi0
        .iter()
        .map(|p| p * mutual_ma_per_phi0)
        .collect();
    Ok(Compensation {
        applied_phi0,
        currents_ma,
        condition_number,
    })
}

fn flux_dense(beta: &CrosstalkMatrix) -> Result<DMatrix<f64>> {
    if beta.kind() != CrosstalkKind::FluxSigned {
        return Err(Error::Contract(
            "flux compensation needs a signed flux matrix".into(),
        ));
    }
    let n = beta.size();
    Ok(DMatrix::from_row_slice(n, n, &beta.to_dense(0.0)))
}
