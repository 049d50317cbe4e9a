//! Unit conventions: frequencies in GHz (cyclic), times in ns, distances in mm,
//! flux in flux quanta, crosstalk in dB with the amplitude convention `20 log10`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Vacuum speed of light in mm/ns.
pub const SPEED_OF_LIGHT_MM_PER_NS: f64 = 299.792_458;

/// Cyclic GHz to angular rad/ns.
pub fn ghz_to_angular(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz
}

/// Cyclic MHz to angular rad/ns.
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz * 1e-3
}

/// Angular rad/ns to cyclic MHz.
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI) * 1e3
}

pub fn db_to_amplitude_ratio(lambda_db: f64) -> f64 {
    10f64.powf(lambda_db / 20.0)
}

pub fn amplitude_ratio_to_db(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::Domain(format!(
            "amplitude ratio must be positive and finite, got {ratio}"
        )));
    }
    Ok(20.0 * ratio.log10())
}

/// Same quantity written as a power ratio of Rabi rates: `10 log10 (r^2)`.
pub fn rabi_ratio_to_db_power_form(rabi_victim: f64, rabi_source: f64) -> Result<f64> {
    if !(rabi_victim > 0.0) || !(rabi_source > 0.0) {
        return Err(Error::Domain(format!(
            "Rabi rates must be positive, got {rabi_victim} and {rabi_source}"
        )));
    }
    Ok(10.0 * ((rabi_victim / rabi_source).powi(2)).log10())
}
