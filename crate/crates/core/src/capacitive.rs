//! Drive rates and direct-coupling crosstalk from capacitance data.
//!
//! SI evaluation: capacitances in fF are converted to farads, frequencies in
//! GHz to rad/s, and the resulting rate in 1/s is returned in 1/ns.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::budget::PulseShape;
use crate::crosstalk::{CrosstalkKind, CrosstalkMatrix};
use crate::error::{Error, Result};

const FEMTOFARAD: f64 = 1e-15;
const GIGA: f64 = 1e9;
const PER_SECOND_TO_PER_NS: f64 = 1e-9;

/// Capacitances of qubits and their drive lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitanceSet {
    /// Qubit self-capacitance `C_i`, fF.
    pub self_ff: Vec<f64>,
    /// Qubit frequencies, GHz.
    pub frequency_ghz: Vec<f64>,
    /// Row-major `C[i][j]`: qubit `i` to drive line `j`, fF.
    pub coupling_ff: Vec<f64>,
    pub impedance_ohm: f64,
}

impl CapacitanceSet {
    pub fn new(
        self_ff: Vec<f64>,
        frequency_ghz: Vec<f64>,
        coupling_ff: Vec<f64>,
        impedance_ohm: f64,
    ) -> Result<Self> {
        let n = self_ff.len();
        if frequency_ghz.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: frequency_ghz.len(),
            });
        }
        if coupling_ff.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: coupling_ff.len(),
            });
        }
        if self_ff.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::Data("self-capacitances must be positive".into()));
        }
        if frequency_ghz.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::Data("qubit frequencies must be positive".into()));
        }
        if coupling_ff.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::Data(
                "coupling capacitances must be non-negative".into(),
            ));
        }
        if !(impedance_ohm > 0.0) {
            return Err(Error::Data("line impedance must be positive".into()));
        }
        Ok(Self {
            self_ff,
            frequency_ghz,
            coupling_ff,
            impedance_ohm,
        })
    }

    pub fn len(&self) -> usize {
        self.self_ff.len()
    }

    pub fn is_empty(&self) -> bool {
        self.self_ff.is_empty()
    }

    pub fn coupling(&self, qubit: usize, line: usize) -> f64 {
        self.coupling_ff[qubit * self.len() + line]
    }

    /// Copy with every capacitance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            self_ff: self.self_ff.iter().map(|c| c * factor).collect(),
            coupling_ff: self.coupling_ff.iter().map(|c| c * factor).collect(),
            ..self.clone()
        }
    }
}

/// `kappa = Z C_k^2 w^2 / C_q` in 1/ns, with `w = 2 pi f`.
pub fn photon_loss_rate(impedance_ohm: f64, c_kappa_ff: f64, qubit_ghz: f64, c_q_ff: f64) -> f64 {
    let ck = c_kappa_ff * FEMTOFARAD;
    let cq = c_q_ff * FEMTOFARAD;
    let w = 2.0 * PI * qubit_ghz * GIGA;
    impedance_ohm * ck * ck * w * w / cq * PER_SECOND_TO_PER_NS
}

/// Drive amplitude `A0 = pi / (2 sqrt(kappa) b T)` giving a pi rotation; `b`
/// is the shape's area factor.
pub fn pi_pulse_amplitude(kappa_per_ns: f64, shape: PulseShape, t_pi_ns: f64) -> f64 {
    PI / (2.0 * kappa_per_ns.sqrt() * shape.area_factor() * t_pi_ns)
}

/// Direct-coupling crosstalk of line `source` onto qubit `victim`, dB.
pub fn lambda_direct(caps: &CapacitanceSet, victim: usize, source: usize) -> Result<f64> {
    let n = caps.len();
    for idx in [victim, source] {
        if idx >= n {
            return Err(Error::IndexOutOfRange {
                what: "capacitance set",
                index: idx,
                len: n,
            });
        }
    }
    let cjj = caps.coupling(source, source);
    if !(cjj > 0.0) {
        return Err(Error::Domain(format!(
            "line {source} has zero coupling to its own qubit"
        )));
    }
    if victim == source {
        return Ok(0.0);
    }
    let ratio = (caps.frequency_ghz[victim] * caps.coupling(victim, source))
        / (caps.frequency_ghz[source] * cjj)
        * (caps.self_ff[source] / caps.self_ff[victim]).sqrt();
    Ok(20.0 * ratio.log10())
}

/// All directional pairs; pairs with zero coupling capacitance are left unset.
pub fn lambda_direct_matrix(caps: &CapacitanceSet) -> Result<CrosstalkMatrix> {
    let n = caps.len();
    let mut m = CrosstalkMatrix::new(CrosstalkKind::XyDb, n);
    for v in 0..n {
        for s in 0..n {
            if v != s && caps.coupling(v, s) > 0.0 {
                m.set(v, s, lambda_direct(caps, v, s)?)?;
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_ratio_example() {
        let caps = CapacitanceSet::new(
            vec![80.0, 80.0],
            vec![4.5, 4.5],
            vec![0.1, 0.001, 0.002, 0.1],
            50.0,
        )
        .unwrap();
        assert!((lambda_direct(&caps, 0, 1).unwrap() + 40.0).abs() < 1e-12);
        assert_eq!(lambda_direct(&caps, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn zero_self_coupling_is_an_error() {
        let caps = CapacitanceSet::new(
            vec![80.0, 80.0],
            vec![4.5, 4.5],
            vec![0.1, 0.001, 0.002, 0.0],
            50.0,
        )
        .unwrap();
        assert!(lambda_direct(&caps, 0, 1).is_err());
    }

    #[test]
    fn shape_ratio() {
        let sq = pi_pulse_amplitude(1e-6, PulseShape::Square, 20.0);
        let si = pi_pulse_amplitude(1e-6, PulseShape::Sine, 20.0);
        assert!((si / sq - PI / 2.0).abs() < 1e-12);
        assert!((pi_pulse_amplitude(1e-6, PulseShape::Square, 40.0) - sq / 2.0).abs() < 1e-12 * sq);
    }
}
