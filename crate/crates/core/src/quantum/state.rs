use num_complex::Complex64;

use super::operator::OperatorMatrix;
use crate::error::{Error, Result};

/// Normalised pure state of a two- or four-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

const NORM_TOL: f64 = 1e-9;

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        check_dim(amps.len())?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Contract(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { amps })
    }

    /// Basis state `|k>` of a `dim`-level system.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        check_dim(dim)?;
        if k >= dim {
            return Err(Error::IndexOutOfRange {
                what: "basis states",
                index: k,
                len: dim,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn ground(dim: usize) -> Result<Self> {
        Self::basis(dim, 0)
    }

    /// `(|0> + |1>)/sqrt 2`.
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amps: vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        }
    }

    pub(crate) fn from_raw(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn population(&self, k: usize) -> f64 {
        self.amps[k].norm_sqr()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim != 2 && dim != 4 {
        return Err(Error::Contract(format!(
            "state dimension must be 2 or 4, got {dim}"
        )));
    }
    Ok(())
}

/// `<psi|O|psi>` for Hermitian `O`.
pub fn expectation(state: &StateVector, op: &OperatorMatrix) -> Result<f64> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: op.dim(),
        });
    }
    if !op.is_hermitian(1e-12) {
        return Err(Error::Contract(
            "expectation requires a Hermitian operator".into(),
        ));
    }
    let value = raw_expectation(state.amplitudes(), op);
    if value.im.abs() >= 1e-10 {
        return Err(Error::Contract(format!(
            "expectation has imaginary part {}",
            value.im
        )));
    }
    Ok(value.re)
}

pub(crate) fn raw_expectation(psi: &[Complex64], op: &OperatorMatrix) -> Complex64 {
    let mut tmp = vec![Complex64::new(0.0, 0.0); psi.len()];
    op.apply_into(psi, &mut tmp);
    psi.iter().zip(&tmp).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks_norm() {
        let z = Complex64::new(0.0, 0.0);
        assert!(StateVector::new(vec![Complex64::new(1.0, 0.0), z]).is_ok());
        assert!(StateVector::new(vec![Complex64::new(0.9, 0.0), z]).is_err());
        assert!(StateVector::new(vec![Complex64::new(1.0, 0.0), z, z]).is_err());
    }

    #[test]
    fn expectation_examples() {
        let g = StateVector::ground(2).unwrap();
        assert_eq!(expectation(&g, &OperatorMatrix::sigma_z()).unwrap(), 1.0);
        assert_eq!(expectation(&g, &OperatorMatrix::sigma_x()).unwrap(), 0.0);
        let p = StateVector::plus();
        assert!((expectation(&p, &OperatorMatrix::sigma_x()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let g = StateVector::ground(2).unwrap();
        assert!(matches!(
            expectation(&g, &OperatorMatrix::sigma_plus()),
            Err(Error::Contract(_))
        ));
        assert!(expectation(&g, &OperatorMatrix::identity(4)).is_err());
    }
}
