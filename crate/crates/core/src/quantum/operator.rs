use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl OperatorMatrix {
    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    fn two(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self {
            dim: 2,
            data: vec![a, b, c, d],
        }
    }

    pub fn sigma_x() -> Self {
        Self::two(ZERO, ONE, ONE, ZERO)
    }

    pub fn sigma_y() -> Self {
        Self::two(ZERO, -I, I, ZERO)
    }

    pub fn sigma_z() -> Self {
        Self::two(ONE, ZERO, ZERO, -ONE)
    }

    /// Raising operator `|1><0|`.
    pub fn sigma_plus() -> Self {
        Self::two(ZERO, ZERO, ONE, ZERO)
    }

    /// Lowering operator `|0><1|`.
    pub fn sigma_minus() -> Self {
        Self::two(ZERO, ONE, ZERO, ZERO)
    }

    /// Excited-state projector `|1><1|`.
    pub fn excited_projector() -> Self {
        Self::two(ZERO, ZERO, ZERO, ONE)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim;
        (0..n).all(|r| {
            (0..n).all(|c| (self.data[r * n + c] - self.data[c * n + r].conj()).norm() <= tol)
        })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        Ok(out)
    }

    /// `self * v` written into `out`.
    pub(crate) fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(n)) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub(crate) fn clear(&mut self) {
        self.data.iter_mut().for_each(|z| *z = ZERO);
    }

    /// `self += s * other` for equal dimensions.
    pub(crate) fn add_scaled_assign(&mut self, other: &Self, s: Complex64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }
}

/// Kronecker product with `a` as the left (major) factor.
pub fn tensor(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = OperatorMatrix::zeros(n);
    for ar in 0..na {
        for ac in 0..na {
            let x = a.data[ar * na + ac];
            for br in 0..nb {
                for bc in 0..nb {
                    out.data[(ar * nb + br) * n + ac * nb + bc] = x * b.data[br * nb + bc];
                }
            }
        }
    }
    out
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        self.try_add(rhs).expect("operator dimensions must agree")
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        self.try_sub(rhs).expect("operator dimensions must agree")
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        self.try_mul(rhs).expect("operator dimensions must agree")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let x = OperatorMatrix::sigma_x();
        let y = OperatorMatrix::sigma_y();
        let z = OperatorMatrix::sigma_z();
        let id = OperatorMatrix::identity(2);
        assert_eq!(&x * &x, id);
        assert_eq!(&y * &y, id);
        assert_eq!(&z * &z, id);
        let c = x.commutator(&y).unwrap();
        assert!(c.max_abs_diff(&z.scale(Complex64::new(0.0, 2.0))) < 1e-15);
        for op in [&x, &y, &z] {
            assert!(op.is_hermitian(0.0));
        }
        assert!(!OperatorMatrix::sigma_plus().is_hermitian(1e-12));
        assert_eq!(
            OperatorMatrix::sigma_plus().dagger(),
            OperatorMatrix::sigma_minus()
        );
    }

    #[test]
    fn ladder_decomposition() {
        let sp = OperatorMatrix::sigma_plus();
        let sm = OperatorMatrix::sigma_minus();
        assert_eq!(&sp + &sm, OperatorMatrix::sigma_x());
        let y = (&sp - &sm).scale(Complex64::new(0.0, 1.0));
        assert!(y.max_abs_diff(&OperatorMatrix::sigma_y()) < 1e-15);
    }

    #[test]
    fn tensor_identity_and_dims() {
        let id = OperatorMatrix::identity(2);
        assert_eq!(tensor(&id, &id), OperatorMatrix::identity(4));
        let zi = tensor(&OperatorMatrix::sigma_z(), &id);
        assert_eq!(zi.dim(), 4);
        let diag: Vec<f64> = (0..4).map(|k| zi.get(k, k).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn mismatched_dims_error() {
        let a = OperatorMatrix::identity(2);
        let b = OperatorMatrix::identity(4);
        assert!(a.try_mul(&b).is_err());
        assert!(OperatorMatrix::from_row_major(2, vec![ZERO; 3]).is_err());
    }
}
