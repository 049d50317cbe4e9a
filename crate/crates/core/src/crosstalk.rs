use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{linear_fit, LinearFit};

/// Distance model `m * d + lambda0` in dB, with 0 dB on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCrosstalkModel {
    pub m_db_per_mm: f64,
    pub lambda0_db: f64,
}

impl Default for LinearCrosstalkModel {
    fn default() -> Self {
        Self {
            m_db_per_mm: -1.1,
            lambda0_db: -33.9,
        }
    }
}

impl LinearCrosstalkModel {
    pub fn new(m_db_per_mm: f64, lambda0_db: f64) -> Self {
        Self {
            m_db_per_mm,
            lambda0_db,
        }
    }

    pub fn evaluate(&self, d_mm: f64) -> f64 {
        model_crosstalk_db(self, d_mm)
    }
}

pub fn model_crosstalk_db(model: &LinearCrosstalkModel, d_mm: f64) -> f64 {
    if d_mm == 0.0 {
        0.0
    } else {
        model.m_db_per_mm * d_mm + model.lambda0_db
    }
}

/// Mean crosstalk of all pairs at one separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceAverage {
    pub distance_mm: f64,
    pub mean_db: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceFit {
    /// Equal-weight line through every pair.
    pub pairs: LinearFit,
    /// Line through the per-distance averages.
    pub averages_fit: LinearFit,
    pub averages: Vec<DistanceAverage>,
}

impl DistanceFit {
    pub fn model(&self) -> LinearCrosstalkModel {
        LinearCrosstalkModel::new(self.pairs.slope, self.pairs.intercept)
    }
}

/// Fits `(distance_mm, dB)` points. Distances closer than 1 nm are grouped.
pub fn distance_fit(points: &[(f64, f64)]) -> Result<DistanceFit> {
    if let Some(p) = points
        .iter()
        .find(|p| !p.0.is_finite() || !p.1.is_finite() || p.0 <= 0.0)
    {
        return Err(Error::Data(format!(
            "invalid distance point ({}, {})",
            p.0, p.1
        )));
    }
    let pairs = linear_fit(points)?;
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut averages: Vec<DistanceAverage> = Vec::new();
    for (d, x) in sorted {
        match averages.last_mut() {
            Some(a) if (d - a.distance_mm).abs() < 1e-6 => {
                a.mean_db += x;
                a.count += 1;
            }
            _ => averages.push(DistanceAverage {
                distance_mm: d,
                mean_db: x,
                count: 1,
            }),
        }
    }
    for a in &mut averages {
        a.mean_db /= a.count as f64;
    }
    let avg_points: Vec<(f64, f64)> = averages
        .iter()
        .map(|a| (a.distance_mm, a.mean_db))
        .collect();
    let averages_fit = linear_fit(&avg_points)?;
    Ok(DistanceFit {
        pairs,
        averages_fit,
        averages,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrosstalkKind {
    /// On-resonant drive crosstalk in dB.
    XyDb,
    /// Signed flux-per-flux slope.
    FluxSigned,
}

impl CrosstalkKind {
    pub fn diagonal(self) -> f64 {
        match self {
            CrosstalkKind::XyDb => 0.0,
            CrosstalkKind::FluxSigned => 1.0,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            CrosstalkKind::XyDb => "dB",
            CrosstalkKind::FluxSigned => "flux_fraction",
        }
    }

    pub fn from_unit(unit: &str) -> Result<Self> {
        match unit {
            "dB" => Ok(CrosstalkKind::XyDb),
            "flux_fraction" => Ok(CrosstalkKind::FluxSigned),
            other => Err(Error::Data(format!(
                "unknown unit '{other}' (expected 'dB' or 'flux_fraction')"
            ))),
        }
    }
}

/// Dense directional matrix indexed `(victim, source)`.
///
/// Off-diagonal entries that were never set are NaN.
#[derive(Debug, Clone)]
pub struct CrosstalkMatrix {
    kind: CrosstalkKind,
    size: usize,
    entries: Vec<f64>,
}

impl PartialEq for CrosstalkMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.size == other.size
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a == b || (a.is_nan() && b.is_nan()))
    }
}

impl CrosstalkMatrix {
    /// Matrix with the kind's diagonal and all off-diagonal entries unset.
    pub fn new(kind: CrosstalkKind, size: usize) -> Self {
        let mut entries = vec![f64::NAN; size * size];
        for i in 0..size {
            entries[i * size + i] = kind.diagonal();
        }
        Self {
            kind,
            size,
            entries,
        }
    }

    /// Matrix with every off-diagonal entry set to `value`.
    pub fn filled(kind: CrosstalkKind, size: usize, value: f64) -> Self {
        let mut m = Self::new(kind, size);
        for v in 0..size {
            for s in 0..size {
                if v != s {
                    m.entries[v * size + s] = value;
                }
            }
        }
        m
    }

    pub fn kind(&self) -> CrosstalkKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn check(&self, index: usize) -> Result<()> {
        if index >= self.size {
            return Err(Error::IndexOutOfRange {
                what: "crosstalk matrix",
                index,
                len: self.size,
            });
        }
        Ok(())
    }

    pub fn get(&self, victim: usize, source: usize) -> Result<f64> {
        self.check(victim)?;
        self.check(source)?;
        Ok(self.entries[victim * self.size + source])
    }

    /// Sets an off-diagonal entry. The diagonal is fixed by the kind.
    pub fn set(&mut self, victim: usize, source: usize, value: f64) -> Result<()> {
        self.check(victim)?;
        self.check(source)?;
        if victim == source {
            if value != self.kind.diagonal() {
                return Err(Error::Contract(format!(
                    "diagonal of a {:?} matrix is fixed at {}",
                    self.kind,
                    self.kind.diagonal()
                )));
            }
            return Ok(());
        }
        if !value.is_finite() {
            return Err(Error::Domain(format!("non-finite crosstalk value {value}")));
        }
        self.entries[victim * self.size + source] = value;
        Ok(())
    }

    /// Whether an off-diagonal entry has been set.
    pub fn is_set(&self, victim: usize, source: usize) -> bool {
        victim < self.size
            && source < self.size
            && !self.entries[victim * self.size + source].is_nan()
    }

    /// Set off-diagonal entries as `(victim, source, value)`.
    pub fn off_diagonal(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for v in 0..self.size {
            for s in 0..self.size {
                let x = self.entries[v * self.size + s];
                if v != s && !x.is_nan() {
                    out.push((v, s, x));
                }
            }
        }
        out
    }

    /// Row-major dense copy with unset entries replaced by `fill`.
    pub fn to_dense(&self, fill: f64) -> Vec<f64> {
        self.entries
            .iter()
            .map(|&x| if x.is_nan() { fill } else { x })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_fixed() {
        let mut m = CrosstalkMatrix::new(CrosstalkKind::FluxSigned, 3);
        assert_eq!(m.get(1, 1).unwrap(), 1.0);
        assert!(m.set(1, 1, 0.5).is_err());
        m.set(0, 2, -0.0013).unwrap();
        assert_eq!(m.get(0, 2).unwrap(), -0.0013);
        assert!(m.get(2, 0).unwrap().is_nan());
    }

    #[test]
    fn not_assumed_symmetric() {
        let mut m = CrosstalkMatrix::new(CrosstalkKind::XyDb, 2);
        m.set(0, 1, -30.0).unwrap();
        m.set(1, 0, -45.0).unwrap();
        assert_ne!(m.get(0, 1).unwrap(), m.get(1, 0).unwrap());
    }

    #[test]
    fn out_of_range() {
        let m = CrosstalkMatrix::new(CrosstalkKind::XyDb, 2);
        assert!(matches!(m.get(2, 0), Err(Error::IndexOutOfRange { .. })));
    }
}
