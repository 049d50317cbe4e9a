use serde::Serialize;

use crate::error::{Error, Result};

/// Ordinary least-squares line with equal weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std: f64,
    pub intercept_std: f64,
    pub residual_rms: f64,
    pub n: usize,
}

pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::fit(
            format!("line fit needs at least 2 points, got {n}"),
            None,
            f64::NAN,
        ));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let scale = points
        .iter()
        .map(|p| p.0.abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    if sxx <= (scale * 1e-12).powi(2) * nf {
        return Err(Error::fit(
            "degenerate abscissa: fewer than 2 distinct x values",
            None,
            f64::NAN,
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let s2 = if n > 2 { ssr / (nf - 2.0) } else { 0.0 };
    Ok(LinearFit {
        slope,
        intercept,
        slope_std: (s2 / sxx).sqrt(),
        intercept_std: (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
        residual_rms: (ssr / nf).sqrt(),
        n,
    })
}

/// Least-squares line through the origin, `y = k x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProportionalFit {
    pub slope: f64,
    pub slope_std: f64,
    pub residual_rms: f64,
    pub n: usize,
}

pub fn proportional_fit(points: &[(f64, f64)]) -> Result<ProportionalFit> {
    let n = points.len();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    if n == 0 || sxx == 0.0 {
        return Err(Error::fit(
            "proportional fit needs a non-zero abscissa",
            None,
            f64::NAN,
        ));
    }
    let slope = points.iter().map(|p| p.0 * p.1).sum::<f64>() / sxx;
    let ssr: f64 = points.iter().map(|p| (p.1 - slope * p.0).powi(2)).sum();
    let s2 = if n > 1 { ssr / (n as f64 - 1.0) } else { 0.0 };
    Ok(ProportionalFit {
        slope,
        slope_std: (s2 / sxx).sqrt(),
        residual_rms: (ssr / n as f64).sqrt(),
        n,
    })
}
