use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `counts.len() + 1` edges; bins are half-open `[e_k, e_{k+1})` except the last.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
}

/// Mean, population standard deviation and a histogram whose edges are
/// integer multiples of `bin_width`.
pub fn aggregate_stats(values: &[f64], bin_width: f64) -> Result<Aggregate> {
    if values.is_empty() {
        return Err(Error::Data("cannot summarise an empty sequence".into()));
    }
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(Error::Config(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("values must be finite".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let first = (min / bin_width + 1e-9).floor() as i64;
    let bin_of = |v: f64| ((v / bin_width + 1e-9).floor() as i64 - first) as usize;
    let nbins = bin_of(max) + 1;
    let mut counts = vec![0usize; nbins];
    for &v in values {
        counts[bin_of(v).min(nbins - 1)] += 1;
    }
    let edges = (0..=nbins as i64)
        .map(|k| (first + k) as f64 * bin_width)
        .collect();

    Ok(Aggregate {
        count: values.len(),
        mean,
        std: var.sqrt(),
        min,
        max,
        histogram: Histogram { edges, counts },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_values() {
        let a = aggregate_stats(&[-30.0, -50.0], 2.0).unwrap();
        assert_eq!(a.mean, -40.0);
        assert_eq!(a.std, 10.0);
    }

    #[test]
    fn constant_has_zero_std() {
        let a = aggregate_stats(&[-37.0; 5], 1.0).unwrap();
        assert_eq!(a.std, 0.0);
        assert_eq!(a.histogram.counts, vec![5]);
    }

    #[test]
    fn even_minimum_gives_integer_edges() {
        let a = aggregate_stats(&[-44.0, -43.1, -40.5, -37.0, -36.0], 2.0).unwrap();
        assert_eq!(
            a.histogram.edges,
            vec![-44.0, -42.0, -40.0, -38.0, -36.0, -34.0]
        );
        assert_eq!(a.histogram.counts, vec![2, 1, 0, 1, 1]);
        assert_eq!(a.histogram.counts.iter().sum::<usize>(), 5);
        for e in &a.histogram.edges {
            assert_eq!(e.fract(), 0.0);
        }
    }

    #[test]
    fn empty_is_an_error() {
        assert!(aggregate_stats(&[], 2.0).is_err());
        assert!(aggregate_stats(&[1.0], 0.0).is_err());
    }
}
