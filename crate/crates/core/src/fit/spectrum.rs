use std::f64::consts::PI;

use crate::error::{Error, Result};

const PAD: usize = 8;

/// Frequency (cyclic, inverse time unit) of the strongest non-zero spectral
/// component of a mean-removed signal.
///
/// The spectrum is evaluated on an 8x zero-padded grid and the peak is
/// refined by a parabola through the three largest neighbouring bins.
pub fn dominant_frequency(times: &[f64], values: &[f64]) -> Result<f64> {
    let n = times.len();
    if n != values.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: values.len(),
        });
    }
    if n < 4 {
        return Err(Error::Data("spectrum needs at least 4 samples".into()));
    }
    let span = times[n - 1] - times[0];
    if !(span > 0.0) {
        return Err(Error::Data("time span must be positive".into()));
    }
    let dt = span / (n - 1) as f64;
    let mean = values.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = values.iter().map(|v| v - mean).collect();

    let total = PAD * n;
    let df = 1.0 / (total as f64 * dt);
    let kmax = total / 2;
    let uniform = times
        .iter()
        .enumerate()
        .all(|(k, t)| (t - times[0] - k as f64 * dt).abs() <= 1e-9 * span);
    let power: Vec<f64> = (0..=kmax)
        .map(|k| {
            let f = k as f64 * df;
            if uniform {
                power_uniform(&centred, 2.0 * PI * f * dt)
            } else {
                power_at(times, &centred, f)
            }
        })
        .collect();

    let (kbest, _) =
        power
            .iter()
            .enumerate()
            .skip(1)
            .fold(
                (1, f64::NEG_INFINITY),
                |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc },
            );
    let mut f = kbest as f64 * df;
    if kbest < kmax {
        let (a, b, c) = (power[kbest - 1], power[kbest], power[kbest + 1]);
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            let shift = 0.5 * (a - c) / denom;
            if shift.abs() <= 1.0 {
                f += shift * df;
            }
        }
    }
    Ok(f.max(0.0))
}

fn power_uniform(values: &[f64], phase_step: f64) -> f64 {
    let (s1, c1) = phase_step.sin_cos();
    let (mut c, mut s) = (1.0f64, 0.0f64);
    let (mut re, mut im) = (0.0, 0.0);
    for v in values {
        re += v * c;
        im += v * s;
        let nc = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = nc;
    }
    re * re + im * im
}

fn power_at(times: &[f64], values: &[f64], f: f64) -> f64 {
    let w = 2.0 * PI * f;
    let (mut re, mut im) = (0.0, 0.0);
    let t0 = times[0];
    for (t, v) in times.iter().zip(values) {
        let (s, c) = (w * (t - t0)).sin_cos();
        re += v * c;
        im += v * s;
    }
    re * re + im * im
}
