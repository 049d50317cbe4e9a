use std::f64::consts::PI;

use nalgebra::{Matrix5, Vector5};
use serde::Serialize;

use super::spectrum::dominant_frequency;
use crate::error::{Error, Result};

/// `amplitude * exp(-t / decay_time) * cos(2 pi f t + phase) + offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinusoidFit {
    /// Cyclic frequency in inverse units of the time axis (GHz for ns).
    pub frequency_ghz: f64,
    /// Infinite when no decay is resolved.
    pub decay_time_ns: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub phase_rad: f64,
    pub residual_rms: f64,
    pub frequency_std_ghz: f64,
    /// Number of oscillation periods covered by the trace.
    pub periods_in_window: f64,
    pub iterations: usize,
}

impl SinusoidFit {
    pub fn frequency_identifiable(&self) -> bool {
        self.periods_in_window >= 1.0
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let decay = if self.decay_time_ns.is_finite() {
            (-t / self.decay_time_ns).exp()
        } else {
            1.0
        };
        self.amplitude * decay * (2.0 * PI * self.frequency_ghz * t + self.phase_rad).cos()
            + self.offset
    }
}

const MAX_ITER: usize = 200;

/// Levenberg-Marquardt fit of an exponentially decaying sinusoid.
///
/// The frequency is seeded from the spectral peak, amplitude, phase and
/// offset from a linear least-squares solve at that frequency.
pub fn fit_decaying_sinusoid(times: &[f64], values: &[f64]) -> Result<SinusoidFit> {
    let n = times.len();
    if n != values.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: values.len(),
        });
    }
    if n < 8 {
        return Err(Error::fit(
            format!("need at least 8 samples, got {n}"),
            None,
            f64::NAN,
        ));
    }
    if values.iter().chain(times).any(|v| !v.is_finite()) {
        return Err(Error::fit("non-finite samples", None, f64::NAN));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let spread = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if spread < 1e-12 {
        return Err(Error::fit(
            "flat trace: frequency is unidentifiable",
            None,
            0.0,
        ));
    }
    let span = times[n - 1] - times[0];

    let f0 = dominant_frequency(times, values)?;
    let (a0, phi0, c0) = linear_seed(times, values, f0);
    let mut p = Vector5::new(a0, f0, phi0, c0, 0.0);
    let mut sse = sum_sq(times, values, &p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITER {
        iterations += 1;
        let (jtj, jtr) = normal_equations(times, values, &p);
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for k in 0..5 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(delta) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p + delta;
            trial[4] = trial[4].max(0.0);
            let trial_sse = sum_sq(times, values, &trial);
            if trial_sse.is_finite() && trial_sse <= sse {
                let rel = (sse - trial_sse) / sse.max(1e-300);
                let small_step = (0..5).all(|k| delta[k].abs() <= 1e-9 * (p[k].abs() + 1e-12));
                p = trial;
                sse = trial_sse;
                lambda = (lambda * 0.1).max(1e-12);
                improved = true;
                if rel < 1e-10 || small_step || sse < 1e-28 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No downhill step exists: the current point is a minimum to machine precision.
            converged = true;
        }
        if converged {
            break;
        }
    }

    let fit = finish(times, values, &p, sse, iterations, span);
    if !converged {
        let rms = fit.residual_rms;
        return Err(Error::fit(
            format!("no convergence after {MAX_ITER} iterations"),
            Some(fit),
            rms,
        ));
    }
    Ok(fit)
}

fn model(t: f64, p: &Vector5<f64>) -> f64 {
    p[0] * (-p[4] * t).exp() * (2.0 * PI * p[1] * t + p[2]).cos() + p[3]
}

fn sum_sq(times: &[f64], values: &[f64], p: &Vector5<f64>) -> f64 {
    times
        .iter()
        .zip(values)
        .map(|(&t, &y)| (y - model(t, p)).powi(2))
        .sum()
}

fn normal_equations(
    times: &[f64],
    values: &[f64],
    p: &Vector5<f64>,
) -> (Matrix5<f64>, Vector5<f64>) {
    let mut jtj = Matrix5::zeros();
    let mut jtr = Vector5::zeros();
    for (&t, &y) in times.iter().zip(values) {
        let e = (-p[4] * t).exp();
        let (s, c) = (2.0 * PI * p[1] * t + p[2]).sin_cos();
        let j = Vector5::new(
            e * c,
            -p[0] * e * s * 2.0 * PI * t,
            -p[0] * e * s,
            1.0,
            -t * p[0] * e * c,
        );
        let r = y - (p[0] * e * c + p[3]);
        jtj += j * j.transpose();
        jtr += j * r;
    }
    (jtj, jtr)
}

fn linear_seed(times: &[f64], values: &[f64], f: f64) -> (f64, f64, f64) {
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut b = nalgebra::Vector3::<f64>::zeros();
    for (&t, &y) in times.iter().zip(values) {
        let (s, c) = (2.0 * PI * f * t).sin_cos();
        let row = nalgebra::Vector3::new(c, s, 1.0);
        m += row * row.transpose();
        b += row * y;
    }
    match m.lu().solve(&b) {
        Some(x) => {
            let (a, bs, c) = (x[0], x[1], x[2]);
            (a.hypot(bs), (-bs).atan2(a), c)
        }
        None => {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            (
                values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max),
                0.0,
                mean,
            )
        }
    }
}

fn finish(
    times: &[f64],
    values: &[f64],
    p: &Vector5<f64>,
    sse: f64,
    iterations: usize,
    span: f64,
) -> SinusoidFit {
    let n = times.len();
    let (mut a, mut f, mut phi) = (p[0], p[1], p[2]);
    if a < 0.0 {
        a = -a;
        phi += PI;
    }
    if f < 0.0 {
        f = -f;
        phi = -phi;
    }
    phi = phi.rem_euclid(2.0 * PI);
    if phi > PI {
        phi -= 2.0 * PI;
    }
    let (jtj, _) = normal_equations(times, values, p);
    let s2 = if n > 5 { sse / (n - 5) as f64 } else { 0.0 };
    let frequency_std_ghz = jtj
        .try_inverse()
        .map(|inv| (s2 * inv[(1, 1)]).max(0.0).sqrt())
        .unwrap_or(f64::INFINITY);
    SinusoidFit {
        frequency_ghz: f,
        decay_time_ns: if p[4] > 0.0 {
            1.0 / p[4]
        } else {
            f64::INFINITY
        },
        amplitude: a,
        offset: p[3],
        phase_rad: phi,
        residual_rms: (sse / n as f64).sqrt(),
        frequency_std_ghz,
        periods_in_window: f * span,
        iterations,
    }
}
