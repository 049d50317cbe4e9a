//! Curve fitting and summary statistics.

mod linear;
mod sinusoid;
mod spectrum;
mod stats;

pub use linear::{linear_fit, proportional_fit, LinearFit, ProportionalFit};
pub use sinusoid::{fit_decaying_sinusoid, SinusoidFit};
pub use spectrum::dominant_frequency;
pub use stats::{aggregate_stats, Aggregate, Histogram};
