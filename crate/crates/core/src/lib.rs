//! Simulation and analysis of crosstalk in flux-tunable superconducting qubit lattices.

pub mod budget;
pub mod capacitive;
pub mod crosstalk;
pub mod error;
pub mod fit;
pub mod flux;
pub mod io;
pub mod lab;
pub mod lattice;
pub mod quantum;
pub mod units;

pub use crosstalk::{
    distance_fit, model_crosstalk_db, CrosstalkKind, CrosstalkMatrix, DistanceAverage, DistanceFit,
    LinearCrosstalkModel,
};
pub use error::{Error, Result};
pub use flux::{
    compensation_currents, coupler_frequency, current_to_flux, flux_to_current,
    hybridized_frequencies, CouplerModel, FluxSignal,
};
pub use lattice::{
    build_lattice, qubit_distance, FrequencyPlan, LatticeDevice, QubitSite, Subgroup,
};
pub use units::{amplitude_ratio_to_db, db_to_amplitude_ratio};
