//! Virtual versions of the three calibration protocols.

pub mod dc;
pub mod rabi;
pub mod ramsey;

pub use dc::{
    dc_flux_spectroscopy, measure_dc_crosstalk, DcCalibration, DcCrosstalk, DcSettings,
    SpectroscopyMap,
};
pub use rabi::{
    measure_xy_crosstalk, synth_rabi_trace, GainTable, RabiSettings, RabiTrace, XyMeasurement,
    XyProtocol,
};
pub use ramsey::{
    ac_flux_calibration, measure_ac_crosstalk, ramsey_fringe, AcCalibration, AcCrosstalk,
    AcEstimate, RamseyConfig, RamseyFringe,
};

/// Mixes a base seed with tags into an independent 64-bit seed.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut x = base;
    for &t in tags {
        x = splitmix(x ^ splitmix(t.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    splitmix(x)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
