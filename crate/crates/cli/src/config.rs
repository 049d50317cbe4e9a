//! Run configuration. One TOML document per run; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use xtalk_core::budget::{PhaseMode, PulseShape};
use xtalk_core::lab::{RamseyConfig, XyProtocol};
use xtalk_core::{build_lattice, CouplerModel, FrequencyPlan, LatticeDevice, LinearCrosstalkModel};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub device: DeviceConfig,
    pub xy_xtalk: Option<XyConfig>,
    pub dc_flux: Option<DcConfig>,
    pub ac_flux: Option<AcConfig>,
    pub gate_error_scaling: Option<GateErrorConfig>,
    pub distance_fit: Option<DistanceFitConfig>,
    pub ingest_stats: Option<IngestConfig>,
    pub capacitive: Option<CapacitiveConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceConfig {
    pub n: usize,
    pub pitch_mm: f64,
    /// Subgroup a then subgroup b, four each.
    pub frequencies_ghz: Option<Vec<f64>>,
    pub xy_m_db_per_mm: f64,
    pub xy_lambda0_db: f64,
    pub coupler: CouplerConfig,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        let model = LinearCrosstalkModel::default();
        Self {
            n: 5,
            pitch_mm: 2.0,
            frequencies_ghz: None,
            xy_m_db_per_mm: model.m_db_per_mm,
            xy_lambda0_db: model.lambda0_db,
            coupler: CouplerConfig::default(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplerConfig {
    pub omega_c0_ghz: f64,
    pub g_mhz: f64,
    pub flux_offset_phi0: f64,
    pub mutual_ma_per_phi0: f64,
    pub ac_volts_per_phi0: f64,
}

impl Default for CouplerConfig {
    fn default() -> Self {
        let m = CouplerModel::default();
        Self {
            omega_c0_ghz: m.omega_c0_ghz,
            g_mhz: m.g_mhz,
            flux_offset_phi0: m.flux_offset_phi0,
            mutual_ma_per_phi0: m.mutual_ma_per_phi0,
            ac_volts_per_phi0: 8.0,
        }
    }
}

impl DeviceConfig {
    pub fn plan(&self) -> CliResult<FrequencyPlan> {
        Ok(match &self.frequencies_ghz {
            Some(f) => FrequencyPlan::from_frequencies(f)?,
            None => FrequencyPlan::default(),
        })
    }

    pub fn build(&self) -> CliResult<LatticeDevice> {
        let mut dev = build_lattice(self.n, self.pitch_mm, &self.plan()?)?;
        dev.xy_model = LinearCrosstalkModel::new(self.xy_m_db_per_mm, self.xy_lambda0_db);
        let c = &self.coupler;
        let model = CouplerModel {
            omega_c0_ghz: c.omega_c0_ghz,
            g_mhz: c.g_mhz,
            flux_offset_phi0: c.flux_offset_phi0,
            mutual_ma_per_phi0: c.mutual_ma_per_phi0,
        };
        model.validate()?;
        if !(c.ac_volts_per_phi0 > 0.0) {
            return Err(CliError::Schema(
                "device.coupler.ac_volts_per_phi0 must be positive".into(),
            ));
        }
        for site in &mut dev.couplers {
            site.model = model;
            site.ac_volts_per_phi0 = c.ac_volts_per_phi0;
        }
        Ok(dev)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XyConfig {
    /// `[victim, source]` pairs; all ordered pairs when absent.
    pub pairs: Option<Vec<[usize; 2]>>,
    /// Restricts the all-pairs sweep.
    pub max_distance_mm: Option<f64>,
    #[serde(default = "XyProtocol::default_cross_amplitudes")]
    pub cross_amplitudes_v: Vec<f64>,
    #[serde(default = "default_self_amplitudes")]
    pub self_amplitudes_v: Vec<f64>,
    #[serde(default = "default_gain")]
    pub gain_mhz_per_volt: f64,
    #[serde(default = "default_decay")]
    pub decay_time_ns: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// `[frequency GHz, gain]` points of the drive chain.
    pub transfer_gain: Option<Vec<[f64; 2]>>,
    #[serde(default = "default_bin")]
    pub bin_width_db: f64,
}

fn default_self_amplitudes() -> Vec<f64> {
    XyProtocol::default().self_amplitudes_v
}
fn default_gain() -> f64 {
    250.0
}
fn default_decay() -> f64 {
    10_000.0
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_bin() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxEntry {
    pub victim: usize,
    pub source: usize,
    pub beta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcConfig {
    /// Couplings present in the simulated device.
    pub injected: Vec<FluxEntry>,
    /// `[victim, source]` pairs to measure; the injected pairs when absent.
    pub measure: Option<Vec<[usize; 2]>>,
    #[serde(default = "dc_current_min")]
    pub current_min_ma: f64,
    #[serde(default = "dc_current_max")]
    pub current_max_ma: f64,
    #[serde(default = "dc_current_step")]
    pub current_step_ma: f64,
    #[serde(default = "dc_linewidth")]
    pub linewidth_mhz: f64,
    #[serde(default = "dc_probe_offset")]
    pub probe_offset_mhz: f64,
    #[serde(default = "dc_source_fluxes")]
    pub source_fluxes_phi0: Vec<f64>,
    #[serde(default = "dc_bracket")]
    pub bracket_phi0: f64,
    #[serde(default = "dc_tolerance")]
    pub tolerance_phi0: f64,
    /// Desired flux per coupler; writes compensation currents when present.
    pub compensation_target_phi0: Option<Vec<f64>>,
}

fn dc_current_min() -> f64 {
    -6.0
}
fn dc_current_max() -> f64 {
    6.0
}
fn dc_current_step() -> f64 {
    0.01
}
fn dc_linewidth() -> f64 {
    2.0
}
fn dc_probe_offset() -> f64 {
    10.0
}
fn dc_source_fluxes() -> Vec<f64> {
    vec![-1.0, 0.0, 1.0]
}
fn dc_bracket() -> f64 {
    0.1
}
fn dc_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcConfig {
    pub injected: Vec<FluxEntry>,
    pub measure: Option<Vec<[usize; 2]>>,
    /// Couplers whose line voltage-to-flux factor is calibrated.
    #[serde(default)]
    pub calibrate: Vec<usize>,
    #[serde(default = "ac_voltages")]
    pub calibration_voltages_v: Vec<f64>,
    #[serde(default = "ac_detuning")]
    pub drive_detuning_mhz: f64,
    #[serde(default = "ac_idle_max")]
    pub idle_max_ns: f64,
    #[serde(default = "ac_idle_step")]
    pub idle_step_ns: f64,
    #[serde(default = "ac_dc")]
    pub dc_phi0: f64,
    #[serde(default = "ac_amplitude")]
    pub ac_amplitude_phi0: f64,
    #[serde(default = "ac_frequency")]
    pub ac_frequency_ghz: f64,
    #[serde(default = "ac_source_amplitude")]
    pub source_ac_amplitude_phi0: f64,
    #[serde(default = "ac_phase_points")]
    pub phase_points: usize,
    #[serde(default = "ac_pulse")]
    pub pulse_duration_ns: f64,
    #[serde(default = "ac_step")]
    pub step_ns: f64,
}

fn ac_voltages() -> Vec<f64> {
    (0..=8).map(|k| 0.05 * k as f64).collect()
}
fn ac_detuning() -> f64 {
    5.0
}
fn ac_idle_max() -> f64 {
    1000.0
}
fn ac_idle_step() -> f64 {
    5.0
}
fn ac_dc() -> f64 {
    0.3
}
fn ac_amplitude() -> f64 {
    0.04
}
fn ac_frequency() -> f64 {
    0.2
}
fn ac_source_amplitude() -> f64 {
    0.5
}
fn ac_phase_points() -> usize {
    25
}
fn ac_pulse() -> f64 {
    4.0
}
fn ac_step() -> f64 {
    0.01
}

impl AcConfig {
    pub fn ramsey(&self) -> CliResult<RamseyConfig> {
        if !(self.idle_step_ns > 0.0) || !(self.idle_max_ns > self.idle_step_ns) {
            return Err(CliError::Schema(
                "ac_flux idle grid needs 0 < idle_step_ns < idle_max_ns".into(),
            ));
        }
        if self.phase_points < 3 {
            return Err(CliError::Schema(
                "ac_flux.phase_points must be at least 3".into(),
            ));
        }
        let steps = (self.idle_max_ns / self.idle_step_ns).round() as usize;
        let last = (self.phase_points - 1) as f64;
        let mut cfg = RamseyConfig {
            drive_detuning_mhz: self.drive_detuning_mhz,
            idle_times_ns: (0..=steps).map(|k| self.idle_step_ns * k as f64).collect(),
            phase_offset_grid: (0..self.phase_points)
                .map(|k| 3.0 * std::f64::consts::PI * k as f64 / last)
                .collect(),
            pulse_duration_ns: self.pulse_duration_ns,
            step_ns: self.step_ns,
            source_ac_amplitude_phi0: self.source_ac_amplitude_phi0,
            ..RamseyConfig::default()
        };
        cfg.ac.dc_phi0 = self.dc_phi0;
        cfg.ac.ac_amplitude_phi0 = self.ac_amplitude_phi0;
        cfg.ac.ac_frequency_ghz = self.ac_frequency_ghz;
        Ok(cfg)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateErrorConfig {
    pub n_list: Vec<usize>,
    #[serde(default = "default_pitch")]
    pub pitch_mm: f64,
    pub m_db_per_mm: f64,
    pub lambda0_db: f64,
    #[serde(default = "default_phase_mode")]
    pub phase_mode: String,
    /// Seed for `phase_mode = "random"`.
    #[serde(default = "default_seed")]
    pub phase_seed: u64,
    #[serde(default = "default_gate_time")]
    pub gate_time_ns: f64,
    #[serde(default = "default_shape")]
    pub pulse_shape: String,
    #[serde(default = "default_gate_step")]
    pub step_ns: f64,
    #[serde(default)]
    pub exclude_resonant_sources: bool,
}

fn default_pitch() -> f64 {
    2.0
}
fn default_phase_mode() -> String {
    "zero_phase".into()
}
fn default_gate_time() -> f64 {
    20.0
}
fn default_shape() -> String {
    "sine".into()
}
fn default_gate_step() -> f64 {
    0.125
}

impl GateErrorConfig {
    pub fn phase_mode(&self) -> CliResult<PhaseMode> {
        match self.phase_mode.as_str() {
            "zero_phase" => Ok(PhaseMode::ZeroPhase),
            "propagation_phase" => Ok(PhaseMode::PropagationPhase),
            "random" => Ok(PhaseMode::Random { seed: self.phase_seed }),
            other => Err(CliError::Schema(format!(
                "gate_error_scaling.phase_mode must be zero_phase, propagation_phase or random, got '{other}'"
            ))),
        }
    }

    pub fn pulse_shape(&self) -> CliResult<PulseShape> {
        parse_shape(&self.pulse_shape, "gate_error_scaling.pulse_shape")
    }
}

pub fn parse_shape(s: &str, key: &str) -> CliResult<PulseShape> {
    match s {
        "sine" => Ok(PulseShape::Sine),
        "square" => Ok(PulseShape::Square),
        other => Err(CliError::Schema(format!(
            "{key} must be sine or square, got '{other}'"
        ))),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceFitConfig {
    pub dataset: PathBuf,
    /// Side of the square lattice the dataset indices refer to.
    pub lattice_n: usize,
    #[serde(default = "default_pitch")]
    pub pitch_mm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    pub dataset: PathBuf,
    /// Histogram bin width in the dataset's unit.
    #[serde(default = "default_bin")]
    pub bin_width: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitiveConfig {
    pub self_table: PathBuf,
    pub coupling_table: PathBuf,
    #[serde(default = "default_impedance")]
    pub impedance_ohm: f64,
    #[serde(default = "default_gate_time")]
    pub t_pi_ns: f64,
    #[serde(default = "default_bin")]
    pub bin_width_db: f64,
}

fn default_impedance() -> f64 {
    50.0
}

/// Parsed configuration plus the raw bytes it came from.
pub struct LoadedConfig {
    pub config: RunConfig,
    pub raw: Vec<u8>,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let raw =
            std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&raw)
            .map_err(|e| CliError::Schema(format!("config is not UTF-8: {e}")))?;
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                config.schema_version
            )));
        }
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self {
            config,
            raw,
            base_dir,
        })
    }

    /// Resolves a path from the config relative to the config file.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> CliResult<&'a T> {
    section
        .as_ref()
        .ok_or_else(|| CliError::Schema(format!("missing [{name}] section")))
}
