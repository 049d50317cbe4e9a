use std::collections::BTreeMap;

use rayon::prelude::*;
use xtalk_core::budget::{error_scaling_curve, ErrorScalingConfig, PulseShape};
use xtalk_core::capacitive::{lambda_direct_matrix, photon_loss_rate, pi_pulse_amplitude};
use xtalk_core::fit::{aggregate_stats, Aggregate};
use xtalk_core::io::{
    ingest_crosstalk_dataset, read_capacitances, read_crosstalk_dataset, write_crosstalk_matrix,
    write_flux_matrix, write_results, CrosstalkResult,
};
use xtalk_core::lab::{
    ac_flux_calibration, dc_flux_spectroscopy, derive_seed, measure_ac_crosstalk,
    measure_dc_crosstalk, measure_xy_crosstalk, AcEstimate, DcSettings, GainTable, RabiSettings,
    XyProtocol,
};
use xtalk_core::{
    build_lattice, compensation_currents, distance_fit, qubit_distance, CrosstalkKind,
    CrosstalkMatrix, DistanceFit, FrequencyPlan, LatticeDevice,
};

use crate::bundle::Bundle;
use crate::config::{require, FluxEntry, LoadedConfig};
use crate::error::{CliError, CliResult};
use crate::plot::{self, PlotMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    XyXtalk,
    DcFlux,
    AcFlux,
    GateErrorScaling,
    DistanceFit,
    IngestStats,
    Capacitive,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::XyXtalk => "xy-xtalk",
            Command::DcFlux => "dc-flux",
            Command::AcFlux => "ac-flux",
            Command::GateErrorScaling => "gate-error-scaling",
            Command::DistanceFit => "distance-fit",
            Command::IngestStats => "ingest-stats",
            Command::Capacitive => "capacitive",
        }
    }
}

pub struct Context<'a> {
    pub loaded: &'a LoadedConfig,
    pub config_sha256: String,
    pub created_utc: String,
}

impl Context<'_> {
    fn meta<'b>(&'b self, title: &'b str) -> PlotMeta<'b> {
        PlotMeta {
            title,
            config_sha256: &self.config_sha256,
            created_utc: &self.created_utc,
        }
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn write_table(
    bundle: &mut Bundle,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(bundle.file(name)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_stats(bundle: &mut Bundle, name: &str, agg: &Aggregate, unit: &str) -> CliResult<()> {
    let rows = vec![
        vec!["count".into(), agg.count.to_string(), String::new()],
        vec!["mean".into(), num(agg.mean), unit.into()],
        vec!["std".into(), num(agg.std), unit.into()],
        vec!["min".into(), num(agg.min), unit.into()],
        vec!["max".into(), num(agg.max), unit.into()],
    ];
    write_table(bundle, name, &["statistic", "value", "unit"], &rows)
}

fn write_histogram(bundle: &mut Bundle, name: &str, agg: &Aggregate) -> CliResult<()> {
    let h = &agg.histogram;
    let rows: Vec<Vec<String>> = h
        .counts
        .iter()
        .enumerate()
        .map(|(k, c)| vec![num(h.edges[k]), num(h.edges[k + 1]), c.to_string()])
        .collect();
    write_table(bundle, name, &["lower", "upper", "count"], &rows)
}

fn histogram_svg(
    ctx: &Context,
    bundle: &mut Bundle,
    name: &str,
    title: &str,
    agg: &Aggregate,
    x_label: &str,
) -> CliResult<()> {
    let svg = plot::histogram(
        &ctx.meta(title),
        &agg.histogram.edges,
        &agg.histogram.counts,
        x_label,
    )?;
    bundle.write_bytes(name, svg.as_bytes())
}

fn write_distance_fit(
    ctx: &Context,
    bundle: &mut Bundle,
    points: &[(f64, f64)],
    fit: Option<&DistanceFit>,
) -> CliResult<()> {
    if points.is_empty() {
        return Ok(());
    }
    let averages: Vec<(f64, f64)> = fit
        .map(|f| {
            f.averages
                .iter()
                .map(|a| (a.distance_mm, a.mean_db))
                .collect()
        })
        .unwrap_or_default();
    if let Some(f) = fit {
        let p = &f.pairs;
        let rows = vec![
            vec!["m_dB_per_mm".into(), num(p.slope)],
            vec!["m_std_dB_per_mm".into(), num(p.slope_std)],
            vec!["lambda0_dB".into(), num(p.intercept)],
            vec!["lambda0_std_dB".into(), num(p.intercept_std)],
            vec!["residual_rms_dB".into(), num(p.residual_rms)],
            vec!["pairs".into(), p.n.to_string()],
            vec!["averages_slope_dB_per_mm".into(), num(f.averages_fit.slope)],
            vec![
                "averages_slope_std_dB_per_mm".into(),
                num(f.averages_fit.slope_std),
            ],
        ];
        write_table(bundle, "distance_fit.csv", &["parameter", "value"], &rows)?;
        let avg_rows: Vec<Vec<String>> = f
            .averages
            .iter()
            .map(|a| vec![num(a.distance_mm), num(a.mean_db), a.count.to_string()])
            .collect();
        write_table(
            bundle,
            "distance_averages.csv",
            &["distance_mm", "mean_dB", "count"],
            &avg_rows,
        )?;
    }
    let line = fit.map(|f| (f.pairs.slope, f.pairs.intercept));
    let svg = plot::distance_scatter(
        &ctx.meta("crosstalk versus distance"),
        points,
        &averages,
        line,
    )?;
    bundle.write_bytes("distance.svg", svg.as_bytes())
}

/// Fits when at least two distinct distances are present.
fn maybe_distance_fit(points: &[(f64, f64)]) -> CliResult<Option<DistanceFit>> {
    let first = match points.first() {
        Some(p) => p.0,
        None => return Ok(None),
    };
    if points.iter().all(|p| (p.0 - first).abs() < 1e-6) {
        return Ok(None);
    }
    Ok(Some(distance_fit(points)?))
}

pub fn run(command: Command, ctx: &Context, bundle: &mut Bundle) -> CliResult<()> {
    match command {
        Command::XyXtalk => xy_xtalk(ctx, bundle),
        Command::DcFlux => dc_flux(ctx, bundle),
        Command::AcFlux => ac_flux(ctx, bundle),
        Command::GateErrorScaling => gate_error_scaling(ctx, bundle),
        Command::DistanceFit => distance_fit_command(ctx, bundle),
        Command::IngestStats => ingest_stats(ctx, bundle),
        Command::Capacitive => capacitive(ctx, bundle),
    }
}

fn check_pairs(pairs: &[[usize; 2]], len: usize, what: &str) -> CliResult<()> {
    if pairs.is_empty() {
        return Err(CliError::Schema(format!("no {what} pairs to measure")));
    }
    for &[v, s] in pairs {
        if v >= len || s >= len {
            return Err(CliError::Schema(format!(
                "{what} pair [{v}, {s}] is outside 0..{len}"
            )));
        }
    }
    Ok(())
}

fn xy_xtalk(ctx: &Context, bundle: &mut Bundle) -> CliResult<()> {
    let cfg = require(&ctx.loaded.config.xy_xtalk, "xy_xtalk")?;
    let dev = ctx.loaded.config.device.build()?;
    let n = dev.qubit_count();
    let pairs: Vec<[usize; 2]> = match &cfg.pairs {
        Some(p) => p.clone(),
        None => {
            let mut all = Vec::new();
            for v in 0..n {
                for s in 0..n {
                    if v == s {
                        continue;
                    }
                    let d = qubit_distance(&dev, v, s)?;
                    if cfg.max_distance_mm.is_none_or(|m| d <= m + 1e-9) {
                        all.push([v, s]);
                    }
                }
            }
            all
        }
    };
    check_pairs(&pairs, n, "xy_xtalk")?;
    let transfer = match &cfg.transfer_gain {
        Some(pts) => GainTable::new(pts.iter().map(|p| (p[0], p[1])).collect())?,
        None => GainTable::default(),
    };
    if !(cfg.decay_time_ns > 0.0) {
        return Err(CliError::Schema(
            "xy_xtalk.decay_time_ns must be positive".into(),
        ));
    }
    let base = XyProtocol {
        rabi: RabiSettings {
            gain_mhz_per_volt: cfg.gain_mhz_per_volt,
            decay_time_ns: Some(cfg.decay_time_ns),
            noise_sigma: cfg.noise_sigma,
            seed: cfg.seed,
            transfer,
            ..RabiSettings::default()
        },
        self_amplitudes_v: cfg.self_amplitudes_v.clone(),
        ..XyProtocol::default()
    };
    let measured = pairs
        .par_iter()
        .map(|&[v, s]| {
            let mut p = base.clone();
            p.rabi.seed = derive_seed(cfg.seed, &[v as u64, s as u64]);
            let amps = if v == s {
                &cfg.self_amplitudes_v
            } else {
                &cfg.cross_amplitudes_v
            };
            measure_xy_crosstalk(&dev, v, s, amps, &p).map(|m| (m, p.rabi.seed))
        })
        .collect::<xtalk_core::Result<Vec<_>>>()?;

    let mut matrix = CrosstalkMatrix::new(CrosstalkKind::XyDb, n);
    let mut results = Vec::with_capacity(measured.len());
    let mut points = Vec::new();
    for (m, seed) in &measured {
        results.push(CrosstalkResult {
            victim: m.victim,
            source: m.source,
            value: m.lambda_db,
            unit: "dB".into(),
            protocol: "xy_rabi".into(),
            seed: *seed,
        });
        if m.victim != m.source {
            matrix.set(m.victim, m.source, m.lambda_db)?;
            points.push((qubit_distance(&dev, m.victim, m.source)?, m.lambda_db));
        }
    }
    let slope_rows: Vec<Vec<String>> = measured
        .iter()
        .map(|(m, _)| {
            vec![
                m.victim.to_string(),
                m.source.to_string(),
                num(m.k_cross_mhz_per_v),
                num(m.k_cross_std),
                num(m.k_self_mhz_per_v),
                num(m.k_self_std),
            ]
        })
        .collect();
    let fit = maybe_distance_fit(&points)?;
    let values: Vec<f64> = points.iter().map(|p| p.1).collect();
    let agg = if values.is_empty() {
        None
    } else {
        Some(aggregate_stats(&values, cfg.bin_width_db)?)
    };

    write_results(bundle.file("results.csv")?, &results)?;
    write_crosstalk_matrix(bundle.file("xy_matrix.csv")?, &matrix)?;
    write_table(
        bundle,
        "rabi_slopes.csv",
        &[
            "victim",
            "source",
            "k_cross_MHz_per_V",
            "k_cross_std_MHz_per_V",
            "k_self_MHz_per_V",
            "k_self_std_MHz_per_V",
        ],
        &slope_rows,
    )?;
    if let Some(agg) = &agg {
        write_stats(bundle, "stats.csv", agg, "dB")?;
        histogram_svg(
            ctx,
            bundle,
            "histogram.svg",
            "xy crosstalk",
            agg,
            "crosstalk (dB)",
        )?;
    }
    write_distance_fit(ctx, bundle, &points, fit.as_ref())
}

fn flux_pairs(injected: &[FluxEntry], measure: &Option<Vec<[usize; 2]>>) -> Vec<[usize; 2]> {
    measure
        .clone()
        .unwrap_or_else(|| injected.iter().map(|e| [e.victim, e.source]).collect())
}

fn dc_flux(ctx: &Context, bundle: &mut Bundle) -> CliResult<()> {
    let cfg = require(&ctx.loaded.config.dc_flux, "dc_flux")?;
    let mut dev = ctx.loaded.config.device.build()?;
    for e in &cfg.injected {
        dev.set_dc_beta(e.victim, e.source, e.beta)?;
    }
    let couplers = dev.couplers.len();
    let pairs = flux_pairs(&cfg.injected, &cfg.measure);
    check_pairs(&pairs, couplers, "dc_flux")?;
    if let Some(t) = &cfg.compensation_target_phi0 {
        if t.len() != couplers {
            return Err(CliError::Schema(format!(
                "dc_flux.compensation_target_phi0 has {} entries; the device has {couplers} couplers",
                t.len()
            )));
        }
    }
    if !(cfg.current_step_ma > 0.0) || !(cfg.current_max_ma > cfg.current_min_ma) {
        return Err(CliError::Schema(
            "dc_flux current grid needs step > 0 and max > min".into(),
        ));
    }
    let steps = ((cfg.current_max_ma - cfg.current_min_ma) / cfg.current_step_ma).round() as usize;
    if steps > 1_000_000 {
        return Err(CliError::Schema(format!(
            "dc_flux current grid has {steps} points; limit is 1e6"
        )));
    }
    let settings = DcSettings {
        current_grid_ma: (0..=steps)
            .map(|k| cfg.current_min_ma + cfg.current_step_ma * k as f64)
            .collect(),
        probe_grid_ghz: None,
        linewidth_mhz: cfg.linewidth_mhz,
        probe_offset_mhz: cfg.probe_offset_mhz,
        source_fluxes_phi0: cfg.source_fluxes_phi0.clone(),
        bracket_phi0: cfg.bracket_phi0,
        tolerance_phi0: cfg.tolerance_phi0,
    };
    let measured = pairs
        .par_iter()
        .map(|&[v, s]| measure_dc_crosstalk(&dev, v, s, &settings))
        .collect::<xtalk_core::Result<Vec<_>>>()?;

    let first = pairs[0][0];
    let q = dev.sites[dev.probe_qubit(first)?].frequency_ghz;
    let probe: Vec<f64> = (0..=300).map(|k| q - 0.15 + 0.001 * k as f64).collect();
    let (map, _) = dc_flux_spectroscopy(
        &dev,
        first,
        &settings.current_grid_ma,
        &probe,
        cfg.linewidth_mhz,
    )?;

    let mut matrix = CrosstalkMatrix::new(CrosstalkKind::FluxSigned, couplers);
    let mut results = Vec::new();
    let mut restoring = Vec::new();
    let mut calibrations = BTreeMap::new();
    for m in &measured {
        results.push(CrosstalkResult {
            victim: m.victim,
            source: m.source,
            value: m.beta_signed,
            unit: "flux_fraction".into(),
            protocol: "dc_avoided_crossing".into(),
            seed: 0,
        });
        if m.victim != m.source {
            matrix.set(m.victim, m.source, m.beta_signed)?;
        }
        for &(s, r) in &m.restoring {
            restoring.push(vec![
                m.victim.to_string(),
                m.source.to_string(),
                num(s),
                num(r),
            ]);
        }
        let c = &m.calibration;
        calibrations.entry(c.coupler).or_insert_with(|| {
            vec![
                c.coupler.to_string(),
                c.probe_qubit.to_string(),
                num(c.period_ma),
                num(c.offset_phi0),
                num(c.zero_flux_current_ma),
                num(m.bias_current_ma),
            ]
        });
    }
    let compensation = match &cfg.compensation_target_phi0 {
        Some(target) => {
            let mutual = ctx.loaded.config.device.coupler.mutual_ma_per_phi0;
            let comp = compensation_currents(&matrix, target, mutual)?;
            Some(
                (0..couplers)
                    .map(|k| {
                        vec![
                            k.to_string(),
                            num(target[k]),
                            num(comp.applied_phi0[k]),
                            num(comp.currents_ma[k]),
                        ]
                    })
                    .collect::<Vec<_>>(),
            )
        }
        None => None,
    };

    write_results(bundle.file("results.csv")?, &results)?;
    write_flux_matrix(bundle.file("flux_matrix.csv")?, &matrix)?;
    write_table(
        bundle,
        "restoring.csv",
        &[
            "victim",
            "source",
            "source_flux_phi0",
            "restoring_flux_phi0",
        ],
        &restoring,
    )?;
    let cal_rows: Vec<Vec<String>> = calibrations.into_values().collect();
    write_table(
        bundle,
        "calibration.csv",
        &[
            "coupler",
            "probe_qubit",
            "period_mA",
            "offset_phi0",
            "zero_flux_current_mA",
            "bias_current_mA",
        ],
        &cal_rows,
    )?;
    if let Some(rows) = compensation {
        write_table(
            bundle,
            "compensation.csv",
            &["coupler", "target_phi0", "applied_phi0", "current_mA"],
            &rows,
        )?;
    }
    let svg = plot::heat_map(
        &ctx.meta(&format!("coupler {first} spectroscopy")),
        &map.currents_ma,
        &map.probe_ghz,
        &map.response,
        "bias current (mA)",
        "probe frequency (GHz)",
    )?;
    bundle.write_bytes("spectroscopy.svg", svg.as_bytes())
}

fn ac_flux(ctx: &Context, bundle: &mut Bundle) -> CliResult<()> {
    let cfg = require(&ctx.loaded.config.ac_flux, "ac_flux")?;
    let ramsey = cfg.ramsey()?;
    let mut dev = ctx.loaded.config.device.build()?;
    for e in &cfg.injected {
        dev.set_ac_beta(e.victim, e.source, e.beta)?;
    }
    let couplers = dev.couplers.len();
    let pairs = flux_pairs(&cfg.injected, &cfg.measure);
    check_pairs(&pairs, couplers, "ac_flux")?;
    let calibrations = cfg
        .calibrate
        .iter()
        .map(|&c| ac_flux_calibration(&dev, c, &cfg.calibration_voltages_v, &ramsey))
        .collect::<xtalk_core::Result<Vec<_>>>()?;
    let measured = pairs
        .iter()
        .map(|&[v, s]| measure_ac_crosstalk(&dev, v, s, &ramsey))
        .collect::<xtalk_core::Result<Vec<_>>>()?;

    let mut matrix = CrosstalkMatrix::new(CrosstalkKind::FluxSigned, couplers);
    let mut results = Vec::new();
    let mut sweep = Vec::new();
    for m in &measured {
        let protocol = match m.beta {
            AcEstimate::Value(b) => {
                if m.victim != m.source {
                    matrix.set(m.victim, m.source, b)?;
                }
                "ac_ramsey"
            }
            AcEstimate::UpperBound(_) => "ac_ramsey_upper_bound",
        };
        results.push(CrosstalkResult {
            victim: m.victim,
            source: m.source,
            value: m.beta.value(),
            unit: "flux_fraction".into(),
            protocol: protocol.into(),
            seed: 0,
        });
        for &(phase, f) in &m.sweep {
            sweep.push(vec![
                m.victim.to_string(),
                m.source.to_string(),
                num(phase),
                num(f),
            ]);
        }
    }
    let swing_rows: Vec<Vec<String>> = measured
        .iter()
        .map(|m| {
            vec![
                m.victim.to_string(),
                m.source.to_string(),
                num(m.swing_mhz),
                num(m.resolution_mhz),
                num(m.gamma_phi0_per_mhz),
            ]
        })
        .collect();

    write_results(bundle.file("results.csv")?, &results)?;
    write_flux_matrix(bundle.file("ac_flux_matrix.csv")?, &matrix)?;
    write_table(
        bundle,
        "sweep.csv",
        &["victim", "source", "phase_offset_rad", "fringe_MHz"],
        &sweep,
    )?;
    write_table(
        bundle,
        "swing.csv",
        &[
            "victim",
            "source",
            "swing_MHz",
            "resolution_MHz",
            "gamma_phi0_per_MHz",
        ],
        &swing_rows,
    )?;
    if !calibrations.is_empty() {
        let rows: Vec<Vec<String>> = calibrations
            .iter()
            .map(|c| {
                vec![
                    c.coupler.to_string(),
                    num(c.k_volts_per_phi0),
                    num(c.residual_rms_mhz),
                ]
            })
            .collect();
        write_table(
            bundle,
            "calibration.csv",
            &["coupler", "k_V_per_phi0", "residual_rms_MHz"],
            &rows,
        )?;
    }
    Ok(())
}

fn gate_error_scaling(ctx: &Context, bundle: &mut Bundle) -> CliResult<()> {
    let cfg = require(&ctx.loaded.config.gate_error_scaling, "gate_error_scaling")?;
    if cfg.n_list.is_empty() {
        return Err(CliError::Schema(
            "gate_error_scaling.n_list is empty".into(),
        ));
    }
    let mut base = ErrorScalingConfig {
        n: cfg.n_list[0],
        pitch_mm: cfg.pitch_mm,
        phase_mode: cfg.phase_mode()?,
        gate_time_ns: cfg.gate_time_ns,
        pulse_shape: cfg.pulse_shape()?,
        step_ns: cfg.step_ns,
        plan: ctx.loaded.config.device.plan()?,
        exclude_resonant_sources: cfg.exclude_resonant_sources,
        ..ErrorScalingConfig::default()
    };
    base.model.m_db_per_mm = cfg.m_db_per_mm;
    base.model.lambda0_db = cfg.lambda0_db;
    let curve = error_scaling_curve(&base, &cfg.n_list)?;

    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|r| {
            vec![
                r.config.n.to_string(),
                r.qubit_count().to_string(),
                num(r.mean_error),
                num(r.mean_fidelity()),
            ]
        })
        .collect();
    let per_freq: Vec<Vec<String>> = curve
        .iter()
        .flat_map(|r| {
            r.per_frequency.iter().map(move |e| {
                vec![
                    r.config.n.to_string(),
                    e.subgroup.label().to_string(),
                    num(e.frequency_ghz),
                    num(e.error),
                ]
            })
        })
        .collect();
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .map(|r| (r.qubit_count() as f64, r.mean_error))
        .collect();
    let svg = plot::error_vs_count(
        &ctx.meta(&format!("gate error, {}", base.phase_mode.label())),
        &pts,
    )?;
    write_table(
        bundle,
        "error_vs_n.csv",
        &["n", "qubits", "mean_error", "mean_fidelity"],
        &rows,
    )?;
    write_table(
        bundle,
        "per_frequency.csv",
        &["n", "subgroup", "frequency_GHz", "error"],
        &per_freq,
    )?;
    bundle.write_bytes("error_vs_n.svg", svg.as_bytes())
}

fn distance_fit_command(ctx: &Context, bundle: &mut Bundle) -> CliResult<()> {
    let cfg = require(&ctx.loaded.config.distance_fit, "distance_fit")?;
    let path = ctx.loaded.resolve(&cfg.dataset);
    let file =
        std::fs::File::open(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let ds = read_crosstalk_dataset(file)?;
    if ds.matrix.kind() != CrosstalkKind::XyDb {
        return Err(CliError::Schema("distance fit needs a dB dataset".into()));
    }
    let grid: LatticeDevice =
        build_lattice(cfg.lattice_n, cfg.pitch_mm, &FrequencyPlan::default())?;
    let points = ds
        .entries
        .iter()
        .map(|&(v, s, x)| qubit_distance(&grid, v, s).map(|d| (d, x)))
        .collect::<xtalk_core::Result<Vec<_>>>()?;
    let fit = distance_fit(&points)?;
    let rows: Vec<Vec<String>> = ds
        .entries
        .iter()
        .zip(&points)
        .map(|(&(v, s, _), &(d, x))| vec![v.to_string(), s.to_string(), num(d), num(x)])
        .collect();
    write_table(
        bundle,
        "points.csv",
        &["victim", "source", "distance_mm", "value_dB"],
        &rows,
    )?;
    write_distance_fit(ctx, bundle, &points, Some(&fit))
}

fn ingest_stats(ctx: &Context, bundle: &mut Bundle) -> CliResult<()> {
    let cfg = require(&ctx.loaded.config.ingest_stats, "ingest_stats")?;
    let path = ctx.loaded.resolve(&cfg.dataset);
    let (ds, agg) = ingest_crosstalk_dataset(&path, cfg.bin_width)?;
    let unit = ds.matrix.kind().unit();
    write_stats(bundle, "stats.csv", &agg, unit)?;
    write_histogram(bundle, "histogram.csv", &agg)?;
    write_crosstalk_matrix(bundle.file("matrix.csv")?, &ds.matrix)?;
    let label = format!("value ({unit})");
    histogram_svg(
        ctx,
        bundle,
        "histogram.svg",
        "dataset histogram",
        &agg,
        &label,
    )
}

fn capacitive(ctx: &Context, bundle: &mut Bundle) -> CliResult<()> {
    let cfg = require(&ctx.loaded.config.capacitive, "capacitive")?;
    let open = |p: &std::path::Path| {
        let path = ctx.loaded.resolve(p);
        std::fs::File::open(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    };
    let caps = read_capacitances(
        open(&cfg.self_table)?,
        open(&cfg.coupling_table)?,
        cfg.impedance_ohm,
    )?;
    let matrix = lambda_direct_matrix(&caps)?;
    let values: Vec<f64> = matrix.off_diagonal().iter().map(|e| e.2).collect();
    if values.is_empty() {
        return Err(CliError::Schema(
            "capacitance tables hold no cross couplings".into(),
        ));
    }
    let agg = aggregate_stats(&values, cfg.bin_width_db)?;
    let drive: Vec<Vec<String>> = (0..caps.len())
        .map(|q| {
            let kappa = photon_loss_rate(
                caps.impedance_ohm,
                caps.coupling(q, q),
                caps.frequency_ghz[q],
                caps.self_ff[q],
            );
            vec![
                q.to_string(),
                num(kappa),
                num(pi_pulse_amplitude(kappa, PulseShape::Square, cfg.t_pi_ns)),
                num(pi_pulse_amplitude(kappa, PulseShape::Sine, cfg.t_pi_ns)),
            ]
        })
        .collect();
    write_crosstalk_matrix(bundle.file("lambda_direct.csv")?, &matrix)?;
    write_table(
        bundle,
        "drive.csv",
        &[
            "qubit",
            "kappa_per_ns",
            "pi_amplitude_square_per_sqrt_ns",
            "pi_amplitude_sine_per_sqrt_ns",
        ],
        &drive,
    )?;
    write_stats(bundle, "stats.csv", &agg, "dB")?;
    histogram_svg(
        ctx,
        bundle,
        "histogram.svg",
        "direct capacitive crosstalk",
        &agg,
        "crosstalk (dB)",
    )?;
    Ok(())
}
