//! CSV formats for matrices, datasets, traces, fits and capacitances.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capacitive::CapacitanceSet;
use crate::crosstalk::{CrosstalkKind, CrosstalkMatrix};
use crate::error::{Error, Result};
use crate::fit::{aggregate_stats, Aggregate, SinusoidFit};

fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes set off-diagonal entries as `victim,source,value,unit`.
pub fn write_crosstalk_matrix<W: Write>(out: W, m: &CrosstalkMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["victim", "source", "value", "unit"])?;
    for (v, s, x) in m.off_diagonal() {
        w.write_record([
            v.to_string(),
            s.to_string(),
            num(x),
            m.kind().unit().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a flux matrix as `victim,source,beta_signed`.
pub fn write_flux_matrix<W: Write>(out: W, m: &CrosstalkMatrix) -> Result<()> {
    if m.kind() != CrosstalkKind::FluxSigned {
        return Err(Error::Contract(
            "flux matrix writer needs a signed flux matrix".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["victim", "source", "beta_signed"])?;
    for (v, s, x) in m.off_diagonal() {
        w.write_record([v.to_string(), s.to_string(), num(x)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct DatasetRow {
    victim: usize,
    source: usize,
    value: f64,
    unit: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkDataset {
    pub matrix: CrosstalkMatrix,
    /// Rows in file order as `(victim, source, value)`.
    pub entries: Vec<(usize, usize, f64)>,
}

impl CrosstalkDataset {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.2).collect()
    }
}

/// Parses a `victim,source,value,unit` dataset.
pub fn read_crosstalk_dataset<R: Read>(input: R) -> Result<CrosstalkDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut kind: Option<CrosstalkKind> = None;
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (line, row) in rdr.deserialize::<DatasetRow>().enumerate() {
        let row = row.map_err(|e| Error::Data(format!("row {}: {e}", line + 2)))?;
        let k = CrosstalkKind::from_unit(&row.unit)?;
        match kind {
            None => kind = Some(k),
            Some(prev) if prev != k => {
                return Err(Error::Data(format!(
                    "mixed units: '{}' after '{}' on row {}",
                    row.unit,
                    prev.unit(),
                    line + 2
                )))
            }
            _ => {}
        }
        if row.victim == row.source {
            return Err(Error::Data(format!(
                "diagonal entry ({0}, {0}) on row {1}",
                row.victim,
                line + 2
            )));
        }
        if !row.value.is_finite() {
            return Err(Error::Data(format!("non-finite value on row {}", line + 2)));
        }
        if !seen.insert((row.victim, row.source)) {
            return Err(Error::Data(format!(
                "duplicate pair ({}, {}) on row {}",
                row.victim,
                row.source,
                line + 2
            )));
        }
        entries.push((row.victim, row.source, row.value));
    }
    let Some(kind) = kind else {
        return Err(Error::Data("dataset has no rows".into()));
    };
    let size = entries.iter().map(|e| e.0.max(e.1)).max().unwrap_or(0) + 1;
    let mut matrix = CrosstalkMatrix::new(kind, size);
    for &(v, s, x) in &entries {
        matrix.set(v, s, x)?;
    }
    Ok(CrosstalkDataset { matrix, entries })
}

/// Dataset plus its summary statistics.
pub fn ingest_crosstalk_dataset(
    path: &Path,
    bin_width: f64,
) -> Result<(CrosstalkDataset, Aggregate)> {
    let ds = read_crosstalk_dataset(std::fs::File::open(path)?)?;
    let stats = aggregate_stats(&ds.values(), bin_width)?;
    Ok((ds, stats))
}

pub fn write_trace<W: Write>(out: W, times_ns: &[f64], population: &[f64]) -> Result<()> {
    if times_ns.len() != population.len() {
        return Err(Error::DimensionMismatch {
            expected: times_ns.len(),
            found: population.len(),
        });
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_ns", "population"])?;
    for (t, p) in times_ns.iter().zip(population) {
        w.write_record([num(*t), num(*p)])?;
    }
    w.flush()?;
    Ok(())
}

/// Named fit parameters, one per row, including the residual.
pub fn write_fit<W: Write>(out: W, fit: &SinusoidFit) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["parameter", "value"])?;
    for (name, v) in [
        ("frequency_GHz", fit.frequency_ghz),
        ("frequency_std_GHz", fit.frequency_std_ghz),
        ("decay_time_ns", fit.decay_time_ns),
        ("amplitude", fit.amplitude),
        ("offset", fit.offset),
        ("phase_rad", fit.phase_rad),
        ("residual_rms", fit.residual_rms),
    ] {
        w.write_record([name.to_string(), num(v)])?;
    }
    w.flush()?;
    Ok(())
}

/// One measured crosstalk coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkResult {
    pub victim: usize,
    pub source: usize,
    pub value: f64,
    pub unit: String,
    pub protocol: String,
    pub seed: u64,
}

pub fn write_results<W: Write>(out: W, rows: &[CrosstalkResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["victim", "source", "value", "unit", "protocol", "seed"])?;
    for r in rows {
        w.write_record([
            r.victim.to_string(),
            r.source.to_string(),
            num(r.value),
            r.unit.clone(),
            r.protocol.clone(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct SelfRow {
    qubit: usize,
    #[serde(rename = "C_fF")]
    c_ff: f64,
    #[serde(rename = "frequency_GHz")]
    frequency_ghz: f64,
}

#[derive(Debug, Deserialize)]
struct CouplingRow {
    i: usize,
    j: usize,
    #[serde(rename = "C_fF")]
    c_ff: f64,
}

/// Reads a self table `qubit,C_fF,frequency_GHz` and a coupling table
/// `i,j,C_fF` (qubit `i` to line `j`); absent couplings are zero.
pub fn read_capacitances<R1: Read, R2: Read>(
    self_table: R1,
    coupling_table: R2,
    impedance_ohm: f64,
) -> Result<CapacitanceSet> {
    let mut selfs = BTreeMap::new();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(self_table);
    for row in rdr.deserialize::<SelfRow>() {
        let row = row.map_err(|e| Error::Data(format!("self-capacitance table: {e}")))?;
        if selfs
            .insert(row.qubit, (row.c_ff, row.frequency_ghz))
            .is_some()
        {
            return Err(Error::Data(format!(
                "duplicate qubit {} in self-capacitance table",
                row.qubit
            )));
        }
    }
    let n = selfs.len();
    if n == 0 {
        return Err(Error::Data("self-capacitance table is empty".into()));
    }
    if selfs.keys().copied().ne(0..n) {
        return Err(Error::Data(
            "self-capacitance table must list qubits 0..n exactly once".into(),
        ));
    }
    let mut coupling = vec![0.0; n * n];
    let mut seen = HashSet::new();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(coupling_table);
    for row in rdr.deserialize::<CouplingRow>() {
        let row = row.map_err(|e| Error::Data(format!("coupling table: {e}")))?;
        if row.i >= n || row.j >= n {
            return Err(Error::Data(format!(
                "coupling ({}, {}) refers to an unknown qubit",
                row.i, row.j
            )));
        }
        if !seen.insert((row.i, row.j)) {
            return Err(Error::Data(format!(
                "duplicate coupling ({}, {})",
                row.i, row.j
            )));
        }
        coupling[row.i * n + row.j] = row.c_ff;
    }
    CapacitanceSet::new(
        selfs.values().map(|v| v.0).collect(),
        selfs.values().map(|v| v.1).collect(),
        coupling,
        impedance_ohm,
    )
}
