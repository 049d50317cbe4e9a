use serde::{Deserialize, Serialize};

use crate::crosstalk::{model_crosstalk_db, CrosstalkKind, CrosstalkMatrix, LinearCrosstalkModel};
use crate::error::{Error, Result};
use crate::flux::CouplerModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subgroup {
    A1,
    A2,
    A3,
    A4,
    B1,
    B2,
    B3,
    B4,
}

impl Subgroup {
    pub fn is_a(self) -> bool {
        matches!(
            self,
            Subgroup::A1 | Subgroup::A2 | Subgroup::A3 | Subgroup::A4
        )
    }

    /// Position 0..4 within its subgroup.
    pub fn slot(self) -> usize {
        match self {
            Subgroup::A1 | Subgroup::B1 => 0,
            Subgroup::A2 | Subgroup::B2 => 1,
            Subgroup::A3 | Subgroup::B3 => 2,
            Subgroup::A4 | Subgroup::B4 => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Subgroup::A1 => "a1",
            Subgroup::A2 => "a2",
            Subgroup::A3 => "a3",
            Subgroup::A4 => "a4",
            Subgroup::B1 => "b1",
            Subgroup::B2 => "b2",
            Subgroup::B3 => "b3",
            Subgroup::B4 => "b4",
        }
    }

    /// Tiling of the 2x4 unit cell, indexed by `(row mod 2, col mod 4)`.
    pub fn at_cell(row: usize, col: usize) -> Subgroup {
        const CELL: [[Subgroup; 4]; 2] = [
            [Subgroup::A1, Subgroup::B1, Subgroup::A2, Subgroup::B2],
            [Subgroup::B3, Subgroup::A4, Subgroup::B4, Subgroup::A3],
        ];
        CELL[row % 2][col % 4]
    }

    pub const ALL: [Subgroup; 8] = [
        Subgroup::A1,
        Subgroup::A2,
        Subgroup::A3,
        Subgroup::A4,
        Subgroup::B1,
        Subgroup::B2,
        Subgroup::B3,
        Subgroup::B4,
    ];

    /// Unit-cell coordinates `(row, col)` holding this label.
    pub fn cell_position(self) -> (usize, usize) {
        for r in 0..2 {
            for c in 0..4 {
                if Subgroup::at_cell(r, c) == self {
                    return (r, c);
                }
            }
        }
        unreachable!("every label appears once in the unit cell")
    }
}

/// Eight design frequencies, four per subgroup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPlan {
    pub a_ghz: [f64; 4],
    pub b_ghz: [f64; 4],
    pub a_anharmonicity_mhz: f64,
    pub b_anharmonicity_mhz: f64,
}

impl Default for FrequencyPlan {
    fn default() -> Self {
        Self {
            a_ghz: [4.20, 4.26, 4.32, 4.38],
            b_ghz: [4.80, 4.86, 4.92, 4.98],
            a_anharmonicity_mhz: -240.0,
            b_anharmonicity_mhz: -200.0,
        }
    }
}

impl FrequencyPlan {
    /// Plan from a flat list: the first four are subgroup a, the last four subgroup b.
    pub fn from_frequencies(freqs_ghz: &[f64]) -> Result<Self> {
        if freqs_ghz.len() != 8 {
            return Err(Error::Config(format!(
                "frequency plan needs 8 frequencies, got {}",
                freqs_ghz.len()
            )));
        }
        let plan = Self {
            a_ghz: [freqs_ghz[0], freqs_ghz[1], freqs_ghz[2], freqs_ghz[3]],
            b_ghz: [freqs_ghz[4], freqs_ghz[5], freqs_ghz[6], freqs_ghz[7]],
            ..Self::default()
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        for f in self.a_ghz.iter().chain(&self.b_ghz) {
            if !(*f > 0.0) || !f.is_finite() {
                return Err(Error::Config(format!(
                    "plan frequencies must be positive and finite, got {f}"
                )));
            }
        }
        Ok(())
    }

    pub fn frequency(&self, label: Subgroup) -> f64 {
        if label.is_a() {
            self.a_ghz[label.slot()]
        } else {
            self.b_ghz[label.slot()]
        }
    }

    pub fn anharmonicity(&self, label: Subgroup) -> f64 {
        if label.is_a() {
            self.a_anharmonicity_mhz
        } else {
            self.b_anharmonicity_mhz
        }
    }

    /// Smallest |f_a - f_b| over all pairs of cells that touch in the tiling.
    pub fn min_neighbour_detuning_ghz(&self) -> f64 {
        let mut min = f64::INFINITY;
        for r in 0..2 {
            for c in 0..4 {
                let f = self.frequency(Subgroup::at_cell(r, c));
                for (dr, dc) in [(1, 0), (0, 1)] {
                    let g = self.frequency(Subgroup::at_cell(r + dr, c + dc));
                    min = min.min((f - g).abs());
                }
            }
        }
        min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitSite {
    pub index: usize,
    pub row: usize,
    pub col: usize,
    pub position_mm: (f64, f64),
    pub frequency_ghz: f64,
    pub subgroup: Subgroup,
    pub anharmonicity_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplerSite {
    pub index: usize,
    /// Endpoint qubit indices, lower index first.
    pub qubits: (usize, usize),
    pub model: CouplerModel,
    /// Voltage amplitude per flux quantum of the coupler's ac line.
    pub ac_volts_per_phi0: f64,
}

#[derive(Debug, Clone)]
pub struct LatticeDevice {
    pub n: usize,
    pub pitch_mm: f64,
    pub sites: Vec<QubitSite>,
    pub couplers: Vec<CouplerSite>,
    pub xy_model: LinearCrosstalkModel,
    /// Explicit drive crosstalk; overrides `xy_model` for entries that are set.
    pub xy_matrix: Option<CrosstalkMatrix>,
    /// dc flux crosstalk between coupler flux lines, `(victim coupler, source line)`.
    pub flux_matrix: Option<CrosstalkMatrix>,
    /// ac flux crosstalk between coupler flux lines.
    pub ac_flux_matrix: Option<CrosstalkMatrix>,
}

pub fn build_lattice(n: usize, pitch_mm: f64, plan: &FrequencyPlan) -> Result<LatticeDevice> {
    build_lattice_with_origin(n, pitch_mm, plan, (0, 0))
}

/// Lattice whose tiling is shifted so that site `(0, 0)` takes unit-cell position `origin`.
pub fn build_lattice_with_origin(
    n: usize,
    pitch_mm: f64,
    plan: &FrequencyPlan,
    origin: (usize, usize),
) -> Result<LatticeDevice> {
    if n == 0 {
        return Err(Error::Config("lattice side must be at least 1".into()));
    }
    if !(pitch_mm > 0.0) || !pitch_mm.is_finite() {
        return Err(Error::Config(format!(
            "pitch must be positive, got {pitch_mm}"
        )));
    }
    plan.validate()?;

    let mut sites = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let subgroup = Subgroup::at_cell(row + origin.0, col + origin.1);
            sites.push(QubitSite {
                index: row * n + col,
                row,
                col,
                position_mm: (col as f64 * pitch_mm, row as f64 * pitch_mm),
                frequency_ghz: plan.frequency(subgroup),
                subgroup,
                anharmonicity_mhz: plan.anharmonicity(subgroup),
            });
        }
    }

    let mut couplers = Vec::with_capacity(2 * n * (n - 1));
    for row in 0..n {
        for col in 0..n {
            let i = row * n + col;
            if col + 1 < n {
                couplers.push((i, i + 1));
            }
            if row + 1 < n {
                couplers.push((i, i + n));
            }
        }
    }
    let couplers = couplers
        .into_iter()
        .enumerate()
        .map(|(index, qubits)| CouplerSite {
            index,
            qubits,
            model: CouplerModel::default(),
            ac_volts_per_phi0: 8.0,
        })
        .collect();

    Ok(LatticeDevice {
        n,
        pitch_mm,
        sites,
        couplers,
        xy_model: LinearCrosstalkModel::default(),
        xy_matrix: None,
        flux_matrix: None,
        ac_flux_matrix: None,
    })
}

pub fn qubit_distance(device: &LatticeDevice, i: usize, j: usize) -> Result<f64> {
    let a = device.site(i)?;
    let b = device.site(j)?;
    let dx = a.position_mm.0 - b.position_mm.0;
    let dy = a.position_mm.1 - b.position_mm.1;
    Ok(dx.hypot(dy))
}

impl LatticeDevice {
    pub fn qubit_count(&self) -> usize {
        self.sites.len()
    }

    pub fn site(&self, i: usize) -> Result<&QubitSite> {
        self.sites.get(i).ok_or(Error::IndexOutOfRange {
            what: "qubit sites",
            index: i,
            len: self.sites.len(),
        })
    }

    pub fn coupler(&self, c: usize) -> Result<&CouplerSite> {
        self.couplers.get(c).ok_or(Error::IndexOutOfRange {
            what: "couplers",
            index: c,
            len: self.couplers.len(),
        })
    }

    /// Index of the center site.
    pub fn center(&self) -> usize {
        (self.n / 2) * self.n + self.n / 2
    }

    /// Qubit used to probe a coupler: the lower-frequency endpoint.
    pub fn probe_qubit(&self, c: usize) -> Result<usize> {
        let (a, b) = self.coupler(c)?.qubits;
        Ok(
            if self.sites[a].frequency_ghz <= self.sites[b].frequency_ghz {
                a
            } else {
                b
            },
        )
    }

    /// Injected drive crosstalk in dB for `(victim, source)`.
    pub fn xy_crosstalk_db(&self, victim: usize, source: usize) -> Result<f64> {
        let d = qubit_distance(self, victim, source)?;
        if victim == source {
            return Ok(0.0);
        }
        if let Some(m) = &self.xy_matrix {
            if m.is_set(victim, source) {
                return m.get(victim, source);
            }
        }
        Ok(model_crosstalk_db(&self.xy_model, d))
    }

    fn flux_entry(
        m: &Option<CrosstalkMatrix>,
        n: usize,
        victim: usize,
        source: usize,
    ) -> Result<f64> {
        for (idx, what) in [(victim, "couplers"), (source, "couplers")] {
            if idx >= n {
                return Err(Error::IndexOutOfRange {
                    what,
                    index: idx,
                    len: n,
                });
            }
        }
        if victim == source {
            return Ok(1.0);
        }
        Ok(match m {
            Some(m) if m.is_set(victim, source) => m.get(victim, source)?,
            _ => 0.0,
        })
    }

    /// Injected signed dc flux crosstalk; unset entries are zero.
    pub fn dc_beta(&self, victim: usize, source: usize) -> Result<f64> {
        Self::flux_entry(&self.flux_matrix, self.couplers.len(), victim, source)
    }

    /// Injected signed ac flux crosstalk; unset entries are zero.
    pub fn ac_beta(&self, victim: usize, source: usize) -> Result<f64> {
        Self::flux_entry(&self.ac_flux_matrix, self.couplers.len(), victim, source)
    }

    pub fn set_dc_beta(&mut self, victim: usize, source: usize, beta: f64) -> Result<()> {
        let n = self.couplers.len();
        self.flux_matrix
            .get_or_insert_with(|| CrosstalkMatrix::new(CrosstalkKind::FluxSigned, n))
            .set(victim, source, beta)
    }

    pub fn set_ac_beta(&mut self, victim: usize, source: usize, beta: f64) -> Result<()> {
        let n = self.couplers.len();
        self.ac_flux_matrix
            .get_or_insert_with(|| CrosstalkMatrix::new(CrosstalkKind::FluxSigned, n))
            .set(victim, source, beta)
    }

    pub fn set_xy_db(&mut self, victim: usize, source: usize, lambda_db: f64) -> Result<()> {
        let n = self.sites.len();
        self.xy_matrix
            .get_or_insert_with(|| CrosstalkMatrix::new(CrosstalkKind::XyDb, n))
            .set(victim, source, lambda_db)
    }

    /// Applies one coupler model to every coupler.
    pub fn with_coupler_model(mut self, model: CouplerModel) -> Self {
        for c in &mut self.couplers {
            c.model = model;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cell_has_every_label_once() {
        let mut seen = std::collections::HashSet::new();
        for r in 0..2 {
            for c in 0..4 {
                assert!(seen.insert(Subgroup::at_cell(r, c)));
            }
        }
        for s in Subgroup::ALL {
            let (r, c) = s.cell_position();
            assert_eq!(Subgroup::at_cell(r, c), s);
        }
    }

    #[test]
    fn plan_rejects_bad_input() {
        assert!(FrequencyPlan::from_frequencies(&[4.2; 7]).is_err());
        let mut f = vec![4.2; 8];
        f[5] = 0.0;
        assert!(FrequencyPlan::from_frequencies(&f).is_err());
    }

    #[test]
    fn default_plan_minimum_detuning() {
        let d = FrequencyPlan::default().min_neighbour_detuning_ghz();
        assert!((d - 0.42).abs() < 1e-12);
    }

    #[test]
    fn probe_qubit_is_lower_frequency() {
        let dev = build_lattice(3, 2.0, &FrequencyPlan::default()).unwrap();
        for c in 0..dev.couplers.len() {
            let p = dev.probe_qubit(c).unwrap();
            assert!(dev.sites[p].subgroup.is_a());
        }
    }
}
