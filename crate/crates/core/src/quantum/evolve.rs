use num_complex::Complex64;

use super::operator::OperatorMatrix;
use super::state::{raw_expectation, StateVector};
use crate::error::{Error, Result};

type RealEnvelope = Box<dyn Fn(f64) -> f64 + Send + Sync>;
type ComplexEnvelope = Box<dyn Fn(f64) -> Complex64 + Send + Sync>;

enum Term {
    Static(OperatorMatrix),
    Real(OperatorMatrix, RealEnvelope),
    /// `f(t) * op + conj(f(t)) * op^dagger`.
    Pair(OperatorMatrix, OperatorMatrix, ComplexEnvelope),
}

/// Sum of operator terms with scalar envelopes, Hermitian by construction.
pub struct TimeDependentHamiltonian {
    dim: usize,
    terms: Vec<Term>,
}

impl std::fmt::Debug for TimeDependentHamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TimeDependentHamiltonian")
            .field("dim", &self.dim)
            .field("terms", &self.terms.len())
            .finish()
    }
}

const HERMITIAN_TOL: f64 = 1e-12;

impl TimeDependentHamiltonian {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check(&self, op: &OperatorMatrix, hermitian: bool) -> Result<()> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: op.dim(),
            });
        }
        if hermitian && !op.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::Contract(
                "real-envelope terms need a Hermitian operator".into(),
            ));
        }
        Ok(())
    }

    pub fn add_static(&mut self, op: OperatorMatrix) -> Result<&mut Self> {
        self.check(&op, true)?;
        self.terms.push(Term::Static(op));
        Ok(self)
    }

    pub fn add_term<F>(&mut self, op: OperatorMatrix, envelope: F) -> Result<&mut Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.check(&op, true)?;
        self.terms.push(Term::Real(op, Box::new(envelope)));
        Ok(self)
    }

    /// Adds `f(t) op + h.c.`; `op` need not be Hermitian.
    pub fn add_hermitian_pair<F>(&mut self, op: OperatorMatrix, envelope: F) -> Result<&mut Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        self.check(&op, false)?;
        let dag = op.dagger();
        self.terms.push(Term::Pair(op, dag, Box::new(envelope)));
        Ok(self)
    }

    /// Writes `H(t)` into `out`.
    pub fn matrix_into(&self, t: f64, out: &mut OperatorMatrix) -> Result<()> {
        if out.dim() != self.dim {
            *out = OperatorMatrix::zeros(self.dim);
        } else {
            out.clear();
        }
        for term in &self.terms {
            match term {
                Term::Static(op) => out.add_scaled_assign(op, Complex64::new(1.0, 0.0)),
                Term::Real(op, f) => {
                    let v = f(t);
                    if !v.is_finite() {
                        return Err(non_finite(t));
                    }
                    out.add_scaled_assign(op, Complex64::new(v, 0.0));
                }
                Term::Pair(op, dag, f) => {
                    let v = f(t);
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(non_finite(t));
                    }
                    out.add_scaled_assign(op, v);
                    out.add_scaled_assign(dag, v.conj());
                }
            }
        }
        Ok(())
    }

    pub fn matrix_at(&self, t: f64) -> Result<OperatorMatrix> {
        let mut m = OperatorMatrix::zeros(self.dim);
        self.matrix_into(t, &mut m)?;
        Ok(m)
    }
}

fn non_finite(t: f64) -> Error {
    Error::Numerical {
        time_ns: t,
        message: "non-finite envelope value".into(),
    }
}

#[derive(Debug, Clone)]
pub struct Observable {
    pub name: String,
    pub op: OperatorMatrix,
}

impl Observable {
    pub fn new(name: impl Into<String>, op: OperatorMatrix) -> Self {
        Self {
            name: name.into(),
            op,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// One trace per requested observable, sampled on `times`.
    pub traces: Vec<(String, Vec<f64>)>,
    /// State at every grid point.
    pub states: Vec<StateVector>,
    pub final_state: StateVector,
    /// Largest `| ||psi|| - 1 |` seen at the grid points.
    pub max_norm_drift: f64,
}

impl EvolutionResult {
    pub fn trace(&self, name: &str) -> Option<&[f64]> {
        self.traces
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// Integrates `i dpsi/dt = H(t) psi` with classical fourth-order Runge-Kutta.
///
/// Each interval of `t_grid` is split into the fewest equal substeps no longer
/// than `step`, so the grid points are hit exactly.
pub fn evolve(
    h: &TimeDependentHamiltonian,
    psi0: &StateVector,
    t_grid: &[f64],
    step: f64,
    observables: &[Observable],
) -> Result<EvolutionResult> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Contract(format!(
            "step must be positive, got {step}"
        )));
    }
    if t_grid.is_empty() {
        return Err(Error::Contract("time grid is empty".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Contract(
            "time grid must be finite and strictly increasing".into(),
        ));
    }
    if h.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi0.dim(),
        });
    }
    for obs in observables {
        if obs.op.dim() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: obs.op.dim(),
            });
        }
        if !obs.op.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::Contract(format!(
                "observable '{}' is not Hermitian",
                obs.name
            )));
        }
    }

    let dim = h.dim();
    let mut psi: Vec<Complex64> = psi0.amplitudes().to_vec();
    let mut traces: Vec<(String, Vec<f64>)> = observables
        .iter()
        .map(|o| (o.name.clone(), Vec::with_capacity(t_grid.len())))
        .collect();
    let mut states = Vec::with_capacity(t_grid.len());
    let mut max_norm_drift = 0.0f64;

    let mut record = |psi: &[Complex64], traces: &mut Vec<(String, Vec<f64>)>| {
        for (obs, (_, trace)) in observables.iter().zip(traces.iter_mut()) {
            trace.push(raw_expectation(psi, &obs.op).re);
        }
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        max_norm_drift = max_norm_drift.max((norm - 1.0).abs());
        states.push(StateVector::from_raw(psi.to_vec()));
    };

    record(&psi, &mut traces);

    let mut stepper = Rk4::new(dim);
    for w in t_grid.windows(2) {
        let span = w[1] - w[0];
        let substeps = (span / step * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = span / substeps as f64;
        for k in 0..substeps {
            let t = w[0] + k as f64 * dt;
            stepper.step(h, t, dt, &mut psi)?;
        }
        record(&psi, &mut traces);
    }

    let final_state = states.last().cloned().expect("grid is non-empty");
    Ok(EvolutionResult {
        times: t_grid.to_vec(),
        traces,
        states,
        final_state,
        max_norm_drift,
    })
}

struct Rk4 {
    h0: OperatorMatrix,
    h1: OperatorMatrix,
    h2: OperatorMatrix,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

impl Rk4 {
    fn new(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        Self {
            h0: OperatorMatrix::zeros(dim),
            h1: OperatorMatrix::zeros(dim),
            h2: OperatorMatrix::zeros(dim),
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
        }
    }

    fn step(
        &mut self,
        h: &TimeDependentHamiltonian,
        t: f64,
        dt: f64,
        psi: &mut [Complex64],
    ) -> Result<()> {
        h.matrix_into(t, &mut self.h0)?;
        h.matrix_into(t + 0.5 * dt, &mut self.h1)?;
        h.matrix_into(t + dt, &mut self.h2)?;

        deriv(&self.h0, psi, &mut self.k[0]);
        axpy(psi, &self.k[0], 0.5 * dt, &mut self.tmp);
        deriv(&self.h1, &self.tmp, &mut self.k[1]);
        axpy(psi, &self.k[1], 0.5 * dt, &mut self.tmp);
        deriv(&self.h1, &self.tmp, &mut self.k[2]);
        axpy(psi, &self.k[2], dt, &mut self.tmp);
        deriv(&self.h2, &self.tmp, &mut self.k[3]);

        let w = dt / 6.0;
        for (i, p) in psi.iter_mut().enumerate() {
            *p += (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]) * w;
        }
        if psi.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::Numerical {
                time_ns: t + dt,
                message: "state became non-finite".into(),
            });
        }
        Ok(())
    }
}

fn deriv(h: &OperatorMatrix, psi: &[Complex64], out: &mut [Complex64]) {
    h.apply_into(psi, out);
    for o in out.iter_mut() {
        *o *= MINUS_I;
    }
}

fn axpy(x: &[Complex64], k: &[Complex64], a: f64, out: &mut [Complex64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + ki * a;
    }
}
