//! Full density-operator evolution of the synchronization master equation
//!
//!   d rho / dt = -(i/hbar) [H, rho] + sum_{{j,k} in E} (U_jk rho U_jk^dag - rho)
//!
//! for a diagonal Hamiltonian H and swap operators U_jk along the edges of a
//! connected interaction graph, with a fixed-step RK4 integrator and
//! trace/Hermiticity/positivity diagnostics over recorded trajectories.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fingerprint::fnv1a64;
use crate::hilbert::{hermitize, DensityMatrix, InteractionGraph, Tolerances};
use crate::integrator::{plan_grid, rk4_step};

/// Diagonal Hamiltonian: one real eigenvalue per computational basis label.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalHamiltonian {
    lambdas: Vec<f64>,
    hbar: f64,
}

impl DiagonalHamiltonian {
    pub fn new(lambdas: Vec<f64>, hbar: f64) -> Result<Self> {
        let dim = lambdas.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { dim });
        }
        if let Some(&bad) = lambdas.iter().find(|l| !l.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lambdas",
                value: bad,
                reason: "eigenvalues must be finite",
            });
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter {
                name: "hbar",
                value: hbar,
                reason: "hbar must be positive and finite",
            });
        }
        Ok(Self { lambdas, hbar })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::constant(n, 0.0)
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; 1usize << n], 1.0)
    }

    /// lambda_x = 2^x, reading the label x as an integer.
    pub fn powers_of_two(n: usize) -> Result<Self> {
        Self::new((0..1usize << n).map(|x| (x as f64).exp2()).collect(), 1.0)
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter {
                name: "hbar",
                value: hbar,
                reason: "hbar must be positive and finite",
            });
        }
        self.hbar = hbar;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn n(&self) -> usize {
        self.lambdas.len().trailing_zeros() as usize
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, x: usize) -> f64 {
        self.lambdas[x]
    }

    /// Coefficient of the commutator on entry (x, y):
    /// [H, rho]_{xy} = (lambda_x - lambda_y) rho_{xy}.
    pub fn commutator_coefficient(&self, x: usize, y: usize) -> f64 {
        self.lambdas[x] - self.lambdas[y]
    }

    /// Rotation rate of entry (x, y): theta = -(lambda_x - lambda_y) / hbar.
    pub fn rotation_rate(&self, x: usize, y: usize) -> f64 {
        -(self.lambdas[x] - self.lambdas[y]) / self.hbar
    }

    /// Largest eigenvalue gap max - min.
    pub fn max_level_gap(&self) -> f64 {
        let max = self.lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// e^{-iHt/hbar} M e^{iHt/hbar}: each entry (x, y) picks up the phase
    /// e^{-i (lambda_x - lambda_y) t / hbar}.
    pub fn phase_conjugated(&self, m: &DMatrix<Complex64>, t: f64) -> Result<DMatrix<Complex64>> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "phase conjugation",
                expected: self.dim(),
                actual: m.nrows().max(m.ncols()),
            });
        }
        Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |x, y| {
            m[(x, y)] * Complex64::from_polar(1.0, self.rotation_rate(x, y) * t)
        }))
    }

    pub fn fingerprint(&self) -> u64 {
        let mut bytes = Vec::with_capacity(8 * (self.lambdas.len() + 1));
        bytes.extend_from_slice(&self.hbar.to_bits().to_le_bytes());
        for l in &self.lambdas {
            bytes.extend_from_slice(&l.to_bits().to_le_bytes());
        }
        fnv1a64(&bytes)
    }
}

/// Fixed-step integration request. `step` is a maximum: the actual step is
/// shrunk so that an integer number of steps lands exactly on the horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepParams {
    pub step: f64,
    pub horizon: f64,
    pub stride: f64,
}

impl StepParams {
    pub fn new(step: f64, horizon: f64, stride: f64) -> Result<Self> {
        let p = Self {
            step,
            horizon,
            stride,
        };
        p.check()?;
        Ok(p)
    }

    /// Step chosen from the stiffness bound, stride defaulting to
    /// horizon / 200.
    pub fn auto(stiffness: f64, horizon: f64, stride: Option<f64>) -> Result<Self> {
        Self::new(
            crate::integrator::auto_step(stiffness),
            horizon,
            stride.unwrap_or(horizon / 200.0),
        )
    }

    pub(crate) fn check(&self) -> Result<()> {
        for (name, value) in [
            ("step", self.step),
            ("horizon", self.horizon),
            ("stride", self.stride),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        Ok(())
    }
}

/// Stiffness bound L = max gap / hbar + 2 |E| used by the step rule.
pub fn stiffness_bound(h: &DiagonalHamiltonian, g: &InteractionGraph) -> f64 {
    h.max_level_gap() / h.hbar() + 2.0 * g.edge_count() as f64
}

/// Provenance of a recorded trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryMeta {
    pub n: usize,
    pub step: f64,
    pub horizon: f64,
    pub stride: f64,
    pub hbar: f64,
    pub graph_fingerprint: u64,
    pub hamiltonian_fingerprint: u64,
}

/// Time-ordered density-matrix samples. Recorded states are re-Hermitized
/// ((M + M^dag) / 2) at recording time only; the evolving state is not.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Index of the first sample inside the trailing `fraction` of the run.
    pub fn tail_start(&self, fraction: f64) -> usize {
        let cutoff = self.final_time() * (1.0 - fraction);
        self.times.iter().position(|&t| t >= cutoff).unwrap_or(0)
    }
}

/// Right-hand side of the master equation. The commutator term is evaluated
/// entrywise via the diagonal coefficients of H and the swap conjugations
/// via the per-edge label permutations.
pub fn master_rhs(
    rho: &DMatrix<Complex64>,
    h: &DiagonalHamiltonian,
    g: &InteractionGraph,
) -> Result<DMatrix<Complex64>> {
    let dim = g.dim();
    if rho.nrows() != dim || rho.ncols() != dim || h.dim() != dim {
        return Err(Error::DimensionMismatch {
            context: "master equation",
            expected: dim,
            actual: rho.nrows().max(h.dim()),
        });
    }
    let maps = g.edge_label_maps();
    Ok(master_rhs_unchecked(rho, h, &maps))
}

fn master_rhs_unchecked(
    rho: &DMatrix<Complex64>,
    h: &DiagonalHamiltonian,
    maps: &[Vec<usize>],
) -> DMatrix<Complex64> {
    let dim = h.dim();
    DMatrix::from_fn(dim, dim, |x, y| {
        let mut v = Complex64::new(0.0, h.rotation_rate(x, y)) * rho[(x, y)];
        for map in maps {
            v += rho[(map[x], map[y])] - rho[(x, y)];
        }
        v
    })
}

/// Integrates the master equation from `rho0` with fixed-step RK4.
///
/// `rho0` must pass validation at the default tolerances, and the requested
/// step must satisfy step * L <= 0.1 for the stiffness bound L.
pub fn integrate(
    rho0: &DensityMatrix,
    h: &DiagonalHamiltonian,
    g: &InteractionGraph,
    params: &StepParams,
) -> Result<Trajectory> {
    if rho0.n() != g.n() || h.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch {
            context: "integration inputs",
            expected: rho0.dim(),
            actual: h.dim().max(g.dim()),
        });
    }
    let report = rho0.validate(&Tolerances::default());
    if !report.is_valid() {
        return Err(Error::InvalidDensity(report.summary()));
    }
    let plan = plan_grid(params, stiffness_bound(h, g))?;
    let maps = g.edge_label_maps();

    let mut rho = rho0.matrix().clone();
    let mut times = vec![0.0];
    let mut states = vec![DensityMatrix::new(rho0.n(), hermitize(&rho))?];
    for i in 0..plan.n_steps {
        rho = rk4_step(&rho, plan.dt, |m| master_rhs_unchecked(m, h, &maps));
        if plan.records(i) {
            let t = plan.time_of(i);
            let sample = hermitize(&rho);
            if sample.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Divergence { t });
            }
            times.push(t);
            states.push(DensityMatrix::new(rho0.n(), sample)?);
        }
    }
    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta {
            n: rho0.n(),
            step: plan.dt,
            horizon: params.horizon,
            stride: params.stride,
            hbar: h.hbar(),
            graph_fingerprint: g.fingerprint(),
            hamiltonian_fingerprint: h.fingerprint(),
        },
    })
}

/// Per-sample physicality diagnostics of one trajectory sample.
#[derive(Clone, Copy, Debug)]
pub struct SampleDiagnostics {
    pub time: f64,
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
}

/// Trace-preservation / positivity report over a whole trajectory.
#[derive(Clone, Debug)]
pub struct CptpReport {
    pub samples: Vec<SampleDiagnostics>,
    pub max_hermiticity_defect: f64,
    pub max_trace_defect: f64,
    pub min_eigenvalue: f64,
    /// First sample index violating the tolerances, if any.
    pub first_failure: Option<usize>,
    pub pass: bool,
}

pub fn cptp_diagnostics(traj: &Trajectory, tol: &Tolerances) -> CptpReport {
    let mut samples = Vec::with_capacity(traj.len());
    let mut max_herm = 0.0f64;
    let mut max_trace = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut first_failure = None;
    for (i, (t, state)) in traj.times.iter().zip(&traj.states).enumerate() {
        let rep = state.validate(tol);
        samples.push(SampleDiagnostics {
            time: *t,
            hermiticity_defect: rep.hermiticity_defect,
            trace_defect: rep.trace_defect,
            min_eigenvalue: rep.min_eigenvalue,
        });
        max_herm = max_herm.max(rep.hermiticity_defect);
        max_trace = max_trace.max(rep.trace_defect);
        min_eig = min_eig.min(rep.min_eigenvalue);
        if !rep.is_valid() && first_failure.is_none() {
            first_failure = Some(i);
        }
    }
    CptpReport {
        samples,
        max_hermiticity_defect: max_herm,
        max_trace_defect: max_trace,
        min_eigenvalue: min_eig,
        first_failure,
        pass: first_failure.is_none(),
    }
}
