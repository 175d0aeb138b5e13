//! Decomposition of the master equation into independent entry orbits.
//!
//! Under conjugation by the edge swaps, the set of matrix-unit index pairs
//! (x, y) splits into orbits that evolve autonomously: entry (x, y) couples
//! only to entries (u_jk(x), u_jk(y)) for edges {j, k}. Each orbit carries an
//! entrywise linear system equivalent to a classical complex-valued consensus
//! network with per-node rotation rates theta_i = -(lambda_x_i - lambda_y_i) / hbar.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::consensus::ClassicalSystem;
use crate::error::{Error, Result};
use crate::hilbert::{hermitize, BasisLabel, DensityMatrix, InteractionGraph};
use crate::integrator::{plan_grid, rk4_step};
use crate::lindblad::{DiagonalHamiltonian, StepParams, Trajectory, TrajectoryMeta};

/// One closed orbit of index pairs under simultaneous edge transpositions.
///
/// `pairs` is sorted ascending by integer pair, so `pairs[0]` is the
/// canonical representative. `adjacency[e][i]` is the index of the pair that
/// pair `i` maps to under edge `e` (an involution within the orbit).
#[derive(Clone, Debug, PartialEq)]
pub struct EntryOrbit {
    n: usize,
    pairs: Vec<(BasisLabel, BasisLabel)>,
    adjacency: Vec<Vec<usize>>,
}

impl EntryOrbit {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(BasisLabel, BasisLabel)] {
        &self.pairs
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Lexicographically smallest pair in the orbit.
    pub fn representative(&self) -> (BasisLabel, BasisLabel) {
        self.pairs[0]
    }

    /// True when the orbit lives on the diagonal (x = y for every pair;
    /// transpositions preserve this).
    pub fn is_diagonal(&self) -> bool {
        let (x, y) = self.pairs[0];
        x == y
    }

    pub fn contains(&self, x: BasisLabel, y: BasisLabel) -> bool {
        self.pairs.binary_search(&(x, y)).is_ok()
    }

    /// Rotation rates theta_i = -(lambda_x_i - lambda_y_i) / hbar.
    pub fn rotation_rates(&self, h: &DiagonalHamiltonian) -> Result<Vec<f64>> {
        if h.dim() != 1usize << self.n {
            return Err(Error::DimensionMismatch {
                context: "orbit rotation rates",
                expected: 1usize << self.n,
                actual: h.dim(),
            });
        }
        Ok(self
            .pairs
            .iter()
            .map(|&(x, y)| h.rotation_rate(x.index(), y.index()))
            .collect())
    }

    /// Orbit entries of `rho0`, in pair order.
    pub fn initial_values(&self, rho0: &DensityMatrix) -> Result<Vec<Complex64>> {
        if rho0.n() != self.n {
            return Err(Error::DimensionMismatch {
                context: "orbit initial values",
                expected: 1usize << self.n,
                actual: rho0.dim(),
            });
        }
        Ok(self
            .pairs
            .iter()
            .map(|&(x, y)| rho0.entry(x.index(), y.index()))
            .collect())
    }

    /// Stiffness bound of the orbit-local system: max |theta| + 2 |E|.
    pub fn stiffness_bound(&self, h: &DiagonalHamiltonian) -> Result<f64> {
        let thetas = self.rotation_rates(h)?;
        let max_theta = thetas.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        Ok(max_theta + 2.0 * self.adjacency.len() as f64)
    }

    /// The classical consensus network induced on the orbit: one node per
    /// pair, one edge per (graph edge, non-fixed pair) with multiplicity,
    /// rotation rates as node frequencies. Fixed points of an edge
    /// contribute nothing and induce no edge.
    pub fn reduced_system(&self, h: &DiagonalHamiltonian) -> Result<ClassicalSystem> {
        let thetas = self.rotation_rates(h)?;
        let mut edges = Vec::new();
        for map in &self.adjacency {
            for (i, &j) in map.iter().enumerate() {
                if j > i {
                    edges.push((i, j));
                }
            }
        }
        ClassicalSystem::new(thetas, edges)
    }
}

/// Breadth-first closure of {(x, y)} under simultaneous edge transpositions.
pub fn orbit_of(x: BasisLabel, y: BasisLabel, g: &InteractionGraph) -> Result<EntryOrbit> {
    if x.n() != g.n() || y.n() != g.n() {
        return Err(Error::DimensionMismatch {
            context: "orbit labels",
            expected: g.n(),
            actual: x.n().max(y.n()),
        });
    }
    let maps = g.edge_label_maps();
    Ok(close_orbit((x.index(), y.index()), g.n(), &maps))
}

fn close_orbit(start: (usize, usize), n: usize, maps: &[Vec<usize>]) -> EntryOrbit {
    let mut members = BTreeSet::new();
    members.insert(start);
    let mut queue = vec![start];
    while let Some((a, b)) = queue.pop() {
        for map in maps {
            let next = (map[a], map[b]);
            if members.insert(next) {
                queue.push(next);
            }
        }
    }
    let index_pairs: Vec<(usize, usize)> = members.into_iter().collect();
    let adjacency = maps
        .iter()
        .map(|map| {
            index_pairs
                .iter()
                .map(|&(a, b)| {
                    index_pairs
                        .binary_search(&(map[a], map[b]))
                        .expect("orbit is closed under edge transpositions")
                })
                .collect()
        })
        .collect();
    let pairs = index_pairs
        .into_iter()
        .map(|(a, b)| {
            (
                BasisLabel::new(a, n).expect("index in range"),
                BasisLabel::new(b, n).expect("index in range"),
            )
        })
        .collect();
    EntryOrbit {
        n,
        pairs,
        adjacency,
    }
}

/// Partition of all 4^n index pairs into orbits, ordered by canonical
/// representative.
pub fn all_orbits(g: &InteractionGraph) -> Vec<EntryOrbit> {
    let n = g.n();
    let dim = g.dim();
    let maps = g.edge_label_maps();
    let mut seen = vec![false; dim * dim];
    let mut orbits = Vec::new();
    for a in 0..dim {
        for b in 0..dim {
            if seen[a * dim + b] {
                continue;
            }
            let orbit = close_orbit((a, b), n, &maps);
            for &(x, y) in orbit.pairs() {
                seen[x.index() * dim + y.index()] = true;
            }
            orbits.push(orbit);
        }
    }
    orbits
}

/// Entrywise right-hand side on one orbit:
/// `dv_i = i theta_i v_i + sum_e (v_{adj[e][i]} - v_i)`.
pub fn entrywise_rhs(
    orbit: &EntryOrbit,
    values: &[Complex64],
    h: &DiagonalHamiltonian,
) -> Result<Vec<Complex64>> {
    if values.len() != orbit.len() {
        return Err(Error::LengthMismatch {
            context: "orbit values",
            expected: orbit.len(),
            actual: values.len(),
        });
    }
    let thetas = orbit.rotation_rates(h)?;
    Ok(entrywise_rhs_unchecked(
        values,
        &thetas,
        &orbit.adjacency,
    ))
}

fn entrywise_rhs_unchecked(
    values: &[Complex64],
    thetas: &[f64],
    adjacency: &[Vec<usize>],
) -> Vec<Complex64> {
    (0..values.len())
        .map(|i| {
            let mut v = Complex64::new(0.0, thetas[i]) * values[i];
            for map in adjacency {
                v += values[map[i]] - values[i];
            }
            v
        })
        .collect()
}

/// Per-pair complex trajectories of one orbit: `values[sample][pair]`.
#[derive(Clone, Debug)]
pub struct OrbitTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
}

/// Integrates the orbit-local system with the shared RK4 scheme.
pub fn integrate_orbit(
    orbit: &EntryOrbit,
    initial: &[Complex64],
    h: &DiagonalHamiltonian,
    params: &StepParams,
) -> Result<OrbitTrajectory> {
    if initial.len() != orbit.len() {
        return Err(Error::LengthMismatch {
            context: "orbit initial values",
            expected: orbit.len(),
            actual: initial.len(),
        });
    }
    let thetas = orbit.rotation_rates(h)?;
    let plan = plan_grid(params, orbit.stiffness_bound(h)?)?;
    let mut values = initial.to_vec();
    let mut times = vec![0.0];
    let mut samples = vec![values.clone()];
    for i in 0..plan.n_steps {
        values = rk4_step(&values, plan.dt, |v| {
            entrywise_rhs_unchecked(v, &thetas, &orbit.adjacency)
        });
        if plan.records(i) {
            let t = plan.time_of(i);
            if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Divergence { t });
            }
            times.push(t);
            samples.push(values.clone());
        }
    }
    Ok(OrbitTrajectory {
        times,
        values: samples,
    })
}

/// The full orbit partition for one graph, with helpers to pick the orbits a
/// given initial state actually excites and to reassemble a dense trajectory.
#[derive(Clone, Debug)]
pub struct OrbitDecomposition {
    n: usize,
    orbits: Vec<EntryOrbit>,
}

impl OrbitDecomposition {
    pub fn new(g: &InteractionGraph) -> Self {
        Self {
            n: g.n(),
            orbits: all_orbits(g),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn orbits(&self) -> &[EntryOrbit] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// Orbits to integrate for `rho0`: every diagonal orbit plus any orbit
    /// intersecting the support of `rho0`. Orbits that start identically
    /// zero stay zero, so they are skipped unless `force_all` is set.
    pub fn active_indices(&self, rho0: &DensityMatrix, force_all: bool) -> Result<Vec<usize>> {
        if rho0.n() != self.n {
            return Err(Error::DimensionMismatch {
                context: "orbit selection",
                expected: 1usize << self.n,
                actual: rho0.dim(),
            });
        }
        Ok(self
            .orbits
            .iter()
            .enumerate()
            .filter(|(_, orbit)| {
                force_all
                    || orbit.is_diagonal()
                    || orbit
                        .pairs()
                        .iter()
                        .any(|&(x, y)| rho0.entry(x.index(), y.index()).norm() != 0.0)
            })
            .map(|(i, _)| i)
            .collect())
    }

    /// Rebuilds a dense trajectory from per-orbit runs sharing one sampling
    /// grid. Entries of orbits not integrated are zero. Recorded matrices
    /// are re-Hermitized exactly like dense-integration samples.
    pub fn assemble(
        &self,
        active: &[usize],
        runs: &[OrbitTrajectory],
        h: &DiagonalHamiltonian,
        g: &InteractionGraph,
        params: &StepParams,
    ) -> Result<Trajectory> {
        if active.len() != runs.len() {
            return Err(Error::LengthMismatch {
                context: "orbit runs",
                expected: active.len(),
                actual: runs.len(),
            });
        }
        let times: Vec<f64> = match runs.first() {
            Some(run) => run.times.clone(),
            None => vec![0.0],
        };
        for run in runs {
            if run.times != times {
                return Err(Error::LengthMismatch {
                    context: "orbit sample grids",
                    expected: times.len(),
                    actual: run.times.len(),
                });
            }
        }
        let dim = 1usize << self.n;
        let mut states = Vec::with_capacity(times.len());
        for s in 0..times.len() {
            let mut m = DMatrix::<Complex64>::zeros(dim, dim);
            for (&oi, run) in active.iter().zip(runs) {
                let orbit = &self.orbits[oi];
                for (pi, &(x, y)) in orbit.pairs().iter().enumerate() {
                    m[(x.index(), y.index())] = run.values[s][pi];
                }
            }
            states.push(DensityMatrix::new(self.n, hermitize(&m))?);
        }
        let step = if times.len() >= 2 {
            times[1] - times[0]
        } else {
            params.step
        };
        Ok(Trajectory {
            times,
            states,
            meta: TrajectoryMeta {
                n: self.n,
                step,
                horizon: params.horizon,
                stride: params.stride,
                hbar: h.hbar(),
                graph_fingerprint: g.fingerprint(),
                hamiltonian_fingerprint: h.fingerprint(),
            },
        })
    }
}

/// Orbit-mode integration of the full state: decompose, integrate each
/// active orbit on one common grid, reassemble.
///
/// All orbits share the sampling grid derived from the global stiffness
/// bound so the result is sample-comparable with dense integration.
pub fn integrate_by_orbits(
    rho0: &DensityMatrix,
    h: &DiagonalHamiltonian,
    g: &InteractionGraph,
    params: &StepParams,
    force_all: bool,
) -> Result<Trajectory> {
    let decomposition = OrbitDecomposition::new(g);
    let active = decomposition.active_indices(rho0, force_all)?;
    let runs = active
        .iter()
        .map(|&i| {
            let orbit = &decomposition.orbits()[i];
            integrate_orbit(orbit, &orbit.initial_values(rho0)?, h, params)
        })
        .collect::<Result<Vec<_>>>()?;
    decomposition.assemble(&active, &runs, h, g, params)
}
