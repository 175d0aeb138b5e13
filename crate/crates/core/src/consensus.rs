//! Classical complex-valued consensus networks with per-node rotation:
//!
//!   dX_i/dt = i theta_i X_i + sum_{j : {i,j} in E} (X_j - X_i)
//!
//! together with its realification, trajectory diagnostics for the
//! max-squared-modulus Lyapunov function and the common limit modulus, and
//! seeded random-system generation for the verification suites.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::integrator::{plan_grid, rk4_step};
use crate::lindblad::StepParams;

/// A connected network of complex-valued nodes with rotation rates.
///
/// The edge list may contain repeated node pairs: reduced systems built from
/// entry orbits can map two physical couplings onto the same pair, and each
/// occurrence contributes its own coupling term.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSystem {
    thetas: Vec<f64>,
    edges: Vec<(usize, usize)>,
}

impl ClassicalSystem {
    pub fn new(thetas: Vec<f64>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = thetas.len();
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "thetas",
                value: 0.0,
                reason: "at least one node is required",
            });
        }
        if let Some(&bad) = thetas.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "thetas",
                value: bad,
                reason: "rotation rates must be finite",
            });
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= n {
                return Err(Error::QubitOutOfRange { index: a, n });
            }
            if b >= n {
                return Err(Error::QubitOutOfRange { index: b, n });
            }
            if a == b {
                return Err(Error::InvalidEdge {
                    a,
                    b,
                    reason: "self-loops are not allowed",
                });
            }
            normalized.push((a.min(b), a.max(b)));
        }
        let sys = Self {
            thetas,
            edges: normalized,
        };
        if sys.node_count() >= 2 && !sys.is_connected() {
            return Err(Error::DisconnectedGraph {
                n: sys.node_count(),
            });
        }
        Ok(sys)
    }

    pub fn single_rotor(theta: f64) -> Self {
        Self {
            thetas: vec![theta],
            edges: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// The common rotation rate, when all nodes share one.
    pub fn common_theta(&self) -> Option<f64> {
        let first = self.thetas[0];
        self.thetas.iter().all(|&t| t == first).then_some(first)
    }

    /// True when at least two distinct rates are present.
    pub fn has_distinct_thetas(&self) -> bool {
        self.common_theta().is_none()
    }

    /// Stiffness bound max |theta| + 2 |E| for the step rule.
    pub fn stiffness_bound(&self) -> f64 {
        let max_theta = self.thetas.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        max_theta + 2.0 * self.edges.len() as f64
    }

    fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                let next = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen[next] {
                    seen[next] = true;
                    count += 1;
                    stack.push(next);
                }
            }
        }
        count == n
    }
}

/// dX_i = i theta_i X_i + sum over incident edges of (X_j - X_i).
pub fn classical_rhs(sys: &ClassicalSystem, x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.len() != sys.node_count() {
        return Err(Error::LengthMismatch {
            context: "classical state",
            expected: sys.node_count(),
            actual: x.len(),
        });
    }
    Ok(classical_rhs_unchecked(sys, x))
}

fn classical_rhs_unchecked(sys: &ClassicalSystem, x: &[Complex64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = sys
        .thetas
        .iter()
        .zip(x)
        .map(|(&theta, &xi)| Complex64::new(0.0, theta) * xi)
        .collect();
    for &(i, j) in &sys.edges {
        out[i] += x[j] - x[i];
        out[j] += x[i] - x[j];
    }
    out
}

/// Splits each complex state into its (real, imaginary) coordinate pair.
pub fn realify(x: &[Complex64]) -> Vec<[f64; 2]> {
    x.iter().map(|z| [z.re, z.im]).collect()
}

/// Inverse of [`realify`].
pub fn derealify(y: &[[f64; 2]]) -> Vec<Complex64> {
    y.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

/// The realified flow: dY_i = A_i Y_i + sum (Y_j - Y_i) with
/// A_i = [[0, -theta_i], [theta_i, 0]], identical to [`classical_rhs`] under
/// the real/imaginary identification.
pub fn realified_rhs(sys: &ClassicalSystem, y: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    if y.len() != sys.node_count() {
        return Err(Error::LengthMismatch {
            context: "realified state",
            expected: sys.node_count(),
            actual: y.len(),
        });
    }
    let mut out: Vec<[f64; 2]> = sys
        .thetas
        .iter()
        .zip(y)
        .map(|(&theta, &[r, s])| [-theta * s, theta * r])
        .collect();
    for &(i, j) in &sys.edges {
        out[i][0] += y[j][0] - y[i][0];
        out[i][1] += y[j][1] - y[i][1];
        out[j][0] += y[i][0] - y[j][0];
        out[j][1] += y[i][1] - y[j][1];
    }
    Ok(out)
}

/// Per-node complex trajectories: `values[sample][node]`.
#[derive(Clone, Debug)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
}

impl ClassicalTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_values(&self) -> &[Complex64] {
        self.values.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn tail_start(&self, fraction: f64) -> usize {
        let cutoff = self.final_time() * (1.0 - fraction);
        self.times.iter().position(|&t| t >= cutoff).unwrap_or(0)
    }
}

/// Integrates the consensus network with the shared RK4 scheme.
pub fn integrate_classical(
    sys: &ClassicalSystem,
    x0: &[Complex64],
    params: &StepParams,
) -> Result<ClassicalTrajectory> {
    if x0.len() != sys.node_count() {
        return Err(Error::LengthMismatch {
            context: "classical initial state",
            expected: sys.node_count(),
            actual: x0.len(),
        });
    }
    let plan = plan_grid(params, sys.stiffness_bound())?;
    let mut x = x0.to_vec();
    let mut times = vec![0.0];
    let mut values = vec![x.clone()];
    for i in 0..plan.n_steps {
        x = rk4_step(&x, plan.dt, |v| classical_rhs_unchecked(sys, v));
        if plan.records(i) {
            let t = plan.time_of(i);
            if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Divergence { t });
            }
            times.push(t);
            values.push(x.clone());
        }
    }
    Ok(ClassicalTrajectory { times, values })
}

/// The Lyapunov series f(t) = max_i |X_i(t)|^2 with its worst positive jump
/// between consecutive samples. f is non-increasing along the exact flow.
#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    pub series: Vec<(f64, f64)>,
    pub max_increment: f64,
}

pub fn max_sq_modulus_series(traj: &ClassicalTrajectory) -> MonotonicityReport {
    let series: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.values)
        .map(|(&t, vals)| {
            let f = vals.iter().fold(0.0f64, |m, z| m.max(z.norm_sqr()));
            (t, f)
        })
        .collect();
    let max_increment = series
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(0.0f64, f64::max);
    MonotonicityReport {
        series,
        max_increment,
    }
}

/// Estimated common limit modulus over the trailing window.
#[derive(Clone, Copy, Debug)]
pub struct ModulusLimit {
    /// Mean over tail samples of the per-sample mean modulus.
    pub z: f64,
    /// Max over tail samples of max_i | |X_i| - z |.
    pub spread: f64,
    pub tail_samples: usize,
}

/// Estimates the limit modulus shared by all nodes from the trailing
/// `tail_fraction` of the run, requiring at least 10 samples there.
pub fn limit_modulus(traj: &ClassicalTrajectory, tail_fraction: f64) -> Result<ModulusLimit> {
    let start = traj.tail_start(tail_fraction);
    let tail = &traj.values[start..];
    if tail.len() < 10 {
        return Err(Error::InsufficientSamples {
            got: tail.len(),
            need: 10,
        });
    }
    let n = traj.values[0].len() as f64;
    let z = tail
        .iter()
        .map(|vals| vals.iter().map(|v| v.norm()).sum::<f64>() / n)
        .sum::<f64>()
        / tail.len() as f64;
    let spread = tail
        .iter()
        .flat_map(|vals| vals.iter().map(|v| (v.norm() - z).abs()))
        .fold(0.0f64, f64::max);
    Ok(ModulusLimit {
        z,
        spread,
        tail_samples: tail.len(),
    })
}

/// Uniformly random labeled tree on n nodes (random sequence decoding).
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => {
            let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
            let mut degree = vec![1usize; n];
            for &s in &seq {
                degree[s] += 1;
            }
            let mut edges = Vec::with_capacity(n - 1);
            let mut leaves: std::collections::BTreeSet<usize> = (0..n)
                .filter(|&i| degree[i] == 1)
                .collect();
            for &s in &seq {
                let leaf = *leaves.iter().next().expect("a leaf always remains");
                leaves.remove(&leaf);
                edges.push((leaf.min(s), leaf.max(s)));
                degree[s] -= 1;
                if degree[s] == 1 {
                    leaves.insert(s);
                }
            }
            let mut rest = leaves.into_iter();
            let a = rest.next().expect("two leaves remain");
            let b = rest.next().expect("two leaves remain");
            edges.push((a.min(b), a.max(b)));
            edges
        }
    }
}

/// Connected random graph: uniform spanning tree plus each remaining pair
/// independently with probability `extra_prob`.
pub fn random_connected_edges<R: Rng>(
    n: usize,
    extra_prob: f64,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let mut edges = random_tree(n, rng);
    let tree: std::collections::BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    for a in 0..n {
        for b in (a + 1)..n {
            if !tree.contains(&(a, b)) && rng.random_range(0.0..1.0) < extra_prob {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Well-separated distinct rotation rates: a shuffled arithmetic ramp
/// `spacing * (1..=n)` with uniform jitter of +-`jitter` per node.
pub fn random_distinct_thetas<R: Rng>(
    n: usize,
    spacing: f64,
    jitter: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut base: Vec<f64> = (1..=n).map(|i| spacing * i as f64).collect();
    base.shuffle(rng);
    base.iter()
        .map(|&b| b + rng.random_range(-jitter..jitter))
        .collect()
}

/// Node states drawn uniformly from the complex square [-1, 1]^2.
pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}
