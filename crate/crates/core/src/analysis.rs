//! Predictors and metrics for the asymptotics of the synchronization master
//! equation: distinctness of Hamiltonian level differences, orbit
//! classification, the off-diagonal decoherence measure, corner-entry phase
//! verification, Hamming-class diagonal limits, reduced-state gaps, and
//! empirical exponential rate fits.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{BasisLabel, DensityMatrix};
use crate::lindblad::{DiagonalHamiltonian, Trajectory};
use crate::orbits::EntryOrbit;

/// A pair of ordered level pairs sharing the same eigenvalue difference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DifferenceCollision {
    pub pair_a: (usize, usize),
    pub pair_b: (usize, usize),
    pub value: f64,
}

/// Outcome of the pairwise-distinct-differences check.
#[derive(Clone, Debug)]
pub struct DistinctDifferences {
    pub distinct: bool,
    pub collisions: Vec<DifferenceCollision>,
}

/// Checks whether the differences lambda_p - lambda_p' over all ordered
/// pairs p != p' are pairwise distinct (exact float comparison), listing
/// adjacent collisions otherwise.
pub fn check_distinct_differences(h: &DiagonalHamiltonian) -> DistinctDifferences {
    let dim = h.dim();
    let mut diffs: Vec<(f64, (usize, usize))> = Vec::with_capacity(dim * (dim - 1));
    for p in 0..dim {
        for q in 0..dim {
            if p != q {
                diffs.push((h.lambda(p) - h.lambda(q), (p, q)));
            }
        }
    }
    diffs.sort_by(|a, b| f64::total_cmp(&a.0, &b.0));
    let collisions: Vec<DifferenceCollision> = diffs
        .windows(2)
        .filter(|w| w[0].0 == w[1].0)
        .map(|w| DifferenceCollision {
            pair_a: w[0].1,
            pair_b: w[1].1,
            value: w[0].0,
        })
        .collect();
    DistinctDifferences {
        distinct: collisions.is_empty(),
        collisions,
    }
}

/// Predicted asymptotic value of the entries of one orbit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PredictedLimit {
    /// Every entry decays to zero.
    Zero,
    /// The entry keeps its modulus and rotates at this phase rate.
    RotatingPhase { rate: f64 },
    /// Every entry converges to the mean of its Hamming class.
    ClassAverage { weight: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitKind {
    /// The two singleton off-diagonal orbits (all-zeros, all-ones): modulus
    /// preserved, phase rotating.
    CornerPersistent,
    /// Off-diagonal orbit with at least two distinct rotation rates.
    Decohering,
    /// Diagonal orbit: averages within the Hamming class regardless of H.
    DiagonalAveraging,
    /// Off-diagonal orbit whose rotation rates all coincide; persists as a
    /// rotating consensus instead of decaying.
    ConditionallyPersistent,
}

#[derive(Clone, Debug)]
pub struct OrbitClassification {
    pub kind: OrbitKind,
    pub limit: PredictedLimit,
    pub size: usize,
    pub representative: (BasisLabel, BasisLabel),
}

/// Classifies every orbit: diagonal orbits average, singleton off-diagonal
/// orbits (the corners) persist with pure phase rotation, and any other
/// off-diagonal orbit decoheres exactly when its rotation rates are not all
/// equal.
pub fn classify_orbits(
    orbits: &[EntryOrbit],
    h: &DiagonalHamiltonian,
) -> Result<Vec<OrbitClassification>> {
    orbits
        .iter()
        .map(|orbit| {
            let (x, y) = orbit.representative();
            let kind_and_limit = if orbit.is_diagonal() {
                (
                    OrbitKind::DiagonalAveraging,
                    PredictedLimit::ClassAverage {
                        weight: x.hamming_weight(),
                    },
                )
            } else if orbit.len() == 1 {
                (
                    OrbitKind::CornerPersistent,
                    PredictedLimit::RotatingPhase {
                        rate: h.rotation_rate(x.index(), y.index()),
                    },
                )
            } else {
                let thetas = orbit.rotation_rates(h)?;
                let first = thetas[0];
                if thetas.iter().all(|&t| t == first) {
                    (
                        OrbitKind::ConditionallyPersistent,
                        PredictedLimit::RotatingPhase { rate: first },
                    )
                } else {
                    (OrbitKind::Decohering, PredictedLimit::Zero)
                }
            };
            Ok(OrbitClassification {
                kind: kind_and_limit.0,
                limit: kind_and_limit.1,
                size: orbit.len(),
                representative: (x, y),
            })
        })
        .collect()
}

/// Sum of squared moduli over all off-diagonal entries except the two
/// corner entries (0...0, 1...1) and (1...1, 0...0).
pub fn decoherence_measure(rho: &DensityMatrix) -> f64 {
    let dim = rho.dim();
    let corner = dim - 1;
    let mut total = 0.0;
    for x in 0..dim {
        for y in 0..dim {
            if x == y || (x == 0 && y == corner) || (x == corner && y == 0) {
                continue;
            }
            total += rho.entry(x, y).norm_sqr();
        }
    }
    total
}

/// The decoherence measure along a trajectory, as (t, E_o(t)) samples.
pub fn decoherence_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, rho)| (t, decoherence_measure(rho)))
        .collect()
}

/// Deviation of the top-right corner entry from its predicted pure phase
/// rotation rho(0)_{0,d-1} e^{-i (lambda_0 - lambda_{d-1}) t / hbar}.
#[derive(Clone, Copy, Debug)]
pub struct CornerPhaseReport {
    pub initial_modulus: f64,
    pub max_deviation: f64,
    pub max_modulus_drift: f64,
    /// Phase rate of the prediction, -(lambda_0 - lambda_{d-1}) / hbar.
    pub rate: f64,
}

pub fn corner_phase_check(traj: &Trajectory, h: &DiagonalHamiltonian) -> CornerPhaseReport {
    let dim = h.dim();
    let corner = dim - 1;
    let rate = h.rotation_rate(0, corner);
    let c0 = traj.states[0].entry(0, corner);
    if c0.norm() == 0.0 {
        // nothing to track; the entry stays identically zero
        let max_dev = traj
            .states
            .iter()
            .map(|s| s.entry(0, corner).norm())
            .fold(0.0f64, f64::max);
        return CornerPhaseReport {
            initial_modulus: 0.0,
            max_deviation: max_dev,
            max_modulus_drift: max_dev,
            rate,
        };
    }
    let mut max_deviation = 0.0f64;
    let mut max_drift = 0.0f64;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let actual = state.entry(0, corner);
        let predicted = c0 * Complex64::from_polar(1.0, rate * t);
        max_deviation = max_deviation.max((actual - predicted).norm());
        max_drift = max_drift.max((actual.norm() - c0.norm()).abs());
    }
    CornerPhaseReport {
        initial_modulus: c0.norm(),
        max_deviation,
        max_modulus_drift: max_drift,
        rate,
    }
}

/// Predicted diagonal limits: within each Hamming class the diagonal
/// entries converge to the class mean of the initial diagonal.
#[derive(Clone, Debug)]
pub struct DiagonalLimits {
    /// One value per Hamming weight 0..=n.
    pub class_values: Vec<f64>,
    /// The class value assigned to each basis label.
    pub per_label: Vec<f64>,
}

pub fn predicted_diagonal_limits(rho0: &DensityMatrix) -> DiagonalLimits {
    let n = rho0.n();
    let dim = rho0.dim();
    let mut sums = vec![0.0f64; n + 1];
    let mut counts = vec![0usize; n + 1];
    for x in 0..dim {
        let k = x.count_ones() as usize;
        sums[k] += rho0.entry(x, x).re;
        counts[k] += 1;
    }
    let class_values: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let per_label = (0..dim)
        .map(|x| class_values[x.count_ones() as usize])
        .collect();
    DiagonalLimits {
        class_values,
        per_label,
    }
}

/// Trace norm (sum of absolute eigenvalues) of a Hermitian 2x2 matrix.
fn trace_norm_2x2(m: &DMatrix<Complex64>) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mid = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mid + r).abs() + (mid - r).abs()
}

/// Max over qubit pairs (k, m) of the trace-norm distance between the
/// single-qubit reduced states, maximized over the trailing `tail_fraction`
/// of the trajectory. Requires at least two qubits.
pub fn reduced_state_gap(traj: &Trajectory, tail_fraction: f64) -> Result<f64> {
    let n = traj.meta.n;
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            reason: "reduced-state gaps need at least two qubits",
        });
    }
    let start = traj.tail_start(tail_fraction);
    let mut gap = 0.0f64;
    for state in &traj.states[start..] {
        let reduced: Vec<DensityMatrix> = (0..n)
            .map(|k| state.partial_trace_single_unchecked(k))
            .collect::<Result<_>>()?;
        for k in 0..n {
            for m in (k + 1)..n {
                let diff = reduced[k].matrix() - reduced[m].matrix();
                gap = gap.max(trace_norm_2x2(&diff));
            }
        }
    }
    Ok(gap)
}

/// Least-squares line through (t, log value).
#[derive(Clone, Copy, Debug)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    /// Set when nonpositive values had to be clipped to the 1e-300 floor.
    pub clipped: bool,
}

pub fn exponential_rate_fit(series: &[(f64, f64)]) -> Result<RateFit> {
    if series.len() < 2 {
        return Err(Error::InsufficientSamples {
            got: series.len(),
            need: 2,
        });
    }
    let mut clipped = false;
    let logs: Vec<(f64, f64)> = series
        .iter()
        .map(|&(t, v)| {
            let v = if v <= 0.0 {
                clipped = true;
                1e-300
            } else {
                v.max(1e-300)
            };
            (t, v.ln())
        })
        .collect();
    let n = logs.len() as f64;
    let st: f64 = logs.iter().map(|&(t, _)| t).sum();
    let sy: f64 = logs.iter().map(|&(_, y)| y).sum();
    let stt: f64 = logs.iter().map(|&(t, _)| t * t).sum();
    let sty: f64 = logs.iter().map(|&(t, y)| t * y).sum();
    let denom = n * stt - st * st;
    if denom.abs() < f64::EPSILON * n * stt.max(1.0) {
        return Err(Error::InvalidParameter {
            name: "series",
            value: denom,
            reason: "degenerate time axis for rate fit",
        });
    }
    let slope = (n * sty - st * sy) / denom;
    let intercept = (sy - slope * st) / n;
    let max_residual = logs
        .iter()
        .map(|&(t, y)| (slope * t + intercept - y).abs())
        .fold(0.0f64, f64::max);
    Ok(RateFit {
        slope,
        intercept,
        max_residual,
        clipped,
    })
}

/// Average of rho over all simultaneous qubit relabelings:
/// rho* = (1/n!) sum_pi U_pi rho U_pi^dag.
///
/// Enumerates all n! permutations, so it is restricted to n <= 6.
pub fn permutation_average(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let n = rho.n();
    if n > 6 {
        return Err(Error::TooManyQubits { n, max: 6 });
    }
    let dim = rho.dim();
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    let mut count = 0usize;
    for perm in (0..n).permutations(n) {
        // relabel: output bit q of u(x) = input bit perm[q] of x
        let relabel: Vec<usize> = (0..dim)
            .map(|x| {
                let mut out = 0usize;
                for (q, &src) in perm.iter().enumerate() {
                    let bit = (x >> (n - 1 - src)) & 1;
                    out |= bit << (n - 1 - q);
                }
                out
            })
            .collect();
        for x in 0..dim {
            for y in 0..dim {
                acc[(relabel[x], relabel[y])] += rho.entry(x, y);
            }
        }
        count += 1;
    }
    let scale = 1.0 / count as f64;
    DensityMatrix::new(n, acc.map(|z| z * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{swap_matrix, InteractionGraph};
    use crate::orbits::all_orbits;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn powers_of_two_differences_are_distinct() {
        let h = DiagonalHamiltonian::powers_of_two(3).unwrap();
        let out = check_distinct_differences(&h);
        assert!(out.distinct);
        assert!(out.collisions.is_empty());
    }

    #[test]
    fn constant_hamiltonian_collides_everywhere() {
        let h = DiagonalHamiltonian::constant(2, 1.0).unwrap();
        let out = check_distinct_differences(&h);
        assert!(!out.distinct);
        assert!(out.collisions.iter().all(|c| c.value == 0.0));
    }

    #[test]
    fn arithmetic_progression_collides() {
        let h = DiagonalHamiltonian::new(vec![0.0, 1.0, 2.0, 3.0], 1.0).unwrap();
        let out = check_distinct_differences(&h);
        assert!(!out.distinct);
        assert!(out.collisions.iter().any(|c| c.value == 1.0));
    }

    #[test]
    fn classification_under_distinct_differences() {
        let g = InteractionGraph::complete(3).unwrap();
        let h = DiagonalHamiltonian::powers_of_two(3).unwrap();
        let orbits = all_orbits(&g);
        let classes = classify_orbits(&orbits, &h).unwrap();
        let mut corners = 0;
        for c in &classes {
            match c.kind {
                OrbitKind::CornerPersistent => corners += 1,
                OrbitKind::DiagonalAveraging => {
                    assert_eq!(c.representative.0, c.representative.1)
                }
                OrbitKind::Decohering => assert_eq!(c.limit, PredictedLimit::Zero),
                OrbitKind::ConditionallyPersistent => {
                    panic!("no conditionally persistent orbit under distinct differences")
                }
            }
        }
        assert_eq!(corners, 2);
    }

    #[test]
    fn classification_under_constant_hamiltonian() {
        let g = InteractionGraph::complete(3).unwrap();
        let h = DiagonalHamiltonian::constant(3, 4.0).unwrap();
        let classes = classify_orbits(&all_orbits(&g), &h).unwrap();
        for c in &classes {
            match c.kind {
                OrbitKind::Decohering => panic!("nothing decoheres in the commuting case"),
                OrbitKind::ConditionallyPersistent => {
                    assert_eq!(c.limit, PredictedLimit::RotatingPhase { rate: 0.0 });
                }
                _ => {}
            }
        }
    }

    #[test]
    fn exactly_two_corner_orbits_for_small_registers() {
        for n in 1..=4usize {
            let g = if n == 1 {
                InteractionGraph::new(1, &[]).unwrap()
            } else {
                InteractionGraph::path(n).unwrap()
            };
            let h = DiagonalHamiltonian::powers_of_two(n).unwrap();
            let classes = classify_orbits(&all_orbits(&g), &h).unwrap();
            let corners = classes
                .iter()
                .filter(|c| c.kind == OrbitKind::CornerPersistent)
                .count();
            assert_eq!(corners, 2, "n = {n}");
        }
    }

    #[test]
    fn diagonal_orbits_average_regardless_of_hamiltonian() {
        let g = InteractionGraph::complete(3).unwrap();
        for h in [
            DiagonalHamiltonian::zero(3).unwrap(),
            DiagonalHamiltonian::powers_of_two(3).unwrap(),
        ] {
            let classes = classify_orbits(&all_orbits(&g), &h).unwrap();
            for c in classes {
                if c.representative.0 == c.representative.1 {
                    assert_eq!(c.kind, OrbitKind::DiagonalAveraging);
                }
            }
        }
    }

    #[test]
    fn decoherence_measure_ignores_diagonal_and_corners() {
        let diag = DensityMatrix::maximally_mixed(3).unwrap();
        assert_eq!(decoherence_measure(&diag), 0.0);

        let mut m = diag.matrix().clone();
        m[(0, 7)] = Complex64::new(0.3, 0.1);
        m[(7, 0)] = Complex64::new(0.3, -0.1);
        let corners_only = DensityMatrix::new(3, m).unwrap();
        assert_eq!(decoherence_measure(&corners_only), 0.0);

        let mut m2 = corners_only.matrix().clone();
        m2[(1, 2)] = Complex64::new(0.0, 0.5);
        let with_coherence = DensityMatrix::new(3, m2).unwrap();
        assert!((decoherence_measure(&with_coherence) - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn demo_state_has_the_frozen_decoherence_measure() {
        // 54 excluded-corner off-diagonal entries of modulus 1/72 each.
        let rho = crate::presets::demo_rho0();
        let expected = 54.0 / (72.0 * 72.0);
        assert!((decoherence_measure(&rho) - expected).abs() <= 1e-15);
    }

    #[test]
    fn demo_state_weight_zero_class_limit() {
        let rho = crate::presets::demo_rho0();
        let limits = predicted_diagonal_limits(&rho);
        let expected = (1.0 / 72.0 + 1.0 / 128.0) * 16.0 / 9.0;
        assert!((limits.class_values[0] - expected).abs() <= 1e-15);
    }

    #[test]
    fn corner_check_trivial_cases() {
        let g = InteractionGraph::complete(2).unwrap();
        let params = crate::lindblad::StepParams::new(1e-3, 0.5, 0.1).unwrap();

        // zero initial corner entry: trivial pass
        let h = DiagonalHamiltonian::powers_of_two(2).unwrap();
        let rho0 = DensityMatrix::maximally_mixed(2).unwrap();
        let traj = crate::lindblad::integrate(&rho0, &h, &g, &params).unwrap();
        let report = corner_phase_check(&traj, &h);
        assert_eq!(report.initial_modulus, 0.0);
        assert!(report.max_deviation <= 1e-12);

        // zero Hamiltonian: the corner entry is constant
        let h0 = DiagonalHamiltonian::zero(2).unwrap();
        let rho0 = DensityMatrix::uniform_coherent(2).unwrap();
        let traj = crate::lindblad::integrate(&rho0, &h0, &g, &params).unwrap();
        let report = corner_phase_check(&traj, &h0);
        assert_eq!(report.rate, 0.0);
        assert!(report.max_deviation <= 1e-12);
        assert!(report.max_modulus_drift <= 1e-12);
    }

    #[test]
    fn uniform_diagonal_limits() {
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        let limits = predicted_diagonal_limits(&rho);
        assert!(limits.per_label.iter().all(|&v| (v - 0.125).abs() <= 1e-15));
    }

    #[test]
    fn diagonal_limits_sum_to_the_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = DensityMatrix::random_mixed(4, &mut rng).unwrap();
        let limits = predicted_diagonal_limits(&rho);
        let total: f64 = limits.per_label.iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rate_fit_recovers_synthetic_decay() {
        let series: Vec<(f64, f64)> = (0..100)
            .map(|i| {
                let t = 0.1 * i as f64;
                (t, (-2.0 * t).exp())
            })
            .collect();
        let fit = exponential_rate_fit(&series).unwrap();
        assert!((fit.slope + 2.0).abs() <= 1e-9);
        assert!(fit.max_residual <= 1e-9);
        assert!(!fit.clipped);
    }

    #[test]
    fn rate_fit_constant_series_has_zero_slope() {
        let series: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, 0.7)).collect();
        let fit = exponential_rate_fit(&series).unwrap();
        assert!(fit.slope.abs() <= 1e-12);
    }

    #[test]
    fn rate_fit_clips_nonpositive_values() {
        let series = vec![(0.0, 1.0), (1.0, 0.0), (2.0, 0.5)];
        let fit = exponential_rate_fit(&series).unwrap();
        assert!(fit.clipped);
    }

    #[test]
    fn permutation_average_of_two_qubits_matches_swap_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = DensityMatrix::random_mixed(2, &mut rng).unwrap();
        let star = permutation_average(&rho).unwrap();
        let u = swap_matrix(2, 0, 1).unwrap();
        let swapped = &u * rho.matrix() * u.adjoint();
        let expected = (rho.matrix() + swapped).map(|z| z * 0.5);
        assert!((star.matrix() - expected).iter().all(|z| z.norm() <= 1e-14));
    }

    #[test]
    fn permutation_average_is_swap_invariant_and_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rho = DensityMatrix::random_mixed(3, &mut rng).unwrap();
        let star = permutation_average(&rho).unwrap();
        assert!((star.trace() - rho.trace()).norm() <= 1e-12);
        for j in 0..3 {
            for k in (j + 1)..3 {
                let u = swap_matrix(3, j, k).unwrap();
                let conj = &u * star.matrix() * u.adjoint();
                assert!((star.matrix() - conj).iter().all(|z| z.norm() <= 1e-12));
            }
        }
    }
}
