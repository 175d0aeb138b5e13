//! Property suites over randomized inputs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qsync_core::consensus::{
    classical_rhs, derealify, random_connected_edges, realified_rhs, realify, ClassicalSystem,
};
use qsync_core::hilbert::{BasisLabel, DensityMatrix, InteractionGraph};
use qsync_core::lindblad::{master_rhs, DiagonalHamiltonian};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn complex_entry() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn square_matrix(n: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    let dim = 1usize << n;
    proptest::collection::vec(complex_entry(), dim * dim)
        .prop_map(move |v| DMatrix::from_vec(dim, dim, v))
}

fn hamiltonian(n: usize) -> impl Strategy<Value = DiagonalHamiltonian> {
    proptest::collection::vec(-3.0..3.0f64, 1usize << n)
        .prop_map(|l| DiagonalHamiltonian::new(l, 1.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn master_rhs_is_traceless_and_hermitian_on_hermitian_input(
        n in 2usize..=4,
        seed in any::<u64>(),
        m in square_matrix(4),
        h4 in hamiltonian(4),
    ) {
        // shrink the sampled dim-16 data down to the requested register size
        let dim = 1usize << n;
        let sub = DMatrix::from_fn(dim, dim, |r, c| m[(r, c)]);
        let herm = (&sub + sub.adjoint()).map(|z| z * 0.5);
        let h = DiagonalHamiltonian::new(h4.lambdas()[..dim].to_vec(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = InteractionGraph::new(n, &random_connected_edges(n, 0.5, &mut rng)).unwrap();
        let out = master_rhs(&herm, &h, &g).unwrap();
        prop_assert!(out.trace().norm() <= 1e-12);
        let defect = (&out - out.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(defect <= 1e-12);
    }

    #[test]
    fn master_rhs_is_linear(
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        m1 in square_matrix(3),
        m2 in square_matrix(3),
        h in hamiltonian(3),
    ) {
        let g = InteractionGraph::complete(3).unwrap();
        let f1 = master_rhs(&m1, &h, &g).unwrap();
        let f2 = master_rhs(&m2, &h, &g).unwrap();
        let mixed = m1.map(|z| z * a) + m2.map(|z| z * b);
        let fm = master_rhs(&mixed, &h, &g).unwrap();
        let lin = f1.map(|z| z * a) + f2.map(|z| z * b);
        let err = (&fm - &lin).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace_and_hermiticity(
        n in 2usize..=4,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::random_mixed(n, &mut rng).unwrap();
        for keep in 0..n {
            let red = rho.partial_trace_single(keep).unwrap();
            prop_assert!((red.trace() - rho.trace()).norm() <= 1e-12);
            prop_assert!((red.entry(0, 1) - red.entry(1, 0).conj()).norm() <= 1e-12);
        }
    }

    #[test]
    fn realified_flow_equals_complex_flow(
        n in 2usize..=8,
        seed in any::<u64>(),
        thetas_raw in proptest::collection::vec(-3.0..3.0f64, 8),
        x_raw in proptest::collection::vec(complex_entry(), 8),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = random_connected_edges(n, 0.4, &mut rng);
        let sys = ClassicalSystem::new(thetas_raw[..n].to_vec(), edges).unwrap();
        let x = &x_raw[..n];
        let complex = classical_rhs(&sys, x).unwrap();
        let real = realified_rhs(&sys, &realify(x)).unwrap();
        let back = derealify(&real);
        for (zc, zr) in complex.iter().zip(&back) {
            prop_assert!((zc - zr).norm() <= 1e-14);
        }
    }

    #[test]
    fn label_round_trip(n in 1usize..=10, raw in any::<usize>()) {
        let index = raw & ((1usize << n) - 1);
        let label = BasisLabel::new(index, n).unwrap();
        prop_assert_eq!(BasisLabel::from_bits(&label.bits()).unwrap(), label);
        for j in 0..n {
            for k in (j + 1)..n {
                let twice = label
                    .swap_qubits(j, k)
                    .unwrap()
                    .swap_qubits(j, k)
                    .unwrap();
                prop_assert_eq!(twice, label);
            }
        }
    }
}
