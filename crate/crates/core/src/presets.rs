//! The bundled three-qubit worked example: complete interaction graph,
//! power-of-two Hamiltonian, and an initial state mixing a uniform coherence
//! block with a linear ramp on the diagonal. The CLI exposes these under its
//! configuration presets and the verification suites pin their expected
//! asymptotics.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::hilbert::{DensityMatrix, InteractionGraph};
use crate::lindblad::DiagonalHamiltonian;

pub const DEMO_QUBITS: usize = 3;

/// Complete graph on three qubits.
pub fn demo_graph() -> InteractionGraph {
    InteractionGraph::complete(DEMO_QUBITS).expect("complete graph on 3 qubits is valid")
}

/// lambda_x = 2^x on three qubits, hbar = 1.
pub fn demo_hamiltonian() -> DiagonalHamiltonian {
    DiagonalHamiltonian::powers_of_two(DEMO_QUBITS).expect("valid diagonal Hamiltonian")
}

/// The raw demo initial state: all-ones coherence block divided by 128 plus
/// the diagonal ramp (x + 1) / 72.
///
/// Its trace is 9/16, not 1 — run it through [`DensityMatrix::normalized`]
/// (or set `normalize` in a CLI config) before integrating.
pub fn demo_rho0_raw() -> DensityMatrix {
    let dim = 1 << DEMO_QUBITS;
    let m = DMatrix::from_fn(dim, dim, |x, y| {
        let coherence = 1.0 / 128.0;
        let diag = if x == y { (x as f64 + 1.0) / 72.0 } else { 0.0 };
        Complex64::new(coherence + diag, 0.0)
    });
    DensityMatrix::new(DEMO_QUBITS, m).expect("demo state has the right shape")
}

/// The demo initial state normalized to unit trace (scaled by 16/9).
pub fn demo_rho0() -> DensityMatrix {
    demo_rho0_raw()
        .normalized()
        .expect("demo state has positive trace")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Tolerances;

    #[test]
    fn raw_demo_state_has_trace_nine_sixteenths() {
        let rho = demo_rho0_raw();
        assert!((rho.trace().re - 9.0 / 16.0).abs() <= 1e-15);
        let report = rho.validate(&Tolerances::default());
        assert!(!report.is_valid());
        assert!((report.trace_defect - 7.0 / 16.0).abs() <= 1e-15);
        assert!(report.hermitian_ok);
    }

    #[test]
    fn normalized_demo_state_is_valid() {
        let rho = demo_rho0();
        let report = rho.validate(&Tolerances::default());
        assert!(report.is_valid(), "{}", report.summary());
        // off-diagonal entries become exactly 1/72 after normalization
        assert!((rho.entry(0, 7).re - 1.0 / 72.0).abs() <= 1e-15);
    }

    #[test]
    fn demo_hamiltonian_levels() {
        let h = demo_hamiltonian();
        let expected: Vec<f64> = (0..8).map(|x| (2.0f64).powi(x)).collect();
        assert_eq!(h.lambdas(), expected.as_slice());
    }
}
