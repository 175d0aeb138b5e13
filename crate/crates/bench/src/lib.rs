//! Shared fixtures for the criterion benchmarks.

use qsync_core::hilbert::{DensityMatrix, InteractionGraph};
use qsync_core::lindblad::DiagonalHamiltonian;

/// Complete-graph setup with power-of-two levels at a given register size.
pub fn dense_setup(n: usize) -> (DensityMatrix, DiagonalHamiltonian, InteractionGraph) {
    let graph = InteractionGraph::complete(n).expect("valid graph");
    let hamiltonian = DiagonalHamiltonian::powers_of_two(n).expect("valid hamiltonian");
    let rho0 = DensityMatrix::uniform_coherent(n).expect("valid state");
    (rho0, hamiltonian, graph)
}
