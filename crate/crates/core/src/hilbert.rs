//! Computational-basis bookkeeping for an n-qubit register: bit-string
//! labels, qubit transpositions and their permutation matrices, density
//! matrix validation, and the single-qubit partial trace.
//!
//! Qubit positions are 0-based throughout the library, with position 0 the
//! leftmost (most significant) bit of a label. Any 1-based user-facing
//! numbering is translated at the configuration boundary.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use std::fmt;

use crate::error::{Error, Result};
use crate::fingerprint::fnv1a64;

/// Hard cap on the qubit count for the dense representation (dim 1024).
pub const MAX_QUBITS: usize = 10;

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "qubit count must be at least 1",
        });
    }
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
    }
    Ok(())
}

/// A computational-basis label: an n-bit string read as a binary number,
/// with qubit 0 the most significant bit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel {
    index: usize,
    n: usize,
}

impl BasisLabel {
    pub fn new(index: usize, n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        if index >= 1 << n {
            return Err(Error::DimensionMismatch {
                context: "basis label index",
                expected: 1 << n,
                actual: index,
            });
        }
        Ok(Self { index, n })
    }

    /// Builds a label from its bits, leftmost first.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_qubit_count(bits.len())?;
        let mut index = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(Error::InvalidParameter {
                    name: "bits",
                    value: f64::from(b),
                    reason: "bits must be 0 or 1",
                });
            }
            index = (index << 1) | usize::from(b);
        }
        Ok(Self {
            index,
            n: bits.len(),
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Bit value at qubit position `q` (0-based from the left).
    pub fn bit(&self, q: usize) -> Result<u8> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange {
                index: q,
                n: self.n,
            });
        }
        Ok(((self.index >> (self.n - 1 - q)) & 1) as u8)
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.n)
            .map(|q| ((self.index >> (self.n - 1 - q)) & 1) as u8)
            .collect()
    }

    pub fn hamming_weight(&self) -> u32 {
        self.index.count_ones()
    }

    /// The label with the bits at qubit positions `j` and `k` exchanged.
    pub fn swap_qubits(&self, j: usize, k: usize) -> Result<BasisLabel> {
        check_transposition(self.n, j, k)?;
        Ok(Self {
            index: swapped_index(self.index, self.n, j, k),
            n: self.n,
        })
    }

    pub fn bitstring(&self) -> String {
        self.bits().iter().map(|b| char::from(b'0' + b)).collect()
    }
}

impl fmt::Debug for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>", self.bitstring())
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bitstring())
    }
}

fn check_transposition(n: usize, j: usize, k: usize) -> Result<()> {
    if j >= n {
        return Err(Error::QubitOutOfRange { index: j, n });
    }
    if k >= n {
        return Err(Error::QubitOutOfRange { index: k, n });
    }
    if j == k {
        return Err(Error::InvalidEdge {
            a: j,
            b: k,
            reason: "transposition endpoints must differ",
        });
    }
    Ok(())
}

/// Unchecked transposition on a raw label index.
pub(crate) fn swapped_index(index: usize, n: usize, j: usize, k: usize) -> usize {
    let bj = (index >> (n - 1 - j)) & 1;
    let bk = (index >> (n - 1 - k)) & 1;
    if bj == bk {
        index
    } else {
        index ^ (1 << (n - 1 - j)) ^ (1 << (n - 1 - k))
    }
}

/// Where the matrix unit |x><y| lands under conjugation by the swap of
/// qubits `j` and `k`: both labels transposed componentwise.
pub fn swap_conjugate_pair(
    j: usize,
    k: usize,
    x: BasisLabel,
    y: BasisLabel,
) -> Result<(BasisLabel, BasisLabel)> {
    if x.n() != y.n() {
        return Err(Error::DimensionMismatch {
            context: "label pair",
            expected: x.n(),
            actual: y.n(),
        });
    }
    Ok((x.swap_qubits(j, k)?, y.swap_qubits(j, k)?))
}

/// Dense permutation matrix of the swap of qubits `j` and `k` on `n` qubits:
/// entry 1 at (u(x), x) for every label x. Real, symmetric, involutive.
pub fn swap_matrix(n: usize, j: usize, k: usize) -> Result<DMatrix<Complex64>> {
    check_qubit_count(n)?;
    check_transposition(n, j, k)?;
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        m[(swapped_index(x, n, j, k), x)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// Undirected connected interaction graph on qubits 0..n-1.
///
/// Edges are stored sorted with the smaller endpoint first; duplicates and
/// self-loops are rejected at construction, as is any disconnected edge set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl InteractionGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        check_qubit_count(n)?;
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
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
        normalized.sort_unstable();
        if normalized.windows(2).any(|w| w[0] == w[1]) {
            let (a, b) = normalized
                .windows(2)
                .find(|w| w[0] == w[1])
                .map(|w| w[0])
                .unwrap();
            return Err(Error::InvalidEdge {
                a,
                b,
                reason: "duplicate edge",
            });
        }
        let graph = Self {
            n,
            edges: normalized,
        };
        if !graph.is_connected() {
            return Err(Error::DisconnectedGraph { n });
        }
        Ok(graph)
    }

    /// Complete graph on `n` qubits.
    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                edges.push((a, b));
            }
        }
        Self::new(n, &edges)
    }

    /// Path graph 0-1-...-(n-1).
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|b| (b - 1, b)).collect();
        Self::new(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Per-edge label permutation tables: entry `x` of table `e` is the label
    /// obtained from `x` by the transposition along edge `e`.
    pub fn edge_label_maps(&self) -> Vec<Vec<usize>> {
        let dim = self.dim();
        self.edges
            .iter()
            .map(|&(j, k)| (0..dim).map(|x| swapped_index(x, self.n, j, k)).collect())
            .collect()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
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
        count == self.n
    }

    pub fn fingerprint(&self) -> u64 {
        let mut bytes = Vec::with_capacity(8 + 16 * self.edges.len());
        bytes.extend_from_slice(&(self.n as u64).to_le_bytes());
        for &(a, b) in &self.edges {
            bytes.extend_from_slice(&(a as u64).to_le_bytes());
            bytes.extend_from_slice(&(b as u64).to_le_bytes());
        }
        fnv1a64(&bytes)
    }
}

/// Validation tolerances for density matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Max allowed `|rho[x][y] - conj(rho[y][x])|`.
    pub hermiticity: f64,
    /// Max allowed |tr(rho) - 1|.
    pub trace: f64,
    /// Min eigenvalue must be >= -positivity.
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-9,
            trace: 1e-9,
            positivity: 1e-8,
        }
    }
}

/// Outcome of density-matrix validation. Always produced; never an error.
#[derive(Clone, Copy, Debug)]
pub struct DensityReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub hermitian_ok: bool,
    pub trace_ok: bool,
    pub positive_ok: bool,
}

impl DensityReport {
    pub fn is_valid(&self) -> bool {
        self.hermitian_ok && self.trace_ok && self.positive_ok
    }

    pub fn summary(&self) -> String {
        format!(
            "hermiticity defect {:.3e} ({}), trace defect {:.3e} ({}), min eigenvalue {:.3e} ({})",
            self.hermiticity_defect,
            if self.hermitian_ok { "ok" } else { "FAIL" },
            self.trace_defect,
            if self.trace_ok { "ok" } else { "FAIL" },
            self.min_eigenvalue,
            if self.positive_ok { "ok" } else { "FAIL" },
        )
    }
}

/// Dense 2^n x 2^n complex matrix holding the state of the qubit register.
///
/// Construction only checks the shape; physical validity (Hermitian, unit
/// trace, positive semidefinite) is reported by [`DensityMatrix::validate`]
/// so that defective inputs can be represented and diagnosed.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(n: usize, data: DMatrix<Complex64>) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1 << n;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                context: "density matrix",
                expected: dim,
                actual: data.nrows().max(data.ncols()),
            });
        }
        Ok(Self { n, data })
    }

    /// Builds from a square matrix, inferring the qubit count from the size.
    pub fn from_matrix(data: DMatrix<Complex64>) -> Result<Self> {
        let dim = data.nrows();
        if data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                context: "density matrix",
                expected: dim,
                actual: data.ncols(),
            });
        }
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { dim });
        }
        let n = dim.trailing_zeros() as usize;
        Self::new(n, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn entry(&self, x: usize, y: usize) -> Complex64 {
        self.data[(x, y)]
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    /// The maximally mixed state I / 2^n.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1 << n;
        let scale = Complex64::new(1.0 / dim as f64, 0.0);
        Ok(Self {
            n,
            data: DMatrix::from_diagonal_element(dim, dim, scale),
        })
    }

    /// The pure state with equal amplitude on every basis vector
    /// (all entries 1 / 2^n).
    pub fn uniform_coherent(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1 << n;
        let v = Complex64::new(1.0 / dim as f64, 0.0);
        Ok(Self {
            n,
            data: DMatrix::from_element(dim, dim, v),
        })
    }

    /// The projector |x><x| onto a single basis vector.
    pub fn basis_projector(label: BasisLabel) -> Self {
        let dim = 1 << label.n();
        let mut data = DMatrix::zeros(dim, dim);
        data[(label.index(), label.index())] = Complex64::new(1.0, 0.0);
        Self {
            n: label.n(),
            data,
        }
    }

    /// A random full-rank mixed state: A A^dag normalized to unit trace,
    /// with A drawn entrywise uniformly from the complex unit square.
    pub fn random_mixed<R: Rng>(n: usize, rng: &mut R) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1 << n;
        let a = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let mut rho = &a * a.adjoint();
        let tr = rho.trace().re;
        rho.scale_mut(1.0 / tr);
        Ok(Self { n, data: rho })
    }

    /// (M + M^dag) / 2.
    pub fn hermitized(&self) -> Self {
        Self {
            n: self.n,
            data: hermitize(&self.data),
        }
    }

    /// Rescales to unit trace. Fails if the trace modulus is numerically zero.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr.norm() < 1e-300 {
            return Err(Error::InvalidDensity(
                "cannot normalize: trace is zero".into(),
            ));
        }
        Ok(Self {
            n: self.n,
            data: self.data.map(|z| z / tr),
        })
    }

    /// Reports Hermiticity defect, trace defect and minimum eigenvalue
    /// against the given tolerances.
    pub fn validate(&self, tol: &Tolerances) -> DensityReport {
        let dim = self.dim();
        let mut herm = 0.0f64;
        for x in 0..dim {
            for y in x..dim {
                let d = (self.data[(x, y)] - self.data[(y, x)].conj()).norm();
                herm = herm.max(d);
            }
        }
        let trace_defect = (self.trace() - Complex64::new(1.0, 0.0)).norm();
        let min_eigenvalue = min_eigenvalue_hermitian(&hermitize(&self.data));
        DensityReport {
            hermiticity_defect: herm,
            trace_defect,
            min_eigenvalue,
            hermitian_ok: herm <= tol.hermiticity,
            trace_ok: trace_defect <= tol.trace,
            positive_ok: min_eigenvalue >= -tol.positivity,
        }
    }

    /// Reduced state of qubit `keep` (0-based), tracing out all others.
    ///
    /// The input must pass validation at the default tolerances.
    pub fn partial_trace_single(&self, keep: usize) -> Result<DensityMatrix> {
        let report = self.validate(&Tolerances::default());
        if !report.is_valid() {
            return Err(Error::InvalidDensity(report.summary()));
        }
        self.partial_trace_single_unchecked(keep)
    }

    pub(crate) fn partial_trace_single_unchecked(&self, keep: usize) -> Result<DensityMatrix> {
        if keep >= self.n {
            return Err(Error::QubitOutOfRange {
                index: keep,
                n: self.n,
            });
        }
        let mut out = DMatrix::zeros(2, 2);
        let rest_bits = self.n - 1;
        let shift = self.n - 1 - keep;
        // Insert the kept bit at position `keep` into each assignment of the
        // remaining bits and sum the matching entries.
        let expand = |rest: usize, bit: usize| -> usize {
            let high = rest >> shift << (shift + 1);
            let low = rest & ((1 << shift) - 1);
            high | (bit << shift) | low
        };
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for rest in 0..(1usize << rest_bits) {
                    acc += self.data[(expand(rest, a), expand(rest, b))];
                }
                out[(a, b)] = acc;
            }
        }
        DensityMatrix::new(1, out)
    }
}

pub(crate) fn hermitize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub(crate) fn min_eigenvalue_hermitian(m: &DMatrix<Complex64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(bits: &str) -> BasisLabel {
        BasisLabel::from_bits(
            &bits
                .chars()
                .map(|c| if c == '1' { 1u8 } else { 0u8 })
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn label_bits_index_round_trip() {
        for n in 1..=5 {
            for idx in 0..(1usize << n) {
                let l = BasisLabel::new(idx, n).unwrap();
                let back = BasisLabel::from_bits(&l.bits()).unwrap();
                assert_eq!(back.index(), idx);
                assert_eq!(l.hamming_weight(), idx.count_ones());
            }
        }
    }

    #[test]
    fn label_bit_order_is_most_significant_first() {
        let l = label("011");
        assert_eq!(l.index(), 3);
        assert_eq!(l.bit(0).unwrap(), 0);
        assert_eq!(l.bit(1).unwrap(), 1);
        assert_eq!(l.bit(2).unwrap(), 1);
        assert_eq!(l.bitstring(), "011");
    }

    #[test]
    fn transposition_examples() {
        // Qubit positions 0-based: the pairs below exercise both a real
        // exchange and a fixed point.
        assert_eq!(label("011").swap_qubits(0, 1).unwrap(), label("101"));
        assert_eq!(label("101").swap_qubits(0, 2).unwrap(), label("101"));
        assert_eq!(label("110").swap_qubits(1, 2).unwrap(), label("101"));
    }

    #[test]
    fn transposition_is_involutive_and_fixes_equal_bits() {
        for n in 1..=5usize {
            for idx in 0..(1usize << n) {
                let l = BasisLabel::new(idx, n).unwrap();
                for j in 0..n {
                    for k in (j + 1)..n {
                        let s = l.swap_qubits(j, k).unwrap();
                        assert_eq!(s.swap_qubits(j, k).unwrap(), l);
                        if l.bit(j).unwrap() == l.bit(k).unwrap() {
                            assert_eq!(s, l);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn transposition_rejects_bad_indices() {
        let l = label("010");
        assert!(l.swap_qubits(0, 3).is_err());
        assert!(l.swap_qubits(1, 1).is_err());
    }

    #[test]
    fn swap_matrix_two_qubits_is_the_swap_gate() {
        let u = swap_matrix(2, 0, 1).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let mut expected = DMatrix::zeros(4, 4);
        expected[(0, 0)] = one;
        expected[(2, 1)] = one;
        expected[(1, 2)] = one;
        expected[(3, 3)] = one;
        assert_eq!(u, expected);
    }

    #[test]
    fn swap_matrix_is_real_symmetric_involution() {
        for n in 2..=5usize {
            for j in 0..n {
                for k in (j + 1)..n {
                    let u = swap_matrix(n, j, k).unwrap();
                    assert_eq!(u.map(|z| z.im), DMatrix::zeros(1 << n, 1 << n));
                    assert_eq!(u.transpose(), u);
                    let sq = &u * &u;
                    assert_eq!(sq, DMatrix::identity(1 << n, 1 << n));
                }
            }
        }
    }

    #[test]
    fn swap_matrix_moves_basis_columns() {
        let u = swap_matrix(3, 0, 1).unwrap();
        let mut col = DMatrix::zeros(8, 1);
        col[(label("011").index(), 0)] = Complex64::new(1.0, 0.0);
        let moved = &u * &col;
        let mut expected = DMatrix::zeros(8, 1);
        expected[(label("101").index(), 0)] = Complex64::new(1.0, 0.0);
        assert_eq!(moved, expected);
    }

    #[test]
    fn conjugate_pair_examples() {
        let (a, b) = swap_conjugate_pair(0, 1, label("001"), label("010")).unwrap();
        assert_eq!((a, b), (label("001"), label("100")));
        let (a, b) = swap_conjugate_pair(1, 2, label("000"), label("111")).unwrap();
        assert_eq!((a, b), (label("000"), label("111")));
    }

    #[test]
    fn conjugate_pair_matches_dense_conjugation_n2() {
        // U |x><y| U^dag must have its single nonzero at the returned pair.
        let n = 2;
        let dim = 1 << n;
        let u = swap_matrix(n, 0, 1).unwrap();
        for x in 0..dim {
            for y in 0..dim {
                let lx = BasisLabel::new(x, n).unwrap();
                let ly = BasisLabel::new(y, n).unwrap();
                let (px, py) = swap_conjugate_pair(0, 1, lx, ly).unwrap();
                let mut unit = DMatrix::<Complex64>::zeros(dim, dim);
                unit[(x, y)] = Complex64::new(1.0, 0.0);
                let conj = &u * unit * u.adjoint();
                for r in 0..dim {
                    for c in 0..dim {
                        let expected = if (r, c) == (px.index(), py.index()) {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                        assert_eq!(conj[(r, c)], expected, "entry ({r},{c}) for pair ({x},{y})");
                    }
                }
            }
        }
    }

    #[test]
    fn graph_construction_rules() {
        assert!(InteractionGraph::new(3, &[(0, 1), (1, 2)]).is_ok());
        // disconnected
        assert!(matches!(
            InteractionGraph::new(3, &[(0, 1)]),
            Err(Error::DisconnectedGraph { n: 3 })
        ));
        // self loop
        assert!(InteractionGraph::new(2, &[(0, 0)]).is_err());
        // duplicate (in either orientation)
        assert!(InteractionGraph::new(2, &[(0, 1), (1, 0)]).is_err());
        // out of range
        assert!(InteractionGraph::new(2, &[(0, 2)]).is_err());
        // single qubit: no edges, trivially connected
        assert!(InteractionGraph::new(1, &[]).is_ok());
        // cap
        assert!(matches!(
            InteractionGraph::new(11, &[]),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = DensityMatrix::basis_projector(label("000"));
        for keep in 0..3 {
            let red = rho.partial_trace_single(keep).unwrap();
            assert!((red.entry(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            assert!(red.entry(1, 1).norm() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        for keep in 0..3 {
            let red = rho.partial_trace_single(keep).unwrap();
            assert!((red.entry(0, 0).re - 0.5).abs() < 1e-15);
            assert!((red.entry(1, 1).re - 0.5).abs() < 1e-15);
            assert!(red.entry(0, 1).norm() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_bell_state() {
        // (|00> + |11>)(<00| + <11|) / 2 reduced on either qubit is I/2,
        // frozen from summing the traced indices by hand.
        let mut m = DMatrix::zeros(4, 4);
        for &x in &[0usize, 3] {
            for &y in &[0usize, 3] {
                m[(x, y)] = Complex64::new(0.5, 0.0);
            }
        }
        let rho = DensityMatrix::new(2, m).unwrap();
        for keep in 0..2 {
            let red = rho.partial_trace_single(keep).unwrap();
            assert!((red.entry(0, 0).re - 0.5).abs() < 1e-15);
            assert!((red.entry(1, 1).re - 0.5).abs() < 1e-15);
            assert!(red.entry(0, 1).norm() < 1e-15);
            assert!(red.entry(1, 0).norm() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_preserves_trace_and_hermiticity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        use rand::SeedableRng;
        for n in 2..=4usize {
            let rho = DensityMatrix::random_mixed(n, &mut rng).unwrap();
            for keep in 0..n {
                let red = rho.partial_trace_single(keep).unwrap();
                assert!((red.trace() - rho.trace()).norm() <= 1e-12);
                assert!((red.entry(0, 1) - red.entry(1, 0).conj()).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn validate_identity_passes() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let rep = rho.validate(&Tolerances::default());
        assert!(rep.is_valid());
        assert_eq!(rep.hermiticity_defect, 0.0);
        assert_eq!(rep.trace_defect, 0.0);
    }

    #[test]
    fn validate_zero_matrix_fails_on_trace() {
        let rho = DensityMatrix::new(2, DMatrix::zeros(4, 4)).unwrap();
        let rep = rho.validate(&Tolerances::default());
        assert!(!rep.is_valid());
        assert!((rep.trace_defect - 1.0).abs() < 1e-15);
        assert!(rep.hermitian_ok);
    }

    #[test]
    fn partial_trace_rejects_invalid_density() {
        let rho = DensityMatrix::new(2, DMatrix::zeros(4, 4)).unwrap();
        assert!(matches!(
            rho.partial_trace_single(0),
            Err(Error::InvalidDensity(_))
        ));
    }
}
