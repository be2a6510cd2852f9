//! Dense statevector engine over `n` node registers of `q` qubits each.
//!
//! Basis index convention: node 0 is the most significant digit, so the
//! basis state `|d_0 d_1 ... d_{n-1}>` (each `d_i < s = 2^q`) has index
//! `sum_i d_i * s^(n-1-i)`. Within a node, the node's first qubit is the most
//! significant bit of its digit.
//!
//! Gates are applied by strided index arithmetic on the amplitude array; full
//! `s^n x s^n` operators are only built by [`permutation_operator`] and the
//! verification paths in [`crate::layers`].

use std::collections::BTreeMap;

use thiserror::Error;

use crate::complexla::{CMatrix, CVector, C64, ONE, ZERO};
use crate::graphs::Permutation;

/// Largest Hilbert-space dimension for which dense operators are built.
pub const MAX_DENSE_DIM: usize = 4096;

/// Probabilities at or below this value are treated as zero.
pub const PROB_CUTOFF: f64 = 1e-14;

pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("node state {index} is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { index: usize, norm_sqr: f64 },

    #[error("node {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("two-node gate needs distinct nodes, got {0} twice")]
    SameNode(usize),

    #[error("qubit {0} listed twice or out of range")]
    BadQubit(usize),

    #[error("operation requires one qubit per node, state has q = {0}")]
    Unsupported(usize),

    #[error("dense operator of dimension {dim} exceeds the limit of {MAX_DENSE_DIM}")]
    TooLarge { dim: usize },
}

pub type SimResult<T> = Result<T, SimError>;

/// Pure state over `n` nodes with `q` qubits per node.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n: usize,
    q: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// Computational basis state with the given per-node digits.
    pub fn basis(q: usize, digits: &[usize]) -> SimResult<Self> {
        let s = 1usize << q;
        if let Some(&d) = digits.iter().find(|&&d| d >= s) {
            return Err(SimError::DimensionMismatch(format!("digit {d} does not fit in {q} qubits")));
        }
        let n = digits.len();
        let mut amps = vec![ZERO; s.pow(n as u32)];
        amps[digits.iter().fold(0, |acc, &d| acc * s + d)] = ONE;
        Ok(Self { n, q, amps })
    }

    /// Wrap raw amplitudes; the length must be `(2^q)^n`. Normalization is
    /// not checked here.
    pub fn from_amplitudes(n: usize, q: usize, amps: Vec<C64>) -> SimResult<Self> {
        let expected = (1usize << q).pow(n as u32);
        if amps.len() != expected {
            return Err(SimError::DimensionMismatch(format!(
                "expected {expected} amplitudes for n={n}, q={q}, got {}",
                amps.len()
            )));
        }
        Ok(Self { n, q, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Local dimension `2^q`.
    pub fn s(&self) -> usize {
        1 << self.q
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Per-node digits of a basis index.
    pub fn digits(&self, index: usize) -> Vec<usize> {
        index_digits(index, self.n, self.s())
    }

    fn stride(&self, node: usize) -> usize {
        self.s().pow((self.n - 1 - node) as u32)
    }

    fn check_node(&self, node: usize) -> SimResult<()> {
        if node < self.n {
            Ok(())
        } else {
            Err(SimError::NodeOutOfRange { node, n: self.n })
        }
    }

    /// Apply an `s x s` unitary to one node register.
    pub fn apply_1local(&mut self, u: &CMatrix, node: usize) -> SimResult<()> {
        let s = self.s();
        self.check_node(node)?;
        if u.rows() != s || u.cols() != s {
            return Err(SimError::DimensionMismatch(format!("expected {s}x{s} gate, got {}x{}", u.rows(), u.cols())));
        }
        let stride = self.stride(node);
        let block = stride * s;
        let mut scratch = vec![ZERO; s];
        for outer in (0..self.amps.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (d, slot) in scratch.iter_mut().enumerate() {
                    *slot = self.amps[base + d * stride];
                }
                for r in 0..s {
                    let row = u.row(r);
                    self.amps[base + r * stride] = row.iter().zip(&scratch).map(|(a, b)| a * b).sum();
                }
            }
        }
        Ok(())
    }

    /// Apply an `s^2 x s^2` unitary to nodes `(a, b)`; the gate's first
    /// register acts on node `a`.
    pub fn apply_2local(&mut self, u: &CMatrix, a: usize, b: usize) -> SimResult<()> {
        let s = self.s();
        self.check_node(a)?;
        self.check_node(b)?;
        if a == b {
            return Err(SimError::SameNode(a));
        }
        if u.rows() != s * s || u.cols() != s * s {
            return Err(SimError::DimensionMismatch(format!(
                "expected {0}x{0} gate, got {1}x{2}",
                s * s,
                u.rows(),
                u.cols()
            )));
        }
        let (sa, sb) = (self.stride(a), self.stride(b));
        let offsets: Vec<usize> = (0..s * s).map(|k| (k / s) * sa + (k % s) * sb).collect();
        self.apply_with_offsets(u, &offsets, |idx| (idx / sa) % s == 0 && (idx / sb) % s == 0);
        Ok(())
    }

    /// Apply a `2^m x 2^m` unitary to an arbitrary list of `m` global qubits.
    /// Global qubit `g` is qubit `g % q` of node `g / q`; `qubits[0]` is the
    /// most significant bit of the gate's index.
    pub fn apply_qubits(&mut self, u: &CMatrix, qubits: &[usize]) -> SimResult<()> {
        let total = self.n * self.q;
        let m = qubits.len();
        if u.rows() != 1 << m || u.cols() != 1 << m {
            return Err(SimError::DimensionMismatch(format!(
                "{m} qubits need a {0}x{0} gate, got {1}x{2}",
                1 << m,
                u.rows(),
                u.cols()
            )));
        }
        let mut mask = 0usize;
        let mut bits = Vec::with_capacity(m);
        for &g in qubits {
            if g >= total {
                return Err(SimError::BadQubit(g));
            }
            let bit = 1usize << (total - 1 - g);
            if mask & bit != 0 {
                return Err(SimError::BadQubit(g));
            }
            mask |= bit;
            bits.push(bit);
        }
        let offsets: Vec<usize> = (0..1usize << m)
            .map(|k| (0..m).filter(|&j| k >> (m - 1 - j) & 1 == 1).map(|j| bits[j]).sum())
            .collect();
        self.apply_with_offsets(u, &offsets, |idx| idx & mask == 0);
        Ok(())
    }

    fn apply_with_offsets(&mut self, u: &CMatrix, offsets: &[usize], is_base: impl Fn(usize) -> bool) {
        let dim = offsets.len();
        let mut scratch = vec![ZERO; dim];
        for base in 0..self.amps.len() {
            if !is_base(base) {
                continue;
            }
            for (slot, &off) in scratch.iter_mut().zip(offsets) {
                *slot = self.amps[base + off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                self.amps[base + off] = u.row(r).iter().zip(&scratch).map(|(a, b)| a * b).sum();
            }
        }
    }

    /// Multiply every amplitude by `phase(index)`.
    pub fn apply_diagonal(&mut self, phase: impl Fn(usize) -> C64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= phase(i);
        }
    }

    /// Reorder node registers: the result holds node `p(i)`'s register at
    /// position `i`, i.e. it is `P~ |psi>` for `P~ = permutation_operator(p)`.
    pub fn apply_permutation(&self, p: &Permutation) -> SimResult<Statevector> {
        if p.len() != self.n {
            return Err(SimError::DimensionMismatch(format!("permutation of {} for {} nodes", p.len(), self.n)));
        }
        let s = self.s();
        let mut out = vec![ZERO; self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            out[permuted_index(idx, p, self.n, s)] = a;
        }
        Ok(Statevector { n: self.n, q: self.q, amps: out })
    }

    /// Born-rule distribution over basis indices; entries at or below
    /// [`PROB_CUTOFF`] are dropped.
    pub fn outcome_distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution {
            n: self.n,
            s: self.s(),
            probs: self
                .amps
                .iter()
                .enumerate()
                .map(|(i, a)| (i, a.norm_sqr()))
                .filter(|&(_, p)| p > PROB_CUTOFF)
                .collect(),
        }
    }

    /// Probability of observing exactly `k` ones, for `k = 0..=n` (single-qubit
    /// nodes only).
    pub fn ones_count_distribution(&self) -> SimResult<Vec<f64>> {
        if self.q != 1 {
            return Err(SimError::Unsupported(self.q));
        }
        let mut out = vec![0.0; self.n + 1];
        for (i, a) in self.amps.iter().enumerate() {
            out[i.count_ones() as usize] += a.norm_sqr();
        }
        Ok(out)
    }
}

/// Kronecker product of the node states in node order.
pub fn product_state(node_states: &[CVector]) -> SimResult<Statevector> {
    let s = node_states.first().map(|v| v.len()).unwrap_or(1);
    if !s.is_power_of_two() {
        return Err(SimError::DimensionMismatch(format!("node dimension {s} is not a power of two")));
    }
    let mut amps = vec![ONE];
    for (index, v) in node_states.iter().enumerate() {
        if v.len() != s {
            return Err(SimError::DimensionMismatch(format!("node {index} has dimension {}, expected {s}", v.len())));
        }
        let norm_sqr = v.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized { index, norm_sqr });
        }
        amps = amps.iter().flat_map(|&a| v.as_slice().iter().map(move |&b| a * b)).collect();
    }
    Ok(Statevector { n: node_states.len(), q: s.trailing_zeros() as usize, amps })
}

/// `|+>` on every node of a single-qubit-per-node register.
pub fn plus_state(n: usize) -> Statevector {
    let amp = C64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
    Statevector { n, q: 1, amps: vec![amp; 1 << n] }
}

pub fn index_digits(index: usize, n: usize, s: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    let mut rest = index;
    for d in digits.iter_mut().rev() {
        *d = rest % s;
        rest /= s;
    }
    digits
}

pub fn digits_index(digits: &[usize], s: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * s + d)
}

/// Index of `P~ |idx>`: output digit `i` is input digit `p(i)`.
fn permuted_index(idx: usize, p: &Permutation, n: usize, s: usize) -> usize {
    let digits = index_digits(idx, n, s);
    let out: Vec<usize> = (0..n).map(|i| digits[p.apply(i)]).collect();
    digits_index(&out, s)
}

/// The 0/1 operator mapping `|v_1 ... v_n>` to `|v_p(1) ... v_p(n)>`.
pub fn permutation_operator(p: &Permutation, n: usize, s: usize) -> SimResult<CMatrix> {
    if p.len() != n {
        return Err(SimError::DimensionMismatch(format!("permutation of {} for {n} nodes", p.len())));
    }
    let dim = checked_dim(n, s)?;
    let mut m = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        m[(permuted_index(idx, p, n, s), idx)] = ONE;
    }
    Ok(m)
}

/// `s^n`, failing above [`MAX_DENSE_DIM`].
pub fn checked_dim(n: usize, s: usize) -> SimResult<usize> {
    let mut dim = 1usize;
    for _ in 0..n {
        dim = dim.saturating_mul(s);
        if dim > MAX_DENSE_DIM {
            return Err(SimError::TooLarge { dim });
        }
    }
    Ok(dim)
}

/// Exact outcome distribution keyed by basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    n: usize,
    s: usize,
    probs: BTreeMap<usize, f64>,
}

impl OutcomeDistribution {
    pub fn probs(&self) -> &BTreeMap<usize, f64> {
        &self.probs
    }

    pub fn get(&self, index: usize) -> f64 {
        self.probs.get(&index).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Bitstring label of a basis index (single-qubit nodes), node 0 first.
    pub fn bitstring(&self, index: usize) -> String {
        index_digits(index, self.n, self.s)
            .iter()
            .map(|d| char::from_digit(*d as u32, 36).unwrap_or('?'))
            .collect()
    }
}
