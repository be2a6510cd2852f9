//! Exact simulation of sum-aggregation message passing by EDU circuits.
//!
//! Every node carries `(2k+1)·w` registers of `b` qubits: the states
//! `h^(0..=k)` followed by the aggregates `a^(1..=k)`. Round `l` first applies,
//! on every edge, the addition EDU that adds each endpoint's `h^(l-1)` into
//! the other endpoint's `a^(l)` modulo `2^b`, and then XORs the update table's
//! output `upd_l(h^(l-1), a^(l))` onto the still-zero `h^(l)`. Started from a
//! computational basis state, the circuit stays on basis states and ends on
//! the classical result.

use rand::Rng;
use thiserror::Error;

use crate::complexla::{CMatrix, C64, ONE, ZERO};
use crate::graphs::Graph;
use crate::layers::{EduGate, LayerError};
use crate::simulator::{SimError, Statevector};

/// Largest total qubit count the statevector simulation accepts.
pub const MAX_SIM_QUBITS: usize = 20;

/// Largest register width for [`increment_diagonalization`].
pub const MAX_INCREMENT_BITS: usize = 4;

/// Largest register width for the dense [`addition_edu`].
pub const MAX_ADDITION_BITS: usize = 2;

/// Amplitudes this close to 1 count as a point mass.
pub const BASIS_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpnnError {
    #[error("{needed} qubits exceed the simulation budget of {max}")]
    QubitBudget { needed: usize, max: usize },

    #[error("register width b = {b} outside 1..={max}")]
    BadWidth { b: usize, max: usize },

    #[error("update table for layer {layer} has {actual} entries, expected {expected}")]
    TableSize { layer: usize, expected: usize, actual: usize },

    #[error("update table for layer {layer} maps input {input} to an invalid state")]
    TableValue { layer: usize, input: usize },

    #[error("spec has {actual} update tables, expected k = {expected}")]
    TableCount { expected: usize, actual: usize },

    #[error("node {node}: initial value does not fit {w} registers of {b} bits")]
    BadInit { node: usize, w: usize, b: usize },

    #[error("expected initial values for {expected} nodes, got {actual}")]
    InitCount { expected: usize, actual: usize },

    #[error("state left the computational basis after {stage} (largest probability {max_prob})")]
    NotBasis { stage: String, max_prob: f64 },

    #[error("node {node} register {register}: quantum {quantum}, classical {classical}")]
    Mismatch { node: usize, register: usize, quantum: u64, classical: u64 },

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error(transparent)]
    Layer(#[from] LayerError),
}

pub type MpnnResult<T> = Result<T, MpnnError>;

/// Update function of one round as a lookup table. The input index packs
/// `(h, a)` with `h` most significant, each a tuple of `w` registers packed
/// register 0 first; outputs are `w`-register tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateTable {
    w: usize,
    b: usize,
    entries: Vec<Vec<u64>>,
}

impl UpdateTable {
    pub fn from_fn(w: usize, b: usize, mut f: impl FnMut(&[u64], &[u64]) -> Vec<u64>) -> Self {
        let entries = (0..1usize << (2 * w * b))
            .map(|idx| {
                let (h, a) = split_input(idx, w, b);
                f(&h, &a)
            })
            .collect();
        Self { w, b, entries }
    }

    pub fn random<R: Rng + ?Sized>(w: usize, b: usize, rng: &mut R) -> Self {
        Self::from_fn(w, b, |_, _| (0..w).map(|_| rng.gen_range(0..1u64 << b)).collect())
    }

    /// `upd(h, a) = a`.
    pub fn aggregate(w: usize, b: usize) -> Self {
        Self::from_fn(w, b, |_, a| a.to_vec())
    }

    /// `upd(h, a) = h`.
    pub fn identity(w: usize, b: usize) -> Self {
        Self::from_fn(w, b, |h, _| h.to_vec())
    }

    pub fn apply(&self, h: &[u64], a: &[u64]) -> &[u64] {
        let idx = (pack(h, self.b) << (self.w * self.b)) | pack(a, self.b);
        &self.entries[idx]
    }
}

fn pack(regs: &[u64], b: usize) -> usize {
    regs.iter().fold(0, |acc, &r| (acc << b) | r as usize)
}

fn unpack(mut x: usize, w: usize, b: usize) -> Vec<u64> {
    let mask = (1usize << b) - 1;
    let mut out = vec![0; w];
    for r in out.iter_mut().rev() {
        *r = (x & mask) as u64;
        x >>= b;
    }
    out
}

fn split_input(idx: usize, w: usize, b: usize) -> (Vec<u64>, Vec<u64>) {
    let wb = w * b;
    (unpack(idx >> wb, w, b), unpack(idx & ((1 << wb) - 1), w, b))
}

/// Fixed-point MPNN: `k` rounds, `w` registers of `b` bits per state.
#[derive(Clone, Debug, PartialEq)]
pub struct MpnnSpec {
    pub k: usize,
    pub w: usize,
    pub b: usize,
    pub tables: Vec<UpdateTable>,
}

impl MpnnSpec {
    pub fn new(k: usize, w: usize, b: usize, tables: Vec<UpdateTable>) -> MpnnResult<Self> {
        if b == 0 || b > 16 {
            return Err(MpnnError::BadWidth { b, max: 16 });
        }
        if tables.len() != k {
            return Err(MpnnError::TableCount { expected: k, actual: tables.len() });
        }
        let expected = 1usize << (2 * w * b);
        for (layer, t) in tables.iter().enumerate() {
            if t.entries.len() != expected || t.w != w || t.b != b {
                return Err(MpnnError::TableSize { layer, expected, actual: t.entries.len() });
            }
            if let Some(input) = t.entries.iter().position(|e| e.len() != w || e.iter().any(|&x| x >> b != 0)) {
                return Err(MpnnError::TableValue { layer, input });
            }
        }
        Ok(Self { k, w, b, tables })
    }

    pub fn layout(&self) -> RegisterLayout {
        RegisterLayout { k: self.k, w: self.w, b: self.b }
    }
}

/// Qubit offsets of each register within one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegisterLayout {
    pub k: usize,
    pub w: usize,
    pub b: usize,
}

impl RegisterLayout {
    pub fn qubits_per_node(&self) -> usize {
        (2 * self.k + 1) * self.w * self.b
    }

    /// First local qubit of `h^(l)` register `r`.
    pub fn h(&self, l: usize, r: usize) -> usize {
        (l * self.w + r) * self.b
    }

    /// First local qubit of `a^(l)` register `r`, `l >= 1`.
    pub fn a(&self, l: usize, r: usize) -> usize {
        ((self.k + l) * self.w + r) * self.b
    }

    fn bits(&self, node: usize, first: usize) -> Vec<usize> {
        let base = node * self.qubits_per_node() + first;
        (base..base + self.b).collect()
    }
}

fn check_values(values: &[Vec<u64>], w: usize, b: usize) -> MpnnResult<()> {
    for (node, v) in values.iter().enumerate() {
        if v.len() != w || v.iter().any(|&x| x >> b != 0) {
            return Err(MpnnError::BadInit { node, w, b });
        }
    }
    Ok(())
}

/// Reference forward pass with `b`-bit wraparound sums.
pub fn classical_forward(spec: &MpnnSpec, g: &Graph, init: &[Vec<u64>]) -> MpnnResult<Vec<Vec<u64>>> {
    if init.len() != g.n() {
        return Err(MpnnError::InitCount { expected: g.n(), actual: init.len() });
    }
    check_values(init, spec.w, spec.b)?;
    let mask = (1u64 << spec.b) - 1;
    let mut h = init.to_vec();
    for table in &spec.tables {
        let agg: Vec<Vec<u64>> = (0..g.n())
            .map(|v| {
                (0..spec.w)
                    .map(|r| g.neighbors(v).iter().fold(0u64, |acc, &u| acc.wrapping_add(h[u][r])) & mask)
                    .collect()
            })
            .collect();
        h = (0..g.n()).map(|v| table.apply(&h[v], &agg[v]).to_vec()).collect();
    }
    Ok(h)
}

/// Fourier diagonalization `S1 = v^dag d v` of the cyclic increment
/// `|x> -> |x+1 mod 2^b>`.
pub fn increment_diagonalization(b: usize) -> MpnnResult<(CMatrix, CMatrix)> {
    if b == 0 || b > MAX_INCREMENT_BITS {
        return Err(MpnnError::BadWidth { b, max: MAX_INCREMENT_BITS });
    }
    Ok((fourier(b), CMatrix::phase_diag(&fourier_phases(b))))
}

/// `F[m][x] = e^{2 pi i m x / N} / sqrt(N)`.
fn fourier(b: usize) -> CMatrix {
    let n = 1usize << b;
    let norm = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |m, x| C64::from_polar(norm, 2.0 * std::f64::consts::PI * ((m * x) % n) as f64 / n as f64))
}

fn fourier_phases(b: usize) -> Vec<f64> {
    let n = 1usize << b;
    (0..n).map(|m| 2.0 * std::f64::consts::PI * m as f64 / n as f64).collect()
}

/// The cyclic increment permutation on `2^b` states.
pub fn increment_matrix(b: usize) -> CMatrix {
    let n = 1usize << b;
    CMatrix::from_fn(n, n, |r, c| if r == (c + 1) % n { ONE } else { ZERO })
}

/// Phase of the addition diagonal on `|a1, m1> (x) |a2, m2>`, where `m` is the
/// Fourier index of the accumulator.
fn addition_phase(b: usize, a1: usize, m1: usize, a2: usize, m2: usize) -> f64 {
    let n = 1usize << b;
    2.0 * std::f64::consts::PI * (((m1 * a2) % n + (m2 * a1) % n) % n) as f64 / n as f64
}

/// EDU on two nodes of `(source, accumulator)` registers mapping
/// `|a1, b1> (x) |a2, b2>` to `|a1, b1 + a2> (x) |a2, b2 + a1>`.
pub fn addition_edu(b: usize) -> MpnnResult<EduGate> {
    if b == 0 || b > MAX_ADDITION_BITS {
        return Err(MpnnError::BadWidth { b, max: MAX_ADDITION_BITS });
    }
    let n = 1usize << b;
    let s = n * n;
    let v = crate::complexla::kron(&CMatrix::identity(n), &fourier(b));
    let mut phases = vec![0.0; s * s];
    for x in 0..s {
        for y in 0..s {
            phases[x * s + y] = addition_phase(b, x / n, x % n, y / n, y % n);
        }
    }
    Ok(EduGate::new(v, phases, true)?)
}

/// Apply the addition EDU between `(src_u, acc_u)` and `(src_v, acc_v)` in
/// factored form: Fourier on both accumulators, the phase, inverse Fourier.
fn apply_addition(
    state: &mut Statevector,
    b: usize,
    total_qubits: usize,
    (src_u, acc_u): (&[usize], &[usize]),
    (src_v, acc_v): (&[usize], &[usize]),
) -> MpnnResult<()> {
    let f = fourier(b);
    let f_dag = f.dagger();
    state.apply_qubits(&f, acc_u)?;
    state.apply_qubits(&f, acc_v)?;
    let read = |idx: usize, qs: &[usize]| qs.iter().fold(0, |acc, &q| (acc << 1) | (idx >> (total_qubits - 1 - q) & 1));
    state.apply_diagonal(|idx| {
        let phase = addition_phase(b, read(idx, src_u), read(idx, acc_u), read(idx, src_v), read(idx, acc_v));
        C64::from_polar(1.0, phase)
    });
    state.apply_qubits(&f_dag, acc_u)?;
    state.apply_qubits(&f_dag, acc_v)?;
    Ok(())
}

/// Permutation `|h, a, out> -> |h, a, out XOR upd(h, a)>` on `3wb` qubits.
pub fn update_unitary(table: &UpdateTable) -> CMatrix {
    let wb = table.w * table.b;
    let dim = 1usize << (3 * wb);
    let mut image = vec![0; dim];
    for (col, slot) in image.iter_mut().enumerate() {
        let ha = col >> wb;
        let out = col & ((1 << wb) - 1);
        *slot = (ha << wb) | (out ^ pack(&table.entries[ha], table.b));
    }
    CMatrix::from_fn(dim, dim, |r, c| if image[c] == r { ONE } else { ZERO })
}

/// Compiled circuit family for one MPNN, applicable to any graph within the
/// qubit budget.
#[derive(Clone, Debug)]
pub struct CompiledMpnn {
    spec: MpnnSpec,
    updates: Vec<CMatrix>,
}

pub fn compile_mpnn(spec: &MpnnSpec) -> MpnnResult<CompiledMpnn> {
    if spec.b > MAX_INCREMENT_BITS {
        return Err(MpnnError::BadWidth { b: spec.b, max: MAX_INCREMENT_BITS });
    }
    let per_node = spec.layout().qubits_per_node();
    if per_node > MAX_SIM_QUBITS {
        return Err(MpnnError::QubitBudget { needed: per_node, max: MAX_SIM_QUBITS });
    }
    Ok(CompiledMpnn { spec: spec.clone(), updates: spec.tables.iter().map(update_unitary).collect() })
}

impl CompiledMpnn {
    pub fn spec(&self) -> &MpnnSpec {
        &self.spec
    }

    pub fn total_qubits(&self, n: usize) -> usize {
        n * self.spec.layout().qubits_per_node()
    }

    pub fn update_unitaries(&self) -> &[CMatrix] {
        &self.updates
    }

    /// Basis state with `h^(0)` set from `init` and every other register zero.
    pub fn initial_state(&self, init: &[Vec<u64>]) -> MpnnResult<Statevector> {
        check_values(init, self.spec.w, self.spec.b)?;
        let lay = self.spec.layout();
        let per_node = lay.qubits_per_node();
        let digits: Vec<usize> = init
            .iter()
            .map(|regs| {
                regs.iter().enumerate().fold(0usize, |acc, (r, &x)| acc | (x as usize) << (per_node - lay.h(0, r) - lay.b))
            })
            .collect();
        Ok(Statevector::basis(per_node, &digits)?)
    }

    /// Run every round on graph `g`, checking after each layer that the state
    /// is still a computational basis state.
    pub fn run(&self, g: &Graph, init: &[Vec<u64>]) -> MpnnResult<Statevector> {
        if init.len() != g.n() {
            return Err(MpnnError::InitCount { expected: g.n(), actual: init.len() });
        }
        let total = self.total_qubits(g.n());
        if total > MAX_SIM_QUBITS {
            return Err(MpnnError::QubitBudget { needed: total, max: MAX_SIM_QUBITS });
        }
        let lay = self.spec.layout();
        let mut state = self.initial_state(init)?;
        for l in 1..=self.spec.k {
            for (u, v) in g.edges() {
                for r in 0..lay.w {
                    let (su, au) = (lay.bits(u, lay.h(l - 1, r)), lay.bits(u, lay.a(l, r)));
                    let (sv, av) = (lay.bits(v, lay.h(l - 1, r)), lay.bits(v, lay.a(l, r)));
                    apply_addition(&mut state, lay.b, total, (&su, &au), (&sv, &av))?;
                }
            }
            require_basis(&state, &format!("edge layer {l}"))?;
            for node in 0..g.n() {
                let mut qubits = Vec::new();
                for r in 0..lay.w {
                    qubits.extend(lay.bits(node, lay.h(l - 1, r)));
                }
                for r in 0..lay.w {
                    qubits.extend(lay.bits(node, lay.a(l, r)));
                }
                for r in 0..lay.w {
                    qubits.extend(lay.bits(node, lay.h(l, r)));
                }
                state.apply_qubits(&self.updates[l - 1], &qubits)?;
            }
            require_basis(&state, &format!("node layer {l}"))?;
        }
        Ok(state)
    }

    /// Decode the final `h^(k)` registers of every node from a basis state.
    pub fn read_output(&self, state: &Statevector) -> Vec<Vec<u64>> {
        let lay = self.spec.layout();
        let per_node = lay.qubits_per_node();
        let (idx, _) = state
            .amplitudes()
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, a)| if a.norm_sqr() > acc.1 { (i, a.norm_sqr()) } else { acc });
        state
            .digits(idx)
            .iter()
            .map(|&d| {
                (0..lay.w)
                    .map(|r| ((d >> (per_node - lay.h(lay.k, r) - lay.b)) & ((1 << lay.b) - 1)) as u64)
                    .collect()
            })
            .collect()
    }
}

fn require_basis(state: &Statevector, stage: &str) -> MpnnResult<()> {
    let max_prob = state.amplitudes().iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
    if (max_prob - 1.0).abs() > BASIS_TOL {
        return Err(MpnnError::NotBasis { stage: stage.to_string(), max_prob });
    }
    Ok(())
}

/// Compile, simulate and compare with [`classical_forward`]; the error names
/// the first differing register.
pub fn verify_simulation(spec: &MpnnSpec, g: &Graph, init: &[Vec<u64>]) -> MpnnResult<()> {
    let compiled = compile_mpnn(spec)?;
    let state = compiled.run(g, init)?;
    let quantum = compiled.read_output(&state);
    let classical = classical_forward(spec, g, init)?;
    for (node, (q, c)) in quantum.iter().zip(&classical).enumerate() {
        for (register, (&qv, &cv)) in q.iter().zip(c).enumerate() {
            if qv != cv {
                return Err(MpnnError::Mismatch { node, register, quantum: qv, classical: cv });
            }
        }
    }
    Ok(())
}

/// Probability that `n` independent uniform `b`-bit strings are pairwise
/// distinct; zero when `n > 2^b`.
pub fn uniqueness_probability(n: usize, b: u32) -> f64 {
    let space = 2f64.powi(b as i32);
    if n as f64 > space {
        return 0.0;
    }
    (0..n).map(|i| 1.0 - i as f64 / space).product()
}

/// Union-bound lower estimate `1 - n^2 / 2^b`.
pub fn uniqueness_bound(n: usize, b: u32) -> f64 {
    1.0 - (n * n) as f64 / 2f64.powi(b as i32)
}
