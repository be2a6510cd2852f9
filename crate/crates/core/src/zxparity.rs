//! Outcome analysis of the `CZ(pi)` + Hadamard circuit on cycle graphs.
//!
//! Starting from `|+>^n`, applying `CZ(pi)` on every edge of `C_n` and then a
//! Hadamard at every node yields a distribution whose support is decided by a
//! purely combinatorial reduction of cyclic bitstrings: repeatedly delete a 0
//! together with its two cyclic neighbours and put the XOR of the neighbours
//! in their place, then read the verdict off a small terminal table. Every
//! observable string has the same probability, `2^-(n-1)` for odd `n` and
//! `2^-(n-2)` for even `n`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graphs::{cycle_graph, GraphError};
use crate::layers::{apply_circuit, Circuit, DiagEdge, LayerError, NodeLayer};
use crate::simulator::plus_state;

/// Largest `n` accepted by [`observable_set`].
pub const MAX_ENUM_N: usize = 20;

/// Largest cycle simulated by [`crosscheck_cycle`].
pub const MAX_CROSSCHECK_N: usize = 10;

pub const CROSSCHECK_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZxError {
    #[error("bitstring must be non-empty")]
    Empty,

    #[error("invalid bitstring character {0:?}")]
    BadChar(char),

    #[error("n = {n} outside the supported range {min}..={max}")]
    OutOfRange { n: usize, min: usize, max: usize },

    #[error("bitstring {bitstring}: predicted probability {expected}, simulated {actual}")]
    Mismatch { bitstring: String, expected: f64, actual: f64 },

    #[error("observable bitstring {0} has ones-count of the wrong parity")]
    Parity(String),

    #[error(transparent)]
    Layer(#[from] LayerError),

    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type ZxResult<T> = Result<T, ZxError>;

/// Bitstring whose first and last positions are adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicBitstring {
    bits: Vec<bool>,
}

impl CyclicBitstring {
    pub fn new(bits: Vec<bool>) -> ZxResult<Self> {
        if bits.is_empty() {
            return Err(ZxError::Empty);
        }
        Ok(Self { bits })
    }

    /// Bits of `index` over `n` positions, position 0 most significant.
    pub fn from_index(index: usize, n: usize) -> ZxResult<Self> {
        Self::new((0..n).map(|i| index >> (n - 1 - i) & 1 == 1).collect())
    }

    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| acc << 1 | b as usize)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn rotate(&self, k: usize) -> Self {
        let mut bits = self.bits.clone();
        let len = bits.len();
        bits.rotate_left(k % len);
        Self { bits }
    }

    pub fn reversed(&self) -> Self {
        Self { bits: self.bits.iter().rev().copied().collect() }
    }
}

impl fmt::Display for CyclicBitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for CyclicBitstring {
    type Err = ZxError;

    fn from_str(s: &str) -> ZxResult<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ZxError::BadChar(other)),
            })
            .collect::<ZxResult<Vec<_>>>()?;
        Self::new(bits)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observability {
    pub observable: bool,
    pub probability: f64,
}

/// Probability of each observable string on `C_n`.
pub fn support_probability(n: usize) -> f64 {
    let exp = if n % 2 == 1 { n - 1 } else { n.saturating_sub(2) };
    0.5f64.powi(exp as i32)
}

/// Verdict for a string that can no longer be reduced.
fn terminal(bits: &[bool]) -> bool {
    if bits.iter().all(|&b| b) {
        return bits.len() % 4 != 2;
    }
    // remaining cases have length <= 2 and contain a zero
    bits == [false, false]
}

/// One reduction step at the zero in position `i` (length >= 3).
fn remove_zero_at(bits: &[bool], i: usize) -> Vec<bool> {
    let len = bits.len();
    let left = (i + len - 1) % len;
    let right = (i + 1) % len;
    let merged = bits[left] ^ bits[right];
    if len == 3 {
        return vec![merged];
    }
    // keep cyclic order: the merged bit takes the place of the removed triple
    let mut out = Vec::with_capacity(len - 2);
    for k in 2..len - 1 {
        out.push(bits[(i + k) % len]);
    }
    out.push(merged);
    out
}

fn reduce_bits(bits: &[bool]) -> bool {
    let mut cur = bits.to_vec();
    while cur.len() > 2 {
        match cur.iter().position(|&b| !b) {
            Some(i) => cur = remove_zero_at(&cur, i),
            None => break,
        }
    }
    terminal(&cur)
}

/// Decide observability by the leftmost-zero reduction.
pub fn reduce_cyclic(b: &CyclicBitstring) -> Observability {
    let observable = reduce_bits(&b.bits);
    Observability { observable, probability: if observable { support_probability(b.len()) } else { 0.0 } }
}

/// Every verdict reachable by some sequence of zero choices.
pub fn all_choice_verdicts(b: &CyclicBitstring) -> Vec<bool> {
    fn walk(bits: &[bool], out: &mut Vec<bool>) {
        let zeros: Vec<usize> = (0..bits.len()).filter(|&i| !bits[i]).collect();
        if bits.len() <= 2 || zeros.is_empty() {
            let v = terminal(bits);
            if !out.contains(&v) {
                out.push(v);
            }
            return;
        }
        for i in zeros {
            walk(&remove_zero_at(bits, i), out);
        }
    }
    let mut out = Vec::new();
    walk(&b.bits, &mut out);
    out
}

/// All observable strings of length `n`, in increasing index order.
pub fn observable_set(n: usize) -> ZxResult<Vec<CyclicBitstring>> {
    if n == 0 || n > MAX_ENUM_N {
        return Err(ZxError::OutOfRange { n, min: 1, max: MAX_ENUM_N });
    }
    Ok((0..1usize << n)
        .map(|i| CyclicBitstring::from_index(i, n).expect("n >= 1"))
        .filter(|b| reduce_bits(&b.bits))
        .collect())
}

/// The `CZ(pi)` edge layer followed by a Hadamard node layer.
pub fn cz_hadamard_circuit() -> Circuit {
    Circuit::from_layers(2, [DiagEdge::cz(std::f64::consts::PI).into(), NodeLayer::hadamard().into()])
        .expect("single-qubit layers")
}

/// Simulate the circuit on `C_n` from `|+>^n` and compare with the
/// combinatorial prediction; the error names the first disagreeing string.
pub fn crosscheck_cycle(n: usize) -> ZxResult<()> {
    if !(3..=MAX_CROSSCHECK_N).contains(&n) {
        return Err(ZxError::OutOfRange { n, min: 3, max: MAX_CROSSCHECK_N });
    }
    let g = cycle_graph(n)?;
    let out = apply_circuit(&cz_hadamard_circuit(), &g, &plus_state(n))?;
    let amps = out.amplitudes();
    for (index, a) in amps.iter().enumerate() {
        let b = CyclicBitstring::from_index(index, n)?;
        let verdict = reduce_cyclic(&b);
        let actual = a.norm_sqr();
        if (actual - verdict.probability).abs() > CROSSCHECK_TOL {
            return Err(ZxError::Mismatch { bitstring: b.to_string(), expected: verdict.probability, actual });
        }
        if verdict.observable && b.ones() % 2 != n % 2 {
            return Err(ZxError::Parity(b.to_string()));
        }
    }
    Ok(())
}

/// `n,bitstring,prob` rows for every observable string of length `n`.
pub fn parity_csv_rows(n: usize) -> ZxResult<Vec<(usize, String, f64)>> {
    let p = support_probability(n);
    Ok(observable_set(n)?.into_iter().map(|b| (n, b.to_string(), p)).collect())
}
