//! Equivariant linear maps on `n` single-qubit nodes.
//!
//! A linear map commutes with every node permutation exactly when the entry
//! `<theta|L|psi>` depends only on three counts: `i` ones in `psi`, `j` ones
//! of `theta` inside `psi`'s ones, and `k` ones of `theta` inside `psi`'s
//! zeros. The weight table `w_ijk` therefore parameterizes the whole space.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::complexla::{CMatrix, C64, ONE, ZERO};
use crate::graphs::Permutation;
use crate::simulator::{checked_dim, index_digits, SimError};

/// Largest `n` for which [`rank_oracle`] builds its dense system.
pub const MAX_RANK_N: usize = 5;

/// Largest `n` for which weight tables are turned into matrices.
pub const MAX_WEIGHT_N: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EqspaceError {
    #[error("n = {n} outside the supported range {min}..={max}")]
    OutOfRange { n: usize, min: usize, max: usize },

    #[error("weight index ({i}, {j}, {k}) invalid for n = {n}")]
    BadIndex { n: usize, i: usize, j: usize, k: usize },

    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    Shape { rows: usize, cols: usize, expected: usize },

    #[error("not equivariant: entries ({r1}, {c1}) and ({r2}, {c2}) share class ({i}, {j}, {k}) but differ by {diff:.3e}")]
    NotEquivariant { r1: usize, c1: usize, r2: usize, c2: usize, i: usize, j: usize, k: usize, diff: f64 },

    #[error("node-state multiset {0:?} is invalid")]
    BadMultiset(Vec<usize>),

    #[error(transparent)]
    Sim(#[from] SimError),
}

pub type EqspaceResult<T> = Result<T, EqspaceError>;

/// `(i, j, k)` class of the entry at row `theta`, column `psi`.
pub fn classify(theta: usize, psi: usize) -> (usize, usize, usize) {
    (psi.count_ones() as usize, (theta & psi).count_ones() as usize, (theta & !psi).count_ones() as usize)
}

/// Weight table `w_ijk` for `0 <= j <= i <= n`, `0 <= k <= n - i`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivariantWeights {
    n: usize,
    w: BTreeMap<(usize, usize, usize), C64>,
}

impl EquivariantWeights {
    pub fn zeros(n: usize) -> Self {
        let w = Self::indices(n).map(|idx| (idx, ZERO)).collect();
        Self { n, w }
    }

    /// Valid `(i, j, k)` triples in lexicographic order.
    pub fn indices(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
        (0..=n).flat_map(move |i| (0..=i).flat_map(move |j| (0..=n - i).map(move |k| (i, j, k))))
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> C64) -> Self {
        let w = Self::indices(n).map(|(i, j, k)| ((i, j, k), f(i, j, k))).collect();
        Self { n, w }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.w.get(&(i, j, k)).copied().unwrap_or(ZERO)
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: C64) -> EqspaceResult<()> {
        match self.w.get_mut(&(i, j, k)) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(EqspaceError::BadIndex { n: self.n, i, j, k }),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, usize), C64)> + '_ {
        self.w.iter().map(|(&k, &v)| (k, v))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.w.iter().map(|(idx, v)| (v - other.w.get(idx).copied().unwrap_or(ZERO)).norm()).fold(0.0, f64::max)
    }
}

fn check_n(n: usize, max: usize) -> EqspaceResult<()> {
    if n == 0 || n > max {
        return Err(EqspaceError::OutOfRange { n, min: 1, max });
    }
    Ok(())
}

pub fn matrix_from_weights(w: &EquivariantWeights) -> EqspaceResult<CMatrix> {
    check_n(w.n, MAX_WEIGHT_N)?;
    let dim = 1usize << w.n;
    Ok(CMatrix::from_fn(dim, dim, |theta, psi| {
        let (i, j, k) = classify(theta, psi);
        w.get(i, j, k)
    }))
}

/// Canonical `(row, column)` of class `(i, j, k)`: `psi = |0..01..1>` with `i`
/// trailing ones, and `theta` keeping the last `j` of those ones plus the last
/// `k` positions of the zero block.
pub fn representative(n: usize, i: usize, j: usize, k: usize) -> (usize, usize) {
    let psi = (1usize << i) - 1;
    let ones_part = (1usize << j) - 1;
    let zeros_part = ((1usize << k) - 1) << i;
    (ones_part | zeros_part, psi & ((1usize << n) - 1))
}

/// Read the weight table off an equivariant `2^n x 2^n` matrix.
pub fn weights_from_matrix(m: &CMatrix, tol: f64) -> EqspaceResult<EquivariantWeights> {
    let dim = m.rows();
    if !dim.is_power_of_two() || m.cols() != dim || dim < 2 {
        return Err(EqspaceError::Shape { rows: m.rows(), cols: m.cols(), expected: dim.next_power_of_two().max(2) });
    }
    let n = dim.trailing_zeros() as usize;
    let mut w = EquivariantWeights::zeros(n);
    for (i, j, k) in EquivariantWeights::indices(n) {
        let (r, c) = representative(n, i, j, k);
        w.set(i, j, k, m[(r, c)])?;
    }
    for theta in 0..dim {
        for psi in 0..dim {
            let (i, j, k) = classify(theta, psi);
            let diff = (m[(theta, psi)] - w.get(i, j, k)).norm();
            if diff > tol {
                let (r1, c1) = representative(n, i, j, k);
                return Err(EqspaceError::NotEquivariant { r1, c1, r2: theta, c2: psi, i, j, k, diff });
            }
        }
    }
    Ok(w)
}

/// Number of `(i, j, k)` classes, `sum_i (i+1)(n-i+1)`. This is the
/// dimension of the space of permutation-equivariant linear maps.
pub fn full_dimension(n: usize) -> usize {
    let summed = (0..=n).map(|i| (i + 1) * (n - i + 1)).sum();
    assert_eq!(summed, full_dimension_closed_form(n));
    summed
}

/// `C(n+3, 3) = (n+1)(n+2)(n+3)/6`: each node position of a `(row, column)`
/// pair carries one of four bit pairs, and a class is a multiset of them.
pub fn full_dimension_closed_form(n: usize) -> usize {
    (n + 1) * (n + 2) * (n + 3) / 6
}

/// Rank of the stacked, flattened 0/1 indicator matrices of every `(i, j, k)`
/// class, by Gaussian elimination.
pub fn rank_oracle(n: usize) -> EqspaceResult<usize> {
    check_n(n, MAX_RANK_N)?;
    let dim = 1usize << n;
    let mut rows: Vec<Vec<f64>> = EquivariantWeights::indices(n)
        .map(|(i, j, k)| {
            let mut v = vec![0.0; dim * dim];
            for theta in 0..dim {
                for psi in 0..dim {
                    if classify(theta, psi) == (i, j, k) {
                        v[theta * dim + psi] = 1.0;
                    }
                }
            }
            v
        })
        .collect();
    Ok(gaussian_rank(&mut rows, 1e-9))
}

fn gaussian_rank(rows: &mut [Vec<f64>], tol: f64) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows.len() {
            break;
        }
        let pivot = (rank..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs()));
        let Some(p) = pivot.filter(|&p| rows[p][c].abs() > tol) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for r in rows.iter_mut().skip(rank + 1) {
            let f = r[c] / pivot_row[c];
            if f != 0.0 {
                for (x, y) in r.iter_mut().zip(&pivot_row).skip(c) {
                    *x -= f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Dimension of the space of `2^n x 2^n` matrices commuting with every node
/// permutation, computed as the number of orbits of matrix positions under
/// the symmetric group.
pub fn commutant_dimension(n: usize, s: usize) -> EqspaceResult<usize> {
    let dim = checked_dim(n, s)?;
    let mut parent: Vec<usize> = (0..dim * dim).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut generators = vec![Permutation::cyclic(n)];
    if n >= 2 {
        let mut t: Vec<usize> = (0..n).collect();
        t.swap(0, 1);
        generators.push(Permutation::new(t).expect("transposition"));
    }
    for p in &generators {
        let image: Vec<usize> = (0..dim)
            .map(|idx| {
                let d = index_digits(idx, n, s);
                (0..n).fold(0, |acc, v| acc * s + d[p.apply(v)])
            })
            .collect();
        for r in 0..dim {
            for c in 0..dim {
                let a = find(&mut parent, r * dim + c);
                let b = find(&mut parent, image[r] * dim + image[c]);
                parent[a] = b;
            }
        }
    }
    Ok((0..dim * dim).filter(|&x| find(&mut parent, x) == x).count())
}

/// `C(n + s - 1, s - 1)`.
pub fn diagonal_dimension(n: usize, s: usize) -> u128 {
    let (top, k) = ((n + s - 1) as u128, (s - 1) as u128);
    (0..k).fold(1u128, |acc, t| acc * (top - t) / (t + 1))
}

/// All count vectors of length `s` summing to `n`, lexicographically.
pub fn node_state_multisets(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(left - c, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if s > 0 {
        rec(n, s, &mut Vec::new(), &mut out);
    }
    out
}

/// Diagonal equivariant unitary: one phase per multiset of node states.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalEquivariantSpec {
    n: usize,
    s: usize,
    phases: BTreeMap<Vec<usize>, f64>,
}

impl DiagonalEquivariantSpec {
    pub fn from_fn(n: usize, s: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let phases = node_state_multisets(n, s).into_iter().map(|m| {
            let p = f(&m);
            (m, p)
        });
        Self { n, s, phases: phases.collect() }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phase(&self, counts: &[usize]) -> EqspaceResult<f64> {
        self.phases.get(counts).copied().ok_or_else(|| EqspaceError::BadMultiset(counts.to_vec()))
    }

    pub fn matrix(&self) -> EqspaceResult<CMatrix> {
        let dim = checked_dim(self.n, self.s)?;
        let entries = (0..dim)
            .map(|idx| {
                let mut counts = vec![0; self.s];
                for d in index_digits(idx, self.n, self.s) {
                    counts[d] += 1;
                }
                self.phase(&counts).map(|p| C64::from_polar(1.0, p))
            })
            .collect::<EqspaceResult<Vec<_>>>()?;
        Ok(CMatrix::diag(&entries))
    }
}

/// Weights of `CZ(alpha)` applied between every pair of `n` nodes: the
/// `i(i-1)/2` pairs of ones each contribute `e^{-i alpha}`.
pub fn cz_all_pairs_weights(n: usize, alpha: f64) -> EquivariantWeights {
    EquivariantWeights::from_fn(n, |i, j, k| {
        if j == i && k == 0 {
            C64::from_polar(1.0, -alpha * (i * i.saturating_sub(1)) as f64 / 2.0)
        } else {
            ZERO
        }
    })
}

/// Weights of `u^{(x) n}` for a one-qubit `u`.
pub fn uniform_unitary_weights(u: &CMatrix, n: usize) -> EqspaceResult<EquivariantWeights> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(EqspaceError::Shape { rows: u.rows(), cols: u.cols(), expected: 2 });
    }
    let pow = |z: C64, e: usize| (0..e).fold(ONE, |acc, _| acc * z);
    Ok(EquivariantWeights::from_fn(n, |i, j, k| {
        pow(u[(0, 0)], n - i - k) * pow(u[(0, 1)], i - j) * pow(u[(1, 0)], k) * pow(u[(1, 1)], j)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexla::kron_power;
    use crate::graphs::complete_graph;
    use crate::layers::{circuit_unitary, fixed_matrix_equivariance_defect, hadamard, Circuit, DiagEdge};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> EquivariantWeights {
        EquivariantWeights::from_fn(n, |_, _, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn table_sizes() {
        for n in 1..=12 {
            assert_eq!(EquivariantWeights::zeros(n).len(), full_dimension(n));
        }
        let dims: Vec<usize> = (1..=5).map(full_dimension).collect();
        assert_eq!(dims, vec![4, 10, 20, 35, 56]);
        // the cubic n(n+1)(n+5)/6 undercounts by exactly n + 1
        for n in 1..=12 {
            assert_eq!(full_dimension(n) - n * (n + 1) * (n + 5) / 6, n + 1);
        }
    }

    #[test]
    fn matrix_from_weights_examples() {
        let mut w = EquivariantWeights::zeros(3);
        w.set(1, 0, 1, ONE).unwrap();
        let m = matrix_from_weights(&w).unwrap();
        let col: Vec<C64> = m.column(0b100);
        let nonzero: Vec<usize> = (0..8).filter(|&r| col[r] != ZERO).collect();
        assert_eq!(nonzero, vec![0b001, 0b010]);
        assert!(w.set(2, 3, 0, ONE).is_err());

        let id = EquivariantWeights::from_fn(4, |i, j, k| if j == i && k == 0 { ONE } else { ZERO });
        assert_eq!(matrix_from_weights(&id).unwrap(), CMatrix::identity(16));
    }

    #[test]
    fn weight_matrices_are_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=4 {
            let m = matrix_from_weights(&random_weights(&mut rng, n)).unwrap();
            for p in Permutation::all(n) {
                assert!(fixed_matrix_equivariance_defect(&m, n, 2, &p).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn weights_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in 1..=5 {
            let w = random_weights(&mut rng, n);
            let back = weights_from_matrix(&matrix_from_weights(&w).unwrap(), 0.0).unwrap();
            assert_eq!(back, w);
        }
        let id = weights_from_matrix(&CMatrix::identity(8), 1e-12).unwrap();
        for ((i, j, k), v) in id.iter() {
            assert_eq!(v, if i == j && k == 0 { ONE } else { ZERO });
        }
        let x0 = crate::complexla::kron(&x(), &CMatrix::identity(4));
        assert!(matches!(weights_from_matrix(&x0, 1e-9), Err(EqspaceError::NotEquivariant { .. })));
    }

    #[test]
    fn rank_matches_dimension_formula() {
        for n in 1..=5 {
            let r = rank_oracle(n).unwrap();
            assert_eq!(r, full_dimension(n), "n = {n}");
            assert_eq!(commutant_dimension(n, 2).unwrap(), r);
        }
        assert!(rank_oracle(6).is_err());
    }

    #[test]
    fn diagonal_dimensions() {
        assert_eq!(diagonal_dimension(4, 2), 5);
        assert_eq!(diagonal_dimension(3, 3), 10);
        assert_eq!(diagonal_dimension(1, 2), 2);
        for n in 1..=10 {
            assert_eq!(diagonal_dimension(n, 2), (n + 1) as u128);
        }
        for n in 1..=6 {
            for s in 1..=3 {
                let sets = node_state_multisets(n, s);
                assert_eq!(sets.len() as u128, diagonal_dimension(n, s));
                assert!(sets.iter().all(|m| m.iter().sum::<usize>() == n));
            }
        }
    }

    #[test]
    fn diagonal_spec_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let spec = DiagonalEquivariantSpec::from_fn(3, 3, |_| rng.gen_range(-PI..PI));
        assert_eq!(spec.len(), 10);
        let m = spec.matrix().unwrap();
        assert!(m.unitarity_defect().unwrap() < 1e-12);
        for p in Permutation::all(3) {
            assert!(fixed_matrix_equivariance_defect(&m, 3, 3, &p).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn cz_all_pairs() {
        let w = cz_all_pairs_weights(4, 0.0);
        assert_eq!(matrix_from_weights(&w).unwrap(), CMatrix::identity(16));
        assert!((cz_all_pairs_weights(2, PI).get(2, 2, 0) + ONE).norm() < 1e-15);
        for n in 2..=4 {
            let alpha = 0.37 * n as f64;
            let c = Circuit::from_layers(2, [DiagEdge::cz(alpha).into()]).unwrap();
            let brute = circuit_unitary(&c, &complete_graph(n)).unwrap();
            let m = matrix_from_weights(&cz_all_pairs_weights(n, alpha)).unwrap();
            assert!(brute.max_abs_diff(&m) <= 1e-10);
        }
    }

    #[test]
    fn uniform_unitaries() {
        let id = uniform_unitary_weights(&CMatrix::identity(2), 3).unwrap();
        assert_eq!(matrix_from_weights(&id).unwrap(), CMatrix::identity(8));

        let h2 = matrix_from_weights(&uniform_unitary_weights(&hadamard(), 2).unwrap()).unwrap();
        assert!(h2.as_slice().iter().all(|z| (z.norm() - 0.5).abs() < 1e-15));
        assert!(h2.max_abs_diff(&kron_power(&hadamard(), 2)) < 1e-15);

        let wx = uniform_unitary_weights(&x(), 3).unwrap();
        for ((i, j, k), v) in wx.iter() {
            assert_eq!(v != ZERO, j == 0 && k == 3 - i, "({i},{j},{k})");
        }
        assert_eq!(matrix_from_weights(&wx).unwrap(), kron_power(&x(), 3));

        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let u = crate::layers::euler_matrix([rng.gen(), rng.gen(), rng.gen()]);
        let m = matrix_from_weights(&uniform_unitary_weights(&u, 4).unwrap()).unwrap();
        assert!(m.max_abs_diff(&kron_power(&u, 4)) < 1e-14);
    }
}
