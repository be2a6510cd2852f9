//! Randomized invariants of every core module. Each property draws a seed and
//! builds its instance from a ChaCha stream, so failures shrink to one seed.

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqgc::complexla::{expm_hermitian, herm_eig, kron, logm_unitary, CMatrix, C64};
use eqgc::eqspace::{matrix_from_weights, weights_from_matrix, EquivariantWeights};
use eqgc::graphs::{are_isomorphic, cycles_dataset, permute_graph, CycleClass, Permutation};
use eqgc::layers::{
    apply_circuit, apply_edge_gate, check_commutativity, check_directed_conditions, check_undirected_symmetry,
    circuit_to_eh, circuit_unitary, fixed_matrix_equivariance_defect, Circuit, DiagEdge, EduGate, Layer,
};
use eqgc::mpnnsim::{addition_edu, uniqueness_bound, uniqueness_probability, verify_simulation, MpnnSpec, UpdateTable};
use eqgc::report::format_real;
use eqgc::sampling::{
    random_circuit, random_edu, random_edu_circuit, random_graph, random_hermitian, random_symmetric_phases,
    random_unitary,
};
use eqgc::simulator::{index_digits, plus_state, Statevector};
use eqgc::training::{example_accuracy, expected_loss, forward, many_sample_accuracy, ModelParams};
use eqgc::zxparity::{all_choice_verdicts, observable_set, reduce_cyclic, CyclicBitstring};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
}

fn random_state(r: &mut ChaCha8Rng, n: usize, q: usize) -> Statevector {
    let dim = 1usize << (n * q);
    let amps: Vec<C64> = (0..dim).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Statevector::from_amplitudes(n, q, amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kron_associative_and_mixed_product(seed: u64) {
        let mut r = rng(seed);
        let (a, b, c) = (random_matrix(&mut r, 2, 3), random_matrix(&mut r, 3, 2), random_matrix(&mut r, 2, 2));
        prop_assert!(kron(&kron(&a, &b), &c).max_abs_diff(&kron(&a, &kron(&b, &c))) <= 1e-12);
        let (a, b, c, d) = (random_matrix(&mut r, 2, 2), random_matrix(&mut r, 3, 3), random_matrix(&mut r, 2, 2), random_matrix(&mut r, 3, 3));
        prop_assert!((&kron(&a, &b) * &kron(&c, &d)).max_abs_diff(&kron(&(&a * &c), &(&b * &d))) <= 1e-10);
    }

    #[test]
    fn expm_logm_round_trip(seed: u64, dim in prop::sample::select(vec![2usize, 4])) {
        let mut r = rng(seed);
        let u = random_unitary(&mut r, dim);
        prop_assert!(expm_hermitian(&logm_unitary(&u).unwrap()).unwrap().max_abs_diff(&u) <= 1e-9);
    }

    #[test]
    fn herm_eig_reconstructs(seed: u64, dim in 1usize..=16) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, dim);
        let (vals, vecs) = herm_eig(&h).unwrap();
        let back = &(&vecs * &CMatrix::real_diag(&vals)) * &vecs.dagger();
        prop_assert!(back.max_abs_diff(&h) <= 1e-10);
    }

    #[test]
    fn permute_graph_preserves_degrees(seed: u64, n in 1usize..=9) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.4);
        let p = Permutation::random(n, &mut r);
        let h = permute_graph(&g, &p).unwrap();
        let (mut a, mut b) = (g.degrees(), h.degrees());
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
        prop_assert_eq!(g.num_edges(), h.num_edges());
        prop_assert!(are_isomorphic(&g, &h).unwrap());
        prop_assert_eq!(p.compose(&p.inverse()), Permutation::identity(n));
    }

    #[test]
    fn gates_preserve_norm(seed: u64, n in 2usize..=4, q in 1usize..=2) {
        let mut r = rng(seed);
        let mut psi = random_state(&mut r, n, q);
        let s = 1usize << q;
        for _ in 0..6 {
            if r.gen_bool(0.5) {
                psi.apply_1local(&random_unitary(&mut r, s), r.gen_range(0..n)).unwrap();
            } else {
                let a = r.gen_range(0..n);
                let b = (a + r.gen_range(1..n)) % n;
                psi.apply_2local(&random_unitary(&mut r, s * s), a, b).unwrap();
            }
        }
        prop_assert!((psi.norm_sqr() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn product_gate_is_two_local_gates(seed: u64, n in 2usize..=4) {
        let mut r = rng(seed);
        let psi = random_state(&mut r, n, 1);
        let (u1, u2) = (random_unitary(&mut r, 2), random_unitary(&mut r, 2));
        let a = r.gen_range(0..n);
        let b = (a + r.gen_range(1..n)) % n;
        let mut x = psi.clone();
        x.apply_2local(&kron(&u1, &u2), a, b).unwrap();
        let mut y = psi;
        y.apply_1local(&u1, a).unwrap();
        y.apply_1local(&u2, b).unwrap();
        let d = x.amplitudes().iter().zip(y.amplitudes()).fold(0.0f64, |m, (p, q)| m.max((p - q).norm()));
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn permuting_a_state_relabels_outcomes(seed: u64, n in 1usize..=4, q in 1usize..=2) {
        let mut r = rng(seed);
        let psi = random_state(&mut r, n, q);
        let p = Permutation::random(n, &mut r);
        let moved = psi.apply_permutation(&p).unwrap();
        let (before, after) = (psi.outcome_distribution(), moved.outcome_distribution());
        let s = 1usize << q;
        for x in 0..s.pow(n as u32) {
            let v = index_digits(x, n, s);
            let w: Vec<usize> = (0..n).map(|i| v[p.apply(i)]).collect();
            let y = w.iter().fold(0, |acc, &d| acc * s + d);
            prop_assert_eq!(before.get(x), after.get(y));
        }
        if q == 1 {
            let (a, b) = (psi.ones_count_distribution().unwrap(), moved.ones_count_distribution().unwrap());
            prop_assert!((a.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12));
        }
    }

    #[test]
    fn edge_order_is_irrelevant(seed: u64, n in 2usize..=5, s in prop::sample::select(vec![2usize, 4])) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.6);
        let gate = random_edu(&mut r, s, true);
        let u = gate.matrix();
        let psi = random_state(&mut r, n, s.trailing_zeros() as usize);
        let mut pairs = g.gate_pairs();
        let mut x = psi.clone();
        apply_edge_gate(&u, &pairs, &mut x).unwrap();
        pairs.reverse();
        let k = pairs.len() / 2;
        pairs.rotate_left(k);
        let mut y = psi;
        apply_edge_gate(&u, &pairs, &mut y).unwrap();
        let d = x.amplitudes().iter().zip(y.amplitudes()).fold(0.0f64, |m, (p, q)| m.max((p - q).norm()));
        prop_assert!(d <= 1e-10);
    }

    #[test]
    fn every_edu_passes_the_checks(seed: u64, s in 2usize..=3) {
        let mut r = rng(seed);
        let g = random_edu(&mut r, s, true);
        prop_assert!(check_commutativity(&g.matrix()).unwrap());
        prop_assert!(check_undirected_symmetry(&g.matrix()).unwrap());
        prop_assert!(check_directed_conditions(&g.matrix()).unwrap());
        let d = random_edu(&mut r, s, false);
        prop_assert!(check_commutativity(&d.matrix()).unwrap());
        prop_assert!(check_directed_conditions(&d.matrix()).unwrap());
    }

    #[test]
    fn eh_conversion_preserves_unitary(seed: u64, n in 2usize..=4, pairs in 1usize..=3) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.6);
        let c = random_edu_circuit(&mut r, 2, pairs).unwrap();
        let d = circuit_unitary(&c, &g).unwrap().max_abs_diff(&circuit_unitary(&circuit_to_eh(&c).unwrap(), &g).unwrap());
        prop_assert!(d <= 1e-8);
    }

    #[test]
    fn circuits_are_equivariant(seed: u64, n in 2usize..=4, len in 1usize..=4) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.5);
        let c = random_circuit(&mut r, 2, len).unwrap();
        let u = circuit_unitary(&c, &g).unwrap();
        for p in Permutation::all(n) {
            let h = permute_graph(&g, &p).unwrap();
            // relabelling the graph conjugates the unitary by the node permutation
            let pm = eqgc::simulator::permutation_operator(&p, n, 2).unwrap();
            let d = (&(&pm.transpose() * &u) * &pm).max_abs_diff(&circuit_unitary(&c, &h).unwrap());
            prop_assert!(d <= 1e-9, "permutation {:?}: {}", p.image(), d);
        }
    }

    #[test]
    fn global_phase_quotient(seed: u64, shift in -PI..PI) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, 4, 0.7);
        let phases = random_symmetric_phases(&mut r, 2);
        let v = random_unitary(&mut r, 2);
        let build = |ph: Vec<f64>| {
            Circuit::from_layers(2, [
                Layer::from(eqgc::layers::NodeLayer::new(v.clone()).unwrap()),
                EduGate::new(v.clone(), ph.clone(), true).unwrap().into(),
                DiagEdge::new(2, ph, true).unwrap().into(),
            ]).unwrap()
        };
        let a = build(phases.clone());
        let b = build(phases.iter().map(|p| p + shift).collect());
        let (ua, ub) = (circuit_unitary(&a, &g).unwrap(), circuit_unitary(&b, &g).unwrap());
        prop_assert!(ua.phase_aligned_diff(&ub) <= 1e-10);
        let da = apply_circuit(&a, &g, &plus_state(4)).unwrap().ones_count_distribution().unwrap();
        let db = apply_circuit(&b, &g, &plus_state(4)).unwrap().ones_count_distribution().unwrap();
        prop_assert!(da.iter().zip(&db).all(|(x, y)| (x - y).abs() <= 1e-12));
    }

    #[test]
    fn observability_is_choice_free_and_closed(n in 3usize..=10, index: u64) {
        let b = CyclicBitstring::from_index(index as usize % (1 << n), n).unwrap();
        let verdict = reduce_cyclic(&b).observable;
        prop_assert!(all_choice_verdicts(&b).iter().all(|&v| v == verdict));
        prop_assert_eq!(reduce_cyclic(&b.reversed()).observable, verdict);
        prop_assert_eq!(reduce_cyclic(&b.rotate(index as usize % n)).observable, verdict);
        if verdict {
            prop_assert_eq!(b.ones() % 2, n % 2);
        }
    }

    #[test]
    fn weight_tables_are_equivariant(seed: u64, n in 1usize..=4) {
        let mut r = rng(seed);
        let w = EquivariantWeights::from_fn(n, |_, _, _| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
        let m = matrix_from_weights(&w).unwrap();
        for p in Permutation::all(n) {
            prop_assert!(fixed_matrix_equivariance_defect(&m, n, 2, &p).unwrap() <= 1e-12);
        }
        prop_assert_eq!(weights_from_matrix(&m, 0.0).unwrap().max_abs_diff(&w), 0.0);
    }

    #[test]
    fn mpnn_simulation_is_exact(seed: u64, n in 1usize..=3, b in 1usize..=2) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.6);
        let spec = MpnnSpec::new(1, 1, b, vec![UpdateTable::random(1, b, &mut r)]).unwrap();
        let init: Vec<Vec<u64>> = (0..n).map(|_| vec![r.gen_range(0..1u64 << b)]).collect();
        prop_assert!(verify_simulation(&spec, &g, &init).is_ok());
    }

    #[test]
    fn uniqueness_bound_holds(n in 1usize..=64, b in 1u32..=20) {
        let p = uniqueness_probability(n, b);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(p >= uniqueness_bound(n, b) - 1e-12);
    }

    #[test]
    fn forward_is_isomorphism_invariant(seed: u64, depth in 1usize..=4) {
        let mut r = rng(seed);
        let params = ModelParams::random(depth, &mut r);
        let ds = cycles_dataset();
        let ex = &ds.train[r.gen_range(0..ds.train.len())];
        let p = Permutation::random(ex.graph.n(), &mut r);
        let a = forward(&params, &ex.graph).unwrap();
        let b = forward(&params, &permute_graph(&ex.graph, &p).unwrap()).unwrap();
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-9));
    }

    #[test]
    fn edge_phase_shift_is_flat(seed: u64, shift in -PI..PI, depth in 1usize..=3) {
        let mut r = rng(seed);
        let params = ModelParams::random(depth, &mut r);
        let data = cycles_dataset().train;
        let mut shifted = params.clone();
        let layer = r.gen_range(0..depth);
        for ph in &mut shifted.pairs[layer].phases {
            *ph += shift;
        }
        let d = (expected_loss(&params, &data).unwrap() - expected_loss(&shifted, &data).unwrap()).abs();
        prop_assert!(d <= 1e-10);
    }

    #[test]
    fn many_sample_is_thresholded_single_sample(seed: u64, depth in 0usize..=3) {
        let mut r = rng(seed);
        let mut params = ModelParams::random(depth, &mut r);
        params.a = r.gen_range(-6.0..6.0);
        params.c = r.gen_range(-3.0..3.0);
        for ex in cycles_dataset().train {
            let ss = example_accuracy(&params, &ex).unwrap();
            prop_assert!((0.0..=1.0).contains(&ss));
            let ms = many_sample_accuracy(&params, std::slice::from_ref(&ex)).unwrap();
            prop_assert_eq!(ms, if ss > 0.5 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn formatted_reals_keep_twelve_digits(x in prop::num::f64::NORMAL) {
        let back: f64 = format_real(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-12 * x.abs());
    }
}

#[test]
fn observable_set_cardinalities() {
    for n in 3..=12usize {
        let expected = if n % 2 == 1 { 1usize << (n - 1) } else { 1 << (n - 2) };
        let set = observable_set(n).unwrap();
        assert_eq!(set.len(), expected, "n={n}");
        let strings: std::collections::BTreeSet<String> = set.iter().map(|b| b.to_string()).collect();
        for b in &set {
            assert!(strings.contains(&b.reversed().to_string()));
            assert!(strings.contains(&b.rotate(1).to_string()));
        }
    }
}

#[test]
fn addition_gate_is_a_symmetric_permutation() {
    for b in 1..=2 {
        let m = addition_edu(b).unwrap().matrix();
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                let z = m[(r, c)];
                assert!(z.im.abs() <= 1e-10 && (z.re.abs() <= 1e-10 || (z.re - 1.0).abs() <= 1e-10));
            }
        }
        assert!(check_commutativity(&m).unwrap());
        assert!(check_undirected_symmetry(&m).unwrap());
    }
}

#[test]
fn dataset_classes_are_balanced() {
    let ds = cycles_dataset();
    for split in [&ds.train, &ds.eval] {
        let w = |c: CycleClass| split.iter().filter(|g| g.label == c).map(|g| g.weight).sum::<f64>();
        assert!((w(CycleClass::SingleCycle) - w(CycleClass::TwoCycles)).abs() <= 1e-15);
    }
}
