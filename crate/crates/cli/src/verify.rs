//! Invariant suites behind `eqgc verify`.
//!
//! Each suite checks one library claim on exhaustive or seeded random
//! instances and stops at its first counterexample, which it reports as a
//! witness.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqgc::complexla::CMatrix;
use eqgc::eqspace::{commutant_dimension, diagonal_dimension, full_dimension, rank_oracle};
use eqgc::graphs::{all_graphs, cycles_dataset, permute_graph, Graph, LabeledGraph, Permutation};
use eqgc::layers::{
    absorb_redundancy, circuit_to_eh, circuit_unitary, commutativity_defect, directed_defects, edu_matrix,
    equivariance_defect, undirected_symmetry_defect, DiagEdge, EduGate, NodeLayer,
};
use eqgc::mpnnsim::{addition_edu, uniqueness_bound, uniqueness_probability, verify_simulation, MpnnSpec, UpdateTable};
use eqgc::sampling::{random_circuit, random_edu, random_edu_circuit, random_graph, random_symmetric_phases, random_unitary};
use eqgc::training::{finite_difference_gradient, forward, loss_gradient, ModelParams};
use eqgc::zxparity::{crosscheck_cycle, CROSSCHECK_TOL};

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replaces every suite's own tolerance when set.
    pub tol: Option<f64>,
    /// Adds an undirected gate with asymmetric phases to the symmetry suite.
    pub inject_fault: bool,
}

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub module: &'static str,
    pub operation: &'static str,
    pub claim: &'static str,
    pub tol: f64,
    /// Number of instances checked (up to and including a failure).
    pub cases: usize,
    pub witness: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

impl fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {}::{} (tol {:e}, {} cases): {}",
            self.module, self.operation, self.tol, self.cases, self.claim
        )?;
        if let Some(w) = &self.witness {
            write!(f, "\n     witness: {w}")?;
        }
        Ok(())
    }
}

/// Instance counter plus first failure of one suite.
struct Tally {
    cases: usize,
}

impl Tally {
    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) -> Result<(), String> {
        self.cases += 1;
        if ok {
            Ok(())
        } else {
            Err(witness())
        }
    }
}

fn err<E: fmt::Display>(e: E) -> String {
    format!("error: {e}")
}

fn edges(g: &Graph) -> String {
    let mut s = format!("n={} edges=[", g.n());
    for (i, (u, v)) in g.edges().enumerate() {
        let _ = write!(s, "{}{u}-{v}", if i > 0 { " " } else { "" });
    }
    s.push(']');
    s
}

struct Suite {
    module: &'static str,
    operation: &'static str,
    claim: &'static str,
    tol: f64,
    run: fn(&mut ChaCha8Rng, f64, bool, &mut Tally) -> Result<(), String>,
}

const SUITES: &[Suite] = &[
    Suite {
        module: "layers",
        operation: "equivariance_defect",
        claim: "circuit unitaries commute with every node relabelling; isomorphic graphs give equal distributions",
        tol: 1e-9,
        run: equivariance_suite,
    },
    Suite {
        module: "layers",
        operation: "commutativity_defect",
        claim: "EDU copies on edges sharing a node commute; directed EDUs satisfy the three arc conditions",
        tol: 1e-9,
        run: commutativity_suite,
    },
    Suite {
        module: "layers",
        operation: "undirected_symmetry_defect",
        claim: "undirected edge gates are invariant under swapping their registers",
        tol: 1e-9,
        run: symmetry_suite,
    },
    Suite {
        module: "layers",
        operation: "circuit_to_eh",
        claim: "EDU circuits and their EH conversions have equal unitaries; V absorption is exact",
        tol: 1e-8,
        run: conversion_suite,
    },
    Suite {
        module: "zxparity",
        operation: "crosscheck_cycle",
        claim: "observable sets, uniform probabilities and parity law agree with simulation on cycles n=3..10",
        tol: CROSSCHECK_TOL,
        run: parity_suite,
    },
    Suite {
        module: "eqspace",
        operation: "full_dimension",
        claim: "equivariant-map dimension equals the rank and orbit counts for n=1..5; diagonal dimension is n+1",
        tol: 0.0,
        run: dimension_suite,
    },
    Suite {
        module: "mpnnsim",
        operation: "verify_simulation",
        claim: "compiled circuits reproduce classical sum-aggregation MPNNs bit-exactly on all graphs n<=3",
        tol: 0.0,
        run: mpnn_suite,
    },
    Suite {
        module: "mpnnsim",
        operation: "uniqueness_probability",
        claim: "distinct-label probability matches the falling-factorial formula and the union bound, n<=16, b<=10",
        tol: 1e-12,
        run: uniqueness_suite,
    },
    Suite {
        module: "training",
        operation: "loss_gradient",
        claim: "exact gradients match central finite differences (step 1e-5) at 20 points for depths 1 and 4",
        tol: 1e-3,
        run: gradient_suite,
    },
];

/// Run every suite with an independent random stream.
pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteOutcome> {
    SUITES
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let tol = opts.tol.unwrap_or(s.tol);
            let mut tally = Tally { cases: 0 };
            let witness = (s.run)(&mut rng, tol, opts.inject_fault, &mut tally).err();
            SuiteOutcome {
                module: s.module,
                operation: s.operation,
                claim: s.claim,
                tol,
                cases: tally.cases,
                witness,
            }
        })
        .collect()
}

fn equivariance_suite(rng: &mut ChaCha8Rng, tol: f64, _: bool, t: &mut Tally) -> Result<(), String> {
    for trial in 0..50 {
        let n = rng.gen_range(2..=5);
        let g = random_graph(rng, n, 0.5);
        let len = rng.gen_range(1..=4);
        let c = random_circuit(rng, 2, len).map_err(err)?;
        let perms = if n <= 4 { Permutation::all(n) } else { (0..10).map(|_| Permutation::random(n, rng)).collect() };
        for p in perms {
            let d = equivariance_defect(&c, &g, &p).map_err(err)?;
            t.check(d <= tol, || format!("circuit #{trial} ({len} layers) on {} with permutation {:?}: defect {d:e}", edges(&g), p.image()))?;
        }
        let depth = rng.gen_range(1..=3);
        let params = ModelParams::random(depth, rng);
        let p = Permutation::random(n, rng);
        let a = forward(&params, &g).map_err(err)?;
        let b = forward(&params, &permute_graph(&g, &p).map_err(err)?).map_err(err)?;
        let d = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        t.check(d <= tol, || format!("model depth {depth} on {} relabelled by {:?}: distributions differ by {d:e}", edges(&g), p.image()))?;
    }
    Ok(())
}

fn commutativity_suite(rng: &mut ChaCha8Rng, tol: f64, _: bool, t: &mut Tally) -> Result<(), String> {
    for s in [2, 3] {
        for _ in 0..10 {
            let g = random_edu(rng, s, true);
            let d = commutativity_defect(&g.matrix()).map_err(err)?;
            t.check(d <= tol, || format!("undirected EDU s={s} phases {:?}: defect {d:e}", g.phases()))?;
        }
        for _ in 0..10 {
            let g = random_edu(rng, s, false);
            let m = g.matrix();
            let d = directed_defects(&m).map_err(err)?.into_iter().chain([commutativity_defect(&m).map_err(err)?]);
            let worst = d.fold(0.0f64, f64::max);
            t.check(worst <= tol, || format!("directed EDU s={s} phases {:?}: defect {worst:e}", g.phases()))?;
        }
    }
    for b in [1, 2] {
        let m = edu_matrix(&addition_edu(b).map_err(err)?).map_err(err)?;
        let d = commutativity_defect(&m).map_err(err)?;
        t.check(d <= tol, || format!("addition EDU b={b}: defect {d:e}"))?;
    }
    Ok(())
}

fn symmetry_suite(rng: &mut ChaCha8Rng, tol: f64, inject_fault: bool, t: &mut Tally) -> Result<(), String> {
    let mut gates: Vec<(String, EduGate)> = Vec::new();
    for s in [2, 3] {
        for i in 0..10 {
            gates.push((format!("random EDU s={s} #{i}"), random_edu(rng, s, true)));
            let d = DiagEdge::new(s, random_symmetric_phases(rng, s), true).map_err(err)?;
            gates.push((format!("random diagonal edge s={s} #{i}"), d.as_edu()));
        }
    }
    for b in [1, 2] {
        gates.push((format!("addition EDU b={b}"), addition_edu(b).map_err(err)?));
    }
    if inject_fault {
        let mut phases = random_symmetric_phases(rng, 2);
        phases[1] += 0.5;
        gates.push(("injected gate".into(), EduGate::new_unchecked(random_unitary(rng, 2), phases, true)));
    }
    for (name, g) in gates {
        let d = undirected_symmetry_defect(&g.matrix()).map_err(err)?;
        t.check(d <= tol, || format!("{name} flagged undirected, phases {:?}: swap defect {d:e}", g.phases()))?;
    }
    Ok(())
}

fn conversion_suite(rng: &mut ChaCha8Rng, tol: f64, _: bool, t: &mut Tally) -> Result<(), String> {
    for trial in 0..50 {
        let n = rng.gen_range(2..=4);
        let g = random_graph(rng, n, 0.6);
        let pairs = rng.gen_range(1..=3);
        let c = random_edu_circuit(rng, 2, pairs).map_err(err)?;
        let u = circuit_unitary(&c, &g).map_err(err)?;
        let v = circuit_unitary(&circuit_to_eh(&c).map_err(err)?, &g).map_err(err)?;
        let d = u.max_abs_diff(&v);
        t.check(d <= tol, || format!("circuit #{trial} ({pairs} pairs) on {}: unitaries differ by {d:e}", edges(&g)))?;

        let edu = random_edu(rng, 2, true);
        let (u1, u2) = (NodeLayer::new(random_unitary(rng, 2)).map_err(err)?, NodeLayer::new(random_unitary(rng, 2)).map_err(err)?);
        let (a, dg, b) = absorb_redundancy(&u1, &edu, &u2).map_err(err)?;
        let two = |first: &NodeLayer, mid: eqgc::layers::Layer, last: &NodeLayer| -> Result<CMatrix, String> {
            let c = eqgc::layers::Circuit::from_layers(2, [first.clone().into(), mid, last.clone().into()]).map_err(err)?;
            circuit_unitary(&c, &g).map_err(err)
        };
        let d = two(&u1, edu.clone().into(), &u2)?.max_abs_diff(&two(&a, dg.into(), &b)?);
        t.check(d <= tol, || format!("absorption on {}: unitaries differ by {d:e}", edges(&g)))?;
    }
    Ok(())
}

fn parity_suite(_: &mut ChaCha8Rng, _: f64, _: bool, t: &mut Tally) -> Result<(), String> {
    for n in 3..=10 {
        let r = crosscheck_cycle(n);
        t.check(r.is_ok(), || format!("cycle n={n}: {}", r.unwrap_err()))?;
    }
    Ok(())
}

fn dimension_suite(_: &mut ChaCha8Rng, _: f64, _: bool, t: &mut Tally) -> Result<(), String> {
    for n in 1..=5 {
        let full = full_dimension(n);
        let rank = rank_oracle(n).map_err(err)?;
        let orbits = commutant_dimension(n, 2).map_err(err)?;
        t.check(full == rank && rank == orbits, || format!("n={n}: full {full}, rank {rank}, orbits {orbits}"))?;
    }
    for n in 1..=10 {
        let d = diagonal_dimension(n, 2);
        t.check(d == n as u128 + 1, || format!("n={n}: diagonal dimension {d}"))?;
    }
    Ok(())
}

fn mpnn_suite(rng: &mut ChaCha8Rng, _: f64, _: bool, t: &mut Tally) -> Result<(), String> {
    let graphs: Vec<Graph> = (1..=3).flat_map(all_graphs).collect();
    let spec1 = MpnnSpec::new(1, 1, 1, vec![UpdateTable::random(1, 1, rng)]).map_err(err)?;
    let spec2 = MpnnSpec::new(1, 1, 2, vec![UpdateTable::random(1, 2, rng)]).map_err(err)?;
    for g in &graphs {
        let n = g.n();
        for bits in 0..1u64 << n {
            let init: Vec<Vec<u64>> = (0..n).map(|i| vec![bits >> i & 1]).collect();
            let r = verify_simulation(&spec1, g, &init);
            t.check(r.is_ok(), || format!("b=1 on {} with init {init:?}: {}", edges(g), r.unwrap_err()))?;
        }
        for _ in 0..20 {
            let init: Vec<Vec<u64>> = (0..n).map(|_| vec![rng.gen_range(0..4)]).collect();
            let r = verify_simulation(&spec2, g, &init);
            t.check(r.is_ok(), || format!("b=2 on {} with init {init:?}: {}", edges(g), r.unwrap_err()))?;
        }
    }
    Ok(())
}

fn uniqueness_suite(_: &mut ChaCha8Rng, tol: f64, _: bool, t: &mut Tally) -> Result<(), String> {
    for b in 1..=10u32 {
        let space = 1u128 << b;
        for n in 1..=16usize {
            // exact falling factorial over 2^(bn), both as integers
            let exact = if n as u128 > space {
                0.0
            } else {
                let (mut num, mut den) = (1u128, 1u128);
                let mut p = 1.0f64;
                for i in 0..n as u128 {
                    num *= space - i;
                    den *= space;
                    if den > 1u128 << 100 {
                        p *= num as f64 / den as f64;
                        num = 1;
                        den = 1;
                    }
                }
                p * num as f64 / den as f64
            };
            let p = uniqueness_probability(n, b);
            let bound = uniqueness_bound(n, b);
            t.check((p - exact).abs() <= tol && p >= bound - tol, || {
                format!("n={n}, b={b}: probability {p}, exact {exact}, bound {bound}")
            })?;
        }
    }
    Ok(())
}

fn gradient_suite(rng: &mut ChaCha8Rng, tol: f64, _: bool, t: &mut Tally) -> Result<(), String> {
    let data: Vec<LabeledGraph> = cycles_dataset().train;
    for depth in [1, 4] {
        for point in 0..20 {
            let mut p = ModelParams::random(depth, rng);
            p.a = rng.gen_range(-4.0..4.0);
            p.c = rng.gen_range(-3.0..3.0);
            let g = loss_gradient(&p, &data).map_err(err)?;
            let fd = finite_difference_gradient(&p, &data, 1e-5).map_err(err)?;
            for (i, (x, y)) in g.iter().zip(&fd).enumerate() {
                t.check((x - y).abs() <= (tol * y.abs()).max(1e-8), || {
                    format!("depth {depth}, point {point}, component {i}: analytic {x:e}, finite difference {y:e}")
                })?;
            }
        }
    }
    Ok(())
}
