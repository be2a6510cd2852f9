//! Random instances for property checks: unitaries, gates, graphs and circuits.

use std::f64::consts::PI;

use rand::Rng;

use crate::complexla::{expm_hermitian, CMatrix, C64};
use crate::graphs::Graph;
use crate::layers::{swap_matrix, Circuit, DiagEdge, EduGate, EhLayer, Layer, LayerResult, NodeLayer};

fn rand_c<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `A + A^dag` for `A` with entries uniform in the unit square.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| rand_c(rng));
    &a + &a.dagger()
}

/// `exp(-iH)` of a [`random_hermitian`] `H`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    expm_hermitian(&random_hermitian(rng, dim)).expect("hermitian input")
}

/// `s x s` phase table, flattened row-major, symmetric under swapping registers.
pub fn random_symmetric_phases<R: Rng + ?Sized>(rng: &mut R, s: usize) -> Vec<f64> {
    let mut p = vec![0.0; s * s];
    for a in 0..s {
        for b in a..s {
            let x = rng.gen_range(-PI..PI);
            p[a * s + b] = x;
            p[b * s + a] = x;
        }
    }
    p
}

pub fn random_edu<R: Rng + ?Sized>(rng: &mut R, s: usize, undirected: bool) -> EduGate {
    let phases =
        if undirected { random_symmetric_phases(rng, s) } else { (0..s * s).map(|_| rng.gen_range(-PI..PI)).collect() };
    EduGate::new(random_unitary(rng, s), phases, undirected).expect("valid by construction")
}

/// Swap-symmetric two-node Hamiltonian, as EH layers on undirected graphs need.
pub fn random_symmetric_edge_hamiltonian<R: Rng + ?Sized>(rng: &mut R, s: usize) -> CMatrix {
    let h = random_hermitian(rng, s * s);
    let sw = swap_matrix(s);
    (&h + &(&(&sw * &h) * &sw)).scale(C64::new(0.5, 0.0))
}

/// Erdos-Renyi graph with edge probability `p`.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(n, edges).expect("endpoints in range")
}

/// `pairs` repetitions of a random node layer followed by a random undirected EDU.
pub fn random_edu_circuit<R: Rng + ?Sized>(rng: &mut R, s: usize, pairs: usize) -> LayerResult<Circuit> {
    let mut c = Circuit::new(s)?;
    for _ in 0..pairs {
        c.push(NodeLayer::new(random_unitary(rng, s))?)?;
        c.push(random_edu(rng, s, true))?;
    }
    Ok(c)
}

/// `len` layers of uniformly chosen kind: node, EDU, diagonal edge or EH.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, s: usize, len: usize) -> LayerResult<Circuit> {
    let mut c = Circuit::new(s)?;
    for _ in 0..len {
        let layer: Layer = match rng.gen_range(0..4) {
            0 => NodeLayer::new(random_unitary(rng, s))?.into(),
            1 => random_edu(rng, s, true).into(),
            2 => DiagEdge::new(s, random_symmetric_phases(rng, s), true)?.into(),
            _ => {
                let h_node = random_hermitian(rng, s).scale(C64::new(0.5, 0.0));
                EhLayer::new(h_node, random_symmetric_edge_hamiltonian(rng, s).scale(C64::new(0.5, 0.0)))?.into()
            }
        };
        c.push(layer)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::check_undirected_symmetry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in [2, 3] {
            assert!(random_unitary(&mut rng, s).unitarity_defect().unwrap() < 1e-12);
            assert!(random_hermitian(&mut rng, s).hermitian_defect().unwrap() == 0.0);
            let g = random_edu(&mut rng, s, true);
            assert!(check_undirected_symmetry(&g.matrix()).unwrap());
            let h = random_symmetric_edge_hamiltonian(&mut rng, s);
            let sw = swap_matrix(s);
            assert!((&(&sw * &h) * &sw).max_abs_diff(&h) < 1e-14);
        }
        let g = random_graph(&mut rng, 6, 1.0);
        assert_eq!(g.edges().count(), 15);
        assert_eq!(random_graph(&mut rng, 6, 0.0).edges().count(), 0);
        assert_eq!(random_edu_circuit(&mut rng, 2, 3).unwrap().len(), 6);
        assert_eq!(random_circuit(&mut rng, 2, 5).unwrap().len(), 5);
    }
}
