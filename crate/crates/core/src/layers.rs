//! Layer algebra for equivariant quantum graph circuits.
//!
//! A [`Circuit`] is an ordered list of [`Layer`]s over nodes of local
//! dimension `s`. Node layers apply one unitary at every node, EDU edge layers
//! apply `(V^dag (x) V^dag) D (V (x) V)` once per edge, diagonal edge layers
//! are the `V = I` special case, and EH layers exponentiate a graph-shaped
//! Hamiltonian. The checkers and converters at the bottom of the module relate
//! these forms to each other.

use std::fmt::Write as _;

use thiserror::Error;

use crate::complexla::{
    expm_hermitian, logm_unitary, principal_angle, CMatrix, LinalgError, C64, ONE, VALIDATION_TOL, ZERO,
};
use crate::graphs::{permute_graph, Graph, GraphError, Permutation};
use crate::simulator::{checked_dim, index_digits, permutation_operator, SimError, Statevector};

/// Tolerance of the operator-identity checkers.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayerError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error(transparent)]
    Graph(#[from] GraphError),

    #[error("{what} is not unitary (defect {defect:.3e})")]
    NotUnitary { what: &'static str, defect: f64 },

    #[error("{what} is not Hermitian (defect {defect:.3e})")]
    NotHermitian { what: &'static str, defect: f64 },

    #[error("undirected gate has asymmetric phases at |{a}{b}> and |{b}{a}>")]
    AsymmetricPhases { a: usize, b: usize },

    #[error("phase {0} is not finite")]
    NonFinitePhase(f64),

    #[error("expected {expected} phases, got {actual}")]
    PhaseCount { expected: usize, actual: usize },

    #[error("local dimension {actual} does not match circuit dimension {expected}")]
    LocalDimension { expected: usize, actual: usize },

    #[error("local dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("layer cannot be written in the text format: {0}")]
    NotSerializable(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0} layers have no EH form")]
    NotConvertible(&'static str),
}

pub type LayerResult<T> = Result<T, LayerError>;

fn require_unitary(m: &CMatrix, what: &'static str) -> LayerResult<()> {
    let defect = m.unitarity_defect()?;
    if defect > VALIDATION_TOL {
        return Err(LayerError::NotUnitary { what, defect });
    }
    Ok(())
}

fn require_hermitian(m: &CMatrix, what: &'static str) -> LayerResult<()> {
    let defect = m.hermitian_defect()?;
    if defect > VALIDATION_TOL {
        return Err(LayerError::NotHermitian { what, defect });
    }
    Ok(())
}

/// `Rz(t) = diag(e^{-it/2}, e^{it/2})`.
pub fn rz(t: f64) -> CMatrix {
    CMatrix::phase_diag(&[-t / 2.0, t / 2.0])
}

/// `Ry(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]`.
pub fn ry(t: f64) -> CMatrix {
    let (s, c) = (t / 2.0).sin_cos();
    CMatrix::from_real(2, 2, &[c, -s, s, c]).expect("finite entries")
}

/// `V(t1, t2, t3) = Rz(t3) Ry(t2) Rz(t1)`.
pub fn euler_matrix(angles: [f64; 3]) -> CMatrix {
    &(&rz(angles[2]) * &ry(angles[1])) * &rz(angles[0])
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_real(2, 2, &[h, h, h, -h]).expect("finite entries")
}

/// Diagonal phases of `CZ(alpha) = diag(1, 1, 1, e^{-i alpha})`.
pub fn cz_phases(alpha: f64) -> Vec<f64> {
    vec![0.0, 0.0, 0.0, -alpha]
}

/// Phases `(p00, p01, p01, p11)` of a swap-symmetric two-qubit diagonal.
pub fn symmetric_phases(p00: f64, p01: f64, p11: f64) -> Vec<f64> {
    vec![p00, p01, p01, p11]
}

/// Operator exchanging the two registers of an `s^2`-dimensional space.
pub fn swap_matrix(s: usize) -> CMatrix {
    CMatrix::from_fn(s * s, s * s, |r, c| if r == (c % s) * s + c / s { ONE } else { ZERO })
}

#[derive(Clone, Debug, PartialEq)]
enum NodeParam {
    Euler([f64; 3]),
    Hadamard,
    Matrix,
}

/// The same one-node unitary applied at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeLayer {
    v: CMatrix,
    param: NodeParam,
}

impl NodeLayer {
    pub fn new(v: CMatrix) -> LayerResult<Self> {
        require_unitary(&v, "node unitary")?;
        Ok(Self { v, param: NodeParam::Matrix })
    }

    pub fn euler(angles: [f64; 3]) -> Self {
        Self { v: euler_matrix(angles), param: NodeParam::Euler(angles) }
    }

    pub fn hadamard() -> Self {
        Self { v: hadamard(), param: NodeParam::Hadamard }
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn s(&self) -> usize {
        self.v.rows()
    }

    pub fn euler_angles(&self) -> Option<[f64; 3]> {
        match self.param {
            NodeParam::Euler(a) => Some(a),
            _ => None,
        }
    }
}

fn check_phases(s: usize, phases: &[f64], undirected: bool) -> LayerResult<()> {
    if phases.len() != s * s {
        return Err(LayerError::PhaseCount { expected: s * s, actual: phases.len() });
    }
    if let Some(&p) = phases.iter().find(|p| !p.is_finite()) {
        return Err(LayerError::NonFinitePhase(p));
    }
    if undirected {
        for a in 0..s {
            for b in a + 1..s {
                if (phases[a * s + b] - phases[b * s + a]).abs() > VALIDATION_TOL {
                    return Err(LayerError::AsymmetricPhases { a, b });
                }
            }
        }
    }
    Ok(())
}

/// Equivariantly diagonalizable unitary `(V^dag (x) V^dag) diag(e^{i phi}) (V (x) V)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EduGate {
    v: CMatrix,
    phases: Vec<f64>,
    undirected: bool,
}

impl EduGate {
    pub fn new(v: CMatrix, phases: Vec<f64>, undirected: bool) -> LayerResult<Self> {
        require_unitary(&v, "EDU basis change")?;
        check_phases(v.rows(), &phases, undirected)?;
        Ok(Self { v, phases, undirected })
    }

    /// Build without validating, so that deliberately broken gates can be fed
    /// to the checkers.
    pub fn new_unchecked(v: CMatrix, phases: Vec<f64>, undirected: bool) -> Self {
        Self { v, phases, undirected }
    }

    /// `CZ(alpha)` as an undirected EDU with `V = I`.
    pub fn cz(alpha: f64) -> Self {
        Self { v: CMatrix::identity(2), phases: cz_phases(alpha), undirected: true }
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    pub fn s(&self) -> usize {
        self.v.rows()
    }

    /// Re-run the constructor checks.
    pub fn validate(&self) -> LayerResult<()> {
        require_unitary(&self.v, "EDU basis change")?;
        check_phases(self.s(), &self.phases, self.undirected)
    }

    pub fn matrix(&self) -> CMatrix {
        let vv = crate::complexla::kron(&self.v, &self.v);
        &(&vv.dagger() * &CMatrix::phase_diag(&self.phases)) * &vv
    }
}

/// Validated dense matrix of an EDU gate.
pub fn edu_matrix(g: &EduGate) -> LayerResult<CMatrix> {
    g.validate()?;
    Ok(g.matrix())
}

/// Diagonal edge layer: `diag(e^{i phi})` on every edge.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagEdge {
    s: usize,
    phases: Vec<f64>,
    undirected: bool,
}

impl DiagEdge {
    pub fn new(s: usize, phases: Vec<f64>, undirected: bool) -> LayerResult<Self> {
        check_phases(s, &phases, undirected)?;
        Ok(Self { s, phases, undirected })
    }

    /// Two-qubit undirected diagonal with phases `(p00, p01, p11)`.
    pub fn symmetric(p00: f64, p01: f64, p11: f64) -> Self {
        Self { s: 2, phases: symmetric_phases(p00, p01, p11), undirected: true }
    }

    pub fn cz(alpha: f64) -> Self {
        Self { s: 2, phases: cz_phases(alpha), undirected: true }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::phase_diag(&self.phases)
    }

    pub fn as_edu(&self) -> EduGate {
        EduGate { v: CMatrix::identity(self.s), phases: self.phases.clone(), undirected: self.undirected }
    }
}

/// `exp(-i (sum_edges H_edge + sum_nodes H_node))`.
#[derive(Clone, Debug, PartialEq)]
pub struct EhLayer {
    h_node: CMatrix,
    h_edge: CMatrix,
}

impl EhLayer {
    pub fn new(h_node: CMatrix, h_edge: CMatrix) -> LayerResult<Self> {
        require_hermitian(&h_node, "node Hamiltonian")?;
        require_hermitian(&h_edge, "edge Hamiltonian")?;
        let s = h_node.rows();
        if h_edge.rows() != s * s {
            return Err(LayerError::LocalDimension { expected: s * s, actual: h_edge.rows() });
        }
        Ok(Self { h_node, h_edge })
    }

    pub fn zero(s: usize) -> Self {
        Self { h_node: CMatrix::zeros(s, s), h_edge: CMatrix::zeros(s * s, s * s) }
    }

    pub fn h_node(&self) -> &CMatrix {
        &self.h_node
    }

    pub fn h_edge(&self) -> &CMatrix {
        &self.h_edge
    }

    pub fn s(&self) -> usize {
        self.h_node.rows()
    }

    /// Dense `s^n x s^n` Hamiltonian on graph `g`. Undirected edges contribute
    /// one term each, oriented `(min, max)`.
    pub fn hamiltonian(&self, g: &Graph) -> LayerResult<CMatrix> {
        let s = self.s();
        let n = g.n();
        let dim = checked_dim(n, s)?;
        let mut h = CMatrix::zeros(dim, dim);
        for v in 0..n {
            h = &h + &embed_operator(&self.h_node, &[v], n, s)?;
        }
        for (a, b) in g.gate_pairs() {
            h = &h + &embed_operator(&self.h_edge, &[a, b], n, s)?;
        }
        Ok(h)
    }

    pub fn unitary(&self, g: &Graph) -> LayerResult<CMatrix> {
        Ok(expm_hermitian(&self.hamiltonian(g)?)?)
    }
}

/// A unitary applied at a single fixed node. Not equivariant; it exists as a
/// negative control for the checkers.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalLayer {
    pub u: CMatrix,
    pub node: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Node(NodeLayer),
    Edge(EduGate),
    DiagEdge(DiagEdge),
    Eh(EhLayer),
    Local(LocalLayer),
}

impl Layer {
    pub fn s(&self) -> usize {
        match self {
            Layer::Node(l) => l.s(),
            Layer::Edge(g) => g.s(),
            Layer::DiagEdge(d) => d.s(),
            Layer::Eh(e) => e.s(),
            Layer::Local(l) => l.u.rows(),
        }
    }
}

impl From<NodeLayer> for Layer {
    fn from(l: NodeLayer) -> Self {
        Layer::Node(l)
    }
}

impl From<EduGate> for Layer {
    fn from(g: EduGate) -> Self {
        Layer::Edge(g)
    }
}

impl From<DiagEdge> for Layer {
    fn from(d: DiagEdge) -> Self {
        Layer::DiagEdge(d)
    }
}

impl From<EhLayer> for Layer {
    fn from(e: EhLayer) -> Self {
        Layer::Eh(e)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    s: usize,
    layers: Vec<Layer>,
}

impl Circuit {
    pub fn new(s: usize) -> LayerResult<Self> {
        if !s.is_power_of_two() {
            return Err(LayerError::NotPowerOfTwo(s));
        }
        Ok(Self { s, layers: Vec::new() })
    }

    pub fn from_layers(s: usize, layers: impl IntoIterator<Item = Layer>) -> LayerResult<Self> {
        let mut c = Self::new(s)?;
        for l in layers {
            c.push(l)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, layer: impl Into<Layer>) -> LayerResult<()> {
        let layer = layer.into();
        if layer.s() != self.s {
            return Err(LayerError::LocalDimension { expected: self.s, actual: layer.s() });
        }
        self.layers.push(layer);
        Ok(())
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn q(&self) -> usize {
        self.s.trailing_zeros() as usize
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    /// Parse the line-oriented text format (single-qubit nodes):
    /// `node t1 t2 t3`, `edge p00 p01 p11`, `czedge alpha`, `hnode`.
    pub fn parse(text: &str) -> LayerResult<Self> {
        let mut c = Circuit::new(2)?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| LayerError::Parse { line: i + 1, msg };
            let mut words = line.split_whitespace();
            let kind = words.next().unwrap_or_default();
            let nums: Vec<f64> = words
                .map(|w| w.parse::<f64>().map_err(|_| err(format!("bad number {w:?}"))))
                .collect::<LayerResult<_>>()?;
            if let Some(x) = nums.iter().find(|x| !x.is_finite()) {
                return Err(err(format!("non-finite value {x}")));
            }
            let want = |k: usize| {
                if nums.len() == k {
                    Ok(())
                } else {
                    Err(err(format!("{kind} takes {k} values, got {}", nums.len())))
                }
            };
            let layer: Layer = match kind {
                "node" => {
                    want(3)?;
                    NodeLayer::euler([nums[0], nums[1], nums[2]]).into()
                }
                "edge" => {
                    want(3)?;
                    DiagEdge::symmetric(nums[0], nums[1], nums[2]).into()
                }
                "czedge" => {
                    want(1)?;
                    DiagEdge::cz(nums[0]).into()
                }
                "hnode" => {
                    want(0)?;
                    NodeLayer::hadamard().into()
                }
                other => return Err(err(format!("unknown layer kind {other:?}"))),
            };
            c.push(layer)?;
        }
        Ok(c)
    }

    /// Inverse of [`Circuit::parse`] for circuits built from Euler, Hadamard
    /// and symmetric diagonal layers.
    pub fn to_text(&self) -> LayerResult<String> {
        let mut out = String::new();
        for (i, l) in self.layers.iter().enumerate() {
            match l {
                Layer::Node(nl) => match nl.param {
                    NodeParam::Euler([a, b, c]) => writeln!(out, "node {a} {b} {c}"),
                    NodeParam::Hadamard => writeln!(out, "hnode"),
                    NodeParam::Matrix => return Err(LayerError::NotSerializable(format!("layer {i}: matrix node layer"))),
                },
                Layer::DiagEdge(d) if d.s == 2 && d.undirected => {
                    let p = &d.phases;
                    writeln!(out, "edge {} {} {}", p[0], p[1], p[3])
                }
                _ => return Err(LayerError::NotSerializable(format!("layer {i}"))),
            }
            .expect("writing to a String");
        }
        Ok(out)
    }
}

/// Dense operator acting as `m` on the listed nodes (first listed node is the
/// most significant register of `m`) and as the identity elsewhere.
pub fn embed_operator(m: &CMatrix, nodes: &[usize], n: usize, s: usize) -> LayerResult<CMatrix> {
    let dim = checked_dim(n, s)?;
    let local = s.pow(nodes.len() as u32);
    if m.rows() != local || m.cols() != local {
        return Err(LayerError::LocalDimension { expected: local, actual: m.rows() });
    }
    if let Some(&v) = nodes.iter().find(|&&v| v >= n) {
        return Err(SimError::NodeOutOfRange { node: v, n }.into());
    }
    let digits: Vec<Vec<usize>> = (0..dim).map(|i| index_digits(i, n, s)).collect();
    let local_index = |d: &[usize]| nodes.iter().fold(0, |acc, &v| acc * s + d[v]);
    let rest_index = |d: &[usize]| {
        (0..n).filter(|v| !nodes.contains(v)).fold(0, |acc, v| acc * s + d[v])
    };
    let rest: Vec<usize> = digits.iter().map(|d| rest_index(d)).collect();
    let loc: Vec<usize> = digits.iter().map(|d| local_index(d)).collect();
    Ok(CMatrix::from_fn(dim, dim, |r, c| if rest[r] == rest[c] { m[(loc[r], loc[c])] } else { ZERO }))
}

/// Apply a two-node gate to each listed ordered pair, in order.
pub fn apply_edge_gate(u: &CMatrix, pairs: &[(usize, usize)], state: &mut Statevector) -> LayerResult<()> {
    for &(a, b) in pairs {
        state.apply_2local(u, a, b)?;
    }
    Ok(())
}

fn apply_diag_edges(phases: &[f64], s: usize, pairs: &[(usize, usize)], state: &mut Statevector) {
    let n = state.n();
    let table: Vec<C64> = phases.iter().map(|&p| C64::from_polar(1.0, p)).collect();
    state.apply_diagonal(|idx| {
        let d = index_digits(idx, n, s);
        pairs.iter().fold(ONE, |acc, &(a, b)| acc * table[d[a] * s + d[b]])
    });
}

/// Layer with any dense precomputation done once per graph.
enum Prepared<'a> {
    Layer(&'a Layer),
    Dense(CMatrix),
}

fn prepare<'a>(c: &'a Circuit, g: &Graph) -> LayerResult<Vec<Prepared<'a>>> {
    c.layers
        .iter()
        .map(|l| match l {
            Layer::Eh(eh) => Ok(Prepared::Dense(eh.unitary(g)?)),
            other => Ok(Prepared::Layer(other)),
        })
        .collect()
}

fn run_prepared(ops: &[Prepared], pairs: &[(usize, usize)], s: usize, state: &mut Statevector) -> LayerResult<()> {
    for op in ops {
        match op {
            Prepared::Dense(m) => {
                let out = m.mat_vec(state.amplitudes())?;
                state.amplitudes_mut().copy_from_slice(&out);
            }
            Prepared::Layer(Layer::Node(nl)) => {
                for v in 0..state.n() {
                    state.apply_1local(nl.v(), v)?;
                }
            }
            Prepared::Layer(Layer::Edge(gate)) => apply_edge_gate(&gate.matrix(), pairs, state)?,
            Prepared::Layer(Layer::DiagEdge(d)) => apply_diag_edges(&d.phases, s, pairs, state),
            Prepared::Layer(Layer::Local(l)) => state.apply_1local(&l.u, l.node)?,
            Prepared::Layer(Layer::Eh(_)) => unreachable!("EH layers are prepared densely"),
        }
    }
    Ok(())
}

fn check_state(c: &Circuit, g: &Graph, state: &Statevector) -> LayerResult<()> {
    if state.n() != g.n() {
        return Err(SimError::DimensionMismatch(format!("state has {} nodes, graph has {}", state.n(), g.n())).into());
    }
    if state.s() != c.s {
        return Err(LayerError::LocalDimension { expected: c.s, actual: state.s() });
    }
    Ok(())
}

/// Run the circuit on `state` for graph `g`.
pub fn apply_circuit(c: &Circuit, g: &Graph, state: &Statevector) -> LayerResult<Statevector> {
    check_state(c, g, state)?;
    let ops = prepare(c, g)?;
    let mut out = state.clone();
    run_prepared(&ops, &g.gate_pairs(), c.s, &mut out)?;
    Ok(out)
}

/// Full `s^n x s^n` unitary of the circuit on graph `g`.
pub fn circuit_unitary(c: &Circuit, g: &Graph) -> LayerResult<CMatrix> {
    let n = g.n();
    let dim = checked_dim(n, c.s)?;
    let ops = prepare(c, g)?;
    let pairs = g.gate_pairs();
    let mut data = vec![ZERO; dim * dim];
    for col in 0..dim {
        let mut amps = vec![ZERO; dim];
        amps[col] = ONE;
        let mut st = Statevector::from_amplitudes(n, c.q(), amps)?;
        run_prepared(&ops, &pairs, c.s, &mut st)?;
        for (row, a) in st.amplitudes().iter().enumerate() {
            data[row * dim + col] = *a;
        }
    }
    Ok(CMatrix::from_vec(dim, dim, data)?)
}

/// Largest entrywise deviation of `C(A)` from `P^T C(A') P`, where `A'` is the
/// graph whose node `i` is node `p(i)` of `g`.
pub fn equivariance_defect(c: &Circuit, g: &Graph, p: &Permutation) -> LayerResult<f64> {
    let pm = permutation_operator(p, g.n(), c.s)?;
    let g_perm = permute_graph(g, &p.inverse())?;
    let lhs = circuit_unitary(c, g)?;
    let rhs = &(&pm.transpose() * &circuit_unitary(c, &g_perm)?) * &pm;
    Ok(lhs.max_abs_diff(&rhs))
}

pub fn check_equivariance(c: &Circuit, g: &Graph, p: &Permutation, tol: f64) -> LayerResult<bool> {
    Ok(equivariance_defect(c, g, p)? <= tol)
}

/// Largest deviation of `P^T m P` from `m` for a graph-independent operator
/// on `n` nodes of dimension `s`.
pub fn fixed_matrix_equivariance_defect(m: &CMatrix, n: usize, s: usize, p: &Permutation) -> LayerResult<f64> {
    let pm = permutation_operator(p, n, s)?;
    if m.rows() != pm.rows() || m.cols() != pm.cols() {
        return Err(LayerError::LocalDimension { expected: pm.rows(), actual: m.rows() });
    }
    Ok((&(&pm.transpose() * m) * &pm).max_abs_diff(m))
}

/// Local dimension `s` of an `s^2 x s^2` operator.
fn two_node_dim(u: &CMatrix) -> LayerResult<usize> {
    u.require_square()?;
    let s = (u.rows() as f64).sqrt().round() as usize;
    if s * s != u.rows() {
        return Err(LayerError::LocalDimension { expected: s * s, actual: u.rows() });
    }
    Ok(s)
}

fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b).max_abs_diff(&(b * a))
}

/// Does `u` on nodes (0, 1) commute with `u` on nodes (0, 2)?
pub fn commutativity_defect(u: &CMatrix) -> LayerResult<f64> {
    let s = two_node_dim(u)?;
    Ok(commutator_norm(&embed_operator(u, &[0, 1], 3, s)?, &embed_operator(u, &[0, 2], 3, s)?))
}

pub fn check_commutativity(u: &CMatrix) -> LayerResult<bool> {
    Ok(commutativity_defect(u)? <= CHECK_TOL)
}

pub fn undirected_symmetry_defect(u: &CMatrix) -> LayerResult<f64> {
    let sw = swap_matrix(two_node_dim(u)?);
    Ok((&(&sw * u) * &sw).max_abs_diff(u))
}

pub fn check_undirected_symmetry(u: &CMatrix) -> LayerResult<bool> {
    Ok(undirected_symmetry_defect(u)? <= CHECK_TOL)
}

/// Defects of the three extra identities a gate needs on directed graphs,
/// where `U_ab` acts with its first register on node `a`:
/// `[U_10, U_20] = 0` and `[U_01, U_20] = 0` on three nodes, and
/// `[U_01, U_10] = 0` on two nodes.
pub fn directed_defects(u: &CMatrix) -> LayerResult<[f64; 3]> {
    let s = two_node_dim(u)?;
    let u10 = embed_operator(u, &[1, 0], 3, s)?;
    let u20 = embed_operator(u, &[2, 0], 3, s)?;
    let u01 = embed_operator(u, &[0, 1], 3, s)?;
    let sw = swap_matrix(s);
    let u_rev = &(&sw * u) * &sw;
    Ok([commutator_norm(&u10, &u20), commutator_norm(&u01, &u20), commutator_norm(u, &u_rev)])
}

pub fn check_directed_conditions(u: &CMatrix) -> LayerResult<bool> {
    Ok(directed_defects(u)?.iter().all(|&d| d <= CHECK_TOL))
}

/// EH layer whose evolution is `V` at every node.
pub fn node_layer_to_eh(v: &CMatrix) -> LayerResult<EhLayer> {
    let s = v.rows();
    Ok(EhLayer { h_node: logm_unitary(v)?, h_edge: CMatrix::zeros(s * s, s * s) })
}

/// EH layer whose evolution is `diag(e^{i phi})` on every edge.
pub fn diag_edge_to_eh(phases: &[f64]) -> LayerResult<EhLayer> {
    let s = (phases.len() as f64).sqrt().round() as usize;
    if s * s != phases.len() || s == 0 {
        return Err(LayerError::PhaseCount { expected: s.max(1) * s.max(1), actual: phases.len() });
    }
    let h: Vec<f64> = phases.iter().map(|&p| principal_angle(-p)).collect();
    Ok(EhLayer { h_node: CMatrix::zeros(s, s), h_edge: CMatrix::real_diag(&h) })
}

/// Three EH layers, in application order, reproducing an EDU edge layer.
pub fn edu_to_eh(g: &EduGate) -> LayerResult<[EhLayer; 3]> {
    g.validate()?;
    Ok([node_layer_to_eh(g.v())?, diag_edge_to_eh(g.phases())?, node_layer_to_eh(&g.v().dagger())?])
}

/// Fold the basis change of an EDU into the surrounding node layers:
/// `u1; EDU(V, D); u2` equals `V u1; D; u2 V^dag`.
pub fn absorb_redundancy(u1: &NodeLayer, g: &EduGate, u2: &NodeLayer) -> LayerResult<(NodeLayer, DiagEdge, NodeLayer)> {
    let s = g.s();
    if u1.s() != s || u2.s() != s {
        return Err(LayerError::LocalDimension { expected: s, actual: if u1.s() != s { u1.s() } else { u2.s() } });
    }
    g.validate()?;
    let first = NodeLayer::new(g.v() * u1.v())?;
    let last = NodeLayer::new(u2.v() * &g.v().dagger())?;
    Ok((first, DiagEdge::new(s, g.phases().to_vec(), g.is_undirected())?, last))
}

/// The same circuit written with EH layers only: node layers become one EH
/// layer, diagonal edge layers one, EDU layers three.
pub fn circuit_to_eh(c: &Circuit) -> LayerResult<Circuit> {
    let mut out = Circuit::new(c.s())?;
    for layer in c.layers() {
        match layer {
            Layer::Node(l) => out.push(node_layer_to_eh(l.v())?)?,
            Layer::DiagEdge(d) => out.push(diag_edge_to_eh(d.phases())?)?,
            Layer::Edge(g) => {
                for eh in edu_to_eh(g)? {
                    out.push(eh)?;
                }
            }
            Layer::Eh(e) => out.push(e.clone())?,
            Layer::Local(_) => return Err(LayerError::NotConvertible("single-node")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexla::{kron, I};
    use crate::graphs::{complete_graph, cycle_graph, path_graph};
    use crate::simulator::plus_state;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
        let a = CMatrix::from_fn(dim, dim, |_, _| rand_c(rng));
        &a + &a.dagger()
    }

    fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
        expm_hermitian(&random_hermitian(rng, dim)).unwrap()
    }

    fn random_symmetric_phases(rng: &mut ChaCha8Rng, s: usize) -> Vec<f64> {
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

    fn random_edu(rng: &mut ChaCha8Rng, s: usize, undirected: bool) -> EduGate {
        let phases = if undirected {
            random_symmetric_phases(rng, s)
        } else {
            (0..s * s).map(|_| rng.gen_range(-PI..PI)).collect()
        };
        EduGate::new(random_unitary(rng, s), phases, undirected).unwrap()
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        Graph::new(n, edges).unwrap()
    }

    fn cnot() -> CMatrix {
        CMatrix::from_real(4, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.]).unwrap()
    }

    /// Product of dense embedded gates, built independently of the kernels.
    fn dense_oracle(c: &Circuit, g: &Graph) -> CMatrix {
        let (n, s) = (g.n(), c.s());
        let mut u = CMatrix::identity(s.pow(n as u32));
        for l in c.layers() {
            let step = match l {
                Layer::Node(nl) => (0..n).fold(CMatrix::identity(1), |acc, _| kron(&acc, nl.v())),
                Layer::Edge(e) => g.gate_pairs().iter().fold(CMatrix::identity(u.rows()), |acc, &(a, b)| {
                    &embed_operator(&e.matrix(), &[a, b], n, s).unwrap() * &acc
                }),
                Layer::DiagEdge(d) => g.gate_pairs().iter().fold(CMatrix::identity(u.rows()), |acc, &(a, b)| {
                    &embed_operator(&d.matrix(), &[a, b], n, s).unwrap() * &acc
                }),
                Layer::Eh(e) => e.unitary(g).unwrap(),
                Layer::Local(lo) => embed_operator(&lo.u, &[lo.node], n, s).unwrap(),
            };
            u = &step * &u;
        }
        u
    }

    #[test]
    fn edu_matrix_examples() {
        let id = EduGate::new(CMatrix::identity(2), vec![0.0; 4], true).unwrap();
        assert!(edu_matrix(&id).unwrap().max_abs_diff(&CMatrix::identity(4)) < 1e-15);
        let alpha = 0.83;
        let cz = edu_matrix(&EduGate::cz(alpha)).unwrap();
        let expect = CMatrix::diag(&[ONE, ONE, ONE, C64::from_polar(1.0, -alpha)]);
        assert!(cz.max_abs_diff(&expect) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in [2, 4] {
            let g = random_edu(&mut rng, s, false);
            let m = edu_matrix(&g).unwrap();
            assert!(m.unitarity_defect().unwrap() < 1e-10);
            assert!(check_commutativity(&m).unwrap());
        }

        assert_eq!(
            EduGate::new(CMatrix::identity(2), vec![0.0, 0.1, 0.2, 0.0], true),
            Err(LayerError::AsymmetricPhases { a: 0, b: 1 })
        );
        assert!(matches!(
            EduGate::new(CMatrix::identity(2), vec![0.0; 3], false),
            Err(LayerError::PhaseCount { expected: 4, actual: 3 })
        ));
        let bad = CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(EduGate::new(bad, vec![0.0; 4], false), Err(LayerError::NotUnitary { .. })));
    }

    #[test]
    fn euler_parameterization() {
        assert!(euler_matrix([0.0; 3]).max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        // H equals V(pi, pi/2, 0) up to a global phase of -i
        let v = euler_matrix([PI, PI / 2.0, 0.0]);
        assert!(v.scale(I).max_abs_diff(&hadamard()) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let a = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
            assert!(euler_matrix(a).unitarity_defect().unwrap() < 1e-14);
        }
    }

    #[test]
    fn apply_circuit_examples() {
        let g = cycle_graph(4).unwrap();
        let st = plus_state(4);
        let empty = Circuit::new(2).unwrap();
        assert_eq!(apply_circuit(&empty, &g, &st).unwrap(), st);

        let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let c = Circuit::from_layers(2, [NodeLayer::new(x).unwrap().into()]).unwrap();
        let zero = Statevector::basis(1, &[0; 4]).unwrap();
        assert_eq!(apply_circuit(&c, &g, &zero).unwrap(), Statevector::basis(1, &[1; 4]).unwrap());

        assert!(apply_circuit(&c, &g, &plus_state(3)).is_err());
    }

    #[test]
    fn cz_hadamard_circuit_on_six_cycle() {
        // support is the six rotations of 000101 plus further strings; every
        // rotation carries the same probability
        let g = cycle_graph(6).unwrap();
        let c = Circuit::parse("czedge 3.141592653589793\nhnode\n").unwrap();
        let d = apply_circuit(&c, &g, &plus_state(6)).unwrap().outcome_distribution();
        assert!((d.total() - 1.0).abs() < 1e-12);
        let base = 0b000101usize;
        let p0 = d.get(base);
        assert!(p0 > 1e-6);
        for r in 1..6 {
            let rot = ((base << r) | (base >> (6 - r))) & 0b111111;
            assert!((d.get(rot) - p0).abs() < 1e-12);
        }
        // agrees with the explicit oracle
        let u = dense_oracle(&c, &g);
        let psi = u.mat_vec(plus_state(6).amplitudes()).unwrap();
        for (i, a) in psi.iter().enumerate() {
            assert!((a.norm_sqr() - d.get(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn circuit_unitary_examples() {
        let g = path_graph(3);
        assert!(circuit_unitary(&Circuit::new(2).unwrap(), &g).unwrap().max_abs_diff(&CMatrix::identity(8)) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = random_edu(&mut rng, 2, true);
        let one_edge = Graph::new(2, [(0, 1)]).unwrap();
        let c = Circuit::from_layers(2, [e.clone().into()]).unwrap();
        assert!(circuit_unitary(&c, &one_edge).unwrap().max_abs_diff(&e.matrix()) < 1e-12);

        let g = random_graph(&mut rng, 4);
        let h_edge = {
            let h = random_hermitian(&mut rng, 4);
            let sw = swap_matrix(2);
            &h + &(&(&sw * &h) * &sw)
        };
        let c = Circuit::from_layers(
            2,
            [
                NodeLayer::new(random_unitary(&mut rng, 2)).unwrap().into(),
                e.into(),
                EhLayer::new(random_hermitian(&mut rng, 2), h_edge).unwrap().into(),
                DiagEdge::symmetric(0.3, -1.1, 2.0).into(),
            ],
        )
        .unwrap();
        let u = circuit_unitary(&c, &g).unwrap();
        assert!(u.unitarity_defect().unwrap() < 1e-9);
        assert!(u.max_abs_diff(&dense_oracle(&c, &g)) < 1e-10);
        for col in 0..16 {
            let digits = index_digits(col, 4, 2);
            let out = apply_circuit(&c, &g, &Statevector::basis(1, &digits).unwrap()).unwrap();
            for (row, a) in out.amplitudes().iter().enumerate() {
                assert!((a - u[(row, col)]).norm() < 1e-12);
            }
        }

        let big = path_graph(13);
        assert!(matches!(
            circuit_unitary(&Circuit::new(2).unwrap(), &big),
            Err(LayerError::Sim(SimError::TooLarge { .. }))
        ));
    }

    #[test]
    fn equivariance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let g = random_graph(&mut rng, 4);
            let c = Circuit::from_layers(
                2,
                [
                    NodeLayer::new(random_unitary(&mut rng, 2)).unwrap().into(),
                    random_edu(&mut rng, 2, true).into(),
                    NodeLayer::new(random_unitary(&mut rng, 2)).unwrap().into(),
                    random_edu(&mut rng, 2, true).into(),
                ],
            )
            .unwrap();
            assert!(check_equivariance(&c, &g, &Permutation::identity(4), 1e-12).unwrap());
            let p = Permutation::random(4, &mut rng);
            assert!(check_equivariance(&c, &g, &p, 1e-9).unwrap());
        }

        let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let local = Circuit::from_layers(2, [Layer::Local(LocalLayer { u: x, node: 0 })]).unwrap();
        let g = path_graph(3);
        assert!(check_equivariance(&local, &g, &Permutation::identity(3), 1e-9).unwrap());
        assert!(!check_equivariance(&local, &g, &Permutation::cyclic(3), 1e-9).unwrap());
    }

    #[test]
    fn directed_graph_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Graph::directed(4, [(0, 1), (1, 2), (2, 0), (3, 1), (1, 3)]).unwrap();
        let c = Circuit::from_layers(
            2,
            [
                NodeLayer::new(random_unitary(&mut rng, 2)).unwrap().into(),
                random_edu(&mut rng, 2, false).into(),
            ],
        )
        .unwrap();
        for p in Permutation::all(4) {
            assert!(check_equivariance(&c, &g, &p, 1e-9).unwrap());
        }
    }

    #[test]
    fn commutativity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for s in [2, 4] {
            for _ in 0..3 {
                assert!(check_commutativity(&random_edu(&mut rng, s, false).matrix()).unwrap());
            }
        }
        // the transpositions (01) and (02) do not commute
        assert!(!check_commutativity(&swap_matrix(2)).unwrap());
        let mut found = false;
        for _ in 0..10 {
            if !check_commutativity(&random_unitary(&mut rng, 4)).unwrap() {
                found = true;
                break;
            }
        }
        assert!(found);
        // gates sharing a control register commute
        assert!(check_commutativity(&cnot()).unwrap());
    }

    #[test]
    fn symmetry_examples() {
        assert!(check_undirected_symmetry(&EduGate::cz(1.3).matrix()).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(check_undirected_symmetry(&random_edu(&mut rng, 2, true).matrix()).unwrap());
        assert!(check_undirected_symmetry(&random_edu(&mut rng, 4, true).matrix()).unwrap());
        assert!(!check_undirected_symmetry(&cnot()).unwrap());
        assert!(check_undirected_symmetry(&CMatrix::identity(3)).is_err());
    }

    #[test]
    fn directed_condition_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert!(check_directed_conditions(&CMatrix::identity(4)).unwrap());
        for s in [2, 4] {
            for _ in 0..3 {
                assert!(check_directed_conditions(&random_edu(&mut rng, s, false).matrix()).unwrap());
            }
        }
        let mut failures = 0;
        for _ in 0..10 {
            if !check_directed_conditions(&random_unitary(&mut rng, 4)).unwrap() {
                failures += 1;
            }
        }
        assert_eq!(failures, 10);
    }

    #[test]
    fn node_layer_conversion() {
        let z = node_layer_to_eh(&CMatrix::identity(2)).unwrap();
        assert!(z.h_node().max_abs() < 1e-15 && z.h_edge().max_abs() == 0.0);

        let v = CMatrix::phase_diag(&[0.0, -PI / 2.0]);
        let eh = node_layer_to_eh(&v).unwrap();
        assert!(eh.h_node().max_abs_diff(&CMatrix::real_diag(&[0.0, PI / 2.0])) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = random_unitary(&mut rng, 2);
        let g = random_graph(&mut rng, 3);
        let a = circuit_unitary(&Circuit::from_layers(2, [NodeLayer::new(v.clone()).unwrap().into()]).unwrap(), &g);
        let b = circuit_unitary(&Circuit::from_layers(2, [node_layer_to_eh(&v).unwrap().into()]).unwrap(), &g);
        assert!(a.unwrap().max_abs_diff(&b.unwrap()) < 1e-8);
    }

    #[test]
    fn diag_edge_conversion() {
        let z = diag_edge_to_eh(&[0.0; 4]).unwrap();
        assert!(z.h_edge().max_abs() == 0.0);
        let cz = diag_edge_to_eh(&cz_phases(PI)).unwrap();
        assert!(cz.h_edge().max_abs_diff(&CMatrix::real_diag(&[0.0, 0.0, 0.0, PI])) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let tri = complete_graph(3);
        let phases = random_symmetric_phases(&mut rng, 2);
        let d = DiagEdge::new(2, phases.clone(), true).unwrap();
        let a = circuit_unitary(&Circuit::from_layers(2, [d.into()]).unwrap(), &tri).unwrap();
        let b = circuit_unitary(&Circuit::from_layers(2, [diag_edge_to_eh(&phases).unwrap().into()]).unwrap(), &tri)
            .unwrap();
        assert!(a.max_abs_diff(&b) < 1e-8);
    }

    #[test]
    fn edu_conversion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phases = random_symmetric_phases(&mut rng, 2);
        let plain = EduGate::new(CMatrix::identity(2), phases.clone(), true).unwrap();
        let eh = edu_to_eh(&plain).unwrap();
        let g = path_graph(4);
        let mid = circuit_unitary(&Circuit::from_layers(2, [eh[1].clone().into()]).unwrap(), &g).unwrap();
        let direct = circuit_unitary(&Circuit::from_layers(2, [plain.into()]).unwrap(), &g).unwrap();
        assert!(mid.max_abs_diff(&direct) < 1e-8);

        for g in [path_graph(4), Graph::new(4, [(0, 1), (1, 2)]).unwrap()] {
            let e = random_edu(&mut rng, 2, true);
            let direct = circuit_unitary(&Circuit::from_layers(2, [e.clone().into()]).unwrap(), &g).unwrap();
            let converted = Circuit::from_layers(2, edu_to_eh(&e).unwrap().into_iter().map(Layer::from)).unwrap();
            assert!(direct.max_abs_diff(&circuit_unitary(&converted, &g).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn redundancy_absorption() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u1 = NodeLayer::new(random_unitary(&mut rng, 2)).unwrap();
        let u2 = NodeLayer::new(random_unitary(&mut rng, 2)).unwrap();
        let plain = EduGate::new(CMatrix::identity(2), random_symmetric_phases(&mut rng, 2), true).unwrap();
        let (a, d, b) = absorb_redundancy(&u1, &plain, &u2).unwrap();
        assert!(a.v().max_abs_diff(u1.v()) < 1e-15 && b.v().max_abs_diff(u2.v()) < 1e-15);
        assert_eq!(d.phases(), plain.phases());

        let g = cycle_graph(4).unwrap();
        let e = random_edu(&mut rng, 2, true);
        let original = Circuit::from_layers(2, [u1.clone().into(), e.clone().into(), u2.clone().into()]).unwrap();
        let (a, d, b) = absorb_redundancy(&u1, &e, &u2).unwrap();
        let reduced = Circuit::from_layers(2, [a.into(), d.into(), b.into()]).unwrap();
        let diff = circuit_unitary(&original, &g).unwrap().max_abs_diff(&circuit_unitary(&reduced, &g).unwrap());
        assert!(diff < 1e-9);

        // three Euler angles plus three symmetric phases per layer pair
        let pair = Circuit::parse("node 0.1 0.2 0.3\nedge 0.4 0.5 0.6\n").unwrap();
        let count: usize = pair
            .layers()
            .iter()
            .map(|l| match l {
                Layer::Node(nl) => nl.euler_angles().map_or(0, |a| a.len()),
                Layer::DiagEdge(d) => {
                    let mut distinct = d.phases().to_vec();
                    distinct.dedup();
                    distinct.len()
                }
                _ => 0,
            })
            .sum();
        assert_eq!(count, 6);
    }

    #[test]
    fn edge_order_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let g = random_graph(&mut rng, 5);
            let u = random_edu(&mut rng, 2, true).matrix();
            let mut pairs = g.gate_pairs();
            let mut a = plus_state(5);
            a.apply_1local(&random_unitary(&mut rng, 2), 0).unwrap();
            let mut b = a.clone();
            apply_edge_gate(&u, &pairs, &mut a).unwrap();
            pairs.reverse();
            let half = pairs.len() / 2;
            pairs.rotate_left(half);
            apply_edge_gate(&u, &pairs, &mut b).unwrap();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                assert!((x - y).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn global_phase_quotient() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let g = random_graph(&mut rng, 4);
        let v = random_unitary(&mut rng, 2);
        let phases = random_symmetric_phases(&mut rng, 2);
        let shifted: Vec<f64> = phases.iter().map(|p| p + 0.77).collect();
        let make = |ph: Vec<f64>| {
            Circuit::from_layers(
                2,
                [NodeLayer::new(v.clone()).unwrap().into(), EduGate::new(v.clone(), ph, true).unwrap().into()],
            )
            .unwrap()
        };
        let a = circuit_unitary(&make(phases), &g).unwrap();
        let b = circuit_unitary(&make(shifted), &g).unwrap();
        assert!(a.phase_aligned_diff(&b) < 1e-10);
        let pa = a.mat_vec(plus_state(4).amplitudes()).unwrap();
        let pb = b.mat_vec(plus_state(4).amplitudes()).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x.norm_sqr() - y.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn text_format() {
        let text = "# demo\nnode 0.1 -0.2 0.3\nedge 0 0.5 1.5\n\nczedge 3.14\nhnode\n";
        let c = Circuit::parse(text).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.layers()[0], NodeLayer::euler([0.1, -0.2, 0.3]).into());
        assert_eq!(c.layers()[2], DiagEdge::cz(3.14).into());
        let round = Circuit::parse(&c.to_text().unwrap()).unwrap();
        assert_eq!(round, c);

        assert!(matches!(Circuit::parse("node 1 2"), Err(LayerError::Parse { line: 1, .. })));
        assert!(matches!(Circuit::parse("hnode\nfoo"), Err(LayerError::Parse { line: 2, .. })));
        assert!(matches!(Circuit::parse("czedge x"), Err(LayerError::Parse { line: 1, .. })));
        assert!(matches!(Circuit::parse("czedge NaN"), Err(LayerError::Parse { line: 1, .. })));
    }

    #[test]
    fn mismatched_layer_dimensions_rejected() {
        let mut c = Circuit::new(2).unwrap();
        assert!(matches!(
            c.push(NodeLayer::new(CMatrix::identity(4)).unwrap()),
            Err(LayerError::LocalDimension { expected: 2, actual: 4 })
        ));
        assert!(Circuit::new(3).is_err());
        assert!(EhLayer::new(CMatrix::identity(2), CMatrix::from_real(4, 4, &[1.0; 16]).unwrap()).is_ok());
        let not_herm = CMatrix::from_fn(2, 2, |r, c| if r < c { I } else { ZERO });
        assert!(matches!(EhLayer::new(not_herm, CMatrix::zeros(4, 4)), Err(LayerError::NotHermitian { .. })));
    }
}
