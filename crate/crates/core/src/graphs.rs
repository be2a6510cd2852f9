//! Graphs, node permutations, benchmark graphs and the cycles dataset.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest node count accepted by the isomorphism test.
pub const MAX_ISOMORPHISM_NODES: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("edge ({u}, {v}) out of range for {n} nodes")]
    EndpointOutOfRange { u: usize, v: usize, n: usize },

    #[error("a cycle needs at least 3 nodes, got {0}")]
    CycleTooSmall(usize),

    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),

    #[error("size mismatch: graph has {graph} nodes, permutation has {perm}")]
    SizeMismatch { graph: usize, perm: usize },

    #[error("brute-force isomorphism is limited to {MAX_ISOMORPHISM_NODES} nodes, got {0}")]
    TooLarge(usize),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type GraphResult<T> = Result<T, GraphError>;

/// A simple graph on nodes `0..n`.
///
/// Undirected edges are stored as `(min, max)` pairs. Graphs built for the
/// directed commutativity checks additionally carry ordered edges; when those
/// are present they are what edge layers iterate over.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    directed_edges: Option<BTreeSet<(usize, usize)>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self { n, edges: BTreeSet::new(), directed_edges: None }
    }

    /// Build an undirected graph, deduplicating edges given in either orientation.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> GraphResult<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            check_endpoints(n, u, v)?;
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Self { n, edges: set, directed_edges: None })
    }

    /// Build a directed graph; the undirected edge set is its symmetrization.
    pub fn directed(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> GraphResult<Self> {
        let mut directed = BTreeSet::new();
        let mut undirected = BTreeSet::new();
        for (u, v) in arcs {
            check_endpoints(n, u, v)?;
            directed.insert((u, v));
            undirected.insert((u.min(v), u.max(v)));
        }
        Ok(Self { n, edges: undirected, directed_edges: Some(directed) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn directed_edges(&self) -> Option<impl Iterator<Item = (usize, usize)> + '_> {
        self.directed_edges.as_ref().map(|d| d.iter().copied())
    }

    pub fn is_directed(&self) -> bool {
        self.directed_edges.is_some()
    }

    /// Ordered pairs an edge layer acts on: the arcs of a directed graph, or
    /// each undirected edge once as `(min, max)`.
    pub fn gate_pairs(&self) -> Vec<(usize, usize)> {
        match &self.directed_edges {
            Some(d) => d.iter().copied().collect(),
            None => self.edges.iter().copied().collect(),
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == v { Some(b) } else if b == v { Some(a) } else { None })
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// Adjacency matrix as 0/1 rows (symmetric unless the graph is directed).
    pub fn adjacency(&self) -> Vec<Vec<u8>> {
        let mut a = vec![vec![0u8; self.n]; self.n];
        match &self.directed_edges {
            Some(d) => d.iter().for_each(|&(u, v)| a[u][v] = 1),
            None => self.edges.iter().for_each(|&(u, v)| {
                a[u][v] = 1;
                a[v][u] = 1;
            }),
        }
        a
    }
}

fn check_endpoints(n: usize, u: usize, v: usize) -> GraphResult<()> {
    if u == v {
        return Err(GraphError::SelfLoop(u));
    }
    if u >= n || v >= n {
        return Err(GraphError::EndpointOutOfRange { u, v, n });
    }
    Ok(())
}

impl fmt::Display for Graph {
    /// Line-based text form: `n=<count>` followed by one `u v` line per edge.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n)?;
        for (u, v) in self.gate_pairs() {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> GraphResult<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "empty input".into() })?;
        let n = header
            .strip_prefix("n=")
            .and_then(|x| x.trim().parse::<usize>().ok())
            .ok_or_else(|| GraphError::Parse { line, msg: format!("expected `n=<count>`, got `{header}`") })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let parse = |x: &str| {
                x.parse::<usize>().map_err(|_| GraphError::Parse { line, msg: format!("bad node index `{x}`") })
            };
            match parts.as_slice() {
                [u, v] => edges.push((parse(u)?, parse(v)?)),
                _ => return Err(GraphError::Parse { line, msg: format!("expected `u v`, got `{l}`") }),
            }
        }
        Graph::new(n, edges)
    }
}

/// A bijection on `0..n`, stored as its image array.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> GraphResult<Self> {
        let mut seen = vec![false; image.len()];
        for &x in &image {
            if x >= image.len() || seen[x] {
                return Err(GraphError::NotAPermutation(image));
            }
            seen[x] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect() }
    }

    /// The cyclic shift `i -> i + 1 mod n`.
    pub fn cyclic(n: usize) -> Self {
        Self { image: (0..n).map(|i| (i + 1) % n).collect() }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &p) in self.image.iter().enumerate() {
            inv[p] = i;
        }
        Self { image: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Self { image: other.image.iter().map(|&i| self.image[i]).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// All `n!` permutations in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Permutation { image: cur.clone() });
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }

    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut image: Vec<usize> = (0..n).collect();
        image.shuffle(rng);
        Self { image }
    }
}

pub fn cycle_graph(n: usize) -> GraphResult<Graph> {
    if n < 3 {
        return Err(GraphError::CycleTooSmall(n));
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn path_graph(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path edges are valid")
}

pub fn complete_graph(n: usize) -> Graph {
    Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("complete edges are valid")
}

/// Every labelled undirected graph on `n` nodes, `2^(n(n-1)/2)` of them.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0..1usize << pairs.len())
        .map(|mask| {
            let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e);
            Graph::new(n, edges).expect("pairs are valid")
        })
        .collect()
}

/// Disjoint union; `b`'s nodes are shifted by `a.n()`.
pub fn disjoint_union(a: &Graph, b: &Graph) -> Graph {
    let shift = a.n;
    Graph {
        n: a.n + b.n,
        edges: a.edges.iter().copied().chain(b.edges.iter().map(|&(u, v)| (u + shift, v + shift))).collect(),
        directed_edges: match (&a.directed_edges, &b.directed_edges) {
            (None, None) => None,
            _ => Some(
                a.gate_pairs()
                    .into_iter()
                    .chain(b.gate_pairs().into_iter().map(|(u, v)| (u + shift, v + shift)))
                    .collect(),
            ),
        },
    }
}

/// Relabel nodes: edge `{u, v}` becomes `{p(u), p(v)}`.
pub fn permute_graph(g: &Graph, p: &Permutation) -> GraphResult<Graph> {
    if p.len() != g.n {
        return Err(GraphError::SizeMismatch { graph: g.n, perm: p.len() });
    }
    let map = |(u, v): (usize, usize)| (p.apply(u), p.apply(v));
    Ok(Graph {
        n: g.n,
        edges: g.edges.iter().map(|&e| map(e)).map(|(u, v)| (u.min(v), u.max(v))).collect(),
        directed_edges: g.directed_edges.as_ref().map(|d| d.iter().map(|&e| map(e)).collect()),
    })
}

/// Isomorphism test on undirected edges by backtracking: nodes of `a` are
/// mapped in order to unused nodes of `b` with the same degree whose
/// adjacency to the already-mapped nodes agrees.
pub fn are_isomorphic(a: &Graph, b: &Graph) -> GraphResult<bool> {
    for g in [a, b] {
        if g.n > MAX_ISOMORPHISM_NODES {
            return Err(GraphError::TooLarge(g.n));
        }
    }
    if a.n != b.n || a.num_edges() != b.num_edges() {
        return Ok(false);
    }
    let (da, db) = (a.degrees(), b.degrees());
    let mut sa = da.clone();
    let mut sb = db.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return Ok(false);
    }

    fn extend(a: &Graph, b: &Graph, da: &[usize], db: &[usize], map: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let u = map.len();
        if u == a.n {
            return true;
        }
        for v in 0..b.n {
            if used[v] || da[u] != db[v] {
                continue;
            }
            if (0..u).any(|w| a.has_edge(u, w) != b.has_edge(v, map[w])) {
                continue;
            }
            map.push(v);
            used[v] = true;
            if extend(a, b, da, db, map, used) {
                return true;
            }
            map.pop();
            used[v] = false;
        }
        false
    }
    Ok(extend(a, b, &da, &db, &mut Vec::with_capacity(a.n), &mut vec![false; b.n]))
}

/// Binary class of a dataset graph: one cycle or two disjoint cycles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CycleClass {
    TwoCycles = 0,
    SingleCycle = 1,
}

impl CycleClass {
    pub fn label(self) -> f64 {
        self as u8 as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub label: CycleClass,
    /// Oversampling weight; strictly positive.
    pub weight: f64,
    /// Cycle lengths making up the graph, e.g. `[3, 5]`.
    pub cycles: Vec<usize>,
}

impl LabeledGraph {
    pub fn name(&self) -> String {
        self.cycles.iter().map(|c| format!("C{c}")).collect::<Vec<_>>().join("+")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CyclesDataset {
    pub train: Vec<LabeledGraph>,
    pub eval: Vec<LabeledGraph>,
}

pub const DATASET_MIN_NODES: usize = 6;
pub const DATASET_MAX_NODES: usize = 10;
pub const DATASET_EVAL_NODES: usize = 8;

/// One- and two-cycle graphs on 6..=10 nodes (cycle length at least 3).
///
/// Graphs with 8 nodes in total form the evaluation split. Within each split
/// the weights of each class sum to 1/2, which is what oversampling the
/// smaller class amounts to under expected-loss training.
pub fn cycles_dataset() -> CyclesDataset {
    let mut train = Vec::new();
    let mut eval = Vec::new();
    for total in DATASET_MIN_NODES..=DATASET_MAX_NODES {
        let split = if total == DATASET_EVAL_NODES { &mut eval } else { &mut train };
        split.push(labeled(vec![total]));
        for a in 3..=total / 2 {
            let b = total - a;
            if b >= 3 {
                split.push(labeled(vec![a, b]));
            }
        }
    }
    normalize_class_weights(&mut train);
    normalize_class_weights(&mut eval);
    CyclesDataset { train, eval }
}

fn labeled(cycles: Vec<usize>) -> LabeledGraph {
    let graph = cycles
        .iter()
        .map(|&c| cycle_graph(c).expect("dataset cycles have length >= 3"))
        .fold(Graph::empty(0), |acc, c| disjoint_union(&acc, &c));
    let label = if cycles.len() == 1 { CycleClass::SingleCycle } else { CycleClass::TwoCycles };
    LabeledGraph { graph, label, weight: 1.0, cycles }
}

fn normalize_class_weights(items: &mut [LabeledGraph]) {
    for class in [CycleClass::TwoCycles, CycleClass::SingleCycle] {
        let count = items.iter().filter(|g| g.label == class).count();
        for g in items.iter_mut().filter(|g| g.label == class) {
            g.weight = 0.5 / count as f64;
        }
    }
}

/// The two 6-node graphs indistinguishable by 1-WL: two triangles and a 6-cycle.
pub fn wl_pair() -> (Graph, Graph) {
    let c3 = cycle_graph(3).unwrap();
    (disjoint_union(&c3, &c3), cycle_graph(6).unwrap())
}
