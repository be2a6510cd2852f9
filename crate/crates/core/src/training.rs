//! Exact-distribution training of EDU-QGC graph classifiers.
//!
//! The model prepares `|+>^n`, then applies `depth` pairs of (node layer,
//! diagonal edge layer). Node layers are Euler rotations `V(t1, t2, t3)` at
//! every node; edge layers apply `diag(e^{i p00}, e^{i p01}, e^{i p01}, e^{i p11})`
//! on every edge. Measuring every node gives a distribution over the number
//! of ones `k`, and the readout `sigma(a k / n + c)` turns each outcome into a
//! class-1 probability. Training minimizes the expected binary cross-entropy
//! under that distribution, so no sampling is involved anywhere.
//!
//! Gradients are exact: one forward pass, then a reverse sweep that
//! uncomputes the state layer by layer next to the adjoint vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::complexla::{CMatrix, C64, ZERO};
use crate::graphs::{wl_pair, CyclesDataset, Graph, LabeledGraph};
use crate::layers::{apply_circuit, euler_matrix, rz, Circuit, DiagEdge, LayerError, NodeLayer};
use crate::simulator::plus_state;

/// Probability floor inside the cross-entropy.
pub const PROB_FLOOR: f64 = 1e-12;

/// Largest graph the trainer simulates.
pub const MAX_TRAIN_NODES: usize = 16;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

pub const INIT_SLOPE: f64 = 4.0;
pub const INIT_BIAS: f64 = -2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),

    #[error("parameter vector has {actual} entries, expected {expected}")]
    ParamCount { expected: usize, actual: usize },

    #[error("graph with {0} nodes exceeds the simulation limit")]
    TooLarge(usize),

    #[error("dataset split is empty")]
    EmptySplit,

    #[error(transparent)]
    Layer(#[from] LayerError),
}

pub type TrainResult<T> = Result<T, TrainError>;

/// One node layer followed by one swap-symmetric diagonal edge layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerPair {
    pub euler: [f64; 3],
    /// `(p00, p01, p11)`.
    pub phases: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub pairs: Vec<LayerPair>,
    /// Readout slope.
    pub a: f64,
    /// Readout bias.
    pub c: f64,
}

impl ModelParams {
    pub fn num_params_for(depth: usize) -> usize {
        6 * depth + 2
    }

    pub fn depth(&self) -> usize {
        self.pairs.len()
    }

    pub fn num_params(&self) -> usize {
        Self::num_params_for(self.depth())
    }

    /// Angles and phases i.i.d. uniform on `(-pi, pi)`, readout `(4, -2)`.
    pub fn random<R: Rng + ?Sized>(depth: usize, rng: &mut R) -> Self {
        let pi = std::f64::consts::PI;
        let mut draw = || rng.gen_range(-pi..pi);
        let pairs = (0..depth)
            .map(|_| LayerPair { euler: [draw(), draw(), draw()], phases: [draw(), draw(), draw()] })
            .collect();
        Self { pairs, a: INIT_SLOPE, c: INIT_BIAS }
    }

    /// Flat layout: per pair `t1 t2 t3 p00 p01 p11`, then `a`, `c`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for p in &self.pairs {
            out.extend_from_slice(&p.euler);
            out.extend_from_slice(&p.phases);
        }
        out.push(self.a);
        out.push(self.c);
        out
    }

    pub fn from_slice(depth: usize, v: &[f64]) -> TrainResult<Self> {
        let expected = Self::num_params_for(depth);
        if v.len() != expected {
            return Err(TrainError::ParamCount { expected, actual: v.len() });
        }
        let pairs = v[..6 * depth]
            .chunks_exact(6)
            .map(|c| LayerPair { euler: [c[0], c[1], c[2]], phases: [c[3], c[4], c[5]] })
            .collect();
        Ok(Self { pairs, a: v[6 * depth], c: v[6 * depth + 1] })
    }
}

/// Per-basis-state edge pattern counts `(#00, #01 or #10, #11)` of a graph.
#[derive(Clone, Debug)]
struct PreparedGraph {
    n: usize,
    counts: Vec<[u16; 3]>,
}

impl PreparedGraph {
    fn new(g: &Graph) -> TrainResult<Self> {
        let n = g.n();
        if n > MAX_TRAIN_NODES {
            return Err(TrainError::TooLarge(n));
        }
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let counts = (0..1usize << n)
            .map(|y| {
                let mut c = [0u16; 3];
                for &(u, v) in &edges {
                    let bu = y >> (n - 1 - u) & 1;
                    let bv = y >> (n - 1 - v) & 1;
                    c[bu + bv] += 1;
                }
                c
            })
            .collect();
        Ok(Self { n, counts })
    }

    fn edge_phase(&self, y: usize, phases: &[f64; 3]) -> f64 {
        let c = self.counts[y];
        c[0] as f64 * phases[0] + c[1] as f64 * phases[1] + c[2] as f64 * phases[2]
    }
}

fn apply_node_gate(psi: &mut [C64], n: usize, u: &[[C64; 2]; 2]) {
    for v in 0..n {
        let stride = 1usize << (n - 1 - v);
        for base in (0..psi.len()).step_by(2 * stride) {
            for i in base..base + stride {
                let (x0, x1) = (psi[i], psi[i + stride]);
                psi[i] = u[0][0] * x0 + u[0][1] * x1;
                psi[i + stride] = u[1][0] * x0 + u[1][1] * x1;
            }
        }
    }
}

fn as_array(m: &CMatrix) -> [[C64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn apply_edge_layer(psi: &mut [C64], g: &PreparedGraph, phases: &[f64; 3], sign: f64) {
    for (y, a) in psi.iter_mut().enumerate() {
        *a *= C64::from_polar(1.0, sign * g.edge_phase(y, phases));
    }
}

fn evolve(params: &ModelParams, g: &PreparedGraph) -> Vec<C64> {
    let n = g.n;
    let mut psi = plus_state(n).into_amplitudes();
    for pair in &params.pairs {
        apply_node_gate(&mut psi, n, &as_array(&euler_matrix(pair.euler)));
        apply_edge_layer(&mut psi, g, &pair.phases, 1.0);
    }
    psi
}

fn ones_counts(psi: &[C64], n: usize) -> Vec<f64> {
    let mut q = vec![0.0; n + 1];
    for (y, a) in psi.iter().enumerate() {
        q[y.count_ones() as usize] += a.norm_sqr();
    }
    q
}

/// Distribution of the number of ones measured after running the model on `g`.
pub fn forward(params: &ModelParams, g: &Graph) -> TrainResult<Vec<f64>> {
    let prep = PreparedGraph::new(g)?;
    Ok(ones_counts(&evolve(params, &prep), prep.n))
}

/// The same model as a layer circuit, to be run on `|+>^n`.
pub fn model_circuit(params: &ModelParams) -> Circuit {
    let mut c = Circuit::new(2).expect("two-dimensional nodes");
    for p in &params.pairs {
        c.push(NodeLayer::euler(p.euler)).expect("matching dimension");
        c.push(DiagEdge::symmetric(p.phases[0], p.phases[1], p.phases[2])).expect("matching dimension");
    }
    c
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn readout_logit(params: &ModelParams, k: usize, n: usize) -> f64 {
    params.a * (k as f64 / n as f64) + params.c
}

/// Class-1 probability `sigma(a k / n + c)` for every `k = 0..=n`.
pub fn predict(params: &ModelParams, n: usize) -> Vec<f64> {
    (0..=n).map(|k| logistic(readout_logit(params, k, n))).collect()
}

/// Cross-entropy of label `y` at logit `z` with the probability floor, and its
/// derivative in `z` (zero where the floor is active).
fn bce(y: f64, z: f64) -> (f64, f64) {
    let cap = -PROB_FLOOR.ln();
    let p = logistic(z);
    let neg_log_p = softplus(-z);
    let neg_log_q = softplus(z);
    let (mut loss, mut grad) = (0.0, 0.0);
    if y != 0.0 {
        loss += y * neg_log_p.min(cap);
        if neg_log_p < cap {
            grad += y * (p - 1.0);
        }
    }
    if y != 1.0 {
        loss += (1.0 - y) * neg_log_q.min(cap);
        if neg_log_q < cap {
            grad += (1.0 - y) * p;
        }
    }
    (loss, grad)
}

fn total_weight(data: &[LabeledGraph]) -> TrainResult<f64> {
    let w: f64 = data.iter().map(|e| e.weight).sum();
    if data.is_empty() || w <= 0.0 {
        return Err(TrainError::EmptySplit);
    }
    Ok(w)
}

/// Weighted mean over examples of the expected cross-entropy.
pub fn expected_loss(params: &ModelParams, data: &[LabeledGraph]) -> TrainResult<f64> {
    let total = total_weight(data)?;
    let mut loss = 0.0;
    for ex in data {
        let q = forward(params, &ex.graph)?;
        let n = ex.graph.n();
        let l: f64 = q.iter().enumerate().map(|(k, qk)| qk * bce(ex.label.label(), readout_logit(params, k, n)).0).sum();
        loss += ex.weight * l;
    }
    Ok(loss / total)
}

/// Loss and gradient contribution of one example, scaled by `scale`.
fn example_gradient(params: &ModelParams, g: &PreparedGraph, label: f64, scale: f64, grad: &mut [f64]) -> f64 {
    let n = g.n;
    let depth = params.depth();
    let mut psi = evolve(params, g);
    let q = ones_counts(&psi, n);

    let mut obs = vec![0.0; n + 1];
    let mut loss = 0.0;
    for k in 0..=n {
        let (l, dz) = bce(label, readout_logit(params, k, n));
        obs[k] = scale * l;
        loss += scale * q[k] * l;
        grad[6 * depth] += scale * q[k] * dz * k as f64 / n as f64;
        grad[6 * depth + 1] += scale * q[k] * dz;
    }

    let mut lam: Vec<C64> = psi.iter().enumerate().map(|(y, a)| a * obs[y.count_ones() as usize]).collect();
    for t in (0..depth).rev() {
        let pair = &params.pairs[t];
        // edge layer: d/dp multiplies psi(y) by i * count_p(y)
        for (y, (l, p)) in lam.iter().zip(&psi).enumerate() {
            let im = (l.conj() * p).im;
            let c = g.counts[y];
            for (slot, &cnt) in grad[6 * t + 3..6 * t + 6].iter_mut().zip(&c) {
                *slot -= 2.0 * cnt as f64 * im;
            }
        }
        apply_edge_layer(&mut psi, g, &pair.phases, -1.0);
        apply_edge_layer(&mut lam, g, &pair.phases, -1.0);

        // node layer: dV_j V^dag at each node, contracted with the 2x2 cross
        // density M_v[a][b] = sum_rest conj(lam(a)) psi(b)
        let v = euler_matrix(pair.euler);
        let generators = euler_generators(pair.euler, &v);
        for node in 0..n {
            let stride = 1usize << (n - 1 - node);
            let mut m = [[ZERO; 2]; 2];
            for base in (0..psi.len()).step_by(2 * stride) {
                for i in base..base + stride {
                    let (l0, l1) = (lam[i].conj(), lam[i + stride].conj());
                    let (p0, p1) = (psi[i], psi[i + stride]);
                    m[0][0] += l0 * p0;
                    m[0][1] += l0 * p1;
                    m[1][0] += l1 * p0;
                    m[1][1] += l1 * p1;
                }
            }
            for (j, a) in generators.iter().enumerate() {
                let mut s = ZERO;
                for r in 0..2 {
                    for c in 0..2 {
                        s += a[r][c] * m[r][c];
                    }
                }
                grad[6 * t + j] += 2.0 * s.re;
            }
        }
        let v_dag = as_array(&v.dagger());
        apply_node_gate(&mut psi, n, &v_dag);
        apply_node_gate(&mut lam, n, &v_dag);
    }
    loss
}

/// `dV/dt_j V^dag` for the three Euler angles.
fn euler_generators(angles: [f64; 3], v: &CMatrix) -> [[[C64; 2]; 2]; 3] {
    let half_i = C64::new(0.0, 0.5);
    let z = CMatrix::diag(&[-half_i, half_i]);
    let y = CMatrix::from_vec(2, 2, vec![ZERO, -C64::new(0.5, 0.0), C64::new(0.5, 0.0), ZERO]).expect("2x2");
    let rz3 = rz(angles[2]);
    let g1 = &(v * &z) * &v.dagger();
    let g2 = &(&rz3 * &y) * &rz3.dagger();
    [as_array(&g1), as_array(&g2), as_array(&z)]
}

fn loss_and_gradient_prepared(
    params: &ModelParams,
    data: &[(PreparedGraph, f64, f64)],
    total: f64,
) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; params.num_params()];
    let mut loss = 0.0;
    for (g, label, weight) in data {
        loss += example_gradient(params, g, *label, weight / total, &mut grad);
    }
    (loss, grad)
}

fn prepare_split(data: &[LabeledGraph]) -> TrainResult<Vec<(PreparedGraph, f64, f64)>> {
    data.iter().map(|e| Ok((PreparedGraph::new(&e.graph)?, e.label.label(), e.weight))).collect()
}

/// Exact gradient of [`expected_loss`] in the flat parameter layout.
pub fn loss_gradient(params: &ModelParams, data: &[LabeledGraph]) -> TrainResult<Vec<f64>> {
    let total = total_weight(data)?;
    Ok(loss_and_gradient_prepared(params, &prepare_split(data)?, total).1)
}

/// Central finite differences of [`expected_loss`].
pub fn finite_difference_gradient(params: &ModelParams, data: &[LabeledGraph], step: f64) -> TrainResult<Vec<f64>> {
    let base = params.to_vec();
    let depth = params.depth();
    (0..base.len())
        .map(|i| {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[i] += step;
            minus[i] -= step;
            let lp = expected_loss(&ModelParams::from_slice(depth, &plus)?, data)?;
            let lm = expected_loss(&ModelParams::from_slice(depth, &minus)?, data)?;
            Ok((lp - lm) / (2.0 * step))
        })
        .collect()
}

fn single_sample_from(q: &[f64], pred: &[f64], label: f64) -> f64 {
    q.iter()
        .zip(pred)
        .filter(|(_, &p)| if label == 1.0 { p > 0.5 } else { p < 0.5 })
        .map(|(qk, _)| qk)
        .sum::<f64>()
        .min(1.0)
}

/// Probability that one measurement of the example is classified correctly.
pub fn example_accuracy(params: &ModelParams, ex: &LabeledGraph) -> TrainResult<f64> {
    let q = forward(params, &ex.graph)?;
    Ok(single_sample_from(&q, &predict(params, ex.graph.n()), ex.label.label()))
}

/// Weighted mean of the per-example single-sample accuracy; a prediction of
/// exactly 0.5 counts as wrong.
pub fn single_sample_accuracy(params: &ModelParams, data: &[LabeledGraph]) -> TrainResult<f64> {
    let total = total_weight(data)?;
    let mut acc = 0.0;
    for ex in data {
        acc += ex.weight * example_accuracy(params, ex)?;
    }
    Ok(acc / total)
}

/// Weighted fraction of examples whose single-sample accuracy is strictly
/// above one half.
pub fn many_sample_accuracy(params: &ModelParams, data: &[LabeledGraph]) -> TrainResult<f64> {
    let total = total_weight(data)?;
    let mut acc = 0.0;
    for ex in data {
        if example_accuracy(params, ex)? > 0.5 {
            acc += ex.weight;
        }
    }
    Ok(acc / total)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub depth: usize,
    pub epochs: usize,
    pub lr: f64,
    pub decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { depth: 1, epochs: 100, lr: 0.01, decay: 0.99, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> TrainResult<()> {
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(TrainError::Config(format!("learning rate {} must be positive", self.lr)));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(TrainError::Config(format!("decay {} must lie in (0, 1]", self.decay)));
        }
        Ok(())
    }

    /// Initial parameters; the stream is keyed by depth so that different
    /// depths with the same seed draw independent values.
    pub fn init_params(&self) -> ModelParams {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.depth as u64);
        ModelParams::random(self.depth, &mut rng)
    }
}

/// Metrics of the parameters after `epoch` optimizer steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsRow {
    pub epoch: usize,
    pub loss: f64,
    pub train_ss: f64,
    pub train_ms: f64,
    pub eval_ss: f64,
    pub eval_ms: f64,
    /// Largest absolute gradient component.
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub metrics: Vec<MetricsRow>,
    pub params: ModelParams,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }

    fn step(&mut self, theta: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t);
        for i in 0..theta.len() {
            self.m[i] = ADAM_BETA1 * self.m[i] + (1.0 - ADAM_BETA1) * grad[i];
            self.v[i] = ADAM_BETA2 * self.v[i] + (1.0 - ADAM_BETA2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            theta[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

fn split_accuracies(params: &ModelParams, data: &[(PreparedGraph, f64, f64)]) -> (f64, f64) {
    let total: f64 = data.iter().map(|d| d.2).sum();
    let (mut ss, mut ms) = (0.0, 0.0);
    for (g, label, w) in data {
        let q = ones_counts(&evolve(params, g), g.n);
        let acc = single_sample_from(&q, &predict(params, g.n), *label);
        ss += w * acc;
        if acc > 0.5 {
            ms += w;
        }
    }
    (ss / total, ms / total)
}

/// Full-batch Adam with learning rate `lr * decay^epoch`. Returns one metrics
/// row per epoch `0..=epochs`, row `e` describing the parameters after `e`
/// updates.
pub fn adam_train(config: &TrainConfig, data: &CyclesDataset) -> TrainResult<TrainOutcome> {
    config.validate()?;
    let train = prepare_split(&data.train)?;
    let eval = prepare_split(&data.eval)?;
    let total = total_weight(&data.train)?;
    total_weight(&data.eval)?;

    let mut params = config.init_params();
    let mut theta = params.to_vec();
    let mut adam = Adam::new(theta.len());
    let mut metrics = Vec::with_capacity(config.epochs + 1);
    for epoch in 0..=config.epochs {
        let (loss, grad) = loss_and_gradient_prepared(&params, &train, total);
        let (train_ss, train_ms) = split_accuracies(&params, &train);
        let (eval_ss, eval_ms) = split_accuracies(&params, &eval);
        let grad_norm = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        metrics.push(MetricsRow { epoch, loss, train_ss, train_ms, eval_ss, eval_ms, grad_norm });
        if epoch < config.epochs {
            adam.step(&mut theta, &grad, config.lr * config.decay.powi(epoch as i32));
            params = ModelParams::from_slice(config.depth, &theta)?;
        }
    }
    Ok(TrainOutcome { metrics, params })
}

/// One row of the first experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Expt1Row {
    pub alpha: f64,
    pub prob_g1: Vec<f64>,
    pub prob_g2: Vec<f64>,
    /// Best achievable accuracy of any map from `k` to a class.
    pub accuracy: f64,
}

/// `points` evenly spaced values from `-pi` to `pi` inclusive.
pub fn alpha_grid(points: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| -pi + 2.0 * pi * i as f64 / (points - 1) as f64).collect(),
    }
}

/// Ones-count distributions of `CZ(alpha)` edges then Hadamard nodes on the
/// two-triangles graph and the 6-cycle, with the optimal accuracy
/// `1/2 sum_k max(P(k|G1), P(k|G2))`.
pub fn experiment1(alphas: &[f64]) -> TrainResult<Vec<Expt1Row>> {
    let (g1, g2) = wl_pair();
    alphas
        .iter()
        .map(|&alpha| {
            let c = Circuit::from_layers(2, [DiagEdge::cz(alpha).into(), NodeLayer::hadamard().into()])?;
            let dist = |g: &Graph| -> TrainResult<Vec<f64>> {
                Ok(apply_circuit(&c, g, &plus_state(g.n()))?.ones_count_distribution().map_err(LayerError::from)?)
            };
            let (p1, p2) = (dist(&g1)?, dist(&g2)?);
            let accuracy = 0.5 * p1.iter().zip(&p2).map(|(a, b)| a.max(*b)).sum::<f64>();
            Ok(Expt1Row { alpha, prob_g1: p1, prob_g2: p2, accuracy })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub depth: usize,
    pub seed: u64,
    pub metrics: Vec<MetricsRow>,
}

/// Train every `(depth, seed)` combination, in parallel, returning records
/// sorted by depth then seed.
pub fn experiment2(depths: &[usize], seeds: &[u64], base: &TrainConfig) -> TrainResult<Vec<RunRecord>> {
    let data = crate::graphs::cycles_dataset();
    let jobs: Vec<(usize, u64)> = depths.iter().flat_map(|&d| seeds.iter().map(move |&s| (d, s))).collect();
    let mut records = jobs
        .par_iter()
        .map(|&(depth, seed)| {
            let cfg = TrainConfig { depth, seed, ..*base };
            Ok(RunRecord { depth, seed, metrics: adam_train(&cfg, &data)?.metrics })
        })
        .collect::<TrainResult<Vec<_>>>()?;
    records.sort_by_key(|r| (r.depth, r.seed));
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and population standard deviation.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

/// Final-epoch statistics across seeds for one depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthSummary {
    pub depth: usize,
    pub runs: usize,
    pub loss: MeanStd,
    pub train_ss: MeanStd,
    pub train_ms: MeanStd,
    pub eval_ss: MeanStd,
    pub eval_ms: MeanStd,
    /// Gradient max-norm before the first update.
    pub initial_grad_norm: MeanStd,
}

pub fn summarize(records: &[RunRecord]) -> Vec<DepthSummary> {
    let mut depths: Vec<usize> = records.iter().map(|r| r.depth).collect();
    depths.dedup();
    depths
        .into_iter()
        .map(|depth| {
            let runs: Vec<&RunRecord> = records.iter().filter(|r| r.depth == depth).collect();
            let last = |f: fn(&MetricsRow) -> f64| {
                MeanStd::of(&runs.iter().filter_map(|r| r.metrics.last().map(f)).collect::<Vec<_>>())
            };
            DepthSummary {
                depth,
                runs: runs.len(),
                loss: last(|m| m.loss),
                train_ss: last(|m| m.train_ss),
                train_ms: last(|m| m.train_ms),
                eval_ss: last(|m| m.eval_ss),
                eval_ms: last(|m| m.eval_ms),
                initial_grad_norm: MeanStd::of(
                    &runs.iter().filter_map(|r| r.metrics.first().map(|m| m.grad_norm)).collect::<Vec<_>>(),
                ),
            }
        })
        .collect()
}
