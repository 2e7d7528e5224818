//! Edge prediction: train/test edge splits with negative sampling, a
//! logistic-regression head on Hadamard pair features, and AUC.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{embed, EmbeddingConfig, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::repair::{repair, Method, RepairConfig, RepairResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

/// Held-out edges and sampled non-edges. Pairs are randomly oriented.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSplit {
    /// Input graph without the held-out edges.
    pub train: AttributedGraph,
    pub train_pairs: Vec<(usize, usize)>,
    pub train_labels: Vec<bool>,
    pub test_pairs: Vec<(usize, usize)>,
    pub test_labels: Vec<bool>,
}

fn orient(rng: &mut ChaCha8Rng, (u, v): (usize, usize)) -> (usize, usize) {
    if rng.random::<bool>() {
        (v, u)
    } else {
        (u, v)
    }
}

/// Holds out `max(1, round(test_fraction·|E|))` edges, preferring edges whose
/// removal leaves both endpoints with a neighbor, and pairs every positive
/// (held-out and remaining) with one sampled non-edge. Test and train
/// negatives are disjoint; train negatives are capped by what remains.
pub fn split_edges(g: &AttributedGraph, cfg: &SplitConfig) -> Result<EdgeSplit> {
    if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction must lie in (0, 1), got {}", cfg.test_fraction)));
    }
    let mut edges: Vec<(usize, usize)> = g.edges().map(|(u, v, _)| (u, v)).collect();
    if edges.len() < 2 {
        return Err(Error::InvalidGraph(format!(
            "cannot hold out edges from a graph with {} edge(s)",
            edges.len()
        )));
    }
    let n_test = ((cfg.test_fraction * edges.len() as f64).round() as usize).clamp(1, edges.len() - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    edges.shuffle(&mut rng);
    let n = g.n_nodes();
    let mut degree = vec![0usize; n];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let mut held = vec![false; edges.len()];
    let mut taken = 0;
    for (k, &(u, v)) in edges.iter().enumerate() {
        if taken == n_test {
            break;
        }
        if degree[u] > 1 && degree[v] > 1 {
            held[k] = true;
            degree[u] -= 1;
            degree[v] -= 1;
            taken += 1;
        }
    }
    for flag in held.iter_mut() {
        if taken == n_test {
            break;
        }
        if !*flag {
            *flag = true;
            taken += 1;
        }
    }

    let mut non_edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .filter(|&(u, v)| g.weight(u, v) == 0.0)
        .collect();
    if non_edges.len() < n_test {
        return Err(Error::NoNegatives(format!(
            "{} non-adjacent pairs for {n_test} held-out edges",
            non_edges.len()
        )));
    }
    non_edges.shuffle(&mut rng);

    let mut adjacency = g.adjacency().to_owned();
    let (mut test_pairs, mut train_pairs) = (Vec::new(), Vec::new());
    for (k, &(u, v)) in edges.iter().enumerate() {
        if held[k] {
            adjacency[[u, v]] = 0.0;
            adjacency[[v, u]] = 0.0;
            test_pairs.push(orient(&mut rng, (u, v)));
        } else {
            train_pairs.push(orient(&mut rng, (u, v)));
        }
    }
    let n_train_pos = train_pairs.len();
    let mut test_labels = vec![true; n_test];
    for &pair in &non_edges[..n_test] {
        test_pairs.push(orient(&mut rng, pair));
        test_labels.push(false);
    }
    let n_train_neg = n_train_pos.min(non_edges.len() - n_test);
    if n_train_neg == 0 {
        return Err(Error::NoNegatives("no non-adjacent pairs left for training".into()));
    }
    let mut train_labels = vec![true; n_train_pos];
    for &pair in &non_edges[n_test..n_test + n_train_neg] {
        train_pairs.push(orient(&mut rng, pair));
        train_labels.push(false);
    }
    Ok(EdgeSplit {
        train: AttributedGraph::new(adjacency, g.labels().to_vec())?,
        train_pairs,
        train_labels,
        test_pairs,
        test_labels,
    })
}

/// Pair features (Hadamard products of endpoint embeddings) with labels and
/// the sensitive values of both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDataset {
    pub features: Array2<f64>,
    pub labels: Vec<bool>,
    pub pairs: Vec<(usize, usize)>,
    pub s_u: Vec<usize>,
    pub s_v: Vec<usize>,
}

impl EdgeDataset {
    pub fn new(z: ArrayView2<'_, f64>, pairs: &[(usize, usize)], labels: &[bool], sensitive: &[usize]) -> Result<Self> {
        if pairs.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!("{} pairs but {} labels", pairs.len(), labels.len())));
        }
        let mut features = Array2::zeros((pairs.len(), z.ncols()));
        for (mut row, &(u, v)) in features.rows_mut().into_iter().zip(pairs) {
            if u >= z.nrows() || v >= z.nrows() {
                return Err(Error::ShapeMismatch(format!("pair ({u},{v}) outside the embedding")));
            }
            row.assign(&(&z.row(u) * &z.row(v)));
        }
        Ok(Self {
            features,
            labels: labels.to_vec(),
            pairs: pairs.to_vec(),
            s_u: pairs.iter().map(|&(u, _)| sensitive[u]).collect(),
            s_v: pairs.iter().map(|&(_, v)| sensitive[v]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Whether the endpoints have different sensitive values.
    pub fn cross_group(&self) -> Vec<bool> {
        self.s_u.iter().zip(&self.s_v).map(|(a, b)| a != b).collect()
    }

    pub fn to_csv(&self, scores: &[f64]) -> String {
        let mut out = String::from("u,v,label,score,s_u,s_v\n");
        for (k, &(u, v)) in self.pairs.iter().enumerate() {
            out.push_str(&format!(
                "{u},{v},{},{},{},{}\n",
                u8::from(self.labels[k]),
                scores[k],
                self.s_u[k],
                self.s_v[k]
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegOptions {
    pub l2: f64,
    pub max_iters: usize,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
}

impl Default for LogRegOptions {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            max_iters: 5000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub weights: Array1<f64>,
    pub bias: f64,
    pub l2: f64,
    /// Regularized training loss at the start and after every accepted step.
    pub loss_trace: Vec<f64>,
}

impl Classifier {
    /// `P(y = 1 | x)` for every row.
    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        let margins = x.dot(&self.weights) + self.bias;
        margins.iter().map(|&m| sigmoid(m)).collect()
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<bool> {
        self.predict_proba(x).into_iter().map(|p| p >= 0.5).collect()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^m)` without overflow.
fn softplus(m: f64) -> f64 {
    if m > 0.0 {
        m + (-m).exp().ln_1p()
    } else {
        m.exp().ln_1p()
    }
}

/// Mean logistic loss plus `(l2/2)‖w‖²` and its gradient in `(w, b)`.
pub fn logistic_loss(x: ArrayView2<'_, f64>, y: &[bool], w: ArrayView1<'_, f64>, b: f64, l2: f64) -> (f64, Array1<f64>, f64) {
    let n = y.len() as f64;
    let margins = x.dot(&w) + b;
    let mut loss = 0.0;
    let mut residual = Array1::zeros(y.len());
    for (k, (&m, &label)) in margins.iter().zip(y).enumerate() {
        loss += if label { softplus(-m) } else { softplus(m) };
        residual[k] = sigmoid(m) - if label { 1.0 } else { 0.0 };
    }
    let grad_w = x.t().dot(&residual) / n + &w * l2;
    let grad_b = residual.sum() / n;
    (loss / n + 0.5 * l2 * w.dot(&w), grad_w, grad_b)
}

/// Full-batch gradient descent with Armijo backtracking.
pub fn train_logreg(features: ArrayView2<'_, f64>, labels: &[bool], opts: &LogRegOptions) -> Result<Classifier> {
    if features.nrows() != labels.len() {
        return Err(Error::ShapeMismatch(format!("{} rows but {} labels", features.nrows(), labels.len())));
    }
    if labels.iter().all(|&y| y) || labels.iter().all(|&y| !y) {
        return Err(Error::UndefinedMetric("logistic regression needs both classes".into()));
    }
    if opts.l2.is_nan() || opts.l2 < 0.0 {
        return Err(Error::Config("l2 strength must be non-negative".into()));
    }
    let x = features;

    let mut w = Array1::zeros(x.ncols());
    let mut b = 0.0;
    let (mut loss, mut gw, mut gb) = logistic_loss(x.view(), labels, w.view(), b, opts.l2);
    let mut trace = vec![loss];
    let mut step = 1.0;
    for _ in 0..opts.max_iters {
        let gnorm2 = gw.dot(&gw) + gb * gb;
        if gnorm2.sqrt() < opts.tol {
            break;
        }
        step *= 2.0;
        let accepted = loop {
            let w_new = &w - &(&gw * step);
            let b_new = b - step * gb;
            let (l_new, gw_new, gb_new) = logistic_loss(x.view(), labels, w_new.view(), b_new, opts.l2);
            if l_new <= loss - 0.5 * step * gnorm2 {
                break Some((w_new, b_new, l_new, gw_new, gb_new));
            }
            step *= 0.5;
            if step < 1e-12 {
                break None;
            }
        };
        let Some((w_new, b_new, l_new, gw_new, gb_new)) = accepted else { break };
        let decrease = loss - l_new;
        (w, b, loss, gw, gb) = (w_new, b_new, l_new, gw_new, gb_new);
        trace.push(loss);
        if decrease <= 1e-12 * loss.abs().max(1e-12) {
            break;
        }
    }
    if !loss.is_finite() || w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("logistic regression diverged".into()));
    }
    Ok(Classifier {
        weights: w,
        bias: b,
        l2: opts.l2,
        loss_trace: trace,
    })
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!("{} scores but {} labels", scores.len(), labels.len())));
    }
    let n_pos = labels.iter().filter(|&&y| y).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("AUC needs both classes".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numerical("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += order[i..=j].iter().filter(|&&k| labels[k]).count() as f64 * mid_rank;
        i = j + 1;
    }
    let p = n_pos as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n_neg as f64))
}

#[derive(Debug, Clone)]
pub struct LinkPrediction {
    pub split: EdgeSplit,
    /// Train graph after repair (the graph that was embedded).
    pub embedded_graph: AttributedGraph,
    pub repair: Option<RepairResult>,
    pub embedding: EmbeddingMatrix,
    pub classifier: Classifier,
    pub test: EdgeDataset,
    pub scores: Vec<f64>,
    pub auc: f64,
}

/// Split, optionally repair the train graph, embed it, fit the classifier on
/// train pairs and score the held-out pairs.
///
/// A random repair without a target mass adds as much cross-group weight as
/// the EMD repair of the same train graph.
pub fn link_prediction_pipeline(
    g: &AttributedGraph,
    repair_cfg: Option<&RepairConfig>,
    embed_cfg: &EmbeddingConfig,
    split_cfg: &SplitConfig,
    logreg: &LogRegOptions,
) -> Result<LinkPrediction> {
    let split = split_edges(g, split_cfg)?;
    let repaired = match repair_cfg {
        None => None,
        Some(cfg) if cfg.method == Method::Random && cfg.target_mass.is_none() => {
            let matched = repair(&split.train, &RepairConfig { execution: cfg.execution, ..RepairConfig::emd() })?;
            let cfg = RepairConfig {
                target_mass: Some(matched.added_mass),
                ..*cfg
            };
            Some(repair(&split.train, &cfg)?)
        }
        Some(cfg) => Some(repair(&split.train, cfg)?),
    };
    let embedded_graph = repaired.as_ref().map_or_else(|| split.train.clone(), |r| r.repaired.clone());
    let embedding = embed(&embedded_graph, embed_cfg)?;
    let labels = g.labels();
    let train = EdgeDataset::new(embedding.view(), &split.train_pairs, &split.train_labels, labels)?;
    let classifier = train_logreg(train.features.view(), &train.labels, logreg)?;
    let test = EdgeDataset::new(embedding.view(), &split.test_pairs, &split.test_labels, labels)?;
    let scores = classifier.predict_proba(test.features.view());
    let auc = auc(&scores, &test.labels)?;
    Ok(LinkPrediction {
        split,
        embedded_graph,
        repair: repaired,
        embedding,
        classifier,
        test,
        scores,
        auc,
    })
}
