//! Node embeddings: weighted random walks fed to skip-gram with negative
//! sampling, and a deterministic spectral embedder.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::parallel::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMethod {
    #[default]
    SkipGram,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub method: EmbeddingMethod,
    pub dim: usize,
    pub walk_length: usize,
    pub window: usize,
    pub walks_per_node: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to zero over training.
    pub learning_rate: f64,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            method: EmbeddingMethod::SkipGram,
            dim: 64,
            walk_length: 15,
            window: 10,
            walks_per_node: 10,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Config(format!("embedding dim must be at least 2, got {}", self.dim)));
        }
        let counts = [
            ("walk_length", self.walk_length),
            ("window", self.window),
            ("walks_per_node", self.walks_per_node),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    /// One row per node.
    pub matrix: Array2<f64>,
    /// Skip-gram settings; `None` for spectral embeddings.
    pub config: Option<EmbeddingConfig>,
    /// Mean skip-gram loss over the corpus after each epoch, with the
    /// negatives drawn from the same fixed stream every time.
    pub epoch_losses: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("node");
        for k in 0..self.matrix.ncols() {
            out.push_str(&format!(",z{k}"));
        }
        out.push('\n');
        for (i, row) in self.matrix.rows().into_iter().enumerate() {
            out.push_str(&i.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Embeds with the method in `cfg`.
pub fn embed(g: &AttributedGraph, cfg: &EmbeddingConfig) -> Result<EmbeddingMatrix> {
    match cfg.method {
        EmbeddingMethod::SkipGram => {
            let corpus = random_walks(g, cfg)?;
            skipgram_train(&corpus, g.n_nodes(), cfg)
        }
        EmbeddingMethod::Spectral => spectral_embed(g, cfg.dim.min(g.n_nodes().saturating_sub(1))),
    }
}

/// `walks_per_node` first-order walks from every node, moving to a neighbor
/// with probability proportional to the edge weight. A walk stops early at a
/// node without neighbors. Each (round, start node) pair draws from its own
/// ChaCha stream so the corpus does not depend on scheduling.
pub fn random_walks(g: &AttributedGraph, cfg: &EmbeddingConfig) -> Result<Vec<Vec<usize>>> {
    cfg.validate()?;
    let n = g.n_nodes();
    let adj = g.adjacency();
    let transitions: Vec<Option<(Vec<usize>, WeightedIndex<f64>)>> = (0..n)
        .map(|u| {
            let (nbrs, weights): (Vec<usize>, Vec<f64>) =
                adj.row(u).iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(v, &w)| (v, w)).unzip();
            if nbrs.is_empty() {
                None
            } else {
                Some((nbrs, WeightedIndex::new(weights).expect("positive finite weights")))
            }
        })
        .collect();

    let walks = cfg.execution.map(n * cfg.walks_per_node, |idx| {
        let start = idx % n;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(idx as u64);
        let mut walk = Vec::with_capacity(cfg.walk_length);
        walk.push(start);
        let mut cur = start;
        while walk.len() < cfg.walk_length {
            let Some((nbrs, dist)) = &transitions[cur] else { break };
            cur = nbrs[dist.sample(&mut rng)];
            walk.push(cur);
        }
        walk
    });
    Ok(walks)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn corpus_loss(
    corpus: &[Vec<usize>],
    input: &[f64],
    output: &[f64],
    d: usize,
    cfg: &EmbeddingConfig,
    noise: &WeightedIndex<f64>,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);
    let (mut loss, mut pairs) = (0.0, 0usize);
    for walk in corpus {
        for (i, &center) in walk.iter().enumerate() {
            let lo = i.saturating_sub(cfg.window);
            let hi = (i + cfg.window + 1).min(walk.len());
            let ci = center * d;
            for (j, &ctx) in walk.iter().enumerate().take(hi).skip(lo) {
                if j == i {
                    continue;
                }
                let score = |t: usize| dot(&input[ci..ci + d], &output[t * d..t * d + d]);
                loss -= sigmoid(score(ctx)).max(1e-300).ln();
                for _ in 0..cfg.negatives {
                    let t = noise.sample(&mut rng);
                    if t != ctx {
                        loss -= sigmoid(-score(t)).max(1e-300).ln();
                    }
                }
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        0.0
    } else {
        loss / pairs as f64
    }
}

/// Skip-gram with negative sampling trained by plain SGD. Negatives follow
/// the corpus unigram distribution raised to 0.75. Returns the input vectors.
pub fn skipgram_train(corpus: &[Vec<usize>], n_nodes: usize, cfg: &EmbeddingConfig) -> Result<EmbeddingMatrix> {
    skipgram_train_with(corpus, n_nodes, cfg, |_, _, _| {})
}

/// [`skipgram_train`] calling `observe(epoch, input, output)` after every epoch.
pub fn skipgram_train_with<F>(corpus: &[Vec<usize>], n_nodes: usize, cfg: &EmbeddingConfig, mut observe: F) -> Result<EmbeddingMatrix>
where
    F: FnMut(usize, ArrayView2<'_, f64>, ArrayView2<'_, f64>),
{
    cfg.validate()?;
    let total_tokens: usize = corpus.iter().map(Vec::len).sum();
    if total_tokens == 0 {
        return Err(Error::InvalidArgument("empty walk corpus".into()));
    }
    if let Some(&bad) = corpus.iter().flatten().find(|&&v| v >= n_nodes) {
        return Err(Error::InvalidArgument(format!("corpus mentions node {bad} but there are {n_nodes} nodes")));
    }
    let d = cfg.dim;
    let mut counts = vec![0.0f64; n_nodes];
    for &v in corpus.iter().flatten() {
        counts[v] += 1.0;
    }
    let noise = WeightedIndex::new(counts.iter().map(|c| c.powf(0.75))).expect("corpus is non-empty");

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut input: Vec<f64> = (0..n_nodes * d).map(|_| (rng.random::<f64>() - 0.5) / d as f64).collect();
    let mut output = vec![0.0f64; n_nodes * d];
    let mut grad_in = vec![0.0f64; d];

    let total_steps = (cfg.epochs * total_tokens) as f64;
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &w in &order {
            let walk = &corpus[w];
            for (i, &center) in walk.iter().enumerate() {
                let lr = cfg.learning_rate * (1.0 - step as f64 / total_steps).max(1e-4);
                step += 1;
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window + 1).min(walk.len());
                for (j, &ctx) in walk.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    grad_in.iter_mut().for_each(|g| *g = 0.0);
                    let ci = center * d;
                    for k in 0..=cfg.negatives {
                        let (target, label) = if k == 0 {
                            (ctx, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == ctx {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let ti = target * d;
                        let score = dot(&input[ci..ci + d], &output[ti..ti + d]);
                        let p = sigmoid(score);
                        let g = lr * (label - p);
                        for x in 0..d {
                            grad_in[x] += g * output[ti + x];
                            output[ti + x] += g * input[ci + x];
                        }
                    }
                    for x in 0..d {
                        input[ci + x] += grad_in[x];
                    }
                }
            }
        }
        epoch_losses.push(corpus_loss(corpus, &input, &output, d, cfg, &noise));
        observe(
            epoch,
            ArrayView2::from_shape((n_nodes, d), &input).expect("n_nodes * dim entries"),
            ArrayView2::from_shape((n_nodes, d), &output).expect("n_nodes * dim entries"),
        );
    }
    Ok(EmbeddingMatrix {
        matrix: Array2::from_shape_vec((n_nodes, d), input).expect("n_nodes * dim entries"),
        config: Some(*cfg),
        epoch_losses,
    })
}

/// Coordinates on the `dim` eigenvectors of the graph Laplacian with the
/// smallest eigenvalues after the constant one. Each eigenvector is signed so
/// that its largest-magnitude entry (lowest index on ties) is positive.
pub fn spectral_embed(g: &AttributedGraph, dim: usize) -> Result<EmbeddingMatrix> {
    let n = g.n_nodes();
    if dim == 0 || dim >= n {
        return Err(Error::InvalidArgument(format!("spectral dim must be in 1..{n}, got {dim}")));
    }
    let adj = g.adjacency();
    let degrees = g.degrees();
    // Adding `shift / n` everywhere moves the constant eigenvector to eigenvalue
    // `shift`, above the rest of the spectrum.
    let shift = 2.0 * degrees.iter().fold(0.0f64, |m, &d| m.max(d)) + 1.0;
    let m = DMatrix::from_fn(n, n, |i, j| {
        let lap = if i == j { degrees[i] } else { -adj[[i, j]] };
        lap + shift / n as f64
    });
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let mut out = Array2::zeros((n, dim));
    for (k, &idx) in order.iter().take(dim).enumerate() {
        let v = eig.eigenvectors.column(idx);
        let pivot = (0..n).fold(0, |best, i| if v[i].abs() > v[best].abs() + 1e-12 { i } else { best });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            out[[i, k]] = sign * v[i];
        }
    }
    Ok(EmbeddingMatrix {
        matrix: out,
        config: None,
        epoch_losses: Vec::new(),
    })
}
