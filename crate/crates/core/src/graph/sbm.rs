use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AttributedGraph;
use crate::error::{Error, Result};

/// How sensitive labels relate to SBM blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelMode {
    /// Label = block id, capped at `K - 1`.
    Cluster,
    /// Labels drawn uniformly from `0..K`, independent of blocks.
    Random,
    /// Blocks `0..K` take their block id, later blocks draw uniformly.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub block_sizes: Vec<usize>,
    pub probabilities: Vec<Vec<f64>>,
    pub label_mode: LabelMode,
    pub n_labels: usize,
    /// Fraction of block-derived labels that are shuffled among themselves
    /// after assignment. Shuffling keeps group sizes fixed.
    #[serde(default)]
    pub label_noise: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Names accepted by [`builtin`].
pub const BUILTIN_GRAPHS: [&str; 5] = ["G1", "G2", "G3", "G4", "G5"];

/// Label noise of the builtin cluster-labelled graphs; labels are "almost"
/// the community id.
const BUILTIN_LABEL_NOISE: f64 = 0.1;

/// The five 150-node synthetic graphs used throughout the experiments.
pub fn builtin(name: &str, seed: u64) -> Result<SbmSpec> {
    let two = vec![vec![0.10, 0.005], vec![0.005, 0.10]];
    let three = vec![
        vec![0.20, 0.002, 0.003],
        vec![0.002, 0.15, 0.003],
        vec![0.003, 0.003, 0.10],
    ];
    let (block_sizes, probabilities, label_mode, n_labels) = match name.to_ascii_uppercase().as_str() {
        "G1" => (vec![75, 75], two, LabelMode::Cluster, 2),
        "G2" => (vec![75, 75], two, LabelMode::Random, 2),
        "G3" => (
            vec![125, 25],
            vec![vec![0.15, 0.005], vec![0.005, 0.35]],
            LabelMode::Cluster,
            2,
        ),
        "G4" => (vec![50, 50, 50], three, LabelMode::Mixed, 2),
        "G5" => (vec![50, 50, 50], three, LabelMode::Cluster, 3),
        _ => {
            return Err(Error::InvalidSpec(format!(
                "unknown builtin graph {name:?}, expected one of {BUILTIN_GRAPHS:?}"
            )))
        }
    };
    let label_noise = if label_mode == LabelMode::Random {
        0.0
    } else {
        BUILTIN_LABEL_NOISE
    };
    Ok(SbmSpec {
        block_sizes,
        probabilities,
        label_mode,
        n_labels,
        label_noise,
        seed,
    })
}

impl SbmSpec {
    pub fn validate(&self) -> Result<()> {
        let b = self.block_sizes.len();
        if b == 0 || self.block_sizes.contains(&0) {
            return Err(Error::InvalidSpec("block sizes must be positive".into()));
        }
        if self.probabilities.len() != b || self.probabilities.iter().any(|r| r.len() != b) {
            return Err(Error::InvalidSpec(format!(
                "probability matrix must be {b}x{b}"
            )));
        }
        for (r, row) in self.probabilities.iter().enumerate() {
            for (c, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidSpec(format!("probability ({r},{c}) = {p} outside [0,1]")));
                }
                if p != self.probabilities[c][r] {
                    return Err(Error::InvalidSpec(format!("probability matrix asymmetric at ({r},{c})")));
                }
            }
        }
        if self.n_labels == 0 {
            return Err(Error::InvalidSpec("label arity must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return Err(Error::InvalidSpec("label noise must lie in [0,1]".into()));
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Block id of every node, blocks laid out contiguously.
    pub fn block_of_nodes(&self) -> Vec<usize> {
        self.block_sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
            .collect()
    }
}

/// Samples an undirected simple graph with one independent Bernoulli draw per
/// node pair, then assigns labels. Same spec and seed give the same graph.
pub fn generate_sbm(spec: &SbmSpec) -> Result<AttributedGraph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let blocks = spec.block_of_nodes();
    let n = blocks.len();

    let mut adjacency = Array2::zeros((n, n));
    for u in 0..n {
        for v in (u + 1)..n {
            let p = spec.probabilities[blocks[u]][blocks[v]];
            if rng.random::<f64>() < p {
                adjacency[[u, v]] = 1.0;
                adjacency[[v, u]] = 1.0;
            }
        }
    }

    let k = spec.n_labels;
    let mut labels = Vec::with_capacity(n);
    let mut from_block = Vec::new();
    for (node, &b) in blocks.iter().enumerate() {
        let label = match spec.label_mode {
            LabelMode::Cluster => Some(b.min(k - 1)),
            LabelMode::Mixed if b < k => Some(b),
            LabelMode::Random | LabelMode::Mixed => None,
        };
        match label {
            Some(s) => {
                from_block.push(node);
                labels.push(s);
            }
            None => labels.push(rng.random_range(0..k)),
        }
    }

    let n_noisy = (spec.label_noise * from_block.len() as f64).round() as usize;
    if n_noisy > 1 {
        let (chosen, _) = from_block.partial_shuffle(&mut rng, n_noisy);
        let mut chosen = chosen.to_vec();
        chosen.sort_unstable();
        let mut shuffled: Vec<usize> = chosen.iter().map(|&v| labels[v]).collect();
        shuffled.shuffle(&mut rng);
        for (&node, s) in chosen.iter().zip(shuffled) {
            labels[node] = s;
        }
    }

    AttributedGraph::new(adjacency, labels)
}
