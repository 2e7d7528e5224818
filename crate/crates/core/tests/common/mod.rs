//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Optimal transport cost by enumerating every basic solution of the
/// transportation polytope: each spanning tree of the complete bipartite
/// graph `K_{m,n}` defines one basis; flows are recovered by peeling leaves
/// and kept when non-negative.
pub fn brute_force_transport(cost: &Array2<f64>, a: &[f64], b: &[f64]) -> f64 {
    let (m, n) = cost.dim();
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(m + n - 1);
    let parent: Vec<usize> = (0..m + n).collect();
    enumerate(&cells, 0, &mut chosen, parent, m, n, cost, a, b, &mut best);
    best
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        x = parent[x];
    }
    x
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    cells: &[(usize, usize)],
    from: usize,
    chosen: &mut Vec<(usize, usize)>,
    parent: Vec<usize>,
    m: usize,
    n: usize,
    cost: &Array2<f64>,
    a: &[f64],
    b: &[f64],
    best: &mut f64,
) {
    let need = m + n - 1;
    if chosen.len() == need {
        if let Some(v) = basis_value(chosen, m, n, cost, a, b) {
            *best = best.min(v);
        }
        return;
    }
    if cells.len() - from < need - chosen.len() {
        return;
    }
    for idx in from..cells.len() {
        if cells.len() - idx < need - chosen.len() {
            break;
        }
        let (i, j) = cells[idx];
        let mut p = parent.clone();
        let (ri, rj) = (find(&mut p, i), find(&mut p, m + j));
        if ri == rj {
            continue;
        }
        p[ri] = rj;
        chosen.push((i, j));
        enumerate(cells, idx + 1, chosen, p, m, n, cost, a, b, best);
        chosen.pop();
    }
}

fn basis_value(tree: &[(usize, usize)], m: usize, n: usize, cost: &Array2<f64>, a: &[f64], b: &[f64]) -> Option<f64> {
    let mut remaining: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut alive = vec![true; tree.len()];
    let mut value = 0.0;
    for _ in 0..tree.len() {
        let mut degree = vec![0usize; m + n];
        for (k, &(i, j)) in tree.iter().enumerate() {
            if alive[k] {
                degree[i] += 1;
                degree[m + j] += 1;
            }
        }
        let (k, leaf) = tree
            .iter()
            .enumerate()
            .filter(|(k, _)| alive[*k])
            .find_map(|(k, &(i, j))| {
                if degree[i] == 1 {
                    Some((k, i))
                } else if degree[m + j] == 1 {
                    Some((k, m + j))
                } else {
                    None
                }
            })?;
        let (i, j) = tree[k];
        let f = remaining[leaf];
        if f < -1e-12 {
            return None;
        }
        remaining[i] -= f;
        remaining[m + j] -= f;
        value += f * cost[[i, j]];
        alive[k] = false;
    }
    Some(value)
}

pub fn random_probability(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<f64> {
    Array2::from_shape_fn((r, c), |_| rng.random::<f64>())
}

/// Symmetric matrix with non-negative off-diagonal similarities, zero diagonal.
pub fn random_similarity(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.random::<f64>();
            k[[i, j]] = w;
            k[[j, i]] = w;
        }
    }
    k
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Symmetric structural edge predictors used to exercise the DI bounds.
pub fn heuristic_predictions(g: &fairrepair::AttributedGraph, pairs: &[(usize, usize)]) -> Vec<(&'static str, Vec<bool>)> {
    let n = g.n_nodes();
    let a = g.adjacency();
    let nbrs: Vec<Vec<usize>> = (0..n).map(|u| (0..n).filter(|&v| a[[u, v]] > 0.0).collect()).collect();
    let deg: Vec<f64> = nbrs.iter().map(|s| s.len() as f64).collect();
    let common = |u: usize, v: usize| nbrs[u].iter().filter(|&&w| a[[v, w]] > 0.0).count() as f64;
    let adamic = |u: usize, v: usize| {
        nbrs[u]
            .iter()
            .filter(|&&w| a[[v, w]] > 0.0 && deg[w] > 1.0)
            .map(|&w| 1.0 / deg[w].ln())
            .sum::<f64>()
    };
    let jaccard = |u: usize, v: usize| {
        let c = common(u, v);
        let union = deg[u] + deg[v] - c;
        if union > 0.0 {
            c / union
        } else {
            0.0
        }
    };
    let mut pa: Vec<f64> = pairs.iter().map(|&(u, v)| deg[u] * deg[v]).collect();
    pa.sort_by(f64::total_cmp);
    let pa_median = pa[pa.len() / 2];
    vec![
        ("adjacent", pairs.iter().map(|&(u, v)| a[[u, v]] > 0.0).collect()),
        ("common_neighbors", pairs.iter().map(|&(u, v)| common(u, v) >= 1.0).collect()),
        ("jaccard", pairs.iter().map(|&(u, v)| jaccard(u, v) >= 0.05).collect()),
        ("adamic_adar", pairs.iter().map(|&(u, v)| adamic(u, v) >= 0.3).collect()),
        ("preferential_attachment", pairs.iter().map(|&(u, v)| deg[u] * deg[v] >= pa_median).collect()),
    ]
}
