mod common;

use approx::assert_relative_eq;
use fairrepair::embedding::{
    embed, random_walks, skipgram_train, skipgram_train_with, spectral_embed, EmbeddingConfig, EmbeddingMethod,
};
use fairrepair::graph::{builtin, generate_sbm};
use fairrepair::{AttributedGraph, Execution};
use ndarray::ArrayView1;

fn walk_cfg(walks_per_node: usize, walk_length: usize) -> EmbeddingConfig {
    EmbeddingConfig {
        walks_per_node,
        walk_length,
        ..EmbeddingConfig::default()
    }
}

fn cliques(size: usize) -> AttributedGraph {
    let mut edges = Vec::new();
    for base in [0, size] {
        for i in 0..size {
            for j in (i + 1)..size {
                edges.push((base + i, base + j, 1.0));
            }
        }
    }
    let labels = (0..2 * size).map(|v| v / size).collect();
    AttributedGraph::from_edges(2 * size, &edges, labels).unwrap()
}

fn cosine(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.dot(&b) / (a.dot(&a).sqrt() * b.dot(&b).sqrt())
}

#[test]
fn single_edge_walks_alternate() {
    let g = AttributedGraph::from_edges(2, &[(0, 1, 3.0)], vec![0, 1]).unwrap();
    let walks = random_walks(&g, &walk_cfg(4, 9)).unwrap();
    assert_eq!(walks.len(), 8);
    for w in &walks {
        assert_eq!(w.len(), 9);
        assert!(w.windows(2).all(|p| p[0] != p[1]));
    }
}

#[test]
fn star_walks_return_to_the_center() {
    let edges: Vec<_> = (1..6).map(|v| (0, v, 1.0)).collect();
    let g = AttributedGraph::from_edges(6, &edges, vec![0, 1, 0, 1, 0, 1]).unwrap();
    let walks = random_walks(&g, &walk_cfg(5, 11)).unwrap();
    for w in walks.iter().filter(|w| w[0] == 0) {
        assert!(w.iter().step_by(2).all(|&v| v == 0));
        assert!(w.iter().skip(1).step_by(2).all(|&v| v != 0));
    }
}

#[test]
fn isolated_nodes_give_single_step_walks() {
    let g = AttributedGraph::from_edges(3, &[(0, 1, 1.0)], vec![0, 1, 0]).unwrap();
    let walks = random_walks(&g, &walk_cfg(2, 5)).unwrap();
    assert!(walks.iter().filter(|w| w[0] == 2).all(|w| w == &vec![2]));
}

fn transitions_from(walks: &[Vec<usize>], node: usize, n: usize) -> Vec<f64> {
    let mut counts = vec![0.0; n];
    for w in walks {
        for p in w.windows(2) {
            if p[0] == node {
                counts[p[1]] += 1.0;
            }
        }
    }
    counts
}

#[test]
fn weighted_transition_frequency() {
    let g = AttributedGraph::from_edges(3, &[(0, 1, 10.0), (0, 2, 1.0), (1, 2, 1.0)], vec![0, 1, 0]).unwrap();
    let walks = random_walks(&g, &walk_cfg(700, 15)).unwrap();
    let counts = transitions_from(&walks, 0, 3);
    let total: f64 = counts.iter().sum();
    assert!(total >= 1e4, "only {total} transitions");
    assert!((counts[1] / total - 10.0 / 11.0).abs() <= 0.02);
}

#[test]
fn transition_frequencies_pass_chi_squared() {
    let weights = [(0, 1, 1.0), (0, 2, 2.0), (0, 3, 5.0), (1, 2, 1.0), (2, 3, 1.0)];
    let g = AttributedGraph::from_edges(4, &weights, vec![0, 1, 0, 1]).unwrap();
    let walks = random_walks(&g, &EmbeddingConfig { seed: 17, ..walk_cfg(1000, 15) }).unwrap();
    let counts = transitions_from(&walks, 0, 4);
    let total: f64 = counts.iter().sum();
    assert!(total >= 1e4);
    let expected = [0.0, 1.0 / 8.0, 2.0 / 8.0, 5.0 / 8.0];
    let chi2: f64 = (1..4).map(|v| (counts[v] - total * expected[v]).powi(2) / (total * expected[v])).sum();
    // 99th percentile of chi-squared with 2 degrees of freedom.
    assert!(chi2 < 9.210, "chi2 = {chi2}");
}

#[test]
fn walks_are_seeded_and_schedule_independent() {
    let g = generate_sbm(&builtin("G1", 0).unwrap()).unwrap();
    let seq = random_walks(&g, &EmbeddingConfig { execution: Execution::Sequential, ..EmbeddingConfig::default() }).unwrap();
    let par = random_walks(&g, &EmbeddingConfig { execution: Execution::Parallel, ..EmbeddingConfig::default() }).unwrap();
    assert_eq!(seq, par);
    let other = random_walks(&g, &EmbeddingConfig { seed: 1, ..EmbeddingConfig::default() }).unwrap();
    assert_ne!(seq, other);
}

#[test]
fn skipgram_separates_disconnected_cliques() {
    let g = cliques(6);
    let cfg = EmbeddingConfig { dim: 8, ..EmbeddingConfig::default() };
    let z = embed(&g, &cfg).unwrap();
    let (mut within, mut cross, mut nw, mut nc) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..12 {
        for j in (i + 1)..12 {
            let c = cosine(z.matrix.row(i), z.matrix.row(j));
            if i / 6 == j / 6 {
                within += c;
                nw += 1.0;
            } else {
                cross += c;
                nc += 1.0;
            }
        }
    }
    assert!(within / nw > cross / nc, "within {} cross {}", within / nw, cross / nc);
}

#[test]
fn repeated_pair_score_grows_every_epoch() {
    let corpus = vec![vec![0, 1]; 50];
    let cfg = EmbeddingConfig { dim: 4, epochs: 10, ..EmbeddingConfig::default() };
    let mut scores = Vec::new();
    skipgram_train_with(&corpus, 2, &cfg, |_, input, output| {
        scores.push(input.row(0).dot(&output.row(1)));
    })
    .unwrap();
    assert_eq!(scores.len(), 10);
    assert!(scores.windows(2).all(|w| w[1] > w[0]), "{scores:?}");
}

#[test]
fn skipgram_loss_decreases_on_g1() {
    let g = generate_sbm(&builtin("G1", 0).unwrap()).unwrap();
    let cfg = EmbeddingConfig { epochs: 9, ..EmbeddingConfig::default() };
    let z = embed(&g, &cfg).unwrap();
    let l = &z.epoch_losses;
    assert!(l.last().unwrap() <= l.first().unwrap(), "{l:?}");
    let smooth: Vec<f64> = l.chunks(3).map(|c| c.iter().sum::<f64>() / 3.0).collect();
    assert!(smooth.windows(2).all(|w| w[1] <= w[0]), "{smooth:?} {l:?}");
    assert!(z.matrix.iter().all(|v| v.is_finite()));
    assert_eq!(z.matrix.dim(), (150, 64));
}

#[test]
fn skipgram_is_deterministic() {
    let g = generate_sbm(&builtin("G2", 4).unwrap()).unwrap();
    let cfg = EmbeddingConfig { seed: 8, ..EmbeddingConfig::default() };
    assert_eq!(embed(&g, &cfg).unwrap(), embed(&g, &cfg).unwrap());
}

#[test]
fn skipgram_rejects_empty_corpus_and_bad_config() {
    assert!(skipgram_train(&[], 3, &EmbeddingConfig::default()).is_err());
    assert!(skipgram_train(&[vec![]], 3, &EmbeddingConfig::default()).is_err());
    assert!(skipgram_train(&[vec![0, 5]], 3, &EmbeddingConfig::default()).is_err());
    assert!(skipgram_train(&[vec![0, 1]], 3, &EmbeddingConfig { dim: 1, ..EmbeddingConfig::default() }).is_err());
}

#[test]
fn spectral_splits_cliques_by_sign() {
    let z = spectral_embed(&cliques(4), 1).unwrap();
    let col = z.matrix.column(0);
    assert!(col.iter().take(4).all(|&v| v * col[0] > 0.0));
    assert!(col.iter().skip(4).all(|&v| v * col[0] < 0.0));
}

#[test]
fn spectral_path_fiedler_vector() {
    let g = AttributedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)], vec![0, 1, 0]).unwrap();
    let z = spectral_embed(&g, 1).unwrap();
    let v = z.matrix.column(0);
    let s = 0.5f64.sqrt();
    assert_relative_eq!(v[1], 0.0, epsilon = 1e-10);
    assert_relative_eq!(v[0].abs(), s, epsilon = 1e-10);
    assert_relative_eq!(v[0], -v[2], epsilon = 1e-10);
}

#[test]
fn spectral_complete_graph_is_equidistant() {
    let mut edges = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            edges.push((i, j, 1.0));
        }
    }
    let g = AttributedGraph::from_edges(4, &edges, vec![0, 1, 0, 1]).unwrap();
    let z = spectral_embed(&g, 3).unwrap();
    let d = |i: usize, j: usize| (&z.matrix.row(i) - &z.matrix.row(j)).mapv(|x| x * x).sum().sqrt();
    let base = d(0, 1);
    for i in 0..4 {
        for j in (i + 1)..4 {
            assert_relative_eq!(d(i, j), base, epsilon = 1e-8);
        }
    }
    assert!(spectral_embed(&g, 4).is_err());
    assert!(spectral_embed(&g, 0).is_err());
}

#[test]
fn spectral_method_and_csv_export() {
    let g = cliques(3);
    let cfg = EmbeddingConfig { method: EmbeddingMethod::Spectral, dim: 2, ..EmbeddingConfig::default() };
    let z = embed(&g, &cfg).unwrap();
    assert_eq!(z, spectral_embed(&g, 2).unwrap());
    let csv = z.to_csv();
    assert!(csv.starts_with("node,z0,z1\n0,"));
    assert_eq!(csv.lines().count(), 7);
}
