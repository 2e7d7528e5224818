//! Attributed graph model and structural measurements.

mod assortativity;
pub mod io;
mod knn;
mod sbm;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

pub use assortativity::{assortativity, Assortativity};
pub use knn::{knn_graph, laplacian};
pub use sbm::{builtin, generate_sbm, LabelMode, SbmSpec, BUILTIN_GRAPHS};

/// Undirected weighted graph with one categorical sensitive attribute per node.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    adjacency: Array2<f64>,
    labels: Vec<usize>,
    n_groups: usize,
    binary_weights: bool,
}

impl AttributedGraph {
    /// Validates symmetry, the zero diagonal, non-negative finite weights and
    /// that labels `0..K` each occur at least once (`K = max label + 1`).
    pub fn new(adjacency: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        let (rows, cols) = adjacency.dim();
        if rows != cols {
            return Err(Error::InvalidGraph(format!(
                "adjacency must be square, got {rows}x{cols}"
            )));
        }
        if rows == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        if labels.len() != rows {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {rows} nodes",
                labels.len()
            )));
        }
        let mut binary_weights = true;
        for i in 0..rows {
            if adjacency[[i, i]] != 0.0 {
                return Err(Error::InvalidGraph(format!("non-zero diagonal at node {i}")));
            }
            for j in (i + 1)..rows {
                let w = adjacency[[i, j]];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidGraph(format!(
                        "weight ({i},{j}) = {w} is not a finite non-negative number"
                    )));
                }
                if w != adjacency[[j, i]] {
                    return Err(Error::InvalidGraph(format!("asymmetric weight at ({i},{j})")));
                }
                if w != 0.0 && w != 1.0 {
                    binary_weights = false;
                }
            }
        }
        let n_groups = labels.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![0usize; n_groups];
        for &s in &labels {
            counts[s] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyGroup(empty));
        }
        Ok(Self {
            adjacency,
            labels,
            n_groups,
            binary_weights,
        })
    }

    /// Builds a graph from an undirected edge list. Self-loops are dropped and
    /// repeated pairs keep the last weight.
    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize, f64)], labels: Vec<usize>) -> Result<Self> {
        let mut adjacency = Array2::zeros((n_nodes, n_nodes));
        for &(u, v, w) in edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(Error::InvalidGraph(format!("edge ({u},{v}) out of range")));
            }
            if u != v {
                adjacency[[u, v]] = w;
                adjacency[[v, u]] = w;
            }
        }
        Self::new(adjacency, labels)
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    /// Number of distinct sensitive values `K`.
    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn adjacency(&self) -> ArrayView2<'_, f64> {
        self.adjacency.view()
    }

    pub fn into_adjacency(self) -> Array2<f64> {
        self.adjacency
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn is_binary_weights(&self) -> bool {
        self.binary_weights
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.adjacency[[u, v]]
    }

    /// Edges `(u, v, w)` with `u < v` and `w > 0`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n_nodes();
        (0..n).flat_map(move |u| {
            ((u + 1)..n).filter_map(move |v| {
                let w = self.adjacency[[u, v]];
                (w > 0.0).then_some((u, v, w))
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Weighted degree of every node.
    pub fn degrees(&self) -> Vec<f64> {
        self.adjacency.sum_axis(Axis(1)).to_vec()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_groups];
        for &s in &self.labels {
            counts[s] += 1;
        }
        counts
    }

    pub fn partition(&self) -> GroupPartition {
        partition_by_label(self)
    }
}

/// Rows of the adjacency matrix split by sensitive value.
#[derive(Debug, Clone)]
pub struct GroupPartition {
    /// Node ids of each group, in increasing order.
    pub indices: Vec<Vec<usize>>,
    /// `N_s x N` row blocks of the adjacency matrix.
    pub blocks: Vec<Array2<f64>>,
    /// `N_s / N`.
    pub ratios: Vec<f64>,
}

impl GroupPartition {
    pub fn n_groups(&self) -> usize {
        self.indices.len()
    }

    /// Scatter per-group row blocks back into an `N x N` matrix in original
    /// node order.
    pub fn reassemble(&self, blocks: &[Array2<f64>]) -> Array2<f64> {
        let n: usize = self.indices.iter().map(Vec::len).sum();
        let mut out = Array2::zeros((n, n));
        for (rows, block) in self.indices.iter().zip(blocks) {
            for (local, &node) in rows.iter().enumerate() {
                out.row_mut(node).assign(&block.row(local));
            }
        }
        out
    }
}

pub fn partition_by_label(g: &AttributedGraph) -> GroupPartition {
    let n = g.n_nodes() as f64;
    let mut indices = vec![Vec::new(); g.n_groups()];
    for (node, &s) in g.labels().iter().enumerate() {
        indices[s].push(node);
    }
    let blocks = indices
        .iter()
        .map(|rows| g.adjacency.select(Axis(0), rows))
        .collect();
    let ratios = indices.iter().map(|rows| rows.len() as f64 / n).collect();
    GroupPartition {
        indices,
        blocks,
        ratios,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn four_cycle() -> AttributedGraph {
        let a = array![
            [0., 1., 0., 1.],
            [1., 0., 1., 0.],
            [0., 1., 0., 1.],
            [1., 0., 1., 0.]
        ];
        AttributedGraph::new(a, vec![0, 1, 0, 1]).unwrap()
    }

    #[test]
    fn partition_selects_rows_in_order() {
        let g = four_cycle();
        let p = g.partition();
        assert_eq!(p.indices, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(p.blocks[0].row(1), g.adjacency().row(2));
        assert_eq!(p.blocks[1].row(0), g.adjacency().row(1));
        assert_eq!(p.ratios, vec![0.5, 0.5]);
        assert_eq!(p.reassemble(&p.blocks), g.adjacency());
    }

    #[test]
    fn single_group_partition_is_whole_matrix() {
        let a = array![[0., 1.], [1., 0.]];
        let g = AttributedGraph::new(a.clone(), vec![0, 0]).unwrap();
        let p = g.partition();
        assert_eq!(p.n_groups(), 1);
        assert_eq!(p.blocks[0], a);
        assert_eq!(p.ratios, vec![1.0]);
    }

    #[test]
    fn rejects_invalid_adjacency() {
        let asym = array![[0., 1.], [0., 0.]];
        assert!(matches!(
            AttributedGraph::new(asym, vec![0, 1]),
            Err(Error::InvalidGraph(_))
        ));
        let diag = array![[1., 0.], [0., 0.]];
        assert!(AttributedGraph::new(diag, vec![0, 1]).is_err());
        let neg = array![[0., -1.], [-1., 0.]];
        assert!(AttributedGraph::new(neg, vec![0, 1]).is_err());
        let gap = array![[0., 1.], [1., 0.]];
        assert!(matches!(
            AttributedGraph::new(gap, vec![0, 2]),
            Err(Error::EmptyGroup(1))
        ));
    }

    #[test]
    fn edges_and_binary_flag() {
        let g = four_cycle();
        assert!(g.is_binary_weights());
        assert_eq!(g.edge_count(), 4);
        let w = AttributedGraph::from_edges(3, &[(0, 1, 0.5), (2, 2, 1.0)], vec![0, 0, 1]).unwrap();
        assert!(!w.is_binary_weights());
        assert_eq!(w.edges().collect::<Vec<_>>(), vec![(0, 1, 0.5)]);
    }
}
