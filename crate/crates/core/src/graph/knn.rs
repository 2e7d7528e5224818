use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Symmetrized k-nearest-neighbour graph over the rows of `rows`.
///
/// Distances are Euclidean; ties go to the lower row index. Entry `(i, j)` is
/// 1 when either endpoint lists the other among its `k` nearest rows.
pub fn knn_graph(rows: ArrayView2<'_, f64>, k: usize) -> Result<Array2<f64>> {
    let m = rows.nrows();
    if k == 0 || m <= k {
        return Err(Error::InvalidArgument(format!(
            "knn graph needs more than k = {k} rows, got {m}"
        )));
    }
    let sq_norms: Vec<f64> = rows.axis_iter(Axis(0)).map(|r| r.dot(&r)).collect();
    let gram = rows.dot(&rows.t());
    let mut out = Array2::zeros((m, m));
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(m - 1);
    for i in 0..m {
        order.clear();
        for j in (0..m).filter(|&j| j != i) {
            // Clamp the cancellation error of the Gram expansion.
            let d = (sq_norms[i] + sq_norms[j] - 2.0 * gram[[i, j]]).max(0.0);
            order.push((d, j));
        }
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in &order[..k] {
            out[[i, j]] = 1.0;
            out[[j, i]] = 1.0;
        }
    }
    Ok(out)
}

/// Graph Laplacian `L = diag(K 1) - K` of a symmetric similarity matrix.
pub fn laplacian(sim: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (r, c) = sim.dim();
    if r != c {
        return Err(Error::InvalidArgument(format!("similarity matrix is {r}x{c}")));
    }
    let scale = sim.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..r {
        for j in (i + 1)..r {
            if (sim[[i, j]] - sim[[j, i]]).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!(
                    "similarity matrix asymmetric at ({i},{j})"
                )));
            }
        }
    }
    let mut lap = sim.mapv(|v| -v);
    for (i, deg) in sim.sum_axis(Axis(1)).iter().enumerate() {
        lap[[i, i]] += deg;
    }
    Ok(lap)
}
