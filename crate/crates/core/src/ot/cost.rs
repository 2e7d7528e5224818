use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground cost between adjacency rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// `‖a − b‖²`; the only metric with a closed-form barycentric repair.
    #[default]
    #[serde(alias = "squared_euclidean")]
    SqEuclidean,
    /// Number of coordinates that differ.
    Hamming,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqeuclidean" | "squared_euclidean" => Ok(Metric::SqEuclidean),
            "hamming" => Ok(Metric::Hamming),
            _ => Err(Error::Config(format!("unknown metric {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    matrix: Array2<f64>,
    metric: Metric,
}

impl CostMatrix {
    /// Wraps a precomputed matrix, checking entries are finite and non-negative.
    pub fn new(matrix: Array2<f64>, metric: Metric) -> Result<Self> {
        if matrix.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidArgument("cost entries must be finite and non-negative".into()));
        }
        Ok(Self { matrix, metric })
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn dim(&self) -> (usize, usize) {
        self.matrix.dim()
    }
}

/// Pairwise costs between the rows of `a` and the rows of `b`.
pub fn cost_matrix(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, metric: Metric) -> Result<CostMatrix> {
    if a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "rows have {} and {} columns",
            a.ncols(),
            b.ncols()
        )));
    }
    let matrix = match metric {
        Metric::SqEuclidean => {
            let na: Vec<f64> = a.axis_iter(Axis(0)).map(|r| r.dot(&r)).collect();
            let nb: Vec<f64> = b.axis_iter(Axis(0)).map(|r| r.dot(&r)).collect();
            let cross = a.dot(&b.t());
            Array2::from_shape_fn((a.nrows(), b.nrows()), |(i, j)| {
                (na[i] + nb[j] - 2.0 * cross[[i, j]]).max(0.0)
            })
        }
        Metric::Hamming => Array2::from_shape_fn((a.nrows(), b.nrows()), |(i, j)| {
            a.row(i).iter().zip(b.row(j)).filter(|(x, y)| x != y).count() as f64
        }),
    };
    CostMatrix::new(matrix, metric)
}
