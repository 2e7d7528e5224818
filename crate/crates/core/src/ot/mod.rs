//! Discrete optimal transport: exact EMD, Laplacian-regularized transport and
//! free-support barycenters.

mod barycenter;
mod cost;
mod emd;
mod laplace;

use ndarray::{Array1, Array2, ArrayView2, Axis};

pub use barycenter::{free_support_barycenter, Barycenter, BarycenterConfig};
pub use cost::{cost_matrix, CostMatrix, Metric};
pub use emd::solve_emd;
pub use laplace::{solve_laplacian_ot, LaplacianSolution, LaplacianTerm, RegularizedProblem, Side, SolverOptions};

pub(crate) use emd::transport_plan;

/// Transport plan with its prescribed marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    plan: Array2<f64>,
    source: Array1<f64>,
    target: Array1<f64>,
}

impl Coupling {
    pub fn new(plan: Array2<f64>, source: Vec<f64>, target: Vec<f64>) -> Self {
        Self {
            plan,
            source: Array1::from(source),
            target: Array1::from(target),
        }
    }

    pub fn plan(&self) -> ArrayView2<'_, f64> {
        self.plan.view()
    }

    pub fn source(&self) -> &Array1<f64> {
        &self.source
    }

    pub fn target(&self) -> &Array1<f64> {
        &self.target
    }

    /// Largest absolute deviation of the row and column sums from the marginals.
    pub fn marginal_error(&self) -> f64 {
        let rows = self.plan.sum_axis(Axis(1));
        let cols = self.plan.sum_axis(Axis(0));
        let r = (&rows - &self.source).iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let c = (&cols - &self.target).iter().fold(0.0f64, |m, d| m.max(d.abs()));
        r.max(c)
    }

    /// Plan with each row rescaled to sum to one. Rows without mass stay zero.
    pub fn row_stochastic(&self) -> Array2<f64> {
        normalize_rows(self.plan.view())
    }

    /// Transposed plan with each row (a target point) rescaled to sum to one.
    pub fn column_stochastic_transpose(&self) -> Array2<f64> {
        normalize_rows(self.plan.t())
    }

    pub fn to_csv(&self) -> String {
        crate::graph::io::dense_csv(self.plan.view())
    }
}

fn normalize_rows(m: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = m.to_owned();
    for mut row in out.rows_mut() {
        let s = row.sum();
        if s > 0.0 {
            row /= s;
        }
    }
    out
}

pub(crate) fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}
