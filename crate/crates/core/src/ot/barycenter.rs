//! Free-support Wasserstein barycenter with an optional Laplacian penalty on
//! the projection of every group onto the support.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cost_matrix, solve_laplacian_ot, uniform, Coupling, LaplacianTerm, Metric, RegularizedProblem, Side, SolverOptions};
use crate::error::{Error, Result};
use crate::graph::{knn_graph, laplacian};
use crate::parallel::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarycenterConfig {
    pub lambda: f64,
    /// Number of support rows; the repair uses one per node.
    pub support_size: usize,
    pub max_outer: usize,
    /// Stop when `‖X_new − X‖_F / ‖X‖_F` drops below this.
    pub tol: f64,
    pub knn_k: usize,
    pub seed: u64,
    pub solver: SolverOptions,
    #[serde(skip)]
    pub execution: Execution,
}

impl BarycenterConfig {
    pub fn new(support_size: usize) -> Self {
        Self {
            lambda: 0.0,
            support_size,
            max_outer: 10,
            tol: 1e-6,
            knn_k: 3,
            seed: 0,
            solver: SolverOptions::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Barycenter {
    pub support: Array2<f64>,
    /// One coupling per group, support (uniform `1/N`) to group rows (uniform `1/N_i`).
    pub couplings: Vec<Coupling>,
    /// Mean per-group objective, at initialisation and after each support update.
    pub objective_trace: Vec<f64>,
    pub outer_iterations: usize,
}

/// Alternates between solving one (regularized) transport problem per group
/// and moving every support row to the mean of its barycentric projections,
/// `X ← (1/|S|) Σ_i N γ_i A_i`.
///
/// The support starts from rows drawn with replacement from the stacked group
/// matrices. With `λ > 0` each group contributes the penalty
/// `N_i² tr(Xᵀ γ_i L_i γ_iᵀ X)` where `L_i` is the Laplacian of the KNN graph
/// of that group's rows (`k` is clipped to `N_i − 1` for tiny groups).
pub fn free_support_barycenter(groups: &[ArrayView2<'_, f64>], cfg: &BarycenterConfig) -> Result<Barycenter> {
    if groups.len() < 2 {
        return Err(Error::InvalidArgument("a barycenter needs at least two groups".into()));
    }
    if let Some(i) = groups.iter().position(|g| g.nrows() == 0) {
        return Err(Error::EmptyGroup(i));
    }
    let dim = groups[0].ncols();
    if groups.iter().any(|g| g.ncols() != dim) {
        return Err(Error::ShapeMismatch("group matrices have different column counts".into()));
    }
    if cfg.support_size == 0 {
        return Err(Error::InvalidArgument("support size must be positive".into()));
    }

    let laplacians: Vec<Option<Array2<f64>>> = if cfg.lambda > 0.0 {
        cfg.execution.try_map(groups.len(), |i| {
            let rows = groups[i];
            let k = cfg.knn_k.min(rows.nrows().saturating_sub(1));
            if k == 0 {
                return Ok::<_, Error>(None);
            }
            Ok(Some(laplacian(knn_graph(rows, k)?.view())?))
        })?
    } else {
        vec![None; groups.len()]
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let total: usize = groups.iter().map(|g| g.nrows()).sum();
    let mut support = Array2::zeros((cfg.support_size, dim));
    for mut row in support.rows_mut() {
        let mut pick = rng.random_range(0..total);
        let group = groups
            .iter()
            .position(|g| {
                if pick < g.nrows() {
                    true
                } else {
                    pick -= g.nrows();
                    false
                }
            })
            .expect("pick < total rows");
        row.assign(&groups[group].row(pick));
    }

    let solve_all = |support: &Array2<f64>| -> Result<(Vec<Coupling>, f64)> {
        let a = uniform(support.nrows());
        let solved = cfg.execution.try_map(groups.len(), |i| {
            let cost = cost_matrix(support.view(), groups[i], Metric::SqEuclidean)?;
            let terms = match &laplacians[i] {
                Some(l) => vec![LaplacianTerm::new(l.clone(), support.view(), groups[i].nrows() as f64, Side::Target)?],
                None => Vec::new(),
            };
            let problem = RegularizedProblem::new(cost, cfg.lambda, terms)?;
            let b = uniform(groups[i].nrows());
            let sol = solve_laplacian_ot(&problem, &a, &b, cfg.solver)?;
            let value = sol.objective();
            Ok::<_, Error>((sol.coupling, value))
        })?;
        let mean = solved.iter().map(|(_, v)| v).sum::<f64>() / groups.len() as f64;
        Ok((solved.into_iter().map(|(c, _)| c).collect(), mean))
    };

    let (mut couplings, value) = solve_all(&support)?;
    let mut trace = vec![value];
    let mut outer = 0;
    let n_support = cfg.support_size as f64;
    let n_groups = groups.len() as f64;
    while outer < cfg.max_outer {
        outer += 1;
        let mut next = Array2::<f64>::zeros(support.dim());
        for (c, rows) in couplings.iter().zip(groups) {
            next.scaled_add(n_support / n_groups, &c.plan().dot(rows));
        }
        let norm = support.iter().map(|v| v * v).sum::<f64>().sqrt();
        let change = (&next - &support).iter().map(|v| v * v).sum::<f64>().sqrt();
        support = next;
        let (c, value) = solve_all(&support)?;
        couplings = c;
        trace.push(value);
        if change <= cfg.tol * norm.max(f64::MIN_POSITIVE) {
            break;
        }
    }

    Ok(Barycenter {
        support,
        couplings,
        objective_trace: trace,
        outer_iterations: outer,
    })
}
