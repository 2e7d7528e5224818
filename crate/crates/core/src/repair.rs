//! Graph repair: move the adjacency rows of every sensitive group towards a
//! common distribution so that edges stop encoding group membership.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{assortativity, knn_graph, laplacian, AttributedGraph};
use crate::ot::{
    cost_matrix, free_support_barycenter, solve_laplacian_ot, uniform, BarycenterConfig, Coupling, LaplacianTerm,
    Metric, RegularizedProblem, Side, SolverOptions,
};
use crate::parallel::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Emd,
    Laplacian,
    Random,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "emd" => Ok(Method::Emd),
            "laplacian" | "lap" => Ok(Method::Laplacian),
            "random" => Ok(Method::Random),
            other => Err(Error::Config(format!("unknown repair method `{other}` (expected emd, laplacian or random)"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Emd => "emd",
            Method::Laplacian => "laplacian",
            Method::Random => "random",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepairConfig {
    pub method: Method,
    pub lambda: f64,
    pub metric: Metric,
    pub knn_k: usize,
    pub seed: u64,
    /// Edge mass the random baseline must add.
    pub target_mass: Option<f64>,
    pub solver: SolverOptions,
    /// Outer iterations of the barycenter (more than two groups).
    pub max_outer: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for RepairConfig {
    fn default() -> Self {
        Self {
            method: Method::Emd,
            lambda: 0.0,
            metric: Metric::SqEuclidean,
            knn_k: 3,
            seed: 0,
            target_mass: None,
            solver: SolverOptions::default(),
            max_outer: 10,
            execution: Execution::default(),
        }
    }
}

impl RepairConfig {
    pub fn emd() -> Self {
        Self::default()
    }

    pub fn laplacian(lambda: f64) -> Self {
        Self {
            method: Method::Laplacian,
            lambda,
            ..Self::default()
        }
    }

    pub fn random(target_mass: f64, seed: u64) -> Self {
        Self {
            method: Method::Random,
            target_mass: Some(target_mass),
            seed,
            ..Self::default()
        }
    }

    /// `λ` actually used: always 0 for `emd`.
    pub fn effective_lambda(&self) -> f64 {
        match self.method {
            Method::Emd => 0.0,
            _ => self.lambda,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config(format!("lambda must be a finite non-negative number, got {}", self.lambda)));
        }
        if self.method == Method::Laplacian && self.knn_k == 0 {
            return Err(Error::Config("knn_k must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RepairResult {
    pub repaired: AttributedGraph,
    /// Binary repair: one coupling from group 0 to group 1. Multi-class: one
    /// coupling per group from the barycenter support. Random: none.
    pub couplings: Vec<Coupling>,
    pub config: RepairConfig,
    /// Weight increase summed over cross-group node pairs.
    pub added_mass: f64,
    /// Transport objective trace (conditional-gradient or barycenter iterations).
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairMetadata {
    pub method: Method,
    pub lambda: f64,
    pub metric: Metric,
    pub knn_k: usize,
    pub seed: u64,
    pub target_mass: Option<f64>,
    pub added_mass: f64,
    pub objective_trace: Vec<f64>,
    pub assortativity_original: Option<f64>,
    pub assortativity_repaired: Option<f64>,
}

impl RepairResult {
    pub fn metadata(&self, original: &AttributedGraph) -> RepairMetadata {
        let assort = |g: &AttributedGraph| assortativity(g).ok().and_then(|a| a.value());
        RepairMetadata {
            method: self.config.method,
            lambda: self.config.effective_lambda(),
            metric: self.config.metric,
            knn_k: self.config.knn_k,
            seed: self.config.seed,
            target_mass: self.config.target_mass,
            added_mass: self.added_mass,
            objective_trace: self.objective_trace.clone(),
            assortativity_original: assort(original),
            assortativity_repaired: assort(&self.repaired),
        }
    }
}

/// Repairs with the method in `cfg`: two groups use the geodesic midpoint,
/// more use the barycenter.
pub fn repair(g: &AttributedGraph, cfg: &RepairConfig) -> Result<RepairResult> {
    match cfg.method {
        Method::Random => {
            let target = cfg
                .target_mass
                .ok_or_else(|| Error::Config("random repair needs a target mass".into()))?;
            let mut result = repair_random(g, target, cfg.seed)?;
            result.config = *cfg;
            Ok(result)
        }
        _ if g.n_groups() == 2 => repair_binary(g, cfg),
        _ => repair_multiclass(g, cfg),
    }
}

fn knn_laplacian(rows: ArrayView2<'_, f64>, k: usize) -> Result<Option<Array2<f64>>> {
    let k = k.min(rows.nrows().saturating_sub(1));
    if k == 0 {
        return Ok(None);
    }
    Ok(Some(laplacian(knn_graph(rows, k)?.view())?))
}

/// Symmetrize by averaging, zero the diagonal, clear rounding negatives.
fn finish(mut a: Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    for i in 0..n {
        a[[i, i]] = 0.0;
        for j in (i + 1)..n {
            let w = ((a[[i, j]] + a[[j, i]]) / 2.0).max(0.0);
            a[[i, j]] = w;
            a[[j, i]] = w;
        }
    }
    a
}

fn cross_group_increase(before: &AttributedGraph, after: ArrayView2<'_, f64>) -> f64 {
    let labels = before.labels();
    let a = before.adjacency();
    let mut total = 0.0;
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            if labels[i] != labels[j] {
                total += (after[[i, j]] - a[[i, j]]).max(0.0);
            }
        }
    }
    total
}

/// Maps both groups onto the midpoint of the transport geodesic between them:
/// `Ã₀ = π₀A₀ + π₁ rownorm(γ) A₁` and `Ã₁ = π₁A₁ + π₀ rownorm(γᵀ) A₀`.
///
/// With `method = laplacian` and `λ > 0` the coupling also penalises, for each
/// projected group, the KNN-Laplacian smoothness of its image measured on the
/// group it lands on.
pub fn repair_binary(g: &AttributedGraph, cfg: &RepairConfig) -> Result<RepairResult> {
    cfg.validate()?;
    if g.n_groups() != 2 {
        return Err(Error::WrongArity {
            expected: "exactly 2",
            found: g.n_groups(),
            hint: "repair_multiclass (the barycenter repair)",
        });
    }
    let part = g.partition();
    let (a0, a1) = (&part.blocks[0], &part.blocks[1]);
    let (n0, n1) = (a0.nrows(), a1.nrows());
    let lambda = cfg.effective_lambda();

    let cost = cost_matrix(a0.view(), a1.view(), cfg.metric)?;
    let mut terms = Vec::new();
    if lambda > 0.0 {
        if let Some(l1) = knn_laplacian(a1.view(), cfg.knn_k)? {
            terms.push(LaplacianTerm::new(l1, a0.view(), n1 as f64, Side::Target)?);
        }
        if let Some(l0) = knn_laplacian(a0.view(), cfg.knn_k)? {
            terms.push(LaplacianTerm::new(l0, a1.view(), n0 as f64, Side::Source)?);
        }
    }
    let problem = RegularizedProblem::new(cost, lambda, terms)?;
    let solution = solve_laplacian_ot(&problem, &uniform(n0), &uniform(n1), cfg.solver)?;
    let coupling = solution.coupling;

    let (p0, p1) = (part.ratios[0], part.ratios[1]);
    let mut r0 = a0 * p0;
    r0.scaled_add(p1, &coupling.row_stochastic().dot(a1));
    let mut r1 = a1 * p1;
    r1.scaled_add(p0, &coupling.column_stochastic_transpose().dot(a0));

    let repaired = finish(part.reassemble(&[r0, r1]));
    let added_mass = cross_group_increase(g, repaired.view());
    Ok(RepairResult {
        repaired: AttributedGraph::new(repaired, g.labels().to_vec())?,
        couplings: vec![coupling],
        config: *cfg,
        added_mass,
        objective_trace: solution.trace,
    })
}

/// Projects every group onto a free-support barycenter of all groups with
/// `N` support rows: `Ã_i = N_i γ_iᵀ X`.
pub fn repair_multiclass(g: &AttributedGraph, cfg: &RepairConfig) -> Result<RepairResult> {
    cfg.validate()?;
    if g.n_groups() < 2 {
        return Err(Error::WrongArity {
            expected: "at least 2",
            found: g.n_groups(),
            hint: "a graph with at least two sensitive groups",
        });
    }
    if cfg.metric != Metric::SqEuclidean {
        return Err(Error::Config("the barycenter repair supports only the squared Euclidean cost".into()));
    }
    let part = g.partition();
    let views: Vec<_> = part.blocks.iter().map(|b| b.view()).collect();
    let bary_cfg = BarycenterConfig {
        lambda: cfg.effective_lambda(),
        support_size: g.n_nodes(),
        max_outer: cfg.max_outer,
        tol: cfg.solver.tol,
        knn_k: cfg.knn_k,
        seed: cfg.seed,
        solver: cfg.solver,
        execution: cfg.execution,
    };
    let bary = free_support_barycenter(&views, &bary_cfg)?;
    let blocks: Vec<Array2<f64>> = bary
        .couplings
        .iter()
        .zip(&part.indices)
        .map(|(c, rows)| c.plan().t().dot(&bary.support) * rows.len() as f64)
        .collect();
    let repaired = finish(part.reassemble(&blocks));
    let added_mass = cross_group_increase(g, repaired.view());
    Ok(RepairResult {
        repaired: AttributedGraph::new(repaired, g.labels().to_vec())?,
        couplings: bary.couplings,
        config: *cfg,
        added_mass,
        objective_trace: bary.objective_trace,
    })
}

/// Baseline: adds unit edges between uniformly chosen non-adjacent
/// cross-group pairs until at least `target_mass` has been added or no such
/// pair remains.
pub fn repair_random(g: &AttributedGraph, target_mass: f64, seed: u64) -> Result<RepairResult> {
    if !(target_mass.is_finite() && target_mass >= 0.0) {
        return Err(Error::InvalidArgument(format!("target mass must be >= 0, got {target_mass}")));
    }
    let labels = g.labels();
    let n = g.n_nodes();
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| labels[i] != labels[j] && g.weight(i, j) == 0.0)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.shuffle(&mut rng);
    let wanted = (target_mass.ceil() as usize).min(candidates.len());
    let mut adjacency = g.adjacency().to_owned();
    for &(i, j) in &candidates[..wanted] {
        adjacency[[i, j]] = 1.0;
        adjacency[[j, i]] = 1.0;
    }
    Ok(RepairResult {
        repaired: AttributedGraph::new(adjacency, labels.to_vec())?,
        couplings: Vec::new(),
        config: RepairConfig::random(target_mass, seed),
        added_mass: wanted as f64,
        objective_trace: Vec::new(),
    })
}
