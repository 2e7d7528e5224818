//! Transport with quadratic Laplacian penalties on barycentric projections,
//! solved by conditional gradient (Frank–Wolfe) with exact line search.
//!
//! Each penalty has the form `c² tr(P γ R γᵀ)` where one of `P`, `R` is a
//! graph Laplacian over one side of the coupling and the other is the Gram
//! matrix of the rows being projected. With `Φ = cγᵀ` this is
//! `tr(Aᵀ Φᵀ L Φ A)`, i.e. half the KNN-weighted sum of squared distances
//! between projected rows.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};

use super::{solve_emd, transport_plan, Coupling, CostMatrix};
use crate::error::{Error, Result};

/// Which coupling axis the Laplacian indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Laplacian over source points; the data rows belong to the target.
    Source,
    /// Laplacian over target points; the data rows belong to the source.
    Target,
}

#[derive(Debug, Clone)]
pub struct LaplacianTerm {
    left: Array2<f64>,
    right: Array2<f64>,
    scale: f64,
}

fn check_psd(l: &Array2<f64>) -> Result<()> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(Error::ShapeMismatch(format!("Laplacian is {}x{}", n, l.ncols())));
    }
    let norm = l.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (l[[i, j]] - l[[j, i]]).abs() > 1e-12 * norm {
                return Err(Error::InvalidArgument("Laplacian is not symmetric".into()));
            }
        }
    }
    let min_eig = DMatrix::from_fn(n, n, |i, j| l[[i, j]]).symmetric_eigenvalues().min();
    if min_eig < -1e-9 * norm {
        return Err(Error::InvalidArgument(format!(
            "Laplacian is not positive semi-definite (min eigenvalue {min_eig})"
        )));
    }
    Ok(())
}

impl LaplacianTerm {
    /// `laplacian` indexes the coupling axis named by `side`; `data` holds one
    /// row per point on the opposite axis; `scale` is the projection factor `c`.
    pub fn new(laplacian: Array2<f64>, data: ArrayView2<'_, f64>, scale: f64, side: Side) -> Result<Self> {
        check_psd(&laplacian)?;
        if !scale.is_finite() {
            return Err(Error::InvalidArgument("term scale must be finite".into()));
        }
        let gram = data.dot(&data.t());
        let (left, right) = match side {
            Side::Source => (laplacian, gram),
            Side::Target => (gram, laplacian),
        };
        Ok(Self { left, right, scale })
    }

    fn sandwich(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.left.dot(&x).dot(&self.right)
    }

    /// `c² tr(P x R xᵀ)`.
    fn quadratic(&self, x: ArrayView2<'_, f64>) -> f64 {
        self.scale * self.scale * (&self.sandwich(x) * &x).sum()
    }
}

#[derive(Debug, Clone)]
pub struct RegularizedProblem {
    cost: CostMatrix,
    lambda: f64,
    terms: Vec<LaplacianTerm>,
}

impl RegularizedProblem {
    pub fn new(cost: CostMatrix, lambda: f64, terms: Vec<LaplacianTerm>) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
        }
        let (m, n) = cost.dim();
        for t in &terms {
            if t.left.dim() != (m, m) || t.right.dim() != (n, n) {
                return Err(Error::ShapeMismatch(format!(
                    "term of shape {:?}/{:?} does not fit a {m}x{n} coupling",
                    t.left.dim(),
                    t.right.dim()
                )));
            }
        }
        Ok(Self { cost, lambda, terms })
    }

    pub fn cost(&self) -> &CostMatrix {
        &self.cost
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `<γ, M> + λ Σ c² tr(P γ R γᵀ)`.
    pub fn objective(&self, plan: ArrayView2<'_, f64>) -> f64 {
        let linear = (&plan * &self.cost.view()).sum();
        linear + self.lambda * self.terms.iter().map(|t| t.quadratic(plan)).sum::<f64>()
    }

    /// `M + λ Σ 2c² P γ R`.
    pub fn gradient(&self, plan: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut g = self.cost.view().to_owned();
        for t in &self.terms {
            g.scaled_add(2.0 * self.lambda * t.scale * t.scale, &t.sandwich(plan));
        }
        g
    }

    fn curvature(&self, dir: ArrayView2<'_, f64>) -> f64 {
        self.lambda * self.terms.iter().map(|t| t.quadratic(dir)).sum::<f64>()
    }

    fn is_linear(&self) -> bool {
        self.lambda == 0.0 || self.terms.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop once the relative objective decrease of an iteration falls below this.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LaplacianSolution {
    pub coupling: Coupling,
    /// Objective after initialisation and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LaplacianSolution {
    pub fn objective(&self) -> f64 {
        *self.trace.last().expect("trace starts with the initial objective")
    }
}

/// Conditional gradient started from the unregularized EMD plan.
///
/// The linear minimization oracle is an exact transport solve on the current
/// gradient; the step size minimizes the quadratic objective along the segment
/// and is clipped to `[0, 1]`.
pub fn solve_laplacian_ot(
    problem: &RegularizedProblem,
    source: &[f64],
    target: &[f64],
    opts: SolverOptions,
) -> Result<LaplacianSolution> {
    let (init, _) = solve_emd(&problem.cost, source, target)?;
    let mut plan = init.plan().to_owned();
    let mut value = problem.objective(plan.view());
    let mut trace = vec![value];
    if problem.is_linear() {
        return Ok(LaplacianSolution {
            coupling: init,
            trace,
            iterations: 0,
            converged: true,
        });
    }

    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let grad = problem.gradient(plan.view());
        let vertex = transport_plan(grad.view(), source, target)?;
        let dir = &vertex - &plan;
        let slope = (&grad * &dir).sum();
        if slope >= -1e-14 * (value.abs() + 1.0) {
            converged = true;
            break;
        }
        let curv = problem.curvature(dir.view());
        let step = if curv > 0.0 { (-slope / (2.0 * curv)).min(1.0) } else { 1.0 };
        plan.scaled_add(step, &dir);
        let next = problem.objective(plan.view());
        if !next.is_finite() || next > value + 1e-9 * (value.abs() + 1e-12) {
            return Err(Error::Numerical(format!(
                "conditional gradient objective increased from {value} to {next}"
            )));
        }
        trace.push(next);
        let decrease = value - next;
        value = next;
        if decrease <= opts.tol * value.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    plan.mapv_inplace(|v| v.max(0.0));
    Ok(LaplacianSolution {
        coupling: Coupling::new(plan, source.to_vec(), target.to_vec()),
        trace,
        iterations,
        converged,
    })
}
