//! Exact transportation solver: primal network simplex on the bipartite
//! transport network.
//!
//! The basis is a spanning tree rooted at an artificial node with one big-M
//! artificial arc per real node. Leaving arcs follow Cunningham's rule, which
//! keeps the tree strongly feasible (every zero-flow tree arc points away from
//! the root) and so rules out cycling on the heavily degenerate assignment-like
//! problems that uniform marginals produce.

use ndarray::{Array2, ArrayView2};

use super::{Coupling, CostMatrix};
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

struct NetworkSimplex<'a> {
    m: usize,
    n: usize,
    root: usize,
    cost: &'a [f64],
    art_cost: f64,
    /// Artificial arc of node `v` points `v -> root` when true.
    art_up: Vec<bool>,
    flow: Vec<f64>,
    tree: Vec<usize>,
    tree_pos: Vec<usize>,
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<f64>,
    adj_start: Vec<usize>,
    adj: Vec<(usize, usize)>,
    stack: Vec<usize>,
}

impl<'a> NetworkSimplex<'a> {
    fn new(cost: &'a [f64], m: usize, n: usize, supply: &[f64], demand: &[f64]) -> Self {
        let nodes = m + n + 1;
        let real = m * n;
        let max_abs = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let art_cost = (max_abs + 1.0) * nodes as f64;
        let mut art_up = vec![false; m + n];
        let mut flow = vec![0.0; real + m + n];
        for (i, &s) in supply.iter().enumerate() {
            art_up[i] = s > 0.0;
            flow[real + i] = s;
        }
        for (j, &d) in demand.iter().enumerate() {
            flow[real + m + j] = d;
        }
        let tree: Vec<usize> = (real..real + m + n).collect();
        let mut tree_pos = vec![NONE; real + m + n];
        for (p, &a) in tree.iter().enumerate() {
            tree_pos[a] = p;
        }
        let mut ns = Self {
            m,
            n,
            root: m + n,
            cost,
            art_cost,
            art_up,
            flow,
            tree,
            tree_pos,
            parent: vec![NONE; nodes],
            parent_arc: vec![NONE; nodes],
            depth: vec![0; nodes],
            potential: vec![0.0; nodes],
            adj_start: vec![0; nodes + 1],
            adj: vec![(0, 0); 2 * (nodes - 1)],
            stack: Vec::with_capacity(nodes),
        };
        ns.rebuild();
        ns
    }

    fn real_arcs(&self) -> usize {
        self.m * self.n
    }

    fn tail(&self, a: usize) -> usize {
        if a < self.real_arcs() {
            a / self.n
        } else {
            let v = a - self.real_arcs();
            if self.art_up[v] {
                v
            } else {
                self.root
            }
        }
    }

    fn head(&self, a: usize) -> usize {
        if a < self.real_arcs() {
            self.m + a % self.n
        } else {
            let v = a - self.real_arcs();
            if self.art_up[v] {
                self.root
            } else {
                v
            }
        }
    }

    fn arc_cost(&self, a: usize) -> f64 {
        if a < self.real_arcs() {
            self.cost[a]
        } else {
            self.art_cost
        }
    }

    /// Recompute parent pointers, depths and potentials from the tree arc set.
    fn rebuild(&mut self) {
        let nodes = self.root + 1;
        self.adj_start.iter_mut().for_each(|c| *c = 0);
        for idx in 0..self.tree.len() {
            let (t, h) = (self.tail(self.tree[idx]), self.head(self.tree[idx]));
            self.adj_start[t + 1] += 1;
            self.adj_start[h + 1] += 1;
        }
        for v in 0..nodes {
            self.adj_start[v + 1] += self.adj_start[v];
        }
        let mut fill = self.adj_start.clone();
        for idx in 0..self.tree.len() {
            let a = self.tree[idx];
            let (t, h) = (self.tail(a), self.head(a));
            self.adj[fill[t]] = (h, a);
            fill[t] += 1;
            self.adj[fill[h]] = (t, a);
            fill[h] += 1;
        }

        self.parent[self.root] = self.root;
        self.parent_arc[self.root] = NONE;
        self.depth[self.root] = 0;
        self.potential[self.root] = 0.0;
        self.stack.clear();
        self.stack.push(self.root);
        while let Some(v) = self.stack.pop() {
            for k in self.adj_start[v]..self.adj_start[v + 1] {
                let (w, a) = self.adj[k];
                if a == self.parent_arc[v] {
                    continue;
                }
                self.parent[w] = v;
                self.parent_arc[w] = a;
                self.depth[w] = self.depth[v] + 1;
                let c = self.arc_cost(a);
                self.potential[w] = if self.tail(a) == w {
                    self.potential[v] + c
                } else {
                    self.potential[v] - c
                };
                self.stack.push(w);
            }
        }
    }

    fn reduced_cost(&self, a: usize) -> f64 {
        self.arc_cost(a) - self.potential[self.tail(a)] + self.potential[self.head(a)]
    }

    /// Block pricing over the real arcs, resuming where the last search stopped.
    fn find_entering(&self, start: &mut usize, block: usize, eps: f64) -> Option<usize> {
        let total = self.real_arcs();
        let mut best = NONE;
        let mut best_rc = -eps;
        let mut a = *start;
        for seen in 1..=total {
            let rc = self.reduced_cost(a);
            if rc < best_rc {
                best_rc = rc;
                best = a;
            }
            a += 1;
            if a == total {
                a = 0;
            }
            if best != NONE && seen % block == 0 {
                break;
            }
        }
        *start = a;
        (best != NONE).then_some(best)
    }

    fn pivot(&mut self, entering: usize, flow_tol: f64) -> Result<()> {
        let (t, h) = (self.tail(entering), self.head(entering));
        let (mut a, mut b) = (t, h);
        while a != b {
            if self.depth[a] > self.depth[b] {
                a = self.parent[a];
            } else if self.depth[b] > self.depth[a] {
                b = self.parent[b];
            } else {
                a = self.parent[a];
                b = self.parent[b];
            }
        }
        let apex = a;

        // Cycle oriented along the entering arc, listed from the apex:
        // apex -> ... -> t, then (t, h), then h -> ... -> apex.
        let mut cycle: Vec<(usize, bool)> = Vec::new();
        let mut x = t;
        while x != apex {
            let arc = self.parent_arc[x];
            cycle.push((arc, self.head(arc) == x));
            x = self.parent[x];
        }
        cycle.reverse();
        cycle.push((entering, true));
        let mut x = h;
        while x != apex {
            let arc = self.parent_arc[x];
            cycle.push((arc, self.tail(arc) == x));
            x = self.parent[x];
        }

        let delta = cycle
            .iter()
            .filter(|(_, fwd)| !fwd)
            .map(|&(arc, _)| self.flow[arc])
            .fold(f64::INFINITY, f64::min);
        if !delta.is_finite() {
            return Err(Error::Numerical("unbounded transport subproblem".into()));
        }
        let leaving = cycle
            .iter()
            .rev()
            .find(|&&(arc, fwd)| !fwd && self.flow[arc] <= delta + flow_tol)
            .map(|&(arc, _)| arc)
            .expect("a backward arc attains the minimum");

        if delta > 0.0 {
            for &(arc, fwd) in &cycle {
                if fwd {
                    self.flow[arc] += delta;
                } else {
                    self.flow[arc] -= delta;
                }
            }
        }
        self.flow[leaving] = 0.0;

        let pos = self.tree_pos[leaving];
        self.tree[pos] = entering;
        self.tree_pos[entering] = pos;
        self.tree_pos[leaving] = NONE;
        self.rebuild();
        Ok(())
    }
}

/// Optimal plan for arbitrary finite costs (negative entries allowed, as
/// needed for the conditional-gradient oracle).
///
/// Marginals must be non-negative; the target is rescaled to the source mass.
pub(crate) fn transport_plan(cost: ArrayView2<'_, f64>, source: &[f64], target: &[f64]) -> Result<Array2<f64>> {
    let (m, n) = cost.dim();
    if source.len() != m || target.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "cost is {m}x{n} but marginals have {} and {} entries",
            source.len(),
            target.len()
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::ShapeMismatch("empty transport problem".into()));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("non-finite transport cost".into()));
    }
    if source.iter().chain(target).any(|&w| !(w.is_finite() && w >= 0.0)) {
        return Err(Error::InvalidArgument("marginals must be finite and non-negative".into()));
    }

    // Uniform marginals are solved on integer masses (n per source, m per
    // sink) so every pivot is exact.
    let uniform = source.iter().all(|&w| w == source[0]) && target.iter().all(|&w| w == target[0]);
    let (supply, demand, scale): (Vec<f64>, Vec<f64>, f64) = if uniform {
        let total: f64 = source.iter().sum();
        (vec![n as f64; m], vec![m as f64; n], total / (m * n) as f64)
    } else {
        let (sa, sb): (f64, f64) = (source.iter().sum(), target.iter().sum());
        if sb <= 0.0 {
            return Err(Error::InvalidArgument("target marginal has no mass".into()));
        }
        (source.to_vec(), target.iter().map(|w| w * sa / sb).collect(), 1.0)
    };
    let total_mass: f64 = supply.iter().sum();
    let flow_tol = if uniform { 0.0 } else { 1e-13 * total_mass.max(1.0) };

    let flat: Vec<f64> = cost.iter().copied().collect();
    let mut ns = NetworkSimplex::new(&flat, m, n, &supply, &demand);
    let max_abs = flat.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let eps = 1e-11 * (max_abs + 1.0);
    let block = ((m * n) as f64).sqrt().ceil().max(10.0) as usize;
    let max_pivots = 50 * (m * n + m + n) + 10_000;
    let mut start = 0;
    let mut pivots = 0;
    while let Some(entering) = ns.find_entering(&mut start, block, eps) {
        ns.pivot(entering, flow_tol)?;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Numerical(format!(
                "network simplex exceeded {max_pivots} pivots"
            )));
        }
    }

    let real = m * n;
    let leftover: f64 = ns.flow[real..].iter().sum();
    if leftover > 1e-9 * total_mass.max(1.0) {
        return Err(Error::Numerical(format!(
            "transport problem infeasible, {leftover} mass left on artificial arcs"
        )));
    }
    Ok(Array2::from_shape_fn((m, n), |(i, j)| ns.flow[i * n + j].max(0.0) * scale))
}

fn check_probability(name: &str, w: &[f64]) -> Result<()> {
    if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} marginal has negative or non-finite entries")));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("{name} marginal sums to {s}, not 1")));
    }
    Ok(())
}

/// Exact optimal transport between two probability vectors.
///
/// Returns the optimal coupling and `<γ, M>`.
pub fn solve_emd(cost: &CostMatrix, source: &[f64], target: &[f64]) -> Result<(Coupling, f64)> {
    check_probability("source", source)?;
    check_probability("target", target)?;
    let plan = transport_plan(cost.view(), source, target)?;
    let objective = (&plan * &cost.view()).sum();
    Ok((Coupling::new(plan, source.to_vec(), target.to_vec()), objective))
}
