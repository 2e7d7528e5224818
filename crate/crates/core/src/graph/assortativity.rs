use super::AttributedGraph;
use crate::error::{Error, Result};

/// Attribute assortativity of the sensitive label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Assortativity {
    Coefficient(f64),
    /// Every unit of edge mass touches a single group, so `Σ a_s b_s = 1`
    /// and the coefficient has a zero denominator.
    Degenerate,
}

impl Assortativity {
    pub fn value(self) -> Option<f64> {
        match self {
            Assortativity::Coefficient(r) => Some(r),
            Assortativity::Degenerate => None,
        }
    }
}

/// Newman's attribute assortativity with edge weights as mixing mass.
pub fn assortativity(g: &AttributedGraph) -> Result<Assortativity> {
    let k = g.n_groups();
    let labels = g.labels();
    let adj = g.adjacency();
    let mut mixing = vec![vec![0.0f64; k]; k];
    for (u, row) in adj.outer_iter().enumerate() {
        let su = labels[u];
        for (v, &w) in row.iter().enumerate() {
            if w != 0.0 {
                mixing[su][labels[v]] += w;
            }
        }
    }

    // Unnormalized form: the row totals are summed in the same order as the
    // trace so that a graph without cross-group mass gives exactly 1.
    let row_totals: Vec<f64> = mixing.iter().map(|r| r.iter().sum()).collect();
    let total: f64 = row_totals.iter().sum();
    if total <= 0.0 {
        return Err(Error::UndefinedMetric("assortativity of a graph without edges".into()));
    }
    let col_totals: Vec<f64> = (0..k).map(|t| mixing.iter().map(|r| r[t]).sum()).collect();
    let trace: f64 = (0..k).map(|s| mixing[s][s]).sum();
    let ab: f64 = row_totals.iter().zip(&col_totals).map(|(a, b)| a * b).sum();
    let denom = total * total - ab;
    if denom.abs() <= f64::EPSILON * total * total {
        return Ok(Assortativity::Degenerate);
    }
    Ok(Assortativity::Coefficient((total * trace - ab) / denom))
}
