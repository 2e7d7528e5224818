//! Fairness and quality measures for edge predictions and node embeddings.

use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{assortativity, AttributedGraph};
use crate::parallel::Execution;
use crate::predict::{auc, train_logreg, LinkPrediction, LogRegOptions};

/// Ratio that is `None` when the denominator is zero.
fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiBer {
    /// `p1 / p0`; `None` when no same-group pair is predicted positive.
    pub di_xor: Option<f64>,
    /// `P(h=1 | S_u=0) / P(h=1 | S_u=1)`, conditioning on the first endpoint.
    pub di_s: Option<f64>,
    pub ber_xor: f64,
    /// Positive rate over cross-group pairs.
    pub p1: f64,
    /// Positive rate over same-group pairs.
    pub p0: f64,
}

/// Disparate impact and balanced error rate of binary pair predictions.
/// `di_s` needs binary sensitive values and is `None` otherwise.
pub fn di_ber(predictions: &[bool], s_u: &[usize], s_v: &[usize]) -> Result<DiBer> {
    if predictions.len() != s_u.len() || s_u.len() != s_v.len() {
        return Err(Error::ShapeMismatch("predictions and sensitive values differ in length".into()));
    }
    let mut count = [[0.0f64; 2]; 2];
    let mut first = [[0.0f64; 2]; 2];
    let binary = s_u.iter().chain(s_v).all(|&s| s < 2);
    for ((&h, &a), &b) in predictions.iter().zip(s_u).zip(s_v) {
        let cross = usize::from(a != b);
        count[cross][0] += 1.0;
        count[cross][1] += f64::from(u8::from(h));
        if binary {
            first[a][0] += 1.0;
            first[a][1] += f64::from(u8::from(h));
        }
    }
    if count[0][0] == 0.0 || count[1][0] == 0.0 {
        return Err(Error::UndefinedMetric("need both same-group and cross-group pairs".into()));
    }
    let p1 = count[1][1] / count[1][0];
    let p0 = count[0][1] / count[0][0];
    let di_s = if binary && first[0][0] > 0.0 && first[1][0] > 0.0 {
        ratio(first[0][1] / first[0][0], first[1][1] / first[1][0])
    } else {
        None
    };
    Ok(DiBer {
        di_xor: ratio(p1, p0),
        di_s,
        ber_xor: (p1 - p0 + 1.0) / 2.0,
        p1,
        p0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RbConfig {
    pub folds: usize,
    pub seed: u64,
    pub logreg: LogRegOptions,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for RbConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 0,
            logreg: LogRegOptions::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationBias {
    pub rb: f64,
    /// Mean AUC of each evaluated fold.
    pub fold_aucs: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Vec<usize> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..k {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next % folds;
            next += 1;
        }
    }
    fold_of
}

/// Cross-validated AUC of predicting the sensitive attribute from embedding
/// rows with logistic regression; one-vs-rest averaged for more than two
/// classes. Folds whose test part lacks a class are skipped with a warning.
pub fn representation_bias(z: ArrayView2<'_, f64>, labels: &[usize], cfg: &RbConfig) -> Result<RepresentationBias> {
    let n = labels.len();
    if z.nrows() != n {
        return Err(Error::ShapeMismatch(format!("{} embedding rows for {n} labels", z.nrows())));
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    if k < 2 || (0..k).filter(|c| labels.contains(c)).count() < 2 {
        return Err(Error::UndefinedMetric("representation bias needs at least two classes".into()));
    }
    if cfg.folds < 2 || n < cfg.folds {
        return Err(Error::InvalidArgument(format!("{} folds for {n} nodes", cfg.folds)));
    }
    let fold_of = stratified_folds(labels, cfg.folds, cfg.seed);
    let tasks: Vec<usize> = if k == 2 { vec![1] } else { (0..k).collect() };

    let per_fold = cfg.execution.try_map(cfg.folds, |fold| {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
        let xtr = z.select(Axis(0), &train);
        let xte = z.select(Axis(0), &test);
        let mut aucs = Vec::new();
        let mut warnings = Vec::new();
        for &class in &tasks {
            let ytr: Vec<bool> = train.iter().map(|&i| labels[i] == class).collect();
            let yte: Vec<bool> = test.iter().map(|&i| labels[i] == class).collect();
            let one_class = |y: &[bool]| y.iter().all(|&v| v) || y.iter().all(|&v| !v);
            if one_class(&ytr) || one_class(&yte) {
                warnings.push(format!("fold {fold}: class {class} missing from train or test part, skipped"));
                continue;
            }
            let clf = train_logreg(xtr.view(), &ytr, &cfg.logreg)?;
            aucs.push(auc(&clf.predict_proba(xte.view()), &yte)?);
        }
        let mean = (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64);
        Ok::<_, Error>((mean, warnings))
    })?;

    let mut fold_aucs = Vec::new();
    let mut warnings = Vec::new();
    for (mean, w) in per_fold {
        fold_aucs.extend(mean);
        warnings.extend(w);
    }
    if fold_aucs.is_empty() {
        return Err(Error::UndefinedMetric("every fold was skipped".into()));
    }
    for w in &warnings {
        log::warn!("representation bias: {w}");
    }
    Ok(RepresentationBias {
        rb: fold_aucs.iter().sum::<f64>() / fold_aucs.len() as f64,
        fold_aucs,
        warnings,
    })
}

/// `1 − (1/(|T|k)) Σ_e Σ_{e′ ∈ kNN(e)} |score(e) − score(e′)|` with
/// neighbors by Euclidean distance between feature rows, ties broken by index.
pub fn consistency(scores: &[f64], features: ArrayView2<'_, f64>, k: usize) -> Result<f64> {
    let t = scores.len();
    if features.nrows() != t {
        return Err(Error::ShapeMismatch(format!("{} feature rows for {t} scores", features.nrows())));
    }
    if k == 0 || t < k + 1 {
        return Err(Error::InvalidArgument(format!("consistency with k={k} needs at least {} pairs, got {t}", k + 1)));
    }
    let sq: Vec<f64> = features.rows().into_iter().map(|r| r.dot(&r)).collect();
    let gram = features.dot(&features.t());
    let mut total = 0.0;
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(t);
    for e in 0..t {
        dist.clear();
        dist.extend((0..t).filter(|&o| o != e).map(|o| ((sq[e] + sq[o] - 2.0 * gram[[e, o]]).max(0.0), o)));
        dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        total += dist[..k].iter().map(|&(_, o)| (scores[e] - scores[o]).abs()).sum::<f64>();
    }
    Ok(1.0 - total / (t * k) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub di_xor: Option<f64>,
    pub di_s: Option<f64>,
    pub ber_xor: f64,
    pub p1: f64,
    pub p0: f64,
    /// Both sensitive values cover half of the first and of the second endpoints, within 5%.
    pub a1_ok: bool,
    /// For each group, the within-group positive rate is at least the cross-group rate.
    pub a2_ok: bool,
    /// `di_xor ≤ di_s` (up to 1e-9), asserted only when both assumptions hold.
    pub holds: bool,
}

/// Every ordered pair `(u, v)` with `u ≠ v`.
pub fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).collect()
}

/// Empirical check of `DI(h, S⊕S′) ≤ DI(h, S)` on binary sensitive values.
pub fn check_theorem1(labels: &[usize], pairs: &[(usize, usize)], predictions: &[bool]) -> Result<Theorem1Report> {
    if labels.iter().any(|&s| s > 1) {
        return Err(Error::WrongArity {
            expected: "binary",
            found: labels.iter().max().map_or(0, |m| m + 1),
            hint: "a graph with two sensitive groups",
        });
    }
    let s_u: Vec<usize> = pairs.iter().map(|&(u, _)| labels[u]).collect();
    let s_v: Vec<usize> = pairs.iter().map(|&(_, v)| labels[v]).collect();
    let d = di_ber(predictions, &s_u, &s_v)?;

    let total = pairs.len() as f64;
    let share = |s: &[usize]| s.iter().filter(|&&x| x == 0).count() as f64 / total;
    let a1_ok = [share(&s_u), share(&s_v)].iter().all(|p| ((p - 0.5) * 2.0).abs() <= 0.05);

    let mut cell = [[(0.0f64, 0.0f64); 2]; 2];
    for ((&h, &a), &b) in predictions.iter().zip(&s_u).zip(&s_v) {
        cell[a][b].0 += 1.0;
        cell[a][b].1 += f64::from(u8::from(h));
    }
    let rate = |a: usize, b: usize| if cell[a][b].0 > 0.0 { cell[a][b].1 / cell[a][b].0 } else { 0.0 };
    let a2_ok = (0..2).all(|s| rate(s, 1 - s) <= rate(s, s));

    let inequality = match (d.di_xor, d.di_s) {
        (Some(x), Some(s)) => x <= s + 1e-9,
        // An undefined `di_s` has a zero denominator: the bound is vacuous.
        (_, None) => true,
        (None, Some(_)) => false,
    };
    Ok(Theorem1Report {
        di_xor: d.di_xor,
        di_s: d.di_s,
        ber_xor: d.ber_xor,
        p1: d.p1,
        p0: d.p0,
        a1_ok,
        a2_ok,
        holds: !(a1_ok && a2_ok) || inequality,
    })
}

/// `BER(h, S⊕S′) ≤ ½ − (p1/2)(1/τ − 1)` for a predictor with `DI(h, S) ≤ τ`.
pub fn check_corollary1(report: &Theorem1Report, tau: f64) -> Result<bool> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidArgument(format!("tau must lie in (0, 1], got {tau}")));
    }
    if let Some(di_s) = report.di_s {
        if di_s > tau + 1e-12 {
            return Err(Error::InvalidArgument(format!("measured DI {di_s} exceeds tau {tau}")));
        }
    }
    Ok(report.ber_xor <= 0.5 - report.p1 / 2.0 * (1.0 / tau - 1.0) + 1e-9)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub di_xor: Option<f64>,
    pub di_s: Option<f64>,
    pub ber_xor: f64,
    pub rb: f64,
    pub consistency: f64,
    pub assortativity: Option<f64>,
    pub link_auc: f64,
    pub p1: f64,
    pub p0: f64,
}

impl FairnessReport {
    pub const CSV_HEADER: &'static str = "di_xor,di_s,ber_xor,rb,consistency,assortativity,link_auc,p1,p0";

    pub fn fields(&self) -> [Option<f64>; 9] {
        [
            self.di_xor,
            self.di_s,
            Some(self.ber_xor),
            Some(self.rb),
            Some(self.consistency),
            self.assortativity,
            Some(self.link_auc),
            Some(self.p1),
            Some(self.p0),
        ]
    }

    /// Undefined values are left empty.
    pub fn csv_row(&self) -> String {
        self.fields()
            .iter()
            .map(|v| v.map_or_else(String::new, |x| x.to_string()))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub consistency_k: usize,
    /// Score threshold turning edge probabilities into predictions.
    pub threshold: f64,
    pub rb: RbConfig,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            consistency_k: 10,
            threshold: 0.5,
            rb: RbConfig::default(),
        }
    }
}

/// All measures for one link-prediction run on graph `g`.
pub fn evaluate(g: &AttributedGraph, run: &LinkPrediction, cfg: &MetricConfig) -> Result<FairnessReport> {
    let predictions: Vec<bool> = run.scores.iter().map(|&s| s >= cfg.threshold).collect();
    let d = di_ber(&predictions, &run.test.s_u, &run.test.s_v)?;
    let rb = representation_bias(run.embedding.view(), g.labels(), &cfg.rb)?;
    let cons = consistency(&run.scores, run.test.features.view(), cfg.consistency_k)?;
    let assort = assortativity(&run.embedded_graph).ok().and_then(|a| a.value());
    Ok(FairnessReport {
        di_xor: d.di_xor,
        di_s: d.di_s,
        ber_xor: d.ber_xor,
        rb: rb.rb,
        consistency: cons,
        assortativity: assort,
        link_auc: run.auc,
        p1: d.p1,
        p0: d.p0,
    })
}
