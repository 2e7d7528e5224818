mod common;

use fairrepair::graph::{builtin, generate_sbm};
use fairrepair::metrics::{
    check_corollary1, check_theorem1, consistency, di_ber, ordered_pairs, representation_bias, FairnessReport, RbConfig,
};
use fairrepair::Error;
use ndarray::{Array2, ArrayView2};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn constant_predictor_is_fair() {
    let d = di_ber(&[true; 4], &[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
    assert_eq!((d.p1, d.p0, d.di_xor, d.ber_xor), (1.0, 1.0, Some(1.0), 0.5));
    assert_eq!(d.di_s, Some(1.0));
}

#[test]
fn same_group_predictor_is_maximally_unfair() {
    let s_u = [0, 0, 1, 1];
    let s_v = [0, 1, 0, 1];
    let h: Vec<bool> = s_u.iter().zip(&s_v).map(|(a, b)| a == b).collect();
    let d = di_ber(&h, &s_u, &s_v).unwrap();
    assert_eq!((d.p1, d.p0, d.di_xor, d.ber_xor), (0.0, 1.0, Some(0.0), 0.0));
}

#[test]
fn six_pair_count() {
    let h = [true, false, true, true, true, false];
    let s_u = [0, 1, 0, 0, 1, 0];
    let s_v = [1, 0, 1, 0, 1, 0];
    let d = di_ber(&h, &s_u, &s_v).unwrap();
    assert!((d.p1 - 2.0 / 3.0).abs() < 1e-15 && (d.p0 - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(d.di_xor, Some(1.0));
    assert_eq!(d.ber_xor, 0.5);
}

#[test]
fn undefined_cases() {
    let d = di_ber(&[false, true], &[0, 0], &[0, 1]).unwrap();
    assert_eq!(d.di_xor, None);
    assert!(matches!(di_ber(&[true, false], &[0, 1], &[0, 1]), Err(Error::UndefinedMetric(_))));
    assert!(di_ber(&[true], &[0, 1], &[0, 1]).is_err());
}

proptest! {
    #[test]
    fn di_ber_is_order_invariant(rows in prop::collection::vec((any::<bool>(), 0usize..2, 0usize..2), 4..60), seed in any::<u64>()) {
        let h: Vec<bool> = rows.iter().map(|r| r.0).collect();
        let a: Vec<usize> = rows.iter().map(|r| r.1).collect();
        let b: Vec<usize> = rows.iter().map(|r| r.2).collect();
        prop_assume!(a.iter().zip(&b).any(|(x, y)| x == y) && a.iter().zip(&b).any(|(x, y)| x != y));
        let base = di_ber(&h, &a, &b).unwrap();
        let mut perm: Vec<usize> = (0..rows.len()).collect();
        perm.shuffle(&mut common::rng(seed));
        let pick = |v: &[usize]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let hp: Vec<bool> = perm.iter().map(|&i| h[i]).collect();
        let shuffled = di_ber(&hp, &pick(&a), &pick(&b)).unwrap();
        prop_assert_eq!(base, shuffled);
    }
}

#[test]
fn one_hot_embedding_has_full_bias() {
    let labels: Vec<usize> = (0..60).map(|i| i % 3).collect();
    let z = Array2::from_shape_fn((60, 3), |(i, j)| if labels[i] == j { 1.0 } else { 0.0 });
    let rb = representation_bias(z.view(), &labels, &RbConfig::default()).unwrap();
    assert!(rb.rb >= 0.99, "{}", rb.rb);
    let binary: Vec<usize> = (0..60).map(|i| i % 2).collect();
    let z = Array2::from_shape_fn((60, 2), |(i, j)| if binary[i] == j { 1.0 } else { 0.0 });
    assert!(representation_bias(z.view(), &binary, &RbConfig::default()).unwrap().rb >= 0.99);
}

#[test]
fn random_labels_have_chance_bias() {
    let mut means = Vec::new();
    for seed in 0..20 {
        let mut rng = common::rng(seed);
        let z = common::random_matrix(&mut rng, 150, 8);
        let labels: Vec<usize> = (0..150).map(|_| rng.random_range(0..2)).collect();
        let cfg = RbConfig { seed, ..RbConfig::default() };
        means.push(representation_bias(z.view(), &labels, &cfg).unwrap().rb);
    }
    let (mean, _) = common::mean_std(&means);
    assert!((0.4..=0.6).contains(&mean), "{mean}");
}

#[test]
fn shuffled_labels_concentrate_at_one_half() {
    let g = generate_sbm(&builtin("G1", 0).unwrap()).unwrap();
    let z = fairrepair::embedding::spectral_embed(&g, 8).unwrap();
    let mut values = Vec::new();
    for seed in 0..20 {
        let mut labels = g.labels().to_vec();
        labels.shuffle(&mut common::rng(seed));
        values.push(representation_bias(z.view(), &labels, &RbConfig::default()).unwrap().rb);
    }
    let (mean, _) = common::mean_std(&values);
    assert!((0.45..=0.55).contains(&mean), "{mean}");
}

#[test]
fn representation_bias_validates_input() {
    let z = Array2::<f64>::zeros((5, 2));
    assert!(representation_bias(z.view(), &[0; 5], &RbConfig::default()).is_err());
    assert!(representation_bias(z.view(), &[0, 1, 0, 1, 0], &RbConfig::default()).is_err());
    // Three members of class 1 cannot reach every one of 3 folds' train and test parts twice over.
    let labels = [0, 0, 0, 0, 0, 0, 0, 0, 1, 1];
    let z = Array2::from_shape_fn((10, 1), |(i, _)| labels[i] as f64);
    let rb = representation_bias(z.view(), &labels, &RbConfig { folds: 5, ..RbConfig::default() }).unwrap();
    assert_eq!(rb.fold_aucs.len(), 2);
    assert_eq!(rb.warnings.len(), 3);
}

fn brute_consistency(scores: &[f64], x: ArrayView2<f64>, k: usize) -> f64 {
    let t = scores.len();
    let mut total = 0.0;
    for e in 0..t {
        let mut others: Vec<(f64, usize)> =
            (0..t).filter(|&o| o != e).map(|o| ((&x.row(e) - &x.row(o)).mapv(|v| v * v).sum(), o)).collect();
        others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        total += others[..k].iter().map(|&(_, o)| (scores[e] - scores[o]).abs()).sum::<f64>();
    }
    1.0 - total / (t * k) as f64
}

#[test]
fn consistency_of_constant_scores_is_one() {
    let x = common::random_matrix(&mut common::rng(0), 30, 3);
    assert_eq!(consistency(&[0.3; 30], x.view(), 10).unwrap(), 1.0);
    assert!(consistency(&[0.3; 10], x.slice(ndarray::s![..10, ..]), 10).is_err());
}

#[test]
fn consistency_of_uniform_scores_is_two_thirds() {
    let mut rng = common::rng(1);
    let scores: Vec<f64> = (0..1000).map(|_| rng.random()).collect();
    let x = Array2::<f64>::zeros((1000, 2));
    let c = consistency(&scores, x.view(), 10).unwrap();
    assert!((c - 2.0 / 3.0).abs() <= 0.05, "{c}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn consistency_matches_full_sort(seed in any::<u64>(), t in 11usize..40, grid in any::<bool>()) {
        let mut rng = common::rng(seed);
        let mut x = common::random_matrix(&mut rng, t, 3);
        if grid {
            // Coarse coordinates create distance ties.
            x.mapv_inplace(|v| (v * 3.0).floor());
        }
        let scores: Vec<f64> = (0..t).map(|_| rng.random()).collect();
        let got = consistency(&scores, x.view(), 10).unwrap();
        prop_assert!((got - brute_consistency(&scores, x.view(), 10)).abs() < 1e-12);
    }
}

#[test]
fn theorem_holds_for_heuristics_on_g1() {
    let g = generate_sbm(&builtin("G1", 0).unwrap()).unwrap();
    let pairs = ordered_pairs(g.n_nodes());
    for (name, h) in common::heuristic_predictions(&g, &pairs) {
        let r = check_theorem1(g.labels(), &pairs, &h).unwrap();
        assert!(r.a1_ok, "{name}");
        if name == "common_neighbors" {
            assert!(r.a2_ok);
        }
        assert!(r.holds, "{name}: {r:?}");
        if r.a1_ok && r.a2_ok {
            let di_s = r.di_s.unwrap();
            let mut report = r;
            let tau = if di_s <= 1.0 {
                di_s
            } else {
                // Swapping the group names inverts `di_s` and leaves the XOR quantities alone.
                report.di_s = Some(1.0 / di_s);
                1.0 / di_s
            };
            assert!(check_corollary1(&report, tau).unwrap(), "{name}: {r:?}");
        }
    }
}

#[test]
fn theorem_gates() {
    let g = generate_sbm(&builtin("G1", 1).unwrap()).unwrap();
    let pairs = ordered_pairs(g.n_nodes());
    let labels = g.labels();
    let always = vec![true; pairs.len()];
    let r = check_theorem1(labels, &pairs, &always).unwrap();
    assert_eq!((r.di_xor, r.di_s), (Some(1.0), Some(1.0)));
    assert!(r.holds && r.a1_ok && r.a2_ok);
    assert!(check_corollary1(&r, 1.0).unwrap());

    let cross: Vec<bool> = pairs.iter().map(|&(u, v)| labels[u] != labels[v]).collect();
    let r = check_theorem1(labels, &pairs, &cross).unwrap();
    assert!(!r.a2_ok);
    assert!(r.holds);

    let uneven = vec![0, 0, 0, 0, 1, 1];
    let pairs6 = ordered_pairs(6);
    let r = check_theorem1(&uneven, &pairs6, &vec![true; pairs6.len()]).unwrap();
    assert!(!r.a1_ok);
    assert!(check_theorem1(&[0, 1, 2], &ordered_pairs(3), &[true; 6]).is_err());
}

#[test]
fn corollary_for_a_nearly_silent_group() {
    // Positive only inside group 1, plus one pair inside group 0: DI(h, S) is tiny.
    let labels: Vec<usize> = (0..20).map(|i| i / 10).collect();
    let pairs = ordered_pairs(20);
    let h: Vec<bool> = pairs.iter().map(|&(u, v)| (labels[u] == 1 && labels[v] == 1) || (u, v) == (0, 1)).collect();
    let r = check_theorem1(&labels, &pairs, &h).unwrap();
    let di_s = r.di_s.unwrap();
    assert!(di_s < 0.02 && di_s > 0.0);
    assert!(r.a1_ok && r.a2_ok && r.holds);
    assert!(check_corollary1(&r, di_s).unwrap());
    assert!(check_corollary1(&r, 0.0).is_err());
    assert!(check_corollary1(&r, 1.5).is_err());
    assert!(check_corollary1(&r, di_s / 2.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn theorem_holds_on_random_balanced_sbms(seed in any::<u64>(), p_in in 0.05f64..0.4, p_out in 0.0f64..0.05) {
        let spec = fairrepair::SbmSpec {
            block_sizes: vec![20, 20],
            probabilities: vec![vec![p_in, p_out], vec![p_out, p_in]],
            label_mode: fairrepair::LabelMode::Cluster,
            n_labels: 2,
            label_noise: 0.1,
            seed,
        };
        let g = generate_sbm(&spec).unwrap();
        let pairs = ordered_pairs(g.n_nodes());
        for (name, h) in common::heuristic_predictions(&g, &pairs) {
            if let Ok(r) = check_theorem1(g.labels(), &pairs, &h) {
                prop_assert!(r.holds, "{}: {:?}", name, r);
            }
        }
    }
}

#[test]
fn report_serialization() {
    let r = FairnessReport {
        di_xor: Some(0.5),
        di_s: None,
        ber_xor: 0.25,
        rb: 0.9,
        consistency: 0.8,
        assortativity: Some(0.7),
        link_auc: 0.75,
        p1: 0.2,
        p0: 0.4,
    };
    assert_eq!(r.csv_row(), "0.5,,0.25,0.9,0.8,0.7,0.75,0.2,0.4");
    assert_eq!(FairnessReport::CSV_HEADER.split(',').count(), 9);
    let back: FairnessReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
    assert_eq!(back, r);
}
