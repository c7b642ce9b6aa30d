//! Metric, weight and loss checks against independent recomputations.
//!
//! Every oracle here works from raw data (label pairs, plain vectors) and
//! never goes through the library's own aggregation code.

#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wba_core::*;

fn labels(c: usize) -> Vec<String> {
    (0..c).map(|i| format!("c{i}")).collect()
}

/// Random (true, predicted) pairs; every class appears in the truth.
fn random_pairs(rng: &mut impl Rng, c: usize, n: usize) -> Vec<(usize, usize)> {
    let n = n.max(c);
    let mut pairs: Vec<(usize, usize)> = (0..c).map(|t| (t, rng.gen_range(0..c))).collect();
    for _ in c..n {
        pairs.push((rng.gen_range(0..c), rng.gen_range(0..c)));
    }
    pairs
}

fn random_simplex(rng: &mut impl Rng, c: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..c).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

struct Brute {
    c: usize,
    pairs: Vec<(usize, usize)>,
}

impl Brute {
    fn count(&self, f: impl Fn(usize, usize) -> bool) -> f64 {
        self.pairs.iter().filter(|&&(t, p)| f(t, p)).count() as f64
    }
    fn accuracy(&self) -> f64 {
        self.count(|t, p| t == p) / self.pairs.len() as f64
    }
    fn recall(&self, i: usize) -> f64 {
        self.count(|t, p| t == i && p == i) / self.count(|t, _| t == i)
    }
    fn precision(&self, i: usize) -> f64 {
        let predicted = self.count(|_, p| p == i);
        if predicted == 0.0 {
            0.0
        } else {
            self.count(|t, p| t == i && p == i) / predicted
        }
    }
    fn f1(&self, i: usize) -> f64 {
        let (p, r) = (self.precision(i), self.recall(i));
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
    fn balanced(&self) -> f64 {
        (0..self.c).map(|i| self.recall(i)).sum::<f64>() / self.c as f64
    }
    fn weighted(&self, w: &[f64], m: impl Fn(usize) -> f64) -> f64 {
        (0..self.c).map(|i| w[i] * m(i)).sum()
    }
}

#[test]
fn metrics_match_brute_force_on_label_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..600 {
        let c = rng.gen_range(1..=5);
        let n = rng.gen_range(1..=50);
        let pairs = random_pairs(&mut rng, c, n);
        let cm = ConfusionMatrix::from_indexed_pairs(labels(c), pairs.iter().copied()).unwrap();
        let brute = Brute { c, pairs };
        let w = WeightVector::new(labels(c), random_simplex(&mut rng, c)).unwrap();
        let ww = w.weights();

        let tol = 1e-12;
        assert!((accuracy(&cm).unwrap().value - brute.accuracy()).abs() <= tol);
        assert!((balanced_accuracy(&cm).unwrap().value - brute.balanced()).abs() <= tol);
        assert!((wba(&cm, &w).unwrap().value - brute.weighted(ww, |i| brute.recall(i))).abs() <= tol);
        let p = weighted_macro(&cm, &w, MacroKind::Precision).unwrap().value;
        assert!((p - brute.weighted(ww, |i| brute.precision(i))).abs() <= tol);
        let r = weighted_macro(&cm, &w, MacroKind::Recall).unwrap().value;
        assert!((r - brute.weighted(ww, |i| brute.recall(i))).abs() <= tol);
        let f = weighted_macro(&cm, &w, MacroKind::F1).unwrap().value;
        assert!((f - brute.weighted(ww, |i| brute.f1(i))).abs() <= tol);

        let stats = per_class_accuracy(&cm).unwrap();
        for (i, s) in stats.classes.iter().enumerate() {
            assert!((s.accuracy.unwrap() - brute.recall(i)).abs() <= tol);
            assert!((s.frequency - brute.count(|t, _| t == i) / brute.pairs.len() as f64).abs() <= tol);
        }
    }
}

#[test]
fn weight_identities_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let c = rng.gen_range(1..=6);
        let n = rng.gen_range(c..=100);
        let pairs = random_pairs(&mut rng, c, n);
        let cm = ConfusionMatrix::from_indexed_pairs(labels(c), pairs).unwrap();

        let uniform = WeightVector::uniform(labels(c)).unwrap();
        assert_eq!(wba(&cm, &uniform).unwrap().value, balanced_accuracy(&cm).unwrap().value);

        let freq = frequency_weights(&cm).unwrap();
        assert!((wba(&cm, &freq).unwrap().value - accuracy(&cm).unwrap().value).abs() <= 1e-12);

        let w = WeightVector::new(labels(c), random_simplex(&mut rng, c)).unwrap();
        assert_eq!(
            weighted_macro(&cm, &w, MacroKind::Recall).unwrap().value,
            wba(&cm, &w).unwrap().value
        );
    }
}

fn assert_simplex(w: &WeightVector) {
    assert_eq!(w.validate(), Ok(()));
    assert!((w.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
}

#[test]
fn weight_constructors_match_direct_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let c = rng.gen_range(2..=8);
        let ls = labels(c);

        // user: w_i = u_i
        let u = random_simplex(&mut rng, c);
        let map: BTreeMap<String, f64> = ls.iter().cloned().zip(u.iter().copied()).collect();
        let w = user_weights(&ls, &map).unwrap();
        assert_simplex(&w);
        for i in 0..c {
            assert!((w.weights()[i] - u[i]).abs() <= 1e-12);
        }

        // rarity: w_i = (1/f_i) / Σ_j (1/f_j)
        let f = random_simplex(&mut rng, c);
        let w = rarity_weights(&ls, &f).unwrap();
        assert_simplex(&w);
        let inv: Vec<f64> = f.iter().map(|x| 1.0 / x).collect();
        let total: f64 = inv.iter().sum();
        for i in 0..c {
            assert!((w.weights()[i] - inv[i] / total).abs() <= 1e-12);
        }

        // composite: normalized product of columns
        let m = rng.gen_range(2..=4);
        let cols: Vec<Vec<f64>> = (0..m).map(|_| random_simplex(&mut rng, c)).collect();
        let criteria: Vec<Criterion> = cols
            .iter()
            .enumerate()
            .map(|(j, col)| Criterion { name: format!("m{j}"), weights: col.clone() })
            .collect();
        let w = composite_weights(&ls, &criteria).unwrap();
        assert_simplex(&w);
        let prod: Vec<f64> = (0..c).map(|i| cols.iter().map(|col| col[i]).product()).collect();
        let total: f64 = prod.iter().sum();
        for i in 0..c {
            assert!((w.weights()[i] - prod[i] / total).abs() <= 1e-12);
        }

        // partial fill
        let k = rng.gen_range(0..c);
        let budget = rng.gen_range(0.0..1.0);
        let part: Vec<f64> = random_simplex(&mut rng, k.max(1)).iter().map(|x| x * budget).collect();
        let spec: BTreeMap<String, f64> = ls[..k].iter().cloned().zip(part.iter().copied()).collect();
        let given: f64 = spec.values().sum();
        let rest = 1.0 - given;

        let w = partial_fill(&ls, &spec, FillPolicy::Even, None).unwrap();
        assert_simplex(&w);
        for i in 0..c {
            let expected = if i < k { part[i] } else { rest / (c - k) as f64 };
            assert!((w.weights()[i] - expected).abs() <= 1e-12);
        }

        let freqs = random_simplex(&mut rng, c);
        let w = partial_fill(&ls, &spec, FillPolicy::Rarity, Some(&freqs)).unwrap();
        assert_simplex(&w);
        let inv_open: f64 = (k..c).map(|i| 1.0 / freqs[i]).sum();
        for i in 0..c {
            let expected = if i < k { part[i] } else { rest * (1.0 / freqs[i]) / inv_open };
            assert!((w.weights()[i] - expected).abs() <= 1e-12);
        }
    }
}

/// Plain mean cross-entropy, written out independently.
fn mean_cross_entropy(logits: &[f64], targets: &[usize], c: usize) -> f64 {
    let mut total = 0.0;
    for (b, &y) in targets.iter().enumerate() {
        let row = &logits[b * c..(b + 1) * c];
        let denom: f64 = row.iter().map(|z| z.exp()).sum();
        total += -(row[y].exp() / denom).ln();
    }
    total / targets.len() as f64
}

fn random_batch(rng: &mut impl Rng, b: usize, c: usize) -> (Vec<f64>, Vec<usize>) {
    let logits = (0..b * c).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let targets = (0..b).map(|_| rng.gen_range(0..c)).collect();
    (logits, targets)
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let b = rng.gen_range(1..=4);
        let c = rng.gen_range(2..=5);
        let (logits, targets) = random_batch(&mut rng, b, c);
        let w = WeightVector::new(labels(c), random_simplex(&mut rng, c)).unwrap();
        let batch = LogitBatch::new(logits.clone(), targets.clone(), &w).unwrap();
        let grad = weighted_nll_grad(&batch).unwrap();
        let numeric: Vec<f64> = (0..logits.len())
            .map(|k| {
                let mut up = logits.clone();
                up[k] += h;
                let mut down = logits.clone();
                down[k] -= h;
                let lu = weighted_nll(&LogitBatch::new(up, targets.clone(), &w).unwrap()).unwrap();
                let ld = weighted_nll(&LogitBatch::new(down, targets.clone(), &w).unwrap()).unwrap();
                (lu - ld) / (2.0 * h)
            })
            .collect();
        let diff: f64 = grad.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = grad.iter().map(|a| a * a).sum::<f64>().sqrt().max(numeric.iter().map(|n| n * n).sum::<f64>().sqrt());
        let rel = diff / scale.max(1e-12);
        worst = worst.max(rel);
        for row in grad.chunks(c) {
            assert!(row.iter().sum::<f64>().abs() < 1e-12);
        }
    }
    assert!(worst <= 1e-6, "worst relative gradient error {worst}");
}

#[test]
fn uniform_weights_reduce_to_mean_cross_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let b = rng.gen_range(1..=6);
        let c = rng.gen_range(2..=5);
        let (logits, targets) = random_batch(&mut rng, b, c);
        let w = WeightVector::uniform(labels(c)).unwrap();
        let loss = weighted_nll(&LogitBatch::new(logits.clone(), targets.clone(), &w).unwrap()).unwrap();
        assert!((loss - mean_cross_entropy(&logits, &targets, c)).abs() <= 1e-12);
    }
}
