#![allow(dead_code)]

use acdc_core::{Dataset, FeatureColumn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small mixed-type dataset with ties and missing cells; both classes are
/// always present.
pub fn random_dataset(seed: u64, max_rows: usize, max_features: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(10..=max_rows);
    let n_feat = rng.random_range(1..=max_features);
    let rate = rng.random_range(0.1..0.5);
    let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(rate))).collect();
    labels[0] = 1;
    labels[1] = 0;
    let mut cols = Vec::new();
    for j in 0..n_feat {
        let missing = rng.random_range(0.0..0.15);
        if rng.random_bool(0.25) {
            let levels = ["a", "b", "c", "d"];
            let k = rng.random_range(2..=4);
            let cells: Vec<Option<&str>> = (0..n)
                .map(|_| (!rng.random_bool(missing)).then(|| levels[rng.random_range(0..k)]))
                .collect();
            cols.push(FeatureColumn::categorical(format!("c{j}"), &cells));
        } else {
            // coarse grid so thresholds collide and counts tie
            let shift = rng.random_range(0.0..2.0);
            let cells = labels
                .iter()
                .map(|&y| {
                    (!rng.random_bool(missing)).then(|| {
                        let v: f64 = rng.random_range(0.0..4.0) + shift * f64::from(y);
                        (v * 4.0).round() / 4.0
                    })
                })
                .collect();
            cols.push(FeatureColumn::numeric(format!("x{j}"), cells).unwrap());
        }
    }
    Dataset::new(cols, labels).unwrap()
}

/// Index of the first minimum, with `tol` slack for ties.
pub fn argmin_first(values: &[f64], tol: f64) -> Option<usize> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    values.iter().position(|&v| v <= min + tol)
}

/// Index of the first maximum, with `tol` slack for ties.
pub fn argmax_first(values: &[f64], tol: f64) -> Option<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v >= max - tol)
}

/// Weighted child Gini from raw counts.
pub fn gini_oracle(n11: u64, n10: u64, n01: u64, n00: u64) -> f64 {
    let n = (n11 + n10 + n01 + n00) as f64;
    let side = |p: u64, q: u64| {
        let m = (p + q) as f64;
        let f = p as f64 / m;
        m / n * (1.0 - f * f - (1.0 - f) * (1.0 - f))
    };
    side(n11, n10) + side(n01, n00)
}

/// Information gain H(Y) - H(Y|X) in bits from raw counts.
pub fn info_gain_oracle(n11: u64, n10: u64, n01: u64, n00: u64) -> f64 {
    let h = |p: u64, q: u64| {
        let m = (p + q) as f64;
        [p, q]
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let f = c as f64 / m;
                -f * f.log2()
            })
            .sum::<f64>()
    };
    let n = (n11 + n10 + n01 + n00) as f64;
    h(n11 + n01, n10 + n00)
        - ((n11 + n10) as f64 / n * h(n11, n10) + (n01 + n00) as f64 / n * h(n01, n00))
}

/// The ACDC criterion summed term by term over (x, y) from joint and
/// marginal frequencies.
pub fn divergence_literal(n11: u64, n10: u64, n01: u64, n00: u64, alpha: f64) -> f64 {
    let n = (n11 + n10 + n01 + n00) as f64;
    let joint = [
        [n00 as f64 / n, n01 as f64 / n],
        [n10 as f64 / n, n11 as f64 / n],
    ];
    let mut sum = 0.0;
    for row in &joint {
        let px = row[0] + row[1];
        for pxy in row {
            let cond = pxy / px;
            sum += px * (2.0 * cond).powf(alpha);
        }
    }
    (1.0 - 0.5 * sum) / (alpha * (1.0 - alpha))
}
