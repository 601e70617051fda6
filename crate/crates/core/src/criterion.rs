//! Split criteria.
//!
//! The ACDC criterion is the α-divergence between the empirical joint
//! `P(X, Y)` of a binary split and the reference `U(X, Y) = P(X) / 2`,
//!
//! ```text
//! D_α = (1 - ½ Σ_{x,y} P(x) (2 P(y|x))^α) / (α (1 - α))
//! ```
//!
//! For α > 1 it is an increasing affine function of
//! `S = P(X=1) A(PPV, α) + P(X=0) A(NPV, α)` where `A(p, α) = p^α + (1-p)^α`
//! is the α-zooming factor. At α = 2 maximizing it is the same as
//! minimizing the weighted Gini impurity, and its α → 1 limit is the
//! information gain up to the node constant `H(Y)`.

use serde::{Deserialize, Serialize};

use crate::dataset::{SplitPredicate, SplitStats};
use crate::error::{AcdcError, Result};

/// Absolute slack under which two criterion values count as tied. Ties go
/// to the candidate enumerated first.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[inline]
fn pow0(x: f64, alpha: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(alpha)
    }
}

#[inline]
fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// α-zooming factor `A(p, α) = p^α + (1 - p)^α`.
pub fn az_factor(p: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AcdcError::ProbabilityOutOfRange(p));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(AcdcError::InvalidArgument(format!(
            "alpha {alpha} must be positive"
        )));
    }
    Ok(pow0(p, alpha) + pow0(1.0 - p, alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// `A(PPV, α) · P(X = 1)`
    pub ppv_term: f64,
    /// `A(NPV, α) · P(X = 0)`
    pub npv_term: f64,
}

impl Decomposition {
    pub fn sum(&self) -> f64 {
        self.ppv_term + self.npv_term
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionValue {
    pub value: f64,
    /// α used; `1.0` stands for the α → 1 limit.
    pub alpha: f64,
    pub decomposition: Option<Decomposition>,
}

fn check_split(stats: &SplitStats) -> Result<()> {
    if stats.is_degenerate() {
        Err(AcdcError::DegenerateSplit)
    } else {
        Ok(())
    }
}

/// Per-side `(P(x), P(Y=1 | x))` for x = 1 then x = 0.
fn sides(stats: &SplitStats) -> [(f64, f64); 2] {
    let n = stats.total() as f64;
    let (t, f) = (stats.n_true() as f64, stats.n_false() as f64);
    [(t / n, stats.n11 as f64 / t), (f / n, stats.n01 as f64 / f)]
}

/// ACDC α-divergence of a split, with its PPV/NPV decomposition.
pub fn acdc_divergence(stats: &SplitStats, alpha: f64) -> Result<CriterionValue> {
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(AcdcError::InvalidArgument(format!(
            "alpha {alpha} must be finite and greater than 1"
        )));
    }
    check_split(stats)?;
    let [(p1, q1), (p0, q0)] = sides(stats);
    // With u = 2 P(y|x) and Σ_y u = 2, the numerator 1 - ½ Σ P(x) Σ_y u^α
    // equals -½ Σ P(x) Σ_y u (u^(α-1) - 1); expm1 keeps it accurate as α → 1.
    let excess = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            u * ((alpha - 1.0) * u.ln()).exp_m1()
        }
    };
    let term = |px: f64, q: f64| px * (excess(2.0 * q) + excess(2.0 * (1.0 - q)));
    let sum = term(p1, q1) + term(p0, q0);
    let value = (0.5 * sum / (alpha * (alpha - 1.0))).max(0.0);

    let ppv = stats.ppv().expect("non-degenerate");
    let npv = stats.npv().expect("non-degenerate");
    let decomposition = Decomposition {
        ppv_term: (pow0(ppv, alpha) + pow0(1.0 - ppv, alpha)) * p1,
        npv_term: (pow0(npv, alpha) + pow0(1.0 - npv, alpha)) * p0,
    };
    Ok(CriterionValue {
        value,
        alpha,
        decomposition: Some(decomposition),
    })
}

/// α → 1 limit of the ACDC criterion: `ln 2 - H(Y | X)` in nats.
pub fn criterion_limit_alpha1(stats: &SplitStats) -> Result<f64> {
    check_split(stats)?;
    let [(p1, q1), (p0, q0)] = sides(stats);
    let h = |q: f64| -(xlnx(q) + xlnx(1.0 - q));
    Ok(std::f64::consts::LN_2 - (p1 * h(q1) + p0 * h(q0)))
}

/// Weighted child Gini impurity `Σ_x P(x) · 2 p_x (1 - p_x)`.
pub fn weighted_gini(stats: &SplitStats) -> Result<f64> {
    check_split(stats)?;
    let [(p1, q1), (p0, q0)] = sides(stats);
    Ok(p1 * 2.0 * q1 * (1.0 - q1) + p0 * 2.0 * q0 * (1.0 - q0))
}

/// Criterion used for fixed-α growth: the limit form at α = 1, the ACDC
/// divergence above it.
pub fn split_score(stats: &SplitStats, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        criterion_limit_alpha1(stats)
    } else {
        acdc_divergence(stats, alpha).map(|v| v.value)
    }
}

/// Index and value of the first maximal element; later elements must beat
/// the running best by more than [`TIE_TOLERANCE`] to replace it.
pub fn argmax_first<I>(values: I) -> Option<(usize, f64)>
where
    I: IntoIterator<Item = f64>,
{
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b + TIE_TOLERANCE * b.abs().max(1.0) => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

/// Picks the candidate maximizing the ACDC criterion at `alpha`, skipping
/// degenerate splits. Ties go to the earliest candidate.
pub fn select_split(
    candidates: &[(SplitPredicate, SplitStats)],
    alpha: f64,
) -> Result<(SplitPredicate, CriterionValue)> {
    let scored: Vec<(usize, CriterionValue)> = candidates
        .iter()
        .enumerate()
        .filter(|(_, (_, s))| !s.is_degenerate())
        .map(|(i, (_, s))| acdc_divergence(s, alpha).map(|v| (i, v)))
        .collect::<Result<_>>()?;
    let (k, _) =
        argmax_first(scored.iter().map(|(_, v)| v.value)).ok_or(AcdcError::NoCandidates)?;
    let (i, value) = scored[k];
    Ok((candidates[i].0.clone(), value))
}
