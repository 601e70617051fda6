//! α-carving: choose α at each chain stage so that the slope of the
//! α-zooming factor at the node's dominant class ratio ω matches the
//! velocity ν,
//!
//! ```text
//! g(α) = ∂A(ω, α)/∂ω = α (ω^(α-1) - (1-ω)^(α-1)) = ν
//! ```
//!
//! For ω in (½, 1), g rises from 0 near α = 1 to a single peak and then
//! decays, so there are zero, one or two roots. The largest root is taken:
//! a lower ν then gives a larger α, and α shrinks as ω moves towards ½.

use serde::{Deserialize, Serialize};

use crate::error::{AcdcError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarvingConfig {
    /// Velocity ν, the target slope.
    pub nu: f64,
    pub alpha_min: f64,
    /// Search ceiling.
    pub alpha_max: f64,
    /// Bound on |g(α) - ν| for an exact root.
    pub tolerance: f64,
    /// Number of log-spaced scan points.
    pub grid_points: usize,
}

impl CarvingConfig {
    pub const DEFAULT_ALPHA_MIN: f64 = 1.0 + 1e-6;
    pub const DEFAULT_ALPHA_MAX: f64 = 512.0;
    pub const DEFAULT_TOLERANCE: f64 = 1e-12;
    pub const DEFAULT_GRID_POINTS: usize = 1024;
    /// `(2 p)^α` must stay finite in the criterion for p ≤ 1.
    pub const ALPHA_CEILING_LIMIT: f64 = 1000.0;

    pub fn new(nu: f64) -> Self {
        CarvingConfig {
            nu,
            alpha_min: Self::DEFAULT_ALPHA_MIN,
            alpha_max: Self::DEFAULT_ALPHA_MAX,
            tolerance: Self::DEFAULT_TOLERANCE,
            grid_points: Self::DEFAULT_GRID_POINTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AcdcError::InvalidArgument(m));
        if !self.nu.is_finite() || self.nu <= 0.0 {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if self.alpha_min.is_nan() || self.alpha_min <= 1.0 {
            return bad(format!("alpha_min must exceed 1, got {}", self.alpha_min));
        }
        if self.alpha_max.is_nan()
            || self.alpha_max <= self.alpha_min
            || self.alpha_max > Self::ALPHA_CEILING_LIMIT
        {
            return bad(format!(
                "alpha_max must lie in ({}, {}], got {}",
                self.alpha_min,
                Self::ALPHA_CEILING_LIMIT,
                self.alpha_max
            ));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return bad(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            ));
        }
        if self.grid_points < 2 {
            return bad("grid_points must be at least 2".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    /// Bisection converged on the largest root.
    ExactRoot,
    /// g stays below ν on the whole range; α is the grid argmax of g.
    PeakFallback,
    /// g is still above ν at `alpha_max`; α is clamped to the ceiling.
    Ceiling,
}

impl std::fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolutionKind::ExactRoot => "exact_root",
            SolutionKind::PeakFallback => "peak_fallback",
            SolutionKind::Ceiling => "ceiling",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarvingSolution {
    pub alpha: f64,
    pub kind: SolutionKind,
    /// `g(alpha) - ν`
    pub residual: f64,
}

#[inline]
fn slope(omega: f64, alpha: f64) -> f64 {
    alpha * (omega.powf(alpha - 1.0) - (1.0 - omega).powf(alpha - 1.0))
}

/// Analytic `∂A(ω, α)/∂ω = α (ω^(α-1) - (1-ω)^(α-1))`.
pub fn az_factor_slope(omega: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(AcdcError::ProbabilityOutOfRange(omega));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(AcdcError::InvalidArgument(format!(
            "alpha {alpha} must be positive"
        )));
    }
    if alpha < 1.0 && (omega == 0.0 || omega == 1.0) {
        return Err(AcdcError::InvalidArgument(format!(
            "slope has a pole at omega = {omega} for alpha = {alpha} < 1"
        )));
    }
    Ok(slope(omega, alpha))
}

/// Dominant class ratio `max(p, 1 - p)` of a node.
pub fn omega_y(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(AcdcError::EmptyDataset);
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    Ok(omega_from_counts(pos as u64, labels.len() as u64))
}

pub(crate) fn omega_from_counts(positives: u64, count: u64) -> f64 {
    let p = positives as f64 / count as f64;
    p.max(1.0 - p)
}

/// Log-spaced scan grid over `[alpha_min, alpha_max]`.
fn grid(config: &CarvingConfig) -> Vec<f64> {
    let (lo, hi) = (config.alpha_min.ln(), config.alpha_max.ln());
    let last = config.grid_points - 1;
    (0..config.grid_points)
        .map(|i| match i {
            0 => config.alpha_min,
            i if i == last => config.alpha_max,
            i => (lo + (hi - lo) * i as f64 / last as f64).exp(),
        })
        .collect()
}

/// Solves the carving equation for α at dominant class ratio `omega`.
///
/// `omega <= 0.5` has no solution (the slope vanishes identically at a
/// balanced node) and is reported as [`AcdcError::NoSolution`].
pub fn solve_alpha(omega: f64, config: &CarvingConfig) -> Result<CarvingSolution> {
    config.validate()?;
    if omega.is_nan() || omega <= 0.5 {
        return Err(AcdcError::NoSolution(omega));
    }
    if omega >= 1.0 {
        return Err(AcdcError::InvalidArgument(format!(
            "omega {omega} must be below 1 (pure node)"
        )));
    }
    let nu = config.nu;
    let f = |a: f64| slope(omega, a) - nu;
    let alphas = grid(config);
    let resid: Vec<f64> = alphas.iter().map(|&a| f(a)).collect();

    let last = *resid.last().expect("grid has points");
    if last > 0.0 {
        let alpha = config.alpha_max;
        return Ok(CarvingSolution {
            alpha,
            kind: SolutionKind::Ceiling,
            residual: last,
        });
    }

    // the last grid point strictly above ν brackets the largest root
    let Some(i) = resid.iter().rposition(|&r| r > 0.0) else {
        if let Some(j) = resid.iter().position(|&r| r == 0.0) {
            return Ok(CarvingSolution {
                alpha: alphas[j],
                kind: SolutionKind::ExactRoot,
                residual: 0.0,
            });
        }
        let mut best = 0;
        for (j, r) in resid.iter().enumerate() {
            if *r > resid[best] {
                best = j;
            }
        }
        return Ok(CarvingSolution {
            alpha: alphas[best],
            kind: SolutionKind::PeakFallback,
            residual: resid[best],
        });
    };

    let (mut lo, mut hi) = (alphas[i], alphas[i + 1]);
    let (mut f_lo, mut f_hi) = (resid[i], resid[i + 1]);
    for _ in 0..256 {
        if f_hi.abs() <= config.tolerance {
            break;
        }
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm > 0.0 {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
        if f_lo.abs() <= config.tolerance {
            break;
        }
    }
    let (alpha, residual) = if f_hi.abs() <= f_lo.abs() {
        (hi, f_hi)
    } else {
        (lo, f_lo)
    };
    if residual.abs() > config.tolerance {
        return Err(AcdcError::NotConverged { alpha, residual });
    }
    Ok(CarvingSolution {
        alpha,
        kind: SolutionKind::ExactRoot,
        residual,
    })
}
