//! Order-p Wasserstein distances for finitely supported measures,
//! 0 < p <= 2.
//!
//! Three solvers, picked by structure: the 1D quantile coupling (exact for
//! p >= 1, linear after sorting), a shortest-augmenting-path assignment
//! solver for uniform equal-size planar inputs, and successive-shortest-path
//! min-cost flow for general weights. All return `cost^(1/p)` for every p in
//! (0, 2], the rooted form; below p = 1 that quantity is not a metric, so
//! triangle checks are only meaningful for p >= 1.

mod assignment;
mod bickel;
mod flow;
mod gaussian;
mod quantile;

pub use bickel::{bickel_freedman_check, BickelFreedmanReport, Reference};
pub use gaussian::{
    d2_product_to_gaussian, d_p_to_gaussian, gaussian_reference_sample, GaussianDistance,
    GaussianMode,
};
pub use quantile::d_p_1d;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WassersteinError {
    #[error("measure needs at least one atom")]
    EmptyMeasure,
    #[error("atom coordinates must be finite")]
    NonFiniteCoordinate,
    #[error("weight {0} is negative or not finite")]
    BadWeight(f64),
    #[error("weights sum to {0}, expected 1 within 1e-9")]
    WeightSumOff(f64),
    #[error("weights list has {got} entries for {atoms} atoms")]
    WeightCountMismatch { atoms: usize, got: usize },
    #[error("order p must lie in (0, 2], got {0}")]
    BadOrder(f64),
    #[error("dimension mismatch: {0}-d vs {1}-d")]
    DimensionMismatch(u8, u8),
    #[error("{total} aggregate atoms exceed the solver cap {cap}")]
    TooManyAtoms { total: usize, cap: usize },
    #[error("reference time t must be positive, got {0}")]
    BadTime(f64),
    #[error("need at least {need} measures, got {got}")]
    NotEnoughMeasures { need: usize, got: usize },
    #[error("need at least {need} reference samples, got {got}")]
    NotEnoughRefSamples { need: usize, got: usize },
}

fn check_order(p: f64) -> Result<(), WassersteinError> {
    if p > 0.0 && p <= 2.0 {
        Ok(())
    } else {
        Err(WassersteinError::BadOrder(p))
    }
}

/// Ground metric for the planar solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GroundNorm {
    #[default]
    Euclid,
    L1,
}

impl GroundNorm {
    #[inline]
    pub fn dist(self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
        match self {
            GroundNorm::Euclid => dx.hypot(dy),
            GroundNorm::L1 => dx.abs() + dy.abs(),
        }
    }
}

/// Shared ground cost ||a-b||^p. Every exact solver and every brute-force
/// cross-check goes through this one function so their per-pair terms are
/// bitwise identical and cost sums can be compared exactly.
#[inline]
pub fn ground_cost(norm: GroundNorm, p: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    if p == 2.0 {
        match norm {
            GroundNorm::Euclid => dx * dx + dy * dy,
            GroundNorm::L1 => {
                let d = dx.abs() + dy.abs();
                d * d
            }
        }
    } else if p == 1.0 {
        norm.dist(a, b)
    } else {
        norm.dist(a, b).powf(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Combined atom count both measures may have together.
    pub atom_cap: usize,
    pub norm: GroundNorm,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            atom_cap: 4096,
            norm: GroundNorm::Euclid,
        }
    }
}

/// Finitely supported probability measure on the line or the plane.
/// One-dimensional measures keep their second coordinate at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    dim: u8,
    atoms: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    fn validated(dim: u8, atoms: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self, WassersteinError> {
        if atoms.is_empty() {
            return Err(WassersteinError::EmptyMeasure);
        }
        if weights.len() != atoms.len() {
            return Err(WassersteinError::WeightCountMismatch {
                atoms: atoms.len(),
                got: weights.len(),
            });
        }
        if atoms.iter().any(|a| !a[0].is_finite() || !a[1].is_finite()) {
            return Err(WassersteinError::NonFiniteCoordinate);
        }
        let mut sum = 0.0;
        for &w in &weights {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(WassersteinError::BadWeight(w));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(WassersteinError::WeightSumOff(sum));
        }
        Ok(EmpiricalMeasure { dim, atoms, weights })
    }

    pub fn from_points_1d(xs: &[f64]) -> Result<Self, WassersteinError> {
        let n = xs.len();
        let w = 1.0 / n as f64;
        Self::validated(1, xs.iter().map(|&x| [x, 0.0]).collect(), vec![w; n])
    }

    pub fn from_points_2d(points: &[[f64; 2]]) -> Result<Self, WassersteinError> {
        let n = points.len();
        let w = 1.0 / n as f64;
        Self::validated(2, points.to_vec(), vec![w; n])
    }

    pub fn weighted_1d(xs: &[f64], weights: &[f64]) -> Result<Self, WassersteinError> {
        Self::validated(1, xs.iter().map(|&x| [x, 0.0]).collect(), weights.to_vec())
    }

    pub fn weighted_2d(points: &[[f64; 2]], weights: &[f64]) -> Result<Self, WassersteinError> {
        Self::validated(2, points.to_vec(), weights.to_vec())
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[[f64; 2]] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn is_uniform(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|&x| x == w)
    }

    /// p-th moment of the norm, sum of w ||x||^p.
    pub fn norm_moment(&self, p: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, &w)| w * a[0].hypot(a[1]).powf(p))
            .sum()
    }

    /// Convenience for the Brownian moment checks: E ||X||^2.
    pub fn second_moment(&self) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, &w)| w * (a[0] * a[0] + a[1] * a[1]))
            .sum()
    }

    /// One coordinate as a 1D measure (same weights).
    pub fn coordinate_marginal(&self, axis: usize) -> EmpiricalMeasure {
        EmpiricalMeasure {
            dim: 1,
            atoms: self.atoms.iter().map(|a| [a[axis], 0.0]).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// Transport plan between two measures: entries (i, j, mass) and the raw
/// p-cost sum(mass * ground^p) before the 1/p root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingPlan {
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

impl CouplingPlan {
    /// Largest deviation of either marginal from its weight vector.
    pub fn marginal_gap(&self, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> f64 {
        let mut row = vec![0.0; mu.len()];
        let mut col = vec![0.0; nu.len()];
        for &(i, j, m) in &self.entries {
            row[i] += m;
            col[j] += m;
        }
        let r = row
            .iter()
            .zip(mu.weights())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let c = col
            .iter()
            .zip(nu.weights())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        r.max(c)
    }
}

/// Exact order-p distance between planar measures, with the optimal plan.
///
/// Uniform equal-size inputs go to the assignment solver, everything else
/// to min-cost flow. Both are exact; the split is purely about speed.
pub fn d_p_exact_2d(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    p: f64,
    opts: &SolverOptions,
) -> Result<(f64, CouplingPlan), WassersteinError> {
    check_order(p)?;
    if mu.dim() != nu.dim() {
        return Err(WassersteinError::DimensionMismatch(mu.dim(), nu.dim()));
    }
    let total = mu.len() + nu.len();
    if total > opts.atom_cap {
        return Err(WassersteinError::TooManyAtoms {
            total,
            cap: opts.atom_cap,
        });
    }
    let plan = if mu.len() == nu.len() && mu.is_uniform() && nu.is_uniform() {
        assignment::solve_uniform(mu, nu, p, opts.norm)
    } else {
        flow::solve_general(mu, nu, p, opts.norm)
    };
    Ok((plan.cost.powf(1.0 / p), plan))
}
