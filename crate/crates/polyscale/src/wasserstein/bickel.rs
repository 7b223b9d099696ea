//! Convergence diagnostics for a sequence of empirical measures. Distance
//! convergence to a reference is equivalent to weak convergence plus
//! convergence of the p-th absolute moment, so the report tracks all three
//! and flags the inconsistent pattern where the distance shrinks but a
//! moment or CDF gap does not.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::gaussian::gaussian_norm_moment;
use super::{
    check_order, d_p_1d, d_p_exact_2d, d_p_to_gaussian, EmpiricalMeasure, GaussianMode,
    SolverOptions, WassersteinError,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Reference {
    Measure(EmpiricalMeasure),
    /// Centered Gaussian with variance t per coordinate. The sampled 2D
    /// route draws `ref_samples` atoms with this seed.
    Gaussian { t: f64, ref_samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BickelFreedmanReport {
    pub p: f64,
    pub distances: Vec<f64>,
    pub distance_ses: Vec<Option<f64>>,
    pub moments: Vec<f64>,
    pub moment_ses: Vec<f64>,
    pub reference_moment: f64,
    pub moment_gaps: Vec<f64>,
    pub cdf_gaps: Vec<f64>,
    pub distance_shrinks: bool,
    pub moment_shrinks: bool,
    pub cdf_shrinks: bool,
    pub converges: bool,
    pub inconsistent: bool,
}

pub fn bickel_freedman_check(
    sequence: &[EmpiricalMeasure],
    reference: &Reference,
    p: f64,
) -> Result<BickelFreedmanReport, WassersteinError> {
    check_order(p)?;
    if sequence.len() < 3 {
        return Err(WassersteinError::NotEnoughMeasures {
            need: 3,
            got: sequence.len(),
        });
    }
    let dim = sequence[0].dim();
    for m in sequence {
        if m.dim() != dim {
            return Err(WassersteinError::DimensionMismatch(dim, m.dim()));
        }
    }
    if let Reference::Measure(m) = reference {
        if m.dim() != dim {
            return Err(WassersteinError::DimensionMismatch(dim, m.dim()));
        }
    }
    if let Reference::Gaussian { t, .. } = reference {
        if !(*t > 0.0) || !t.is_finite() {
            return Err(WassersteinError::BadTime(*t));
        }
    }

    let opts = SolverOptions::default();
    let mut distances = Vec::with_capacity(sequence.len());
    let mut distance_ses = Vec::with_capacity(sequence.len());
    for m in sequence {
        match reference {
            Reference::Measure(r) => {
                let d = if dim == 1 {
                    d_p_1d(m, r, p)?
                } else {
                    d_p_exact_2d(m, r, p, &opts)?.0
                };
                distances.push(d);
                distance_ses.push(None);
            }
            Reference::Gaussian { t, ref_samples, seed } => {
                let mode = if dim == 1 { GaussianMode::OneD } else { GaussianMode::TwoD };
                let d = d_p_to_gaussian(m, *t, p, mode, *ref_samples, *seed)?;
                distances.push(d.distance);
                distance_ses.push(d.se);
            }
        }
    }

    let moments: Vec<f64> = sequence.iter().map(|m| m.norm_moment(p)).collect();
    let moment_ses: Vec<f64> = sequence.iter().map(|m| norm_moment_se(m, p)).collect();
    let reference_moment = match reference {
        Reference::Measure(r) => r.norm_moment(p),
        Reference::Gaussian { t, .. } => gaussian_norm_moment(dim, *t, p),
    };
    let moment_gaps: Vec<f64> = moments.iter().map(|m| (m - reference_moment).abs()).collect();

    let cdf_gaps: Vec<f64> = sequence
        .iter()
        .map(|m| cdf_gap(m, reference))
        .collect::<Result<_, _>>()?;

    let last_len = sequence.last().unwrap().len() as f64;
    let distance_shrinks =
        strictly_decreasing(&distances) || *distances.last().unwrap() <= 1e-12;
    let moment_shrinks = strictly_decreasing(&moment_gaps)
        || *moment_gaps.last().unwrap() <= 2.0 * moment_ses.last().unwrap() + 1e-12;
    let cdf_shrinks =
        strictly_decreasing(&cdf_gaps) || *cdf_gaps.last().unwrap() <= 2.0 / last_len.sqrt();
    let converges = distance_shrinks && moment_shrinks && cdf_shrinks;
    let inconsistent = distance_shrinks && !(moment_shrinks && cdf_shrinks);

    Ok(BickelFreedmanReport {
        p,
        distances,
        distance_ses,
        moments,
        moment_ses,
        reference_moment,
        moment_gaps,
        cdf_gaps,
        distance_shrinks,
        moment_shrinks,
        cdf_shrinks,
        converges,
        inconsistent,
    })
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// Standard error of the weighted mean of ||x||^p, with 1/sum(w^2) as the
/// effective sample size.
fn norm_moment_se(m: &EmpiricalMeasure, p: f64) -> f64 {
    let g: Vec<f64> = m
        .atoms()
        .iter()
        .map(|a| a[0].hypot(a[1]).powf(p))
        .collect();
    let mean: f64 = g.iter().zip(m.weights()).map(|(x, w)| x * w).sum();
    let var: f64 = g
        .iter()
        .zip(m.weights())
        .map(|(x, w)| w * (x - mean) * (x - mean))
        .sum();
    let eff_n = 1.0 / m.weights().iter().map(|w| w * w).sum::<f64>();
    (var / eff_n).sqrt()
}

fn cdf_gap(m: &EmpiricalMeasure, reference: &Reference) -> Result<f64, WassersteinError> {
    match (m.dim(), reference) {
        (1, Reference::Gaussian { t, .. }) => Ok(ks_against_gaussian(m, *t)),
        (1, Reference::Measure(r)) => Ok(ks_two_sample(m, r)),
        (_, Reference::Gaussian { t, .. }) => Ok(smoothed_gap_gaussian(m, *t)),
        (_, Reference::Measure(r)) => Ok(smoothed_gap_measure(m, r)),
    }
}

/// Sup |F_m - Phi(./sqrt(t))|, checked on both sides of every jump.
fn ks_against_gaussian(m: &EmpiricalMeasure, t: f64) -> f64 {
    let normal = Normal::new(0.0, t.sqrt()).unwrap();
    let mut atoms: Vec<(f64, f64)> = m
        .atoms()
        .iter()
        .zip(m.weights())
        .map(|(a, &w)| (a[0], w))
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = 0.0;
    let mut gap = 0.0f64;
    for &(x, w) in &atoms {
        let target = normal.cdf(x);
        gap = gap.max((cum - target).abs());
        cum += w;
        gap = gap.max((cum - target).abs());
    }
    gap
}

fn ks_two_sample(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    let collect = |m: &EmpiricalMeasure| -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = m
            .atoms()
            .iter()
            .zip(m.weights())
            .map(|(a, &w)| (a[0], w))
            .collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        v
    };
    let va = collect(a);
    let vb = collect(b);
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut gap = 0.0f64;
    while i < va.len() || j < vb.len() {
        let xa = va.get(i).map(|e| e.0).unwrap_or(f64::INFINITY);
        let xb = vb.get(j).map(|e| e.0).unwrap_or(f64::INFINITY);
        let x = xa.min(xb);
        while i < va.len() && va[i].0 == x {
            fa += va[i].1;
            i += 1;
        }
        while j < vb.len() && vb[j].0 == x {
            fb += vb[j].1;
            j += 1;
        }
        gap = gap.max((fa - fb).abs());
    }
    gap
}

// 7 x 7 grid of evaluation points per axis, in units of the smoothed scale.
const GRID_OFFSETS: [f64; 7] = [-2.0, -1.2, -0.6, 0.0, 0.6, 1.2, 2.0];

/// Gaussian-smoothed CDF S(c) = E[Phi((c_x - X)/h) Phi((c_y - Y)/h)];
/// a kernel-smoothed analogue of the joint CDF that stays informative for
/// planar point clouds.
fn smoothed_cdf(m: &EmpiricalMeasure, c: [f64; 2], h: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).unwrap();
    m.atoms()
        .iter()
        .zip(m.weights())
        .map(|(a, &w)| w * normal.cdf((c[0] - a[0]) / h) * normal.cdf((c[1] - a[1]) / h))
        .sum()
}

fn smoothed_gap_gaussian(m: &EmpiricalMeasure, t: f64) -> f64 {
    // Smoothing a N(0, t) coordinate with an h-kernel gives N(0, t + h^2)
    // exactly, so the reference side has a closed form.
    let h = t.sqrt() * (m.len() as f64).powf(-1.0 / 6.0);
    let scale = (t + h * h).sqrt();
    let normal = Normal::new(0.0, scale).unwrap();
    let mut gap = 0.0f64;
    for ox in GRID_OFFSETS {
        for oy in GRID_OFFSETS {
            let c = [ox * scale, oy * scale];
            let emp = smoothed_cdf(m, c, h);
            let refv = normal.cdf(c[0]) * normal.cdf(c[1]);
            gap = gap.max((emp - refv).abs());
        }
    }
    gap
}

fn smoothed_gap_measure(m: &EmpiricalMeasure, r: &EmpiricalMeasure) -> f64 {
    let base = (r.second_moment() / 2.0).sqrt().max(1e-9);
    let h = base * (m.len() as f64).powf(-1.0 / 6.0);
    let scale = (base * base + h * h).sqrt();
    let mut gap = 0.0f64;
    for ox in GRID_OFFSETS {
        for oy in GRID_OFFSETS {
            let c = [ox * scale, oy * scale];
            gap = gap.max((smoothed_cdf(m, c, h) - smoothed_cdf(r, c, h)).abs());
        }
    }
    gap
}
