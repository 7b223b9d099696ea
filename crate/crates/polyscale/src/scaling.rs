//! Partial sums, block decompositions, rescaled path processes, and the
//! hypothesis statistics the scaling limit rests on.
//!
//! Everything that can be integer arithmetic is: partial sums, block sums
//! and their sample moments are accumulated exactly in i64 before a single
//! division, which both avoids drift and keeps parallel reductions
//! order-independent (reports must be byte-reproducible).

use crate::model::{InteractionKernel, Polymer, SpinChainPair};
use crate::wasserstein::EmpiricalMeasure;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScalingError {
    #[error("block size exponent must lie in (0, 1/4), got {0}")]
    BadDelta(f64),
    #[error("block size {ell} invalid for {n} sites")]
    BadBlockSize { ell: usize, n: usize },
    #[error("chain length {got} does not match scheme for {expected} sites")]
    LengthMismatch { expected: usize, got: usize },
    #[error("need at least 2 samples, got {0}")]
    NotEnoughSamples(usize),
    #[error("normalization sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("time {0} outside [0, 1]")]
    BadTime(f64),
    #[error("empty input")]
    Empty,
    #[error("paths must share one dimension to pool marginals")]
    MixedDimensions,
}

/// Consecutive blocks of `ell` sites; the last `n - m*ell` sites belong to
/// no block but still count toward the full sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockScheme {
    pub n: usize,
    pub ell: usize,
    pub m: usize,
    /// Set when the block size came from the schedule ell = floor(n^delta).
    pub delta: Option<f64>,
}

impl BlockScheme {
    pub fn new(n: usize, ell: usize) -> Result<Self, ScalingError> {
        if n == 0 || ell == 0 || ell > n {
            return Err(ScalingError::BadBlockSize { ell, n });
        }
        Ok(BlockScheme {
            n,
            ell,
            m: n / ell,
            delta: None,
        })
    }

    /// Schedule ell = floor(n^delta). The exponent must stay below 1/4 so
    /// ell^3/m -> 0; the small nudge absorbs one-ulp errors of powf when
    /// n^delta is an exact integer (e.g. 1024^0.2 = 4).
    pub fn from_delta(n: usize, delta: f64) -> Result<Self, ScalingError> {
        if !(delta > 0.0 && delta < 0.25) {
            return Err(ScalingError::BadDelta(delta));
        }
        let ell = ((n as f64).powf(delta) + 1e-9).floor() as usize;
        let mut scheme = BlockScheme::new(n, ell.max(1))?;
        scheme.delta = Some(delta);
        Ok(scheme)
    }

    /// ell^3 / m, the quantity whose decay drives the block CLT argument.
    pub fn block_ratio(&self) -> f64 {
        (self.ell * self.ell * self.ell) as f64 / self.m as f64
    }
}

/// Running sums of a +/-1 chain with S_0 = 0 prepended; exact integers.
pub fn partial_sums_chain(chain: &[i8]) -> Vec<i64> {
    let mut out = Vec::with_capacity(chain.len() + 1);
    let mut s = 0i64;
    out.push(0);
    for &x in chain {
        s += x as i64;
        out.push(s);
    }
    out
}

/// Lattice sites visited by a polymer, origin prepended; exact integers.
/// Same role as `partial_sums_chain` but for step sequences.
pub fn partial_sums_steps(p: &Polymer) -> Vec<[i64; 2]> {
    p.sites()
}

/// Block sums Y_j = sum of sites (j-1)*ell+1 ..= j*ell, exactly m of them.
pub fn make_blocks(chain: &[i8], scheme: &BlockScheme) -> Result<Vec<i64>, ScalingError> {
    if chain.len() != scheme.n {
        return Err(ScalingError::LengthMismatch {
            expected: scheme.n,
            got: chain.len(),
        });
    }
    Ok((0..scheme.m)
        .map(|j| {
            chain[j * scheme.ell..(j + 1) * scheme.ell]
                .iter()
                .map(|&x| x as i64)
                .sum()
        })
        .collect())
}

/// Lag cutoff for the susceptibility estimate: min(n-1, ceil(sqrt(n))).
pub fn chi_lag_cutoff(n: usize) -> usize {
    (n - 1).min((n as f64).sqrt().ceil() as usize)
}

/// Heuristic size of the dropped susceptibility tail: the summed couplings
/// beyond the lag cutoff. Covariances decay at the interaction rate at high
/// temperature, so this bounds the truncation error up to a constant.
pub fn chi_tail_hint(kernel: &InteractionKernel, n: usize) -> f64 {
    let table = kernel.table(n);
    (chi_lag_cutoff(n) + 1..n).map(|r| table[r]).sum()
}

/// Monte Carlo estimates of the hypotheses behind the block CLT and of the
/// susceptibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisStats {
    /// Var(S_n) / n.
    pub var_ratio: f64,
    /// (1/(m ell)) sum_j Var(Y_j).
    pub block_var_ratio: f64,
    /// max over sites of E|X_j|^3; exactly 1 for +/-1 chains.
    pub third_moment_max: f64,
    /// Var(s_1) + 2 sum_{k=1}^{K} Cov(s_1, s_{1+k}), K = chi_lag_cutoff(n).
    pub chi_hat: f64,
    /// Same truncated sum with every lag covariance averaged over all site
    /// pairs at that lag. Estimates the same limit as chi_hat with far less
    /// Monte Carlo noise; the scan normalizes with this one.
    pub chi_hat_avg: f64,
    pub lag_cutoff: usize,
    pub n_samples: usize,
}

/// Estimate the hypothesis statistics from sampled chains.
///
/// All per-sample reductions are exact integer sums, so the result does not
/// depend on the parallel reduction order.
pub fn hypothesis_stats(
    chains: &[&[i8]],
    scheme: &BlockScheme,
) -> Result<HypothesisStats, ScalingError> {
    let m_samples = chains.len();
    if m_samples < 2 {
        return Err(ScalingError::NotEnoughSamples(m_samples));
    }
    let n = scheme.n;
    for c in chains {
        if c.len() != n {
            return Err(ScalingError::LengthMismatch {
                expected: n,
                got: c.len(),
            });
        }
    }
    let mf = m_samples as f64;

    // Var(S_n)/n from exact integer sums of S and S^2.
    let (sum_s, sum_s2) = chains
        .par_iter()
        .map(|c| {
            let s: i64 = c.iter().map(|&x| x as i64).sum();
            (s as i128, (s as i128) * (s as i128))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let var_s = (sum_s2 as f64 - (sum_s as f64) * (sum_s as f64) / mf) / (mf - 1.0);
    let var_ratio = var_s / n as f64;

    // Block variances, same exact-accumulator scheme per block.
    let (block_sum, block_sum2) = chains
        .par_iter()
        .map(|c| {
            let mut s = vec![0i64; scheme.m];
            let mut s2 = vec![0i64; scheme.m];
            for (j, (acc, acc2)) in s.iter_mut().zip(s2.iter_mut()).enumerate() {
                let y: i64 = c[j * scheme.ell..(j + 1) * scheme.ell]
                    .iter()
                    .map(|&x| x as i64)
                    .sum();
                *acc = y;
                *acc2 = y * y;
            }
            (s, s2)
        })
        .reduce(
            || (vec![0i64; scheme.m], vec![0i64; scheme.m]),
            |mut a, b| {
                for j in 0..scheme.m {
                    a.0[j] += b.0[j];
                    a.1[j] += b.1[j];
                }
                a
            },
        );
    let mut block_var_total = 0.0;
    for j in 0..scheme.m {
        let mean = block_sum[j] as f64 / mf;
        let var = (block_sum2[j] as f64 - mf * mean * mean) / (mf - 1.0);
        block_var_total += var;
    }
    let block_var_ratio = block_var_total / (scheme.m * scheme.ell) as f64;

    // Site means (for the covariance cross terms) and third absolute moments.
    let mut site_sum = vec![0i64; n];
    let mut third_sum = vec![0.0f64; n];
    for c in chains {
        for i in 0..n {
            site_sum[i] += c[i] as i64;
            let a = (c[i] as f64).abs();
            third_sum[i] += a * a * a;
        }
    }
    let site_mean: Vec<f64> = site_sum.iter().map(|&s| s as f64 / mf).collect();
    let third_moment_max = third_sum.iter().fold(0.0f64, |acc, &t| acc.max(t / mf));

    // Lag sums: L_k = sum over samples and sites of s_i s_{i+k}, exact.
    let k_cut = chi_lag_cutoff(n);
    let lag_tot: Vec<i64> = chains
        .par_iter()
        .map(|c| {
            let mut l = vec![0i64; k_cut + 1];
            for (k, lk) in l.iter_mut().enumerate() {
                let mut s = 0i64;
                for i in 0..n - k {
                    s += (c[i] as i64) * (c[i + k] as i64);
                }
                *lk = s;
            }
            l
        })
        .reduce(
            || vec![0i64; k_cut + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    // Site-1 estimator exactly as pinned; +/-1 spins give Var = M(1-mean^2)/(M-1).
    let mean1 = site_mean[0];
    let mut chi_hat = mf / (mf - 1.0) * (1.0 - mean1 * mean1);
    for k in 1..=k_cut {
        let prod_sum: f64 = chains
            .iter()
            .map(|c| (c[0] as i64 * c[k] as i64) as f64)
            .sum();
        let cov = (prod_sum - mf * mean1 * site_mean[k]) / (mf - 1.0);
        chi_hat += 2.0 * cov;
    }

    // Translation-averaged variant: average the lag-k covariance over all
    // site pairs at that lag before summing over lags.
    let mut chi_hat_avg = 0.0;
    for k in 0..=k_cut {
        let cross: f64 = (0..n - k).map(|i| site_mean[i] * site_mean[i + k]).sum();
        let cov_sum = (lag_tot[k] as f64 - mf * cross) / (mf - 1.0);
        let c_k = cov_sum / (n - k) as f64;
        chi_hat_avg += if k == 0 { c_k } else { 2.0 * c_k };
    }

    Ok(HypothesisStats {
        var_ratio,
        block_var_ratio,
        third_moment_max,
        chi_hat,
        chi_hat_avg,
        lag_cutoff: k_cut,
        n_samples: m_samples,
    })
}

/// Pool both chain components of every sampled pair; they are independent
/// draws from the same chain measure.
pub fn hypothesis_stats_from_batch(
    batch: &crate::sampler::SampleBatch,
    scheme: &BlockScheme,
) -> Result<HypothesisStats, ScalingError> {
    let chains: Vec<&[i8]> = batch
        .pairs
        .iter()
        .flat_map(|p| [p.sigma1.as_slice(), p.sigma2.as_slice()])
        .collect();
    hypothesis_stats(&chains, scheme)
}

/// The truncated susceptibility computed from an exactly enumerated system,
/// for cross-checking the Monte Carlo estimator.
pub fn chi_from_exact(summary: &crate::oracle::ExactSummary, k_cut: usize) -> f64 {
    let cov = &summary.pair_covariances;
    let mut chi = cov[0][0];
    for k in 1..=k_cut.min(cov.len() - 1) {
        chi += 2.0 * cov[0][k];
    }
    chi
}

/// A rescaled partial-sum path: n+1 nodes at times k/n, linear in between.
/// One-dimensional paths keep their second coordinate at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PathProcess {
    pub sigma: f64,
    pub n: usize,
    pub dim: u8,
    nodes: Vec<[f64; 2]>,
}

impl PathProcess {
    fn build(sigma: f64, dim: u8, nodes: Vec<[f64; 2]>) -> Result<Self, ScalingError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(ScalingError::BadSigma(sigma));
        }
        if nodes.len() < 2 {
            return Err(ScalingError::Empty);
        }
        Ok(PathProcess {
            sigma,
            n: nodes.len() - 1,
            dim,
            nodes,
        })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// Value at time t by linear interpolation; node times are hit exactly
    /// (a tiny snap window absorbs the roundoff of t*n at t = k/n).
    pub fn value_at(&self, t: f64) -> Result<[f64; 2], ScalingError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(ScalingError::BadTime(t));
        }
        let x = t * self.n as f64;
        let nearest = x.round();
        if (x - nearest).abs() <= 1e-9 {
            return Ok(self.nodes[nearest as usize]);
        }
        let k = x.floor() as usize;
        let w = x - k as f64;
        let (a, b) = (self.nodes[k], self.nodes[k + 1]);
        Ok([a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])])
    }
}

/// Rescaled planar path of a polymer: node k is S_k / (sigma sqrt(n)).
pub fn build_w_path(p: &Polymer, sigma: f64) -> Result<PathProcess, ScalingError> {
    let n = p.len();
    let scale = 1.0 / (sigma * (n as f64).sqrt());
    let nodes = p
        .sites()
        .iter()
        .map(|s| [s[0] as f64 * scale, s[1] as f64 * scale])
        .collect();
    PathProcess::build(sigma, 2, nodes)
}

/// Rescaled planar path of the rotated pair: node k is
/// (S^1_k, S^2_k) / (sigma sqrt(2n)). With the same sigma this is the
/// 45-degree rotated image of `build_w_path` of the polymer, norm for norm:
/// the component sums carry a factor sqrt(2) that the sqrt(2n) cancels.
pub fn build_w_path_rotated(
    pair: &SpinChainPair,
    sigma: f64,
) -> Result<PathProcess, ScalingError> {
    let n = pair.sigma1.len();
    let s1 = partial_sums_chain(&pair.sigma1);
    let s2 = partial_sums_chain(&pair.sigma2);
    let scale = 1.0 / (sigma * (2.0 * n as f64).sqrt());
    let nodes = s1
        .iter()
        .zip(&s2)
        .map(|(&a, &b)| [a as f64 * scale, b as f64 * scale])
        .collect();
    PathProcess::build(sigma, 2, nodes)
}

/// Rescaled scalar path of a single chain: node k is S_k / (sigma sqrt(n)).
pub fn build_z_path(chain: &[i8], sigma: f64) -> Result<PathProcess, ScalingError> {
    if chain.is_empty() {
        return Err(ScalingError::Empty);
    }
    let scale = 1.0 / (sigma * (chain.len() as f64).sqrt());
    let nodes = partial_sums_chain(chain)
        .iter()
        .map(|&s| [s as f64 * scale, 0.0])
        .collect();
    PathProcess::build(sigma, 1, nodes)
}

/// Equal-weight empirical measure of path values at one time.
pub fn marginal_samples(
    paths: &[PathProcess],
    t: f64,
) -> Result<EmpiricalMeasure, ScalingError> {
    if paths.is_empty() {
        return Err(ScalingError::Empty);
    }
    let dim = paths[0].dim;
    if paths.iter().any(|p| p.dim != dim) {
        return Err(ScalingError::MixedDimensions);
    }
    let mut points = Vec::with_capacity(paths.len());
    for p in paths {
        points.push(p.value_at(t)?);
    }
    let measure = if dim == 1 {
        let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
        EmpiricalMeasure::from_points_1d(&xs)
    } else {
        EmpiricalMeasure::from_points_2d(&points)
    };
    measure.map_err(|_| ScalingError::Empty)
}
