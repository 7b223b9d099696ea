//! Phase scan over a (beta, n) grid: sample chains, form rescaled paths, and
//! measure transport distances to the Gaussian reference at a set of times.
//!
//! Each grid cell is an independent job (parallelized with rayon) seeded by a
//! SplitMix64 mix of the master seed and the cell index, so reports are
//! byte-identical across reruns and across thread schedules.  Per beta the
//! scan fits a growth exponent, checks the distance trend across chain
//! lengths, and issues a diffusive / ballistic / undecided verdict; a
//! crossover bracket is derived from the verdict sequence when one exists.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{spins_to_polymer, GibbsParams, InteractionKernel, ModelError};
use crate::sampler::{sample_chain, Algorithm, SampleBatch, SamplerConfig, SamplerError};
use crate::scaling::{
    build_w_path_rotated, hypothesis_stats_from_batch, BlockScheme, PathProcess, ScalingError,
};
use crate::stats::{jackknife_se, ols_slope, spearman};
use crate::wasserstein::{
    d_p_to_gaussian, EmpiricalMeasure, GaussianMode, WassersteinError,
};

/// Stream pairs drawn per cell; replicas are split across them.
const STREAM_PAIRS: usize = 8;
/// Delete-block jackknife blocks for the pooled quadratic distance estimate.
const JACKKNIFE_BLOCKS: usize = 20;
/// Fitted exponents outside this window usually mean the lengths are too
/// short for the asymptotic regime; the verdict machinery still runs but the
/// summary carries a flag.
const GAMMA_WINDOW: (f64, f64) = (0.4, 1.1);

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid scan config: {0}")]
    Config(String),
    #[error("classification needs at least 3 chain lengths, got {0}")]
    InsufficientGrid(usize),
    #[error("no crossover bracket: {0}")]
    NoBracket(String),
    #[error("cell (beta={beta}, n={n}) failed: {source}")]
    Cell {
        beta: f64,
        n: usize,
        #[source]
        source: Box<ScanError>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Transport(#[from] WassersteinError),
    #[error("report io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Sampler knobs the scan owns.  The sampler's own defaults burn in for
/// 100 * n sweeps, which is safety margin for arbitrary single-site dynamics;
/// a grid cell at n = 2^14 cannot afford that.  The cluster algorithm mixes in
/// a handful of sweeps away from the critical window, and the mixing
/// diagnostics still flag any cell where thinning looks too short.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSettings {
    pub algorithm: Algorithm,
    pub burn_in_sweeps: usize,
    pub thinning_sweeps: usize,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        SamplerSettings {
            algorithm: Algorithm::ClusterLongRange,
            burn_in_sweeps: 128,
            thinning_sweeps: 4,
        }
    }
}

/// Verdict thresholds.  Overridable through the config and echoed in the
/// report so a verdict can always be traced back to the rule that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Diffusive requires gamma_hat below this.
    pub gamma_diffusive_max: f64,
    /// Ballistic requires gamma_hat above this.
    pub gamma_ballistic_min: f64,
    /// Minimum Spearman rho of the distance trend for the ballistic rule.
    pub spearman_abs_min: f64,
    /// Ballistic requires squared speed above this.
    pub speed_sq_min: f64,
    /// Diffusive requires the distance trend slope z-score below this.
    pub trend_z_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            gamma_diffusive_max: 0.6,
            gamma_ballistic_min: 0.9,
            spearman_abs_min: 0.8,
            speed_sq_min: 0.04,
            trend_z_max: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub alpha: f64,
    /// Coupling grid, strictly ascending, nonnegative.
    pub beta_grid: Vec<f64>,
    /// Chain lengths, strictly ascending; at least three so trends are ranked.
    pub n_grid: Vec<usize>,
    /// Path times in (0, 1], strictly ascending.  Verdicts use the last one.
    pub t_grid: Vec<f64>,
    /// Transport order in (0, 2].
    pub p: f64,
    /// Polymer samples per cell.
    pub replicas: usize,
    pub seed: u64,
    /// Block mesh exponent for the variance diagnostics, in (0, 1/4).
    pub block_delta: f64,
    /// Gaussian reference draws for the sampled planar route (p != 2).
    pub ref_samples: usize,
    pub sampler: SamplerSettings,
    pub thresholds: Thresholds,
    /// JSON report path; also receives partial results if a cell fails.
    pub out: Option<PathBuf>,
    /// Flat per-(beta, n, t) table.
    pub csv_out: Option<PathBuf>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            alpha: 1.5,
            beta_grid: vec![0.0, 0.4, 0.8, 1.2],
            n_grid: vec![256, 1024, 4096],
            t_grid: vec![0.25, 0.5, 1.0],
            p: 2.0,
            replicas: 800,
            seed: 1,
            block_delta: 0.2,
            ref_samples: 512,
            sampler: SamplerSettings::default(),
            thresholds: Thresholds::default(),
            out: None,
            csv_out: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Diffusive,
    Ballistic,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Diffusive => "diffusive",
            Verdict::Ballistic => "ballistic",
            Verdict::Undecided => "undecided",
        };
        f.write_str(s)
    }
}

/// Distance to the Gaussian reference at one path time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistancePoint {
    pub t: f64,
    pub d_p: f64,
    /// Jackknife error bar; absent when there are too few replicas.
    pub d_p_se: Option<f64>,
    /// Mean squared norm of the path marginal; the reference value is 2t.
    pub w_sq_mean: f64,
    pub w_sq_se: f64,
}

/// One grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub beta: f64,
    pub n: usize,
    pub chi_hat: f64,
    pub chi_hat_avg: f64,
    pub var_ratio: f64,
    pub block_var_ratio: f64,
    /// Normalization actually used for the paths: sqrt(chi_hat_avg / 2).
    pub sigma_hat: f64,
    pub distances: Vec<DistancePoint>,
    /// Mean squared Euclidean end-to-end displacement.
    pub end_sq_euclid: f64,
    pub end_sq_euclid_se: f64,
    /// Mean squared taxicab end-to-end displacement; the ballisticity bound
    /// lives in this norm.
    pub end_l1_sq: f64,
    /// Mean taxicab displacement per step.
    pub speed: f64,
    pub speed_se: f64,
    /// Set when the sampler's mixing diagnostics raised warnings.  The row is
    /// reported anyway; downstream readers decide how much to trust it.
    pub low_confidence: bool,
    pub warnings: Vec<String>,
}

/// Per-coupling summary across the length grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSummary {
    pub beta: f64,
    /// Half the log-log slope of end_sq_euclid against n.
    pub gamma_hat: f64,
    /// False when gamma_hat falls outside the plausible scaling window.
    pub gamma_sane: bool,
    /// Spearman rank correlation of d_p at the last time against n.
    pub distance_trend_rho: f64,
    /// Speed at the largest length, used by the ballistic rule.
    pub speed: f64,
    pub speed_se: f64,
    pub verdict: Verdict,
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub config: ScanConfig,
    /// Rows in grid order: beta-major, then n ascending.
    pub rows: Vec<ScanRow>,
    pub betas: Vec<BetaSummary>,
    /// (last diffusive beta below the first ballistic one, first ballistic
    /// beta above the last diffusive one); absent when the verdicts do not
    /// bracket a crossover.
    pub crossover_bracket: Option<[f64; 2]>,
}

/// SplitMix64 finalizer; decorrelates per-cell streams from the master seed.
fn mix_seed(master: u64, salt: u64) -> u64 {
    let mut z = master ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn validate(cfg: &ScanConfig) -> Result<(), ScanError> {
    let bad = |msg: String| Err(ScanError::Config(msg));
    if !(cfg.alpha > 1.0 && cfg.alpha <= 2.0) {
        return bad(format!("alpha must lie in (1, 2], got {}", cfg.alpha));
    }
    if cfg.beta_grid.is_empty() {
        return bad("beta_grid is empty".into());
    }
    if cfg.beta_grid.iter().any(|b| !b.is_finite() || *b < 0.0) {
        return bad("beta_grid entries must be finite and nonnegative".into());
    }
    if cfg.beta_grid.windows(2).any(|w| w[0] >= w[1]) {
        return bad("beta_grid must be strictly ascending".into());
    }
    if cfg.n_grid.len() < 3 {
        return bad(format!(
            "n_grid needs at least 3 lengths for trend ranking, got {}",
            cfg.n_grid.len()
        ));
    }
    if cfg.n_grid.iter().any(|n| *n < 2) {
        return bad("n_grid entries must be at least 2".into());
    }
    if cfg.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return bad("n_grid must be strictly ascending".into());
    }
    if cfg.t_grid.is_empty() {
        return bad("t_grid is empty".into());
    }
    if cfg.t_grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return bad("t_grid entries must lie in (0, 1]".into());
    }
    if cfg.t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return bad("t_grid must be strictly ascending".into());
    }
    if !(cfg.p > 0.0 && cfg.p <= 2.0) {
        return bad(format!("p must lie in (0, 2], got {}", cfg.p));
    }
    if cfg.replicas < 2 {
        return bad("replicas must be at least 2".into());
    }
    if !(cfg.block_delta > 0.0 && cfg.block_delta < 0.25) {
        return bad(format!(
            "block_delta must lie in (0, 1/4), got {}",
            cfg.block_delta
        ));
    }
    if cfg.ref_samples == 0 {
        return bad("ref_samples must be positive".into());
    }
    if cfg.sampler.thinning_sweeps == 0 {
        return bad("thinning_sweeps must be positive".into());
    }
    Ok(())
}

/// Slope z-score of the distance trend against log n, weighting points by
/// their jackknife error bars when all are present.  With known per-point
/// variances the slope variance is 1 / sum w (x - xbar_w)^2; without them the
/// classic residual-based standard error is used instead.
fn trend_slope_z(log_n: &[f64], d: &[f64], ses: &[Option<f64>]) -> f64 {
    let k = log_n.len();
    if ses.iter().all(|s| s.is_some()) {
        let w: Vec<f64> = ses
            .iter()
            .map(|s| {
                let s = s.unwrap().max(1e-9);
                1.0 / (s * s)
            })
            .collect();
        let wsum: f64 = w.iter().sum();
        let xbar = log_n.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / wsum;
        let ybar = d.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / wsum;
        let sxx: f64 = log_n.iter().zip(&w).map(|(x, w)| w * (x - xbar) * (x - xbar)).sum();
        let sxy: f64 = log_n
            .iter()
            .zip(d)
            .zip(&w)
            .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
            .sum();
        (sxy / sxx) * sxx.sqrt()
    } else {
        let slope = ols_slope(log_n, d);
        let xbar = log_n.iter().sum::<f64>() / k as f64;
        let ybar = d.iter().sum::<f64>() / k as f64;
        let sxx: f64 = log_n.iter().map(|x| (x - xbar) * (x - xbar)).sum();
        let sse: f64 = log_n
            .iter()
            .zip(d)
            .map(|(x, y)| {
                let r = y - ybar - slope * (x - xbar);
                r * r
            })
            .sum();
        let se = (sse / (k as f64 - 2.0) / sxx).sqrt();
        if se == 0.0 {
            if slope == 0.0 {
                0.0
            } else {
                slope.signum() * f64::INFINITY
            }
        } else {
            slope / se
        }
    }
}

/// Trend-plus-exponent verdict for one coupling.
///
/// `d_p_by_n` holds the distance at the scan's last time, one entry per chain
/// length in ascending order, with its error bars.  Ballistic needs a firmly
/// increasing rank trend, a large exponent, and a speed that is both
/// macroscopic and statistically resolved (at least ten standard errors from
/// zero).  Diffusive needs a small exponent and a distance trend that is not
/// significantly increasing (slope z-score against log n below the
/// threshold).  The diffusive gate is deliberately not a rank test: deep in
/// the diffusive phase the distances sit at the estimator's sampling floor
/// and their ordering is a coin flip, so demanding a strictly decreasing
/// sequence would misclassify genuinely Brownian rows about half the time.
/// The z-score keeps the directional content (an increasing trend blocks the
/// diffusive verdict) while tolerating statistically flat sequences.
/// Everything else is undecided.
pub fn classify(
    n_grid: &[usize],
    d_p_by_n: &[f64],
    d_p_ses: &[Option<f64>],
    gamma_hat: f64,
    speed: f64,
    speed_se: f64,
    thresholds: &Thresholds,
) -> Result<Verdict, ScanError> {
    if d_p_by_n.len() < 3 {
        return Err(ScanError::InsufficientGrid(d_p_by_n.len()));
    }
    if n_grid.len() != d_p_by_n.len() || d_p_ses.len() != d_p_by_n.len() {
        return Err(ScanError::Config(format!(
            "classify needs parallel slices, got {} lengths, {} distances, {} error bars",
            n_grid.len(),
            d_p_by_n.len(),
            d_p_ses.len()
        )));
    }
    let idx: Vec<f64> = (0..d_p_by_n.len()).map(|i| i as f64).collect();
    let rho = spearman(&idx, d_p_by_n);
    let log_n: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let z = trend_slope_z(&log_n, d_p_by_n, d_p_ses);
    if rho > thresholds.spearman_abs_min
        && gamma_hat > thresholds.gamma_ballistic_min
        && speed * speed > thresholds.speed_sq_min
        && speed >= 10.0 * speed_se
    {
        return Ok(Verdict::Ballistic);
    }
    if gamma_hat < thresholds.gamma_diffusive_max && z < thresholds.trend_z_max {
        return Ok(Verdict::Diffusive);
    }
    Ok(Verdict::Undecided)
}

/// Crossover bracket from a verdict sequence on an ascending coupling grid:
/// the last diffusive coupling before the first ballistic one, and the first
/// ballistic coupling after the last diffusive one.  Undecided entries in
/// between are skipped over; a missing side is an error.
pub fn bracket_crossover(betas: &[f64], verdicts: &[Verdict]) -> Result<[f64; 2], ScanError> {
    if betas.len() != verdicts.len() {
        return Err(ScanError::Config(format!(
            "bracket needs parallel slices, got {} betas and {} verdicts",
            betas.len(),
            verdicts.len()
        )));
    }
    let first_b = verdicts
        .iter()
        .position(|v| *v == Verdict::Ballistic)
        .ok_or_else(|| ScanError::NoBracket("no ballistic verdict in the grid".into()))?;
    let last_d = verdicts
        .iter()
        .rposition(|v| *v == Verdict::Diffusive)
        .ok_or_else(|| ScanError::NoBracket("no diffusive verdict in the grid".into()))?;
    let lo = verdicts[..first_b]
        .iter()
        .rposition(|v| *v == Verdict::Diffusive)
        .ok_or_else(|| {
            ScanError::NoBracket("no diffusive verdict below the first ballistic one".into())
        })?;
    let hi = verdicts[last_d + 1..]
        .iter()
        .position(|v| *v == Verdict::Ballistic)
        .map(|k| last_d + 1 + k)
        .ok_or_else(|| {
            ScanError::NoBracket("no ballistic verdict above the last diffusive one".into())
        })?;
    Ok([betas[lo], betas[hi]])
}

/// Pooled scalar transport distance for the quadratic case.
///
/// Both rotated path components carry the same law and are independent, so
/// the planar quadratic distance to the Gaussian reference tensorizes:
/// pooling the 2R component values into one scalar sample and scaling the
/// scalar distance by sqrt(2) is exact for the product law and halves the
/// empirical floor compared with a planar estimate on R points.
fn pooled_d2(components: &[[f64; 2]], t: f64) -> Result<f64, ScanError> {
    let pooled: Vec<f64> = components.iter().flat_map(|v| [v[0], v[1]]).collect();
    let mu = EmpiricalMeasure::from_points_1d(&pooled)?;
    let g = d_p_to_gaussian(&mu, t, 2.0, GaussianMode::OneD, 0, 0)?;
    Ok(std::f64::consts::SQRT_2 * g.distance)
}

fn d2_with_jackknife(components: &[[f64; 2]], t: f64) -> Result<(f64, Option<f64>), ScanError> {
    let d = pooled_d2(components, t)?;
    let r = components.len();
    let se = if r >= JACKKNIFE_BLOCKS {
        let mut reps = Vec::with_capacity(JACKKNIFE_BLOCKS);
        for b in 0..JACKKNIFE_BLOCKS {
            let lo = b * r / JACKKNIFE_BLOCKS;
            let hi = (b + 1) * r / JACKKNIFE_BLOCKS;
            let kept: Vec<[f64; 2]> = components[..lo]
                .iter()
                .chain(&components[hi..])
                .copied()
                .collect();
            reps.push(pooled_d2(&kept, t)?);
        }
        Some(jackknife_se(&reps))
    } else {
        None
    };
    Ok((d, se))
}

/// Sample mean and standard error of the squared marginal norm.
fn w_sq_stats(components: &[[f64; 2]]) -> (f64, f64) {
    let sq: Vec<f64> = components.iter().map(|v| v[0] * v[0] + v[1] * v[1]).collect();
    (crate::stats::mean(&sq), crate::stats::se_mean(&sq))
}

struct CellOutput {
    row: ScanRow,
}

fn run_cell(cfg: &ScanConfig, beta: f64, n: usize, cell_seed: u64) -> Result<CellOutput, ScanError> {
    let kernel = InteractionKernel::power_law(cfg.alpha)?;
    let params = GibbsParams::new(beta, kernel, n)?;
    let sampler_cfg = SamplerConfig {
        seed: cell_seed,
        burn_in_sweeps: cfg.sampler.burn_in_sweeps,
        thinning_sweeps: cfg.sampler.thinning_sweeps,
        n_samples: cfg.replicas.div_ceil(STREAM_PAIRS),
        algorithm: cfg.sampler.algorithm,
        replicas: STREAM_PAIRS,
    };
    let mut batch: SampleBatch = sample_chain(&params, &sampler_cfg)?;
    batch.pairs.truncate(cfg.replicas);

    let scheme = BlockScheme::from_delta(n, cfg.block_delta)?;
    let stats = hypothesis_stats_from_batch(&batch, &scheme)?;
    let sigma_hat = (stats.chi_hat_avg / 2.0).sqrt();

    // One pass over the replicas: each rescaled path is built, read at the
    // grid times, and dropped, so memory stays O(replicas * |t_grid|) instead
    // of holding every n-node path at once.  End-to-end moments accumulate in
    // exact integer arithmetic before any division.
    let r = batch.pairs.len() as f64;
    let mut marginals: Vec<Vec<[f64; 2]>> =
        vec![Vec::with_capacity(batch.pairs.len()); cfg.t_grid.len()];
    let mut sq_sum: i128 = 0;
    let mut sq_sq_sum: i128 = 0;
    let mut l1_sum: i128 = 0;
    let mut l1_sq_sum: i128 = 0;
    for pair in &batch.pairs {
        let path: PathProcess = build_w_path_rotated(pair, sigma_hat)?;
        for (ti, &t) in cfg.t_grid.iter().enumerate() {
            marginals[ti].push(path.value_at(t)?);
        }
        let end = spins_to_polymer(pair)?.end_to_end();
        let sq = (end[0] * end[0] + end[1] * end[1]) as i128;
        let l1 = (end[0].abs() + end[1].abs()) as i128;
        sq_sum += sq;
        sq_sq_sum += sq * sq;
        l1_sum += l1;
        l1_sq_sum += l1 * l1;
    }
    let end_sq_euclid = sq_sum as f64 / r;
    let end_sq_var = (sq_sq_sum as f64 / r - end_sq_euclid * end_sq_euclid).max(0.0);
    let end_sq_euclid_se = (end_sq_var / (r - 1.0)).sqrt();
    let l1_mean = l1_sum as f64 / r;
    let end_l1_sq = l1_sq_sum as f64 / r;
    let l1_var = (end_l1_sq - l1_mean * l1_mean).max(0.0);
    let speed = l1_mean / n as f64;
    let speed_se = (l1_var / (r - 1.0)).sqrt() / n as f64;

    let mut distances = Vec::with_capacity(cfg.t_grid.len());
    for (ti, &t) in cfg.t_grid.iter().enumerate() {
        let components = &marginals[ti];
        let (w_sq_mean, w_sq_se) = w_sq_stats(components);
        let (d_p, d_p_se) = if cfg.p == 2.0 {
            d2_with_jackknife(components, t)?
        } else {
            // The sampled planar route solves an assignment between the path
            // marginal and the reference draw; keep the two sides the same
            // size so the fast uniform solver applies, subsampling replicas
            // if needed.
            let sub = cfg.replicas.min(cfg.ref_samples);
            let marginal = EmpiricalMeasure::from_points_2d(&components[..sub])?;
            let ref_seed = mix_seed(cell_seed, 0x7EF5 + ti as u64);
            let g = d_p_to_gaussian(
                &marginal,
                t,
                cfg.p,
                GaussianMode::TwoD,
                cfg.ref_samples,
                ref_seed,
            )?;
            (g.distance, g.se)
        };
        distances.push(DistancePoint {
            t,
            d_p,
            d_p_se,
            w_sq_mean,
            w_sq_se,
        });
    }

    let warnings = batch.meta.warnings.clone();
    Ok(CellOutput {
        row: ScanRow {
            beta,
            n,
            chi_hat: stats.chi_hat,
            chi_hat_avg: stats.chi_hat_avg,
            var_ratio: stats.var_ratio,
            block_var_ratio: stats.block_var_ratio,
            sigma_hat,
            distances,
            end_sq_euclid,
            end_sq_euclid_se,
            end_l1_sq,
            speed,
            speed_se,
            low_confidence: !warnings.is_empty(),
            warnings,
        },
    })
}

/// Runs the full grid and assembles the report.
///
/// Cells run in parallel but are collected in grid order, and every random
/// choice derives from the master seed and the cell index, so the report is a
/// pure function of the config.  A failing cell aborts the scan with its
/// coordinates in the error; rows that did complete are persisted next to the
/// configured output path first.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanReport, ScanError> {
    validate(cfg)?;
    let n_len = cfg.n_grid.len();
    let cells: Vec<(usize, usize)> = (0..cfg.beta_grid.len())
        .flat_map(|bi| (0..n_len).map(move |ni| (bi, ni)))
        .collect();

    let outcomes: Vec<Result<CellOutput, ScanError>> = cells
        .par_iter()
        .map(|&(bi, ni)| {
            let beta = cfg.beta_grid[bi];
            let n = cfg.n_grid[ni];
            let cell_seed = mix_seed(cfg.seed, (bi * n_len + ni) as u64);
            run_cell(cfg, beta, n, cell_seed).map_err(|e| ScanError::Cell {
                beta,
                n,
                source: Box::new(e),
            })
        })
        .collect();

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut failure: Option<ScanError> = None;
    for outcome in outcomes {
        match outcome {
            Ok(cell) => rows.push(cell.row),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    if let Some(err) = failure {
        if let Some(out) = &cfg.out {
            let partial = serde_json::json!({
                "partial": true,
                "error": err.to_string(),
                "rows": rows,
            });
            let path = out.with_extension("partial.json");
            let body = serde_json::to_string_pretty(&partial).expect("partial serializes");
            fs::write(path, body + "\n")?;
        }
        return Err(err);
    }

    let mut betas = Vec::with_capacity(cfg.beta_grid.len());
    for (bi, &beta) in cfg.beta_grid.iter().enumerate() {
        let block = &rows[bi * n_len..(bi + 1) * n_len];
        let log_n: Vec<f64> = cfg.n_grid.iter().map(|&n| (n as f64).ln()).collect();
        let log_sq: Vec<f64> = block.iter().map(|row| row.end_sq_euclid.ln()).collect();
        let gamma_hat = ols_slope(&log_n, &log_sq) / 2.0;
        let d_last: Vec<f64> = block
            .iter()
            .map(|row| row.distances.last().expect("t_grid nonempty").d_p)
            .collect();
        let d_ses: Vec<Option<f64>> = block
            .iter()
            .map(|row| row.distances.last().expect("t_grid nonempty").d_p_se)
            .collect();
        let idx: Vec<f64> = (0..d_last.len()).map(|i| i as f64).collect();
        let rho = spearman(&idx, &d_last);
        let top = block.last().expect("n_grid nonempty");
        let verdict = classify(
            &cfg.n_grid,
            &d_last,
            &d_ses,
            gamma_hat,
            top.speed,
            top.speed_se,
            &cfg.thresholds,
        )?;
        betas.push(BetaSummary {
            beta,
            gamma_hat,
            gamma_sane: gamma_hat >= GAMMA_WINDOW.0 && gamma_hat <= GAMMA_WINDOW.1,
            distance_trend_rho: rho,
            speed: top.speed,
            speed_se: top.speed_se,
            verdict,
            low_confidence: block.iter().any(|row| row.low_confidence),
        });
    }

    let verdicts: Vec<Verdict> = betas.iter().map(|b| b.verdict).collect();
    let crossover_bracket = bracket_crossover(&cfg.beta_grid, &verdicts).ok();

    let report = ScanReport {
        config: cfg.clone(),
        rows,
        betas,
        crossover_bracket,
    };
    if let Some(out) = &cfg.out {
        write_report_json(&report, out)?;
    }
    if let Some(csv_out) = &cfg.csv_out {
        write_report_csv(&report, csv_out)?;
    }
    Ok(report)
}

pub fn report_to_json(report: &ScanReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn write_report_json(report: &ScanReport, path: &Path) -> Result<(), ScanError> {
    fs::write(path, report_to_json(report) + "\n")?;
    Ok(())
}

/// One line per (beta, n, t).  gamma_hat and speed repeat across the rows of
/// their cell or coupling; consumers filter what they need.
pub fn write_report_csv(report: &ScanReport, path: &Path) -> Result<(), ScanError> {
    let n_len = report.config.n_grid.len();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "beta",
        "n",
        "t",
        "d_p",
        "d_p_se",
        "chi_hat",
        "var_ratio",
        "block_var_ratio",
        "gamma_hat",
        "speed",
    ])?;
    for (ri, row) in report.rows.iter().enumerate() {
        let gamma = report.betas[ri / n_len].gamma_hat;
        for dp in &row.distances {
            w.write_record(&[
                row.beta.to_string(),
                row.n.to_string(),
                dp.t.to_string(),
                dp.d_p.to_string(),
                dp.d_p_se.map(|s| s.to_string()).unwrap_or_default(),
                row.chi_hat.to_string(),
                row.var_ratio.to_string(),
                row.block_var_ratio.to_string(),
                gamma.to_string(),
                row.speed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        validate(&ScanConfig::default()).unwrap();
    }

    #[test]
    fn validation_rejects_each_bad_field() {
        let ok = ScanConfig::default();
        let cases: Vec<(&str, ScanConfig)> = vec![
            ("alpha low", ScanConfig { alpha: 1.0, ..ok.clone() }),
            ("alpha high", ScanConfig { alpha: 2.5, ..ok.clone() }),
            ("empty beta", ScanConfig { beta_grid: vec![], ..ok.clone() }),
            ("negative beta", ScanConfig { beta_grid: vec![-0.1, 0.5], ..ok.clone() }),
            ("unsorted beta", ScanConfig { beta_grid: vec![0.5, 0.2], ..ok.clone() }),
            ("short n_grid", ScanConfig { n_grid: vec![64, 128], ..ok.clone() }),
            ("tiny n", ScanConfig { n_grid: vec![1, 2, 4], ..ok.clone() }),
            ("unsorted n", ScanConfig { n_grid: vec![64, 32, 128], ..ok.clone() }),
            ("empty t_grid", ScanConfig { t_grid: vec![], ..ok.clone() }),
            ("t zero", ScanConfig { t_grid: vec![0.0, 1.0], ..ok.clone() }),
            ("t past one", ScanConfig { t_grid: vec![0.5, 1.5], ..ok.clone() }),
            ("p zero", ScanConfig { p: 0.0, ..ok.clone() }),
            ("p high", ScanConfig { p: 2.5, ..ok.clone() }),
            ("one replica", ScanConfig { replicas: 1, ..ok.clone() }),
            ("delta high", ScanConfig { block_delta: 0.25, ..ok.clone() }),
            ("no refs", ScanConfig { ref_samples: 0, ..ok.clone() }),
            (
                "no thinning",
                ScanConfig {
                    sampler: SamplerSettings { thinning_sweeps: 0, ..ok.sampler },
                    ..ok.clone()
                },
            ),
        ];
        for (label, cfg) in cases {
            assert!(
                matches!(validate(&cfg), Err(ScanError::Config(_))),
                "{label} should be rejected"
            );
        }
    }

    #[test]
    fn classify_follows_trend_and_exponent() {
        let th = Thresholds::default();
        let ns = [256, 1024, 4096];
        let tight = [Some(0.01), Some(0.01), Some(0.01)];
        let d_down = [0.50, 0.30, 0.20];
        let d_up = [0.10, 0.20, 0.30];
        let d_flat = [0.30, 0.50, 0.20];
        let c = |d: &[f64], ses: &[Option<f64>], g: f64, v: f64, se: f64| {
            classify(&ns, d, ses, g, v, se, &th).unwrap()
        };
        assert_eq!(c(&d_down, &tight, 0.5, 0.01, 0.001), Verdict::Diffusive);
        assert_eq!(c(&d_up, &tight, 1.0, 0.9, 0.01), Verdict::Ballistic);
        assert_eq!(c(&d_flat, &tight, 0.75, 0.5, 0.01), Verdict::Undecided);
        // Right trend, wrong exponent.
        assert_eq!(c(&d_down, &tight, 0.8, 0.01, 0.001), Verdict::Undecided);
        assert_eq!(c(&d_up, &tight, 0.8, 0.9, 0.01), Verdict::Undecided);
        // Macroscopic speed but statistically unresolved: never ballistic.
        assert_eq!(c(&d_up, &tight, 1.0, 0.5, 0.2), Verdict::Undecided);
        // Speed below the macroscopic floor.
        assert_eq!(c(&d_up, &tight, 1.0, 0.1, 0.001), Verdict::Undecided);
        // A statistically flat sequence with big error bars still reads
        // diffusive when the exponent is right: the trend carries no signal.
        let loose = [Some(0.2), Some(0.2), Some(0.2)];
        assert_eq!(c(&d_flat, &loose, 0.5, 0.01, 0.001), Verdict::Diffusive);
        // A resolved increasing trend blocks the diffusive verdict even with
        // a small exponent.
        assert_eq!(c(&d_up, &tight, 0.55, 0.01, 0.001), Verdict::Undecided);
        // Without error bars the residual-based fallback drives the z-score.
        let none = [None, None, None];
        assert_eq!(c(&d_down, &none, 0.5, 0.01, 0.001), Verdict::Diffusive);
        assert_eq!(c(&[0.1, 0.2, 0.3], &none, 0.5, 0.01, 0.001), Verdict::Undecided);
    }

    #[test]
    fn classify_needs_three_lengths() {
        let th = Thresholds::default();
        assert!(matches!(
            classify(&[64, 128], &[0.4, 0.2], &[None, None], 0.5, 0.0, 0.0, &th),
            Err(ScanError::InsufficientGrid(2))
        ));
    }

    #[test]
    fn bracket_skips_undecided_middles() {
        use Verdict::*;
        let betas = [0.2, 0.4, 0.6, 0.8, 1.0];
        let verdicts = [Diffusive, Diffusive, Undecided, Ballistic, Ballistic];
        assert_eq!(bracket_crossover(&betas, &verdicts).unwrap(), [0.4, 0.8]);
    }

    #[test]
    fn bracket_handles_tight_and_missing_cases() {
        use Verdict::*;
        assert_eq!(
            bracket_crossover(&[0.1, 0.9], &[Diffusive, Ballistic]).unwrap(),
            [0.1, 0.9]
        );
        assert!(matches!(
            bracket_crossover(&[0.1, 0.9], &[Diffusive, Diffusive]),
            Err(ScanError::NoBracket(_))
        ));
        assert!(matches!(
            bracket_crossover(&[0.1, 0.9], &[Ballistic, Ballistic]),
            Err(ScanError::NoBracket(_))
        ));
        // Inverted order never brackets.
        assert!(matches!(
            bracket_crossover(&[0.1, 0.9], &[Ballistic, Diffusive]),
            Err(ScanError::NoBracket(_))
        ));
    }

    #[test]
    fn bracket_widens_around_non_monotone_verdicts() {
        use Verdict::*;
        let betas = [0.1, 0.3, 0.5, 0.7, 0.9];
        let verdicts = [Diffusive, Undecided, Ballistic, Diffusive, Ballistic];
        assert_eq!(bracket_crossover(&betas, &verdicts).unwrap(), [0.1, 0.9]);
    }

    #[test]
    fn cell_seeds_are_stable_and_distinct() {
        assert_eq!(mix_seed(42, 7), mix_seed(42, 7));
        assert_ne!(mix_seed(42, 7), mix_seed(42, 8));
        assert_ne!(mix_seed(42, 7), mix_seed(43, 7));
    }
}
