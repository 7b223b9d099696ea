//! Thin command-line front end over the library.
//!
//! Each subcommand maps onto one library capability: `sample` draws Monte
//! Carlo batches (optionally dumping raw spins), `enumerate` prints exact
//! small-system summaries, `blocks` reports block-variance statistics of a
//! sampled batch, `wasserstein` computes distances between two point lists,
//! and `scan` runs the full grid pipeline. All structured output is JSON on
//! stdout. Exit codes: 0 success, 2 bad input or failed run, 3 scan finished
//! without a crossover bracket.

use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polyscale::model::{spins_to_polymer, GibbsParams, InteractionKernel};
use polyscale::oracle;
use polyscale::sampler::{sample_chain, Algorithm, SamplerConfig};
use polyscale::scaling::{
    build_w_path_rotated, chi_tail_hint, hypothesis_stats_from_batch, BlockScheme,
};
use polyscale::scan::{run_scan, report_to_json, ScanConfig};
use polyscale::wasserstein::{
    d_p_1d, d_p_exact_2d, EmpiricalMeasure, GroundNorm, SolverOptions,
};
use rand::seq::index::sample as index_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "polyscale",
    version,
    about = "Planar long-range polymer measures: sampling, exact enumeration, \
             block scaling, Wasserstein distances, and phase scans"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw spin-chain pairs from the Gibbs measure and summarize them
    Sample(SampleArgs),
    /// Exactly enumerate a small chain or polymer and print the summary
    Enumerate(EnumerateArgs),
    /// Sample a batch and report block-variance statistics
    Blocks(BlocksArgs),
    /// Order-p distance between two CSV point lists
    Wasserstein(WassersteinArgs),
    /// Run a (beta, n) grid scan and classify each beta
    Scan(ScanArgs),
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    match s {
        "metropolis" | "metropolis_single_flip" => Ok(Algorithm::MetropolisSingleFlip),
        "heatbath" => Ok(Algorithm::Heatbath),
        "cluster" | "cluster_long_range" => Ok(Algorithm::ClusterLongRange),
        _ => Err(format!(
            "unknown algorithm '{s}' (metropolis | heatbath | cluster)"
        )),
    }
}

fn parse_norm(s: &str) -> Result<GroundNorm, String> {
    match s {
        "euclid" | "l2" => Ok(GroundNorm::Euclid),
        "l1" => Ok(GroundNorm::L1),
        _ => Err(format!("unknown norm '{s}' (euclid | l1)")),
    }
}

/// The sampler's library default burn-in (100 n sweeps) is sized for
/// single-flip dynamics; cluster updates decorrelate in O(1) sweeps.
fn default_burn_in(algorithm: Algorithm, n: usize) -> usize {
    match algorithm {
        Algorithm::ClusterLongRange => 128,
        _ => 100 * n,
    }
}

#[derive(Args)]
struct SampleArgs {
    /// Number of polymer steps (chain sites)
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Interaction decay exponent, V(r) = r^-alpha
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    /// Inverse temperature of the polymer measure
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Kept samples in total (split across replicas)
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Independent replica streams
    #[arg(long, default_value_t = 2)]
    replicas: usize,
    #[arg(long, value_parser = parse_algorithm, default_value = "cluster")]
    algorithm: Algorithm,
    /// Burn-in sweeps; defaults to 128 for cluster, 100 n otherwise
    #[arg(long)]
    burn_in: Option<usize>,
    /// Sweeps between kept samples
    #[arg(long, default_value_t = 4)]
    thinning: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Dump raw spin configurations as CSV: one row per kept sample,
    /// 2n entries of +/-1 (first chain then second chain)
    #[arg(long)]
    dump: Option<PathBuf>,
}

fn run_sample(a: &SampleArgs) -> Result<i32, Box<dyn Error>> {
    let kernel = InteractionKernel::power_law(a.alpha)?;
    let g = GibbsParams::new(a.beta, kernel, a.n)?;
    if a.replicas == 0 {
        return Err("replicas must be >= 1".into());
    }
    let cfg = SamplerConfig {
        seed: a.seed,
        burn_in_sweeps: a.burn_in.unwrap_or_else(|| default_burn_in(a.algorithm, a.n)),
        thinning_sweeps: a.thinning,
        n_samples: a.samples.div_ceil(a.replicas),
        algorithm: a.algorithm,
        replicas: a.replicas,
    };
    let mut batch = sample_chain(&g, &cfg)?;
    batch.pairs.truncate(a.samples);

    let mut sq_sum = 0i128;
    let mut l1_sum = 0i128;
    for pair in &batch.pairs {
        let e = spins_to_polymer(pair)?.end_to_end();
        sq_sum += (e[0] * e[0] + e[1] * e[1]) as i128;
        l1_sum += (e[0].abs() + e[1].abs()) as i128;
    }
    let kept = batch.pairs.len() as f64;

    if let Some(path) = &a.dump {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
        for pair in &batch.pairs {
            let row: Vec<String> = pair
                .sigma1
                .iter()
                .chain(&pair.sigma2)
                .map(|s| s.to_string())
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
    }

    let tau: Vec<Option<f64>> = batch.meta.streams.iter().map(|s| s.tau_int).collect();
    let out = json!({
        "n": a.n,
        "alpha": a.alpha,
        "beta": a.beta,
        "algorithm": a.algorithm,
        "seed": a.seed,
        "samples_kept": batch.pairs.len(),
        "replicas": a.replicas,
        "burn_in_sweeps": cfg.burn_in_sweeps,
        "thinning_sweeps": cfg.thinning_sweeps,
        "end_sq_euclid_mean": sq_sum as f64 / kept,
        "end_l1_mean": l1_sum as f64 / kept,
        "tau_int_per_stream": tau,
        "warnings": batch.meta.warnings,
        "dump": a.dump,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// What to enumerate: polymer (4^n states) or chain (2^n states)
    #[arg(long, default_value = "polymer")]
    mode: String,
    /// Chain mode only: effective coupling, defaults to beta / 2
    #[arg(long)]
    beta_eff: Option<f64>,
}

fn run_enumerate(a: &EnumerateArgs) -> Result<i32, Box<dyn Error>> {
    let kernel = InteractionKernel::power_law(a.alpha)?;
    let g = GibbsParams::new(a.beta, kernel, a.n)?;
    let out = match a.mode.as_str() {
        "polymer" => {
            let summary = oracle::enumerate_polymer(&g)?;
            json!({ "mode": "polymer", "n": a.n, "alpha": a.alpha, "beta": a.beta,
                    "summary": summary })
        }
        "chain" => {
            let beta_eff = a.beta_eff.unwrap_or_else(|| g.chain_beta_eff());
            let summary = oracle::enumerate_chain(a.n, beta_eff, &g.kernel)?;
            json!({ "mode": "chain", "n": a.n, "alpha": a.alpha, "beta_eff": beta_eff,
                    "summary": summary })
        }
        other => return Err(format!("unknown mode '{other}' (polymer | chain)").into()),
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

#[derive(Args)]
struct BlocksArgs {
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    /// Block-size exponent: ell = floor(n^delta), 0 < delta < 1/4
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_parser = parse_algorithm, default_value = "cluster")]
    algorithm: Algorithm,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long, default_value_t = 4)]
    thinning: usize,
    /// Write rescaled path traces as CSV (columns: path, t, x, y)
    #[arg(long)]
    emit_paths: Option<PathBuf>,
    /// How many paths the trace file keeps
    #[arg(long, default_value_t = 8)]
    emit_limit: usize,
}

fn run_blocks(a: &BlocksArgs) -> Result<i32, Box<dyn Error>> {
    let kernel = InteractionKernel::power_law(a.alpha)?;
    let g = GibbsParams::new(a.beta, kernel.clone(), a.n)?;
    let replicas = 4usize;
    let cfg = SamplerConfig {
        seed: a.seed,
        burn_in_sweeps: a.burn_in.unwrap_or_else(|| default_burn_in(a.algorithm, a.n)),
        thinning_sweeps: a.thinning,
        n_samples: a.samples.div_ceil(replicas),
        algorithm: a.algorithm,
        replicas,
    };
    let mut batch = sample_chain(&g, &cfg)?;
    batch.pairs.truncate(a.samples);

    let scheme = BlockScheme::from_delta(a.n, a.delta)?;
    let stats = hypothesis_stats_from_batch(&batch, &scheme)?;
    let sigma_hat = (stats.chi_hat_avg / 2.0).sqrt();

    if let Some(path) = &a.emit_paths {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["path", "t", "x", "y"])?;
        for (i, pair) in batch.pairs.iter().take(a.emit_limit).enumerate() {
            let trace = build_w_path_rotated(pair, sigma_hat)?;
            let n = trace.nodes().len() - 1;
            for (k, node) in trace.nodes().iter().enumerate() {
                w.write_record(&[
                    i.to_string(),
                    (k as f64 / n as f64).to_string(),
                    node[0].to_string(),
                    node[1].to_string(),
                ])?;
            }
        }
        w.flush()?;
    }

    let out = json!({
        "n": a.n,
        "alpha": a.alpha,
        "beta": a.beta,
        "samples_kept": batch.pairs.len(),
        "seed": a.seed,
        "scheme": scheme,
        "block_ratio": scheme.block_ratio(),
        "stats": stats,
        "sigma_hat": sigma_hat,
        "chi_tail_hint": chi_tail_hint(&kernel, a.n),
        "warnings": batch.meta.warnings,
        "emit_paths": a.emit_paths,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

#[derive(Args)]
struct WassersteinArgs {
    /// First point list: CSV rows `x`, `x,y`, or `x,y,weight`
    mu: PathBuf,
    /// Second point list, same format
    nu: PathBuf,
    /// Distance order, 0 < p <= 2
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// auto | 1d (quantile route) | 2d (exact planar solver)
    #[arg(long, default_value = "auto")]
    mode: String,
    /// Subsampling seed, used only when --ref-samples truncates an input
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Subsample each input down to this many points before solving
    #[arg(long)]
    ref_samples: Option<usize>,
    #[arg(long, value_parser = parse_norm, default_value = "euclid")]
    norm: GroundNorm,
    /// Include the optimal transport plan in the output (2d route only)
    #[arg(long)]
    plan: bool,
}

/// Point-list rows: 1 field = point on the line, 2 = point in the plane,
/// 3 = weighted planar point. Mixing arities in one file is an error.
fn read_point_list(path: &Path) -> Result<EmpiricalMeasure, Box<dyn Error>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut width = None;
    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let fields: Vec<f64> = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("{}: {e}", path.display()))?;
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(format!(
                    "{}: row with {} fields after rows with {w}",
                    path.display(),
                    fields.len()
                )
                .into())
            }
            _ => {}
        }
        match fields.len() {
            1 => points.push([fields[0], 0.0]),
            2 => points.push([fields[0], fields[1]]),
            3 => {
                points.push([fields[0], fields[1]]);
                weights.push(fields[2]);
            }
            k => return Err(format!("{}: rows must have 1-3 fields, got {k}", path.display()).into()),
        }
    }
    let measure = match width {
        Some(1) => {
            let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
            EmpiricalMeasure::from_points_1d(&xs)?
        }
        Some(2) => EmpiricalMeasure::from_points_2d(&points)?,
        Some(3) => EmpiricalMeasure::weighted_2d(&points, &weights)?,
        _ => return Err(format!("{}: no rows", path.display()).into()),
    };
    Ok(measure)
}

/// Seeded subsample without replacement; weighted inputs are re-uniformed
/// would be wrong, so only uniform measures may be truncated.
fn subsample(
    m: &EmpiricalMeasure,
    cap: usize,
    rng: &mut ChaCha8Rng,
) -> Result<EmpiricalMeasure, Box<dyn Error>> {
    if m.len() <= cap {
        return Ok(m.clone());
    }
    let w = 1.0 / m.len() as f64;
    if m.weights().iter().any(|&x| x != w) {
        return Err("--ref-samples only applies to uniform (unweighted) inputs".into());
    }
    let mut idx: Vec<usize> = index_sample(rng, m.len(), cap).into_vec();
    idx.sort_unstable();
    let picked: Vec<[f64; 2]> = idx.iter().map(|&i| m.atoms()[i]).collect();
    let out = if m.dim() == 1 {
        let xs: Vec<f64> = picked.iter().map(|p| p[0]).collect();
        EmpiricalMeasure::from_points_1d(&xs)?
    } else {
        EmpiricalMeasure::from_points_2d(&picked)?
    };
    Ok(out)
}

fn run_wasserstein(a: &WassersteinArgs) -> Result<i32, Box<dyn Error>> {
    let mut mu = read_point_list(&a.mu)?;
    let mut nu = read_point_list(&a.nu)?;
    if let Some(cap) = a.ref_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        mu = subsample(&mu, cap, &mut rng)?;
        nu = subsample(&nu, cap, &mut rng)?;
    }

    let mode = match a.mode.as_str() {
        "auto" => {
            if mu.dim() == 1 && nu.dim() == 1 {
                "1d"
            } else {
                "2d"
            }
        }
        "1d" | "2d" => a.mode.as_str(),
        other => return Err(format!("unknown mode '{other}' (auto | 1d | 2d)").into()),
    };

    let out = match mode {
        "1d" => {
            if a.norm == GroundNorm::L1 {
                return Err("--norm l1 only affects the 2d route".into());
            }
            let d = d_p_1d(&mu, &nu, a.p)?;
            json!({
                "mode": "1d", "p": a.p, "distance": d,
                "atoms": [mu.len(), nu.len()],
            })
        }
        _ => {
            let opts = SolverOptions {
                norm: a.norm,
                ..SolverOptions::default()
            };
            let (d, plan) = d_p_exact_2d(&mu, &nu, a.p, &opts)?;
            let gap = plan.marginal_gap(&mu, &nu);
            let mut out = json!({
                "mode": "2d", "p": a.p, "norm": a.norm, "distance": d,
                "atoms": [mu.len(), nu.len()],
                "marginal_gap": gap,
            });
            if a.plan {
                out["plan"] = serde_json::to_value(&plan.entries)?;
            }
            out
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

#[derive(Args)]
struct ScanArgs {
    /// Config file, .toml or .json; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated beta grid, ascending
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// Comma-separated n grid, ascending, at least three entries
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Report JSON path; when absent the report goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell CSV path
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

fn load_scan_config(a: &ScanArgs) -> Result<ScanConfig, Box<dyn Error>> {
    let mut cfg = match &a.config {
        None => ScanConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path)?;
            match path.extension().and_then(|e| e.to_str()) {
                Some("toml") => toml::from_str(&text)
                    .map_err(|e| format!("{}: {e}", path.display()))?,
                Some("json") => serde_json::from_str(&text)
                    .map_err(|e| format!("{}: {e}", path.display()))?,
                _ => return Err(format!("{}: expected .toml or .json", path.display()).into()),
            }
        }
    };
    if let Some(alpha) = a.alpha {
        cfg.alpha = alpha;
    }
    if let Some(beta) = &a.beta {
        cfg.beta_grid = beta.clone();
    }
    if let Some(n) = &a.n {
        cfg.n_grid = n.clone();
    }
    if let Some(p) = a.p {
        cfg.p = p;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(replicas) = a.replicas {
        cfg.replicas = replicas;
    }
    if a.out.is_some() {
        cfg.out = a.out.clone();
    }
    if a.csv_out.is_some() {
        cfg.csv_out = a.csv_out.clone();
    }
    Ok(cfg)
}

fn run_scan_cmd(a: &ScanArgs) -> Result<i32, Box<dyn Error>> {
    let cfg = load_scan_config(a)?;
    let report = run_scan(&cfg)?;
    if cfg.out.is_none() {
        println!("{}", report_to_json(&report));
    } else {
        for b in &report.betas {
            println!(
                "beta = {:<6} gamma_hat = {:.3}  verdict = {}",
                b.beta, b.gamma_hat, b.verdict
            );
        }
    }
    match report.crossover_bracket {
        Some(bracket) => {
            println!("crossover bracket: [{}, {}]", bracket[0], bracket[1]);
            Ok(0)
        }
        None => {
            eprintln!("no crossover bracket in the scanned beta grid");
            Ok(3)
        }
    }
}

fn print_error_chain(e: &dyn Error) {
    eprintln!("error: {e}");
    let mut src = e.source();
    while let Some(s) = src {
        eprintln!("  caused by: {s}");
        src = s.source();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Sample(a) => run_sample(a),
        Cmd::Enumerate(a) => run_enumerate(a),
        Cmd::Blocks(a) => run_blocks(a),
        Cmd::Wasserstein(a) => run_wasserstein(a),
        Cmd::Scan(a) => run_scan_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            print_error_chain(e.as_ref());
            ExitCode::from(2)
        }
    }
}
