//! Block sums and rescaled paths: the statistics behind the Brownian-limit
//! hypothesis, estimated from sampled chains at a small coupling.

use polyscale::model::{GibbsParams, InteractionKernel};
use polyscale::sampler::{sample_chain, Algorithm, SamplerConfig};
use polyscale::scaling::{
    build_w_path_rotated, chi_tail_hint, hypothesis_stats_from_batch, BlockScheme,
};

fn main() {
    let alpha = 1.5;
    let beta = 0.2;
    let delta = 0.2;
    let kernel = InteractionKernel::power_law(alpha).unwrap();

    // The schedule ell = floor(n^delta) keeps ell^3 / m shrinking, which is
    // the condition the block central limit argument needs.
    println!("block schedule at delta = {delta}:");
    for n in [1 << 10, 1 << 12, 1 << 14] {
        let scheme = BlockScheme::from_delta(n, delta).unwrap();
        println!(
            "  n = {n:>6}: ell = {:>2}, m = {:>5}, ell^3/m = {:.4}",
            scheme.ell,
            scheme.m,
            scheme.block_ratio()
        );
    }

    let n = 1 << 10;
    let g = GibbsParams::new(beta, kernel.clone(), n).unwrap();
    let cfg = SamplerConfig {
        seed: 3,
        burn_in_sweeps: 128,
        thinning_sweeps: 4,
        n_samples: 150,
        algorithm: Algorithm::ClusterLongRange,
        replicas: 4,
    };
    let batch = sample_chain(&g, &cfg).unwrap();

    let scheme = BlockScheme::from_delta(n, delta).unwrap();
    let stats = hypothesis_stats_from_batch(&batch, &scheme).unwrap();
    println!("\nn = {n}, beta = {beta}, {} chain samples:", stats.n_samples);
    println!("  Var(S_n)/n            = {:.4}", stats.var_ratio);
    println!("  block variance ratio  = {:.4}", stats.block_var_ratio);
    println!("  chi_hat (site 1)      = {:.4}", stats.chi_hat);
    println!("  chi_hat (lag-avg)     = {:.4}", stats.chi_hat_avg);
    println!(
        "  truncation: {} lags kept, tail hint {:.4}",
        stats.lag_cutoff,
        chi_tail_hint(&kernel, n)
    );

    // Rescale each sampled pair into a planar path. With sigma^2 = chi / 2
    // the time-1 marginal should have E |W(1)|^2 near 2, the value for a
    // standard planar Brownian motion.
    let sigma_hat = (stats.chi_hat_avg / 2.0).sqrt();
    let mut second_moment = 0.0;
    for pair in &batch.pairs {
        let path = build_w_path_rotated(pair, sigma_hat).unwrap();
        let v = path.value_at(1.0).unwrap();
        second_moment += v[0] * v[0] + v[1] * v[1];
    }
    second_moment /= batch.pairs.len() as f64;
    println!("  sigma_hat             = {sigma_hat:.4}");
    println!("  E |W(1)|^2            = {second_moment:.4}  (reference 2)");

    // A few node values of one path, the object the scan feeds into the
    // transport distance.
    let path = build_w_path_rotated(&batch.pairs[0], sigma_hat).unwrap();
    for t in [0.25, 0.5, 0.75, 1.0] {
        let v = path.value_at(t).unwrap();
        println!("  W({t:.2}) = ({:+.3}, {:+.3})", v[0], v[1]);
    }
}
