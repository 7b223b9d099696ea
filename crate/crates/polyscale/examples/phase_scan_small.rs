//! The full pipeline on a tiny grid: sample, rescale, measure distances to
//! the Brownian marginals, classify each coupling, bracket the crossover.
//!
//! Production grids use n in the thousands and replica counts in the
//! thousands; this keeps both small so it runs in seconds.

use polyscale::scan::{run_scan, ScanConfig, SamplerSettings};

fn main() {
    let cfg = ScanConfig {
        alpha: 1.5,
        beta_grid: vec![0.0, 0.3, 2.5],
        n_grid: vec![32, 64, 128],
        t_grid: vec![0.5, 1.0],
        replicas: 96,
        seed: 17,
        sampler: SamplerSettings {
            burn_in_sweeps: 64,
            thinning_sweeps: 2,
            ..SamplerSettings::default()
        },
        ..ScanConfig::default()
    };

    let report = run_scan(&cfg).unwrap();

    println!("per-cell statistics:");
    for row in &report.rows {
        let d_final = row.distances.last().unwrap();
        println!(
            "  beta = {:<4} n = {:>4}: var_ratio = {:.3}, d_2(1) = {:.3}, speed = {:.3}",
            row.beta, row.n, row.var_ratio, d_final.d_p, row.speed
        );
    }

    println!("\nper-coupling verdicts:");
    for b in &report.betas {
        println!(
            "  beta = {:<4} gamma_hat = {:.3}, distance trend rho = {:+.2}, {}",
            b.beta, b.gamma_hat, b.distance_trend_rho, b.verdict
        );
    }

    match report.crossover_bracket {
        Some([lo, hi]) => println!("\ncrossover bracket: [{lo}, {hi}]"),
        None => println!("\nno crossover bracket inside this beta grid"),
    }
}
