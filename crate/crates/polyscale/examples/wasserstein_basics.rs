//! Transport distances between finitely supported measures: the quantile
//! route on the line, the exact planar solvers, and Gaussian references.

use polyscale::wasserstein::{
    d2_product_to_gaussian, d_p_1d, d_p_exact_2d, d_p_to_gaussian, gaussian_reference_sample,
    EmpiricalMeasure, GaussianMode, GroundNorm, SolverOptions,
};

fn main() {
    // Two point masses: the distance is just how far the mass moves.
    let a = EmpiricalMeasure::from_points_2d(&[[0.0, 0.0]]).unwrap();
    let b = EmpiricalMeasure::from_points_2d(&[[3.0, 4.0]]).unwrap();
    let opts = SolverOptions::default();
    let (d, _) = d_p_exact_2d(&a, &b, 2.0, &opts).unwrap();
    println!("delta(0,0) -> delta(3,4) at p = 2: {d}  (expect 5)");

    // On the line the order-p distance is a quantile integral, no solver.
    let xs = EmpiricalMeasure::from_points_1d(&[0.0, 1.0, 2.0, 3.0]).unwrap();
    let ys = EmpiricalMeasure::from_points_1d(&[0.5, 1.5, 2.5, 3.5]).unwrap();
    println!("shifted grid at p = 1: {}  (expect 0.5)", d_p_1d(&xs, &ys, 1.0).unwrap());
    println!("shifted grid at p = 2: {}  (expect 0.5)", d_p_1d(&xs, &ys, 2.0).unwrap());

    // Unequal weights go through min-cost flow; a 2-atom splitter is easy
    // to verify by hand: 0.5 stays put, 0.25 moves two units from 0 to 2,
    // and 0.25 moves one unit from 1 to 2, so W1 = 0.75.
    let mu = EmpiricalMeasure::weighted_1d(&[0.0, 1.0], &[0.75, 0.25]).unwrap();
    let nu = EmpiricalMeasure::weighted_1d(&[0.0, 2.0], &[0.5, 0.5]).unwrap();
    let (d1, plan) = d_p_exact_2d(&mu, &nu, 1.0, &opts).unwrap();
    println!("weighted split at p = 1: {d1}  (expect 0.75)");
    for (i, j, mass) in &plan.entries {
        println!("  move {mass:.2} from atom {i} to atom {j}");
    }

    // The ground norm matters in the plane: a diagonal unit move costs
    // sqrt(2) under the Euclidean norm and 2 under the taxicab norm.
    let c = EmpiricalMeasure::from_points_2d(&[[1.0, 1.0]]).unwrap();
    let l1 = SolverOptions { norm: GroundNorm::L1, ..SolverOptions::default() };
    println!(
        "diagonal move: euclid {}  l1 {}",
        d_p_exact_2d(&a, &c, 1.0, &opts).unwrap().0,
        d_p_exact_2d(&a, &c, 1.0, &l1).unwrap().0
    );

    // Against a Gaussian reference. A seeded Gaussian sample should sit
    // close to its own law, and the sampled 2D route carries a jackknife
    // error bar. The product route is exact for independent coordinates.
    let sample = gaussian_reference_sample(1.0, 2000, 7).unwrap();
    let exact_w2 = d2_product_to_gaussian(&sample, 1.0).unwrap();
    let sampled = d_p_to_gaussian(&sample, 1.0, 2.0, GaussianMode::TwoD, 500, 11).unwrap();
    println!("gaussian sample vs its law:");
    println!("  product-route W2   = {exact_w2:.4}");
    println!(
        "  sampled-route  W2   = {:.4} +/- {:.4}",
        sampled.distance,
        sampled.se.unwrap()
    );

    // Larger samples drift toward zero; the rate is the slow empirical one.
    print!("  product-route W2 by sample size:");
    for m in [250, 1000, 4000] {
        let s = gaussian_reference_sample(1.0, m, 13).unwrap();
        print!("  {m}: {:.4}", d2_product_to_gaussian(&s, 1.0).unwrap());
    }
    println!();
}
