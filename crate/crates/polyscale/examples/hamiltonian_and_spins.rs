//! The model layer: polymers, pair energies, and the diagonal rotation that
//! splits the measure into two independent spin chains.

use polyscale::model::{
    chain_log_weight, gibbs_log_weight, hamiltonian, polymer_to_spins, spins_to_polymer,
    GibbsParams, InteractionKernel, Polymer, Step,
};

fn main() {
    // A short staircase path: right, up, right, up, right.
    let steps = vec![Step::PlusX, Step::PlusY, Step::PlusX, Step::PlusY, Step::PlusX];
    let polymer = Polymer::new(steps).expect("nonempty step list");
    println!(
        "polymer with {} steps, endpoint {:?}",
        polymer.len(),
        polymer.end_to_end()
    );

    let kernel = InteractionKernel::power_law(1.5).unwrap();
    let h = hamiltonian(&polymer, &kernel);
    println!("pair energy under V(r) = r^-1.5: {h:.6}");

    // The same path as two +/-1 chains in the rotated frame: each step
    // (x, y) maps to (s1, s2) = (x - y, x + y).
    let pair = polymer_to_spins(&polymer);
    println!("sigma1: {:?}", pair.sigma1);
    println!("sigma2: {:?}", pair.sigma2);
    let back = spins_to_polymer(&pair).unwrap();
    assert_eq!(back, polymer, "rotation is a bijection");

    // The Gibbs log-weight splits into one term per chain at half the
    // coupling: <X_i, X_j> = (s1_i s1_j + s2_i s2_j) / 2, so beta H lands
    // as (beta / 2) per chain. That factorization is what the whole crate
    // leans on.
    let g = GibbsParams::new(0.8, kernel.clone(), polymer.len()).unwrap();
    let beta_eff = g.chain_beta_eff();
    let whole = gibbs_log_weight(&polymer, &g);
    let split = chain_log_weight(&pair.sigma1, beta_eff, &kernel)
        + chain_log_weight(&pair.sigma2, beta_eff, &kernel);
    println!("log-weight of the polymer:   {whole:.12}");
    println!("sum of the two chain terms:  {split:.12}");
    assert!((whole - split).abs() < 1e-12);
    println!("beta = {}, each chain runs at beta_eff = {beta_eff}", g.beta);

    // Kernels are swappable; a nearest-neighbor one makes H checkable by
    // hand. The staircase alternates PlusX / PlusY, orthogonal steps, so
    // every adjacent pair contributes zero.
    let nn = InteractionKernel::finite_range(1, 1.0).unwrap();
    println!(
        "nearest-neighbor energy of the staircase: {}",
        hamiltonian(&polymer, &nn)
    );
}
