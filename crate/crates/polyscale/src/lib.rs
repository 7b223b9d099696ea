//! Planar polymers with long-range step interactions.
//!
//! A polymer is a nearest-neighbor path on the square lattice whose steps
//! interact through a power-law (or user-supplied) kernel. Rotating the
//! lattice by 45 degrees splits the measure into two independent +/-1 spin
//! chains, which is what makes both the exact enumeration and the cluster
//! sampler here tractable. On top of the samplers sit block-sum scaling
//! diagnostics and Wasserstein distances to Brownian limits, used to locate
//! the crossover between diffusive and ballistic behavior as the coupling
//! grows.
//!
//! Start from the runnable examples, each one exercises a single layer:
//!
//! * `hamiltonian_and_spins`: the model types and the chain factorization.
//! * `exact_enumeration`: brute-force measures, association checks.
//! * `chain_sampling`: Monte Carlo with mixing diagnostics.
//! * `block_scaling`: block sums and rescaled path processes.
//! * `wasserstein_basics`: empirical transport distances.
//! * `phase_scan_small`: the full coupling scan on a tiny grid.

pub mod model;
pub mod oracle;
pub mod sampler;
pub mod scaling;
pub mod scan;
pub(crate) mod stats;
pub mod wasserstein;
