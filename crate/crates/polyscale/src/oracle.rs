//! Brute-force reference answers on small systems.
//!
//! Everything here enumerates the full state space, so chains stop at 20
//! sites (2^20 states) and polymers at 10 steps (4^10 states). The numbers
//! these routines produce are treated as ground truth by the sampler and
//! scaling tests: slow and obviously correct beats fast and clever.

use crate::model::{chain_energy, InteractionKernel, Step};
use serde::Serialize;
use thiserror::Error;

pub const MAX_CHAIN_SITES: usize = 20;
pub const MAX_POLYMER_STEPS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("chain enumeration capped at {MAX_CHAIN_SITES} sites (asked for {0})")]
    ChainTooLarge(usize),
    #[error("polymer enumeration capped at {MAX_POLYMER_STEPS} steps (asked for {0})")]
    PolymerTooLarge(usize),
    #[error("need at least one site")]
    Empty,
    #[error("observable index {0} out of range for {1} sites")]
    BadObservable(usize, usize),
    #[error("phase vector length {0} does not match {1} sites")]
    BadPhaseVector(usize, usize),
    #[error("coupling must be finite")]
    BadCoupling,
}

/// Exact finite-volume summary of a single +/-1 chain.
#[derive(Debug, Clone, Serialize)]
pub struct ExactSummary {
    pub log_z: f64,
    pub site_means: Vec<f64>,
    /// Row-major `n x n` covariance matrix of the spins.
    pub pair_covariances: Vec<Vec<f64>>,
    /// Mean of the bare pair energy `sum_{i<j} V(|i-j|) s_i s_j`.
    pub energy_mean: f64,
}

/// Exact finite-volume summary of the polymer measure.
#[derive(Debug, Clone, Serialize)]
pub struct PolymerSummary {
    pub log_z: f64,
    pub energy_mean: f64,
    /// `E |S_n|^2` for the Euclidean norm of the endpoint.
    pub end_sq_euclid: f64,
    /// `E |S_n|_1^2` for the l1 norm of the endpoint.
    pub end_sq_l1: f64,
    /// Row-major `n x n` matrix of `E <X_i, X_j>`.
    pub step_inner: Vec<Vec<f64>>,
}

fn check_chain(n: usize) -> Result<(), OracleError> {
    if n == 0 {
        return Err(OracleError::Empty);
    }
    if n > MAX_CHAIN_SITES {
        return Err(OracleError::ChainTooLarge(n));
    }
    Ok(())
}

/// Spin at `site` for a bitmask state: bit set means +1.
#[inline]
fn spin(state: usize, site: usize) -> f64 {
    if state >> site & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Bare pair energies for every bitmask state, computed incrementally along a
/// Gray-code walk (one spin flips per visited state).
fn chain_energies(n: usize, kernel: &InteractionKernel) -> Vec<f64> {
    let table = kernel.table(n);
    let states = 1usize << n;
    let mut energies = vec![0.0; states];
    let mut spins = vec![-1i8; n]; // state 0: all bits clear
    let mut e = chain_energy(&spins, &table);
    let mut prev_gray = 0usize;
    energies[0] = e;
    for k in 1..states {
        let gray = k ^ (k >> 1);
        let flip = (gray ^ prev_gray).trailing_zeros() as usize;
        // local field at the flipped site
        let mut h = 0.0;
        for j in 0..n {
            if j != flip {
                h += table[flip.abs_diff(j)] * spins[j] as f64;
            }
        }
        e -= 2.0 * spins[flip] as f64 * h;
        spins[flip] = -spins[flip];
        energies[gray] = e;
        prev_gray = gray;
    }
    energies
}

fn log_sum_exp(log_weights: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = log_weights
        .clone()
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_weights.map(|w| (w - max).exp()).sum();
    max + sum.ln()
}

/// Probability of every bitmask state of the chain measure
/// `p(s) ~ exp(beta_eff * sum_{i<j} V(|i-j|) s_i s_j)`.
pub fn chain_probabilities(
    n: usize,
    beta_eff: f64,
    kernel: &InteractionKernel,
) -> Result<Vec<f64>, OracleError> {
    check_chain(n)?;
    if !beta_eff.is_finite() {
        return Err(OracleError::BadCoupling);
    }
    let energies = chain_energies(n, kernel);
    let log_z = log_sum_exp(energies.iter().map(|e| beta_eff * e));
    Ok(energies
        .iter()
        .map(|e| (beta_eff * e - log_z).exp())
        .collect())
}

/// Full enumeration of the chain measure.
pub fn enumerate_chain(
    n: usize,
    beta_eff: f64,
    kernel: &InteractionKernel,
) -> Result<ExactSummary, OracleError> {
    check_chain(n)?;
    if !beta_eff.is_finite() {
        return Err(OracleError::BadCoupling);
    }
    let energies = chain_energies(n, kernel);
    let log_z = log_sum_exp(energies.iter().map(|e| beta_eff * e));
    let mut site_means = vec![0.0; n];
    let mut pair_second = vec![vec![0.0; n]; n];
    let mut energy_mean = 0.0;
    for (state, e) in energies.iter().enumerate() {
        let p = (beta_eff * e - log_z).exp();
        energy_mean += p * e;
        for i in 0..n {
            let si = spin(state, i);
            site_means[i] += p * si;
            for j in i..n {
                pair_second[i][j] += p * si * spin(state, j);
            }
        }
    }
    let mut pair_covariances = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let c = pair_second[i][j] - site_means[i] * site_means[j];
            pair_covariances[i][j] = c;
            pair_covariances[j][i] = c;
        }
    }
    Ok(ExactSummary {
        log_z,
        site_means,
        pair_covariances,
        energy_mean,
    })
}

fn polymer_energies(n: usize, kernel: &InteractionKernel) -> Vec<f64> {
    let table = kernel.table(n);
    let states = 1usize << (2 * n);
    let mut energies = Vec::with_capacity(states);
    let mut steps = vec![Step::PlusX; n];
    for code in 0..states {
        let mut c = code;
        for s in steps.iter_mut() {
            *s = Step::from_index(c & 3);
            c >>= 2;
        }
        let mut e = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = steps[i].dot(steps[j]);
                if d != 0 {
                    e += table[j - i] * d as f64;
                }
            }
        }
        energies.push(e);
    }
    energies
}

/// Probability of every step string (2 bits per step, step 0 in the low
/// bits) under the polymer measure with log-weight `sign * beta * H`.
pub fn polymer_probabilities(g: &crate::model::GibbsParams) -> Result<Vec<f64>, OracleError> {
    let n = g.n;
    if n == 0 {
        return Err(OracleError::Empty);
    }
    if n > MAX_POLYMER_STEPS {
        return Err(OracleError::PolymerTooLarge(n));
    }
    let sign = g.kernel.sign_convention.sign();
    let energies = polymer_energies(n, &g.kernel);
    let log_z = log_sum_exp(energies.iter().map(|e| sign * g.beta * e));
    Ok(energies
        .iter()
        .map(|e| (sign * g.beta * e - log_z).exp())
        .collect())
}

/// Full enumeration of the polymer measure.
pub fn enumerate_polymer(g: &crate::model::GibbsParams) -> Result<PolymerSummary, OracleError> {
    let n = g.n;
    if n == 0 {
        return Err(OracleError::Empty);
    }
    if n > MAX_POLYMER_STEPS {
        return Err(OracleError::PolymerTooLarge(n));
    }
    let sign = g.kernel.sign_convention.sign();
    let energies = polymer_energies(n, &g.kernel);
    let log_z = log_sum_exp(energies.iter().map(|e| sign * g.beta * e));

    let mut energy_mean = 0.0;
    let mut end_sq_euclid = 0.0;
    let mut end_sq_l1 = 0.0;
    let mut step_inner = vec![vec![0.0; n]; n];
    let mut steps = vec![Step::PlusX; n];
    for (code, e) in energies.iter().enumerate() {
        let p = (sign * g.beta * e - log_z).exp();
        let mut c = code;
        for s in steps.iter_mut() {
            *s = Step::from_index(c & 3);
            c >>= 2;
        }
        energy_mean += p * e;
        let mut end = [0i64, 0];
        for s in &steps {
            let v = s.vector();
            end[0] += v[0];
            end[1] += v[1];
        }
        end_sq_euclid += p * (end[0] * end[0] + end[1] * end[1]) as f64;
        let l1 = end[0].abs() + end[1].abs();
        end_sq_l1 += p * (l1 * l1) as f64;
        for i in 0..n {
            for j in i..n {
                step_inner[i][j] += p * steps[i].dot(steps[j]) as f64;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            step_inner[i][j] = step_inner[j][i];
        }
    }
    Ok(PolymerSummary {
        log_z,
        energy_mean,
        end_sq_euclid,
        end_sq_l1,
        step_inner,
    })
}

/// Coordinatewise nondecreasing observables of a spin configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonotoneFn {
    /// The spin at one site.
    Site(usize),
    /// Sum of the first `k` spins, `k >= 1`.
    PrefixSum(usize),
    /// Indicator that the sum of the first `upto` spins is `>= threshold`.
    PrefixIndicator { upto: usize, threshold: i64 },
}

impl MonotoneFn {
    pub fn eval(&self, state: usize) -> f64 {
        match *self {
            MonotoneFn::Site(i) => spin(state, i),
            MonotoneFn::PrefixSum(k) => (0..k).map(|i| spin(state, i)).sum(),
            MonotoneFn::PrefixIndicator { upto, threshold } => {
                let s: f64 = (0..upto).map(|i| spin(state, i)).sum();
                if s >= threshold as f64 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn max_index(&self) -> usize {
        match *self {
            MonotoneFn::Site(i) => i,
            MonotoneFn::PrefixSum(k) | MonotoneFn::PrefixIndicator { upto: k, .. } => {
                k.saturating_sub(1)
            }
        }
    }
}

/// The built-in family used by the association checks: every site, every
/// prefix sum, and a few prefix indicators.
pub fn monotone_family(n: usize) -> Vec<MonotoneFn> {
    let mut fam = Vec::new();
    for i in 0..n {
        fam.push(MonotoneFn::Site(i));
    }
    for k in 1..=n {
        fam.push(MonotoneFn::PrefixSum(k));
    }
    for k in (1..=n).step_by(2) {
        fam.push(MonotoneFn::PrefixIndicator {
            upto: k,
            threshold: 0,
        });
    }
    fam
}

/// Exact covariance of two monotone observables under the chain measure.
/// Nonnegative couplings and `beta_eff >= 0` make this nonnegative; the
/// caller asserts that, this just computes the number.
pub fn check_positive_association(
    n: usize,
    beta_eff: f64,
    kernel: &InteractionKernel,
    f: &MonotoneFn,
    g: &MonotoneFn,
) -> Result<f64, OracleError> {
    check_chain(n)?;
    for obs in [f, g] {
        if obs.max_index() >= n {
            return Err(OracleError::BadObservable(obs.max_index(), n));
        }
    }
    let probs = chain_probabilities(n, beta_eff, kernel)?;
    let (mut ef, mut eg, mut efg) = (0.0, 0.0, 0.0);
    for (state, p) in probs.iter().enumerate() {
        let fv = f.eval(state);
        let gv = g.eval(state);
        ef += p * fv;
        eg += p * gv;
        efg += p * fv * gv;
    }
    Ok(efg - ef * eg)
}

/// Characteristic-function factorization gap and its pairwise covariance
/// bound, both computed exactly.
///
/// Returns `(lhs, rhs)` with
/// `lhs = |E exp(i r.s) - prod_j E exp(i r_j s_j)|` and
/// `rhs = (1/2) sum_{j != k} |r_j r_k| Cov(s_j, s_k)`.
/// For a positively associated measure `lhs <= rhs`.
pub fn newman_wright_gap(
    n: usize,
    beta_eff: f64,
    kernel: &InteractionKernel,
    r: &[f64],
) -> Result<(f64, f64), OracleError> {
    check_chain(n)?;
    if r.len() != n {
        return Err(OracleError::BadPhaseVector(r.len(), n));
    }
    let summary = enumerate_chain(n, beta_eff, kernel)?;
    let probs = chain_probabilities(n, beta_eff, kernel)?;

    let (mut re, mut im) = (0.0, 0.0);
    for (state, p) in probs.iter().enumerate() {
        let phase: f64 = (0..n).map(|j| r[j] * spin(state, j)).sum();
        re += p * phase.cos();
        im += p * phase.sin();
    }
    // Per-site factor: spins are +/-1, so E exp(i r s) = cos r + i E[s] sin r.
    let (mut pre, mut pim) = (1.0, 0.0);
    for j in 0..n {
        let (c, s) = (r[j].cos(), r[j].sin());
        let (fr, fi) = (c, summary.site_means[j] * s);
        let nre = pre * fr - pim * fi;
        pim = pre * fi + pim * fr;
        pre = nre;
    }
    let lhs = f64::hypot(re - pre, im - pim);

    let mut rhs = 0.0;
    for j in 0..n {
        for k in (j + 1)..n {
            rhs += (r[j] * r[k]).abs() * summary.pair_covariances[j][k];
        }
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GibbsParams, Polymer, SignConvention};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn decode_polymer(code: usize, n: usize) -> Vec<Step> {
        let mut c = code;
        (0..n)
            .map(|_| {
                let s = Step::from_index(c & 3);
                c >>= 2;
                s
            })
            .collect()
    }

    fn power(alpha: f64) -> InteractionKernel {
        InteractionKernel::power_law(alpha).unwrap()
    }

    #[test]
    fn two_site_chain_closed_form() {
        // Z = 2 e^b + 2 e^-b with b = beta_eff V(1); Cov(s1, s2) = tanh b.
        let s = enumerate_chain(2, 1.0, &power(2.0)).unwrap();
        let z = 2.0 * 1f64.exp() + 2.0 * (-1f64).exp();
        assert_abs_diff_eq!(s.log_z, z.ln(), epsilon = 1e-13);
        assert_abs_diff_eq!(s.site_means[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.site_means[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.pair_covariances[0][1], 1f64.tanh(), epsilon = 1e-13);
        assert_abs_diff_eq!(s.energy_mean, 1f64.tanh(), epsilon = 1e-13);
    }

    #[test]
    fn free_chain_is_uniform() {
        let s = enumerate_chain(4, 0.0, &power(1.5)).unwrap();
        assert_abs_diff_eq!(s.log_z, (16f64).ln(), epsilon = 1e-13);
        for i in 0..4 {
            assert_abs_diff_eq!(s.site_means[i], 0.0, epsilon = 1e-14);
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(s.pair_covariances[i][j], expect, epsilon = 1e-14);
            }
        }
        let probs = chain_probabilities(4, 0.0, &power(1.5)).unwrap();
        for p in probs {
            assert_abs_diff_eq!(p, 1.0 / 16.0, epsilon = 1e-15);
        }
    }

    /// Independent re-implementation at three sites: a literal loop over the
    /// eight configurations with no shared code paths.
    #[test]
    fn three_site_chain_against_direct_loop() {
        let n = 3;
        let beta_eff = 0.5;
        let kernel = power(2.0);
        let v = [0.0, 1.0, 0.25]; // r^-2 at r = 1, 2

        let mut z = 0.0;
        let mut means = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        let mut e_mean = 0.0;
        for s0 in [-1.0f64, 1.0] {
            for s1 in [-1.0f64, 1.0] {
                for s2 in [-1.0f64, 1.0] {
                    let e = v[1] * s0 * s1 + v[1] * s1 * s2 + v[2] * s0 * s2;
                    let w = (beta_eff * e).exp();
                    z += w;
                    e_mean += w * e;
                    let s = [s0, s1, s2];
                    for i in 0..3 {
                        means[i] += w * s[i];
                        for j in 0..3 {
                            second[i][j] += w * s[i] * s[j];
                        }
                    }
                }
            }
        }
        e_mean /= z;
        for m in means.iter_mut() {
            *m /= z;
        }

        let summary = enumerate_chain(n, beta_eff, &kernel).unwrap();
        assert_abs_diff_eq!(summary.log_z, z.ln(), epsilon = 1e-13);
        assert_abs_diff_eq!(summary.energy_mean, e_mean, epsilon = 1e-13);
        for i in 0..3 {
            assert_abs_diff_eq!(summary.site_means[i], means[i], epsilon = 1e-13);
            for j in 0..3 {
                let cov = second[i][j] / z - means[i] * means[j];
                assert_abs_diff_eq!(summary.pair_covariances[i][j], cov, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn free_polymer_is_uniform_and_diffusive() {
        let g = GibbsParams::new(0.0, power(2.0), 3).unwrap();
        let probs = polymer_probabilities(&g).unwrap();
        assert_eq!(probs.len(), 64);
        for p in &probs {
            assert_abs_diff_eq!(*p, 1.0 / 64.0, epsilon = 1e-15);
        }
        // E |S_n|^2 = n for independent uniform steps.
        let g5 = GibbsParams::new(0.0, power(2.0), 5).unwrap();
        let s = enumerate_polymer(&g5).unwrap();
        assert_abs_diff_eq!(s.end_sq_euclid, 5.0, epsilon = 1e-12);
        assert!(s.end_sq_l1 >= 5.0 && s.end_sq_l1 <= 25.0);
        for i in 0..5 {
            assert_abs_diff_eq!(s.step_inner[i][i], 1.0, epsilon = 1e-13);
            for j in 0..5 {
                if i != j {
                    assert_abs_diff_eq!(s.step_inner[i][j], 0.0, epsilon = 1e-13);
                }
            }
        }
    }

    /// Second route for the polymer summary: raw 4^n loop built on decoded
    /// step vectors and the public energy function, no incremental tricks.
    #[test]
    fn polymer_summary_against_direct_loop() {
        let g = GibbsParams::new(0.8, power(1.5), 5).unwrap();
        let mut z = 0.0;
        let mut l1_sq = 0.0;
        let mut euclid_sq = 0.0;
        for code in 0..(1usize << 10) {
            let steps = decode_polymer(code, 5);
            let p = Polymer::new(steps).unwrap();
            let w = crate::model::gibbs_log_weight(&p, &g).exp();
            z += w;
            let end = p.end_to_end();
            euclid_sq += w * (end[0] * end[0] + end[1] * end[1]) as f64;
            let l1 = end[0].abs() + end[1].abs();
            l1_sq += w * (l1 * l1) as f64;
        }
        let s = enumerate_polymer(&g).unwrap();
        assert_abs_diff_eq!(s.log_z, z.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.end_sq_euclid, euclid_sq / z, epsilon = 1e-11);
        assert_abs_diff_eq!(s.end_sq_l1, l1_sq / z, epsilon = 1e-11);
    }

    #[test]
    fn polymer_measure_factorizes_into_chain_product() {
        // max |p_polymer(w) - p1(m1) p2(m2)| over all step strings,
        // with the two chain laws taken at beta/2.
        for n in 2..=6usize {
            for &beta in &[0.0, 0.5, 1.5] {
                let g = GibbsParams::new(beta, power(1.5), n).unwrap();
                let poly = polymer_probabilities(&g).unwrap();
                let chain = chain_probabilities(n, g.chain_beta_eff(), &g.kernel).unwrap();
                let mut worst = 0.0f64;
                for (code, p) in poly.iter().enumerate() {
                    let steps = decode_polymer(code, n);
                    let pair = crate::model::polymer_to_spins(&Polymer::new(steps).unwrap());
                    let m1: usize = pair
                        .sigma1
                        .iter()
                        .enumerate()
                        .map(|(i, &s)| if s == 1 { 1 << i } else { 0 })
                        .sum();
                    let m2: usize = pair
                        .sigma2
                        .iter()
                        .enumerate()
                        .map(|(i, &s)| if s == 1 { 1 << i } else { 0 })
                        .sum();
                    worst = worst.max((p - chain[m1] * chain[m2]).abs());
                }
                assert!(worst <= 1e-12, "n={n} beta={beta}: deviation {worst}");
            }
        }
    }

    #[test]
    fn antialigning_convention_also_factorizes() {
        let kernel = power(2.0).with_sign_convention(SignConvention::AsWritten);
        let g = GibbsParams::new(1.0, kernel, 4).unwrap();
        let poly = polymer_probabilities(&g).unwrap();
        let chain = chain_probabilities(4, g.chain_beta_eff(), &g.kernel).unwrap();
        assert!(g.chain_beta_eff() < 0.0);
        let mut worst = 0.0f64;
        for (code, p) in poly.iter().enumerate() {
            let steps = decode_polymer(code, 4);
            let pair = crate::model::polymer_to_spins(&Polymer::new(steps).unwrap());
            let m1: usize = pair
                .sigma1
                .iter()
                .enumerate()
                .map(|(i, &s)| if s == 1 { 1 << i } else { 0 })
                .sum();
            let m2: usize = pair
                .sigma2
                .iter()
                .enumerate()
                .map(|(i, &s)| if s == 1 { 1 << i } else { 0 })
                .sum();
            worst = worst.max((p - chain[m1] * chain[m2]).abs());
        }
        assert!(worst <= 1e-12, "deviation {worst}");
    }

    #[test]
    fn association_nonnegative_on_random_ferromagnetic_chains() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let n = rng.gen_range(2..=8);
            let beta_eff = rng.gen_range(0.0..1.0);
            let alpha = rng.gen_range(1.1..2.5);
            let kernel = power(alpha);
            let fam = monotone_family(n);
            for _ in 0..8 {
                let f = &fam[rng.gen_range(0..fam.len())];
                let g = &fam[rng.gen_range(0..fam.len())];
                let cov = check_positive_association(n, beta_eff, &kernel, f, g).unwrap();
                assert!(cov >= -1e-12, "n={n} beta_eff={beta_eff} cov={cov}");
            }
        }
    }

    #[test]
    fn association_observable_bounds_checked() {
        let err = check_positive_association(
            3,
            0.5,
            &power(2.0),
            &MonotoneFn::Site(3),
            &MonotoneFn::Site(0),
        )
        .unwrap_err();
        assert_eq!(err, OracleError::BadObservable(3, 3));
    }

    #[test]
    fn factorization_gap_two_sites() {
        // Unit phases on two sites: rhs is exactly the pair covariance.
        let (lhs, rhs) = newman_wright_gap(2, 1.0, &power(2.0), &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(rhs, 1f64.tanh(), epsilon = 1e-13);
        assert!(lhs <= rhs + 1e-10);
    }

    #[test]
    fn factorization_gap_vanishes_without_coupling() {
        let (lhs, rhs) = newman_wright_gap(5, 0.0, &power(1.5), &[0.3, -0.7, 1.1, 0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rhs, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn factorization_gap_random_cases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let n = rng.gen_range(2..=10);
            let beta_eff = rng.gen_range(0.0..1.0);
            let alpha = rng.gen_range(1.1..2.2);
            let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let (lhs, rhs) = newman_wright_gap(n, beta_eff, &power(alpha), &r).unwrap();
            assert!(lhs <= rhs + 1e-10, "n={n} lhs={lhs} rhs={rhs}");
        }
    }

    #[test]
    fn size_caps_enforced() {
        assert_eq!(
            enumerate_chain(21, 0.1, &power(2.0)).unwrap_err(),
            OracleError::ChainTooLarge(21)
        );
        let g = GibbsParams::new(0.1, power(2.0), 11).unwrap();
        assert_eq!(
            enumerate_polymer(&g).unwrap_err(),
            OracleError::PolymerTooLarge(11)
        );
    }
}
