//! Transportation solver for general weights: successive shortest paths
//! with node potentials. The bipartite graph is complete and uncapacitated
//! on forward arcs, so Dijkstra runs dense in O(V^2); complementary
//! slackness (zero reduced cost on arcs carrying flow) is restored after
//! every augmentation, which keeps all arc lengths nonnegative.

use std::collections::BTreeMap;

use super::assignment::build_cost_matrix;
use super::{CouplingPlan, EmpiricalMeasure, GroundNorm};

const NONE: usize = usize::MAX;
// Mass below this is treated as exhausted; weights sum to 1 within 1e-9,
// so real atoms carry far more than this.
const MASS_TOL: f64 = 1e-15;

pub(super) fn solve_general(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    p: f64,
    norm: GroundNorm,
) -> CouplingPlan {
    let m = mu.len();
    let k = nu.len();
    let c = build_cost_matrix(mu.atoms(), nu.atoms(), p, norm);

    let mut supply = mu.weights().to_vec();
    let mut demand = nu.weights().to_vec();
    let mut flow: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    // Rows with positive flow into each column, for backward-arc scans.
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut lambda = vec![0.0f64; m];
    let mut rho = vec![0.0f64; k];

    let mut guard = 16 * (m + k) * (m + k) + 64;
    loop {
        if supply.iter().sum::<f64>() <= 1e-12 || demand.iter().sum::<f64>() <= 1e-12 {
            break;
        }
        guard -= 1;
        if guard == 0 {
            // Leave termination to the marginal-gap invariant downstream.
            break;
        }

        // Dense Dijkstra over both sides; reduced costs are nonnegative.
        let mut dist_mu = vec![f64::INFINITY; m];
        let mut dist_nu = vec![f64::INFINITY; k];
        let mut par_nu = vec![NONE; k];
        let mut par_mu = vec![NONE; m];
        let mut done_mu = vec![false; m];
        let mut done_nu = vec![false; k];
        for i in 0..m {
            if supply[i] > MASS_TOL {
                dist_mu[i] = 0.0;
            }
        }
        loop {
            let mut best = f64::INFINITY;
            let mut pick = NONE;
            let mut pick_is_mu = true;
            for i in 0..m {
                if !done_mu[i] && dist_mu[i] < best {
                    best = dist_mu[i];
                    pick = i;
                }
            }
            for j in 0..k {
                if !done_nu[j] && dist_nu[j] < best {
                    best = dist_nu[j];
                    pick = j;
                    pick_is_mu = false;
                }
            }
            if pick == NONE {
                break;
            }
            if pick_is_mu {
                let i = pick;
                done_mu[i] = true;
                let base = dist_mu[i];
                let row = &c[i * k..(i + 1) * k];
                for j in 0..k {
                    if !done_nu[j] {
                        let len = (row[j] - lambda[i] - rho[j]).max(0.0);
                        let nd = base + len;
                        if nd < dist_nu[j] {
                            dist_nu[j] = nd;
                            par_nu[j] = i;
                        }
                    }
                }
            } else {
                let j = pick;
                done_nu[j] = true;
                let base = dist_nu[j];
                for &i in &col_rows[j] {
                    if done_mu[i] {
                        continue;
                    }
                    if flow.get(&(i, j)).copied().unwrap_or(0.0) <= MASS_TOL {
                        continue;
                    }
                    let len = (lambda[i] + rho[j] - c[i * k + j]).max(0.0);
                    let nd = base + len;
                    if nd < dist_mu[i] {
                        dist_mu[i] = nd;
                        par_mu[i] = j;
                    }
                }
            }
        }

        // Cheapest reachable column with unmet demand, lowest index on ties.
        let mut target = NONE;
        let mut target_dist = f64::INFINITY;
        for j in 0..k {
            if demand[j] > MASS_TOL && dist_nu[j] < target_dist {
                target_dist = dist_nu[j];
                target = j;
            }
        }
        if target == NONE || !target_dist.is_finite() {
            break;
        }

        for i in 0..m {
            lambda[i] -= dist_mu[i].min(target_dist);
        }
        for j in 0..k {
            rho[j] += dist_nu[j].min(target_dist);
        }

        // Walk back to a source, collecting the bottleneck.
        let mut path = Vec::new(); // (i, j) forward hops
        let mut j = target;
        let mut delta = demand[target];
        let source;
        loop {
            let i = par_nu[j];
            path.push((i, j));
            match par_mu[i] {
                NONE => {
                    delta = delta.min(supply[i]);
                    source = i;
                    break;
                }
                back_j => {
                    delta = delta.min(flow[&(i, back_j)]);
                    j = back_j;
                }
            }
        }

        supply[source] -= delta;
        demand[target] -= delta;
        let mut j = target;
        for &(i, jj) in &path {
            debug_assert_eq!(jj, j);
            let slot = flow.entry((i, j)).or_insert(0.0);
            if *slot == 0.0 {
                col_rows[j].push(i);
            }
            *slot += delta;
            match par_mu[i] {
                NONE => break,
                back_j => {
                    let f = flow.get_mut(&(i, back_j)).expect("backward arc has flow");
                    *f -= delta;
                    if *f <= MASS_TOL {
                        flow.remove(&(i, back_j));
                        col_rows[back_j].retain(|&r| r != i);
                    }
                    j = back_j;
                }
            }
        }
    }

    let mut entries = Vec::with_capacity(flow.len());
    let mut cost = 0.0;
    for (&(i, j), &mass) in &flow {
        entries.push((i, j, mass));
        cost += mass * c[i * k + j];
    }
    CouplingPlan { entries, cost }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flow_plan(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> CouplingPlan {
        solve_general(mu, nu, p, GroundNorm::Euclid)
    }

    /// Optimality certificate: a feasible transportation plan is optimal
    /// iff the residual graph has no negative cycle. Bellman-Ford over
    /// forward arcs (cost c_ij) and backward arcs (-c_ij where mass > 0).
    fn has_negative_residual_cycle(
        mu: &EmpiricalMeasure,
        nu: &EmpiricalMeasure,
        p: f64,
        plan: &CouplingPlan,
    ) -> bool {
        let m = mu.len();
        let k = nu.len();
        let c = build_cost_matrix(mu.atoms(), nu.atoms(), p, GroundNorm::Euclid);
        let mut arcs = Vec::new();
        for i in 0..m {
            for j in 0..k {
                arcs.push((i, m + j, c[i * k + j]));
            }
        }
        for &(i, j, mass) in &plan.entries {
            if mass > 1e-12 {
                arcs.push((m + j, i, -c[i * k + j]));
            }
        }
        let n = m + k;
        let mut dist = vec![0.0f64; n];
        for round in 0..n {
            let mut changed = false;
            for &(a, b, w) in &arcs {
                if dist[a] + w < dist[b] - 1e-9 {
                    dist[b] = dist[a] + w;
                    changed = true;
                }
            }
            if !changed {
                return false;
            }
            if round == n - 1 {
                return true;
            }
        }
        false
    }

    #[test]
    fn splits_a_point_mass() {
        let mu = EmpiricalMeasure::from_points_2d(&[[0.0, 0.0]]).unwrap();
        let nu = EmpiricalMeasure::weighted_2d(&[[-1.0, 0.0], [1.0, 0.0]], &[0.5, 0.5]).unwrap();
        let plan = flow_plan(&mu, &nu, 2.0);
        assert_abs_diff_eq!(plan.cost, 1.0, epsilon = 1e-12);
        assert_eq!(plan.entries.len(), 2);
        assert!(plan.marginal_gap(&mu, &nu) < 1e-12);
    }

    #[test]
    fn matches_assignment_solver_on_uniform_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(401);
        for n in [2usize, 3, 5, 8, 13] {
            let a: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0]).collect();
            let b: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0]).collect();
            let mu = EmpiricalMeasure::from_points_2d(&a).unwrap();
            let nu = EmpiricalMeasure::from_points_2d(&b).unwrap();
            for p in [0.7, 1.0, 2.0] {
                let via_flow = flow_plan(&mu, &nu, p);
                let via_assignment = super::super::assignment::solve_uniform(&mu, &nu, p, GroundNorm::Euclid);
                assert_abs_diff_eq!(via_flow.cost, via_assignment.cost, epsilon = 1e-10);
                assert!(via_flow.marginal_gap(&mu, &nu) < 1e-9);
            }
        }
    }

    #[test]
    fn random_weighted_instances_pass_the_residual_cycle_certificate() {
        let mut rng = ChaCha8Rng::seed_from_u64(402);
        for trial in 0..40 {
            let m = rng.gen_range(1..7);
            let k = rng.gen_range(1..7);
            let pts = |rng: &mut ChaCha8Rng, n: usize| -> Vec<[f64; 2]> {
                (0..n).map(|_| [rng.gen::<f64>() * 6.0 - 3.0, rng.gen::<f64>() * 6.0 - 3.0]).collect()
            };
            let weights = |rng: &mut ChaCha8Rng, n: usize| -> Vec<f64> {
                let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.05).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|w| w / s).collect()
            };
            let a = pts(&mut rng, m);
            let wa = weights(&mut rng, m);
            let b = pts(&mut rng, k);
            let wb = weights(&mut rng, k);
            let mu = EmpiricalMeasure::weighted_2d(&a, &wa).unwrap();
            let nu = EmpiricalMeasure::weighted_2d(&b, &wb).unwrap();
            let p = [0.5, 1.0, 1.5, 2.0][trial % 4];
            let plan = flow_plan(&mu, &nu, p);
            assert!(plan.marginal_gap(&mu, &nu) < 1e-9, "trial {trial}: infeasible plan");
            assert!(
                !has_negative_residual_cycle(&mu, &nu, p, &plan),
                "trial {trial}: plan is not optimal"
            );
        }
    }

    #[test]
    fn identical_weighted_measures_cost_zero() {
        let mu = EmpiricalMeasure::weighted_2d(
            &[[0.0, 0.0], [1.0, 1.0], [2.0, -1.0]],
            &[0.2, 0.5, 0.3],
        )
        .unwrap();
        let plan = flow_plan(&mu, &mu, 2.0);
        assert_eq!(plan.cost, 0.0);
        assert!(plan.marginal_gap(&mu, &mu) < 1e-12);
    }
}
