//! Shortest-augmenting-path assignment for uniform equal-size measures.
//! Row and column potentials keep reduced costs nonnegative, so each row
//! insertion is a Dijkstra pass over columns. Column scans use strict `<`
//! in ascending order, which pins ties to the lowest index and makes the
//! returned plan deterministic.

use rayon::prelude::*;

use super::{ground_cost, CouplingPlan, EmpiricalMeasure, GroundNorm};

const NONE: usize = usize::MAX;

pub(super) fn solve_uniform(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    p: f64,
    norm: GroundNorm,
) -> CouplingPlan {
    let n = mu.len();
    debug_assert_eq!(n, nu.len());
    let c = build_cost_matrix(mu.atoms(), nu.atoms(), p, norm);

    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n + 1];
    // owner[j] = row currently matched to column j; index n is the virtual
    // column that seeds each augmenting search.
    let mut owner = vec![NONE; n + 1];

    for i in 0..n {
        owner[n] = i;
        let mut j0 = n;
        let mut minv = vec![f64::INFINITY; n];
        let mut way = vec![n; n];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let row = &c[i0 * n..(i0 + 1) * n];
            let mut delta = f64::INFINITY;
            let mut j1 = NONE;
            for j in 0..n {
                if !used[j] {
                    let cur = row[j] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            u[owner[n]] += delta;
            v[n] -= delta;
            j0 = j1;
            if owner[j0] == NONE {
                break;
            }
        }
        while j0 != n {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        }
    }

    let mut perm = vec![NONE; n];
    for j in 0..n {
        perm[owner[j]] = j;
    }

    // Resum the cost in row order so it is bitwise comparable with a brute
    // force that accumulates the same way.
    let w = 1.0 / n as f64;
    let mut cost = 0.0;
    let mut entries = Vec::with_capacity(n);
    for (i, &j) in perm.iter().enumerate() {
        cost += w * c[i * n + j];
        entries.push((i, j, w));
    }
    CouplingPlan { entries, cost }
}

pub(super) fn build_cost_matrix(a: &[[f64; 2]], b: &[[f64; 2]], p: f64, norm: GroundNorm) -> Vec<f64> {
    let n = b.len();
    let mut c = vec![0.0f64; a.len() * n];
    if a.len() * n >= 1 << 14 {
        c.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = ground_cost(norm, p, a[i], b[j]);
            }
        });
    } else {
        for (i, row) in c.chunks_mut(n).enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = ground_cost(norm, p, a[i], b[j]);
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uni(points: &[[f64; 2]]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_points_2d(points).unwrap()
    }

    fn solve(a: &[[f64; 2]], b: &[[f64; 2]], p: f64) -> CouplingPlan {
        solve_uniform(&uni(a), &uni(b), p, GroundNorm::Euclid)
    }

    #[test]
    fn identity_matching_is_free() {
        let pts = [[0.0, 0.0], [1.0, 2.0], [-3.0, 0.5]];
        let plan = solve(&pts, &pts, 2.0);
        assert_eq!(plan.cost, 0.0);
        for (i, (r, c, _)) in plan.entries.iter().enumerate() {
            assert_eq!((i, i), (*r, *c));
        }
    }

    #[test]
    fn vertical_matching_beats_crossing() {
        let a = [[0.0, 0.0], [1.0, 0.0]];
        let b = [[0.0, 1.0], [1.0, 1.0]];
        let plan = solve(&a, &b, 2.0);
        assert_abs_diff_eq!(plan.cost, 1.0, epsilon = 1e-15);
        assert_eq!(plan.entries, vec![(0, 0, 0.5), (1, 1, 0.5)]);
    }

    #[test]
    fn three_atoms_match_exhaustive_minimum() {
        let a = [[0.0, 0.0], [2.0, 1.0], [-1.0, 4.0]];
        let b = [[0.5, 0.5], [3.0, 3.0], [0.0, 5.0]];
        let plan = solve(&a, &b, 2.0);
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let best = perms
            .iter()
            .map(|perm| {
                perm.iter()
                    .enumerate()
                    .map(|(i, &j)| ground_cost(GroundNorm::Euclid, 2.0, a[i], b[j]) / 3.0)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(plan.cost, best);
    }

    #[test]
    fn ties_resolve_deterministically() {
        // Every pairing costs the same; two runs must agree entry for entry.
        let a = [[0.0, 0.0], [2.0, 0.0]];
        let b = [[1.0, 0.0], [1.0, 0.0]];
        let first = solve(&a, &b, 2.0);
        let second = solve(&a, &b, 2.0);
        assert_eq!(first, second);
        assert_abs_diff_eq!(first.cost, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn l1_ground_norm_changes_the_winner() {
        // Under the taxicab norm with p=2, diagonal moves cost (|dx|+|dy|)^2.
        let a = [[0.0, 0.0]];
        let b = [[1.0, 1.0]];
        let plan = solve_uniform(&uni(&a), &uni(&b), 2.0, GroundNorm::L1);
        assert_abs_diff_eq!(plan.cost, 4.0, epsilon = 1e-15);
        let euclid = solve(&a, &b, 2.0);
        assert_abs_diff_eq!(euclid.cost, 2.0, epsilon = 1e-15);
    }
}
