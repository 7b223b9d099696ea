//! 1D solver via the comonotone (quantile) coupling. For p >= 1 the cost
//! |x-y|^p is convex and this coupling is optimal, so the merged-partition
//! integral below is the exact distance. For 0 < p < 1 the cost is concave
//! and the comonotone coupling can be beaten when supports interleave
//! (leaving shared mass in place is cheaper); this routine still returns
//! the comonotone integral, which is then an upper bound. The planar
//! solvers compute the true infimum for every p.

use super::{check_order, EmpiricalMeasure, WassersteinError};

/// Order-p distance between measures on the line. Quantile functions are
/// matched over a merged partition of [0,1], so ties and unequal weights
/// are handled exactly.
pub fn d_p_1d(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> Result<f64, WassersteinError> {
    check_order(p)?;
    if mu.dim() != 1 || nu.dim() != 1 {
        return Err(WassersteinError::DimensionMismatch(mu.dim(), nu.dim()));
    }
    let a = sorted_support(mu);
    let b = sorted_support(nu);

    let mut cost = 0.0;
    let (mut i, mut j) = (0, 0);
    let (mut wa, mut wb) = (a[0].1, b[0].1);
    loop {
        let m = wa.min(wb);
        if m > 0.0 {
            cost += m * (a[i].0 - b[j].0).abs().powf(p);
        }
        wa -= m;
        wb -= m;
        if wa <= 1e-15 {
            i += 1;
            if i == a.len() {
                break;
            }
            wa = a[i].1;
        }
        if wb <= 1e-15 {
            j += 1;
            if j == b.len() {
                break;
            }
            wb = b[j].1;
        }
    }
    Ok(cost.powf(1.0 / p))
}

fn sorted_support(m: &EmpiricalMeasure) -> Vec<(f64, f64)> {
    let mut xs: Vec<(f64, f64)> = m
        .atoms()
        .iter()
        .zip(m.weights())
        .map(|(a, &w)| (a[0], w))
        .collect();
    xs.sort_by(|x, y| x.0.total_cmp(&y.0));
    xs
}
