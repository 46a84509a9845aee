//! The sorted-L1 norm `J_λ(b) = Σ λ_i |b|_(i)` and its proximal operator.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Scalar soft-thresholding `η_λ(x)`.
#[inline]
pub fn soft_threshold(x: f64, lam: f64) -> f64 {
    if x > lam {
        x - lam
    } else if x < -lam {
        x + lam
    } else {
        0.0
    }
}

/// Indices of `v` ordered by decreasing magnitude. Ties keep index order.
pub(crate) fn order_by_magnitude(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));
    idx
}

/// Magnitudes of `v` sorted in decreasing order.
pub(crate) fn sorted_magnitudes(v: &[f64]) -> Vec<f64> {
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags
}

/// `J_λ(b)`: the largest magnitude is weighted by `λ_1`, the next by `λ_2`, ...
pub fn sorted_l1_norm(b: &[f64], lambda: &[f64]) -> Result<f64> {
    Error::check_len("sorted_l1_norm", lambda.len(), b.len())?;
    Ok(sorted_magnitudes(b)
        .iter()
        .zip(lambda)
        .map(|(m, l)| m * l)
        .sum())
}

/// Dual norm of `J_λ`: `max_k (Σ_{i≤k} |z|_(i)) / (Σ_{i≤k} λ_i)`.
///
/// Returns `+∞` when some prefix of `λ` sums to zero while the matching
/// prefix of `|z|` does not.
pub(crate) fn dual_norm(z: &[f64], lambda: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    let mut num = 0.0;
    let mut den = 0.0;
    for (m, l) in sorted_magnitudes(z).iter().zip(lambda) {
        num += m;
        den += l;
        if den > 0.0 {
            best = best.max(num / den);
        } else if num > 0.0 {
            return f64::INFINITY;
        }
    }
    best
}

/// Reusable buffers for [`prox_sorted_l1_into`].
#[derive(Debug, Default, Clone)]
pub struct ProxWorkspace {
    order: Vec<usize>,
    // (start, end, sum) of pooled blocks, end exclusive
    blocks: Vec<(usize, usize, f64)>,
}

/// `argmin_b ½‖v - b‖² + J_λ(b)`.
pub fn prox_sorted_l1(v: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
    let mut out = alloc::vec![0.0; v.len()];
    let mut ws = ProxWorkspace::default();
    prox_sorted_l1_into(v, lambda, &mut ws, &mut out)?;
    Ok(out)
}

/// Allocation-free form of [`prox_sorted_l1`].
///
/// Sort `|v|` in decreasing order, fit a non-increasing sequence to
/// `|v|_(i) - λ_i` with a stack-based pool-adjacent-violators pass, clip at
/// zero, then undo the sort and restore the signs.
pub fn prox_sorted_l1_into(
    v: &[f64],
    lambda: &[f64],
    ws: &mut ProxWorkspace,
    out: &mut [f64],
) -> Result<()> {
    let p = v.len();
    Error::check_len("prox_sorted_l1", p, lambda.len())?;
    Error::check_len("prox_sorted_l1 output", p, out.len())?;

    ws.order.clear();
    ws.order.extend(0..p);
    ws.order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));

    ws.blocks.clear();
    for (rank, &i) in ws.order.iter().enumerate() {
        let mut block = (rank, rank + 1, v[i].abs() - lambda[rank]);
        // Merge while the new block's mean exceeds its predecessor's. Equal
        // means are left alone so constant-λ input never pools.
        while let Some(&(start, end, sum)) = ws.blocks.last() {
            let prev_len = (end - start) as f64;
            let cur_len = (block.1 - block.0) as f64;
            if block.2 * prev_len > sum * cur_len {
                ws.blocks.pop();
                block = (start, block.1, sum + block.2);
            } else {
                break;
            }
        }
        ws.blocks.push(block);
    }

    for &(start, end, sum) in &ws.blocks {
        let mean = sum / (end - start) as f64;
        let level = if mean > 0.0 { mean } else { 0.0 };
        for &i in &ws.order[start..end] {
            out[i] = if level == 0.0 {
                0.0
            } else if v[i] < 0.0 {
                -level
            } else {
                level
            };
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        assert_eq!(sorted_l1_norm(&[-1.0, 3.0], &[2.0, 1.0]).unwrap(), 7.0);
        assert_eq!(sorted_l1_norm(&[0.0, 0.0], &[2.0, 1.0]).unwrap(), 0.0);
        assert_eq!(
            sorted_l1_norm(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap(),
            12.0
        );
    }

    #[test]
    fn norm_shape_error() {
        assert!(matches!(
            sorted_l1_norm(&[1.0], &[1.0, 0.5]),
            Err(Error::Shape {
                expected: 2,
                found: 1,
                ..
            })
        ));
        assert!(prox_sorted_l1(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(3.0, 2.0), 1.0);
        assert_eq!(soft_threshold(-1.0, 2.0), 0.0);
        assert_eq!(soft_threshold(-5.0, 2.0), -3.0);
    }

    #[test]
    fn prox_examples() {
        let out = prox_sorted_l1(&[3.0, 1.0], &[1.0, 0.5]).unwrap();
        assert!((out[0] - 2.0).abs() < 1e-15 && (out[1] - 0.5).abs() < 1e-15);

        let out = prox_sorted_l1(&[1.0, 0.9], &[0.5, 0.0]).unwrap();
        assert!((out[0] - 0.7).abs() < 1e-15 && (out[1] - 0.7).abs() < 1e-15);

        assert_eq!(
            prox_sorted_l1(&[1.0, 1.0], &[2.0, 2.0]).unwrap(),
            [0.0, 0.0]
        );

        let v = [0.3, -2.0, 1.5];
        assert_eq!(prox_sorted_l1(&v, &[0.0; 3]).unwrap(), v);
    }

    #[test]
    fn prox_restores_signs_and_order() {
        let out = prox_sorted_l1(&[-4.0, 1.0, 2.5, -0.1], &[1.5, 1.0, 0.5, 0.25]).unwrap();
        assert!(out[0] < 0.0 && out[2] > 0.0);
        assert!(out[0].abs() >= out[2].abs() && out[2].abs() >= out[1].abs());
    }

    #[test]
    fn dual_norm_of_lasso_is_scaled_sup_norm() {
        let z = [0.5, -3.0, 1.0];
        assert!((dual_norm(&z, &[2.0; 3]) - 1.5).abs() < 1e-15);
        assert_eq!(dual_norm(&z, &[0.0; 3]), f64::INFINITY);
        assert_eq!(dual_norm(&[0.0; 3], &[0.0; 3]), 0.0);
    }
}
