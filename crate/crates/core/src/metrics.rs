//! Selection metrics, the BH step-up rule on an orthogonal design, and the
//! decomposition of the false discovery proportion over the `H_r` regions.

use alloc::vec::Vec;

use crate::diagnostics::{hr_index, SupportDiagnostics};
use crate::error::{Error, Result};
use crate::normal::upper_quantile;
use crate::sorted_l1::order_by_magnitude;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionMetrics {
    /// False selections.
    pub v: usize,
    /// True selections.
    pub tr: usize,
    /// All selections.
    pub r: usize,
    /// Non-zeros in the truth.
    pub k: usize,
    /// `V / max(R, 1)`.
    pub fdp: f64,
    /// `TR / k`, or 1 when `k = 0`.
    pub tpp: f64,
}

pub fn selection_metrics(b0: &[f64], beta: &[f64], zero_tol: f64) -> Result<SelectionMetrics> {
    Error::check_len("selection_metrics", b0.len(), beta.len())?;
    let (mut v, mut tr, mut k) = (0, 0, 0);
    for (t, b) in b0.iter().zip(beta) {
        let selected = b.abs() > zero_tol;
        if *t != 0.0 {
            k += 1;
            tr += selected as usize;
        } else {
            v += selected as usize;
        }
    }
    let r = v + tr;
    Ok(SelectionMetrics {
        v,
        tr,
        r,
        k,
        fdp: v as f64 / r.max(1) as f64,
        tpp: if k > 0 { tr as f64 / k as f64 } else { 1.0 },
    })
}

/// Benjamini-Hochberg on `ỹ = X'y` for an orthogonal design: reject the
/// `j_BH` largest `|ỹ_i|`, where `j_BH` is the largest `j` with
/// `|ỹ|_(j) ≥ σΦ⁻¹(1 - jq/2p)`. Returns rejected indices in increasing order.
pub fn bh_orthogonal(y_tilde: &[f64], q: f64, sigma: f64) -> Result<Vec<usize>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(alloc::format!(
            "q must lie in (0, 1), got {q}"
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::domain("sigma must be positive"));
    }
    let p = y_tilde.len();
    let order = order_by_magnitude(y_tilde);
    let mut j_bh = 0;
    for (j, &i) in order.iter().enumerate() {
        let threshold = sigma * upper_quantile(q * (j + 1) as f64 / (2.0 * p as f64))?;
        if y_tilde[i].abs() >= threshold {
            j_bh = j + 1;
        }
    }
    let mut rejected = order[..j_bh].to_vec();
    rejected.sort_unstable();
    Ok(rejected)
}

/// One replicate's term of the decomposition
/// `Σ_r (1/r) Σ_{i ∉ supp(b⁰)} 1{|T_i| > λ_r, T ∈ H_r}`.
///
/// The regions `H_r` partition the space, so only `r = r*` contributes.
pub fn fdr_decomposition_term(
    diag: &SupportDiagnostics,
    b0: &[f64],
    lambda: &[f64],
) -> Result<f64> {
    if diag.a != 1.0 {
        return Err(Error::domain(alloc::format!(
            "decomposition uses T(1), diagnostics were built with a = {}",
            diag.a
        )));
    }
    Error::check_len("fdr_decomposition truth", diag.t.len(), b0.len())?;
    let r = match diag.r_star {
        Some(r) => r,
        None => hr_index(&diag.t, lambda)?,
    };
    if r == 0 {
        return Ok(0.0);
    }
    let lam_r = lambda[r - 1];
    let false_hits = diag
        .t
        .iter()
        .zip(b0)
        .filter(|(t, b)| **b == 0.0 && t.abs() > lam_r)
        .count();
    Ok(false_hits as f64 / r as f64)
}

/// Empirical mean of [`fdr_decomposition_term`] over replicates sharing one
/// truth vector. Returns 0 for an empty list.
pub fn fdr_decomposition(
    replicate_diags: &[SupportDiagnostics],
    b0: &[f64],
    lambda: &[f64],
) -> Result<f64> {
    if replicate_diags.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for d in replicate_diags {
        total += fdr_decomposition_term(d, b0, lambda)?;
    }
    Ok(total / replicate_diags.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_examples() {
        let m = selection_metrics(&[1.0, 1.0, 0.0, 0.0], &[1.0, 0.0, 1.0, 0.0], 1e-8).unwrap();
        assert_eq!((m.v, m.tr, m.r, m.k), (1, 1, 2, 2));
        assert_eq!((m.fdp, m.tpp), (0.5, 0.5));

        let m = selection_metrics(&[1.0, 0.0], &[0.0, 0.0], 1e-8).unwrap();
        assert_eq!((m.fdp, m.tpp), (0.0, 0.0));

        let m = selection_metrics(&[0.0; 4], &[1.0, -2.0, 0.5, 0.0], 1e-8).unwrap();
        assert_eq!(m.r, 3);
        assert_eq!(m.fdp, 1.0);
        assert_eq!(m.tpp, 1.0);
    }

    #[test]
    fn bh_empty_when_nothing_clears_first_threshold() {
        let y = [0.1, -1.9, 1.0, 0.5];
        // first threshold: Φ⁻¹(1 - 0.2/8) ≈ 1.96
        assert!(bh_orthogonal(&y, 0.2, 1.0).unwrap().is_empty());
    }

    #[test]
    fn bh_single_hypothesis() {
        // p = 1: single test at Φ⁻¹(1 - q/2) = 1.2816 for q = 0.2
        assert_eq!(bh_orthogonal(&[1.3], 0.2, 1.0).unwrap(), [0]);
        assert!(bh_orthogonal(&[-1.27], 0.2, 1.0).unwrap().is_empty());
    }

    #[test]
    fn bh_step_up_takes_largest_j() {
        // thresholds for p = 4, q = 0.5: Φ⁻¹(1 - j/16) = 1.534, 1.150, 0.887, 0.674
        let y = [1.0, 0.9, 0.8, 0.1];
        // |y|_(1)=1.0 < 1.534 fails but j=3: 0.8 < 0.887 fails, j=2: 0.9 < 1.150 fails.
        assert!(bh_orthogonal(&y, 0.5, 1.0).unwrap().is_empty());
        let y = [1.0, -0.95, 0.9, 0.1];
        // j=3: 0.9 ≥ 0.887 so the three largest are rejected.
        assert_eq!(bh_orthogonal(&y, 0.5, 1.0).unwrap(), [0, 1, 2]);
    }
}
