//! Support characterization of the SLOPE estimator.
//!
//! For a solution `b̂` with score `U(b̂) = X'(y - Xb̂)` define
//! `T(a) = U(b̂) + a·b̂`. The number of selected variables `R` equals `r`
//! exactly when `T(a)` lies in the region `H_r`, and the selected variables
//! are those with `|T_i(a)| > λ_R`. [`verify_theorems`] checks both facts on
//! a solved instance, with a slack that absorbs the solver's finite accuracy.
//!
//! The remaining functions expose the quantities used when relating the
//! false discovery proportion to the noise: `T(1) = M + Γ` with
//! `M = X'ε + b⁰` and `Γ = (I - X'X)(b̂ - b⁰)`, resolvent sets, and the three
//! high-probability events `Q₁`, `Q₂`, `Q₃`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::normal::upper_quantile;
use crate::solver::{support, Dataset, SlopeSolution};
use crate::sorted_l1::{order_by_magnitude, sorted_magnitudes};

/// Coefficients at or below this magnitude count as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SupportDiagnostics {
    /// The `a` used to build `t`.
    pub a: f64,
    /// Score `U(b̂)`.
    pub u: Vec<f64>,
    /// `T(a)`.
    pub t: Vec<f64>,
    /// Selected support (0-based).
    pub support: Vec<usize>,
    /// Model size `|support|`.
    pub r: usize,
    /// The `r` with `T(a) ∈ H_r`.
    pub r_star: Option<usize>,
    /// `Γ`, present when the data carries its ground truth.
    pub gamma_vec: Option<Vec<f64>>,
    /// `M`, present when the data carries its ground truth.
    pub m: Option<Vec<f64>>,
    pub theorem2_ok: bool,
    pub theorem3_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QEventReport {
    pub q1: bool,
    pub q2: bool,
    pub q3: bool,
    pub k_star: usize,
    pub gamma_n: f64,
    pub resolvent_set: Vec<usize>,
}

impl QEventReport {
    pub fn all(&self) -> bool {
        self.q1 && self.q2 && self.q3
    }
}

/// `U(b) = X'(y - Xb)`, the negative gradient of `½‖y - Xb‖²`.
pub fn score_vector(data: &Dataset, b: &[f64]) -> Result<Vec<f64>> {
    Error::check_len("score_vector", data.p(), b.len())?;
    let xb = data.x.mul_vec(b);
    let r: Vec<f64> = data.y.iter().zip(&xb).map(|(y, f)| y - f).collect();
    Ok(data.x.tr_mul_vec(&r))
}

/// `T(a) = U(b̂) + a·b̂`.
pub fn t_vector(data: &Dataset, solution: &SlopeSolution, a: f64) -> Result<Vec<f64>> {
    t_from_beta(data, &solution.beta, a)
}

fn t_from_beta(data: &Dataset, beta: &[f64], a: f64) -> Result<Vec<f64>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(alloc::format!("a must be positive, got {a}")));
    }
    let mut t = score_vector(data, beta)?;
    t.iter_mut().zip(beta).for_each(|(ti, bi)| *ti += a * bi);
    Ok(t)
}

fn check_r(w: &[f64], lambda: &[f64], r: usize) -> Result<()> {
    Error::check_len("H_r membership", lambda.len(), w.len())?;
    if r > w.len() {
        return Err(Error::domain(alloc::format!(
            "r must lie in 0..={}, got {r}",
            w.len()
        )));
    }
    Ok(())
}

/// Both families of inequalities defining `H_r`, with `λ_i - lower_shift`
/// in the first family, `λ_i + upper_shift` in the second, and each
/// inequality loosened by `slack`.
fn hr_inequalities(
    w: &[f64],
    lambda: &[f64],
    r: usize,
    lower_shift: f64,
    upper_shift: f64,
    slack: f64,
) -> bool {
    let mags = sorted_magnitudes(w);
    // First family: for j = r, r-1, ..., 1, Σ_{i=j}^{r} (λ_i - γ) < Σ_{i=j}^{r} |w|_(i).
    let mut lam_sum = 0.0;
    let mut w_sum = 0.0;
    for i in (0..r).rev() {
        lam_sum += lambda[i] - lower_shift;
        w_sum += mags[i];
        if !(lam_sum < w_sum + slack) {
            return false;
        }
    }
    // Second family: for j = r+1, ..., p, Σ_{i=r+1}^{j} (λ_i + γ) ≥ Σ_{i=r+1}^{j} |w|_(i).
    let mut lam_sum = 0.0;
    let mut w_sum = 0.0;
    for i in r..w.len() {
        lam_sum += lambda[i] + upper_shift;
        w_sum += mags[i];
        if !(lam_sum + slack >= w_sum) {
            return false;
        }
    }
    true
}

/// Whether `w ∈ H_r`. `r = 0` checks only the second family, `r = p` only
/// the first.
pub fn hr_membership(w: &[f64], lambda: &[f64], r: usize) -> Result<bool> {
    check_r(w, lambda, r)?;
    Ok(hr_inequalities(w, lambda, r, 0.0, 0.0, 0.0))
}

/// [`hr_membership`] with every inequality relaxed by `slack`.
pub fn hr_membership_relaxed(w: &[f64], lambda: &[f64], r: usize, slack: f64) -> Result<bool> {
    check_r(w, lambda, r)?;
    if !(slack >= 0.0) {
        return Err(Error::domain("slack must be non-negative"));
    }
    Ok(hr_inequalities(w, lambda, r, 0.0, 0.0, slack))
}

/// Whether `w ∈ H_r^γ`: the `H_r` inequalities with `λ_i - γ` in the first
/// family and `λ_i + γ` in the second.
pub fn hr_gamma_membership(w: &[f64], lambda: &[f64], r: usize, gamma: f64) -> Result<bool> {
    check_r(w, lambda, r)?;
    if !(gamma >= 0.0) {
        return Err(Error::domain(alloc::format!(
            "gamma must be non-negative, got {gamma}"
        )));
    }
    Ok(hr_inequalities(w, lambda, r, gamma, gamma, 0.0))
}

/// The unique `r ∈ 0..=p` with `w ∈ H_r`.
///
/// With `S_m = Σ_{i≤m} (|w|_(i) - λ_i)` and `S_0 = 0`, membership in `H_r`
/// says `S_r` is strictly above every earlier partial sum and at least every
/// later one, i.e. `r` is the first index of the maximum.
pub fn hr_index(w: &[f64], lambda: &[f64]) -> Result<usize> {
    Error::check_len("hr_index", lambda.len(), w.len())?;
    let mags = sorted_magnitudes(w);
    let mut best = 0.0;
    let mut best_at = 0;
    let mut s = 0.0;
    for (m, (wi, li)) in mags.iter().zip(lambda).enumerate() {
        s += wi - li;
        if s > best {
            best = s;
            best_at = m + 1;
        }
    }
    Ok(best_at)
}

/// Check the support characterization on a converged solution.
///
/// * `theorem2_ok`: `T(a) ∈ H_R` with each inequality relaxed by `slack`.
/// * `theorem3_ok`: selected coordinates have `|T_i(a)| > λ_R - slack` and
///   `|U_i| ≥ λ_R - slack`; unselected ones have `|T_i(a)| ≤ λ_R + slack`, and
///   for strictly decreasing `λ` also `|U_i| < λ_R + slack`.
///
/// `λ_0` is taken as `+∞`.
pub fn verify_theorems(
    data: &Dataset,
    solution: &SlopeSolution,
    lambda: &[f64],
    a: f64,
    slack: f64,
) -> Result<SupportDiagnostics> {
    if !solution.converged {
        return Err(Error::Certificate {
            gap: solution.duality_gap,
            tol: solution.tolerance,
        });
    }
    if !(slack >= 0.0) {
        return Err(Error::domain("slack must be non-negative"));
    }
    Error::check_len("verify_theorems lambda", data.p(), lambda.len())?;
    let beta = &solution.beta;
    let u = score_vector(data, beta)?;
    let t = t_from_beta(data, beta, a)?;

    let supp = support(beta, DEFAULT_ZERO_TOL);
    let r = supp.len();
    let r_star = hr_index(&t, lambda)?;
    let theorem2_ok = hr_inequalities(&t, lambda, r, 0.0, 0.0, slack);

    let lam_r = if r == 0 { f64::INFINITY } else { lambda[r - 1] };
    let strictly_decreasing = lambda.windows(2).all(|w| w[0] > w[1]);
    let mut selected = alloc::vec![false; data.p()];
    supp.iter().for_each(|&i| selected[i] = true);
    let theorem3_ok = (0..data.p()).all(|i| {
        if selected[i] {
            t[i].abs() > lam_r - slack && u[i].abs() >= lam_r - slack
        } else {
            t[i].abs() <= lam_r + slack && (!strictly_decreasing || u[i].abs() < lam_r + slack)
        }
    });

    let (m, gamma_vec) = match gamma_decomposition(data, solution) {
        Ok((m, g)) => (Some(m), Some(g)),
        Err(_) => (None, None),
    };

    Ok(SupportDiagnostics {
        a,
        u,
        t,
        support: supp,
        r,
        r_star: Some(r_star),
        gamma_vec,
        m,
        theorem2_ok,
        theorem3_ok,
    })
}

fn truth(data: &Dataset) -> Result<&[f64]> {
    data.b0
        .as_deref()
        .ok_or_else(|| Error::data("ground-truth coefficients are required"))
}

fn noise(data: &Dataset, b0: &[f64]) -> Vec<f64> {
    let xb0 = data.x.mul_vec(b0);
    data.y.iter().zip(&xb0).map(|(y, f)| y - f).collect()
}

/// `M = X'ε + b⁰` and `Γ = (I - X'X)(b̂ - b⁰)`, where `ε = y - Xb⁰`.
/// Their sum is `T(1)`.
pub fn gamma_decomposition(
    data: &Dataset,
    solution: &SlopeSolution,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let b0 = truth(data)?;
    let beta = &solution.beta;
    Error::check_len("gamma_decomposition", data.p(), beta.len())?;
    let eps = noise(data, b0);
    let mut m = data.x.tr_mul_vec(&eps);
    m.iter_mut().zip(b0).for_each(|(mi, bi)| *mi += bi);

    let diff: Vec<f64> = beta.iter().zip(b0).map(|(b, t)| b - t).collect();
    let xtx_diff = data.x.tr_mul_vec(&data.x.mul_vec(&diff));
    let gamma = diff.iter().zip(&xtx_diff).map(|(d, g)| d - g).collect();
    Ok((m, gamma))
}

/// `supp(b⁰)` plus the `k* - k` other indices with the largest `|X_i'ε|`
/// (ties to the lower index). Returned in increasing order.
pub fn resolvent_set(data: &Dataset, k_star: usize) -> Result<Vec<usize>> {
    let b0 = truth(data)?;
    let truth_support = support(b0, 0.0);
    let k = truth_support.len();
    if k_star < k || k_star > data.p() {
        return Err(Error::domain(alloc::format!(
            "k_star must lie in {k}..={}, got {k_star}",
            data.p()
        )));
    }
    let corr = data.x.tr_mul_vec(&noise(data, b0));
    let mut null_scores: Vec<f64> = corr.clone();
    truth_support
        .iter()
        .for_each(|&i| null_scores[i] = f64::NAN);
    let mut set = truth_support.clone();
    set.extend(
        order_by_magnitude(&corr)
            .into_iter()
            .filter(|&i| !null_scores[i].is_nan())
            .take(k_star - k),
    );
    set.sort_unstable();
    Ok(set)
}

/// Evaluate the events used to bound the false discovery rate:
///
/// * `q1`: `supp(b⁰) ∪ supp(b̂)` lies inside the resolvent set of size `k*`;
/// * `q2`: `‖Γ‖∞ ≤ γ(n) = c_q·sqrt(k*² log p / n)·σΦ⁻¹(1 - q·k*/2p)`;
/// * `q3`: `‖ε‖₂ / (σ√n) ≤ 1 + 1/k*`.
pub fn q_events(
    data: &Dataset,
    solution: &SlopeSolution,
    k_star: usize,
    c_q: f64,
    q: f64,
) -> Result<QEventReport> {
    let b0 = truth(data)?;
    let sigma = data
        .sigma
        .ok_or_else(|| Error::data("noise scale sigma is required"))?;
    if !(c_q > 0.0) {
        return Err(Error::domain("c_q must be positive"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(alloc::format!(
            "q must lie in (0, 1), got {q}"
        )));
    }
    if k_star == 0 {
        return Err(Error::domain("k_star must be positive"));
    }
    let (n, p) = (data.n() as f64, data.p() as f64);
    let set = resolvent_set(data, k_star)?;

    let mut inside = alloc::vec![false; data.p()];
    set.iter().for_each(|&i| inside[i] = true);
    let q1 = support(b0, 0.0)
        .into_iter()
        .chain(support(&solution.beta, DEFAULT_ZERO_TOL))
        .all(|i| inside[i]);

    let (_, gamma) = gamma_decomposition(data, solution)?;
    let lam_k = sigma * upper_quantile(q * k_star as f64 / (2.0 * p))?.max(0.0);
    let ks = k_star as f64;
    let gamma_n = c_q * libm::sqrt(ks * ks * libm::log(p) / n) * lam_k;
    let q2 = gamma.iter().all(|g| g.abs() <= gamma_n);

    let eps = noise(data, b0);
    let eps_norm = libm::sqrt(eps.iter().map(|e| e * e).sum::<f64>());
    let q3 = eps_norm / (sigma * libm::sqrt(n)) <= 1.0 + 1.0 / ks;

    Ok(QEventReport {
        q1,
        q2,
        q3,
        k_star,
        gamma_n,
        resolvent_set: set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hr_examples() {
        let w = [4.0, 1.5, 0.5];
        let lam = [3.0, 2.0, 1.0];
        assert!(hr_membership(&w, &lam, 1).unwrap());
        assert!(!hr_membership(&w, &lam, 0).unwrap());
        assert!(hr_membership(&[0.0; 3], &lam, 0).unwrap());
        assert_eq!(hr_index(&w, &lam).unwrap(), 1);
    }

    #[test]
    fn hr_rejects_out_of_range_r() {
        assert!(matches!(
            hr_membership(&[1.0, 2.0], &[1.0, 1.0], 3),
            Err(Error::Domain(_))
        ));
        assert!(hr_gamma_membership(&[1.0], &[1.0], 0, -1.0).is_err());
    }

    #[test]
    fn gamma_examples() {
        let lam = [3.0, 2.0, 1.0];
        assert!(hr_gamma_membership(&[0.0; 3], &lam, 0, 3.0).unwrap());
        let w = [4.0, 1.5, 0.5];
        assert_eq!(
            hr_gamma_membership(&w, &lam, 1, 0.0).unwrap(),
            hr_membership(&w, &lam, 1).unwrap()
        );
    }
}
