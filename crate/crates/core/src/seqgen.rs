//! Tuning sequences for the sorted-L1 penalty.
//!
//! All sequences are on the scale of a design whose entries have variance
//! `1/n`, so they do not depend on the number of observations (except the
//! heuristic correction, which uses `n` explicitly).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::normal::upper_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SequenceKind {
    /// `σ(1+δ)Φ⁻¹(1 - qi/2p)`.
    Bh,
    /// BH thresholds inflated to account for correlations among the
    /// estimated coefficients.
    Heuristic,
    /// LASSO: every entry equal to the first BH threshold.
    Constant,
    /// Read from a file or supplied by the caller.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceParams {
    pub q: f64,
    pub delta: f64,
    pub sigma: f64,
    /// Sample size, heuristic sequence only.
    pub n: Option<usize>,
}

/// A non-increasing, non-negative tuning vector together with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSequence {
    values: Vec<f64>,
    kind: SequenceKind,
    params: Option<SequenceParams>,
}

impl LambdaSequence {
    /// Wrap caller-provided values after checking the sequence invariants.
    ///
    /// An all-zero sequence is accepted (it turns the solver into plain least
    /// squares); otherwise the first entry must be positive.
    pub fn custom(values: Vec<f64>) -> Result<Self> {
        validate(&values)?;
        Ok(LambdaSequence {
            values,
            kind: SequenceKind::Custom,
            params: None,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn params(&self) -> Option<&SequenceParams> {
        self.params.as_ref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every entry is strictly larger than the next one.
    pub fn is_strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] > w[1])
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl AsRef<[f64]> for LambdaSequence {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

fn validate(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::domain("tuning sequence is empty"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::domain(alloc::format!(
            "tuning sequence entries must be finite and non-negative, found {v}"
        )));
    }
    if let Some(i) = values.windows(2).position(|w| w[0] < w[1]) {
        return Err(Error::domain(alloc::format!(
            "tuning sequence increases at position {}: {} < {}",
            i + 1,
            values[i],
            values[i + 1]
        )));
    }
    Ok(())
}

fn check_common(p: usize, q: f64, sigma: f64) -> Result<()> {
    if p == 0 {
        return Err(Error::domain("p must be positive"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(alloc::format!(
            "q must lie in (0, 1), got {q}"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(alloc::format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    Ok(())
}

/// `Φ⁻¹(1 - qi/2p)` clamped at zero.
fn bh_quantile(i: usize, p: usize, q: f64) -> Result<f64> {
    let tail = q * i as f64 / (2.0 * p as f64);
    Ok(upper_quantile(tail)?.max(0.0))
}

/// Benjamini-Hochberg sequence `λ_i = σ(1+δ)Φ⁻¹(1 - qi/2p)`, `i = 1..p`.
pub fn lambda_bh(p: usize, q: f64, delta: f64, sigma: f64) -> Result<LambdaSequence> {
    check_common(p, q, sigma)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::domain(alloc::format!(
            "delta must be non-negative, got {delta}"
        )));
    }
    let scale = sigma * (1.0 + delta);
    let values = (1..=p)
        .map(|i| bh_quantile(i, p, q).map(|z| scale * z))
        .collect::<Result<Vec<_>>>()?;
    Ok(LambdaSequence {
        values,
        kind: SequenceKind::Bh,
        params: Some(SequenceParams {
            q,
            delta,
            sigma,
            n: None,
        }),
    })
}

/// Heuristic sequence: starts at the first BH threshold, and each later
/// entry is the BH quantile inflated by `sqrt(1 + Σ_{j<i} λ_j² / (n-i-2))`,
/// capped by its predecessor. Once `n - i - 2 <= 0` the previous value is held.
pub fn lambda_heuristic(p: usize, n: usize, q: f64, sigma: f64) -> Result<LambdaSequence> {
    check_common(p, q, sigma)?;
    if n <= 3 {
        return Err(Error::domain(alloc::format!(
            "heuristic sequence needs n > 3, got {n}"
        )));
    }
    let mut values = Vec::with_capacity(p);
    values.push(sigma * bh_quantile(1, p, q)?);
    let mut sum_sq = values[0] * values[0];
    for i in 2..=p {
        let prev = values[i - 2];
        let dof = n as i64 - i as i64 - 2;
        let next = if dof > 0 {
            let inflated = sigma * bh_quantile(i, p, q)? * libm::sqrt(1.0 + sum_sq / dof as f64);
            inflated.min(prev)
        } else {
            prev
        };
        sum_sq += next * next;
        values.push(next);
    }
    Ok(LambdaSequence {
        values,
        kind: SequenceKind::Heuristic,
        params: Some(SequenceParams {
            q,
            delta: 0.0,
            sigma,
            n: Some(n),
        }),
    })
}

/// LASSO tuning: `p` copies of the first BH threshold.
pub fn lambda_constant(p: usize, q: f64, delta: f64, sigma: f64) -> Result<LambdaSequence> {
    check_common(p, q, sigma)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::domain(alloc::format!(
            "delta must be non-negative, got {delta}"
        )));
    }
    let lam1 = sigma * (1.0 + delta) * bh_quantile(1, p, q)?;
    Ok(LambdaSequence {
        values: alloc::vec![lam1; p],
        kind: SequenceKind::Constant,
        params: Some(SequenceParams {
            q,
            delta,
            sigma,
            n: None,
        }),
    })
}
