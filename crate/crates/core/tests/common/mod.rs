//! Reference computations that share no code with the crate under test.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Standard normal draw (polar method) from the test RNG.
pub fn normal(rng: &mut StdRng) -> f64 {
    loop {
        let u: f64 = rng.random_range(-1.0..1.0);
        let v: f64 = rng.random_range(-1.0..1.0);
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// `erf(z)` for `0 ≤ z < 3` from the all-positive series
/// `2/√π e^{-z²} Σ 2ⁿ z^{2n+1} / (2n+1)!!` (no cancellation).
fn series_erf(z: f64) -> f64 {
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    while term > 1e-18 * sum {
        n += 1.0;
        term *= 2.0 * z * z / (2.0 * n + 1.0);
        sum += term;
    }
    2.0 / std::f64::consts::PI.sqrt() * (-z * z).exp() * sum
}

/// `erfc(z)` for `z ≥ 3` from its continued fraction, evaluated bottom-up.
fn continued_fraction_erfc(z: f64) -> f64 {
    let mut t = z;
    for k in (1..=400).rev() {
        t = z + (k as f64 / 2.0) / t;
    }
    (-z * z).exp() / std::f64::consts::PI.sqrt() / t
}

/// Standard normal CDF from the two expansions above.
pub fn oracle_cdf(x: f64) -> f64 {
    let z = x.abs() / std::f64::consts::SQRT_2;
    let upper_tail = if z < 3.0 {
        0.5 * (1.0 - series_erf(z))
    } else {
        0.5 * continued_fraction_erfc(z)
    };
    if x >= 0.0 {
        1.0 - upper_tail
    } else {
        upper_tail
    }
}

/// Φ⁻¹ by bisection on [`oracle_cdf`].
pub fn oracle_quantile(u: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if oracle_cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Prox of the sorted-L1 norm by projected gradient.
///
/// The prox keeps the order and signs of `|v|`, so on the sorted magnitudes
/// `a` it minimizes `½‖a - x‖² + λ'x` over `x_1 ≥ … ≥ x_p ≥ 0`. Writing
/// `x_i = Σ_{j≥i} d_j` turns that cone into the orthant `d ≥ 0`, where
/// projection is clamping.
pub fn oracle_prox(v: &[f64], lambda: &[f64], iterations: usize) -> Vec<f64> {
    let p = v.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| v[j].abs().partial_cmp(&v[i].abs()).unwrap());
    let a: Vec<f64> = order.iter().map(|&i| v[i].abs()).collect();
    let d = oracle_cone_qp(&a, lambda, iterations, None);
    let x = suffix_sums(&d);
    let mut out = vec![0.0; p];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = x[rank] * v[i].signum();
    }
    out
}

fn suffix_sums(d: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; d.len()];
    let mut acc = 0.0;
    for i in (0..d.len()).rev() {
        acc += d[i];
        x[i] = acc;
    }
    x
}

/// Projected gradient on `d ≥ 0` for `½‖a - Ad‖² + λ'Ad`, `A` the
/// upper-triangular ones matrix.
fn oracle_cone_qp(a: &[f64], lambda: &[f64], iterations: usize, warm: Option<&[f64]>) -> Vec<f64> {
    let p = a.len();
    let step = 2.0 / (p * (p + 1)) as f64; // 1 / ‖A‖_F² ≤ 1 / ‖A‖₂²
    let mut d = warm.map(|w| w.to_vec()).unwrap_or_else(|| vec![0.0; p]);
    let mut g = vec![0.0; p];
    for _ in 0..iterations {
        let x = suffix_sums(&d);
        for i in 0..p {
            g[i] = x[i] - a[i] + lambda[i];
        }
        // A'g: prefix sums
        let mut acc = 0.0;
        let mut moved = 0.0f64;
        for j in 0..p {
            acc += g[j];
            let next = (d[j] - step * acc).max(0.0);
            moved = moved.max((next - d[j]).abs());
            d[j] = next;
        }
        if moved == 0.0 {
            break;
        }
    }
    d
}

/// Sorted-L1 norm straight from the definition.
pub fn oracle_norm(b: &[f64], lambda: &[f64]) -> f64 {
    let mut m: Vec<f64> = b.iter().map(|x| x.abs()).collect();
    m.sort_by(|x, y| y.partial_cmp(x).unwrap());
    m.iter().zip(lambda).map(|(a, l)| a * l).sum()
}

/// Row-major dense helpers.
pub struct Dense {
    pub n: usize,
    pub p: usize,
    pub rows: Vec<f64>,
}

impl Dense {
    pub fn random(rng: &mut StdRng, n: usize, p: usize, scale: f64) -> Dense {
        Dense {
            n,
            p,
            rows: (0..n * p).map(|_| scale * normal(rng)).collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.p + j]
    }

    pub fn mul(&self, b: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.p).map(|j| self.at(i, j) * b[j]).sum())
            .collect()
    }

    pub fn tr_mul(&self, r: &[f64]) -> Vec<f64> {
        (0..self.p)
            .map(|j| (0..self.n).map(|i| self.at(i, j) * r[i]).sum())
            .collect()
    }

    pub fn gram(&self) -> Vec<Vec<f64>> {
        (0..self.p)
            .map(|a| {
                (0..self.p)
                    .map(|b| (0..self.n).map(|i| self.at(i, a) * self.at(i, b)).sum())
                    .collect()
            })
            .collect()
    }

    pub fn objective(&self, y: &[f64], lambda: &[f64], b: &[f64]) -> f64 {
        let f = self.mul(b);
        0.5 * y
            .iter()
            .zip(&f)
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            + oracle_norm(b, lambda)
    }
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_max_eigenvalue(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-22 {
            break;
        }
        for pi in 0..n {
            for qi in pi + 1..n {
                if a[pi][qi].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[qi][qi] - a[pi][pi]) / (2.0 * a[pi][qi]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][pi];
                    let akq = a[k][qi];
                    a[k][pi] = c * akp - s * akq;
                    a[k][qi] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[pi][k];
                    let aqk = a[qi][k];
                    a[pi][k] = c * apk - s * aqk;
                    a[qi][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::MIN, f64::max)
}

/// Proximal gradient (no momentum) whose prox step is [`oracle_prox`]-style
/// projected gradient, warm-started between outer steps.
pub fn oracle_slope(x: &Dense, y: &[f64], lambda: &[f64], outer: usize) -> Vec<f64> {
    let l = jacobi_max_eigenvalue(x.gram()) * 1.0001;
    let p = x.p;
    let mut b = vec![0.0; p];
    let scaled: Vec<f64> = lambda.iter().map(|v| v / l).collect();
    for _ in 0..outer {
        let f = x.mul(&b);
        let r: Vec<f64> = y.iter().zip(&f).map(|(a, c)| a - c).collect();
        let g = x.tr_mul(&r);
        let v: Vec<f64> = b.iter().zip(&g).map(|(bi, gi)| bi + gi / l).collect();
        let next = oracle_prox(&v, &scaled, 200_000);
        let change = next
            .iter()
            .zip(&b)
            .map(|(a, c)| (a - c).abs())
            .fold(0.0, f64::max);
        b = next;
        if change < 1e-15 {
            break;
        }
    }
    b
}

/// Cyclic coordinate descent for `½‖y - Xb‖² + λ‖b‖₁`.
pub fn oracle_lasso(x: &Dense, y: &[f64], lam: f64) -> Vec<f64> {
    let p = x.p;
    let col_sq: Vec<f64> = (0..p)
        .map(|j| (0..x.n).map(|i| x.at(i, j).powi(2)).sum())
        .collect();
    let mut b = vec![0.0; p];
    let mut r = y.to_vec();
    for _ in 0..100_000 {
        let mut change = 0.0f64;
        for j in 0..p {
            let rho: f64 = (0..x.n).map(|i| x.at(i, j) * r[i]).sum::<f64>() + col_sq[j] * b[j];
            let next = if rho > lam {
                (rho - lam) / col_sq[j]
            } else if rho < -lam {
                (rho + lam) / col_sq[j]
            } else {
                0.0
            };
            let delta = next - b[j];
            if delta != 0.0 {
                for i in 0..x.n {
                    r[i] -= delta * x.at(i, j);
                }
                b[j] = next;
            }
            change = change.max(delta.abs());
        }
        if change < 1e-14 {
            break;
        }
    }
    b
}

/// Random non-increasing, strictly positive sequence.
pub fn random_lambda(rng: &mut StdRng, p: usize, scale: f64) -> Vec<f64> {
    let mut l: Vec<f64> = (0..p)
        .map(|_| scale * rng.random_range(0.01..1.0))
        .collect();
    l.sort_by(|a, b| b.partial_cmp(a).unwrap());
    l
}
