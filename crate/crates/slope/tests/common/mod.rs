//! Reference computations that share no code with the crates under test.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Standard normal draw (polar method).
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

/// Random non-increasing, strictly positive sequence.
pub fn random_lambda(rng: &mut StdRng, p: usize, scale: f64) -> Vec<f64> {
    let mut l: Vec<f64> = (0..p)
        .map(|_| scale * rng.random_range(0.01..1.0))
        .collect();
    l.sort_by(|a, b| b.partial_cmp(a).unwrap());
    l
}

/// Sorted-L1 norm straight from the definition.
pub fn oracle_norm(b: &[f64], lambda: &[f64]) -> f64 {
    let mut m: Vec<f64> = b.iter().map(|x| x.abs()).collect();
    m.sort_by(|x, y| y.partial_cmp(x).unwrap());
    m.iter().zip(lambda).map(|(a, l)| a * l).sum()
}

/// Prox of the sorted-L1 norm by projected gradient.
///
/// On the sorted magnitudes `a` the prox minimizes `½‖a - x‖² + λ'x` over
/// `x_1 ≥ … ≥ x_p ≥ 0`; with `x_i = Σ_{j≥i} d_j` the constraint becomes
/// `d ≥ 0` and projection is clamping.
pub fn oracle_prox(v: &[f64], lambda: &[f64], iterations: usize) -> Vec<f64> {
    let p = v.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| v[j].abs().partial_cmp(&v[i].abs()).unwrap());
    let a: Vec<f64> = order.iter().map(|&i| v[i].abs()).collect();
    let step = 2.0 / (p * (p + 1)) as f64;
    let mut d = vec![0.0; p];
    let mut x = vec![0.0; p];
    for _ in 0..iterations {
        let mut acc = 0.0;
        for i in (0..p).rev() {
            acc += d[i];
            x[i] = acc;
        }
        let mut prefix = 0.0;
        let mut moved = 0.0f64;
        for j in 0..p {
            prefix += x[j] - a[j] + lambda[j];
            let next = (d[j] - step * prefix).max(0.0);
            moved = moved.max((next - d[j]).abs());
            d[j] = next;
        }
        if moved == 0.0 {
            break;
        }
    }
    let mut acc = 0.0;
    for i in (0..p).rev() {
        acc += d[i];
        x[i] = acc;
    }
    let mut out = vec![0.0; p];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = x[rank] * v[i].signum();
    }
    out
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_slope"))
}
