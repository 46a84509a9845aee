//! Seeded simulation inputs: Gaussian design with `N(0, 1/n)` entries, a
//! sparse signal on the first `k` coordinates and Gaussian noise.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::DesignMatrix;
use crate::solver::Dataset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub amplitude: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::domain("n and p must be positive"));
        }
        if self.k > self.p {
            return Err(Error::domain(alloc::format!(
                "k = {} exceeds p = {}",
                self.k,
                self.p
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::domain("amplitude must be finite"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::domain(alloc::format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    fn truth(&self) -> Vec<f64> {
        let mut b0 = alloc::vec![0.0; self.p];
        b0[..self.k].iter_mut().for_each(|b| *b = self.amplitude);
        b0
    }
}

/// Standard normal draws by the Box-Muller transform over a ChaCha8 stream.
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        NormalStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `(0, 1]`.
    fn uniform_open0(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let radius = libm::sqrt(-2.0 * libm::log(self.uniform_open0()));
        let angle = TAU * self.uniform_open0();
        let (s, c) = libm::sincos(angle);
        self.spare = Some(radius * s);
        radius * c
    }
}

/// `y = Xb⁰ + ε` with `X_ij ~ N(0, 1/n)`, `b⁰` equal to `amplitude` on the
/// first `k` coordinates and zero elsewhere, `ε ~ N(0, σ²I)`.
///
/// Deterministic in `spec`: the design is drawn column by column, then the
/// noise, from one stream seeded by `spec.seed`.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut stream = NormalStream::new(spec.seed);
    let scale = 1.0 / libm::sqrt(spec.n as f64);
    let x = DesignMatrix::from_fn(spec.n, spec.p, |_, _| scale * stream.next_normal());
    finish(spec, x, &mut stream)
}

/// Same signal and noise model on the identity design (`n` must equal `p`).
pub fn generate_orthogonal(spec: &GeneratorSpec) -> Result<Dataset> {
    spec.validate()?;
    if spec.n != spec.p {
        return Err(Error::domain(alloc::format!(
            "orthogonal design needs n = p, got n = {}, p = {}",
            spec.n,
            spec.p
        )));
    }
    let mut stream = NormalStream::new(spec.seed);
    finish(spec, DesignMatrix::identity(spec.n), &mut stream)
}

fn finish(spec: &GeneratorSpec, x: DesignMatrix, stream: &mut NormalStream) -> Result<Dataset> {
    let b0 = spec.truth();
    let mut y = x.mul_vec(&b0);
    y.iter_mut()
        .for_each(|yi| *yi += spec.sigma * stream.next_normal());
    Dataset::new(x, y)?.with_truth(b0)?.with_sigma(spec.sigma)
}

/// Seed for replicate `replicate` under `master`: SplitMix64 finalizer over
/// the pair, so distinct replicates get unrelated streams.
pub fn derive_seed(master: u64, replicate: u64) -> u64 {
    splitmix64(master ^ splitmix64(replicate.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `2σ(1+δ)sqrt(2 log p)`: the signal strength under which full power is
/// attainable.
pub fn amplitude_strong(p: usize, sigma: f64, delta: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::domain("amplitude needs p >= 2"));
    }
    Ok(2.0 * sigma * (1.0 + delta) * libm::sqrt(2.0 * libm::log(p as f64)))
}

/// `0.9σ sqrt(2 log p)`.
pub fn amplitude_weak(p: usize, sigma: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::domain("amplitude needs p >= 2"));
    }
    Ok(0.9 * sigma * libm::sqrt(2.0 * libm::log(p as f64)))
}

/// `p = round(0.05 n^1.5)` and `k = round(n^α)`, rounding half to even.
pub fn grid_dimensions(n: usize, alpha: f64) -> (usize, usize) {
    let nf = n as f64;
    let p = libm::rint(0.05 * libm::pow(nf, 1.5)) as usize;
    let k = libm::rint(libm::pow(nf, alpha)) as usize;
    (p, k)
}
