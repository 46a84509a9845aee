//! Accelerated proximal gradient (FISTA) for
//! `min_b ½‖y - Xb‖² + J_λ(b)` with a duality-gap stopping certificate.
//!
//! LASSO is the special case of a constant sequence.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{estimate_lipschitz, norm_sq, DesignMatrix};
use crate::sorted_l1::{dual_norm, prox_sorted_l1_into, sorted_l1_norm, ProxWorkspace};

/// Design, response and (for simulations) the ground truth behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DesignMatrix,
    pub y: Vec<f64>,
    pub b0: Option<Vec<f64>>,
    pub sigma: Option<f64>,
}

impl Dataset {
    pub fn new(x: DesignMatrix, y: Vec<f64>) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::data(alloc::format!(
                "design has {} rows but response has {} entries",
                x.rows(),
                y.len()
            )));
        }
        if !x.is_finite() {
            return Err(Error::data("design matrix contains non-finite entries"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::data("response contains non-finite entries"));
        }
        Ok(Dataset {
            x,
            y,
            b0: None,
            sigma: None,
        })
    }

    /// Attach the true coefficients.
    pub fn with_truth(mut self, b0: Vec<f64>) -> Result<Self> {
        if b0.len() != self.p() {
            return Err(Error::data(alloc::format!(
                "design has {} columns but truth has {} entries",
                self.p(),
                b0.len()
            )));
        }
        if b0.iter().any(|v| !v.is_finite()) {
            return Err(Error::data("truth contains non-finite entries"));
        }
        self.b0 = Some(b0);
        Ok(self)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(alloc::format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        self.sigma = Some(sigma);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// `½‖y - Xb‖²`.
    pub fn loss(&self, b: &[f64]) -> f64 {
        let xb = self.x.mul_vec(b);
        0.5 * self
            .y
            .iter()
            .zip(&xb)
            .map(|(y, f)| (y - f) * (y - f))
            .sum::<f64>()
    }
}

/// Stopping threshold on the duality gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    /// `tol · (1 + |objective|)`.
    Relative(f64),
}

impl Tolerance {
    fn resolve(self, objective: f64) -> f64 {
        match self {
            Tolerance::Absolute(t) => t,
            Tolerance::Relative(t) => t * (1.0 + objective.abs()),
        }
    }

    fn value(self) -> f64 {
        match self {
            Tolerance::Absolute(t) | Tolerance::Relative(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: Tolerance,
    pub max_iter: usize,
    /// Warm start; zeros when absent.
    pub initial: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: Tolerance::Relative(1e-8),
            max_iter: 20_000,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeSolution {
    pub beta: Vec<f64>,
    pub iterations: usize,
    /// Primal objective minus the dual value at the scaled residual. For an
    /// all-zero sequence there is no bounded dual, and this holds
    /// `‖X'(y - Xβ)‖∞` instead.
    pub duality_gap: f64,
    pub objective: f64,
    pub converged: bool,
    /// Absolute gap threshold the run was held to.
    pub tolerance: f64,
}

/// Indices (0-based) with `|β_i| > zero_tol`.
pub fn support(beta: &[f64], zero_tol: f64) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| b.abs() > zero_tol)
        .map(|(i, _)| i)
        .collect()
}

/// `½‖y - Xb‖² + J_λ(b)`.
pub fn objective(data: &Dataset, lambda: &[f64], b: &[f64]) -> Result<f64> {
    Error::check_len("objective", data.p(), b.len())?;
    Ok(data.loss(b) + sorted_l1_norm(b, lambda)?)
}

pub fn solve_slope(
    data: &Dataset,
    lambda: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SlopeSolution> {
    solve_slope_with(
        data,
        lambda,
        &SolverOptions {
            tol: Tolerance::Absolute(tol),
            max_iter,
            initial: None,
        },
    )
}

struct Certificate<'a> {
    y: &'a [f64],
    lambda: &'a [f64],
    /// No bounded dual for an all-zero sequence.
    unpenalized: bool,
}

impl Certificate<'_> {
    /// Gap at `b` given its residual `r = y - Xb` and score `u = X'r`.
    fn gap(&self, b: &[f64], r: &[f64], u: &[f64]) -> f64 {
        if self.unpenalized {
            return u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        let primal = 0.5 * norm_sq(r) + sorted_l1_norm(b, self.lambda).unwrap_or(f64::NAN);
        let scale = dual_norm(u, self.lambda).max(1.0);
        let mut dist = 0.0;
        for (yi, ri) in self.y.iter().zip(r) {
            let d = yi - ri / scale;
            dist += d * d;
        }
        let dual = 0.5 * norm_sq(self.y) - 0.5 * dist;
        (primal - dual).max(0.0)
    }
}

pub fn solve_slope_with(
    data: &Dataset,
    lambda: &[f64],
    opts: &SolverOptions,
) -> Result<SlopeSolution> {
    let (n, p) = (data.n(), data.p());
    Error::check_len("solve_slope lambda", p, lambda.len())?;
    Error::check_len("solve_slope response", n, data.y.len())?;
    if !(opts.tol.value() > 0.0) {
        return Err(Error::domain("solver tolerance must be positive"));
    }
    if opts.max_iter == 0 {
        return Err(Error::domain("max_iter must be positive"));
    }
    if !data.x.is_finite() || data.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("non-finite entries in design or response"));
    }
    if lambda.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::domain(
            "tuning sequence must be finite and non-negative",
        ));
    }

    let cert = Certificate {
        y: &data.y,
        lambda,
        unpenalized: lambda.first().is_none_or(|l| *l == 0.0),
    };

    let mut x = match &opts.initial {
        Some(b) => {
            Error::check_len("solve_slope warm start", p, b.len())?;
            b.clone()
        }
        None => alloc::vec![0.0; p],
    };
    let mut r_x = residual(data, &x);
    let mut obj_x = 0.5 * norm_sq(&r_x) + sorted_l1_norm(&x, lambda)?;
    let mut u = alloc::vec![0.0; p];

    let mut lipschitz = estimate_lipschitz(&data.x);
    if lipschitz == 0.0 {
        // X = 0: the loss is constant and b = 0 minimizes the penalty.
        x.iter_mut().for_each(|v| *v = 0.0);
        let r = data.y.clone();
        data.x.tr_mul_vec_into(&r, &mut u);
        let gap = cert.gap(&x, &r, &u);
        let objective = 0.5 * norm_sq(&r);
        return Ok(SlopeSolution {
            beta: x,
            iterations: 0,
            duality_gap: gap,
            objective,
            converged: gap <= opts.tol.resolve(objective),
            tolerance: opts.tol.resolve(objective),
        });
    }

    let mut ws = ProxWorkspace::default();
    let mut y_pt = x.clone();
    let mut y_is_x = true;
    let mut r_y = r_x.clone();
    let mut fit = alloc::vec![0.0; n];
    let mut step_point = alloc::vec![0.0; p];
    let mut scaled_lambda = alloc::vec![0.0; p];
    let mut x_new = alloc::vec![0.0; p];
    let mut r_new = alloc::vec![0.0; n];
    let mut t = 1.0f64;
    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut gap_is_for_x = false;

    while iterations < opts.max_iter {
        iterations += 1;

        if y_is_x {
            r_y.copy_from_slice(&r_x);
        } else {
            data.x.mul_vec_into(&y_pt, &mut fit);
            for ((r, yi), f) in r_y.iter_mut().zip(&data.y).zip(&fit) {
                *r = yi - f;
            }
        }
        data.x.tr_mul_vec_into(&r_y, &mut u);

        // The gap at the extrapolated point comes for free; only when it is
        // small is the accepted iterate itself certified.
        let threshold = opts.tol.resolve(obj_x);
        let gap_y = cert.gap(&y_pt, &r_y, &u);
        if y_is_x {
            gap = gap_y;
            gap_is_for_x = true;
            if gap <= threshold {
                converged = true;
                break;
            }
        } else if gap_y <= threshold {
            let mut u_x = alloc::vec![0.0; p];
            data.x.tr_mul_vec_into(&r_x, &mut u_x);
            gap = cert.gap(&x, &r_x, &u_x);
            gap_is_for_x = true;
            if gap <= threshold {
                converged = true;
                break;
            }
        }

        let inv_l = 1.0 / lipschitz;
        for ((s, yv), g) in step_point.iter_mut().zip(&y_pt).zip(&u) {
            *s = yv + inv_l * g;
        }
        for (s, l) in scaled_lambda.iter_mut().zip(lambda) {
            *s = l * inv_l;
        }
        prox_sorted_l1_into(&step_point, &scaled_lambda, &mut ws, &mut x_new)?;
        data.x.mul_vec_into(&x_new, &mut fit);
        for ((r, yi), f) in r_new.iter_mut().zip(&data.y).zip(&fit) {
            *r = yi - f;
        }
        let obj_new = 0.5 * norm_sq(&r_new) + sorted_l1_norm(&x_new, lambda)?;

        // Differences below this are rounding noise; the gap is first order in
        // the distance to the optimum while the objective is second order, so
        // steps at the objective's rounding floor still make progress.
        let slack = 1e-12 * (1.0 + obj_x.abs());
        if obj_new > obj_x + slack {
            if !y_is_x {
                // Objective went up: drop the momentum and redo from x.
                y_pt.copy_from_slice(&x);
                y_is_x = true;
                t = 1.0;
                continue;
            }
            // A plain proximal step increased the objective, so the step
            // size was too long.
            lipschitz *= 2.0;
            continue;
        }

        let t_next = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * t * t));
        let momentum = (t - 1.0) / t_next;
        for ((yv, xn), xo) in y_pt.iter_mut().zip(&x_new).zip(&x) {
            *yv = xn + momentum * (xn - xo);
        }
        y_is_x = momentum == 0.0;
        core::mem::swap(&mut x, &mut x_new);
        core::mem::swap(&mut r_x, &mut r_new);
        obj_x = obj_new;
        t = t_next;
        gap_is_for_x = false;
    }

    if !converged && !gap_is_for_x {
        data.x.tr_mul_vec_into(&r_x, &mut u);
        gap = cert.gap(&x, &r_x, &u);
        converged = gap <= opts.tol.resolve(obj_x);
    }

    Ok(SlopeSolution {
        beta: x,
        iterations,
        duality_gap: gap,
        objective: obj_x,
        converged,
        tolerance: opts.tol.resolve(obj_x),
    })
}

fn residual(data: &Dataset, b: &[f64]) -> Vec<f64> {
    let xb = data.x.mul_vec(b);
    data.y.iter().zip(&xb).map(|(y, f)| y - f).collect()
}
