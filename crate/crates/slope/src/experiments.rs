//! Monte Carlo estimates of FDR and power over a grid of `(n, α, δ)` cells.
//!
//! Every cell draws replicate `r` from the seed `derive_seed(master_seed, r)`,
//! so all methods in a cell see the same data, and cells that share `n`
//! and `p` share their designs and noise. Replicates run on the rayon pool;
//! results are collected in replicate order before any sum is formed, so the
//! report does not depend on the number of workers.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use slope_core::datagen::{
    amplitude_strong, amplitude_weak, derive_seed, generate_orthogonal, grid_dimensions,
};
use slope_core::diagnostics::q_events;
use slope_core::seqgen::{lambda_bh, lambda_constant, lambda_heuristic};
use slope_core::solver::solve_slope_with;
use slope_core::{generate, selection_metrics, Dataset, GeneratorSpec, SolverOptions, Tolerance};

use crate::error::{Error, Result};
use crate::io::fmt_num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SlopeBH", alias = "slope_bh")]
    SlopeBh,
    #[serde(rename = "SlopeHeur", alias = "slope_heur")]
    SlopeHeur,
    #[serde(rename = "Lasso", alias = "lasso")]
    Lasso,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::SlopeBh => "SlopeBH",
            Method::SlopeHeur => "SlopeHeur",
            Method::Lasso => "Lasso",
        }
    }
}

/// Value of the `k` non-zero coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeRule {
    /// `2σ(1+δ)sqrt(2 log p)`.
    Strong,
    /// `0.9σ sqrt(2 log p)`.
    Weak,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    /// `X_ij ~ N(0, 1/n)`.
    #[default]
    Gaussian,
    /// `X = I`, so `p = n`.
    Orthogonal,
}

/// Probe of the events `Q₁ ∧ Q₂ ∧ Q₃` on the BH-sequence solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QEventProbe {
    /// `k* = min(p, max(1, round(k_star_factor · k)))`.
    #[serde(default = "default_k_star_factor")]
    pub k_star_factor: f64,
    #[serde(default = "default_c_q")]
    pub c_q: f64,
}

fn default_k_star_factor() -> f64 {
    2.0
}

fn default_c_q() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub alpha_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub q: f64,
    pub amplitude_rule: AmplitudeRule,
    pub methods: Vec<Method>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub master_seed: u64,
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
    #[serde(default)]
    pub design: DesignKind,
    /// Fixed number of columns instead of `round(0.05 n^1.5)`.
    #[serde(default)]
    pub p: Option<usize>,
    /// Fixed sparsity instead of `round(n^α)`.
    #[serde(default)]
    pub k: Option<usize>,
    /// Relative duality-gap tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub q_event_probe: Option<QEventProbe>,
}

fn default_replicates() -> usize {
    500
}

fn default_sigma() -> f64 {
    1.0
}

fn default_zero_tol() -> f64 {
    1e-8
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    20_000
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_grid.is_empty() || self.alpha_grid.is_empty() || self.delta_grid.is_empty() {
            return bad("n_grid, alpha_grid and delta_grid must be non-empty".into());
        }
        if self.methods.is_empty() {
            return bad("methods must be non-empty".into());
        }
        if let Some(n) = self.n_grid.iter().find(|&&n| n < 2) {
            return bad(format!("n must be at least 2, got {n}"));
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return bad(format!("alpha must lie in (0, 1), got {a}"));
        }
        if let Some(d) = self
            .delta_grid
            .iter()
            .find(|d| !(**d >= 0.0 && d.is_finite()))
        {
            return bad(format!("delta must be non-negative, got {d}"));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return bad(format!("q must lie in (0, 1), got {}", self.q));
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.zero_tol >= 0.0) {
            return bad("zero_tol must be non-negative".into());
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("tol and max_iter must be positive".into());
        }
        if let AmplitudeRule::Fixed(a) = self.amplitude_rule {
            if !a.is_finite() {
                return bad("fixed amplitude must be finite".into());
            }
        }
        if self.methods.contains(&Method::SlopeHeur) && self.n_grid.iter().any(|&n| n <= 3) {
            return bad("the heuristic sequence needs n > 3".into());
        }
        if let Some(probe) = self.q_event_probe {
            if !(probe.c_q > 0.0 && probe.k_star_factor > 0.0) {
                return bad("q_event_probe needs positive c_q and k_star_factor".into());
            }
        }
        for &n in &self.n_grid {
            for &alpha in &self.alpha_grid {
                let (p, k) = self.dimensions(n, alpha)?;
                if p == 0 || k > p {
                    return bad(format!("cell n = {n}, alpha = {alpha}: k = {k}, p = {p}"));
                }
            }
        }
        Ok(())
    }

    fn dimensions(&self, n: usize, alpha: f64) -> Result<(usize, usize)> {
        let (grid_p, grid_k) = grid_dimensions(n, alpha);
        let p = match (self.design, self.p) {
            (DesignKind::Orthogonal, Some(p)) if p != n => {
                return Err(Error::Config(format!(
                    "orthogonal design needs p = n, got p = {p}, n = {n}"
                )))
            }
            (DesignKind::Orthogonal, _) => n,
            (DesignKind::Gaussian, Some(p)) => p,
            (DesignKind::Gaussian, None) => grid_p,
        };
        Ok((p, self.k.unwrap_or(grid_k)))
    }
}

/// One line of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: Method,
    pub n: usize,
    pub p: usize,
    /// Non-zero entries of the truth.
    pub k: usize,
    pub alpha: f64,
    pub delta: f64,
    pub fdr: f64,
    /// Standard error of `fdr`; absent with fewer than two replicates.
    pub fdr_se: Option<f64>,
    /// Absent when `k = 0`.
    pub power: Option<f64>,
    pub power_se: Option<f64>,
    pub mean_r: f64,
    pub replicates_done: usize,
    pub excluded: usize,
    /// Per-replicate false discovery proportions, in replicate order.
    pub fdp: Vec<f64>,
    pub tpp: Vec<f64>,
    pub selected: Vec<usize>,
}

impl ReportRow {
    /// More than 1% of the replicates failed to converge.
    pub fn failed(&self) -> bool {
        self.excluded * 100 > self.replicates_done + self.excluded
    }
}

/// Per-cell quantities that do not belong to a single method.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub alpha: f64,
    pub delta: f64,
    /// Fraction of replicates where LASSO selected no more variables than
    /// SLOPE with the BH sequence (both methods must be configured).
    pub lasso_not_larger: Option<f64>,
    /// Fraction of replicates where `Q₁ ∧ Q₂ ∧ Q₃` held.
    pub q_event_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub cells: Vec<CellSummary>,
    pub q: f64,
}

pub const REPORT_HEADER: &str =
    "method,n,p,k,alpha,delta,fdr,fdr_se,power,power_se,mean_R,replicates_done";

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.method.name(),
                r.n,
                r.p,
                r.k,
                fmt_num(r.alpha),
                fmt_num(r.delta),
                fmt_num(r.fdr),
                opt(r.fdr_se),
                opt(r.power),
                opt(r.power_se),
                fmt_num(r.mean_r),
                r.replicates_done
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn failed_rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.failed())
    }

    pub fn find(&self, method: Method, n: usize, alpha: f64, delta: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.n == n && r.alpha == alpha && r.delta == delta)
    }
}

struct Cell {
    n: usize,
    p: usize,
    alpha: f64,
    delta: f64,
    amplitude: f64,
    k: usize,
    lambdas: Vec<(Method, Vec<f64>)>,
    probe_lambda: Option<Vec<f64>>,
}

#[derive(Clone, Copy)]
struct Outcome {
    fdp: f64,
    tpp: f64,
    selected: usize,
}

struct Replicate {
    /// Aligned with `Cell::lambdas`; `None` when the solver did not converge.
    outcomes: Vec<Option<Outcome>>,
    q_events: Option<bool>,
    k: usize,
}

/// Run every cell of `config` on the current rayon pool.
pub fn run_grid(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for &n in &config.n_grid {
        for &alpha in &config.alpha_grid {
            for &delta in &config.delta_grid {
                let cell = build_cell(config, n, alpha, delta)?;
                let replicates = (0..config.replicates as u64)
                    .into_par_iter()
                    .map(|r| run_replicate(config, &cell, r))
                    .collect::<Result<Vec<_>>>()?;
                let (cell_rows, summary) = aggregate(config, &cell, &replicates);
                rows.extend(cell_rows);
                cells.push(summary);
            }
        }
    }
    Ok(ExperimentReport {
        rows,
        cells,
        q: config.q,
    })
}

/// [`run_grid`] on a dedicated pool of `threads` workers.
pub fn run_grid_with_threads(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_grid(config))
}

fn build_cell(config: &ExperimentConfig, n: usize, alpha: f64, delta: f64) -> Result<Cell> {
    let (p, k) = config.dimensions(n, alpha)?;
    let sigma = config.sigma;
    let amplitude = match config.amplitude_rule {
        AmplitudeRule::Strong => amplitude_strong(p.max(2), sigma, delta)?,
        AmplitudeRule::Weak => amplitude_weak(p.max(2), sigma)?,
        AmplitudeRule::Fixed(a) => a,
    };
    let lambdas = config
        .methods
        .iter()
        .map(|&m| {
            let seq = match m {
                Method::SlopeBh => lambda_bh(p, config.q, delta, sigma)?,
                Method::SlopeHeur => lambda_heuristic(p, n, config.q, sigma)?,
                Method::Lasso => lambda_constant(p, config.q, delta, sigma)?,
            };
            Ok((m, seq.into_values()))
        })
        .collect::<Result<Vec<_>>>()?;
    let probe_lambda = match config.q_event_probe {
        Some(_) => Some(lambda_bh(p, config.q, delta, sigma)?.into_values()),
        None => None,
    };
    Ok(Cell {
        n,
        p,
        alpha,
        delta,
        amplitude,
        k,
        lambdas,
        probe_lambda,
    })
}

fn run_replicate(config: &ExperimentConfig, cell: &Cell, r: u64) -> Result<Replicate> {
    let spec = GeneratorSpec {
        n: cell.n,
        p: cell.p,
        k: cell.k,
        amplitude: cell.amplitude,
        sigma: config.sigma,
        seed: derive_seed(config.master_seed, r),
    };
    let data = match config.design {
        DesignKind::Gaussian => generate(&spec)?,
        DesignKind::Orthogonal => generate_orthogonal(&spec)?,
    };
    let b0 = data
        .b0
        .as_deref()
        .expect("generated data carries its truth");
    let k = b0.iter().filter(|b| **b != 0.0).count();
    let opts = SolverOptions {
        tol: Tolerance::Relative(config.tol),
        max_iter: config.max_iter,
        initial: None,
    };

    let mut outcomes = Vec::with_capacity(cell.lambdas.len());
    let mut bh_solution = None;
    for (method, lambda) in &cell.lambdas {
        let sol = solve_slope_with(&data, lambda, &opts)?;
        if !sol.converged {
            outcomes.push(None);
            continue;
        }
        let m = selection_metrics(b0, &sol.beta, config.zero_tol)?;
        outcomes.push(Some(Outcome {
            fdp: m.fdp,
            tpp: m.tpp,
            selected: m.r,
        }));
        if *method == Method::SlopeBh {
            bh_solution = Some(sol);
        }
    }

    let q_events = match (config.q_event_probe, &cell.probe_lambda) {
        (Some(probe), Some(lambda)) => {
            probe_events(config, &data, k, lambda, bh_solution, &opts, probe)?
        }
        _ => None,
    };
    Ok(Replicate {
        outcomes,
        q_events,
        k,
    })
}

fn probe_events(
    config: &ExperimentConfig,
    data: &Dataset,
    k: usize,
    lambda: &[f64],
    solved: Option<slope_core::SlopeSolution>,
    opts: &SolverOptions,
    probe: QEventProbe,
) -> Result<Option<bool>> {
    let sol = match solved {
        Some(s) => s,
        None => solve_slope_with(data, lambda, opts)?,
    };
    if !sol.converged {
        return Ok(None);
    }
    let p = data.p();
    let k_star = ((probe.k_star_factor * k as f64).round() as usize)
        .clamp(1, p)
        .max(k);
    let report = q_events(data, &sol, k_star, probe.c_q, config.q)?;
    Ok(Some(report.all()))
}

fn mean_and_se(values: &[f64]) -> (f64, Option<f64>) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, None);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    if m < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    (mean, Some((var / m as f64).sqrt()))
}

fn aggregate(
    config: &ExperimentConfig,
    cell: &Cell,
    reps: &[Replicate],
) -> (Vec<ReportRow>, CellSummary) {
    let k = reps.first().map_or(cell.k, |r| r.k);
    let mut rows = Vec::new();
    for (slot, (method, _)) in cell.lambdas.iter().enumerate() {
        let done: Vec<Outcome> = reps.iter().filter_map(|r| r.outcomes[slot]).collect();
        let fdp: Vec<f64> = done.iter().map(|o| o.fdp).collect();
        let tpp: Vec<f64> = done.iter().map(|o| o.tpp).collect();
        let selected: Vec<usize> = done.iter().map(|o| o.selected).collect();
        let (fdr, fdr_se) = mean_and_se(&fdp);
        let (power, power_se) = if k > 0 {
            mean_and_se(&tpp)
        } else {
            (f64::NAN, None)
        };
        let mean_r = selected.iter().sum::<usize>() as f64 / done.len().max(1) as f64;
        rows.push(ReportRow {
            method: *method,
            n: cell.n,
            p: cell.p,
            k,
            alpha: cell.alpha,
            delta: cell.delta,
            fdr,
            fdr_se,
            power: (k > 0 && !done.is_empty()).then_some(power),
            power_se: if k > 0 { power_se } else { None },
            mean_r,
            replicates_done: done.len(),
            excluded: reps.len() - done.len(),
            fdp,
            tpp,
            selected,
        });
    }

    let slot_of = |m: Method| cell.lambdas.iter().position(|(x, _)| *x == m);
    let lasso_not_larger = match (slot_of(Method::Lasso), slot_of(Method::SlopeBh)) {
        (Some(l), Some(s)) => {
            let pairs: Vec<(usize, usize)> = reps
                .iter()
                .filter_map(|r| Some((r.outcomes[l]?.selected, r.outcomes[s]?.selected)))
                .collect();
            let hits = pairs.iter().filter(|(a, b)| a <= b).count();
            (!pairs.is_empty()).then(|| hits as f64 / pairs.len() as f64)
        }
        _ => None,
    };
    let q_event_rate = config.q_event_probe.and_then(|_| {
        let seen: Vec<bool> = reps.iter().filter_map(|r| r.q_events).collect();
        (!seen.is_empty()).then(|| seen.iter().filter(|b| **b).count() as f64 / seen.len() as f64)
    });
    let summary = CellSummary {
        n: cell.n,
        p: cell.p,
        k,
        alpha: cell.alpha,
        delta: cell.delta,
        lasso_not_larger,
        q_event_rate,
    };
    (rows, summary)
}
