//! Minimizing-movement (JKO) scheme for the heat flow,
//! `ρⁿ = argmin (1/2h) W₂(ρ, ρⁿ⁻¹)² + E(ρ)`, in quantile coordinates.
//!
//! With `Q` sampled at `sᵢ = (i+½)/m`, the step minimizes
//! `(1/2h)(1/m) Σ (Qᵢ − Pᵢ)² − (1/m) Σ log(m(Qᵢ₊₁ − Qᵢ))` over increasing `Q`.
//! The objective is strictly convex with a tridiagonal Hessian, so damped
//! Newton with a feasibility-preserving line search converges globally.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GridDensity, GridSpec};
use crate::wasserstein::quantile;

/// Minimal gap between consecutive quantiles.
pub const MONOTONE_MARGIN: f64 = 1e-10;

/// Increasing quantile values at `sᵢ = (i+½)/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileProfile {
    values: Vec<f64>,
}

impl QuantileProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewCells(values.len()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::BadValue { index, value: values[index] });
        }
        if let Some(index) = values.windows(2).position(|w| !(w[1] - w[0] >= MONOTONE_MARGIN)) {
            return Err(Error::MonotonicityViolation { index });
        }
        Ok(Self { values })
    }

    /// Quantiles of a strictly positive density at the midpoint levels.
    pub fn from_density(rho: &GridDensity, m: usize) -> Result<Self> {
        if let Some(index) = rho.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::NotPositive { index, value: rho.values()[index] });
        }
        let values = (0..m).map(|i| quantile(rho, (i as f64 + 0.5) / m as f64)).collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.m() as f64
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.values.iter().map(|q| (q - mu) * (q - mu)).sum::<f64>() / self.m() as f64
    }

    /// `−(1/m) Σ log(m ΔQᵢ)`, the entropy in quantile form.
    pub fn entropy(&self) -> f64 {
        let m = self.m() as f64;
        -self.values.windows(2).map(|w| libm::log(m * (w[1] - w[0]))).sum::<f64>() / m
    }

    /// `((1/m) Σ (Qᵢ − Pᵢ)²)^{1/2}`.
    pub fn w2_to(&self, other: &QuantileProfile) -> Result<f64> {
        if other.m() != self.m() {
            return Err(Error::ShapeMismatch { expected: self.m(), got: other.m() });
        }
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(libm::sqrt(s / self.m() as f64))
    }

    /// Piecewise-linear CDF through `(Qᵢ, sᵢ)`, extended by half a gap on
    /// each side to reach levels 0 and 1.
    pub fn cdf(&self, x: f64) -> f64 {
        let q = &self.values;
        let m = q.len();
        let mf = m as f64;
        let lo = q[0] - 0.5 * (q[1] - q[0]);
        let hi = q[m - 1] + 0.5 * (q[m - 1] - q[m - 2]);
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        if x < q[0] {
            return 0.5 / mf * (x - lo) / (q[0] - lo);
        }
        if x >= q[m - 1] {
            return (mf - 0.5) / mf + 0.5 / mf * (x - q[m - 1]) / (hi - q[m - 1]);
        }
        let k = q.partition_point(|&v| v <= x) - 1;
        ((k as f64 + 0.5) + (x - q[k]) / (q[k + 1] - q[k])) / mf
    }

    /// Cell averages of the density `1/(m ΔQ)` on `grid`, renormalised to
    /// the mass the grid captures.
    pub fn to_density(&self, grid: &GridSpec) -> Result<GridDensity> {
        let dx = grid.dx();
        let values = (0..grid.n_cells).map(|k| (self.cdf(grid.edge(k + 1)) - self.cdf(grid.edge(k))) / dx).collect();
        GridDensity::normalized(*grid, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JkoConfig {
    pub h: f64,
    pub m: usize,
    /// Bound on `max |∂K/∂Qᵢ|` at the accepted iterate.
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl JkoConfig {
    pub fn new(h: f64, m: usize) -> Result<Self> {
        let cfg = Self { h, m, newton_tol: 1e-10, max_newton: 100 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter { name: "h", value: self.h });
        }
        if self.m < 16 {
            return Err(Error::InvalidParameter { name: "m", value: self.m as f64 });
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidParameter { name: "newton_tol", value: self.newton_tol });
        }
        Ok(())
    }
}

/// `K_h(Q; P) = (1/2h) W² + E(Q) − E(P)`; zero at `Q = P`.
pub fn objective(q: &QuantileProfile, prev: &QuantileProfile, h: f64) -> Result<f64> {
    let w = q.w2_to(prev)?;
    Ok(w * w / (2.0 * h) + q.entropy() - prev.entropy())
}

/// `m ∇K`: `(Qᵢ − Pᵢ)/h − 1/ΔQᵢ₋₁ + 1/ΔQᵢ`.
fn scaled_gradient(q: &[f64], p: &[f64], h: f64, out: &mut [f64]) {
    let m = q.len();
    for i in 0..m {
        let mut g = (q[i] - p[i]) / h;
        if i > 0 {
            g -= 1.0 / (q[i] - q[i - 1]);
        }
        if i + 1 < m {
            g += 1.0 / (q[i + 1] - q[i]);
        }
        out[i] = g;
    }
}

/// `m K` without the constant `E(P)`.
fn scaled_objective(q: &[f64], p: &[f64], h: f64) -> f64 {
    let m = q.len() as f64;
    let quad: f64 = q.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (2.0 * h);
    quad - q.windows(2).map(|w| libm::log(m * (w[1] - w[0]))).sum::<f64>()
}

/// Solves the symmetric tridiagonal system `(diag, off) x = rhs` in place.
fn thomas(diag: &mut [f64], off: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
    }
}

/// Outcome of one step, with the Newton diagnostics.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub profile: QuantileProfile,
    pub newton_iterations: usize,
    /// `max |∂K/∂Qᵢ|` at the output.
    pub gradient_norm: f64,
    /// `K_h` at the output; never positive.
    pub objective: f64,
}

pub fn jko_step(prev: &QuantileProfile, cfg: &JkoConfig) -> Result<QuantileProfile> {
    jko_step_detailed(prev, cfg).map(|o| o.profile)
}

pub fn jko_step_detailed(prev: &QuantileProfile, cfg: &JkoConfig) -> Result<StepOutcome> {
    cfg.validate()?;
    let p = prev.values();
    let m = p.len();
    let mf = m as f64;
    let h = cfg.h;
    let mut q = p.to_vec();
    let mut grad = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m - 1];
    let mut dir = vec![0.0; m];
    let mut trial = vec![0.0; m];
    let mut f = scaled_objective(&q, p, h);

    for it in 0..=cfg.max_newton {
        scaled_gradient(&q, p, h, &mut grad);
        let gnorm = grad.iter().fold(0.0f64, |a, g| a.max(g.abs())) / mf;
        if gnorm <= cfg.newton_tol {
            let profile = QuantileProfile::new(q)?;
            let objective = objective(&profile, prev, h)?;
            return Ok(StepOutcome { profile, newton_iterations: it, gradient_norm: gnorm, objective });
        }
        if it == cfg.max_newton {
            return Err(Error::NewtonNotConverged { iterations: it, gradient_norm: gnorm });
        }
        for i in 0..m {
            diag[i] = 1.0 / h;
        }
        for i in 0..m - 1 {
            let c = 1.0 / ((q[i + 1] - q[i]) * (q[i + 1] - q[i]));
            diag[i] += c;
            diag[i + 1] += c;
            off[i] = -c;
        }
        for i in 0..m {
            dir[i] = -grad[i];
        }
        thomas(&mut diag, &off, &mut dir);
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..m {
                trial[i] = q[i] + t * dir[i];
            }
            let feasible = trial.windows(2).all(|w| w[1] - w[0] >= MONOTONE_MARGIN);
            if feasible {
                let ft = scaled_objective(&trial, p, h);
                if ft <= f + 1e-4 * t * slope || (ft - f).abs() <= 1e-15 * f.abs().max(1.0) {
                    core::mem::swap(&mut q, &mut trial);
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            let index = trial.windows(2).position(|w| w[1] - w[0] < MONOTONE_MARGIN).unwrap_or(0);
            return Err(Error::MonotonicityViolation { index });
        }
    }
    unreachable!()
}

/// Per-step diagnostics of [`jko_flow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JkoRecord {
    pub step: usize,
    pub t: f64,
    pub variance: f64,
    pub entropy: f64,
    /// `W₂(ρⁿ, ρⁿ⁻¹)` in quantile form.
    pub w2_step: f64,
    /// `W₂²/2h + E(ρⁿ) − E(ρⁿ⁻¹)`, nonpositive for a true minimizer.
    pub dissipation: f64,
}

impl JkoRecord {
    pub fn dissipation_holds(&self) -> bool {
        self.dissipation <= 0.0
    }
}

#[derive(Debug, Clone)]
pub struct JkoFlow {
    pub grid: GridSpec,
    /// `ρ⁰, ρ¹, …, ρ^steps` on `grid`.
    pub densities: Vec<GridDensity>,
    pub profiles: Vec<QuantileProfile>,
    /// One record per state, starting with the initial one (step 0).
    pub records: Vec<JkoRecord>,
}

/// Number of standard deviations of heat spreading added on each side of
/// the input grid for the output densities.
pub const FLOW_PADDING_SIGMAS: f64 = 6.0;

/// Output grid of [`jko_flow`]: the input grid padded by `6 √(2 T)`.
pub fn flow_grid(rho0: &GridDensity, cfg: &JkoConfig, steps: usize) -> GridSpec {
    let spread = FLOW_PADDING_SIGMAS * libm::sqrt(2.0 * cfg.h * steps as f64);
    let cells = libm::ceil(spread / rho0.dx()) as usize;
    rho0.grid().padded(cells)
}

pub fn jko_flow(rho0: &GridDensity, cfg: &JkoConfig, steps: usize) -> Result<JkoFlow> {
    cfg.validate()?;
    if steps == 0 {
        return Err(Error::InvalidParameter { name: "steps", value: 0.0 });
    }
    let grid = flow_grid(rho0, cfg, steps);
    let mut prev = QuantileProfile::from_density(rho0, cfg.m)?;
    let mut densities = vec![rho0.clone()];
    let mut records =
        vec![JkoRecord { step: 0, t: 0.0, variance: prev.variance(), entropy: prev.entropy(), w2_step: 0.0, dissipation: 0.0 }];
    let mut profiles = vec![prev.clone()];
    for step in 1..=steps {
        let out = jko_step_detailed(&prev, cfg)?;
        let next = out.profile;
        let w2 = next.w2_to(&prev)?;
        records.push(JkoRecord {
            step,
            t: step as f64 * cfg.h,
            variance: next.variance(),
            entropy: next.entropy(),
            w2_step: w2,
            dissipation: out.objective,
        });
        densities.push(next.to_density(&grid)?);
        profiles.push(next.clone());
        prev = next;
    }
    Ok(JkoFlow { grid, densities, profiles, records })
}

/// Cell averages of the centred Gaussian `N(μ, σ²)` on `grid`.
pub fn gaussian_cells(grid: &GridSpec, mu: f64, var: f64) -> Vec<f64> {
    let s = libm::sqrt(2.0 * var);
    let cdf = |x: f64| 0.5 * libm::erfc(-(x - mu) / s);
    (0..grid.n_cells).map(|k| (cdf(grid.edge(k + 1)) - cdf(grid.edge(k))) / grid.dx()).collect()
}
