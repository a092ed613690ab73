//! The static Schrödinger bridge
//! `J_ε(ρ₁; ρ₀) = min { H(q | q₀) : q ∈ Γ(ρ₀, ρ₁) }`, `q₀ = ρ₀ ⊗ p_ε`,
//! solved by alternating marginal scaling in the log domain, and the
//! functional `F_ε = J_ε − W₂²/ε²`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{entropy, in_a_delta, pair_entropy, relative_entropy, ADeltaSpec, GridDensity, GridSpec, PairDensity};
use crate::heat::KernelParams;
use crate::tildeq::build_tilde_q;
use crate::wasserstein::{coupling_cost, potentials, w2_squared};

/// Smallest admissible `ε / Δx`.
pub const MIN_EPSILON_CELLS: f64 = 4.0;
/// Default `δ` of the `A_δ` window.
pub const DEFAULT_DELTA: f64 = 0.2;
/// Largest `δ` accepted by [`gamma_functional`].
pub const MAX_DELTA: f64 = 1.0 / 3.0;
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Guard on `|f|, |g|`; `exp` overflows near 709.
pub const DEFAULT_POTENTIAL_BOUND: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeOptions {
    /// Stop when the L1 defect of both marginals is at most this.
    pub tol: f64,
    pub max_iter: usize,
    pub potential_bound: f64,
}

impl BridgeOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self { tol, max_iter, potential_bound: DEFAULT_POTENTIAL_BOUND }
    }
}

impl Default for BridgeOptions {
    fn default() -> Self {
        Self::new(1e-10, DEFAULT_MAX_ITER)
    }
}

/// Optimal coupling `q(x, y) = e^{f(x)} p_ε(x, y) e^{g(y)}`.
#[derive(Debug, Clone)]
pub struct BridgeSolution {
    pub q: PairDensity,
    /// `H(q | q₀)`.
    pub j_value: f64,
    /// Larger of the two marginal L1 defects.
    pub marginal_error: f64,
    pub iterations: usize,
    /// Log-scaling on the x-grid.
    pub f: Vec<f64>,
    /// Log-scaling on the y-grid.
    pub g: Vec<f64>,
    pub epsilon: f64,
}

impl BridgeSolution {
    /// Largest cellwise relative deviation of `q` from `e^f p_ε e^g`.
    pub fn factorization_defect(&self, p: &KernelParams) -> f64 {
        let grid = self.q.grid();
        let n = grid.n_cells;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = grid.center(j) - grid.center(i);
                let model = libm::exp(self.f[i] + p.log_kernel(d) + self.g[j]);
                let v = self.q.get(i, j);
                worst = worst.max((v - model).abs() / model);
            }
        }
        worst
    }
}

fn check_pair(rho0: &GridDensity, rho1: &GridDensity, p: &KernelParams) -> Result<GridSpec> {
    let grid = *rho0.grid();
    if grid.aligned_offset(rho1.grid()) != Some(0) || grid.n_cells != rho1.n_cells() {
        return Err(Error::GridMismatch);
    }
    for rho in [rho0, rho1] {
        if let Some(index) = rho.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::NotPositive { index, value: rho.values()[index] });
        }
    }
    let min = MIN_EPSILON_CELLS * grid.dx();
    if p.epsilon() < min {
        return Err(Error::EpsilonTooSmall { epsilon: p.epsilon(), min, min_ratio: MIN_EPSILON_CELLS });
    }
    Ok(grid)
}

/// `log Σ_j exp(a_j)`, stable.
fn log_sum_exp(mut terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let s: f64 = terms.by_ref().map(|t| libm::exp(t - m)).sum();
    m + libm::log(s)
}

pub fn solve_bridge(rho0: &GridDensity, rho1: &GridDensity, p: &KernelParams, tol: f64, max_iter: usize) -> Result<BridgeSolution> {
    solve_bridge_with(rho0, rho1, p, &BridgeOptions::new(tol, max_iter))
}

pub fn solve_bridge_with(rho0: &GridDensity, rho1: &GridDensity, p: &KernelParams, opts: &BridgeOptions) -> Result<BridgeSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter { name: "tol", value: opts.tol });
    }
    let grid = check_pair(rho0, rho1, p)?;
    let n = grid.n_cells;
    let dx = grid.dx();
    let log_dx = libm::log(dx);

    // log p_ε depends on |i − j| only
    let table: Vec<f64> = (0..n).map(|k| p.log_kernel(k as f64 * dx)).collect();
    let log_r0: Vec<f64> = rho0.values().iter().map(|&v| libm::log(v)).collect();
    let log_r1: Vec<f64> = rho1.values().iter().map(|&v| libm::log(v)).collect();

    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut lse = vec![0.0; n];
    let mut iterations = 0;
    let mut defect = f64::INFINITY;

    loop {
        for i in 0..n {
            lse[i] = log_sum_exp((0..n).map(|j| table[i.abs_diff(j)] + g[j]));
        }
        if iterations > 0 {
            defect = (0..n)
                .map(|i| (libm::exp(f[i] + lse[i] + log_dx) - rho0.values()[i]).abs())
                .sum::<f64>()
                * dx;
            if defect <= opts.tol {
                break;
            }
        }
        if iterations == opts.max_iter {
            return Err(Error::NotConverged { iterations, marginal_error: defect });
        }
        for i in 0..n {
            f[i] = log_r0[i] - log_dx - lse[i];
        }
        for j in 0..n {
            g[j] = log_r1[j] - log_dx - log_sum_exp((0..n).map(|i| table[i.abs_diff(j)] + f[i]));
        }
        let worst = f.iter().chain(&g).fold(0.0f64, |m, v| m.max(v.abs()));
        if !(worst <= opts.potential_bound) {
            return Err(Error::PotentialOverflow { value: worst, bound: opts.potential_bound });
        }
        iterations += 1;
    }

    let mut values = Vec::with_capacity(n * n);
    let mut j_value = 0.0;
    for i in 0..n {
        for j in 0..n {
            let lq = f[i] + table[i.abs_diff(j)] + g[j];
            let v = libm::exp(lq);
            j_value += v * (f[i] + g[j] - log_r0[i]);
            values.push(v);
        }
    }
    j_value *= dx * dx;

    let (row, col) = crate::grid::marginal_sums(&values, n, dx);
    let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * dx;
    let marginal_error = l1(&row, rho0.values()).max(l1(&col, rho1.values()));
    let q = PairDensity::new(grid, values)?;

    Ok(BridgeSolution { q, j_value, marginal_error, iterations, f, g, epsilon: p.epsilon() })
}

/// `J` recomputed as `E(q) − E(ρ₀) + ½ log(ε²π) + d(q)²/ε²`.
pub fn rate_functional(sol: &BridgeSolution, rho0: &GridDensity, p: &KernelParams) -> f64 {
    let e2 = p.epsilon() * p.epsilon();
    pair_entropy(&sol.q) - entropy(rho0) + 0.5 * libm::log(e2 * core::f64::consts::PI) + coupling_cost(&sol.q) / e2
}

/// Value of `F_ε` together with its ingredients.
#[derive(Debug, Clone)]
pub struct GammaValue {
    pub epsilon: f64,
    pub f_eps: f64,
    pub j_value: f64,
    pub w2_sq: f64,
    /// `½E(ρ₁) − ½E(ρ₀)`.
    pub target: f64,
    pub solution: BridgeSolution,
}

impl GammaValue {
    pub fn abs_gap(&self) -> f64 {
        (self.f_eps - self.target).abs()
    }
}

fn check_window(rho0: &GridDensity, rho1: &GridDensity, window: &ADeltaSpec) -> Result<()> {
    if window.delta > MAX_DELTA {
        return Err(Error::InvalidParameter { name: "delta", value: window.delta });
    }
    for rho in [rho0, rho1] {
        if !in_a_delta(rho, window) {
            return Err(Error::NotInADelta { sup: window.sup_deviation(rho), delta: window.delta });
        }
    }
    Ok(())
}

/// `F_ε(ρ₁; ρ₀) = J_ε(ρ₁; ρ₀) − W₂(ρ₀, ρ₁)²/ε²` for densities in `A_δ`.
pub fn gamma_functional(rho0: &GridDensity, rho1: &GridDensity, p: &KernelParams, tol: f64, window: &ADeltaSpec) -> Result<GammaValue> {
    check_window(rho0, rho1, window)?;
    let solution = solve_bridge(rho0, rho1, p, tol, DEFAULT_MAX_ITER)?;
    let w2_sq = w2_squared(rho0, rho1);
    let e2 = p.epsilon() * p.epsilon();
    Ok(GammaValue {
        epsilon: p.epsilon(),
        f_eps: solution.j_value - w2_sq / e2,
        j_value: solution.j_value,
        w2_sq,
        target: 0.5 * entropy(rho1) - 0.5 * entropy(rho0),
        solution,
    })
}

/// Tolerance of [`LowerBoundReport::pass`].
pub const LOWER_BOUND_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundReport {
    pub epsilon: f64,
    /// `H(q^ε | q̃^ε)` by direct summation.
    pub relative_entropy: f64,
    /// `J_ε − W₂²/ε² − ½E(ρ₁) + ½E(ρ₀) + log Z_ε`.
    pub chain_value: f64,
    pub z_epsilon: f64,
    /// `|relative_entropy − chain_value|`.
    pub identity_error: f64,
    pub pass: bool,
}

/// Checks `F_ε ≥ ½E(ρ₁) − ½E(ρ₀) − log Z_ε` through the identity
/// `H(q^ε | q̃^ε) = F_ε − ½E(ρ₁) + ½E(ρ₀) + log Z_ε` with `q^ε` the optimal
/// coupling.
pub fn lower_bound_check(rho0: &GridDensity, rho1: &GridDensity, p: &KernelParams, tol: f64) -> Result<LowerBoundReport> {
    let window = ADeltaSpec::new(MAX_DELTA, rho0.grid().length)?;
    let gv = gamma_functional(rho0, rho1, p, tol, &window)?;
    let pot = potentials(rho0, rho1)?;
    let bundle = build_tilde_q(rho0, rho1, &pot, p)?;
    let lhs = relative_entropy(&gv.solution.q, &bundle.q_tilde)?;
    let chain_value = gv.f_eps - gv.target + libm::log(bundle.z_epsilon);
    let identity_error = (lhs - chain_value).abs();
    Ok(LowerBoundReport {
        epsilon: p.epsilon(),
        relative_entropy: lhs,
        chain_value,
        z_epsilon: bundle.z_epsilon,
        identity_error,
        pass: chain_value >= -LOWER_BOUND_TOL && identity_error <= LOWER_BOUND_TOL,
    })
}
