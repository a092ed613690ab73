//! The Gaussian-weighted pair measure built from Kantorovich potentials,
//!
//! `q̃(x, y) = √ρ₀(x) √ρ₁(y) exp[(2/ε²)(xy − φ(x) − φ*(y))] / (ε√π Z_ε)`,
//!
//! its correction factor `χ_ε = ρ₀ / π₀q̃` and the recovery coupling
//! `q^ε = χ_ε q̃` whose first marginal is exactly `ρ₀`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{marginal_sums, GridDensity, GridSpec, PairDensity};
use crate::heat::KernelParams;
use crate::quadrature::GaussLegendre;
use crate::wasserstein::TransportPotentials;

/// Width of the boundary layer, in units of ε, excluded from interior checks.
pub const BOUNDARY_LAYER: f64 = 3.0;
/// Default bound `C` in `1/C ≤ χ ≤ C`.
pub const DEFAULT_CHI_BOUND: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct TildeQBundle {
    /// `q̃` normalised by `Z_ε`.
    pub q_tilde: PairDensity,
    pub z_epsilon: f64,
    /// `χ_ε` at the x-cells.
    pub chi: Vec<f64>,
    pub q_recovery: PairDensity,
    pub epsilon: f64,
}

impl TildeQBundle {
    pub fn grid(&self) -> &GridSpec {
        self.q_tilde.grid()
    }

    /// Whether `1/C ≤ χ ≤ C` on the cells at distance at least `3ε` from
    /// the boundary.
    pub fn chi_within(&self, c: f64) -> bool {
        let (lo, hi) = interior_range(self.grid(), self.epsilon, &self.chi);
        lo >= 1.0 / c && hi <= c
    }
}

fn interior(grid: &GridSpec, epsilon: f64, i: usize) -> bool {
    let x = grid.center(i);
    let layer = BOUNDARY_LAYER * epsilon;
    x >= grid.origin + layer && x <= grid.end() - layer
}

fn interior_range(grid: &GridSpec, epsilon: f64, v: &[f64]) -> (f64, f64) {
    range(v.iter().enumerate().filter(|(i, _)| interior(grid, epsilon, *i)).map(|(_, &x)| x))
}

fn boundary_range(grid: &GridSpec, epsilon: f64, v: &[f64]) -> (f64, f64) {
    range(v.iter().enumerate().filter(|(i, _)| !interior(grid, epsilon, *i)).map(|(_, &x)| x))
}

fn range(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn check_inputs(rho0: &GridDensity, rho1: &GridDensity, p: &KernelParams) -> Result<GridSpec> {
    let grid = *rho0.grid();
    if grid.aligned_offset(rho1.grid()) != Some(0) || grid.n_cells != rho1.n_cells() {
        return Err(Error::GridMismatch);
    }
    for rho in [rho0, rho1] {
        if let Some(index) = rho.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::NotPositive { index, value: rho.values()[index] });
        }
    }
    let min = crate::bridge::MIN_EPSILON_CELLS * grid.dx();
    if p.epsilon() < min {
        return Err(Error::EpsilonTooSmall { epsilon: p.epsilon(), min, min_ratio: crate::bridge::MIN_EPSILON_CELLS });
    }
    Ok(grid)
}

/// Cell-centre construction of `q̃`, `Z_ε` (midpoint rule on the same grid),
/// `χ_ε` and `q^ε`.
pub fn build_tilde_q(rho0: &GridDensity, rho1: &GridDensity, pot: &TransportPotentials, p: &KernelParams) -> Result<TildeQBundle> {
    let grid = check_inputs(rho0, rho1, p)?;
    let n = grid.n_cells;
    let dx = grid.dx();
    let e = p.epsilon();
    let scale = 2.0 / (e * e);
    let prefactor = 1.0 / (e * libm::sqrt(PI));
    let centers = grid.centers();
    let phi: Vec<f64> = centers.iter().map(|&x| pot.phi(x)).collect();
    let phi_star: Vec<f64> = centers.iter().map(|&y| pot.phi_star(y)).collect();
    let s0: Vec<f64> = rho0.values().iter().map(|&v| libm::sqrt(v)).collect();
    let s1: Vec<f64> = rho1.values().iter().map(|&v| libm::sqrt(v)).collect();

    let mut raw = Vec::with_capacity(n * n);
    for i in 0..n {
        let x = centers[i];
        for j in 0..n {
            let ex = scale * (x * centers[j] - phi[i] - phi_star[j]);
            raw.push(prefactor * s0[i] * s1[j] * libm::exp(ex));
        }
    }
    let z_epsilon = raw.iter().sum::<f64>() * dx * dx;
    if !(z_epsilon > 0.0) {
        return Err(Error::VanishingMarginal { index: 0 });
    }
    raw.iter_mut().for_each(|v| *v /= z_epsilon);
    let (pi0, _) = marginal_sums(&raw, n, dx);
    if let Some(index) = pi0.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::VanishingMarginal { index });
    }
    let chi: Vec<f64> = pi0.iter().zip(rho0.values()).map(|(m, r)| r / m).collect();
    let mut rec = raw.clone();
    for (i, row) in rec.chunks_mut(n).enumerate() {
        row.iter_mut().for_each(|v| *v *= chi[i]);
    }
    Ok(TildeQBundle {
        q_tilde: PairDensity::from_trusted(grid, raw),
        z_epsilon,
        chi,
        q_recovery: PairDensity::from_trusted(grid, rec),
        epsilon: e,
    })
}

/// Ratio of `(1/ε) ∫ √ρ₁(y) exp[(2/ε²)(xy − φ(x) − φ*(y))] dy` to its
/// small-ε limit `√π √ρ₀(x)`. The y-integral uses Gauss–Legendre panels of
/// width at most `ε/8` aligned with the cells of ρ₁.
pub fn watson_pointwise(rho0: &GridDensity, rho1: &GridDensity, pot: &TransportPotentials, p: &KernelParams, x: f64) -> Result<f64> {
    let gx = rho0.grid();
    if x < gx.origin || x > gx.end() {
        return Err(Error::OutOfRange(x));
    }
    let e = p.epsilon();
    let scale = 2.0 / (e * e);
    let gy = rho1.grid();
    let sub = libm::ceil(gy.dx() / (e / 8.0)).max(1.0) as usize;
    let gl = GaussLegendre::new(8);
    let phi_x = pot.phi(x);
    let mut acc = 0.0;
    for j in 0..gy.n_cells {
        let sr = libm::sqrt(rho1.values()[j]);
        acc += sr * gl.integrate(gy.edge(j), gy.edge(j + 1), sub, |y| libm::exp(scale * (x * y - phi_x - pot.phi_star(y))));
    }
    let inner = acc / e;
    Ok(inner / (libm::sqrt(PI) * libm::sqrt(rho0.value_at(x))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalReport {
    pub epsilon: f64,
    pub z_epsilon: f64,
    /// `‖π₀q̃ − ρ₀‖_{L¹}`.
    pub l1_pi0: f64,
    /// `‖π₁q^ε − ρ₁‖_{L¹}`.
    pub l1_pi1: f64,
    /// Interior extremes (cells at distance ≥ 3ε from the boundary).
    pub pi0_range: (f64, f64),
    pub pi1_range: (f64, f64),
    pub chi_range: (f64, f64),
    /// Extremes of χ inside the boundary layer.
    pub chi_boundary_range: (f64, f64),
}

pub fn marginal_convergence_report(bundle: &TildeQBundle, rho0: &GridDensity, rho1: &GridDensity) -> Result<MarginalReport> {
    let grid = *bundle.grid();
    if grid.aligned_offset(rho0.grid()) != Some(0) || grid.aligned_offset(rho1.grid()) != Some(0) {
        return Err(Error::GridMismatch);
    }
    let n = grid.n_cells;
    let dx = grid.dx();
    let (pi0, pi1) = marginal_sums(bundle.q_tilde.values(), n, dx);
    let (_, rec1) = marginal_sums(bundle.q_recovery.values(), n, dx);
    let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * dx;
    let e = bundle.epsilon;
    Ok(MarginalReport {
        epsilon: e,
        z_epsilon: bundle.z_epsilon,
        l1_pi0: l1(&pi0, rho0.values()),
        l1_pi1: l1(&rec1, rho1.values()),
        pi0_range: interior_range(&grid, e, &pi0),
        pi1_range: interior_range(&grid, e, &pi1),
        chi_range: interior_range(&grid, e, &bundle.chi),
        chi_boundary_range: boundary_range(&grid, e, &bundle.chi),
    })
}

/// `max_{x,y} [xy − φ(x) − φ*(y) + (y − T(x))²/6]` over cell centres;
/// nonpositive when the exponent of `q̃` has the quadratic decay away from
/// the graph of the transport map.
pub fn exponent_bound_margin(pot: &TransportPotentials, grid: &GridSpec) -> f64 {
    let centers = grid.centers();
    let phi: Vec<f64> = centers.iter().map(|&x| pot.phi(x)).collect();
    let phi_star: Vec<f64> = centers.iter().map(|&y| pot.phi_star(y)).collect();
    let t: Vec<f64> = centers.iter().map(|&x| pot.map(x)).collect();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..centers.len() {
        for j in 0..centers.len() {
            let d = centers[j] - t[i];
            let v = centers[i] * centers[j] - phi[i] - phi_star[j] + d * d / 6.0;
            worst = worst.max(v);
        }
    }
    worst
}

/// `Z_ε` for uniform marginals on `[0, 1]`:
/// `erf(1/ε) − ε(1 − e^{−1/ε²})/√π`.
pub fn z_uniform_closed_form(epsilon: f64) -> f64 {
    libm::erf(1.0 / epsilon) - epsilon * (1.0 - libm::exp(-1.0 / (epsilon * epsilon))) / libm::sqrt(PI)
}
