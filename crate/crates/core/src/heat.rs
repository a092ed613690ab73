//! Gaussian transition kernel `p_ε(x, y) = exp(−(y−x)²/ε²) / (ε√π)` with
//! `ε² = 4h`, i.e. Brownian motion with generator `Δ` run for time `h`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{GridDensity, GridSpec, PairDensity};

/// Padding of the evolved grid, in units of ε.
pub const EVOLVE_PADDING: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    epsilon: f64,
}

impl KernelParams {
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter { name: "epsilon", value: epsilon });
        }
        Ok(Self { epsilon })
    }

    /// `ε = √(4h)`.
    pub fn from_h(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter { name: "h", value: h });
        }
        Ok(Self { epsilon: libm::sqrt(4.0 * h) })
    }

    #[inline]
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.epsilon * self.epsilon / 4.0
    }

    /// `log p_ε` as a function of the displacement `y − x`.
    #[inline]
    pub fn log_kernel(&self, displacement: f64) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        -0.5 * libm::log(PI * e2) - displacement * displacement / e2
    }
}

pub fn kernel_value(x: f64, y: f64, p: &KernelParams) -> f64 {
    let e = p.epsilon;
    let d = y - x;
    libm::exp(-d * d / (e * e)) / (e * libm::sqrt(PI))
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    /// Evolved density on the input grid padded by `⌈4ε/Δx⌉` cells per side,
    /// renormalised to unit mass.
    pub density: GridDensity,
    /// Mass of the evolved density that lies outside the original grid.
    pub escaped_mass: f64,
    /// Mass that fell beyond the padded grid before renormalisation.
    pub truncated_mass: f64,
}

/// Number of padding cells used by [`evolve`].
pub fn padding_cells(grid: &GridSpec, p: &KernelParams) -> usize {
    libm::ceil(EVOLVE_PADDING * p.epsilon / grid.dx()) as usize
}

/// Discrete heat evolution of the zero-extended density: the kernel is sampled
/// at cell centres, exactly as in [`reference_coupling`].
pub fn evolve(rho0: &GridDensity, p: &KernelParams) -> Evolution {
    let grid = *rho0.grid();
    let pad = padding_cells(&grid, p);
    let out_grid = grid.padded(pad);
    let n = grid.n_cells;
    let m = out_grid.n_cells;
    let dx = grid.dx();

    // kernel depends only on the displacement (j − pad − i)·Δx; index j − i + n
    let table: Vec<f64> = (0..m + n)
        .map(|k| {
            let d = (k as f64 - (n + pad) as f64) * dx;
            libm::exp(p.log_kernel(d))
        })
        .collect();

    let mut out = alloc::vec![0.0; m];
    for (i, &r) in rho0.values().iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        let w = r * dx;
        let base = n - i;
        for (j, o) in out.iter_mut().enumerate() {
            *o += w * table[base + j];
        }
    }

    let mass: f64 = out.iter().sum::<f64>() * dx;
    let inside: f64 = out[pad..pad + n].iter().sum::<f64>() * dx;
    let truncated_mass = (1.0 - mass).max(0.0);
    out.iter_mut().for_each(|v| *v /= mass);
    Evolution {
        density: GridDensity::normalized(out_grid, out).expect("heat evolution keeps positive mass"),
        escaped_mass: 1.0 - inside / mass,
        truncated_mass,
    }
}

/// `q₀(x, y) = ρ₀(x) p_ε(x, y)` on the square of ρ₀'s grid, not renormalised.
#[derive(Debug, Clone)]
pub struct ReferenceCoupling {
    grid: GridSpec,
    values: Vec<f64>,
    mass: f64,
}

impl ReferenceCoupling {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Total mass, `1 −` boundary leakage.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn renormalized(&self) -> PairDensity {
        let values = self.values.iter().map(|v| v / self.mass).collect();
        PairDensity::from_trusted(self.grid, values)
    }
}

pub fn reference_coupling(rho0: &GridDensity, p: &KernelParams) -> ReferenceCoupling {
    let grid = *rho0.grid();
    let n = grid.n_cells;
    let dx = grid.dx();
    let table: Vec<f64> = (0..2 * n - 1)
        .map(|k| libm::exp(p.log_kernel((k as f64 - (n - 1) as f64) * dx)))
        .collect();
    let mut values = Vec::with_capacity(n * n);
    for (i, &r) in rho0.values().iter().enumerate() {
        values.extend((0..n).map(|j| r * table[j + n - 1 - i]));
    }
    let mass = values.iter().sum::<f64>() * dx * dx;
    ReferenceCoupling { grid, values, mass }
}
