//! Numerics for comparing the large-deviations rate functional of independent
//! Brownian particles with one step of the entropy–Wasserstein (JKO) scheme.
//!
//! Everything here is pure computation over heap-allocated grids; there is no
//! IO and no dependency on `std`. The `bridgelab` crate carries file formats,
//! configuration and the command-line driver.
//!
//! Module map:
//!
//! - [`grid`]: piecewise-constant densities on `[a, a+L]` and on its square,
//!   entropies, relative entropy, Lévy distance, the `A_δ` window.
//! - [`heat`]: Gaussian transition kernel, heat evolution with zero extension,
//!   reference coupling `q₀ = ρ₀ ⊗ p_ε`.
//! - [`wasserstein`]: exact 1D quadratic transport through quantile functions,
//!   Kantorovich potentials, coupling cost and duality gap.
//! - [`bridge`]: the static Schrödinger bridge `J_ε(ρ₁; ρ₀)` solved by
//!   log-domain alternating scaling, and `F_ε = J_ε − W₂²/ε²`.
//! - [`tildeq`]: the explicit Gaussian-weighted pair measure built from the
//!   potentials, its normalisation `Z_ε`, correction factor `χ_ε` and
//!   recovery coupling.
//! - [`seminorm`]: torus Fourier seminorm, ramp-kernel convolution and the
//!   inequalities used to bound `Z_ε` from above.
//! - [`jko`]: the minimizing-movement scheme for the heat flow in quantile
//!   coordinates.
//! - [`particles`]: Monte Carlo Brownian particles and empirical measures.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bridge;
pub mod error;
pub mod grid;
pub mod heat;
pub mod jko;
pub mod particles;
pub mod quadrature;
pub mod seminorm;
pub mod tildeq;
pub mod wasserstein;

pub use error::{Error, Result};
pub use grid::{ADeltaSpec, GridDensity, GridSpec, PairDensity};
pub use heat::KernelParams;
