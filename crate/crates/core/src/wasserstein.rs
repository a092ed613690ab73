//! Quadratic optimal transport on the line.
//!
//! For piecewise-constant densities the CDFs are piecewise linear, hence so are
//! the quantile functions and the monotone map `T = Q₁ ∘ F₀`. All quantities
//! below are integrated exactly over the merged breakpoints of the two
//! quantile functions, so `W₂` carries no quadrature error and the potentials
//! satisfy the Fenchel equality on the graph of `T` up to rounding.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GridDensity, GridSpec, PairDensity};

/// One linear piece of a quantile function: levels `[s0, s1]` map linearly
/// onto the cell `[x0, x0 + dx]`.
#[derive(Debug, Clone, Copy)]
struct QuantilePiece {
    s0: f64,
    s1: f64,
    x0: f64,
    dx: f64,
}

impl QuantilePiece {
    #[inline]
    fn eval(&self, s: f64) -> f64 {
        self.x0 + (s - self.s0) / (self.s1 - self.s0) * self.dx
    }
}

fn quantile_pieces(rho: &GridDensity) -> Vec<QuantilePiece> {
    let cdf = rho.cdf_edges();
    let g = rho.grid();
    let dx = g.dx();
    (0..g.n_cells)
        .filter(|&k| cdf[k + 1] > cdf[k])
        .map(|k| QuantilePiece { s0: cdf[k], s1: cdf[k + 1], x0: g.edge(k), dx })
        .collect()
}

/// The unique `x` with `F(x) = s`, from the piecewise-linear CDF.
///
/// Fails when the level `s` is attained on an interval of positive length
/// (a zero plateau of the density at that level).
pub fn quantile(rho: &GridDensity, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter { name: "s", value: s });
    }
    let cdf = rho.cdf_edges();
    let g = rho.grid();
    let n = g.n_cells;
    let k = cdf[1..].partition_point(|&c| c < s).min(n - 1);
    if cdf[k + 1] == cdf[k] {
        return Err(Error::UndefinedQuantile { level: s });
    }
    if s == cdf[k + 1] && k + 1 < n && cdf[k + 2] == cdf[k + 1] {
        return Err(Error::UndefinedQuantile { level: s });
    }
    let w = (s - cdf[k]) / (cdf[k + 1] - cdf[k]);
    Ok(g.edge(k) + w * g.dx())
}

/// Merged breakpoints of two quantile functions, as `(s, Q₀(s), Q₁(s))` per
/// linear segment end: each element is `(s_a, s_b, q0_a, q0_b, q1_a, q1_b)`.
fn merged_segments(rho0: &GridDensity, rho1: &GridDensity) -> Vec<[f64; 6]> {
    let p0 = quantile_pieces(rho0);
    let p1 = quantile_pieces(rho1);
    let mut out = Vec::with_capacity(p0.len() + p1.len());
    let (mut i, mut j) = (0, 0);
    let mut s = 0.0;
    while i < p0.len() && j < p1.len() {
        let (a, b) = (p0[i], p1[j]);
        let next = a.s1.min(b.s1);
        if next > s {
            out.push([s, next, a.eval(s), a.eval(next), b.eval(s), b.eval(next)]);
        }
        s = next;
        if a.s1 <= next {
            i += 1;
        }
        if b.s1 <= next {
            j += 1;
        }
    }
    out
}

/// Squared quadratic Wasserstein distance `∫₀¹ (Q₀ − Q₁)² ds`, integrated
/// exactly (the integrand is a quadratic on each merged segment).
pub fn w2_squared(rho0: &GridDensity, rho1: &GridDensity) -> f64 {
    merged_segments(rho0, rho1)
        .iter()
        .map(|&[sa, sb, a0, b0, a1, b1]| {
            let (da, db) = (a0 - a1, b0 - b1);
            (sb - sa) * (da * da + da * db + db * db) / 3.0
        })
        .sum()
}

pub fn w2_distance(rho0: &GridDensity, rho1: &GridDensity) -> f64 {
    libm::sqrt(w2_squared(rho0, rho1).max(0.0))
}

fn require_positive(rho: &GridDensity) -> Result<()> {
    match rho.values().iter().position(|&v| v <= 0.0) {
        Some(index) => Err(Error::NotPositive { index, value: rho.values()[index] }),
        None => Ok(()),
    }
}

/// Kantorovich potentials of a 1D transport problem.
///
/// `φ` is convex with `φ' = T` the monotone rearrangement, `φ*` its Legendre
/// conjugate with `(φ*)' = T⁻¹`. Both are stored exactly at the knots of the
/// piecewise-linear map and extended affinely outside the supports. `φ` is
/// anchored by `φ(x_min) = 0`.
#[derive(Debug, Clone)]
pub struct TransportPotentials {
    x_grid: GridSpec,
    y_grid: GridSpec,
    xs: Vec<f64>,
    ys: Vec<f64>,
    phi: Vec<f64>,
    phi_star: Vec<f64>,
}

/// Locate the knot interval of `t` in the increasing array `knots`.
fn bracket(knots: &[f64], t: f64) -> usize {
    let k = knots.partition_point(|&v| v <= t);
    k.clamp(1, knots.len() - 1) - 1
}

impl TransportPotentials {
    pub fn x_grid(&self) -> &GridSpec {
        &self.x_grid
    }

    pub fn y_grid(&self) -> &GridSpec {
        &self.y_grid
    }

    /// Knots of the map, `(x_k, T(x_k))`.
    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// `T(x) = φ'(x)`.
    pub fn map(&self, x: f64) -> f64 {
        interp(&self.xs, &self.ys, x)
    }

    /// `T⁻¹(y) = (φ*)'(y)`.
    pub fn inverse_map(&self, y: f64) -> f64 {
        interp(&self.ys, &self.xs, y)
    }

    pub fn phi(&self, x: f64) -> f64 {
        primitive(&self.xs, &self.ys, &self.phi, x)
    }

    pub fn phi_star(&self, y: f64) -> f64 {
        primitive(&self.ys, &self.xs, &self.phi_star, y)
    }

    /// `φ''(x)`, the slope of the linear piece of `T` containing `x`.
    pub fn phi_second(&self, x: f64) -> f64 {
        let k = bracket(&self.xs, x);
        (self.ys[k + 1] - self.ys[k]) / (self.xs[k + 1] - self.xs[k])
    }

    pub fn phi_star_second(&self, y: f64) -> f64 {
        let k = bracket(&self.ys, y);
        (self.xs[k + 1] - self.xs[k]) / (self.ys[k + 1] - self.ys[k])
    }

    /// `φ` at the centres of the x-grid.
    pub fn phi_on_grid(&self) -> Vec<f64> {
        (0..self.x_grid.n_cells).map(|i| self.phi(self.x_grid.center(i))).collect()
    }

    /// `T` at the centres of the x-grid.
    pub fn map_on_grid(&self) -> Vec<f64> {
        (0..self.x_grid.n_cells).map(|i| self.map(self.x_grid.center(i))).collect()
    }

    /// `φ*` at the centres of the y-grid.
    pub fn phi_star_on_grid(&self) -> Vec<f64> {
        (0..self.y_grid.n_cells).map(|j| self.phi_star(self.y_grid.center(j))).collect()
    }
}

fn interp(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let n = xs.len();
    if t <= xs[0] {
        return ys[0];
    }
    if t >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = bracket(xs, t);
    let w = (t - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + w * (ys[k + 1] - ys[k])
}

/// Exact primitive of the piecewise-linear `slope` through the knots, with
/// affine extension outside.
fn primitive(xs: &[f64], slope: &[f64], values: &[f64], t: f64) -> f64 {
    let n = xs.len();
    if t <= xs[0] {
        return values[0] + slope[0] * (t - xs[0]);
    }
    if t >= xs[n - 1] {
        return values[n - 1] + slope[n - 1] * (t - xs[n - 1]);
    }
    let k = bracket(xs, t);
    let st = interp(xs, slope, t);
    values[k] + 0.5 * (t - xs[k]) * (slope[k] + st)
}

/// Monotone rearrangement and its potentials for strictly positive densities.
pub fn potentials(rho0: &GridDensity, rho1: &GridDensity) -> Result<TransportPotentials> {
    require_positive(rho0)?;
    require_positive(rho1)?;
    let segs = merged_segments(rho0, rho1);
    let mut xs = Vec::with_capacity(segs.len() + 1);
    let mut ys = Vec::with_capacity(segs.len() + 1);
    xs.push(segs[0][2]);
    ys.push(segs[0][4]);
    for s in &segs {
        // the next segment starts where this one ends; skip knots that
        // coincide after rounding
        if s[3] > *xs.last().unwrap() && s[5] > *ys.last().unwrap() {
            xs.push(s[3]);
            ys.push(s[5]);
        }
    }
    let mut phi = Vec::with_capacity(xs.len());
    let mut phi_star = Vec::with_capacity(xs.len());
    phi.push(0.0);
    phi_star.push(xs[0] * ys[0]);
    for k in 1..xs.len() {
        let dphi = 0.5 * (xs[k] - xs[k - 1]) * (ys[k] + ys[k - 1]);
        let dstar = 0.5 * (ys[k] - ys[k - 1]) * (xs[k] + xs[k - 1]);
        phi.push(phi[k - 1] + dphi);
        phi_star.push(phi_star[k - 1] + dstar);
    }
    Ok(TransportPotentials { x_grid: *rho0.grid(), y_grid: *rho1.grid(), xs, ys, phi, phi_star })
}

/// `d(q)² = ∬ (x − y)² q`, cell-centre quadrature.
pub fn coupling_cost(q: &PairDensity) -> f64 {
    let g = q.grid();
    let n = g.n_cells;
    let dx = g.dx();
    let centers = g.centers();
    let mut acc = 0.0;
    for (i, &x) in centers.iter().enumerate() {
        let row = &q.values()[i * n..(i + 1) * n];
        acc += row.iter().zip(&centers).map(|(&v, &y)| (x - y) * (x - y) * v).sum::<f64>();
    }
    acc * dx * dx
}

/// `2 ∬ (φ(x) + φ*(y) − xy) q`; equals `d(q)² − W₂²` when `q` couples the
/// densities `pot` was built from.
pub fn duality_gap(q: &PairDensity, pot: &TransportPotentials) -> f64 {
    let g = q.grid();
    let n = g.n_cells;
    let dx = g.dx();
    let centers = g.centers();
    let phi: Vec<f64> = centers.iter().map(|&x| pot.phi(x)).collect();
    let phi_star: Vec<f64> = centers.iter().map(|&y| pot.phi_star(y)).collect();
    let mut acc = 0.0;
    for i in 0..n {
        let x = centers[i];
        let row = &q.values()[i * n..(i + 1) * n];
        for j in 0..n {
            acc += (phi[i] + phi_star[j] - x * centers[j]) * row[j];
        }
    }
    2.0 * acc * dx * dx
}
