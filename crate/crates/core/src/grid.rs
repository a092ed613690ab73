//! Piecewise-constant probability densities on an interval and its square.
//!
//! A [`GridDensity`] holds one value per cell of a uniform grid on
//! `[origin, origin + length]`; the density is constant on each cell. All
//! integrals are cell sums (midpoint rule), which is exact for the
//! piecewise-constant model except where a non-polynomial integrand is
//! sampled at the cell centre.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Normalisation tolerance for one-dimensional densities.
pub const NORMALIZATION_TOL_1D: f64 = 1e-12;
/// Normalisation tolerance for pair densities (n² cell sums accumulate more rounding).
pub const NORMALIZATION_TOL_2D: f64 = 1e-10;

/// Uniform cell grid on `[origin, origin + length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: f64,
    pub length: f64,
    pub n_cells: usize,
}

impl GridSpec {
    pub fn new(origin: f64, length: f64, n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::TooFewCells(n_cells));
        }
        if !(length.is_finite() && length > 0.0) || !origin.is_finite() {
            return Err(Error::BadLength(length));
        }
        Ok(Self { origin, length, n_cells })
    }

    /// Grid on `[0, length]`.
    pub fn interval(length: f64, n_cells: usize) -> Result<Self> {
        Self::new(0.0, length, n_cells)
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    #[inline]
    pub fn end(&self) -> f64 {
        self.origin + self.length
    }

    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.dx()
    }

    #[inline]
    pub fn edge(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    /// Index of the cell containing `x`, or `None` outside the grid. The right
    /// end point belongs to the last cell.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.origin && x <= self.end()) {
            return None;
        }
        let i = ((x - self.origin) / self.dx()) as usize;
        Some(i.min(self.n_cells - 1))
    }

    /// Offset in cells of `other`'s origin relative to ours, if both grids share
    /// the cell width and their edges line up.
    pub fn aligned_offset(&self, other: &GridSpec) -> Option<i64> {
        let dx = self.dx();
        if (dx - other.dx()).abs() > 1e-12 * dx {
            return None;
        }
        let shift = (other.origin - self.origin) / dx;
        let k = libm::round(shift);
        if (shift - k).abs() > 1e-6 {
            return None;
        }
        Some(k as i64)
    }

    /// The same grid padded by `cells` cells on both sides.
    pub fn padded(&self, cells: usize) -> GridSpec {
        let dx = self.dx();
        GridSpec {
            origin: self.origin - cells as f64 * dx,
            length: self.length + 2.0 * cells as f64 * dx,
            n_cells: self.n_cells + 2 * cells,
        }
    }

    fn same_as(&self, other: &GridSpec) -> bool {
        self.n_cells == other.n_cells
            && (self.origin - other.origin).abs() <= 1e-12 * self.length.max(1.0)
            && (self.length - other.length).abs() <= 1e-12 * self.length.max(1.0)
    }
}

/// `x log x` with the convention `0 log 0 = 0`.
#[inline]
pub(crate) fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * libm::log(x)
    } else {
        0.0
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::BadValue { index, value });
        }
    }
    Ok(())
}

/// Probability density, piecewise constant on the cells of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: GridSpec,
    values: Vec<f64>,
}

impl GridDensity {
    /// Validates non-negativity and `Σ values·Δx = 1` to [`NORMALIZATION_TOL_1D`].
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells {
            return Err(Error::ShapeMismatch { expected: grid.n_cells, got: values.len() });
        }
        check_values(&values)?;
        let mass = values.iter().sum::<f64>() * grid.dx();
        if (mass - 1.0).abs() > NORMALIZATION_TOL_1D {
            return Err(Error::NotNormalized { mass, tolerance: NORMALIZATION_TOL_1D });
        }
        Ok(Self { grid, values })
    }

    /// Rescales arbitrary non-negative cell values to unit mass.
    pub fn normalized(grid: GridSpec, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells {
            return Err(Error::ShapeMismatch { expected: grid.n_cells, got: values.len() });
        }
        check_values(&values)?;
        let mass = values.iter().sum::<f64>() * grid.dx();
        if !(mass > 0.0) {
            return Err(Error::NotNormalized { mass, tolerance: NORMALIZATION_TOL_1D });
        }
        values.iter_mut().for_each(|v| *v /= mass);
        Ok(Self { grid, values })
    }

    /// Samples `f` at cell centres and normalises.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n_cells).map(|i| f(grid.center(i))).collect();
        Self::normalized(grid, values)
    }

    pub fn uniform(grid: GridSpec) -> Self {
        let v = 1.0 / grid.length;
        Self { grid, values: vec![v; grid.n_cells] }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.grid.n_cells
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.grid.dx()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value of the density at `x` (zero outside the grid).
    pub fn value_at(&self, x: f64) -> f64 {
        self.grid.cell_of(x).map_or(0.0, |i| self.values[i])
    }

    /// Linear interpolation between cell centres, constant in the outer half
    /// cells and zero outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let g = &self.grid;
        if !(x >= g.origin && x <= g.end()) {
            return 0.0;
        }
        let t = (x - g.origin) / g.dx() - 0.5;
        if t <= 0.0 {
            return self.values[0];
        }
        let i = t as usize;
        if i + 1 >= g.n_cells {
            return self.values[g.n_cells - 1];
        }
        let w = t - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx()
    }

    /// Smallest cell value.
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        let dx = self.dx();
        (0..self.n_cells()).map(|i| self.grid.center(i) * self.values[i] * dx).sum()
    }

    /// Exact variance of the piecewise-constant density (cell centre second
    /// moment plus the within-cell `Δx²/12`).
    pub fn variance(&self) -> f64 {
        let dx = self.dx();
        let m = self.mean();
        let second: f64 = (0..self.n_cells())
            .map(|i| {
                let d = self.grid.center(i) - m;
                d * d * self.values[i] * dx
            })
            .sum();
        second + dx * dx / 12.0 * self.mass()
    }

    /// CDF at the `n_cells + 1` cell edges; the last entry is forced to 1.
    pub fn cdf_edges(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut out = Vec::with_capacity(self.n_cells() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for &v in &self.values {
            acc += v * dx;
            out.push(acc);
        }
        let total = acc;
        if total > 0.0 {
            out.iter_mut().for_each(|c| *c /= total);
        }
        out
    }

    /// Piecewise-linear CDF, 0 left of the grid and 1 right of it.
    pub fn cdf(&self, x: f64) -> f64 {
        cdf_eval(&self.grid, &self.cdf_edges(), x)
    }

    /// Values zero-extended onto `target`, which must be aligned with this grid
    /// and cover it.
    pub fn embed(&self, target: &GridSpec) -> Result<Vec<f64>> {
        let offset = target.aligned_offset(&self.grid).ok_or(Error::GridMismatch)?;
        if offset < 0 || offset as usize + self.n_cells() > target.n_cells {
            return Err(Error::GridMismatch);
        }
        let mut out = vec![0.0; target.n_cells];
        out[offset as usize..offset as usize + self.n_cells()].copy_from_slice(&self.values);
        Ok(out)
    }

    /// L1 distance between densities on aligned grids (zero extension outside
    /// each support grid).
    pub fn l1_distance(&self, other: &GridDensity) -> Result<f64> {
        let lo = self.grid.origin.min(other.grid.origin);
        let hi = self.grid.end().max(other.grid.end());
        let dx = self.dx();
        let n = libm::round((hi - lo) / dx) as usize;
        let union = GridSpec { origin: lo, length: n as f64 * dx, n_cells: n };
        let a = self.embed(&union)?;
        let b = other.embed(&union)?;
        Ok(a.iter().zip(&b).map(|(p, q)| (p - q).abs()).sum::<f64>() * dx)
    }
}

pub(crate) fn cdf_eval(grid: &GridSpec, edges: &[f64], x: f64) -> f64 {
    if x <= grid.origin {
        return 0.0;
    }
    if x >= grid.end() {
        return 1.0;
    }
    let t = (x - grid.origin) / grid.dx();
    let i = (t as usize).min(grid.n_cells - 1);
    let w = t - i as f64;
    edges[i] + w * (edges[i + 1] - edges[i])
}

/// `E(ρ) = ∫ ρ log ρ` with `0 log 0 = 0`.
pub fn entropy(rho: &GridDensity) -> f64 {
    rho.values.iter().map(|&v| xlogx(v)).sum::<f64>() * rho.dx()
}

/// Probability density on the square of a [`GridSpec`], row-major with the
/// first (x) index outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDensity {
    grid: GridSpec,
    values: Vec<f64>,
}

impl PairDensity {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        let n2 = grid.n_cells * grid.n_cells;
        if values.len() != n2 {
            return Err(Error::ShapeMismatch { expected: n2, got: values.len() });
        }
        check_values(&values)?;
        let dx = grid.dx();
        let mass = values.iter().sum::<f64>() * dx * dx;
        if (mass - 1.0).abs() > NORMALIZATION_TOL_2D {
            return Err(Error::NotNormalized { mass, tolerance: NORMALIZATION_TOL_2D });
        }
        Ok(Self { grid, values })
    }

    pub fn normalized(grid: GridSpec, mut values: Vec<f64>) -> Result<Self> {
        let n2 = grid.n_cells * grid.n_cells;
        if values.len() != n2 {
            return Err(Error::ShapeMismatch { expected: n2, got: values.len() });
        }
        check_values(&values)?;
        let dx = grid.dx();
        let mass = values.iter().sum::<f64>() * dx * dx;
        if !(mass > 0.0) {
            return Err(Error::NotNormalized { mass, tolerance: NORMALIZATION_TOL_2D });
        }
        values.iter_mut().for_each(|v| *v /= mass);
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let n = grid.n_cells;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            let x = grid.center(i);
            for j in 0..n {
                values.push(f(x, grid.center(j)));
            }
        }
        Self::normalized(grid, values)
    }

    /// `ρ ⊗ σ`.
    pub fn product(rho: &GridDensity, sigma: &GridDensity) -> Result<Self> {
        if !rho.grid.same_as(&sigma.grid) {
            return Err(Error::GridMismatch);
        }
        let mut values = Vec::with_capacity(rho.n_cells() * rho.n_cells());
        for &a in rho.values() {
            values.extend(sigma.values().iter().map(|&b| a * b));
        }
        Ok(Self { grid: rho.grid, values })
    }

    /// Wraps values already known to be a probability density up to the 2D
    /// tolerance (used by solvers that normalise by construction).
    pub(crate) fn from_trusted(grid: GridSpec, values: Vec<f64>) -> Self {
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.grid.n_cells
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.grid.dx()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_cells + j]
    }

    pub fn mass(&self) -> f64 {
        let dx = self.dx();
        self.values.iter().sum::<f64>() * dx * dx
    }

    /// Raw row and column sums times `Δx`, without renormalisation.
    pub fn marginal_values(&self) -> (Vec<f64>, Vec<f64>) {
        marginal_sums(&self.values, self.n_cells(), self.dx())
    }

    /// `(π₀q, π₁q)`, each rescaled to unit mass (the raw masses agree with 1 to
    /// the 2D normalisation tolerance).
    pub fn marginals(&self) -> (GridDensity, GridDensity) {
        let (row, col) = self.marginal_values();
        let rescale = |mut v: Vec<f64>| {
            let m = v.iter().sum::<f64>() * self.dx();
            v.iter_mut().for_each(|x| *x /= m);
            GridDensity { grid: self.grid, values: v }
        };
        (rescale(row), rescale(col))
    }
}

pub(crate) fn marginal_sums(values: &[f64], n: usize, dx: f64) -> (Vec<f64>, Vec<f64>) {
    let mut row = vec![0.0; n];
    let mut col = vec![0.0; n];
    for i in 0..n {
        let r = &values[i * n..(i + 1) * n];
        let mut acc = 0.0;
        for (j, &v) in r.iter().enumerate() {
            acc += v;
            col[j] += v;
        }
        row[i] = acc * dx;
    }
    col.iter_mut().for_each(|c| *c *= dx);
    (row, col)
}

/// `∬ q log q` for a pair density.
pub fn pair_entropy(q: &PairDensity) -> f64 {
    let dx = q.dx();
    q.values.iter().map(|&v| xlogx(v)).sum::<f64>() * dx * dx
}

/// `H(q | p) = ∬ q log(q/p)`, `+∞` when `q` charges a cell where `p` vanishes.
pub fn relative_entropy(q: &PairDensity, p: &PairDensity) -> Result<f64> {
    if !q.grid.same_as(&p.grid) {
        return Err(Error::GridMismatch);
    }
    let dx = q.dx();
    Ok(relative_entropy_values(&q.values, &p.values) * dx * dx)
}

/// Cell sum of `q log(q/p)` without the cell area.
pub(crate) fn relative_entropy_values(q: &[f64], p: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in q.iter().zip(p) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            acc += a * libm::log(a / b);
        }
    }
    acc
}

/// Lévy distance between two densities on the same interval, by bisection on
/// the sandwich condition `F(x−h) − h ≤ G(x) ≤ F(x+h) + h` (checked in both
/// directions) to an interval width below `1e-7`.
pub fn levy_distance(rho: &GridDensity, sigma: &GridDensity) -> Result<f64> {
    let (a, b) = (&rho.grid, &sigma.grid);
    if (a.origin - b.origin).abs() > 1e-12 || (a.length - b.length).abs() > 1e-12 {
        return Err(Error::GridMismatch);
    }
    let fe = rho.cdf_edges();
    let ge = sigma.cdf_edges();
    let f = |x: f64| cdf_eval(a, &fe, x);
    let g = |x: f64| cdf_eval(b, &ge, x);

    let mut knots: Vec<f64> = (0..=a.n_cells).map(|i| a.edge(i)).collect();
    knots.extend((0..=b.n_cells).map(|i| b.edge(i)));

    // Both CDFs are piecewise linear, so the violation of the sandwich is
    // maximal at a knot of one side or a knot shifted by ±h.
    let sandwiched = |h: f64| {
        let holds = |x: f64| {
            let slack = 1e-14;
            f(x - h) - h <= g(x) + slack
                && g(x) <= f(x + h) + h + slack
                && g(x - h) - h <= f(x) + slack
                && f(x) <= g(x + h) + h + slack
        };
        knots.iter().all(|&k| holds(k) && holds(k + h) && holds(k - h))
    };

    if sandwiched(0.0) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if sandwiched(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The window `A_δ = {ρ : ‖ρ − 1/L‖_∞ < δ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ADeltaSpec {
    pub delta: f64,
    pub length: f64,
}

impl ADeltaSpec {
    pub fn new(delta: f64, length: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter { name: "delta", value: delta });
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::BadLength(length));
        }
        Ok(Self { delta, length })
    }

    /// `max |ρ − 1/L|` over cells.
    pub fn sup_deviation(&self, rho: &GridDensity) -> f64 {
        let base = 1.0 / self.length;
        rho.values().iter().map(|v| (v - base).abs()).fold(0.0, f64::max)
    }
}

pub fn in_a_delta(rho: &GridDensity, spec: &ADeltaSpec) -> bool {
    spec.sup_deviation(rho) < spec.delta
}
