//! Independent Brownian particles with generator `Δ` (increments of variance
//! `2h`), their empirical measure and empirical pair measure.
//!
//! Particles are generated in fixed-size chunks, chunk `c` drawing from the
//! ChaCha8 stream `c` of the seed, so an ensemble does not depend on how the
//! chunks are scheduled.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{GridDensity, GridSpec, PairDensity};
use crate::heat::{evolve, KernelParams};

pub const CHUNK_SIZE: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub x0: Vec<f64>,
    pub xh: Vec<f64>,
    pub seed: u64,
    pub h: f64,
}

impl ParticleEnsemble {
    pub fn n(&self) -> usize {
        self.x0.len()
    }

    /// Sample mean and (unbiased) sample variance of `xh − x0`.
    pub fn increment_stats(&self) -> (f64, f64) {
        let n = self.n() as f64;
        let mean = self.x0.iter().zip(&self.xh).map(|(a, b)| b - a).sum::<f64>() / n;
        let var = self.x0.iter().zip(&self.xh).map(|(a, b)| (b - a - mean) * (b - a - mean)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }
}

/// Inverse-CDF draw from a piecewise-constant density, `u ∈ [0, 1)`.
pub fn inverse_cdf(grid: &GridSpec, cdf_edges: &[f64], u: f64) -> f64 {
    let n = grid.n_cells;
    let k = cdf_edges[1..].partition_point(|&c| c <= u).min(n - 1);
    let (a, b) = (cdf_edges[k], cdf_edges[k + 1]);
    grid.edge(k) + (u - a) / (b - a) * grid.dx()
}

/// Particles `chunk·CHUNK_SIZE ..` up to `len` of them, appended to the
/// output vectors.
pub fn simulate_chunk(rho0: &GridDensity, cdf_edges: &[f64], h: f64, seed: u64, chunk: u64, len: usize, x0: &mut Vec<f64>, xh: &mut Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let scale = libm::sqrt(2.0 * h);
    for _ in 0..len {
        let u: f64 = rng.random();
        let z: f64 = rng.sample(StandardNormal);
        let x = inverse_cdf(rho0.grid(), cdf_edges, u);
        x0.push(x);
        xh.push(x + scale * z);
    }
}

fn check_sim(n: usize, h: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", value: 0.0 });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter { name: "h", value: h });
    }
    Ok(())
}

/// Number of chunks and the size of chunk `c` for `n` particles.
pub fn chunk_layout(n: usize) -> impl Iterator<Item = (u64, usize)> {
    (0..n.div_ceil(CHUNK_SIZE)).map(move |c| (c as u64, CHUNK_SIZE.min(n - c * CHUNK_SIZE)))
}

pub fn simulate(rho0: &GridDensity, n: usize, h: f64, seed: u64) -> Result<ParticleEnsemble> {
    check_sim(n, h)?;
    let cdf = rho0.cdf_edges();
    let mut x0 = Vec::with_capacity(n);
    let mut xh = Vec::with_capacity(n);
    for (c, len) in chunk_layout(n) {
        simulate_chunk(rho0, &cdf, h, seed, c, len, &mut x0, &mut xh);
    }
    Ok(ParticleEnsemble { x0, xh, seed, h })
}

/// Histogram of particle positions with the out-of-grid count kept apart.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    pub grid: GridSpec,
    pub counts: Vec<u64>,
    pub overflow: u64,
    pub n: u64,
}

impl EmpiricalMeasure {
    /// `count/(n Δx)`; integrates to `1 − overflow/n`.
    pub fn values(&self) -> Vec<f64> {
        let s = 1.0 / (self.n as f64 * self.grid.dx());
        self.counts.iter().map(|&c| c as f64 * s).collect()
    }

    pub fn mass(&self) -> f64 {
        1.0 - self.overflow as f64 / self.n as f64
    }

    /// The histogram conditioned on landing in the grid.
    pub fn to_density(&self) -> Result<GridDensity> {
        if self.overflow == self.n {
            return Err(Error::EmptyHistogram);
        }
        let inside = (self.n - self.overflow) as f64;
        let s = 1.0 / (inside * self.grid.dx());
        GridDensity::normalized(self.grid, self.counts.iter().map(|&c| c as f64 * s).collect())
    }

    /// `Σ |count/(nΔx) − ρ| Δx` against a density on the same grid.
    pub fn l1_to(&self, rho: &GridDensity) -> Result<f64> {
        if self.grid.aligned_offset(rho.grid()) != Some(0) || self.grid.n_cells != rho.n_cells() {
            return Err(Error::GridMismatch);
        }
        let dx = self.grid.dx();
        Ok(self.values().iter().zip(rho.values()).map(|(a, b)| (a - b).abs()).sum::<f64>() * dx)
    }
}

pub fn empirical_density(positions: &[f64], grid: &GridSpec) -> Result<EmpiricalMeasure> {
    if positions.is_empty() {
        return Err(Error::InvalidParameter { name: "n", value: 0.0 });
    }
    let mut counts = vec![0u64; grid.n_cells];
    let mut overflow = 0;
    for &x in positions {
        match grid.cell_of(x) {
            Some(i) => counts[i] += 1,
            None => overflow += 1,
        }
    }
    Ok(EmpiricalMeasure { grid: *grid, counts, overflow, n: positions.len() as u64 })
}

/// Two-dimensional histogram of `(x0ᵢ, xhᵢ)`. Each axis has one extra
/// overflow bin (index `n_cells`), so the marginals reproduce the
/// one-dimensional histograms count for count.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPair {
    pub grid: GridSpec,
    /// Row-major `(n_cells + 1)²` counts, x0 outermost.
    pub counts: Vec<u64>,
    pub n: u64,
}

impl EmpiricalPair {
    fn side(&self) -> usize {
        self.grid.n_cells + 1
    }

    pub fn first_marginal(&self) -> EmpiricalMeasure {
        let s = self.side();
        let sums: Vec<u64> = self.counts.chunks(s).map(|r| r.iter().sum()).collect();
        self.measure(sums)
    }

    pub fn second_marginal(&self) -> EmpiricalMeasure {
        let s = self.side();
        let mut sums = vec![0u64; s];
        for row in self.counts.chunks(s) {
            for (a, c) in sums.iter_mut().zip(row) {
                *a += c;
            }
        }
        self.measure(sums)
    }

    fn measure(&self, mut sums: Vec<u64>) -> EmpiricalMeasure {
        let overflow = sums.pop().unwrap_or(0);
        EmpiricalMeasure { grid: self.grid, counts: sums, overflow, n: self.n }
    }

    /// Pairs with both ends in the grid, as a probability density.
    pub fn to_pair_density(&self) -> Result<PairDensity> {
        let s = self.side();
        let n = self.grid.n_cells;
        let mut values = Vec::with_capacity(n * n);
        for row in self.counts.chunks(s).take(n) {
            values.extend(row[..n].iter().map(|&c| c as f64));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::EmptyHistogram);
        }
        PairDensity::normalized(self.grid, values)
    }
}

pub fn empirical_pair(ens: &ParticleEnsemble, grid: &GridSpec) -> EmpiricalPair {
    let n = grid.n_cells;
    let s = n + 1;
    let mut counts = vec![0u64; s * s];
    for (&a, &b) in ens.x0.iter().zip(&ens.xh) {
        let i = grid.cell_of(a).unwrap_or(n);
        let j = grid.cell_of(b).unwrap_or(n);
        counts[i * s + j] += 1;
    }
    EmpiricalPair { grid: *grid, counts, n: ens.n() as u64 }
}

/// Below this particle count the statistical check is skipped.
pub const MIN_PARTICLES_FOR_CHECK: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for HydroConstants {
    fn default() -> Self {
        Self { c1: 1.0, c2: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydroReport {
    pub n: usize,
    pub h: f64,
    pub seed: u64,
    /// `Σ |count/(nΔx) − ρ_h| Δx` over the cells of the binning grid, with
    /// `ρ_h` the heat-evolved `ρ₀` restricted (not renormalised) to it.
    pub l1_error: f64,
    /// Particles outside the binning grid.
    pub overflow: u64,
    /// `c₁/√(nΔx) + c₂Δx`.
    pub bound: f64,
    pub skipped: bool,
    pub pass: bool,
}

/// Compares the histogram of `xh` on `grid` with the heat-evolved `ρ₀`.
/// `grid` must line up with the cells of `ρ₀`'s grid and lie inside the
/// padded output grid of [`evolve`]. For `n < MIN_PARTICLES_FOR_CHECK` the
/// statistical verdict is skipped and the report passes.
pub fn hydrodynamic_check(rho0: &GridDensity, n: usize, h: f64, seed: u64, grid: &GridSpec, constants: &HydroConstants) -> Result<HydroReport> {
    let ens = simulate(rho0, n, h, seed)?;
    hydrodynamic_report(rho0, &ens, grid, constants)
}

pub fn hydrodynamic_report(rho0: &GridDensity, ens: &ParticleEnsemble, grid: &GridSpec, constants: &HydroConstants) -> Result<HydroReport> {
    let p = KernelParams::from_h(ens.h)?;
    let ev = evolve(rho0, &p);
    let off = ev.density.grid().aligned_offset(grid).ok_or(Error::GridMismatch)?;
    if off < 0 || off as usize + grid.n_cells > ev.density.n_cells() {
        return Err(Error::GridMismatch);
    }
    let off = off as usize;
    let reference = &ev.density.values()[off..off + grid.n_cells];
    let hist = empirical_density(&ens.xh, grid)?;
    let dx = grid.dx();
    let l1_error = hist.values().iter().zip(reference).map(|(a, b)| (a - b).abs()).sum::<f64>() * dx;
    let n = ens.n();
    let bound = constants.c1 / libm::sqrt(n as f64 * dx) + constants.c2 * dx;
    let skipped = n < MIN_PARTICLES_FOR_CHECK;
    Ok(HydroReport { n, h: ens.h, seed: ens.seed, l1_error, overflow: hist.overflow, bound, skipped, pass: skipped || l1_error <= bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::relative_entropy;
    use crate::heat::reference_coupling;
    use core::f64::consts::PI;

    fn unit(n: usize) -> GridSpec {
        GridSpec::interval(1.0, n).unwrap()
    }

    #[test]
    fn deterministic_per_seed() {
        let rho = GridDensity::from_fn(unit(64), |x| 1.0 + 0.5 * libm::cos(2.0 * PI * x)).unwrap();
        let a = simulate(&rho, 10_000, 0.01, 7).unwrap();
        let b = simulate(&rho, 10_000, 0.01, 7).unwrap();
        assert_eq!(a, b);
        let c = simulate(&rho, 10_000, 0.01, 8).unwrap();
        assert_ne!(a.x0, c.x0);
        // prefix stability: the first chunk does not depend on n
        let d = simulate(&rho, 100, 0.01, 7).unwrap();
        assert_eq!(&a.x0[..100], &d.x0[..]);
        assert!(simulate(&rho, 0, 0.01, 7).is_err());
        assert!(simulate(&rho, 10, -1.0, 7).is_err());
    }

    #[test]
    fn increments_have_variance_two_h() {
        let rho = GridDensity::uniform(unit(16));
        let n = 200_000;
        let h = 0.01;
        let ens = simulate(&rho, n, h, 3).unwrap();
        let (mean, var) = ens.increment_stats();
        assert!(mean.abs() <= 3.0 * libm::sqrt(2.0 * h / n as f64));
        assert!((var - 2.0 * h).abs() <= 3.0 * 2.0 * h * libm::sqrt(2.0 / n as f64));
    }

    #[test]
    fn inverse_cdf_skips_empty_cells() {
        let g = unit(4);
        let rho = GridDensity::new(g, alloc::vec![2.0, 0.0, 0.0, 2.0]).unwrap();
        let cdf = rho.cdf_edges();
        assert_eq!(inverse_cdf(&g, &cdf, 0.0), 0.0);
        assert!((inverse_cdf(&g, &cdf, 0.25) - 0.125).abs() < 1e-15);
        assert!((inverse_cdf(&g, &cdf, 0.5) - 0.75).abs() < 1e-15);
        assert!((inverse_cdf(&g, &cdf, 0.999_999) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn histogram_examples() {
        let g = unit(8);
        let m = empirical_density(&[0.3, 0.31, 0.32], &g).unwrap();
        let v = m.values();
        assert_eq!(v[2], 8.0);
        assert_eq!(v.iter().filter(|&&x| x != 0.0).count(), 1);
        let m = empirical_density(&[0.5, 1.5, -0.1, 0.9], &g).unwrap();
        assert_eq!(m.overflow, 2);
        assert!((m.mass() - 0.5).abs() < 1e-15);
        assert!((m.values().iter().sum::<f64>() * g.dx() - 0.5).abs() < 1e-15);
        assert!((m.to_density().unwrap().mass() - 1.0).abs() < 1e-12);
        let out = empirical_density(&[2.0], &g).unwrap();
        assert_eq!(out.to_density(), Err(Error::EmptyHistogram));
        assert!(empirical_density(&[], &g).is_err());
    }

    #[test]
    fn pair_marginals_are_exact() {
        let rho = GridDensity::uniform(unit(32));
        let ens = simulate(&rho, 5000, 0.02, 11).unwrap();
        let g = unit(32);
        let pair = empirical_pair(&ens, &g);
        assert_eq!(pair.first_marginal(), empirical_density(&ens.x0, &g).unwrap());
        assert_eq!(pair.second_marginal(), empirical_density(&ens.xh, &g).unwrap());

        let one = ParticleEnsemble { x0: alloc::vec![0.4], xh: alloc::vec![0.6], seed: 0, h: 0.01 };
        let p = empirical_pair(&one, &g);
        assert_eq!(p.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert!((p.to_pair_density().unwrap().mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exchangeable() {
        let rho = GridDensity::uniform(unit(16));
        let ens = simulate(&rho, 3000, 0.01, 5).unwrap();
        let mut perm = ens.clone();
        perm.x0.reverse();
        perm.xh.reverse();
        let g = unit(16);
        assert_eq!(empirical_pair(&ens, &g), empirical_pair(&perm, &g));
    }

    #[test]
    fn relative_entropy_of_pair_histogram_decreases_with_n() {
        let g = unit(16);
        let rho = GridDensity::from_fn(g, |x| 1.0 + 0.3 * libm::cos(2.0 * PI * x)).unwrap();
        let h = 0.02;
        let q0 = reference_coupling(&rho, &KernelParams::from_h(h).unwrap()).renormalized();
        let mut prev = f64::INFINITY;
        for &n in &[1_000usize, 10_000, 100_000] {
            let ens = simulate(&rho, n, h, 21).unwrap();
            let y = empirical_pair(&ens, &g).to_pair_density().unwrap();
            let rel = relative_entropy(&y, &q0).unwrap();
            assert!(rel < prev, "n={n}: {rel}");
            prev = rel;
        }
    }

    #[test]
    fn hydrodynamic_limit() {
        let g = unit(256);
        let rho = GridDensity::uniform(g);
        let h = 0.01;
        let n = 100_000;
        let rep = hydrodynamic_check(&rho, n, h, 1, &g, &HydroConstants::default()).unwrap();
        assert!(rep.pass && !rep.skipped, "{rep:?}");
        assert!(rep.l1_error <= 0.05, "{rep:?}");
        // mean absolute deviation of multinomial cell counts, restricted to the grid
        let dx = g.dx();
        let s = 2.0 * h;
        let cell_mass = |a: f64, b: f64| {
            // ∫_a^b of the uniform density on [0,1] convolved with N(0, 2h)
            let f = |x: f64| {
                let u = x / libm::sqrt(2.0 * s);
                x * 0.5 * libm::erfc(-u) + libm::sqrt(s / (2.0 * PI)) * libm::exp(-u * u)
            };
            (f(b) - f(b - 1.0)) - (f(a) - f(a - 1.0))
        };
        let expected: f64 = (0..256)
            .map(|i| {
                let pm = cell_mass(i as f64 * dx, (i + 1) as f64 * dx);
                libm::sqrt(2.0 * pm * (1.0 - pm) / (PI * n as f64))
            })
            .sum();
        assert!((rep.l1_error / expected - 1.0).abs() < 0.1, "{} vs {expected}", rep.l1_error);
        let overflow_expected = n as f64 * (1.0 - cell_mass(0.0, 1.0));
        assert!((rep.overflow as f64 - overflow_expected).abs() < 4.0 * libm::sqrt(overflow_expected), "{} vs {overflow_expected}", rep.overflow);
        let small = hydrodynamic_check(&rho, 10, h, 1, &g, &HydroConstants::default()).unwrap();
        assert!(small.skipped && small.pass);
        let off = GridSpec::new(0.001, 1.0, 256).unwrap();
        assert_eq!(hydrodynamic_check(&rho, 10, h, 1, &off, &HydroConstants::default()), Err(Error::GridMismatch));
    }

    #[test]
    fn doubling_n_shrinks_error_by_root_two() {
        let g = unit(256);
        let rho = GridDensity::from_fn(g, |x| 1.0 + 0.2 * libm::cos(2.0 * PI * x)).unwrap();
        let mean_l1 = |n: usize| {
            (0..5u64).map(|s| hydrodynamic_check(&rho, n, 0.01, 100 + s, &g, &HydroConstants::default()).unwrap().l1_error).sum::<f64>() / 5.0
        };
        let errs: Vec<f64> = [20_000usize, 40_000, 80_000, 160_000].iter().map(|&n| mean_l1(n)).collect();
        for w in errs.windows(2) {
            let r = w[1] / w[0];
            assert!((r - core::f64::consts::FRAC_1_SQRT_2).abs() < 0.08, "{errs:?}");
        }
    }

    #[test]
    fn overflow_within_gaussian_tail() {
        let g = unit(100);
        // support [0.2, 0.8]: leaving [0, 1] needs an increment beyond 0.2
        let rho = GridDensity::from_fn(g, |x| if (0.2..0.8).contains(&x) { 1.0 } else { 0.0 }).unwrap();
        let n = 200_000;
        for &h in &[1e-3, 4e-3] {
            let ens = simulate(&rho, n, h, 9).unwrap();
            let m = empirical_density(&ens.xh, &g).unwrap();
            let tail = libm::erfc(0.2 / libm::sqrt(4.0 * h));
            let allowed = n as f64 * tail + 4.0 * libm::sqrt(n as f64 * tail) + 1.0;
            assert!((m.overflow as f64) <= allowed, "h={h}: {} > {allowed}", m.overflow);
        }
    }

    #[test]
    fn small_h_keeps_positions() {
        let rho = GridDensity::uniform(unit(64));
        let ens = simulate(&rho, 20_000, 1e-12, 2).unwrap();
        let g = unit(64);
        let a = empirical_density(&ens.x0, &g).unwrap();
        let b = empirical_density(&ens.xh, &g).unwrap();
        let diff: u64 = a.counts.iter().zip(&b.counts).map(|(x, y)| x.abs_diff(*y)).sum();
        assert!(diff < 20, "{diff}");
    }
}
