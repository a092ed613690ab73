//! `particles-run`: Brownian particle ensembles over several seeds, checked
//! against heat evolution, the increment variance and the pair-marginal
//! identity.

use std::path::Path;

use bridgelab_core::particles::{
    chunk_layout, empirical_density, empirical_pair, hydrodynamic_report, simulate_chunk, HydroConstants, HydroReport, ParticleEnsemble,
    MIN_PARTICLES_FOR_CHECK,
};
use bridgelab_core::{GridDensity, GridSpec};
use rayon::prelude::*;

use super::{grid_from, CmdError, Outcome};
use crate::catalog::density;
use crate::config::Config;
use crate::csv::Table;

pub const DEFAULTS: &[(&str, &str)] = &[
    ("length", "1"),
    ("n_cells", "256"),
    ("rho0", "uniform"),
    ("n", "100000"),
    ("h", "0.01"),
    ("seed", "0"),
    ("seeds", "5"),
    ("c1", "1"),
    ("c2", "1"),
    ("write_ensemble", "false"),
];

/// Same ensemble as `particles::simulate`, chunks generated in parallel.
pub fn simulate_parallel(rho0: &GridDensity, n: usize, h: f64, seed: u64) -> Result<ParticleEnsemble, CmdError> {
    if n == 0 || !(h > 0.0 && h.is_finite()) {
        return Err(CmdError::Config(format!("need n >= 1 and h > 0, got n = {n}, h = {h}")));
    }
    let cdf = rho0.cdf_edges();
    let layout: Vec<(u64, usize)> = chunk_layout(n).collect();
    let parts: Vec<(Vec<f64>, Vec<f64>)> = layout
        .par_iter()
        .map(|&(c, len)| {
            let mut x0 = Vec::with_capacity(len);
            let mut xh = Vec::with_capacity(len);
            simulate_chunk(rho0, &cdf, h, seed, c, len, &mut x0, &mut xh);
            (x0, xh)
        })
        .collect();
    let mut x0 = Vec::with_capacity(n);
    let mut xh = Vec::with_capacity(n);
    for (a, b) in parts {
        x0.extend(a);
        xh.extend(b);
    }
    Ok(ParticleEnsemble { x0, xh, seed, h })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedResult {
    pub hydro: HydroReport,
    pub increment_mean: f64,
    pub increment_variance: f64,
    /// `3√(2h/n)`.
    pub mean_band: f64,
    /// `3·2h·√(2/n)`.
    pub variance_band: f64,
    pub marginals_exact: bool,
}

impl SeedResult {
    pub fn increments_ok(&self) -> bool {
        let two_h = 2.0 * self.hydro.h;
        self.increment_mean.abs() <= self.mean_band && (self.increment_variance - two_h).abs() <= self.variance_band
    }
}

pub fn seed_result(rho0: &GridDensity, grid: &GridSpec, ens: &ParticleEnsemble, constants: &HydroConstants) -> Result<SeedResult, CmdError> {
    let hydro = hydrodynamic_report(rho0, ens, grid, constants)?;
    let (increment_mean, increment_variance) = ens.increment_stats();
    let n = ens.n() as f64;
    let pair = empirical_pair(ens, grid);
    let marginals_exact = pair.first_marginal() == empirical_density(&ens.x0, grid)? && pair.second_marginal() == empirical_density(&ens.xh, grid)?;
    Ok(SeedResult {
        hydro,
        increment_mean,
        increment_variance,
        mean_band: 3.0 * (2.0 * ens.h / n).sqrt(),
        variance_band: 3.0 * 2.0 * ens.h * (2.0 / n).sqrt(),
        marginals_exact,
    })
}

pub fn run(cfg: &Config, dir: &Path) -> Result<Outcome, CmdError> {
    let grid = grid_from(cfg, "n_cells", 0.0)?;
    let rho0 = density(cfg.str("rho0"), &grid)?;
    let n = cfg.usize("n")?;
    let h = cfg.f64("h")?;
    let first = cfg.u64("seed")?;
    let count = cfg.u64("seeds")?;
    if count == 0 {
        return Err(CmdError::Config("seeds must be at least 1".into()));
    }
    let constants = HydroConstants { c1: cfg.f64("c1")?, c2: cfg.f64("c2")? };
    let write_ensemble = cfg.bool("write_ensemble")?;
    let seeds: Vec<u64> = (first..first + count).collect();

    let results: Vec<(ParticleEnsemble, SeedResult)> = seeds
        .par_iter()
        .map(|&s| {
            let ens = simulate_parallel(&rho0, n, h, s)?;
            let r = seed_result(&rho0, &grid, &ens, &constants)?;
            Ok((ens, r))
        })
        .collect::<Result<_, CmdError>>()?;

    let hash = cfg.hash();
    let mut out = Outcome::new();
    let skipped = n < MIN_PARTICLES_FOR_CHECK;
    if skipped {
        out.note(format!("warning: n = {n} is below {MIN_PARTICLES_FOR_CHECK}; statistical checks skipped"));
    }
    let mut rep = Table::new(&hash, &["n", "h", "l1_error", "overflow", "seed", "bound", "pass"]);
    let mut inc = Table::new(&hash, &["seed", "mean", "variance", "mean_band", "variance_band", "pass"]);
    for (ens, r) in &results {
        let hy = &r.hydro;
        rep.row(&[hy.n.into(), hy.h.into(), hy.l1_error.into(), hy.overflow.into(), hy.seed.into(), hy.bound.into(), hy.pass.into()]);
        inc.row(&[hy.seed.into(), r.increment_mean.into(), r.increment_variance.into(), r.mean_band.into(), r.variance_band.into(), r.increments_ok().into()]);
        out.check(r.marginals_exact, || format!("pair marginals: histogram marginals differ from the 1D histograms for seed {}", hy.seed));
        if !skipped {
            out.check(hy.pass, || format!("hydrodynamic limit: L1 = {} exceeds c1/sqrt(n dx) + c2 dx = {} for seed {}", hy.l1_error, hy.bound, hy.seed));
            out.check(r.increments_ok(), || {
                format!(
                    "increment law: mean {} (band {}), variance {} vs 2h = {} (band {}) for seed {}",
                    r.increment_mean,
                    r.mean_band,
                    r.increment_variance,
                    2.0 * h,
                    r.variance_band,
                    hy.seed
                )
            });
        }
        if write_ensemble {
            let mut e = Table::new(&hash, &["i", "x0", "xh"]);
            for (i, (a, b)) in ens.x0.iter().zip(&ens.xh).enumerate() {
                e.row(&[i.into(), (*a).into(), (*b).into()]);
            }
            out.write(&e, dir, &format!("ensemble_seed{}.csv", hy.seed))?;
        }
    }
    out.write(&rep, dir, "particles.csv")?;
    out.write(&inc, dir, "increments.csv")?;
    let mean_l1 = results.iter().map(|(_, r)| r.hydro.l1_error).sum::<f64>() / results.len() as f64;
    out.note(format!("mean L1 over {} seeds: {mean_l1:.6}", results.len()));
    Ok(out)
}
