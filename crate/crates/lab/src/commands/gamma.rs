//! `gamma-sweep`: `F_ε = J_ε − W₂²/ε²` along an ε ladder against
//! `½E(ρ₁) − ½E(ρ₀)`.

use std::path::Path;

use bridgelab_core::bridge::{gamma_functional, MAX_DELTA};
use bridgelab_core::{ADeltaSpec, GridDensity, GridSpec, KernelParams};
use rayon::prelude::*;

use super::{grid_from, validate_ladder, CmdError, Outcome};
use crate::catalog::density;
use crate::config::Config;
use crate::csv::Table;

pub const DEFAULTS: &[(&str, &str)] = &[
    ("length", "1"),
    ("n", "1024"),
    ("rho0", "uniform"),
    ("rho1", "cosine:0.2"),
    ("epsilons", "0.4,0.2,0.1,0.05"),
    ("delta", "0.25"),
    ("tol", "1e-10"),
    ("threshold", "0.02"),
    ("seed", "0"),
];

#[derive(Debug, Clone)]
pub struct GammaSweep {
    pub grid: GridSpec,
    pub rho0: GridDensity,
    pub rho1: GridDensity,
    pub ladder: Vec<KernelParams>,
    pub window: ADeltaSpec,
    pub tol: f64,
    pub threshold: f64,
}

impl GammaSweep {
    pub fn from_config(cfg: &Config) -> Result<Self, CmdError> {
        let grid = grid_from(cfg, "n", 0.0)?;
        let delta = cfg.f64("delta")?;
        if !(delta > 0.0 && delta <= MAX_DELTA) {
            return Err(CmdError::Config(format!("delta {delta} must lie in (0, 1/3]")));
        }
        let tol = cfg.f64("tol")?;
        if !(tol > 0.0) {
            return Err(CmdError::Config(format!("tol {tol} must be positive")));
        }
        Ok(Self {
            grid,
            rho0: density(cfg.str("rho0"), &grid)?,
            rho1: density(cfg.str("rho1"), &grid)?,
            ladder: validate_ladder(&cfg.f64_list("epsilons")?, &grid)?,
            window: ADeltaSpec::new(delta, grid.length)?,
            tol,
            threshold: cfg.f64("threshold")?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRow {
    pub epsilon: f64,
    pub f_eps: f64,
    pub target: f64,
    pub abs_gap: f64,
    pub j_value: f64,
    pub w2_sq: f64,
    pub marginal_error: f64,
    pub iterations: usize,
}

/// One row per ladder entry, in ladder order.
pub fn sweep(s: &GammaSweep) -> Result<Vec<GammaRow>, CmdError> {
    s.ladder
        .par_iter()
        .map(|p| {
            let g = gamma_functional(&s.rho0, &s.rho1, p, s.tol, &s.window)?;
            Ok(GammaRow {
                epsilon: g.epsilon,
                f_eps: g.f_eps,
                target: g.target,
                abs_gap: g.abs_gap(),
                j_value: g.j_value,
                w2_sq: g.w2_sq,
                marginal_error: g.solution.marginal_error,
                iterations: g.solution.iterations,
            })
        })
        .collect()
}

/// Gap at the smallest ε below `threshold`, gaps nonincreasing over the last
/// three ladder entries.
pub fn verdict(rows: &[GammaRow], threshold: f64, out: &mut Outcome) {
    let gaps: Vec<f64> = rows.iter().map(|r| r.abs_gap).collect();
    let last = rows[rows.len() - 1];
    out.check(last.abs_gap < threshold, || {
        format!("gap below threshold: |F_eps - target| = {} at epsilon = {} exceeds {threshold}", last.abs_gap, last.epsilon)
    });
    let tail = &gaps[gaps.len().saturating_sub(3)..];
    out.check(tail.windows(2).all(|w| w[1] <= w[0]), || format!("gap monotonicity: last gaps {tail:?} are not nonincreasing"));
}

pub fn run(cfg: &Config, dir: &Path) -> Result<Outcome, CmdError> {
    let s = GammaSweep::from_config(cfg)?;
    let rows = sweep(&s)?;
    let hash = cfg.hash();
    let mut out = Outcome::new();
    let mut t = Table::new(&hash, &["epsilon", "F_eps", "target", "abs_gap"]);
    let mut b = Table::new(&hash, &["epsilon", "j_value", "w2_sq", "F_eps", "marginal_error", "iterations"]);
    for r in &rows {
        t.row(&[r.epsilon.into(), r.f_eps.into(), r.target.into(), r.abs_gap.into()]);
        b.row(&[r.epsilon.into(), r.j_value.into(), r.w2_sq.into(), r.f_eps.into(), r.marginal_error.into(), r.iterations.into()]);
        out.note(format!("epsilon={} F_eps={:.6e} target={:.6e} abs_gap={:.6e}", r.epsilon, r.f_eps, r.target, r.abs_gap));
    }
    out.write(&t, dir, "gamma_sweep.csv")?;
    out.write(&b, dir, "gamma_sweep_bridge.csv")?;
    verdict(&rows, s.threshold, &mut out);
    Ok(out)
}
