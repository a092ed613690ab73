//! `jko-run`: the minimizing-movement scheme for the heat flow, checked
//! against the variance law `Var(ρ_T) = Var(ρ₀) + 2T` and the discrete energy
//! dissipation inequality.

use std::path::Path;

use bridgelab_core::heat::evolve;
use bridgelab_core::jko::{jko_flow, JkoConfig, JkoFlow};
use bridgelab_core::{GridDensity, KernelParams};

use super::{grid_from, CmdError, Outcome};
use crate::catalog::density;
use crate::config::Config;
use crate::csv::{density_table, Table};

pub const DEFAULTS: &[(&str, &str)] = &[
    ("origin", "-1.5"),
    ("length", "3"),
    ("n", "3000"),
    ("rho0", "gaussian:0:0.04"),
    ("h", "1e-3"),
    ("steps", "50"),
    ("m", "2000"),
    ("variance_tol", "1e-3"),
    ("seed", "0"),
];

#[derive(Debug, Clone)]
pub struct JkoRun {
    pub rho0: GridDensity,
    pub config: JkoConfig,
    pub steps: usize,
}

impl JkoRun {
    pub fn from_config(cfg: &Config) -> Result<Self, CmdError> {
        let grid = grid_from(cfg, "n", cfg.f64("origin")?)?;
        let rho0 = density(cfg.str("rho0"), &grid)?;
        let config = JkoConfig::new(cfg.f64("h")?, cfg.usize("m")?)?;
        let steps = cfg.usize("steps")?;
        if steps == 0 {
            return Err(CmdError::Config("steps must be at least 1".into()));
        }
        Ok(Self { rho0, config, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.config.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JkoSummary {
    pub variance_initial: f64,
    pub variance_terminal: f64,
    /// `Var(ρ₀) + 2T`.
    pub variance_target: f64,
    /// L1 distance of the terminal density from the heat semigroup applied to `ρ₀`.
    pub l1_heat: f64,
}

pub fn summarize(run: &JkoRun, flow: &JkoFlow) -> Result<JkoSummary, CmdError> {
    let t = run.horizon();
    let terminal = flow.densities.last().expect("at least one step");
    let exact = evolve(&run.rho0, &KernelParams::from_h(t)?).density;
    let first = flow.records[0].variance;
    Ok(JkoSummary {
        variance_initial: first,
        variance_terminal: flow.records.last().expect("records").variance,
        variance_target: first + 2.0 * t,
        l1_heat: terminal.l1_distance(&exact)?,
    })
}

pub fn run(cfg: &Config, dir: &Path) -> Result<Outcome, CmdError> {
    let r = JkoRun::from_config(cfg)?;
    let flow = jko_flow(&r.rho0, &r.config, r.steps)?;
    let s = summarize(&r, &flow)?;
    let tol = cfg.f64("variance_tol")?;

    let hash = cfg.hash();
    let mut out = Outcome::new();
    let mut t = Table::new(&hash, &["step", "t", "variance", "entropy", "w2_step"]);
    for rec in &flow.records {
        t.row(&[rec.step.into(), rec.t.into(), rec.variance.into(), rec.entropy.into(), rec.w2_step.into()]);
        if rec.step > 0 {
            out.check(rec.dissipation_holds(), || {
                format!("energy dissipation: W2^2/2h + E(rho^n) - E(rho^(n-1)) = {} > 0 at step {}", rec.dissipation, rec.step)
            });
        }
    }
    out.write(&t, dir, "jko.csv")?;
    let mut sum = Table::new(&hash, &["steps", "h", "t", "variance_initial", "variance_terminal", "variance_target", "l1_heat"]);
    sum.row(&[
        r.steps.into(),
        r.config.h.into(),
        r.horizon().into(),
        s.variance_initial.into(),
        s.variance_terminal.into(),
        s.variance_target.into(),
        s.l1_heat.into(),
    ]);
    out.write(&sum, dir, "jko_summary.csv")?;
    out.write(&density_table(&hash, flow.densities.last().expect("terminal")), dir, "jko_terminal.csv")?;
    out.note(format!(
        "T={} variance {:.8} -> {:.8} (target {:.8}), L1 to heat semigroup {:.3e}",
        r.horizon(),
        s.variance_initial,
        s.variance_terminal,
        s.variance_target,
        s.l1_heat
    ));
    let dv = s.variance_terminal - s.variance_target;
    out.check(dv.abs() <= tol, || format!("variance law: terminal variance {} differs from {} by {dv} (tolerance {tol})", s.variance_terminal, s.variance_target));
    Ok(out)
}
