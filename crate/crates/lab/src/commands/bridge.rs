//! `bridge-solve`: one static bridge at a single ε, with the transport
//! potentials of the pair.

use std::path::Path;

use bridgelab_core::bridge::{solve_bridge_with, BridgeOptions};
use bridgelab_core::wasserstein::{potentials, w2_squared};

use super::{grid_from, validate_ladder, CmdError, Outcome};
use crate::catalog::density;
use crate::config::Config;
use crate::csv::{pair_table, Table};

pub const DEFAULTS: &[(&str, &str)] = &[
    ("length", "1"),
    ("n", "256"),
    ("rho0", "uniform"),
    ("rho1", "cosine:0.2"),
    ("epsilon", "0.1"),
    ("tol", "1e-10"),
    ("max_iter", "100000"),
    ("write_coupling", "false"),
    ("seed", "0"),
];

pub fn run(cfg: &Config, dir: &Path) -> Result<Outcome, CmdError> {
    let grid = grid_from(cfg, "n", 0.0)?;
    let rho0 = density(cfg.str("rho0"), &grid)?;
    let rho1 = density(cfg.str("rho1"), &grid)?;
    let p = validate_ladder(&[cfg.f64("epsilon")?], &grid)?[0];
    let tol = cfg.f64("tol")?;
    let opts = BridgeOptions::new(tol, cfg.usize("max_iter")?);
    let sol = solve_bridge_with(&rho0, &rho1, &p, &opts)?;
    let w2_sq = w2_squared(&rho0, &rho1);
    let e = p.epsilon();
    let f_eps = sol.j_value - w2_sq / (e * e);

    let hash = cfg.hash();
    let mut out = Outcome::new();
    let mut t = Table::new(&hash, &["epsilon", "j_value", "w2_sq", "F_eps", "marginal_error", "iterations"]);
    t.row(&[e.into(), sol.j_value.into(), w2_sq.into(), f_eps.into(), sol.marginal_error.into(), sol.iterations.into()]);
    out.write(&t, dir, "bridge.csv")?;
    out.note(format!("epsilon={e} j_value={:.6e} w2_sq={:.6e} F_eps={:.6e} iterations={}", sol.j_value, w2_sq, f_eps, sol.iterations));

    match potentials(&rho0, &rho1) {
        Ok(pot) => {
            let mut px = Table::new(&hash, &["x", "phi", "map"]);
            for ((x, phi), map) in grid.centers().into_iter().zip(pot.phi_on_grid()).zip(pot.map_on_grid()) {
                px.row(&[x.into(), phi.into(), map.into()]);
            }
            let mut py = Table::new(&hash, &["y", "phi_star"]);
            for (y, ps) in grid.centers().into_iter().zip(pot.phi_star_on_grid()) {
                py.row(&[y.into(), ps.into()]);
            }
            out.write(&px, dir, "potentials_x.csv")?;
            out.write(&py, dir, "potentials_y.csv")?;
        }
        Err(e) => out.note(format!("potentials skipped: {e}")),
    }
    if cfg.bool("write_coupling")? {
        out.write(&pair_table(&hash, &sol.q), dir, "coupling.csv")?;
    }
    out.check(sol.marginal_error <= tol, || format!("marginal constraint: L1 defect {} exceeds tol {tol}", sol.marginal_error));
    Ok(out)
}
