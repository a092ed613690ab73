//! `tildeq-report`: normalisation `Z_ε`, marginal defects and `χ_ε` of the
//! tilde coupling along an ε ladder, with the lower-bound identity.

use std::path::Path;

use bridgelab_core::bridge::{lower_bound_check, LowerBoundReport};
use bridgelab_core::tildeq::{build_tilde_q, marginal_convergence_report, z_uniform_closed_form, MarginalReport};
use bridgelab_core::wasserstein::potentials;
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
    ("epsilons", "0.2,0.1,0.05"),
    ("tol", "1e-10"),
    ("chi_bound", "3"),
    ("lower_bound", "true"),
    ("z_tol", "1e-6"),
    ("seed", "0"),
];

#[derive(Debug, Clone, Copy)]
struct TildeqRow {
    marginals: MarginalReport,
    chi_ok: bool,
    lower: Option<LowerBoundReport>,
}

pub fn run(cfg: &Config, dir: &Path) -> Result<Outcome, CmdError> {
    let grid = grid_from(cfg, "n", 0.0)?;
    let rho0 = density(cfg.str("rho0"), &grid)?;
    let rho1 = density(cfg.str("rho1"), &grid)?;
    let ladder = validate_ladder(&cfg.f64_list("epsilons")?, &grid)?;
    let tol = cfg.f64("tol")?;
    let chi_bound = cfg.f64("chi_bound")?;
    let with_lower = cfg.bool("lower_bound")?;
    let z_tol = cfg.f64("z_tol")?;
    let pot = potentials(&rho0, &rho1)?;

    let rows: Vec<TildeqRow> = ladder
        .par_iter()
        .map(|p| -> Result<TildeqRow, CmdError> {
            let bundle = build_tilde_q(&rho0, &rho1, &pot, p)?;
            let marginals = marginal_convergence_report(&bundle, &rho0, &rho1)?;
            let lower = if with_lower { Some(lower_bound_check(&rho0, &rho1, p, tol)?) } else { None };
            Ok(TildeqRow { marginals, chi_ok: bundle.chi_within(chi_bound), lower })
        })
        .collect::<Result<_, _>>()?;

    let hash = cfg.hash();
    let mut out = Outcome::new();
    // chi_min/chi_max over all cells; the interior (distance >= 3 epsilon
    // from the boundary) is empty once 6 epsilon exceeds L
    let mut t = Table::new(&hash, &["epsilon", "Z", "l1_pi0", "l1_pi1", "chi_min", "chi_max", "chi_interior_min", "chi_interior_max"]);
    for r in &rows {
        let m = &r.marginals;
        let (lo, hi) = (m.chi_range.0.min(m.chi_boundary_range.0), m.chi_range.1.max(m.chi_boundary_range.1));
        let (ilo, ihi) = if m.chi_range.0 <= m.chi_range.1 { m.chi_range } else { (f64::NAN, f64::NAN) };
        t.row(&[m.epsilon.into(), m.z_epsilon.into(), m.l1_pi0.into(), m.l1_pi1.into(), lo.into(), hi.into(), ilo.into(), ihi.into()]);
        out.note(format!("epsilon={} Z={:.9} l1_pi0={:.3e} chi=[{lo:.4}, {hi:.4}] interior=[{ilo:.4}, {ihi:.4}]", m.epsilon, m.z_epsilon, m.l1_pi0));
        out.check(r.chi_ok, || format!("chi bound: interior chi range [{}, {}] at epsilon = {} leaves [1/{chi_bound}, {chi_bound}]", m.chi_range.0, m.chi_range.1, m.epsilon));
    }
    out.write(&t, dir, "tildeq.csv")?;

    let dev: Vec<f64> = rows.iter().map(|r| (r.marginals.z_epsilon - 1.0).abs()).collect();
    out.check(dev.windows(2).all(|w| w[1] <= w[0]), || format!("Z convergence: |Z - 1| = {dev:?} is not nonincreasing along the ladder"));

    let uniform_pair = cfg.str("rho0").trim() == "uniform" && cfg.str("rho1").trim() == "uniform" && grid.length == 1.0;
    if uniform_pair {
        for r in &rows {
            let m = &r.marginals;
            let exact = z_uniform_closed_form(m.epsilon);
            out.check((m.z_epsilon - exact).abs() <= z_tol, || format!("Z closed form: Z = {} vs {exact} at epsilon = {} (tolerance {z_tol})", m.z_epsilon, m.epsilon));
        }
    }

    if with_lower {
        let mut lb = Table::new(&hash, &["epsilon", "relative_entropy", "chain_value", "log_Z", "identity_error", "pass"]);
        for r in &rows {
            let l = r.lower.expect("computed when enabled");
            lb.row(&[l.epsilon.into(), l.relative_entropy.into(), l.chain_value.into(), l.z_epsilon.ln().into(), l.identity_error.into(), l.pass.into()]);
            out.check(l.pass, || {
                format!("lower bound: chain value {} (>= -1e-4) and identity error {} (<= 1e-4) at epsilon = {}", l.chain_value, l.identity_error, l.epsilon)
            });
        }
        out.write(&lb, dir, "lower_bound.csv")?;
    }
    Ok(out)
}
