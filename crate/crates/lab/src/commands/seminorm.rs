//! `seminorm-check`: the torus seminorm inequalities on seeded random
//! band-limited functions, single-mode closed forms and the Gaussian
//! moment table.

use std::f64::consts::PI;
use std::path::Path;

use bridgelab_core::seminorm::{
    fd_identity_check, gaussian_moment_table, h_closed_form, h_function, h_upper_bound, uksq_bound_check, uksq_closed_form, xee_scaling_values,
    TorusFunction, XEE_TOL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CmdError, Outcome};
use crate::config::Config;
use crate::csv::Table;

pub const DEFAULTS: &[(&str, &str)] = &[
    ("seed", "0"),
    ("count", "50"),
    ("n_modes", "32"),
    ("max_k", "8"),
    ("eps_min", "0.05"),
    ("eps_max", "1"),
    ("alpha_min", "0.05"),
    ("alpha_max", "20"),
    ("omega_min", "0.1"),
    ("omega_max", "20"),
    ("omega_points", "30"),
    ("identity_tol", "1e-8"),
    ("moment_tol", "1e-12"),
];

/// One row of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct SeminormSettings {
    pub seed: u64,
    pub count: usize,
    pub n_modes: usize,
    pub max_k: i64,
    pub eps: (f64, f64),
    pub alpha: (f64, f64),
    pub omegas: Vec<f64>,
    pub identity_tol: f64,
    pub moment_tol: f64,
}

impl SeminormSettings {
    pub fn from_config(cfg: &Config) -> Result<Self, CmdError> {
        let positive_range = |lo: &str, hi: &str| -> Result<(f64, f64), CmdError> {
            let (a, b) = (cfg.f64(lo)?, cfg.f64(hi)?);
            if !(a > 0.0 && b >= a) {
                return Err(CmdError::Config(format!("need 0 < {lo} <= {hi}, got {a}, {b}")));
            }
            Ok((a, b))
        };
        let (w0, w1) = positive_range("omega_min", "omega_max")?;
        let points = cfg.usize("omega_points")?;
        let omegas = match points {
            0 => Vec::new(),
            1 => vec![w0],
            _ => (0..points).map(|i| w0 + (w1 - w0) * i as f64 / (points - 1) as f64).collect(),
        };
        let n_modes = cfg.usize("n_modes")?;
        let max_k = cfg.usize("max_k")?;
        if !n_modes.is_power_of_two() || max_k == 0 || max_k > n_modes / 4 {
            return Err(CmdError::Config(format!("need n_modes a power of two and 1 <= max_k <= n_modes/4, got {n_modes}, {max_k}")));
        }
        Ok(Self {
            seed: cfg.u64("seed")?,
            count: cfg.usize("count")?,
            n_modes,
            max_k: max_k as i64,
            eps: positive_range("eps_min", "eps_max")?,
            alpha: positive_range("alpha_min", "alpha_max")?,
            omegas,
            identity_tol: cfg.f64("identity_tol")?,
            moment_tol: cfg.f64("moment_tol")?,
        })
    }
}

fn log_uniform<R: Rng>(rng: &mut R, (a, b): (f64, f64)) -> f64 {
    if a == b {
        return a;
    }
    (a.ln() + (b.ln() - a.ln()) * rng.random::<f64>()).exp()
}

pub fn cases(s: &SeminormSettings) -> Result<Vec<Case>, CmdError> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut out = Vec::new();
    let tol = s.identity_tol;

    for i in 0..s.count {
        let u = TorusFunction::random_real(s.n_modes, s.max_k, &mut rng)?;
        let e = log_uniform(&mut rng, s.eps);
        let c = fd_identity_check(&u, e)?;
        out.push(Case { name: format!("fd_identity_{i}"), lhs: c.lhs, rhs: c.rhs, pass: c.abs_error() <= tol });
    }
    let mode = TorusFunction::exponential(s.n_modes, 1)?;
    for (i, &omega) in s.omegas.iter().enumerate() {
        let c = uksq_bound_check(&mode, omega / (2.0 * PI))?;
        let exact = uksq_closed_form(omega);
        out.push(Case { name: format!("uksq_mode_{i}"), lhs: c.lhs, rhs: exact, pass: (c.lhs - exact).abs() <= tol });
        out.push(Case { name: format!("uksq_bound_{i}"), lhs: c.lhs, rhs: c.rhs, pass: c.lhs <= c.rhs + tol });
    }
    for i in 0..s.count {
        let u = TorusFunction::random_real(s.n_modes, s.max_k, &mut rng)?;
        let e = log_uniform(&mut rng, s.eps);
        let c = uksq_bound_check(&u, e)?;
        out.push(Case { name: format!("uksq_random_{i}"), lhs: c.lhs, rhs: c.rhs, pass: c.lhs <= c.rhs + tol });
    }
    for i in 0..s.count {
        let u = TorusFunction::random_real(s.n_modes, s.max_k, &mut rng)?;
        let e = log_uniform(&mut rng, s.eps);
        let alpha = log_uniform(&mut rng, s.alpha);
        let c = xee_scaling_values(&u, e, alpha)?;
        out.push(Case { name: format!("xee_{i}"), lhs: c.lhs, rhs: c.rhs, pass: c.lhs <= c.rhs + XEE_TOL });
    }
    for m in gaussian_moment_table(&s.omegas) {
        out.push(Case { name: format!("moment_{}_{}", m.name, m.omega), lhs: m.quadrature, rhs: m.exact, pass: m.abs_error() <= s.moment_tol });
    }
    for &sv in &[0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
        let h = h_function(sv)?;
        let exact = h_closed_form(sv);
        out.push(Case { name: format!("h_closed_form_{sv}"), lhs: h, rhs: exact, pass: (h - exact).abs() <= 1e-12 * exact.abs().max(1e-300) + 1e-15 });
        let bound = h_upper_bound(sv);
        out.push(Case { name: format!("h_bound_{sv}"), lhs: h, rhs: bound, pass: h <= bound });
    }
    Ok(out)
}

pub fn run(cfg: &Config, dir: &Path) -> Result<Outcome, CmdError> {
    let s = SeminormSettings::from_config(cfg)?;
    let cases = cases(&s)?;
    let mut out = Outcome::new();
    let mut t = Table::new(&cfg.hash(), &["case", "lhs", "rhs", "pass"]);
    for c in &cases {
        t.row(&[c.name.as_str().into(), c.lhs.into(), c.rhs.into(), c.pass.into()]);
        out.check(c.pass, || format!("{}: lhs = {} rhs = {}", c.name, c.lhs, c.rhs));
    }
    out.write(&t, dir, "seminorm.csv")?;
    let passed = cases.iter().filter(|c| c.pass).count();
    out.note(format!("{passed}/{} seminorm cases pass", cases.len()));
    Ok(out)
}
