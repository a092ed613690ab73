//! Built-in densities, selected by name:
//!
//! - `uniform`
//! - `cosine[:a[:k[:phase]]]`: `1 + a cos(2πk(x − x₀)/L + phase)`, default `a = 0.2, k = 1`
//! - `linear-tilt[:s]`: `1 + s(2(x − x₀)/L − 1)`, default `s = 0.2`
//! - `gaussian:mean:variance`: cell averages of `N(mean, variance)`
//! - `csv:path`: `x,value` file on the configured grid
//!
//! All are normalised to unit mass on the grid.

use std::f64::consts::PI;
use std::path::Path;

use bridgelab_core::jko::gaussian_cells;
use bridgelab_core::{GridDensity, GridSpec};
use thiserror::Error;

use crate::csv::{read_density, CsvError};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown density `{0}` (expected uniform, cosine, linear-tilt, gaussian or csv:PATH)")]
    Unknown(String),
    #[error("density `{name}`: bad parameter `{param}`")]
    BadParameter { name: String, param: String },
    #[error("density `{name}`: {reason}")]
    Invalid { name: String, reason: String },
    #[error(transparent)]
    Csv(#[from] CsvError),
}

fn params(name: &str, rest: &[&str], defaults: &[f64]) -> Result<Vec<f64>, CatalogError> {
    if rest.len() > defaults.len() {
        return Err(CatalogError::BadParameter { name: name.to_string(), param: rest.join(":") });
    }
    let mut out = defaults.to_vec();
    for (slot, s) in out.iter_mut().zip(rest) {
        *slot = s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CatalogError::BadParameter { name: name.to_string(), param: s.to_string() })?;
    }
    Ok(out)
}

pub fn density(spec: &str, grid: &GridSpec) -> Result<GridDensity, CatalogError> {
    let spec = spec.trim();
    if let Some(path) = spec.strip_prefix("csv:") {
        let rho = read_density(Path::new(path))?;
        let same = rho.grid().aligned_offset(grid) == Some(0) && rho.n_cells() == grid.n_cells;
        if !same {
            return Err(CatalogError::Invalid {
                name: spec.to_string(),
                reason: format!("file grid {:?} differs from configured grid {:?}", rho.grid(), grid),
            });
        }
        return Ok(GridDensity::normalized(*grid, rho.into_values()).expect("values already validated"));
    }
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or("");
    let rest: Vec<&str> = parts.collect();
    let (x0, len) = (grid.origin, grid.length);
    let invalid = |reason: String| CatalogError::Invalid { name: spec.to_string(), reason };
    let built = match name {
        "uniform" => {
            params(name, &rest, &[])?;
            Ok(GridDensity::uniform(*grid))
        }
        "cosine" => {
            let p = params(name, &rest, &[0.2, 1.0, 0.0])?;
            if p[0].abs() >= 1.0 {
                return Err(invalid("amplitude must be below 1 in magnitude".into()));
            }
            GridDensity::from_fn(*grid, |x| 1.0 + p[0] * (2.0 * PI * p[1] * (x - x0) / len + p[2]).cos())
        }
        "linear-tilt" => {
            let p = params(name, &rest, &[0.2])?;
            if p[0].abs() >= 1.0 {
                return Err(invalid("slope must be below 1 in magnitude".into()));
            }
            GridDensity::from_fn(*grid, |x| 1.0 + p[0] * (2.0 * (x - x0) / len - 1.0))
        }
        "gaussian" => {
            if rest.len() != 2 {
                return Err(CatalogError::BadParameter { name: name.to_string(), param: rest.join(":") });
            }
            let p = params(name, &rest, &[0.0, 1.0])?;
            if !(p[1] > 0.0) {
                return Err(invalid("variance must be positive".into()));
            }
            GridDensity::normalized(*grid, gaussian_cells(grid, p[0], p[1]))
        }
        _ => return Err(CatalogError::Unknown(spec.to_string())),
    };
    built.map_err(|e| invalid(e.to_string()))
}
