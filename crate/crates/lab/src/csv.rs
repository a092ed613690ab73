//! CSV output (comma-separated, `.` decimal, LF endings) and density input.
//!
//! Each file starts with a comment line `# bridgelab <version> config_sha256=<hash>`.
//! Reals are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bridgelab_core::{GridDensity, GridSpec, PairDensity};
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}, line {line}: {reason}")]
    Format { path: String, line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field<'a> {
    Real(f64),
    Int(i64),
    Uint(u64),
    Bool(bool),
    Text(&'a str),
}

impl From<f64> for Field<'_> {
    fn from(x: f64) -> Self {
        Field::Real(x)
    }
}

impl From<usize> for Field<'_> {
    fn from(x: usize) -> Self {
        Field::Uint(x as u64)
    }
}

impl From<u64> for Field<'_> {
    fn from(x: u64) -> Self {
        Field::Uint(x)
    }
}

impl From<i64> for Field<'_> {
    fn from(x: i64) -> Self {
        Field::Int(x)
    }
}

impl From<bool> for Field<'_> {
    fn from(x: bool) -> Self {
        Field::Bool(x)
    }
}

impl<'a> From<&'a str> for Field<'a> {
    fn from(x: &'a str) -> Self {
        Field::Text(x)
    }
}

pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// In-memory CSV document.
#[derive(Debug, Clone)]
pub struct Table {
    columns: usize,
    buf: String,
}

impl Table {
    pub fn new(config_hash: &str, header: &[&str]) -> Self {
        let mut buf = format!("# bridgelab {VERSION} config_sha256={config_hash}\n");
        buf.push_str(&header.join(","));
        buf.push('\n');
        Self { columns: header.len(), buf }
    }

    pub fn row(&mut self, fields: &[Field<'_>]) {
        assert_eq!(fields.len(), self.columns, "row width");
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            match *f {
                Field::Real(x) => self.buf.push_str(&format_real(x)),
                Field::Int(x) => {
                    let _ = write!(self.buf, "{x}");
                }
                Field::Uint(x) => {
                    let _ = write!(self.buf, "{x}");
                }
                Field::Bool(x) => self.buf.push_str(if x { "true" } else { "false" }),
                Field::Text(s) => self.buf.push_str(s),
            }
        }
        self.buf.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf, CsvError> {
        let io = |path: &Path, source| CsvError::Io { path: path.display().to_string(), source };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let path = dir.join(name);
        std::fs::write(&path, self.buf.as_bytes()).map_err(|e| io(&path, e))?;
        Ok(path)
    }
}

/// `x,value` rows at cell centres.
pub fn density_table(config_hash: &str, rho: &GridDensity) -> Table {
    let mut t = Table::new(config_hash, &["x", "value"]);
    let g = rho.grid();
    for (i, &v) in rho.values().iter().enumerate() {
        t.row(&[g.center(i).into(), v.into()]);
    }
    t
}

/// `x,y,value` rows, x outermost.
pub fn pair_table(config_hash: &str, q: &PairDensity) -> Table {
    let mut t = Table::new(config_hash, &["x", "y", "value"]);
    let g = q.grid();
    let n = g.n_cells;
    for i in 0..n {
        for j in 0..n {
            t.row(&[g.center(i).into(), g.center(j).into(), q.get(i, j).into()]);
        }
    }
    t
}

/// Reads `x,value` rows (cell centres, equally spaced, increasing). Lines
/// starting with `#` and a non-numeric header are skipped. The result is
/// renormalised to unit mass.
pub fn read_density(path: &Path) -> Result<GridDensity, CsvError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CsvError::Io { path: p.clone(), source })?;
    let fail = |line: usize, reason: String| CsvError::Format { path: p.clone(), line, reason };
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a.trim(), b.trim()),
            _ => return Err(fail(i + 1, "expected two columns".into())),
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(v)) => {
                xs.push(x);
                vs.push(v);
            }
            _ if xs.is_empty() && vs.is_empty() => continue,
            _ => return Err(fail(i + 1, format!("cannot parse `{line}`"))),
        }
    }
    if xs.len() < 2 {
        return Err(fail(0, "need at least two rows".into()));
    }
    let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    for (i, w) in xs.windows(2).enumerate() {
        if !(dx > 0.0) || ((w[1] - w[0]) - dx).abs() > 1e-6 * dx {
            return Err(fail(i + 2, "x values are not equally spaced and increasing".into()));
        }
    }
    let grid = GridSpec::new(xs[0] - 0.5 * dx, dx * xs.len() as f64, xs.len()).map_err(|e| fail(0, e.to_string()))?;
    GridDensity::normalized(grid, vs).map_err(|e| fail(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let mut t = Table::new("abc", &["epsilon", "iterations", "pass"]);
        t.row(&[0.1.into(), 12usize.into(), true.into()]);
        assert_eq!(t.as_str(), format!("# bridgelab {VERSION} config_sha256=abc\nepsilon,iterations,pass\n1.0000000000000001e-1,12,true\n"));
    }

    #[test]
    fn reals_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_real(f64::INFINITY), "inf");
    }

    #[test]
    fn density_round_trip() {
        let g = GridSpec::interval(2.0, 16).unwrap();
        let rho = GridDensity::from_fn(g, |x| 1.0 + 0.3 * x).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = density_table("h", &rho).write(dir.path(), "rho.csv").unwrap();
        let back = read_density(&path).unwrap();
        assert_eq!(back.n_cells(), 16);
        assert!((back.grid().origin).abs() < 1e-12 && (back.grid().length - 2.0).abs() < 1e-12);
        for (a, b) in back.values().iter().zip(rho.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_uneven_spacing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,value\n0.1,1\n0.2,1\n0.4,1\n").unwrap();
        assert!(matches!(read_density(&path), Err(CsvError::Format { .. })));
    }
}
