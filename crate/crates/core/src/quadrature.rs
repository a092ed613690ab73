//! Composite Gauss–Legendre quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f` with `panels` equal subintervals.
    pub fn integrate(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let w = (b - a) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * w;
            let mut s = 0.0;
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                s += wt * f(mid + 0.5 * w * x);
            }
            acc += 0.5 * w * s;
        }
        acc
    }

    /// Nodes and weights of the composite rule on `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let w = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * w;
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * w * x);
                ws.push(0.5 * w * wt);
            }
        }
        (xs, ws)
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Truncation radius of [`GaussianWeightRule`]: `e^{−64}` is below `1e−27`.
pub const GAUSSIAN_CUTOFF: f64 = 8.0;

/// Quadrature for `∫_ℝ e^{−z²} g(z) dz`: composite Gauss–Legendre on
/// `[−8, 8]` with the weight folded into the weights. Unlike plain
/// Gauss–Hermite this stays accurate for oscillatory `g` such as `cos(ωz)`
/// with `ω` up to a few tens.
#[derive(Debug, Clone)]
pub struct GaussianWeightRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussianWeightRule {
    pub fn new(panels: usize, order: usize) -> Self {
        let gl = GaussLegendre::new(order);
        let (nodes, mut weights) = gl.composite(-GAUSSIAN_CUTOFF, GAUSSIAN_CUTOFF, panels);
        for (w, z) in weights.iter_mut().zip(&nodes) {
            *w *= libm::exp(-z * z);
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * g(z)).sum()
    }
}

impl Default for GaussianWeightRule {
    /// 64 panels of 16 points.
    fn default() -> Self {
        Self::new(64, 16)
    }
}
