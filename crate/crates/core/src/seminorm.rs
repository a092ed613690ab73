//! Fourier seminorm on the unit torus and the ramp-kernel convolution.
//!
//! For `u(x) = Σ u_k e^{2πikx}`:
//!
//! - `‖u‖_ε² = Σ |u_k|² (1 − e^{−π²k²ε²})`;
//! - `κ_ε^z(s) = ε⁻¹ κ^z(s/ε)` with `κ^z(σ) = (2/z²)(z + σ)` on `[−z, 0]` for
//!   `z > 0` and `−(2/z²)(z + σ)` on `[0, −z]` for `z < 0`, a unit-mass ramp;
//!   its Fourier multiplier is `−(2/(ω²z²))[e^{iωz} − 1 − iωz]`, `ω = 2πkε`.
//!
//! The checks here compare quadrature in `z` (weight `e^{−z²}`) and exact
//! point evaluation in `x` against the spectral closed forms.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::quadrature::{GaussLegendre, GaussianWeightRule};
use crate::wasserstein::TransportPotentials;

/// Real function on `ℝ/ℤ` held by its Fourier coefficients
/// `u_k`, `k = −N/2, …, N/2 − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusFunction {
    n_modes: usize,
    coeffs: Vec<Complex64>,
}

fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n).map(|m| Complex64::from_polar(1.0, sign * 2.0 * PI * m as f64 / n as f64)).collect()
}

impl TorusFunction {
    pub fn new(n_modes: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if n_modes < 2 || !n_modes.is_power_of_two() {
            return Err(Error::InvalidParameter { name: "n_modes", value: n_modes as f64 });
        }
        if coeffs.len() != n_modes {
            return Err(Error::ShapeMismatch { expected: n_modes, got: coeffs.len() });
        }
        Ok(Self { n_modes, coeffs })
    }

    pub fn zero(n_modes: usize) -> Result<Self> {
        Self::new(n_modes, vec![Complex64::new(0.0, 0.0); n_modes])
    }

    /// Sum of the listed modes `(k, u_k)`; repeated `k` accumulate.
    pub fn from_modes(n_modes: usize, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut u = Self::zero(n_modes)?;
        for &(k, c) in modes {
            let idx = u.index(k).ok_or(Error::InvalidParameter { name: "mode", value: k as f64 })?;
            u.coeffs[idx] += c;
        }
        Ok(u)
    }

    /// `e^{2πikx}`.
    pub fn exponential(n_modes: usize, k: i64) -> Result<Self> {
        Self::from_modes(n_modes, &[(k, Complex64::new(1.0, 0.0))])
    }

    /// `cos(2πkx)`.
    pub fn cosine(n_modes: usize, k: i64) -> Result<Self> {
        let h = Complex64::new(0.5, 0.0);
        if k == 0 {
            return Self::from_modes(n_modes, &[(0, Complex64::new(1.0, 0.0))]);
        }
        Self::from_modes(n_modes, &[(k, h), (-k, h)])
    }

    /// Real function with modes `|k| ≤ max_k`, real and imaginary parts of
    /// each `u_k` (`k ≥ 0`) uniform in `[−1, 1]`, `u_{−k} = conj(u_k)`.
    pub fn random_real<R: Rng + ?Sized>(n_modes: usize, max_k: i64, rng: &mut R) -> Result<Self> {
        if max_k < 0 || max_k as usize >= n_modes / 2 {
            return Err(Error::InvalidParameter { name: "max_k", value: max_k as f64 });
        }
        let mut modes = Vec::with_capacity(2 * max_k as usize + 1);
        let mut draw = || rng.random_range(-1.0..=1.0);
        modes.push((0, Complex64::new(draw(), 0.0)));
        for k in 1..=max_k {
            let c = Complex64::new(draw(), draw());
            modes.push((k, c));
            modes.push((-k, c.conj()));
        }
        Self::from_modes(n_modes, &modes)
    }

    /// Discrete Fourier transform of `N` equispaced samples `f(j/N)`.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        let w = twiddles(n, -1.0);
        let half = (n / 2) as i64;
        let coeffs = (0..n)
            .map(|idx| {
                let k = idx as i64 - half;
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &f) in samples.iter().enumerate() {
                    acc += w[(k * j as i64).rem_euclid(n as i64) as usize] * f;
                }
                acc / n as f64
            })
            .collect();
        Self::new(n, coeffs)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn index(&self, k: i64) -> Option<usize> {
        let half = (self.n_modes / 2) as i64;
        (-half..half).contains(&k).then(|| (k + half) as usize)
    }

    /// Wavenumber of storage slot `idx`.
    #[inline]
    pub fn wavenumber(&self, idx: usize) -> i64 {
        idx as i64 - (self.n_modes / 2) as i64
    }

    /// `u_k`, zero outside the stored band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.index(k).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Largest `|k|` with a nonzero coefficient.
    pub fn max_mode(&self) -> u64 {
        (0..self.n_modes)
            .filter(|&i| self.coeffs[i].norm_sqr() > 0.0)
            .map(|i| self.wavenumber(i).unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (0..self.n_modes)
            .map(|i| self.coeffs[i] * Complex64::from_polar(1.0, 2.0 * PI * self.wavenumber(i) as f64 * x))
            .sum()
    }

    /// Values at `j/N`, `j = 0, …, N−1`.
    pub fn samples_complex(&self) -> Vec<Complex64> {
        let n = self.n_modes;
        let w = twiddles(n, 1.0);
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| self.coeffs[i] * w[(self.wavenumber(i) * j as i64).rem_euclid(n as i64) as usize])
                    .sum()
            })
            .collect()
    }

    /// Real parts of [`samples_complex`](Self::samples_complex).
    pub fn samples(&self) -> Vec<f64> {
        self.samples_complex().iter().map(|c| c.re).collect()
    }

    /// `u_{−k} = conj(u_k)` within `tol`, and a real Nyquist coefficient.
    pub fn is_real(&self, tol: f64) -> bool {
        let half = (self.n_modes / 2) as i64;
        (1..half).all(|k| (self.coeff(-k) - self.coeff(k).conj()).norm() <= tol)
            && self.coeff(0).im.abs() <= tol
            && self.coeff(-half).im.abs() <= tol
    }

    pub fn mean(&self) -> Complex64 {
        self.coeff(0)
    }

    /// `‖u − mean(u)‖²_{L²(𝕋)}`.
    pub fn centered_l2_sq(&self) -> f64 {
        (0..self.n_modes).filter(|&i| self.wavenumber(i) != 0).map(|i| self.coeffs[i].norm_sqr()).sum()
    }

    /// Multiply mode `k` by `m(k)`.
    pub fn apply_multiplier(&self, mut m: impl FnMut(i64) -> Complex64) -> Self {
        let coeffs = (0..self.n_modes).map(|i| self.coeffs[i] * m(self.wavenumber(i))).collect();
        Self { n_modes: self.n_modes, coeffs }
    }
}

/// `‖u‖_ε² = Σ |u_k|² (1 − e^{−π²k²ε²})`.
pub fn seminorm_sq(u: &TorusFunction, epsilon: f64) -> f64 {
    (0..u.n_modes)
        .map(|i| {
            let k = u.wavenumber(i) as f64;
            u.coeffs[i].norm_sqr() * -libm::expm1(-PI * PI * k * k * epsilon * epsilon)
        })
        .sum()
}

/// Below this `|ωz|` the multiplier is evaluated by its Taylor polynomial.
pub const KAPPA_TAYLOR_THRESHOLD: f64 = 1e-3;

/// The ramp kernel `κ_ε^z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaKernel {
    pub z: f64,
    pub epsilon: f64,
}

impl KappaKernel {
    pub fn new(z: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter { name: "epsilon", value: epsilon });
        }
        if !z.is_finite() {
            return Err(Error::InvalidParameter { name: "z", value: z });
        }
        Ok(Self { z, epsilon })
    }

    /// `κ_ε^z(s)`; for `z = 0` the kernel is a Dirac mass and this returns 0.
    pub fn value(&self, s: f64) -> f64 {
        let z = self.z;
        let sigma = s / self.epsilon;
        let c = 2.0 / (z * z * self.epsilon);
        if z > 0.0 && (-z..=0.0).contains(&sigma) {
            c * (z + sigma)
        } else if z < 0.0 && (0.0..=-z).contains(&sigma) {
            -c * (z + sigma)
        } else {
            0.0
        }
    }

    /// Total mass, `(2/z²) · z²/2 = 1`.
    pub fn mass(&self) -> f64 {
        1.0
    }

    /// Fourier coefficient at wavenumber `k`.
    pub fn multiplier(&self, k: i64) -> Complex64 {
        kappa_multiplier(2.0 * PI * k as f64 * self.epsilon, self.z)
    }
}

/// `−(2/(ω²z²))[e^{iωz} − 1 − iωz]`, equal to 1 at `ωz = 0`.
pub fn kappa_multiplier(omega: f64, z: f64) -> Complex64 {
    let t = omega * z;
    if t.abs() < KAPPA_TAYLOR_THRESHOLD {
        let t2 = t * t;
        return Complex64::new(1.0 - t2 / 12.0 + t2 * t2 / 360.0, t / 3.0 - t * t2 / 60.0);
    }
    let e = Complex64::from_polar(1.0, t);
    (e - 1.0 - Complex64::new(0.0, t)) * (-2.0 / (t * t))
}

/// `κ_ε^z ∗ u`, exact through the Fourier multiplier.
pub fn kappa_convolve(u: &TorusFunction, z: f64, epsilon: f64) -> TorusFunction {
    if z == 0.0 {
        return u.clone();
    }
    u.apply_multiplier(|k| kappa_multiplier(2.0 * PI * k as f64 * epsilon, z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn abs_error(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Mean of `|v|²` over the `N` grid points of `𝕋`, `v` given by coefficients.
/// Exact for any coefficient set in the stored band (no aliasing of `|v|²`).
fn grid_mean_sq(coeffs: &[Complex64], n: usize, w: &[Complex64]) -> f64 {
    let half = (n / 2) as i64;
    let mut acc = 0.0;
    for j in 0..n {
        let mut v = Complex64::new(0.0, 0.0);
        for (i, c) in coeffs.iter().enumerate() {
            if c.norm_sqr() != 0.0 {
                v += c * w[((i as i64 - half) * j as i64).rem_euclid(n as i64) as usize];
            }
        }
        acc += v.norm_sqr();
    }
    acc / n as f64
}

fn require_band_limited(u: &TorusFunction) -> Result<()> {
    let m = u.max_mode();
    if m as usize > u.n_modes / 4 {
        return Err(Error::InvalidParameter { name: "max_mode", value: m as f64 });
    }
    Ok(())
}

/// `∫ e^{−z²} ∫_𝕋 |u(x + εz) − u(x)|² dx dz` against `2√π ‖u‖_ε²`.
pub fn fd_identity_check(u: &TorusFunction, epsilon: f64) -> Result<IdentityCheck> {
    require_band_limited(u)?;
    let n = u.n_modes;
    let w = twiddles(n, 1.0);
    let rule = GaussianWeightRule::default();
    let mut shifted = vec![Complex64::new(0.0, 0.0); n];
    let lhs = rule.integrate(|z| {
        for (i, s) in shifted.iter_mut().enumerate() {
            let omega = 2.0 * PI * u.wavenumber(i) as f64 * epsilon;
            *s = u.coeffs[i] * (Complex64::from_polar(1.0, omega * z) - 1.0);
        }
        grid_mean_sq(&shifted, n, &w)
    });
    Ok(IdentityCheck { lhs, rhs: 2.0 * libm::sqrt(PI) * seminorm_sq(u, epsilon) })
}

/// `∫ e^{−z²} z⁴ ∫_𝕋 |u − κ_ε^z ∗ u|² dx dz` against `(5/6)√π ‖u‖_ε²`.
pub fn uksq_bound_check(u: &TorusFunction, epsilon: f64) -> Result<IdentityCheck> {
    require_band_limited(u)?;
    let n = u.n_modes;
    let w = twiddles(n, 1.0);
    let rule = GaussianWeightRule::default();
    let mut diff = vec![Complex64::new(0.0, 0.0); n];
    let lhs = rule.integrate(|z| {
        for (i, d) in diff.iter_mut().enumerate() {
            let omega = 2.0 * PI * u.wavenumber(i) as f64 * epsilon;
            *d = u.coeffs[i] * (Complex64::new(1.0, 0.0) - kappa_multiplier(omega, z));
        }
        let z2 = z * z;
        z2 * z2 * grid_mean_sq(&diff, n, &w)
    });
    Ok(IdentityCheck { lhs, rhs: 5.0 / 6.0 * libm::sqrt(PI) * seminorm_sq(u, epsilon) })
}

/// Single-mode value of the uksq left side:
/// `(4√π/ω⁴)[2 − 2e^{−ω²/4} + (3/16)ω⁴ − ½ω²e^{−ω²/4} − ¼ω⁴e^{−ω²/4}]`.
pub fn uksq_closed_form(omega: f64) -> f64 {
    let w2 = omega * omega;
    let w4 = w2 * w2;
    let e = libm::exp(-w2 / 4.0);
    4.0 * libm::sqrt(PI) / w4 * (2.0 - 2.0 * e + 3.0 / 16.0 * w4 - 0.5 * w2 * e - 0.25 * w4 * e)
}

/// `2(1 − e^{−s}) − s²/3 − 2se^{−s} − (2/3)s²e^{−s}`, nonpositive for `s ≥ 0`.
pub fn uksq_scalar(s: f64) -> f64 {
    let e = libm::exp(-s);
    2.0 * (1.0 - e) - s * s / 3.0 - 2.0 * s * e - 2.0 / 3.0 * s * s * e
}

/// Tolerance used by [`xee_scaling_check`].
pub const XEE_TOL: f64 = 1e-10;

/// `‖u‖_{ε/α} ≤ ‖u‖_ε` for `α ≥ 1`, `‖u‖_{ε/α} ≤ ‖u‖_ε / α` for `α ≤ 1`.
pub fn xee_scaling_check(u: &TorusFunction, epsilon: f64, alpha: f64) -> Result<bool> {
    let c = xee_scaling_values(u, epsilon, alpha)?;
    Ok(c.lhs <= c.rhs + XEE_TOL)
}

/// Both sides of [`xee_scaling_check`]: `lhs = ‖u‖_{ε/α}`, `rhs` the bound.
pub fn xee_scaling_values(u: &TorusFunction, epsilon: f64, alpha: f64) -> Result<IdentityCheck> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter { name: "alpha", value: alpha });
    }
    let scaled = libm::sqrt(seminorm_sq(u, epsilon / alpha));
    let base = libm::sqrt(seminorm_sq(u, epsilon));
    let bound = if alpha >= 1.0 { base } else { base / alpha };
    Ok(IdentityCheck { lhs: scaled, rhs: bound })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentCase {
    pub xi: f64,
    pub z: f64,
    /// `φ(ξ + εz) + φ*(φ'(ξ)) − (ξ + εz)φ'(ξ)`.
    pub lhs: f64,
    /// `(z²ε²/2)(κ_ε^z ∗ φ'')(ξ)` with a finite-difference `φ''`.
    pub rhs: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentReport {
    pub cases: Vec<ExponentCase>,
    pub max_rel_error: f64,
}

/// Evaluates both sides of the change of variables for the exponent of the
/// tilde coupling. The right side uses `φ''` by central differences with step
/// `2Δx` and the real-space form `ε² ∫₀^z (z − s) φ''(ξ + εs) ds` of the
/// convolution.
pub fn exponent_identity_check(pot: &TransportPotentials, epsilon: f64, samples: &[(f64, f64)]) -> Result<ExponentReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter { name: "epsilon", value: epsilon });
    }
    let g = pot.x_grid();
    let h = 2.0 * g.dx();
    let (lo, hi) = (g.origin + h, g.end() - h);
    let phi_second = |x: f64| (pot.phi(x + h) - 2.0 * pot.phi(x) + pot.phi(x - h)) / (h * h);
    let gl = GaussLegendre::new(8);
    let mut cases = Vec::with_capacity(samples.len());
    let mut max_rel_error: f64 = 0.0;
    for &(xi, z) in samples {
        let x = xi + epsilon * z;
        for v in [xi, x] {
            if !(lo..=hi).contains(&v) {
                return Err(Error::OutOfRange(v));
            }
        }
        let t = pot.map(xi);
        let lhs = pot.phi(x) + pot.phi_star(t) - x * t;
        let panels = libm::ceil((epsilon * z).abs() / (0.25 * g.dx())).max(16.0) as usize;
        let rhs = epsilon * epsilon * gl.integrate(0.0, z, panels, |s| (z - s) * phi_second(xi + epsilon * s));
        let rel_error = if lhs == 0.0 { rhs.abs() } else { (lhs - rhs).abs() / lhs.abs() };
        max_rel_error = max_rel_error.max(rel_error);
        cases.push(ExponentCase { xi, z, lhs, rhs, rel_error });
    }
    Ok(ExponentReport { cases, max_rel_error })
}

/// `h(s) = (1/√s) ∫_{√s}^∞ e^{−ζ²}(ζ − √s) dζ` by Gauss–Legendre quadrature.
pub fn h_function(s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter { name: "s", value: s });
    }
    let a = libm::sqrt(s);
    // ζ = a + t: e^{−s} e^{−2at − t²} t, decaying on the scale min(1, 1/2a)
    let cutoff = (40.0 / (2.0 * a)).min(10.0);
    let gl = GaussLegendre::new(16);
    let tail = gl.integrate(0.0, cutoff, 128, |t| libm::exp(-2.0 * a * t - t * t) * t);
    Ok(libm::exp(-s) * tail / a)
}

/// `(1/a)[e^{−a²}/2 − a(√π/2) erfc(a)]`, `a = √s`.
pub fn h_closed_form(s: f64) -> f64 {
    let a = libm::sqrt(s);
    (libm::exp(-s) / 2.0 - a * libm::sqrt(PI) / 2.0 * libm::erfc(a)) / a
}

/// `e^{−s} / (2√s)`.
pub fn h_upper_bound(s: f64) -> f64 {
    libm::exp(-s) / (2.0 * libm::sqrt(s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub name: &'static str,
    pub omega: f64,
    pub quadrature: f64,
    pub exact: f64,
}

impl MomentCheck {
    pub fn abs_error(&self) -> f64 {
        (self.quadrature - self.exact).abs()
    }
}

/// The Gaussian moments used in the single-mode computations, each by
/// quadrature and in closed form, for every `ω` in `omegas`.
pub fn gaussian_moment_table(omegas: &[f64]) -> Vec<MomentCheck> {
    let rule = GaussianWeightRule::default();
    let sp = libm::sqrt(PI);
    let mut out = vec![
        MomentCheck { name: "1", omega: 0.0, quadrature: rule.integrate(|_| 1.0), exact: sp },
        MomentCheck { name: "z^4", omega: 0.0, quadrature: rule.integrate(|z| z * z * z * z), exact: 0.75 * sp },
    ];
    for &w in omegas {
        let e = libm::exp(-w * w / 4.0);
        out.push(MomentCheck { name: "cos(wz)", omega: w, quadrature: rule.integrate(|z| libm::cos(w * z)), exact: sp * e });
        out.push(MomentCheck { name: "z sin(wz)", omega: w, quadrature: rule.integrate(|z| z * libm::sin(w * z)), exact: 0.5 * w * sp * e });
        out.push(MomentCheck {
            name: "z^2 cos(wz)",
            omega: w,
            quadrature: rule.integrate(|z| z * z * libm::cos(w * z)),
            exact: sp * e * (0.5 - w * w / 4.0),
        });
    }
    out
}
