//! Standard Fock and standard Bergman weights.
//!
//! Conventions:
//!
//! * Fock, parameter `alpha > 0`: `dA_w = exp(-alpha |z|^2) dA` on the plane,
//!   kernel `K(z, w) = (alpha / pi) exp(alpha z conj(w))`.
//! * Bergman, parameter `alpha > -1`: `dA_w = ((alpha + 1) / pi) (1 - |z|^2)^alpha dA`
//!   on the unit disk, kernel `K(z, w) = (1 - z conj(w))^-(2 + alpha)`.
//!
//! With these normalizations `tau(z)^2 K(z, z) w(z) = 1` and
//! `d lambda = dA / tau^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{LabError, Result};

/// A point of the complex plane.
pub type Point = Complex64;

/// Largest basis index for which [`WeightModel::basis`] reports plain
/// (non-logarithmic) norms; everything else works in the log domain.
pub const BASIS_N_MAX: usize = 170;

/// Ratios `ln N(m) - ln N(n)` with `|m - n|` up to this bound are summed
/// term by term instead of differencing two large log-Gammas.
const RATIO_SUM_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightKind {
    StandardFock,
    StandardBergman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Plane,
    UnitDisk,
}

/// A concrete weight with closed-form kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightModel {
    kind: WeightKind,
    alpha: f64,
}

/// Norm data of the monomial `z^n`; `e_n = coeff * z^n` is orthonormal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisData {
    pub n: usize,
    pub norm_sq: f64,
    pub coeff: f64,
}

impl WeightModel {
    pub fn fock(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "Fock parameter must be positive, got {alpha}"
            )));
        }
        Ok(Self {
            kind: WeightKind::StandardFock,
            alpha,
        })
    }

    pub fn bergman(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > -1.0) {
            return Err(LabError::InvalidArgument(format!(
                "Bergman parameter must exceed -1, got {alpha}"
            )));
        }
        Ok(Self {
            kind: WeightKind::StandardBergman,
            alpha,
        })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn domain(&self) -> Domain {
        match self.kind {
            WeightKind::StandardFock => Domain::Plane,
            WeightKind::StandardBergman => Domain::UnitDisk,
        }
    }

    pub fn is_fock(&self) -> bool {
        self.kind == WeightKind::StandardFock
    }

    pub fn contains(&self, z: Point) -> bool {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return false;
        }
        match self.kind {
            WeightKind::StandardFock => true,
            WeightKind::StandardBergman => z.norm_sqr() < 1.0,
        }
    }

    pub fn check_point(&self, z: Point) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(LabError::Domain(format!(
                "point {}+{}i lies outside the domain of {self}",
                z.re, z.im
            )))
        }
    }

    /// Density of `dA_w` with respect to area measure.
    pub fn weight(&self, z: Point) -> Result<f64> {
        self.check_point(z)?;
        let s = z.norm_sqr();
        Ok(match self.kind {
            WeightKind::StandardFock => (-self.alpha * s).exp(),
            WeightKind::StandardBergman => (self.alpha + 1.0) / PI * (1.0 - s).powf(self.alpha),
        })
    }

    /// `tau(z) = 1 / (w(z)^{1/2} ||K_z||)`.
    pub fn tau(&self, z: Point) -> Result<f64> {
        self.check_point(z)?;
        Ok(match self.kind {
            WeightKind::StandardFock => (PI / self.alpha).sqrt(),
            WeightKind::StandardBergman => (PI / (self.alpha + 1.0)).sqrt() * (1.0 - z.norm_sqr()),
        })
    }

    /// Density of `d lambda = dA / tau^2`.
    pub fn lambda_density(&self, z: Point) -> Result<f64> {
        let t = self.tau(z)?;
        Ok(1.0 / (t * t))
    }

    /// Exact `lambda`-measure of the annulus `a <= |z| < b` (`a = 0` gives a disk).
    pub fn lambda_annulus(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0 <= a && a <= b) {
            return Err(LabError::InvalidArgument(format!(
                "annulus radii must satisfy 0 <= a <= b, got {a}, {b}"
            )));
        }
        match self.kind {
            WeightKind::StandardFock => Ok(self.alpha * (b * b - a * a)),
            WeightKind::StandardBergman => {
                if b >= 1.0 {
                    return Err(LabError::Domain(format!(
                        "annulus radius {b} reaches the unit circle"
                    )));
                }
                Ok((self.alpha + 1.0) * (1.0 / (1.0 - b * b) - 1.0 / (1.0 - a * a)))
            }
        }
    }

    /// Reproducing kernel `K(z, w)`.
    pub fn kernel(&self, z: Point, w: Point) -> Result<Complex64> {
        self.check_point(z)?;
        self.check_point(w)?;
        let zw = z * w.conj();
        match self.kind {
            WeightKind::StandardFock => Ok((self.alpha / PI) * (self.alpha * zw).exp()),
            WeightKind::StandardBergman => {
                if zw.norm() >= 1.0 {
                    return Err(LabError::Domain(format!(
                        "|z conj(w)| = {} >= 1 in the Bergman kernel",
                        zw.norm()
                    )));
                }
                let base = Complex64::new(1.0, 0.0) - zw;
                Ok((-(2.0 + self.alpha) * base.ln()).exp())
            }
        }
    }

    /// `ln K(z, z)`.
    pub fn ln_kernel_diag(&self, z: Point) -> Result<f64> {
        self.check_point(z)?;
        let s = z.norm_sqr();
        Ok(match self.kind {
            WeightKind::StandardFock => (self.alpha / PI).ln() + self.alpha * s,
            WeightKind::StandardBergman => -(2.0 + self.alpha) * (1.0 - s).ln(),
        })
    }

    /// `ln ||z^n||^2`.
    pub fn ln_norm_sq(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self.kind {
            WeightKind::StandardFock => PI.ln() + ln_gamma(nf + 1.0) - (nf + 1.0) * self.alpha.ln(),
            WeightKind::StandardBergman => {
                ln_gamma(nf + 1.0) + ln_gamma(self.alpha + 2.0) - ln_gamma(nf + self.alpha + 2.0)
            }
        }
    }

    /// `ln ||z^to||^2 - ln ||z^from||^2`, accurate to a few ulps for nearby indices.
    pub fn ln_norm_ratio(&self, from: usize, to: usize) -> f64 {
        let (lo, hi, sign) = if from <= to {
            (from, to, 1.0)
        } else {
            (to, from, -1.0)
        };
        if hi - lo > RATIO_SUM_LIMIT {
            return sign * (self.ln_norm_sq(hi) - self.ln_norm_sq(lo));
        }
        let mut acc = 0.0;
        for i in lo..hi {
            let i = i as f64;
            acc += match self.kind {
                WeightKind::StandardFock => ((i + 1.0) / self.alpha).ln(),
                WeightKind::StandardBergman => ((i + 1.0) / (i + self.alpha + 2.0)).ln(),
            };
        }
        sign * acc
    }

    /// Norm data for `z^n`; errors above [`BASIS_N_MAX`] where the plain
    /// norms leave the `f64` range for typical parameters.
    pub fn basis(&self, n: usize) -> Result<BasisData> {
        if n > BASIS_N_MAX {
            return Err(LabError::InvalidArgument(format!(
                "basis index {n} exceeds n_max = {BASIS_N_MAX}; use ln_norm_sq"
            )));
        }
        let ln = self.ln_norm_sq(n);
        let norm_sq = ln.exp();
        if !(norm_sq.is_finite() && norm_sq > 0.0) {
            return Err(LabError::Numerical(format!(
                "norm of z^{n} overflows for {self}"
            )));
        }
        Ok(BasisData {
            n,
            norm_sq,
            coeff: (-0.5 * ln).exp(),
        })
    }

    /// `e_n(z)` evaluated through logarithms so that large `n` and `|z|` do not overflow.
    pub fn basis_value(&self, n: usize, z: Point) -> Complex64 {
        self.scaled_basis_value(n, z, 0.0)
    }

    /// `exp(ln_scale) * e_n(z)`; used to fold quadrature weights into basis samples.
    pub fn scaled_basis_value(&self, n: usize, z: Point, ln_scale: f64) -> Complex64 {
        let r = z.norm();
        if n == 0 {
            return Complex64::new((ln_scale - 0.5 * self.ln_norm_sq(0)).exp(), 0.0);
        }
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mag = (ln_scale + n as f64 * r.ln() - 0.5 * self.ln_norm_sq(n)).exp();
        Complex64::from_polar(mag, n as f64 * z.arg())
    }
}

impl std::fmt::Display for WeightModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            WeightKind::StandardFock => write!(f, "fock:{}", self.alpha),
            WeightKind::StandardBergman => write!(f, "bergman:{}", self.alpha),
        }
    }
}

impl std::str::FromStr for WeightModel {
    type Err = LabError;

    /// Parses `fock:<alpha>` or `bergman:<alpha>`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, alpha) = s.split_once(':').ok_or_else(|| {
            LabError::InvalidArgument(format!("space `{s}` is not of the form kind:alpha"))
        })?;
        let alpha: f64 = alpha
            .trim()
            .parse()
            .map_err(|_| LabError::InvalidArgument(format!("bad space parameter in `{s}`")))?;
        match kind.trim() {
            "fock" => Self::fock(alpha),
            "bergman" => Self::bergman(alpha),
            other => Err(LabError::InvalidArgument(format!(
                "unknown space kind `{other}`"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(re: f64, im: f64) -> Point {
        Point::new(re, im)
    }

    #[test]
    fn tau_closed_forms() {
        let fock = WeightModel::fock(1.0).unwrap();
        assert_relative_eq!(fock.tau(p(0.3, 0.4)).unwrap(), 1.7724539, epsilon = 1e-7);
        let berg = WeightModel::bergman(0.0).unwrap();
        assert_relative_eq!(berg.tau(p(0.0, 0.0)).unwrap(), 1.7724539, epsilon = 1e-7);
        assert_relative_eq!(berg.tau(p(0.5, 0.0)).unwrap(), 1.3293404, epsilon = 1e-7);
        assert!(berg.tau(p(1.0, 0.0)).is_err());
        assert!(berg.tau(p(0.8, 0.8)).is_err());
    }

    #[test]
    fn tau_identity_with_kernel() {
        for model in [
            WeightModel::fock(1.0).unwrap(),
            WeightModel::fock(2.5).unwrap(),
            WeightModel::bergman(0.0).unwrap(),
            WeightModel::bergman(1.5).unwrap(),
            WeightModel::bergman(-0.5).unwrap(),
        ] {
            for z in [p(0.0, 0.0), p(0.3, -0.2), p(-0.5, 0.6)] {
                let t = model.tau(z).unwrap();
                let k = model.kernel(z, z).unwrap();
                let w = model.weight(z).unwrap();
                assert_relative_eq!(t * t * k.re * w, 1.0, max_relative = 1e-13);
                assert!(k.im.abs() < 1e-14);
                assert_relative_eq!(k.re.ln(), model.ln_kernel_diag(z).unwrap(), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let berg = WeightModel::bergman(0.0).unwrap();
        let k = berg.kernel(p(0.5, 0.0), p(0.5, 0.0)).unwrap();
        assert_relative_eq!(k.re, 1.0 / 0.5625, epsilon = 1e-12);
        let fock = WeightModel::fock(1.0).unwrap();
        assert_relative_eq!(fock.kernel(p(0.0, 0.0), p(0.0, 0.0)).unwrap().re, 1.0 / PI);
        assert_relative_eq!(fock.kernel(p(2.0, -3.0), p(0.0, 0.0)).unwrap().re, 1.0 / PI);
        assert!(berg.kernel(p(0.99, 0.0), p(-0.0, 0.0)).is_ok());
        assert!(berg.kernel(p(1.2, 0.0), p(0.9, 0.0)).is_err());
    }

    #[test]
    fn basis_norms() {
        let fock = WeightModel::fock(1.0).unwrap();
        assert_relative_eq!(
            fock.basis(3).unwrap().norm_sq,
            6.0 * PI,
            max_relative = 1e-13
        );
        let berg = WeightModel::bergman(0.0).unwrap();
        assert_relative_eq!(berg.basis(4).unwrap().norm_sq, 0.2, max_relative = 1e-13);
        assert_relative_eq!(berg.basis(0).unwrap().norm_sq, 1.0, max_relative = 1e-14);
        let b = berg.basis(7).unwrap();
        assert_relative_eq!(b.coeff, 1.0 / b.norm_sq.sqrt(), max_relative = 1e-14);
        assert!(fock.basis(BASIS_N_MAX + 1).is_err());
        // the log domain keeps working past n_max
        assert!(fock.ln_norm_sq(1000).is_finite());
    }

    #[test]
    fn norm_sq_log_convex() {
        for model in [
            WeightModel::fock(0.7).unwrap(),
            WeightModel::bergman(2.0).unwrap(),
        ] {
            for n in 1..150 {
                let d2 =
                    model.ln_norm_sq(n + 1) - 2.0 * model.ln_norm_sq(n) + model.ln_norm_sq(n - 1);
                assert!(d2 > 0.0, "{model} not log-convex at {n}");
            }
        }
    }

    #[test]
    fn ratio_matches_difference() {
        let berg = WeightModel::bergman(0.3).unwrap();
        for (a, b) in [(0, 5), (10, 3), (40, 41), (2, 600)] {
            let direct = berg.ln_norm_sq(b) - berg.ln_norm_sq(a);
            assert_relative_eq!(berg.ln_norm_ratio(a, b), direct, epsilon = 1e-11);
        }
    }

    #[test]
    fn lambda_density_examples() {
        let fock = WeightModel::fock(1.0).unwrap();
        assert_relative_eq!(
            fock.lambda_density(p(5.0, 1.0)).unwrap(),
            1.0 / PI,
            epsilon = 1e-15
        );
        let berg = WeightModel::bergman(0.0).unwrap();
        assert_relative_eq!(
            berg.lambda_density(p(0.0, 0.0)).unwrap(),
            1.0 / PI,
            epsilon = 1e-15
        );
        // (1 - |z|^2)^{-2} / pi at |z|^2 = 1/2
        let z = p(0.5f64.sqrt(), 0.0);
        assert_relative_eq!(
            berg.lambda_density(z).unwrap(),
            4.0 / PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn bergman_tau_vanishes_linearly() {
        let berg = WeightModel::bergman(0.0).unwrap();
        for eps in [1e-2, 1e-3] {
            let ratio = berg.tau(p(1.0 - eps, 0.0)).unwrap() / eps;
            assert!(ratio >= PI.sqrt() * 0.9 && ratio <= PI.sqrt() * 2.1);
        }
    }

    #[test]
    fn basis_sum_reproduces_kernel_diagonal() {
        let fock = WeightModel::fock(1.0).unwrap();
        let berg = WeightModel::bergman(0.5).unwrap();
        for (model, z, terms) in [(fock, p(1.2, -0.7), 200), (berg, p(0.3, 0.4), 4000)] {
            let sum: f64 = (0..terms).map(|n| model.basis_value(n, z).norm_sqr()).sum();
            let k = model.kernel(z, z).unwrap().re;
            assert_relative_eq!(sum, k, max_relative = 1e-12);
        }
    }

    #[test]
    fn parse_space() {
        let m: WeightModel = "bergman:0".parse().unwrap();
        assert_eq!(m, WeightModel::bergman(0.0).unwrap());
        assert!("fock:-1".parse::<WeightModel>().is_err());
        assert!("torus:1".parse::<WeightModel>().is_err());
        assert!("fock".parse::<WeightModel>().is_err());
    }
}
