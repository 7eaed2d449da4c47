//! Deterministic quadrature rules.
//!
//! One-dimensional Gauss rules are generated from the three-term recurrence
//! of the associated orthonormal polynomials: nodes are the eigenvalues of the
//! Jacobi matrix (Sturm bisection, then Newton polish on `p_n`) and weights
//! are Christoffel numbers `1 / sum_k p_k(x)^2`, which keeps tiny weights
//! (Gauss-Laguerre tails) relatively accurate.
//!
//! Two-dimensional rules are tensor products in polar form: a Gauss rule in
//! `s = r^2` and the equispaced trapezoid rule in the angle.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{LabError, Result};
use crate::symbol::Symbol;
use crate::weights::{Point, WeightKind, WeightModel};

pub const DEFAULT_DISK_NR: usize = 24;
pub const DEFAULT_DISK_NT: usize = 64;
pub const DEFAULT_GLOBAL_NR: usize = 96;
pub const DEFAULT_GLOBAL_NT: usize = 128;

/// A one-dimensional Gauss rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Jacobi matrix of a family of orthonormal polynomials:
/// `x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}`.
struct Recurrence {
    diag: Vec<f64>,
    /// `offdiag[k] = b_{k+1}`, length `n` (the last entry is only used by Newton).
    offdiag: Vec<f64>,
    mu0: f64,
}

impl Recurrence {
    /// Values `p_n(x)` and `p_n'(x)`.
    fn eval_top(&self, x: f64) -> (f64, f64) {
        let n = self.diag.len();
        let mut p_prev = 0.0;
        let mut p = 1.0 / self.mu0.sqrt();
        let mut d_prev = 0.0;
        let mut d = 0.0;
        for k in 0..n {
            let b_k = if k == 0 { 0.0 } else { self.offdiag[k - 1] };
            let b_next = self.offdiag[k];
            let p_next = ((x - self.diag[k]) * p - b_k * p_prev) / b_next;
            let d_next = (p + (x - self.diag[k]) * d - b_k * d_prev) / b_next;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
        }
        (p, d)
    }

    fn christoffel(&self, x: f64) -> f64 {
        let n = self.diag.len();
        let mut p_prev = 0.0;
        let mut p = 1.0 / self.mu0.sqrt();
        let mut sum = p * p;
        for k in 0..n - 1 {
            let b_k = if k == 0 { 0.0 } else { self.offdiag[k - 1] };
            let p_next = ((x - self.diag[k]) * p - b_k * p_prev) / self.offdiag[k];
            p_prev = p;
            p = p_next;
            sum += p * p;
        }
        1.0 / sum
    }

    /// Number of eigenvalues of the leading `n x n` Jacobi matrix below `x`.
    fn sturm_count(&self, x: f64) -> usize {
        let n = self.diag.len();
        let mut count = 0;
        let mut q = 1.0;
        for k in 0..n {
            let b2 = if k == 0 {
                0.0
            } else {
                self.offdiag[k - 1] * self.offdiag[k - 1]
            };
            q = self.diag[k] - x - if k == 0 { 0.0 } else { b2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[k].abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gauss(&self) -> GaussRule {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..n {
            let left = if k == 0 {
                0.0
            } else {
                self.offdiag[k - 1].abs()
            };
            let right = if k + 1 < n {
                self.offdiag[k].abs()
            } else {
                0.0
            };
            lo = lo.min(self.diag[k] - left - right);
            hi = hi.max(self.diag[k] + left + right);
        }
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if self.sturm_count(mid) > i {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            let mut x = 0.5 * (a + b);
            for _ in 0..4 {
                let (p, d) = self.eval_top(x);
                if d == 0.0 || !d.is_finite() {
                    break;
                }
                let step = p / d;
                if !step.is_finite() || step.abs() > (b - a).max(1e-300) * 4.0 {
                    break;
                }
                x -= step;
            }
            nodes.push(x);
        }
        let weights = nodes.iter().map(|&x| self.christoffel(x)).collect();
        GaussRule { nodes, weights }
    }
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        Err(LabError::InvalidArgument(
            "Gauss rule needs at least one node".into(),
        ))
    } else {
        Ok(())
    }
}

/// Gauss-Legendre on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<GaussRule> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Gauss-Legendre mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Result<GaussRule> {
    let base = gauss_legendre(n)?;
    let half = 0.5 * (b - a);
    Ok(GaussRule {
        nodes: base.nodes.iter().map(|x| a + half * (x + 1.0)).collect(),
        weights: base.weights.iter().map(|w| w * half).collect(),
    })
}

/// Gauss-Laguerre for the weight `exp(-x)` on `[0, inf)`.
pub fn gauss_laguerre(n: usize) -> Result<GaussRule> {
    check_order(n)?;
    let rec = Recurrence {
        diag: (0..n).map(|k| 2.0 * k as f64 + 1.0).collect(),
        offdiag: (1..=n).map(|k| k as f64).collect(),
        mu0: 1.0,
    };
    Ok(rec.gauss())
}

/// Gauss-Jacobi for the weight `(1 - x)^alpha (1 + x)^beta` on `[-1, 1]`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    check_order(n)?;
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(LabError::InvalidArgument(format!(
            "Jacobi exponents must exceed -1, got {alpha}, {beta}"
        )));
    }
    let ab = alpha + beta;
    let diag = (0..n)
        .map(|k| {
            let k = k as f64;
            if k == 0.0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                (beta * beta - alpha * alpha) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
            }
        })
        .collect();
    let offdiag = (1..=n)
        .map(|k| {
            let k = k as f64;
            let b2 = if k == 1.0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                let s = 2.0 * k + ab;
                4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            b2.sqrt()
        })
        .collect();
    let mu0 = ((ab + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    Ok(Recurrence { diag, offdiag, mu0 }.gauss())
}

/// Tensor rule on the closed unit disk; weights sum to `pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskRule {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub n_r: usize,
    pub n_t: usize,
    /// Gauss-Legendre in `s` on `[0, 1]` (weights sum to one), kept for split rays.
    s_nodes: Vec<f64>,
    s_weights: Vec<f64>,
}

/// Nodes of a disk rule placed on a concrete disk, with weights normalized to
/// the disk average (they sum to one).
#[derive(Debug, Clone)]
pub struct DiskSamples {
    pub points: Vec<Point>,
    /// `(point - center) / radius`.
    pub offsets: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl DiskSamples {
    /// Average of `f` over the disk; errors on non-finite symbol values.
    pub fn mean(&self, f: &Symbol) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (z, w) in self.points.iter().zip(&self.weights) {
            acc += f.eval_checked(*z)? * *w;
        }
        Ok(acc)
    }

    pub fn values(&self, f: &Symbol) -> Result<Vec<Complex64>> {
        self.points.iter().map(|z| f.eval_checked(*z)).collect()
    }
}

pub fn disk_rule(n_r: usize, n_t: usize) -> Result<DiskRule> {
    if n_r < 1 || n_t < 3 {
        return Err(LabError::InvalidArgument(format!(
            "disk rule needs n_r >= 1 and n_t >= 3, got {n_r}, {n_t}"
        )));
    }
    let gl = gauss_legendre_on(n_r, 0.0, 1.0)?;
    let mut nodes = Vec::with_capacity(n_r * n_t);
    let mut weights = Vec::with_capacity(n_r * n_t);
    for j in 0..n_t {
        let theta = 2.0 * PI * j as f64 / n_t as f64;
        for (s, ws) in gl.nodes.iter().zip(&gl.weights) {
            nodes.push(Complex64::from_polar(s.sqrt(), theta));
            weights.push(PI * ws / n_t as f64);
        }
    }
    Ok(DiskRule {
        nodes,
        weights,
        n_r,
        n_t,
        s_nodes: gl.nodes,
        s_weights: gl.weights,
    })
}

impl Default for DiskRule {
    fn default() -> Self {
        disk_rule(DEFAULT_DISK_NR, DEFAULT_DISK_NT).expect("default disk rule")
    }
}

impl DiskRule {
    /// Places the rule on `D(center, radius)`. When `jump` is a circle
    /// `|w| = jump` crossing the disk, every angular ray is split at its
    /// intersections with the circle and integrated piecewise in `s`.
    pub fn samples(&self, center: Point, radius: f64, jump: Option<f64>) -> Result<DiskSamples> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        let straddles = jump
            .map(|r0| (center.norm() - r0).abs() < radius)
            .unwrap_or(false);
        if !straddles {
            let offsets = self.nodes.clone();
            let points = offsets.iter().map(|u| center + u * radius).collect();
            let weights = self.weights.iter().map(|w| w / PI).collect();
            return Ok(DiskSamples {
                points,
                offsets,
                weights,
            });
        }
        let r0 = jump.unwrap_or(0.0);
        let mut points = Vec::new();
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for j in 0..self.n_t {
            let theta = 2.0 * PI * j as f64 / self.n_t as f64;
            let dir = Complex64::from_polar(1.0, theta);
            // |c + rho dir|^2 = r0^2  <=>  rho^2 + 2 rho Re(conj(c) dir) + |c|^2 - r0^2 = 0
            let bq = (center.conj() * dir).re;
            let cq = center.norm_sqr() - r0 * r0;
            let disc = bq * bq - cq;
            let mut cuts = vec![0.0];
            if disc > 0.0 {
                let sq = disc.sqrt();
                for rho in [-bq - sq, -bq + sq] {
                    if rho > 0.0 && rho < radius {
                        cuts.push(rho / radius);
                    }
                }
            }
            cuts.push(1.0);
            for win in cuts.windows(2) {
                let (sa, sb) = (win[0] * win[0], win[1] * win[1]);
                if sb <= sa {
                    continue;
                }
                for (s, ws) in self.s_nodes.iter().zip(&self.s_weights) {
                    let sv = sa + (sb - sa) * s;
                    let u = dir * sv.sqrt();
                    offsets.push(u);
                    points.push(center + u * radius);
                    weights.push((sb - sa) * ws / self.n_t as f64);
                }
            }
        }
        Ok(DiskSamples {
            points,
            offsets,
            weights,
        })
    }
}

/// `int_{D(center, radius)} f dA`.
pub fn integrate_disk(
    f: &Symbol,
    center: Point,
    radius: f64,
    rule: &DiskRule,
) -> Result<Complex64> {
    let samples = rule.samples(center, radius, f.jump_radius())?;
    Ok(samples.mean(f)? * (PI * radius * radius))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GlobalRuleKind {
    GaussWeightPlane(f64),
    JacobiWeightDisk(f64),
}

/// Polar rule for `int g dA_w` over the whole domain; weights include the weight `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalRule {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub kind: GlobalRuleKind,
    pub n_r: usize,
    pub n_t: usize,
    /// Radius of the circle across which the radial rule is split, if any.
    pub split: Option<f64>,
}

impl GlobalRule {
    pub fn integrate(&self, mut g: impl FnMut(Point) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            acc += g(*z) * *w;
        }
        acc
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn global_rule(model: &WeightModel, n_r: usize, n_t: usize) -> Result<GlobalRule> {
    global_rule_split(model, n_r, n_t, None)
}

/// Global rule whose radial part is split at `|z| = split`, so that symbols
/// jumping across that circle are integrated piecewise smoothly.
pub fn global_rule_split(
    model: &WeightModel,
    n_r: usize,
    n_t: usize,
    split: Option<f64>,
) -> Result<GlobalRule> {
    if n_r < 1 || n_t < 3 {
        return Err(LabError::InvalidArgument(format!(
            "global rule needs n_r >= 1 and n_t >= 3, got {n_r}, {n_t}"
        )));
    }
    let alpha = model.alpha();
    // radial pieces as (s, weight) with  int_0^R h(s) w_radial(s) ds ~ sum weight h(s)
    let mut radial: Vec<(f64, f64)> = Vec::new();
    let kind;
    match model.kind() {
        WeightKind::StandardFock => {
            kind = GlobalRuleKind::GaussWeightPlane(alpha);
            let s0 = match split {
                Some(r) if r > 0.0 => r * r,
                _ => 0.0,
            };
            if s0 > 0.0 {
                let inner = gauss_legendre_on(n_r, 0.0, s0)?;
                for (s, w) in inner.nodes.iter().zip(&inner.weights) {
                    radial.push((*s, w * (-alpha * s).exp()));
                }
            }
            let lag = gauss_laguerre(n_r)?;
            let scale = (-alpha * s0).exp() / alpha;
            for (t, w) in lag.nodes.iter().zip(&lag.weights) {
                radial.push((s0 + t / alpha, w * scale));
            }
            // dA_w = exp(-alpha s) (1/2) ds dtheta
            for r in radial.iter_mut() {
                r.1 *= 0.5;
            }
        }
        WeightKind::StandardBergman => {
            kind = GlobalRuleKind::JacobiWeightDisk(alpha);
            let s0 = match split {
                Some(r) if r > 0.0 && r < 1.0 => r * r,
                _ => 0.0,
            };
            if s0 > 0.0 {
                let inner = gauss_legendre_on(n_r, 0.0, s0)?;
                for (s, w) in inner.nodes.iter().zip(&inner.weights) {
                    radial.push((*s, w * (1.0 - s).powf(alpha)));
                }
            }
            if s0 < 1.0 {
                let jac = gauss_jacobi(n_r, alpha, 0.0)?;
                let half = 0.5 * (1.0 - s0);
                let scale = half.powf(alpha + 1.0);
                for (x, w) in jac.nodes.iter().zip(&jac.weights) {
                    radial.push((s0 + half * (1.0 + x), w * scale));
                }
            }
            // dA_w = ((alpha + 1) / pi) (1 - s)^alpha (1/2) ds dtheta
            for r in radial.iter_mut() {
                r.1 *= 0.5 * (alpha + 1.0) / PI;
            }
        }
    }
    let dtheta = 2.0 * PI / n_t as f64;
    let mut nodes = Vec::with_capacity(radial.len() * n_t);
    let mut weights = Vec::with_capacity(radial.len() * n_t);
    for j in 0..n_t {
        let theta = dtheta * j as f64;
        for &(s, w) in &radial {
            nodes.push(Complex64::from_polar(s.sqrt(), theta));
            weights.push(w * dtheta);
        }
    }
    Ok(GlobalRule {
        nodes,
        weights,
        kind,
        n_r,
        n_t,
        split,
    })
}
