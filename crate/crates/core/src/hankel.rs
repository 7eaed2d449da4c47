//! Truncated Hankel operators `H_f g = f g - P(f g)` on the monomial basis.
//!
//! The Gram matrix `G_jk = <H_f e_k, H_f e_j>` of the restriction to
//! `span{e_0, ..., e_{N-1}}` is assembled either in closed form (monomial
//! symbols) or from a global quadrature rule, with the projection truncated to
//! `span{e_0, ..., e_{M-1}}`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::linalg::HermitianMatrix;
use crate::quadrature::{global_rule_split, GlobalRule, DEFAULT_GLOBAL_NR, DEFAULT_GLOBAL_NT};
use crate::symbol::Symbol;
use crate::weights::{Point, WeightModel};

/// Extra projection modes used for non-banded symbols.
pub const DEFAULT_EXTRA_MODES: usize = 16;
/// Increment of `M` used to measure spectral stability.
pub const STABILITY_STEP: usize = 8;
pub const KERNEL_MASS_MIN: f64 = 0.999;
const PSD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GramMethod {
    /// Closed form for monomial symbols, quadrature otherwise.
    #[default]
    Auto,
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone)]
pub struct GramSpec {
    pub model: WeightModel,
    pub f: Symbol,
    /// Domain truncation.
    pub n: usize,
    /// Projection truncation.
    pub m: usize,
    pub method: GramMethod,
    /// Rule for the quadrature path; a default is built from `f` and `m` when absent.
    pub rule: Option<Arc<GlobalRule>>,
}

/// Smallest `M` that makes the projection exact for a banded symbol, `N + 16` otherwise.
pub fn default_projection(f: &Symbol, n: usize) -> usize {
    match f.angular_band() {
        Some((lo, hi)) => n + hi.max(-lo).max(0) as usize,
        None => n + DEFAULT_EXTRA_MODES,
    }
}

impl GramSpec {
    pub fn new(model: WeightModel, f: Symbol, n: usize) -> Result<Self> {
        let m = default_projection(&f, n);
        Self::with_projection(model, f, n, m)
    }

    pub fn with_projection(model: WeightModel, f: Symbol, n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::InvalidArgument(
                "truncation N must be at least 1".into(),
            ));
        }
        if m < n {
            return Err(LabError::InvalidArgument(format!(
                "projection truncation M = {m} is below N = {n}"
            )));
        }
        Ok(Self {
            model,
            f,
            n,
            m,
            method: GramMethod::Auto,
            rule: None,
        })
    }

    pub fn method(mut self, method: GramMethod) -> Self {
        self.method = method;
        self
    }

    pub fn rule(mut self, rule: GlobalRule) -> Self {
        self.rule = Some(Arc::new(rule));
        self
    }

    fn with_m(&self, m: usize) -> Self {
        Self { m, ..self.clone() }
    }

    fn uses_closed_form(&self) -> Result<bool> {
        match (self.method, self.f.monomial_form()) {
            (GramMethod::Quadrature, _) => Ok(false),
            (_, Some(_)) => Ok(true),
            (GramMethod::ClosedForm, None) => Err(LabError::InvalidArgument(format!(
                "symbol `{}` has no monomial form",
                self.f.name()
            ))),
            (GramMethod::Auto, None) => Ok(false),
        }
    }

    fn quadrature_rule(&self) -> Result<Arc<GlobalRule>> {
        if let Some(rule) = &self.rule {
            return Ok(rule.clone());
        }
        Ok(Arc::new(default_rule(&self.model, &self.f, self.m)?))
    }
}

/// Default global rule for Gram assembly with projection truncation `m`.
pub fn default_rule(model: &WeightModel, f: &Symbol, m: usize) -> Result<GlobalRule> {
    let n_t = match f.angular_band() {
        Some(_) => DEFAULT_GLOBAL_NT,
        None => DEFAULT_GLOBAL_NT.max(2 * m + 16),
    };
    global_rule_split(model, DEFAULT_GLOBAL_NR, n_t, f.jump_radius())
}

#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub matrix: HermitianMatrix,
    pub m: usize,
    /// Largest deviation of the rule-computed basis norms from one, on the quadrature path.
    pub quadrature_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Singular values, non-increasing.
    pub s: Vec<f64>,
    pub gram_min_eig: f64,
    pub m_used: usize,
    /// `max_n |s_n(M) - s_n(M + 8)|`.
    pub stability: f64,
}

fn ln_overlap(model: &WeightModel, a: u32, k: usize, j: usize) -> f64 {
    // <z^a conj(z)^b e_k, e_j> with a + k = b + j is ||z^{a+k}||^2 / (||z^k|| ||z^j||)
    let top = k + a as usize;
    0.5 * (model.ln_norm_ratio(k, top) + model.ln_norm_ratio(j, top))
}

fn closed_form_element(model: &WeightModel, (a, b): (u32, u32), j: usize, k: usize) -> Complex64 {
    if k + a as usize != j + b as usize {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(ln_overlap(model, a, k, j).exp(), 0.0)
}

/// `<f e_k, e_j>`.
pub fn matrix_element(
    model: &WeightModel,
    f: &Symbol,
    j: usize,
    k: usize,
    rule: &GlobalRule,
) -> Result<Complex64> {
    if let Some(ab) = f.monomial_form() {
        return Ok(closed_form_element(model, ab, j, k));
    }
    let basis = BasisSamples::for_indices(model, rule, &[k, j])?;
    let fv = symbol_values(f, rule)?;
    let (ek, ej) = (basis.row(0), basis.row(1));
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..fv.len() {
        acc += fv[i] * ek[i] * ej[i].conj();
    }
    Ok(acc)
}

fn symbol_values(f: &Symbol, rule: &GlobalRule) -> Result<Vec<Complex64>> {
    rule.nodes.iter().map(|z| f.eval_checked(*z)).collect()
}

/// `sqrt(w_i) e_n(z_i)` for all rule nodes, basis-major.
struct BasisSamples {
    len: usize,
    data: Vec<Complex64>,
}

impl BasisSamples {
    fn new(model: &WeightModel, rule: &GlobalRule, count: usize) -> Result<Self> {
        let indices: Vec<usize> = (0..count).collect();
        Self::for_indices(model, rule, &indices)
    }

    /// Row `i` holds `e_{indices[i]}`.
    fn for_indices(model: &WeightModel, rule: &GlobalRule, indices: &[usize]) -> Result<Self> {
        let ln_norms: Vec<(usize, f64)> =
            indices.iter().map(|&n| (n, model.ln_norm_sq(n))).collect();
        let len = rule.nodes.len();
        let mut data = vec![Complex64::new(0.0, 0.0); len * indices.len()];
        for (i, (z, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let half_lw = 0.5 * w.ln();
            let r = z.norm();
            let (lr, arg) = (r.ln(), z.arg());
            for (row, &(n, ln_norm)) in ln_norms.iter().enumerate() {
                let v = if n == 0 {
                    Complex64::new((half_lw - 0.5 * ln_norm).exp(), 0.0)
                } else if r == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(
                        (half_lw + n as f64 * lr - 0.5 * ln_norm).exp(),
                        n as f64 * arg,
                    )
                };
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(LabError::Numerical(format!(
                        "basis sample e_{n} overflows at node {z}"
                    )));
                }
                data[row * len + i] = v;
            }
        }
        Ok(Self { len, data })
    }

    fn row(&self, n: usize) -> &[Complex64] {
        &self.data[n * self.len..(n + 1) * self.len]
    }
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    // sum x_i conj(y_i)
    x.iter()
        .zip(y)
        .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b.conj())
}

fn projection_range(band: Option<(i32, i32)>, k: usize, m: usize) -> std::ops::Range<usize> {
    match band {
        Some((lo, hi)) => {
            let start = (k as i64 + lo as i64).max(0) as usize;
            let end = ((k as i64 + hi as i64 + 1).max(0) as usize).min(m);
            start.min(end)..end
        }
        None => 0..m,
    }
}

pub fn gram_matrix(spec: &GramSpec) -> Result<GramMatrix> {
    if spec.uses_closed_form()? {
        let ab = spec.f.monomial_form().expect("checked monomial form");
        return closed_form_gram(spec, ab);
    }
    quadrature_gram(spec)
}

fn closed_form_gram(spec: &GramSpec, (a, b): (u32, u32)) -> Result<GramMatrix> {
    let model = &spec.model;
    let n = spec.n;
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        // ||f e_k||^2 = ||z^{k+a+b}||^2 / ||z^k||^2, minus the single projected mode
        let full = model.ln_norm_ratio(k, k + (a + b) as usize).exp();
        let m = k as i64 + a as i64 - b as i64;
        let projected = if m >= 0 && (m as usize) < spec.m {
            (2.0 * ln_overlap(model, a, k, m as usize)).exp()
        } else {
            0.0
        };
        let g = full - projected;
        if g < -PSD_TOL * full.max(1.0) {
            return Err(LabError::Numerical(format!(
                "negative Gram diagonal {g:e} at k = {k}"
            )));
        }
        diag.push(g.max(0.0));
    }
    let matrix = HermitianMatrix::from_upper(n, |j, k| {
        if j == k {
            Complex64::new(diag[k], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(GramMatrix {
        matrix,
        m: spec.m,
        quadrature_error: None,
    })
}

fn quadrature_gram(spec: &GramSpec) -> Result<GramMatrix> {
    let rule = spec.quadrature_rule()?;
    let (n, m) = (spec.n, spec.m);
    let count = m.max(n);
    let basis = BasisSamples::new(&spec.model, &rule, count)?;
    let fv = symbol_values(&spec.f, &rule)?;
    let band = spec.f.angular_band();
    let quadrature_error = (0..count)
        .map(|k| {
            let e = basis.row(k);
            (dot(e, e).re - 1.0).abs()
        })
        .fold(0.0, f64::max);
    // residuals r_k = f e_k - sum_m <f e_k, e_m> e_m, sampled with sqrt weights
    let residuals: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let ek = basis.row(k);
            let mut r: Vec<Complex64> = fv.iter().zip(ek).map(|(f, e)| f * e).collect();
            let fek = r.clone();
            for mm in projection_range(band, k, m) {
                let em = basis.row(mm);
                let beta = dot(&fek, em);
                for (ri, e) in r.iter_mut().zip(em) {
                    *ri -= beta * e;
                }
            }
            r
        })
        .collect();
    let width = band.map(|(lo, hi)| (hi - lo) as usize);
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            (j..n)
                .map(|k| match width {
                    Some(w) if k - j > w => Complex64::new(0.0, 0.0),
                    _ => dot(&residuals[k], &residuals[j]),
                })
                .collect()
        })
        .collect();
    let matrix = HermitianMatrix::from_upper(n, |j, k| rows[j][k - j]);
    Ok(GramMatrix {
        matrix,
        m,
        quadrature_error: Some(quadrature_error),
    })
}

/// Singular values from a Gram matrix: eigenvalues clamped at zero, square-rooted, sorted descending.
pub fn singular_values(gram: &HermitianMatrix) -> Result<SpectrumResult> {
    let ev = gram.eigenvalues()?;
    let gram_min_eig = ev.first().copied().unwrap_or(0.0);
    let top = ev.last().copied().unwrap_or(0.0);
    if gram_min_eig < -PSD_TOL * top.max(1.0) {
        return Err(LabError::Numerical(format!(
            "Gram matrix is not positive semidefinite: min eigenvalue {gram_min_eig:e}"
        )));
    }
    let s = ev.iter().rev().map(|l| l.max(0.0).sqrt()).collect();
    Ok(SpectrumResult {
        s,
        gram_min_eig,
        m_used: gram.dim(),
        stability: 0.0,
    })
}

/// Spectrum at `spec.m`, with stability measured against `spec.m + 8`.
pub fn spectrum(spec: &GramSpec) -> Result<SpectrumResult> {
    let base = gram_matrix(spec)?;
    let mut result = singular_values(&base.matrix)?;
    result.m_used = spec.m;
    let wider = spec.with_m(spec.m + STABILITY_STEP);
    let wider = singular_values(&gram_matrix(&wider)?.matrix)?;
    result.stability = result
        .s
        .iter()
        .zip(&wider.s)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(result)
}

/// `||H_f k_z||` for the normalized kernels `k_z`, through the truncated Gram matrix.
pub fn berezin_profile(spec: &GramSpec, points: &[Point]) -> Result<Vec<f64>> {
    let gram = gram_matrix(spec)?;
    let model = &spec.model;
    points
        .iter()
        .map(|z| {
            let ln_k = model.ln_kernel_diag(*z)?;
            let c: Vec<Complex64> = (0..spec.n)
                .map(|n| model.scaled_basis_value(n, *z, -0.5 * ln_k).conj())
                .collect();
            let mass: f64 = c.iter().map(|v| v.norm_sqr()).sum();
            if mass < KERNEL_MASS_MIN {
                return Err(LabError::InvalidArgument(format!(
                    "truncated kernel mass {mass:.6} < {KERNEL_MASS_MIN} at {z}; enlarge N"
                )));
            }
            Ok(gram.matrix.quadratic_form(&c)?.max(0.0).sqrt())
        })
        .collect()
}

fn density_values(mu_density: &Symbol, rule: &GlobalRule) -> Result<Vec<f64>> {
    rule.nodes
        .iter()
        .map(|z| {
            let v = mu_density.eval_checked(*z)?;
            if v.re < 0.0 || v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
                return Err(LabError::InvalidArgument(format!(
                    "measure density `{}` is not nonnegative at {z}: {v}",
                    mu_density.name()
                )));
            }
            Ok(v.re)
        })
        .collect()
}

/// `int |g|^2 w mu dA` for `g = sum_n coeffs[n] e_n`.
pub fn toeplitz_form(
    model: &WeightModel,
    mu_density: &Symbol,
    coeffs: &[Complex64],
    rule: &GlobalRule,
) -> Result<f64> {
    let mu = density_values(mu_density, rule)?;
    let basis = BasisSamples::new(model, rule, coeffs.len())?;
    let mut acc = 0.0;
    for (i, m) in mu.iter().enumerate() {
        let mut g = Complex64::new(0.0, 0.0);
        for (n, c) in coeffs.iter().enumerate() {
            g += c * basis.row(n)[i];
        }
        acc += g.norm_sqr() * m;
    }
    Ok(acc)
}

/// Matrix of the Toeplitz form on `span{e_0, ..., e_{n-1}}`: `T_jk = int e_k conj(e_j) mu dA_w`.
pub fn toeplitz_matrix(
    model: &WeightModel,
    mu_density: &Symbol,
    n: usize,
    rule: &GlobalRule,
) -> Result<HermitianMatrix> {
    let mu = density_values(mu_density, rule)?;
    let basis = BasisSamples::new(model, rule, n)?;
    let weighted: Vec<Vec<Complex64>> = (0..n)
        .map(|k| basis.row(k).iter().zip(&mu).map(|(e, m)| e * m).collect())
        .collect();
    Ok(HermitianMatrix::from_upper(n, |j, k| {
        dot(&weighted[k], basis.row(j))
    }))
}

/// `sum_n (s_n - theta)^+`.
pub fn convex_trace(spectrum: &SpectrumResult, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "theta must be positive, got {theta}"
        )));
    }
    Ok(spectrum.s.iter().map(|s| (s - theta).max(0.0)).sum())
}

/// `((sum s_n^p)^{1/p}, max_n (1 + n)^{1/p} s_n)`.
pub fn schatten(spectrum: &SpectrumResult, p: f64) -> Result<(f64, f64)> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "p must be positive and finite, got {p}"
        )));
    }
    let sp = spectrum
        .s
        .iter()
        .map(|s| s.powf(p))
        .sum::<f64>()
        .powf(1.0 / p);
    let weak = spectrum
        .s
        .iter()
        .enumerate()
        .map(|(n, s)| (1.0 + n as f64).powf(1.0 / p) * s)
        .fold(0.0, f64::max);
    Ok((sp, weak))
}

/// Spectrum CSV with columns `n,s_n`.
pub fn spectrum_csv(spectrum: &SpectrumResult) -> String {
    let mut out = String::from("n,s_n\n");
    for (n, s) in spectrum.s.iter().enumerate() {
        out.push_str(&format!("{n},{s}\n"));
    }
    out
}

/// Diagnostics sidecar as `key=value` lines.
pub fn spectrum_diagnostics(spec: &GramSpec, spectrum: &SpectrumResult) -> String {
    format!(
        "N={}\nM={}\nstability={}\ngram_min_eig={}\n",
        spec.n, spectrum.m_used, spectrum.stability, spectrum.gram_min_eig
    )
}
