//! Local distance to holomorphic functions, mean oscillation and averages on
//! the disks `D(z, delta tau(z))`, and the holomorphic-plus-small splitting of a
//! symbol built from local best approximations.
//!
//! The best holomorphic approximation on a disk is the orthogonal projection
//! onto the powers `u^k`, `u = (w - center) / radius`, which are orthogonal for
//! the normalized area measure with `mean |u^k|^2 = 1 / (k + 1)`. The disk rules
//! integrate these products exactly, so the discrete projection is exact too.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::lattice::{partition_of_unity, Lattice};
use crate::quadrature::{disk_rule, DiskRule, DiskSamples};
use crate::symbol::Symbol;
use crate::weights::{Point, WeightModel};

pub const DEFAULT_MAX_DEGREE: usize = 24;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Lattice-scale factor `B` used for the comparison profile in [`decompose`].
pub const DECOMPOSE_SCALE: f64 = 2.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicFit {
    pub value: f64,
    /// `h(w) = sum_k coeffs[k] u^k`, all degrees up to `max_degree`.
    pub coeffs: Vec<Complex64>,
    /// Smallest degree whose neglected tail is below `tol * value^2`.
    pub degree_used: usize,
    /// Set when roundoff produced a negative squared distance, reported as zero.
    pub clamped: bool,
}

/// `w_i conj(u_i)^k` and `u_i^k` for a fixed set of disk offsets.
struct PowerTable {
    weighted_conj: Vec<Vec<Complex64>>,
    powers: Vec<Vec<Complex64>>,
}

impl PowerTable {
    fn new(offsets: &[Complex64], weights: &[f64], max_degree: usize) -> Self {
        let n = offsets.len();
        let mut powers = Vec::with_capacity(max_degree + 1);
        let mut weighted_conj = Vec::with_capacity(max_degree + 1);
        let mut cur = vec![Complex64::new(1.0, 0.0); n];
        for k in 0..=max_degree {
            if k > 0 {
                for (c, u) in cur.iter_mut().zip(offsets) {
                    *c *= u;
                }
            }
            weighted_conj.push(
                cur.iter()
                    .zip(weights)
                    .map(|(c, w)| c.conj() * *w)
                    .collect(),
            );
            powers.push(cur.clone());
        }
        Self {
            weighted_conj,
            powers,
        }
    }

    fn max_degree(&self) -> usize {
        self.powers.len() - 1
    }
}

fn mean_sq(values: &[Complex64], weights: &[f64]) -> f64 {
    values
        .iter()
        .zip(weights)
        .map(|(v, w)| v.norm_sqr() * w)
        .sum::<f64>()
        / weights.iter().sum::<f64>()
}

fn mean(values: &[Complex64], weights: &[f64]) -> Complex64 {
    values
        .iter()
        .zip(weights)
        .fold(ZERO, |acc, (v, w)| acc + v * *w)
        / weights.iter().sum::<f64>()
}

fn project(values: &[Complex64], weights: &[f64], table: &PowerTable, tol: f64) -> HolomorphicFit {
    let max_degree = table.max_degree();
    let wsum: f64 = weights.iter().sum();
    let coeffs: Vec<Complex64> = table
        .weighted_conj
        .iter()
        .enumerate()
        .map(|(k, wc)| {
            let m = values.iter().zip(wc).fold(ZERO, |acc, (f, p)| acc + f * p);
            m * ((k + 1) as f64 / wsum)
        })
        .collect();
    let increments: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm_sqr() / (k + 1) as f64)
        .collect();
    let total = mean_sq(values, weights);
    let captured: f64 = increments.iter().sum();
    let estimate = (total - captured).max(0.0);
    // tail[d] = sum_{k > d} increments[k]
    let mut tail = vec![0.0; max_degree + 1];
    for d in (0..max_degree).rev() {
        tail[d] = tail[d + 1] + increments[d + 1];
    }
    let threshold = tol * estimate + 1e-28 * total;
    let degree_used = (0..=max_degree)
        .find(|&d| tail[d] <= threshold)
        .unwrap_or(max_degree);
    let mut resid_sq = 0.0;
    for (i, (f, w)) in values.iter().zip(weights).enumerate() {
        let mut r = *f;
        for (c, p) in coeffs.iter().zip(&table.powers).take(degree_used + 1) {
            r -= c * p[i];
        }
        resid_sq += r.norm_sqr() * w;
    }
    let v2 = resid_sq / wsum - tail[degree_used];
    HolomorphicFit {
        value: v2.max(0.0).sqrt(),
        coeffs,
        degree_used,
        clamped: v2 < 0.0,
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(LabError::InvalidArgument(format!(
            "disk radius must be positive, got {radius}"
        )))
    }
}

fn fit_samples(
    f: &Symbol,
    samples: &DiskSamples,
    table: Option<&PowerTable>,
    max_degree: usize,
    tol: f64,
) -> Result<HolomorphicFit> {
    let values = samples.values(f)?;
    match table {
        Some(t) if t.max_degree() == max_degree => Ok(project(&values, &samples.weights, t, tol)),
        _ => {
            let t = PowerTable::new(&samples.offsets, &samples.weights, max_degree);
            Ok(project(&values, &samples.weights, &t, tol))
        }
    }
}

/// Distance in the normalized `L^2` mean of the disk from `f` to holomorphic functions.
pub fn best_holomorphic_distance(
    f: &Symbol,
    center: Point,
    radius: f64,
    max_degree: usize,
    rule: &DiskRule,
    tol: f64,
) -> Result<HolomorphicFit> {
    check_radius(radius)?;
    if !(tol > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let samples = rule.samples(center, radius, f.jump_radius())?;
    fit_samples(f, &samples, None, max_degree, tol)
}

/// `sqrt(mean |f - mean f|^2)` over the disk.
pub fn mo(f: &Symbol, center: Point, radius: f64, rule: &DiskRule) -> Result<f64> {
    check_radius(radius)?;
    let samples = rule.samples(center, radius, f.jump_radius())?;
    let values = samples.values(f)?;
    Ok(oscillation(&values, &samples.weights))
}

fn oscillation(values: &[Complex64], weights: &[f64]) -> f64 {
    let m = mean(values, weights);
    let centered: Vec<Complex64> = values.iter().map(|v| v - m).collect();
    mean_sq(&centered, weights).sqrt()
}

/// Mean of `f` over the disk.
pub fn hat_avg(f: &Symbol, center: Point, radius: f64, rule: &DiskRule) -> Result<Complex64> {
    check_radius(radius)?;
    let samples = rule.samples(center, radius, f.jump_radius())?;
    Ok(mean(&samples.values(f)?, &samples.weights))
}

/// `sqrt(mean |f|^2)` over the disk.
pub fn m_avg(f: &Symbol, center: Point, radius: f64, rule: &DiskRule) -> Result<f64> {
    check_radius(radius)?;
    let samples = rule.samples(center, radius, f.jump_radius())?;
    Ok(mean_sq(&samples.values(f)?, &samples.weights).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdaProfile {
    pub centers: Vec<Point>,
    pub tau: Vec<f64>,
    pub radius: Vec<f64>,
    pub cell_measure: Vec<f64>,
    pub g: Vec<f64>,
    pub mo: Vec<f64>,
    pub hat: Vec<Complex64>,
    pub degree_used: Vec<usize>,
    /// Number of centers whose squared distance was clamped at zero.
    pub clamped: usize,
}

impl IdaProfile {
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// CSV with columns `index,re,im,tau,cell_measure,G,MO,hat_re,hat_im,degree_used`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,re,im,tau,cell_measure,G,MO,hat_re,hat_im,degree_used\n");
        for i in 0..self.len() {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                i,
                self.centers[i].re,
                self.centers[i].im,
                self.tau[i],
                self.cell_measure[i],
                self.g[i],
                self.mo[i],
                self.hat[i].re,
                self.hat[i].im,
                self.degree_used[i]
            ));
        }
        s
    }
}

/// Radii `delta * tau(z_n)`, checked to keep every disk inside the domain.
fn lattice_radii(model: &WeightModel, lat: &Lattice, delta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if (lat.delta - delta).abs() > 1e-12 * delta.max(1.0) {
        return Err(LabError::InvalidArgument(format!(
            "delta {delta} does not match the lattice delta {}",
            lat.delta
        )));
    }
    if lat.model != *model {
        return Err(LabError::InvalidArgument(format!(
            "lattice was built for {}, not {model}",
            lat.model
        )));
    }
    let mut taus = Vec::with_capacity(lat.len());
    let mut radii = Vec::with_capacity(lat.len());
    for c in &lat.centers {
        let t = model.tau(*c)?;
        let r = delta * t;
        if !model.is_fock() && c.norm() + r >= 1.0 {
            return Err(LabError::Domain(format!(
                "disk of radius {r} around {c} leaves the unit disk"
            )));
        }
        taus.push(t);
        radii.push(r);
    }
    Ok((taus, radii))
}

struct FitEngine {
    rule: DiskRule,
    table: PowerTable,
    max_degree: usize,
}

impl FitEngine {
    fn new(max_degree: usize) -> Self {
        let rule = DiskRule::default();
        let weights: Vec<f64> = rule
            .weights
            .iter()
            .map(|w| w / std::f64::consts::PI)
            .collect();
        let table = PowerTable::new(&rule.nodes, &weights, max_degree);
        Self {
            rule,
            table,
            max_degree,
        }
    }

    fn fit(
        &self,
        f: &Symbol,
        center: Point,
        radius: f64,
    ) -> Result<(HolomorphicFit, DiskSamples, Vec<Complex64>)> {
        let samples = self.rule.samples(center, radius, f.jump_radius())?;
        let values = samples.values(f)?;
        let table = if samples.points.len() == self.rule.nodes.len() {
            None
        } else {
            Some(PowerTable::new(
                &samples.offsets,
                &samples.weights,
                self.max_degree,
            ))
        };
        let fit = project(
            &values,
            &samples.weights,
            table.as_ref().unwrap_or(&self.table),
            DEFAULT_TOL,
        );
        Ok((fit, samples, values))
    }
}

/// `G`, `MO`, mean and degree at every lattice center, on disks of radius `delta tau(z_n)`.
pub fn ida_profile(
    f: &Symbol,
    model: &WeightModel,
    lat: &Lattice,
    delta: f64,
    max_degree: usize,
) -> Result<IdaProfile> {
    let (tau, radius) = lattice_radii(model, lat, delta)?;
    let engine = FitEngine::new(max_degree);
    let rows: Vec<(HolomorphicFit, f64, Complex64)> = lat
        .centers
        .par_iter()
        .zip(radius.par_iter())
        .map(|(c, r)| {
            let (fit, samples, values) = engine.fit(f, *c, *r)?;
            Ok((
                fit,
                oscillation(&values, &samples.weights),
                mean(&values, &samples.weights),
            ))
        })
        .collect::<Result<_>>()?;
    let clamped = rows.iter().filter(|r| r.0.clamped).count();
    Ok(IdaProfile {
        centers: lat.centers.clone(),
        tau,
        radius,
        cell_measure: lat.cell_measure.clone(),
        g: rows.iter().map(|r| r.0.value).collect(),
        mo: rows.iter().map(|r| r.1).collect(),
        hat: rows.iter().map(|r| r.2).collect(),
        degree_used: rows.iter().map(|r| r.0.degree_used).collect(),
        clamped,
    })
}

/// Local polynomial `sum_k coeffs[k] ((w - center) / radius)^k`.
#[derive(Debug, Clone)]
struct LocalPolynomial {
    center: Point,
    radius: f64,
    coeffs: Vec<Complex64>,
}

impl LocalPolynomial {
    fn eval(&self, w: Point) -> Complex64 {
        let u = (w - self.center) / self.radius;
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * u + c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeReport {
    pub probes: usize,
    /// Probes outside the lattice, or whose comparison disk leaves the domain.
    pub skipped: usize,
    pub max_f2_abs: f64,
    /// `max tau |dbar f1| / G` at the comparison scale `B^2 delta`, over probes with `G > 0`.
    pub max_dbar_ratio: f64,
    /// `max M(tau dbar f1) / G`.
    pub max_avg_dbar_ratio: f64,
    /// `max M(f2) / G`.
    pub max_avg_f2_ratio: f64,
}

/// Splits `f = f1 + f2` with `f1 = sum_n h_n psi_n`, `h_n` the best holomorphic
/// approximation of `f` on the support disk of `psi_n`. Ratios are evaluated on `probes`.
pub fn decompose(
    f: &Symbol,
    model: &WeightModel,
    lat: &Lattice,
    delta: f64,
    max_degree: usize,
    probes: &[Point],
) -> Result<(Symbol, Symbol, DecomposeReport)> {
    lattice_radii(model, lat, delta)?;
    // h_n lives on the support disk of psi_n
    let radius: Vec<f64> = lat.radii.iter().map(|r| 2.0 * r).collect();
    if !model.is_fock() {
        if let Some((c, r)) = lat
            .centers
            .iter()
            .zip(&radius)
            .find(|(c, r)| c.norm() + *r >= 1.0)
        {
            return Err(LabError::Domain(format!(
                "partition support of radius {r} around {c} leaves the unit disk"
            )));
        }
    }
    let engine = FitEngine::new(max_degree);
    let locals: Vec<LocalPolynomial> = lat
        .centers
        .par_iter()
        .zip(radius.par_iter())
        .map(|(c, r)| {
            let (fit, _, _) = engine.fit(f, *c, *r)?;
            Ok(LocalPolynomial {
                center: *c,
                radius: *r,
                coeffs: fit.coeffs,
            })
        })
        .collect::<Result<_>>()?;
    let lattice = Arc::new(lat.clone());
    let locals = Arc::new(locals);
    let f1_eval = {
        let lattice = lattice.clone();
        let locals = locals.clone();
        move |z: Point| match partition_of_unity(&lattice, z) {
            Ok(pw) => pw
                .indices
                .iter()
                .zip(&pw.weights)
                .fold(ZERO, |acc, (n, w)| acc + locals[*n].eval(z) * *w),
            Err(_) => ZERO,
        }
    };
    let f1 = Symbol::from_fn(format!("{}_holomorphic_part", f.name()), f1_eval);
    let f2 = f.minus(&f1).named(format!("{}_remainder", f.name()));
    let report = decomposition_report(f, &f1, &f2, model, &lattice, delta, probes)?;
    Ok((f1, f2, report))
}

fn dbar(f: &Symbol, z: Point, step: f64) -> Complex64 {
    let dx = (f.eval(z + step) - f.eval(z - step)) / (2.0 * step);
    let i_step = Complex64::new(0.0, step);
    let dy = (f.eval(z + i_step) - f.eval(z - i_step)) / (2.0 * step);
    // (d_x + i d_y) / 2
    (dx + Complex64::new(0.0, 1.0) * dy) * 0.5
}

fn decomposition_report(
    f: &Symbol,
    f1: &Symbol,
    f2: &Symbol,
    model: &WeightModel,
    lat: &Lattice,
    delta: f64,
    probes: &[Point],
) -> Result<DecomposeReport> {
    let local_rule = disk_rule(4, 8)?;
    let wide = DECOMPOSE_SCALE * DECOMPOSE_SCALE * delta;
    let mut report = DecomposeReport {
        probes: probes.len(),
        skipped: 0,
        max_f2_abs: 0.0,
        max_dbar_ratio: 0.0,
        max_avg_dbar_ratio: 0.0,
        max_avg_f2_ratio: 0.0,
    };
    for z in probes {
        if !lat.region_contains(*z) || !lat.is_covered(*z) || !model.contains(*z) {
            report.skipped += 1;
            continue;
        }
        let tau = model.tau(*z)?;
        let wide_radius = wide * tau;
        let radius = delta * tau;
        if !model.is_fock() && z.norm() + wide_radius >= 1.0 {
            report.skipped += 1;
            continue;
        }
        report.max_f2_abs = report.max_f2_abs.max(f2.eval(*z).norm());
        let g = best_holomorphic_distance(
            f,
            *z,
            wide_radius,
            DEFAULT_MAX_DEGREE,
            &DiskRule::default(),
            DEFAULT_TOL,
        )?
        .value;
        if g <= 1e-12 {
            continue;
        }
        let step = 1e-4 * tau;
        let pointwise = tau * dbar(f1, *z, step).norm();
        let samples = local_rule.samples(*z, radius, None)?;
        let mut scaled_dbar = Vec::with_capacity(samples.points.len());
        for w in &samples.points {
            let t = model.tau(*w)?;
            scaled_dbar.push(dbar(f1, *w, 1e-4 * t) * t);
        }
        let remainder = samples.values(f2)?;
        report.max_dbar_ratio = report.max_dbar_ratio.max(pointwise / g);
        report.max_avg_dbar_ratio = report
            .max_avg_dbar_ratio
            .max(mean_sq(&scaled_dbar, &samples.weights).sqrt() / g);
        report.max_avg_f2_ratio = report
            .max_avg_f2_ratio
            .max(mean_sq(&remainder, &samples.weights).sqrt() / g);
    }
    Ok(report)
}
