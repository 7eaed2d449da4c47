//! Reports that put spectra, local distance profiles and rearrangements side by side.

use crate::error::{LabError, Result};
use crate::hankel::{convex_trace, schatten, spectrum, GramSpec, SpectrumResult};
use crate::ida::{ida_profile, IdaProfile, DEFAULT_MAX_DEGREE};
use crate::lattice::{build_lattice, Lattice};
use crate::quadrature::DiskRule;
use crate::rearrange::{
    rearrangement, weak_lp, RearrangementCurve, WeightedSamples, TRUSTED_FRACTION,
};
use crate::symbol::Symbol;
use crate::weights::{Point, WeightModel};

/// `G*` is sampled at `t = INDEX_COUPLING * n` against `s_n`.
pub const INDEX_COUPLING: f64 = 1.0;
/// Grid searched for the constants of the convex-trace comparison.
pub const CONSTANT_GRID_MAX: f64 = 16.0;
pub const VDA_FRACTIONS: [f64; 3] = [0.5, 0.7, 0.9];

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub window: (usize, usize),
    /// Least-squares slopes of `ln a_n`, `ln b_n` against `ln(1 + n)`.
    pub exponent_a: f64,
    pub exponent_b: f64,
    /// Geometric mean of `a_n / b_n` over the window.
    pub scale: f64,
    /// Extremes of `a_n / (scale b_n)`.
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl DecayReport {
    pub fn spread(&self) -> f64 {
        self.ratio_max / self.ratio_min
    }

    pub fn exponents_near(&self, target: f64, tol: f64) -> bool {
        (self.exponent_a - target).abs() <= tol && (self.exponent_b - target).abs() <= tol
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Log-log slopes and the two-sided ratio of `a` against `b` on `window` (inclusive).
pub fn compare_decay(a: &[f64], b: &[f64], window: (usize, usize)) -> Result<DecayReport> {
    let (lo, hi) = window;
    if lo < 1 || hi <= lo {
        return Err(LabError::InvalidArgument(format!(
            "window must satisfy 1 <= n_lo < n_hi, got {window:?}"
        )));
    }
    if hi >= a.len() || hi >= b.len() {
        return Err(LabError::InvalidArgument(format!(
            "window end {hi} beyond sequences of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let range = lo..=hi;
    for n in range.clone() {
        if !(a[n] > 0.0 && b[n] > 0.0 && a[n].is_finite() && b[n].is_finite()) {
            return Err(LabError::InvalidArgument(format!(
                "sequences must be positive on the window; at n = {n}: {}, {}",
                a[n], b[n]
            )));
        }
    }
    let xs: Vec<f64> = range.clone().map(|n| (1.0 + n as f64).ln()).collect();
    let la: Vec<f64> = range.clone().map(|n| a[n].ln()).collect();
    let lb: Vec<f64> = range.clone().map(|n| b[n].ln()).collect();
    let log_ratio: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x - y).collect();
    let mean_log = log_ratio.iter().sum::<f64>() / log_ratio.len() as f64;
    let ratios: Vec<f64> = log_ratio.iter().map(|r| (r - mean_log).exp()).collect();
    Ok(DecayReport {
        window,
        exponent_a: slope(&xs, &la),
        exponent_b: slope(&xs, &lb),
        scale: mean_log.exp(),
        ratio_min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        ratio_max: ratios.iter().copied().fold(0.0, f64::max),
    })
}

fn profile_curve(profile: &IdaProfile, values: &[f64]) -> Result<Option<RearrangementCurve>> {
    if values.iter().all(|v| *v == 0.0) {
        return Ok(None);
    }
    let samples = WeightedSamples::new(values.to_vec(), profile.cell_measure.clone())?;
    Ok(Some(rearrangement(&samples)?))
}

/// Samples `curve` at `INDEX_COUPLING * n`, `n = 0..len`.
fn sample_curve(curve: &RearrangementCurve, len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| curve.eval(INDEX_COUPLING * n as f64))
        .collect()
}

#[derive(Debug, Clone)]
pub struct DecayEquivalenceReport {
    pub spectrum: SpectrumResult,
    /// `G*(kappa n)` for `n < N`.
    pub rearranged: Vec<f64>,
    pub kappa: f64,
    /// Measure captured by the lattice cells.
    pub captured_measure: f64,
    /// `lambda`-measure of the cells where `G` exceeds `1e-8`.
    pub support_measure: f64,
    /// `None` when either sequence vanishes on the window.
    pub decay: Option<DecayReport>,
    pub degenerate: bool,
}

/// Spectrum of the truncated Hankel operator against the rearranged local distance profile.
pub fn decay_equivalence_report(
    f: &Symbol,
    model: &WeightModel,
    lat: &Lattice,
    delta: f64,
    n: usize,
    window: (usize, usize),
) -> Result<DecayEquivalenceReport> {
    let spectrum = spectrum(&GramSpec::new(*model, f.clone(), n)?)?;
    let profile = ida_profile(f, model, lat, delta, DEFAULT_MAX_DEGREE)?;
    let captured_measure: f64 = profile.cell_measure.iter().sum();
    let support_measure = profile
        .g
        .iter()
        .zip(&profile.cell_measure)
        .filter(|(g, _)| **g > 1e-8)
        .map(|(_, m)| m)
        .sum();
    let rearranged = match profile_curve(&profile, &profile.g)? {
        Some(curve) => sample_curve(&curve, n),
        None => vec![0.0; n],
    };
    let (lo, hi) = window;
    let positive = |v: &[f64]| hi < v.len() && v[lo..=hi].iter().all(|x| *x > 0.0);
    let degenerate = !(positive(&spectrum.s) && positive(&rearranged));
    let decay = if degenerate {
        None
    } else {
        Some(compare_decay(&spectrum.s, &rearranged, window)?)
    };
    Ok(DecayEquivalenceReport {
        spectrum,
        rearranged,
        kappa: INDEX_COUPLING,
        captured_measure,
        support_measure,
        decay,
        degenerate,
    })
}

/// `max_n G(z_n)`.
pub fn bda_estimate(profile: &IdaProfile) -> Result<f64> {
    if profile.is_empty() {
        return Err(LabError::InvalidArgument("empty profile".into()));
    }
    Ok(profile.g.iter().copied().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VdaReport {
    pub fractions: Vec<f64>,
    /// `max G` over centers with `|z| > fraction * max |z_n|`.
    pub outer_max: Vec<f64>,
}

impl VdaReport {
    /// Whether the outer maxima do not increase as the fraction grows.
    pub fn non_increasing(&self) -> bool {
        self.outer_max.windows(2).all(|w| w[1] <= w[0])
    }
}

pub fn vda_estimate(profile: &IdaProfile) -> Result<VdaReport> {
    if profile.is_empty() {
        return Err(LabError::InvalidArgument("empty profile".into()));
    }
    let reach = profile.centers.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let outer_max = VDA_FRACTIONS
        .iter()
        .map(|frac| {
            profile
                .centers
                .iter()
                .zip(&profile.g)
                .filter(|(c, _)| c.norm() > frac * reach)
                .map(|(_, g)| *g)
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(VdaReport {
        fractions: VDA_FRACTIONS.to_vec(),
        outer_max,
    })
}

#[derive(Debug, Clone)]
pub struct BlochReport {
    /// Extremes over centers of `G(conj phi)(z_n) / sup_{D(z_n, delta tau(z_n))} tau |phi'|`.
    pub max_pointwise_ratio: f64,
    pub min_pointwise_ratio: f64,
    /// `(G(conj phi))*` against `(tau |phi'|)*` on integer `t`.
    pub decay: Option<DecayReport>,
    pub degenerate: bool,
}

/// Compares `G(conj phi)` with the Bloch-type quantity `tau |phi'|`, pointwise and after rearrangement.
pub fn bloch_compare(
    phi: &Symbol,
    model: &WeightModel,
    lat: &Lattice,
    delta: f64,
    window: (usize, usize),
) -> Result<BlochReport> {
    if !phi.is_holomorphic() {
        return Err(LabError::InvalidArgument(format!(
            "`{}` carries no holomorphic derivative",
            phi.name()
        )));
    }
    let profile = ida_profile(&phi.conjugate(), model, lat, delta, DEFAULT_MAX_DEGREE)?;
    let bloch = |z: Point| -> Result<f64> {
        let d = phi.derivative(z).expect("holomorphic symbol");
        Ok(model.tau(z)? * d.norm())
    };
    let rule = DiskRule::default();
    let mut max_ratio: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    let mut at_center = Vec::with_capacity(profile.len());
    for ((c, r), g) in profile.centers.iter().zip(&profile.radius).zip(&profile.g) {
        let mut local_sup = bloch(*c)?;
        for u in &rule.nodes {
            let w = c + u * *r;
            local_sup = local_sup.max(bloch(w)?);
        }
        // boundary circle, where the supremum of a subharmonic quantity sits
        for j in 0..rule.n_t {
            let w = c + Point::from_polar(*r, std::f64::consts::TAU * j as f64 / rule.n_t as f64);
            local_sup = local_sup.max(bloch(w)?);
        }
        at_center.push(bloch(*c)?);
        if local_sup > 0.0 {
            let ratio = g / local_sup;
            max_ratio = max_ratio.max(ratio);
            min_ratio = min_ratio.min(ratio);
        }
    }
    let g_curve = profile_curve(&profile, &profile.g)?;
    let b_curve = profile_curve(&profile, &at_center)?;
    let (decay, degenerate) = match (g_curve, b_curve) {
        (Some(gc), Some(bc)) => {
            let len = window.1 + 1;
            let a = sample_curve(&gc, len);
            let b = sample_curve(&bc, len);
            (Some(compare_decay(&a, &b, window)?), false)
        }
        _ => (None, true),
    };
    if !min_ratio.is_finite() {
        min_ratio = 0.0;
    }
    Ok(BlochReport {
        max_pointwise_ratio: max_ratio,
        min_pointwise_ratio: min_ratio,
        decay,
        degenerate,
    })
}

#[derive(Debug, Clone)]
pub struct BergerCoburnReport {
    pub p: f64,
    pub weak_f: f64,
    pub weak_conj: f64,
    /// `weak_f / weak_conj`; `None` when either side vanishes.
    pub ratio: Option<f64>,
    /// Weak `L^p` quasinorm of the rearranged mean oscillation, shared by `f` and `conj f`.
    pub mo_weak: f64,
    pub degenerate: bool,
    pub spectrum_f: SpectrumResult,
    pub spectrum_conj: SpectrumResult,
}

/// Weak Schatten quasinorms of `H_f` and `H_{conj f}` for a bounded symbol.
pub fn berger_coburn(
    f: &Symbol,
    model: &WeightModel,
    n: usize,
    p: f64,
) -> Result<BergerCoburnReport> {
    if f.bound().is_none() {
        return Err(LabError::InvalidArgument(format!(
            "symbol `{}` has no declared bound",
            f.name()
        )));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "p must exceed 1, got {p}"
        )));
    }
    let conj = f.conjugate();
    let spectrum_f = spectrum(&GramSpec::new(*model, f.clone(), n)?)?;
    let spectrum_conj = spectrum(&GramSpec::new(*model, conj, n)?)?;
    let weak_f = schatten(&spectrum_f, p)?.1;
    let weak_conj = schatten(&spectrum_conj, p)?.1;
    let degenerate = weak_f == 0.0 || weak_conj == 0.0;
    let ratio = if degenerate {
        None
    } else {
        Some(weak_f / weak_conj)
    };
    let (delta, extent) = if model.is_fock() {
        (0.5, 4.0)
    } else {
        (0.25, 0.95)
    };
    let lat = build_lattice(model, delta, extent)?;
    let profile = ida_profile(f, model, &lat, delta, 0)?;
    let mo_weak = match profile_curve(&profile, &profile.mo)? {
        Some(curve) => weak_lp(&curve.truncated(TRUSTED_FRACTION * curve.total_measure), p)?,
        None => 0.0,
    };
    Ok(BergerCoburnReport {
        p,
        weak_f,
        weak_conj,
        ratio,
        mo_weak,
        degenerate,
        spectrum_f,
        spectrum_conj,
    })
}

#[derive(Debug, Clone)]
pub struct ConvexTraceReport {
    pub thetas: Vec<f64>,
    /// `sum_n (s_n - theta)^+`.
    pub spectral: Vec<f64>,
    /// `(B, C)` minimizing `max(B, C)` on the grid, if any.
    pub constants: Option<(f64, f64)>,
    pub spectrum: SpectrumResult,
}

impl ConvexTraceReport {
    pub fn passes_within(&self, cap: f64) -> bool {
        matches!(self.constants, Some((b, c)) if b <= cap && c <= cap)
    }
}

/// `n_theta` log-spaced levels between `s_hi_index` and `s_lo_index` of a spectrum.
pub fn log_spaced_thetas(
    spectrum: &SpectrumResult,
    lo_index: usize,
    hi_index: usize,
    n_theta: usize,
) -> Result<Vec<f64>> {
    let s = &spectrum.s;
    if lo_index >= s.len() || hi_index >= s.len() || n_theta < 2 {
        return Err(LabError::InvalidArgument(
            "theta grid outside the spectrum".into(),
        ));
    }
    let (a, b) = (s[lo_index], s[hi_index]);
    if !(a > 0.0 && b > 0.0) {
        return Err(LabError::InvalidArgument(
            "theta grid endpoints must be positive".into(),
        ));
    }
    let (la, lb) = (a.ln(), b.ln());
    Ok((0..n_theta)
        .map(|i| (la + (lb - la) * i as f64 / (n_theta - 1) as f64).exp())
        .collect())
}

fn cell_trace(profile: &IdaProfile, scale: f64, theta: f64) -> f64 {
    profile
        .g
        .iter()
        .zip(&profile.cell_measure)
        .map(|(g, m)| (g * scale - theta).max(0.0) * m)
        .sum()
}

fn ratio(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        0.0
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Two-sided comparison of `sum (s_n - theta)^+` with `sum_cells (B G - theta)^+ lambda(cell)`.
pub fn convex_trace_check(
    f: &Symbol,
    model: &WeightModel,
    lat: &Lattice,
    delta: f64,
    n: usize,
    thetas: &[f64],
) -> Result<ConvexTraceReport> {
    if thetas.is_empty() {
        return Err(LabError::InvalidArgument("empty theta grid".into()));
    }
    let spectrum = spectrum(&GramSpec::new(*model, f.clone(), n)?)?;
    let profile = ida_profile(f, model, lat, delta, DEFAULT_MAX_DEGREE)?;
    let spectral = thetas
        .iter()
        .map(|t| convex_trace(&spectrum, *t))
        .collect::<Result<Vec<_>>>()?;
    let grid: Vec<f64> = (0..)
        .map(|i| 1.0 + 0.5 * i as f64)
        .take_while(|v| *v <= CONSTANT_GRID_MAX)
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for &b in &grid {
        let needed = thetas
            .iter()
            .zip(&spectral)
            .map(|(t, l)| {
                let upper = ratio(*l, cell_trace(&profile, b, *t));
                let lower = ratio(cell_trace(&profile, 1.0 / b, *t), *l);
                upper.max(lower)
            })
            .fold(0.0, f64::max);
        if let Some(&c) = grid.iter().find(|c| **c >= needed) {
            let better = match best {
                None => true,
                Some((bb, bc)) => b.max(c) < bb.max(bc),
            };
            if better {
                best = Some((b, c));
            }
        }
    }
    Ok(ConvexTraceReport {
        thetas: thetas.to_vec(),
        spectral,
        constants: best,
        spectrum,
    })
}

/// Flat `key=value` rendering of a decay report.
pub fn decay_report_text(r: &DecayReport) -> String {
    format!(
        "n_lo={}\nn_hi={}\nexponent_a={}\nexponent_b={}\nscale={}\nratio_min={}\nratio_max={}\n",
        r.window.0, r.window.1, r.exponent_a, r.exponent_b, r.scale, r.ratio_min, r.ratio_max
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn decay_of_known_sequences() {
        let a: Vec<f64> = (0..64)
            .map(|n| 1.0 / (((n + 1) * (n + 2)) as f64).sqrt())
            .collect();
        let b: Vec<f64> = (0..64)
            .map(|n| std::f64::consts::PI.sqrt() / (1.0 + n as f64))
            .collect();
        let r = compare_decay(&a, &b, (5, 50)).unwrap();
        assert!((r.exponent_a + 1.0).abs() <= 0.03, "{r:?}");
        assert_relative_eq!(r.exponent_b, -1.0, epsilon = 1e-12);
        assert!(r.spread() <= 1.5);
        let same = compare_decay(&a, &a, (5, 50)).unwrap();
        assert_eq!(same.exponent_a, same.exponent_b);
        assert_relative_eq!(same.ratio_min, 1.0, epsilon = 1e-14);
        assert_relative_eq!(same.ratio_max, 1.0, epsilon = 1e-14);
        let inv: Vec<f64> = (0..64).map(|n| 1.0 / n.max(1) as f64).collect();
        let inv2: Vec<f64> = inv.iter().map(|x| x * x).collect();
        let r = compare_decay(&inv, &inv2, (5, 50)).unwrap();
        assert!((r.exponent_a - r.exponent_b - 1.0).abs() < 0.15);
        assert_relative_eq!(r.spread(), 10.0, max_relative = 1e-12);
    }

    #[test]
    fn decay_is_scale_invariant() {
        let a: Vec<f64> = (0..40)
            .map(|n| (1.0 + n as f64).powf(-0.7) * (1.0 + 0.1 * (n as f64).sin()))
            .collect();
        let b: Vec<f64> = (0..40).map(|n| (1.0 + n as f64).powf(-0.5)).collect();
        let r1 = compare_decay(&a, &b, (2, 30)).unwrap();
        let scaled: Vec<f64> = a.iter().map(|x| x * 37.5).collect();
        let r2 = compare_decay(&scaled, &b, (2, 30)).unwrap();
        assert_relative_eq!(r1.exponent_a, r2.exponent_a, epsilon = 1e-12);
        assert_relative_eq!(r1.spread(), r2.spread(), max_relative = 1e-12);
    }

    #[test]
    fn decay_input_checks() {
        let a = vec![1.0; 10];
        let mut b = vec![1.0; 10];
        b[4] = 0.0;
        assert!(compare_decay(&a, &b, (2, 8)).is_err());
        assert!(compare_decay(&a, &a, (0, 8)).is_err());
        assert!(compare_decay(&a, &a, (2, 10)).is_err());
    }

    #[test]
    fn constant_symbol_reports_degenerate() {
        let model = WeightModel::bergman(0.0).unwrap();
        let lat = build_lattice(&model, 0.25, 0.9).unwrap();
        let c = Symbol::constant(Complex64::new(2.0, 0.0));
        let r = decay_equivalence_report(&c, &model, &lat, 0.25, 16, (2, 10)).unwrap();
        assert!(r.degenerate && r.decay.is_none());
        let thetas = [0.1, 0.2];
        let t = convex_trace_check(&c, &model, &lat, 0.25, 16, &thetas).unwrap();
        assert_eq!(t.constants, Some((1.0, 1.0)));
    }

    #[test]
    fn fock_conj_z_convex_trace_is_exact() {
        let model = WeightModel::fock(1.0).unwrap();
        let lat = build_lattice(&model, 0.5, 3.0).unwrap();
        let f = Symbol::from_catalog("conj_z").unwrap();
        let thetas = [0.25, 0.5, 0.9, 1.5];
        let r = convex_trace_check(&f, &model, &lat, 0.5, 12, &thetas).unwrap();
        for (t, l) in thetas.iter().zip(&r.spectral) {
            assert_relative_eq!(*l, 12.0 * (1.0 - t).max(0.0), epsilon = 1e-10);
        }
    }

    #[test]
    fn bda_and_vda() {
        let model = WeightModel::fock(1.0).unwrap();
        let lat = build_lattice(&model, 0.4, 3.0).unwrap();
        let prof = ida_profile(
            &Symbol::from_catalog("conj_z").unwrap(),
            &model,
            &lat,
            0.4,
            24,
        )
        .unwrap();
        assert_relative_eq!(
            bda_estimate(&prof).unwrap(),
            0.4 * std::f64::consts::PI.sqrt() / 2f64.sqrt(),
            max_relative = 1e-12
        );
        let v = vda_estimate(&prof).unwrap();
        for m in &v.outer_max {
            assert_relative_eq!(*m, v.outer_max[0], max_relative = 1e-12);
        }
        let holo = ida_profile(
            &Symbol::from_catalog("holo_z").unwrap(),
            &model,
            &lat,
            0.4,
            24,
        )
        .unwrap();
        assert!(bda_estimate(&holo).unwrap() < 1e-9);
        let jump = ida_profile(&Symbol::inv_z_outside(), &model, &lat, 0.4, 24).unwrap();
        let v = vda_estimate(&jump).unwrap();
        assert!(v.non_increasing());
        assert!(v.outer_max[2] <= 1e-8);
    }

    #[test]
    fn bloch_pointwise_bound_for_z_squared() {
        let model = WeightModel::fock(1.0).unwrap();
        let lat = build_lattice(&model, 0.5, 3.0).unwrap();
        let phi = Symbol::from_catalog("holo_z_sq").unwrap();
        let r = bloch_compare(&phi, &model, &lat, 0.5, (1, 10)).unwrap();
        assert!(r.max_pointwise_ratio <= 1.0 + 1e-9, "{r:?}");
        assert!(bloch_compare(&Symbol::bounded_mix(), &model, &lat, 0.5, (1, 10)).is_err());
        let c = Symbol::constant(Complex64::new(1.0, 1.0));
        assert!(
            bloch_compare(&c, &model, &lat, 0.5, (1, 10))
                .unwrap()
                .degenerate
        );
    }

    #[test]
    fn berger_coburn_edge_cases() {
        let model = WeightModel::fock(1.0).unwrap();
        let radial = Symbol::from_fn("radial", |z: Point| {
            Complex64::new(1.0 / (1.0 + z.norm_sqr()), 0.0)
        })
        .with_band((0, 0))
        .with_bound(1.0)
        .real_valued();
        let r = berger_coburn(&radial, &model, 16, 2.0).unwrap();
        assert_eq!(r.ratio, Some(1.0));
        assert_eq!(r.spectrum_f.s, r.spectrum_conj.s);
        assert!(berger_coburn(&Symbol::from_fn("u", |z: Point| z), &model, 8, 2.0).is_err());
        assert!(berger_coburn(&radial, &model, 8, 1.0).is_err());
        let bergman = WeightModel::bergman(0.0).unwrap();
        let poly = Symbol::from_catalog("holo_z").unwrap().with_bound(1.0);
        let r = berger_coburn(&poly, &bergman, 8, 2.0).unwrap();
        assert!(r.degenerate && r.ratio.is_none());
        assert!(r.weak_f == 0.0 && r.weak_conj > 0.0);
    }
}
