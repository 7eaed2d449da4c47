//! Distribution functions, non-increasing rearrangements and `L^p`, weak `L^p`
//! quasinorms of cell-sampled functions.

use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::lattice::build_lattice;
use crate::weights::{WeightKind, WeightModel};

/// Fraction of the captured measure inside which comparisons are trusted.
pub const TRUSTED_FRACTION: f64 = 0.8;

/// Nonnegative values, each carried by a cell of positive measure.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSamples {
    values: Vec<f64>,
    measures: Vec<f64>,
}

impl WeightedSamples {
    pub fn new(values: Vec<f64>, measures: Vec<f64>) -> Result<Self> {
        if values.len() != measures.len() {
            return Err(LabError::InvalidArgument(format!(
                "{} values against {} measures",
                values.len(),
                measures.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(LabError::InvalidArgument(format!(
                "sample value {v} is not finite and nonnegative"
            )));
        }
        if let Some(m) = measures.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(LabError::InvalidArgument(format!(
                "cell measure {m} is not finite and positive"
            )));
        }
        Ok(Self { values, measures })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }
}

/// `lambda({|f| > level})`.
pub fn distribution(s: &WeightedSamples, level: f64) -> Result<f64> {
    if !(level >= 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "level must be nonnegative, got {level}"
        )));
    }
    Ok(s.values
        .iter()
        .zip(&s.measures)
        .filter(|(v, _)| **v > level)
        .map(|(_, m)| m)
        .sum())
}

/// Right-continuous step function: `values[k]` on `[breakpoints[k], breakpoints[k + 1])`, zero after.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementCurve {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    /// Measure of the support, the last breakpoint.
    pub total_measure: f64,
}

impl RearrangementCurve {
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.values.first().copied().unwrap_or(0.0);
        }
        // first breakpoint strictly greater than t closes the step containing t
        let k = self.breakpoints.partition_point(|b| *b <= t);
        if k == 0 || k > self.values.len() {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    /// `(int_0^inf f*(t)^p dt)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        let sum: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v.powf(p) * (self.breakpoints[k + 1] - self.breakpoints[k]))
            .sum();
        Ok(sum.powf(1.0 / p))
    }

    /// The curve cut to zero beyond `t_max`.
    pub fn truncated(&self, t_max: f64) -> Self {
        let mut breakpoints = vec![0.0];
        let mut values = Vec::new();
        for (k, v) in self.values.iter().enumerate() {
            if self.breakpoints[k] >= t_max {
                break;
            }
            values.push(*v);
            breakpoints.push(self.breakpoints[k + 1].min(t_max));
        }
        let total_measure = *breakpoints.last().unwrap_or(&0.0);
        Self {
            breakpoints,
            values,
            total_measure,
        }
    }

    /// Joins consecutive steps whose values agree to `rel_tol`, keeping the first value.
    pub fn merged(&self, rel_tol: f64) -> Self {
        let mut breakpoints = vec![0.0];
        let mut values: Vec<f64> = Vec::new();
        for (k, v) in self.values.iter().enumerate() {
            match values.last() {
                Some(last) if (last - v).abs() <= rel_tol * last.abs() => {
                    *breakpoints.last_mut().expect("nonempty") = self.breakpoints[k + 1];
                }
                _ => {
                    values.push(*v);
                    breakpoints.push(self.breakpoints[k + 1]);
                }
            }
        }
        Self {
            breakpoints,
            values,
            total_measure: self.total_measure,
        }
    }

    /// CSV with columns `t,fstar`: each step's left breakpoint and value, closed by `(total, 0)`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,fstar\n");
        for (t, v) in self.breakpoints.iter().zip(&self.values) {
            s.push_str(&format!("{t},{v}\n"));
        }
        s.push_str(&format!("{},0\n", self.total_measure));
        s
    }
}

/// Sorts by value descending (ties by original index), merging equal values; zero values are dropped.
pub fn rearrangement(s: &WeightedSamples) -> Result<RearrangementCurve> {
    if s.is_empty() {
        return Err(LabError::InvalidArgument("no samples to rearrange".into()));
    }
    let mut order: Vec<usize> = (0..s.len()).filter(|&i| s.values[i] > 0.0).collect();
    order.sort_by(|&a, &b| match s.values[b].partial_cmp(&s.values[a]) {
        Some(Ordering::Equal) | None => a.cmp(&b),
        Some(o) => o,
    });
    let mut breakpoints = vec![0.0];
    let mut values: Vec<f64> = Vec::new();
    let mut acc = 0.0;
    for i in order {
        acc += s.measures[i];
        if values.last() == Some(&s.values[i]) {
            *breakpoints.last_mut().expect("nonempty") = acc;
        } else {
            values.push(s.values[i]);
            breakpoints.push(acc);
        }
    }
    Ok(RearrangementCurve {
        breakpoints,
        values,
        total_measure: acc,
    })
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(LabError::InvalidArgument(format!(
            "p must be positive and finite, got {p}"
        )))
    }
}

/// `sup_t t^{1/p} f*(t)`, attained at the right end of a step.
pub fn weak_lp(curve: &RearrangementCurve, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(curve
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| v * curve.breakpoints[k + 1].powf(1.0 / p))
        .fold(0.0, f64::max))
}

pub fn weak_lp_samples(s: &WeightedSamples, p: f64) -> Result<f64> {
    weak_lp(&rearrangement(s)?, p)
}

/// `(sum values^p measures)^{1/p}`.
pub fn lp_norm(s: &WeightedSamples, p: f64) -> Result<f64> {
    check_p(p)?;
    let sum: f64 = s
        .values
        .iter()
        .zip(&s.measures)
        .map(|(v, m)| v.powf(p) * m)
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// Rearrangement of `tau` for the unweighted Bergman space: `sqrt(pi) / (1 + t)`.
pub fn bergman_tau_rearrangement(t: f64) -> f64 {
    PI.sqrt() / (1.0 + t.max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormReport {
    pub delta: f64,
    pub extent: f64,
    pub cells: usize,
    pub captured_measure: f64,
    /// Largest relative error of the sampled rearrangement at step midpoints in `[t_lo, t_hi]`.
    pub max_rel_error: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// Weak `L^1` quasinorm of the sampled curve cut at the trusted fraction of the captured measure.
    pub weak_l1: f64,
    pub weak_l1_rel_error: f64,
}

/// Samples `tau` on a Bergman lattice and compares its rearrangement with the closed form.
pub fn rearrangement_closed_form_check(
    model: &WeightModel,
    delta: f64,
    extent: f64,
    (t_lo, t_hi): (f64, f64),
) -> Result<ClosedFormReport> {
    if model.kind() != WeightKind::StandardBergman || model.alpha() != 0.0 {
        return Err(LabError::InvalidArgument(format!(
            "closed form is known for bergman:0 only, got {model}"
        )));
    }
    let lat = build_lattice(model, delta, extent)?;
    let values = lat
        .centers
        .iter()
        .map(|c| model.tau(*c))
        .collect::<Result<Vec<_>>>()?;
    let samples = WeightedSamples::new(values, lat.cell_measure.clone())?;
    let curve = rearrangement(&samples)?;
    let captured = curve.total_measure;
    if t_hi > TRUSTED_FRACTION * captured {
        return Err(LabError::InvalidArgument(format!(
            "t range up to {t_hi} exceeds the trusted part of the captured measure {captured}"
        )));
    }
    let plateaus = curve.merged(1e-12);
    let mut max_rel_error: f64 = 0.0;
    for (k, v) in plateaus.values.iter().enumerate() {
        let mid = 0.5 * (plateaus.breakpoints[k] + plateaus.breakpoints[k + 1]);
        if mid < t_lo || mid > t_hi {
            continue;
        }
        let exact = bergman_tau_rearrangement(mid);
        max_rel_error = max_rel_error.max((v - exact).abs() / exact);
    }
    let weak_l1 = weak_lp(&curve.truncated(TRUSTED_FRACTION * captured), 1.0)?;
    Ok(ClosedFormReport {
        delta,
        extent,
        cells: lat.len(),
        captured_measure: captured,
        max_rel_error,
        t_lo,
        t_hi,
        weak_l1,
        weak_l1_rel_error: (weak_l1 - PI.sqrt()).abs() / PI.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn example() -> WeightedSamples {
        WeightedSamples::new(vec![3.0, 1.0, 2.0], vec![0.5, 1.0, 0.25]).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let s = example();
        assert_eq!(distribution(&s, 2.5).unwrap(), 0.5);
        assert_eq!(distribution(&s, 3.0).unwrap(), 0.0);
        assert_eq!(distribution(&s, 1.0).unwrap(), 0.75);
        assert!(distribution(&s, -1.0).is_err());
        let disk = WeightedSamples::new(vec![1.0, 0.0], vec![1.0, 5.0]).unwrap();
        assert_eq!(distribution(&disk, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn rearrangement_examples() {
        let c = rearrangement(&example()).unwrap();
        assert_eq!(c.breakpoints, vec![0.0, 0.5, 0.75, 1.75]);
        assert_eq!(c.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(c.eval(0.6), 2.0);
        assert_eq!(c.eval(0.5), 2.0);
        assert_eq!(c.eval(1.75), 0.0);
        let flat =
            rearrangement(&WeightedSamples::new(vec![2.0, 2.0], vec![0.3, 0.4]).unwrap()).unwrap();
        assert_eq!(flat.values, vec![2.0]);
        assert_relative_eq!(flat.total_measure, 0.7);
        assert!(WeightedSamples::new(vec![1.0], vec![0.0]).is_err());
        assert!(WeightedSamples::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn norms() {
        let c = rearrangement(&example()).unwrap();
        assert_relative_eq!(weak_lp(&c, 1.0).unwrap(), 1.75);
        let flat = rearrangement(&WeightedSamples::new(vec![3.0], vec![4.0]).unwrap()).unwrap();
        assert_relative_eq!(weak_lp(&flat, 2.0).unwrap(), 6.0);
        assert_relative_eq!(
            lp_norm(&WeightedSamples::new(vec![2.0], vec![0.25]).unwrap(), 2.0).unwrap(),
            1.0
        );
        assert_relative_eq!(lp_norm(&example(), 1.0).unwrap(), 3.0);
        assert!(lp_norm(&example(), f64::INFINITY).is_err());
        assert!(weak_lp(&c, 0.0).is_err());
        for p in [0.5, 1.0, 2.0, 3.5] {
            assert_relative_eq!(
                c.lp_norm(p).unwrap(),
                lp_norm(&example(), p).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn truncation() {
        let c = rearrangement(&example()).unwrap().truncated(0.6);
        assert_eq!(c.breakpoints, vec![0.0, 0.5, 0.6]);
        assert_eq!(c.values, vec![3.0, 2.0]);
    }

    #[test]
    fn merging_near_equal_steps() {
        let s = WeightedSamples::new(vec![1.0, 1.0 + 1e-15, 0.5], vec![1.0, 1.0, 1.0]).unwrap();
        let c = rearrangement(&s).unwrap();
        assert_eq!(c.values.len(), 3);
        let m = c.merged(1e-12);
        assert_eq!(m.breakpoints, vec![0.0, 2.0, 3.0]);
        assert_eq!(m.values.len(), 2);
    }

    #[test]
    fn closed_form_values() {
        assert_relative_eq!(bergman_tau_rearrangement(0.0), PI.sqrt());
        assert!(bergman_tau_rearrangement(1e300) < 1e-299);
        assert!(rearrangement_closed_form_check(
            &WeightModel::fock(1.0).unwrap(),
            0.2,
            3.0,
            (0.5, 1.0)
        )
        .is_err());
    }

    #[test]
    fn csv_layout() {
        let csv = rearrangement(&example()).unwrap().to_csv();
        assert_eq!(csv, "t,fstar\n0,3\n0.5,2\n0.75,1\n1.75,0\n");
    }
}
