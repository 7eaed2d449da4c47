//! Structural checks run by `verify`.

use std::f64::consts::PI;

use hankel_lab::ida::{best_holomorphic_distance, decompose, mo, DEFAULT_TOL};
use hankel_lab::lattice::{build_lattice, dbar_partition, partition_of_unity, verify_lattice};
use hankel_lab::quadrature::{
    disk_rule, global_rule, DiskRule, DEFAULT_GLOBAL_NR, DEFAULT_GLOBAL_NT,
};
use hankel_lab::rearrange::{rearrangement, rearrangement_closed_form_check, WeightedSamples};
use hankel_lab::symbol::CATALOG;
use hankel_lab::{Point, Symbol, WeightModel};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

pub const SUITES: &[&str] = &["lattice", "quadrature", "lemmas", "rearrange"];

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        pass,
        detail,
    }
}

pub fn run_suite(suite: &str, seed: u64) -> Result<Vec<Check>, CliError> {
    match suite {
        "lattice" => lattice(seed),
        "quadrature" => quadrature(),
        "lemmas" => lemmas(),
        "rearrange" => rearrange(seed),
        other => Err(CliError::Config(format!(
            "unknown suite `{other}`; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

fn builtin_spaces() -> Vec<(WeightModel, f64)> {
    vec![
        (WeightModel::fock(1.0).unwrap(), 3.0),
        (WeightModel::bergman(0.0).unwrap(), 0.9),
        (WeightModel::bergman(2.0).unwrap(), 0.9),
    ]
}

fn probes(model: &WeightModel, count: usize) -> Vec<Point> {
    let reach = if model.is_fock() { 3.0 } else { 0.4 };
    (0..count)
        .map(|i| Point::from_polar(reach * (i as f64 + 0.5) / count as f64, 2.399963 * i as f64))
        .collect()
}

fn lattice(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for (model, extent) in builtin_spaces() {
        for delta in [0.25, 0.5, 1.0] {
            let lat = build_lattice(&model, delta, extent)?;
            let rep = verify_lattice(&lat, 2000, seed)?;
            out.push(check(
                format!("covering {model} delta={delta}"),
                rep.covered && rep.min_gap_ratio > 1.0 && rep.multiplicity_max <= 8,
                format!(
                    "uncovered {}, separation ratio {:.4}, multiplicity {}",
                    rep.uncovered, rep.min_gap_ratio, rep.multiplicity_max
                ),
            ));
            let (mut sum_err, mut dbar_err): (f64, f64) = (0.0, 0.0);
            for z in probes(&model, 20) {
                let pw = partition_of_unity(&lat, z)?;
                sum_err = sum_err.max((pw.weights.iter().sum::<f64>() - 1.0).abs());
                let step = 1e-5 * model.tau(z)?;
                let total: Complex64 = pw
                    .indices
                    .iter()
                    .map(|n| dbar_partition(&lat, *n, z, step))
                    .sum::<hankel_lab::Result<Complex64>>()?;
                dbar_err = dbar_err.max(total.norm() * model.tau(z)?);
            }
            out.push(check(
                format!("partition of unity {model} delta={delta}"),
                sum_err <= 1e-12 && dbar_err <= 1e-6,
                format!("sum error {sum_err:.2e}, scaled dbar of the sum {dbar_err:.2e}"),
            ));
        }
    }
    Ok(out)
}

fn quadrature() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let disk = disk_rule(24, 64)?;
    let mut worst: f64 = 0.0;
    for a in 0..=12i32 {
        for b in 0..=12i32 {
            let got: Complex64 = disk
                .nodes
                .iter()
                .zip(&disk.weights)
                .map(|(u, w)| u.powi(a) * u.conj().powi(b) * *w)
                .sum();
            let exact = if a == b { PI / (a as f64 + 1.0) } else { 0.0 };
            worst = worst.max((got - exact).norm());
        }
    }
    out.push(check(
        "unit disk moments",
        worst <= 1e-12,
        format!("max error {worst:.2e}"),
    ));
    for (model, _) in builtin_spaces() {
        let rule = global_rule(&model, DEFAULT_GLOBAL_NR, DEFAULT_GLOBAL_NT)?;
        let mut worst: f64 = 0.0;
        for a in 0..=12i32 {
            for b in 0..=12i32 {
                let got = rule.integrate(|z| z.powi(a) * z.conj().powi(b));
                let exact = if a == b {
                    model.ln_norm_sq(a as usize).exp()
                } else {
                    0.0
                };
                let scale = model.ln_norm_sq(a.max(b) as usize).exp();
                worst = worst.max((got - exact).norm() / scale);
            }
        }
        out.push(check(
            format!("weighted moments {model}"),
            worst <= 1e-12,
            format!("max relative error {worst:.2e}"),
        ));
    }
    Ok(out)
}

fn lemmas() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let rule = DiskRule::default();
    let delta = 0.4;
    let spaces = [
        WeightModel::fock(1.0).unwrap(),
        WeightModel::bergman(0.0).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for model in &spaces {
        for k in 1..=3 {
            let phi = Symbol::monomial(k, 0);
            let conj = phi.conjugate();
            for z in probes(model, 20) {
                let r = delta * model.tau(z)?;
                let g = best_holomorphic_distance(&conj, z, r, 24, &rule, DEFAULT_TOL)?.value;
                worst = worst.max((g - mo(&phi, z, r, &rule)?).abs());
            }
        }
    }
    out.push(check(
        "distance of conjugate holomorphic symbols equals oscillation",
        worst <= 1e-8,
        format!("max difference {worst:.2e}"),
    ));

    let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
    for model in &spaces {
        for name in CATALOG {
            let f = Symbol::from_catalog(name)?;
            let conj = f.conjugate();
            for z in probes(model, 20) {
                let r = delta * model.tau(z)?;
                let m = mo(&f, z, r, &rule)?;
                if m < 1e-12 {
                    continue;
                }
                let g = best_holomorphic_distance(&f, z, r, 24, &rule, DEFAULT_TOL)?.value;
                let gc = best_holomorphic_distance(&conj, z, r, 24, &rule, DEFAULT_TOL)?.value;
                hi = hi.max((g + gc) / m);
                lo = lo.min((g + gc) / m);
            }
        }
    }
    out.push(check(
        "distances of f and conj f are comparable to the oscillation",
        hi <= 2.0 + 1e-9 && lo >= 0.1,
        format!("ratio range [{lo:.4}, {hi:.6}]"),
    ));

    let model = WeightModel::fock(1.0).unwrap();
    let lat = build_lattice(&model, 0.5, 3.0)?;
    let points: Vec<Point> = (0..12)
        .map(|i| Point::from_polar(1.6 * (i as f64 + 0.5) / 12.0, 1.1 * i as f64))
        .collect();
    let holo = Symbol::monomial(2, 0);
    let (_, _, rep) = decompose(&holo, &model, &lat, 0.5, 24, &points)?;
    out.push(check(
        "holomorphic symbol has no remainder",
        rep.max_f2_abs <= 1e-8,
        format!("max |f2| {:.2e}", rep.max_f2_abs),
    ));
    let (_, _, rep) = decompose(
        &Symbol::from_catalog("conj_z")?,
        &model,
        &lat,
        0.5,
        24,
        &points,
    )?;
    out.push(check(
        "decomposition pieces controlled by the distance",
        rep.skipped == 0 && rep.max_avg_dbar_ratio <= 10.0 && rep.max_avg_f2_ratio <= 10.0,
        format!(
            "dbar ratio {:.4}, averaged dbar ratio {:.4}, averaged remainder ratio {:.4}",
            rep.max_dbar_ratio, rep.max_avg_dbar_ratio, rep.max_avg_f2_ratio
        ),
    ));
    Ok(out)
}

/// `inf { s >= 0 : d(s) <= t }`, scanning the candidate levels.
fn brute_force(values: &[f64], measures: &[f64], t: f64) -> f64 {
    let d = |s: f64| -> f64 {
        values
            .iter()
            .zip(measures)
            .filter(|(v, _)| **v > s)
            .map(|(_, m)| m)
            .sum()
    };
    std::iter::once(0.0)
        .chain(values.iter().copied())
        .filter(|s| d(*s) <= t)
        .fold(f64::INFINITY, f64::min)
}

fn rearrange(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mismatches, mut norm_err): (usize, f64) = (0, 0.0);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=8);
        let values: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    0.0
                } else {
                    rng.gen_range(0..5) as f64 * 0.5
                }
            })
            .collect();
        let measures: Vec<f64> = (0..n).map(|_| rng.gen_range(1..4) as f64 * 0.25).collect();
        let curve = rearrangement(&WeightedSamples::new(values.clone(), measures.clone())?)?;
        let total: f64 = measures.iter().sum();
        let mut ts: Vec<f64> = (0..=40).map(|i| total * 1.1 * i as f64 / 40.0).collect();
        ts.extend(measures.iter().scan(0.0, |acc, m| {
            *acc += m;
            Some(*acc)
        }));
        mismatches += ts
            .iter()
            .filter(|t| curve.eval(**t) != brute_force(&values, &measures, **t))
            .count();
        let direct: f64 = values.iter().zip(&measures).map(|(v, m)| v * v * m).sum();
        norm_err = norm_err.max((curve.lp_norm(2.0)?.powi(2) - direct).abs());
    }
    let mut out = vec![
        check(
            "sorted rearrangement matches the distribution infimum",
            mismatches == 0,
            format!("{mismatches} mismatches over 1000 instances"),
        ),
        check(
            "rearrangement preserves L2 mass",
            norm_err <= 1e-12,
            format!("max error {norm_err:.2e}"),
        ),
    ];
    let model = WeightModel::bergman(0.0).unwrap();
    let rep = rearrangement_closed_form_check(&model, 0.2, 0.999, (0.5, 100.0))?;
    out.push(check(
        "rearranged local scale matches its closed form",
        rep.max_rel_error <= 0.02 && rep.weak_l1_rel_error <= 0.05,
        format!(
            "max relative error {:.2e}, weak L1 off by {:.2}%",
            rep.max_rel_error,
            100.0 * rep.weak_l1_rel_error
        ),
    ));
    Ok(out)
}
