//! Acceptance criteria, run in order with one PASS/FAIL line each.

use std::f64::consts::PI;
use std::time::Instant;

use hankel_lab::asymptotics::{
    berger_coburn, compare_decay, convex_trace_check, decay_equivalence_report, log_spaced_thetas,
};
use hankel_lab::hankel::{spectrum, GramSpec};
use hankel_lab::ida::{best_holomorphic_distance, mo, DEFAULT_TOL};
use hankel_lab::lattice::{build_lattice, partition_of_unity, verify_lattice};
use hankel_lab::quadrature::{
    disk_rule, global_rule, DiskRule, DEFAULT_GLOBAL_NR, DEFAULT_GLOBAL_NT,
};
use hankel_lab::rearrange::{rearrangement, rearrangement_closed_form_check, WeightedSamples};
use hankel_lab::symbol::CATALOG;
use hankel_lab::{Point, Symbol, WeightModel};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn probes(model: &WeightModel, count: usize) -> Vec<Point> {
    let reach = if model.is_fock() { 3.0 } else { 0.4 };
    (0..count)
        .map(|i| {
            let r = reach * (i as f64 + 0.5) / count as f64;
            Point::from_polar(r, 2.399963 * i as f64)
        })
        .collect()
}

fn spaces() -> [WeightModel; 2] {
    [
        WeightModel::fock(1.0).unwrap(),
        WeightModel::bergman(0.0).unwrap(),
    ]
}

fn anchor_spectrum(model: WeightModel, expected: impl Fn(usize) -> f64) -> Outcome {
    let start = Instant::now();
    let conj_z = Symbol::from_catalog("conj_z").unwrap();
    let spec = GramSpec::with_projection(model, conj_z, 64, 64).unwrap();
    let sp = spectrum(&spec).unwrap();
    let err = (0..=62)
        .map(|n| (sp.s[n] - expected(n)).abs() / expected(n))
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let pass = err <= 1e-10 && (model.is_fock() || secs < 1.0);
    outcome(pass, format!("max relative error {err:.2e}, {secs:.3} s"))
}

fn criterion_1() -> Outcome {
    anchor_spectrum(WeightModel::bergman(0.0).unwrap(), |n| {
        1.0 / (((n + 1) * (n + 2)) as f64).sqrt()
    })
}

fn criterion_2() -> Outcome {
    anchor_spectrum(WeightModel::fock(1.0).unwrap(), |_| 1.0)
}

fn criterion_3() -> Outcome {
    let delta = 0.4;
    let rule = DiskRule::default();
    let mut worst: f64 = 0.0;
    for model in spaces() {
        for k in 1..=3 {
            let phi = Symbol::monomial(k, 0);
            let conj = phi.conjugate();
            for z in probes(&model, 20) {
                let r = delta * model.tau(z).unwrap();
                let g = best_holomorphic_distance(&conj, z, r, 24, &rule, DEFAULT_TOL)
                    .unwrap()
                    .value;
                let m = mo(&phi, z, r, &rule).unwrap();
                worst = worst.max((g - m).abs());
            }
        }
    }
    outcome(
        worst <= 1e-8,
        format!("max |G(conj phi) - MO(phi)| = {worst:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let delta = 0.4;
    let rule = DiskRule::default();
    let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
    for model in spaces() {
        for name in CATALOG {
            let f = Symbol::from_catalog(name).unwrap();
            let conj = f.conjugate();
            for z in probes(&model, 20) {
                let r = delta * model.tau(z).unwrap();
                let m = mo(&f, z, r, &rule).unwrap();
                if m < 1e-12 {
                    continue;
                }
                let g = best_holomorphic_distance(&f, z, r, 24, &rule, DEFAULT_TOL)
                    .unwrap()
                    .value;
                let gc = best_holomorphic_distance(&conj, z, r, 24, &rule, DEFAULT_TOL)
                    .unwrap()
                    .value;
                let ratio = (g + gc) / m;
                hi = hi.max(ratio);
                lo = lo.min(ratio);
            }
        }
    }
    outcome(
        hi <= 2.0 + 1e-9 && lo >= 0.1,
        format!("(G(f) + G(conj f)) / MO(f) in [{lo:.4}, {hi:.12}]"),
    )
}

fn criterion_5() -> Outcome {
    let model = WeightModel::bergman(0.0).unwrap();
    let r = rearrangement_closed_form_check(&model, 0.2, 0.999, (0.5, 100.0)).unwrap();
    outcome(
        r.max_rel_error <= 0.02 && r.weak_l1_rel_error <= 0.05,
        format!(
            "max relative error {:.2e} on [0.5, 100], weak L1 {:.4} (off by {:.2}%)",
            r.max_rel_error,
            r.weak_l1,
            100.0 * r.weak_l1_rel_error
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let model = WeightModel::bergman(0.0).unwrap();
    let lat = build_lattice(&model, 0.2, 0.993).unwrap();
    let f = Symbol::from_catalog("conj_z").unwrap();
    let r = decay_equivalence_report(&f, &model, &lat, 0.2, 64, (5, 50)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    match r.decay {
        Some(d) => outcome(
            d.exponents_near(-1.0, 0.1) && d.spread() <= 20.0 && secs < 30.0,
            format!(
                "slopes {:.4} and {:.4}, spread {:.3}, {secs:.1} s",
                d.exponent_a,
                d.exponent_b,
                d.spread()
            ),
        ),
        None => outcome(false, "degenerate report".into()),
    }
}

fn criterion_7() -> Outcome {
    let model = WeightModel::fock(1.0).unwrap();
    let delta = 0.5;
    let lat = build_lattice(&model, delta, 4.0).unwrap();
    let f = Symbol::inv_z_outside();
    let r = decay_equivalence_report(&f, &model, &lat, delta, 64, (8, 32)).unwrap();
    let profile = hankel_lab::ida::ida_profile(&f, &model, &lat, delta, 24).unwrap();
    let away = profile
        .centers
        .iter()
        .zip(&profile.radius)
        .zip(&profile.g)
        .filter(|((c, rad), _)| (c.norm() - 1.0).abs() >= **rad)
        .map(|(_, g)| *g)
        .fold(0.0, f64::max);
    let slope = compare_decay(&r.spectrum.s, &r.spectrum.s, (8, 32))
        .unwrap()
        .exponent_a;
    outcome(
        away <= 1e-8 && r.support_measure <= 40.0 && slope <= -2.0,
        format!(
            "max G off the circle {away:.2e}, support measure {:.3}, slope {slope:.2}",
            r.support_measure
        ),
    )
}

fn criterion_8() -> Outcome {
    let model = WeightModel::bergman(0.0).unwrap();
    let lat = build_lattice(&model, 0.2, 0.993).unwrap();
    let f = Symbol::from_catalog("conj_z").unwrap();
    let sp = spectrum(&GramSpec::new(model, f.clone(), 64).unwrap()).unwrap();
    let thetas = log_spaced_thetas(&sp, 40, 0, 12).unwrap();
    let r = convex_trace_check(&f, &model, &lat, 0.2, 64, &thetas).unwrap();
    outcome(r.passes_within(8.0), format!("(B, C) = {:?}", r.constants))
}

fn criterion_9() -> Outcome {
    let model = WeightModel::fock(1.0).unwrap();
    let mix = berger_coburn(&Symbol::bounded_mix(), &model, 64, 2.0).unwrap();
    let radial = Symbol::from_fn("radial", |z: Point| {
        Complex64::new(1.0 / (1.0 + z.norm_sqr()), 0.0)
    })
    .with_band((0, 0))
    .with_bound(1.0)
    .real_valued();
    let real = berger_coburn(&radial, &model, 64, 2.0).unwrap();
    let pass = matches!(mix.ratio, Some(r) if (0.1..=10.0).contains(&r)) && real.ratio == Some(1.0);
    outcome(
        pass,
        format!(
            "bounded_mix ratio {:?}, real symbol ratio {:?}",
            mix.ratio, real.ratio
        ),
    )
}

fn quadrature_exactness() -> f64 {
    let mut worst: f64 = 0.0;
    let disk = disk_rule(24, 64).unwrap();
    for model in [
        WeightModel::fock(1.0).unwrap(),
        WeightModel::bergman(0.0).unwrap(),
        WeightModel::bergman(2.0).unwrap(),
    ] {
        let rule = global_rule(&model, DEFAULT_GLOBAL_NR, DEFAULT_GLOBAL_NT).unwrap();
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
    }
    worst
}

fn lattice_suite() -> (bool, usize, f64) {
    let mut ok = true;
    let mut mult = 0;
    let mut partition: f64 = 0.0;
    for (model, extent) in [
        (WeightModel::fock(1.0).unwrap(), 3.0),
        (WeightModel::bergman(0.0).unwrap(), 0.9),
        (WeightModel::bergman(2.0).unwrap(), 0.9),
    ] {
        for delta in [0.25, 0.5, 1.0] {
            let lat = build_lattice(&model, delta, extent).unwrap();
            let rep = verify_lattice(&lat, 2000, 7).unwrap();
            ok &= rep.covered && rep.min_gap_ratio > 1.0 && rep.multiplicity_max <= 8;
            mult = mult.max(rep.multiplicity_max);
            for z in probes(&model, 20) {
                let pw = partition_of_unity(&lat, z).unwrap();
                partition = partition.max((pw.weights.iter().sum::<f64>() - 1.0).abs());
            }
        }
    }
    (ok && partition <= 1e-12, mult, partition)
}

/// `inf { s >= 0 : d(s) <= t }` over the candidate levels.
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

fn rearrangement_suite() -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
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
        let curve = rearrangement(&WeightedSamples::new(values.clone(), measures.clone()).unwrap())
            .unwrap();
        let total: f64 = measures.iter().sum();
        let mut ts: Vec<f64> = (0..=40).map(|i| total * 1.1 * i as f64 / 40.0).collect();
        let mut acc = 0.0;
        for m in &measures {
            acc += m;
            ts.push(acc);
        }
        for t in ts {
            if curve.eval(t) != brute_force(&values, &measures, t) {
                mismatches += 1;
            }
        }
    }
    mismatches
}

fn gram_suite() -> (f64, f64) {
    let mut stability: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for model in spaces() {
        for name in ["conj_z", "conj_z_sq", "inv_z_outside", "bounded_mix"] {
            let f = Symbol::from_catalog(name).unwrap();
            let sp = spectrum(&GramSpec::new(model, f, 32).unwrap()).unwrap();
            stability = stability.max(sp.stability);
            min_eig = min_eig.min(sp.gram_min_eig);
        }
    }
    (stability, min_eig)
}

fn criterion_10() -> Outcome {
    let quad = quadrature_exactness();
    let (lat_ok, mult, partition) = lattice_suite();
    let mismatches = rearrangement_suite();
    let (stability, min_eig) = gram_suite();
    outcome(
        quad <= 1e-12 && lat_ok && mismatches == 0 && stability <= 1e-12 && min_eig >= -1e-12,
        format!(
            "quadrature {quad:.1e}, multiplicity {mult}, partition {partition:.1e}, \
             rearrangement mismatches {mismatches}, M-stability {stability:.1e}, min Gram eigenvalue {min_eig:.1e}"
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("bergman anchor spectrum", criterion_1),
        ("fock anchor spectrum", criterion_2),
        ("oscillation of conjugate holomorphic symbols", criterion_3),
        ("two-sided oscillation bound", criterion_4),
        ("rearrangement closed form", criterion_5),
        ("spectrum against rearranged profile", criterion_6),
        ("jump symbol with compact profile", criterion_7),
        ("convex trace comparison", criterion_8),
        ("conjugate symbol weak Schatten ratio", criterion_9),
        ("structural suites", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
