//! Lattices of disks adapted to `tau`, and a smooth partition of unity
//! subordinated to them.
//!
//! * Fock: square grid of spacing `h = delta * tau`.
//! * Bergman: concentric rings with `1 - rho_{k+1} = (1 - rho_k)(1 - c delta)`,
//!   `c = 0.5`, `rho_0 = 0`. Ring `k` has local scale `l_k`, the geometric mean
//!   of the radial gaps on either side of it, and `floor(2 pi rho_k / l_k)`
//!   equally spaced points.
//!
//! Every center carries a local scale `l` (`h` for Fock); the covering radius is
//! `0.75 l` and the separation radius `0.45 l`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::weights::{Point, WeightKind, WeightModel};

pub const COVER_FACTOR: f64 = 0.75;
pub const SEP_FACTOR: f64 = 0.45;
pub const RING_CONSTANT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
enum Layout {
    Grid {
        h: f64,
        /// inclusive index ranges along the two axes
        ix: (i64, i64),
        iy: (i64, i64),
    },
    Rings {
        rings: Vec<Ring>,
        /// outer radius of the last ring's cells
        outer: f64,
    },
    /// Arbitrary disks, looked up by linear scan; the region is their union.
    Scatter,
}

#[derive(Debug, Clone, PartialEq)]
struct Ring {
    rho: f64,
    first: usize,
    count: usize,
    radius: f64,
}

/// A `delta`-lattice with covering, separation and cell data.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub centers: Vec<Point>,
    pub radii: Vec<f64>,
    pub sep_radii: Vec<f64>,
    pub cell_measure: Vec<f64>,
    /// Local spacing at each center.
    pub scale: Vec<f64>,
    pub delta: f64,
    pub model: WeightModel,
    pub extent: f64,
    layout: Layout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeReport {
    pub covered: bool,
    pub uncovered: usize,
    pub min_gap_ratio: f64,
    pub multiplicity_max: usize,
    pub n_probe: usize,
}

/// Active partition functions at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionWeights {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

/// `S(x) = 1` for `x <= 1`, `0` for `x >= 2`, cubic `C^1` blend in between.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else if x >= 2.0 {
        0.0
    } else {
        let u = x - 1.0;
        1.0 - u * u * (3.0 - 2.0 * u)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(LabError::InvalidArgument(format!(
            "delta must lie in (0, 1], got {delta}"
        )))
    }
}

/// Lattice made of explicitly given disks; cells are the disks themselves.
pub fn lattice_from_disks(
    model: &WeightModel,
    delta: f64,
    centers: Vec<Point>,
    radii: Vec<f64>,
) -> Result<Lattice> {
    check_delta(delta)?;
    if centers.is_empty() || centers.len() != radii.len() {
        return Err(LabError::InvalidArgument(
            "need equally many centers and radii, at least one".into(),
        ));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(LabError::InvalidArgument(
            "disk radii must be positive".into(),
        ));
    }
    let mut cell_measure = Vec::with_capacity(centers.len());
    for (c, r) in centers.iter().zip(&radii) {
        cell_measure.push(PI * r * r * model.lambda_density(*c)?);
    }
    let extent = centers
        .iter()
        .zip(&radii)
        .map(|(c, r)| c.norm() + r)
        .fold(0.0, f64::max);
    Ok(Lattice {
        sep_radii: radii
            .iter()
            .map(|r| r * SEP_FACTOR / COVER_FACTOR)
            .collect(),
        scale: radii.iter().map(|r| r / COVER_FACTOR).collect(),
        centers,
        radii,
        cell_measure,
        delta,
        model: *model,
        extent,
        layout: Layout::Scatter,
    })
}

/// Lattice over the square of half-side `extent` (Fock) or the disk `|z| <= extent` (Bergman).
pub fn build_lattice(model: &WeightModel, delta: f64, extent: f64) -> Result<Lattice> {
    check_delta(delta)?;
    if !(extent.is_finite() && extent > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "extent must be positive, got {extent}"
        )));
    }
    match model.kind() {
        WeightKind::StandardFock => build_grid_lattice(
            model,
            delta,
            Point::new(-extent, -extent),
            Point::new(extent, extent),
        ),
        WeightKind::StandardBergman => build_ring_lattice(model, delta, extent),
    }
}

/// Fock grid restricted to the box `[lo, hi]`; grid points are integer multiples of `h`.
pub fn build_grid_lattice(
    model: &WeightModel,
    delta: f64,
    lo: Point,
    hi: Point,
) -> Result<Lattice> {
    check_delta(delta)?;
    if !model.is_fock() {
        return Err(LabError::InvalidArgument(
            "square grids are only built for Fock weights".into(),
        ));
    }
    let tau = model.tau(Point::new(0.0, 0.0))?;
    let h = delta * tau;
    let slack = 1e-9 * h;
    let range = |a: f64, b: f64| {
        (
            ((a - slack) / h).ceil() as i64,
            ((b + slack) / h).floor() as i64,
        )
    };
    let ix = range(lo.re, hi.re);
    let iy = range(lo.im, hi.im);
    if ix.0 > ix.1 || iy.0 > iy.1 {
        return Err(LabError::InvalidArgument(
            "lattice box contains no grid point".into(),
        ));
    }
    let mut centers = Vec::new();
    for j in iy.0..=iy.1 {
        for i in ix.0..=ix.1 {
            centers.push(Point::new(i as f64 * h, j as f64 * h));
        }
    }
    let n = centers.len();
    let cell = h * h / (tau * tau);
    Ok(Lattice {
        radii: vec![COVER_FACTOR * h; n],
        sep_radii: vec![SEP_FACTOR * h; n],
        cell_measure: vec![cell; n],
        scale: vec![h; n],
        centers,
        delta,
        model: *model,
        extent: hi
            .re
            .abs()
            .max(hi.im.abs())
            .max(lo.re.abs())
            .max(lo.im.abs()),
        layout: Layout::Grid { h, ix, iy },
    })
}

fn build_ring_lattice(model: &WeightModel, delta: f64, extent: f64) -> Result<Lattice> {
    if extent >= 1.0 {
        return Err(LabError::Domain(format!(
            "Bergman lattice extent must be < 1, got {extent}"
        )));
    }
    let q = 1.0 - RING_CONSTANT * delta;
    let mut rhos = vec![0.0];
    loop {
        let next = 1.0 - (1.0 - rhos.last().unwrap()) * q;
        if next > extent {
            break;
        }
        rhos.push(next);
    }
    // gap[k] = rho_{k+1} - rho_k, including the first ring past the extent
    let gap = |k: usize| {
        RING_CONSTANT
            * delta
            * (1.0
                - rhos
                    .get(k)
                    .copied()
                    .unwrap_or_else(|| 1.0 - (1.0 - rhos[k - 1]) * q))
    };
    let boundary = |k: usize| -> f64 {
        let rho = rhos[k];
        rho + 0.5 * gap(k)
    };
    let mut centers = Vec::new();
    let mut radii = Vec::new();
    let mut sep_radii = Vec::new();
    let mut cell_measure = Vec::new();
    let mut scale = Vec::new();
    let mut rings = Vec::with_capacity(rhos.len());
    for (k, &rho) in rhos.iter().enumerate() {
        let l = if k == 0 {
            gap(0)
        } else {
            (gap(k - 1) * gap(k)).sqrt()
        };
        let count = if k == 0 {
            1
        } else {
            ((2.0 * PI * rho / l).floor() as usize).max(1)
        };
        let inner = if k == 0 { 0.0 } else { boundary(k - 1) };
        let outer = boundary(k);
        let measure = model.lambda_annulus(inner, outer)? / count as f64;
        rings.push(Ring {
            rho,
            first: centers.len(),
            count,
            radius: COVER_FACTOR * l,
        });
        for j in 0..count {
            let theta = 2.0 * PI * j as f64 / count as f64;
            centers.push(Complex64::from_polar(rho, theta));
            radii.push(COVER_FACTOR * l);
            sep_radii.push(SEP_FACTOR * l);
            cell_measure.push(measure);
            scale.push(l);
        }
    }
    let outer = boundary(rhos.len() - 1);
    Ok(Lattice {
        centers,
        radii,
        sep_radii,
        cell_measure,
        scale,
        delta,
        model: *model,
        extent,
        layout: Layout::Rings { rings, outer },
    })
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Whether `z` lies in the region tiled by the lattice cells.
    pub fn region_contains(&self, z: Point) -> bool {
        match &self.layout {
            Layout::Grid { h, ix, iy } => {
                let inside = |v: f64, r: (i64, i64)| {
                    v >= (r.0 as f64 - 0.5) * h && v <= (r.1 as f64 + 0.5) * h
                };
                inside(z.re, *ix) && inside(z.im, *iy)
            }
            Layout::Rings { outer, .. } => z.norm() <= *outer,
            Layout::Scatter => self.is_covered(z),
        }
    }

    /// Exact `lambda`-measure of the tiled region.
    pub fn region_measure(&self) -> f64 {
        match &self.layout {
            Layout::Grid { .. } => self.cell_measure.iter().sum(),
            Layout::Rings { outer, .. } => self
                .model
                .lambda_annulus(0.0, *outer)
                .unwrap_or(f64::INFINITY),
            Layout::Scatter => self.cell_measure.iter().sum(),
        }
    }

    /// Uniform random point of the tiled region.
    fn sample_region(&self, rng: &mut ChaCha8Rng) -> Point {
        match &self.layout {
            Layout::Grid { h, ix, iy } => {
                let x = rng.gen_range((ix.0 as f64 - 0.5) * h..=(ix.1 as f64 + 0.5) * h);
                let y = rng.gen_range((iy.0 as f64 - 0.5) * h..=(iy.1 as f64 + 0.5) * h);
                Point::new(x, y)
            }
            Layout::Rings { outer, .. } => {
                // half the probes uniform in area, half uniform in log(1 - r)
                let r = if rng.gen_bool(0.5) {
                    outer * rng.gen::<f64>().sqrt()
                } else {
                    1.0 - (1.0 - outer).powf(rng.gen::<f64>())
                };
                Complex64::from_polar(r.min(*outer), rng.gen_range(0.0..2.0 * PI))
            }
            Layout::Scatter => {
                let n = rng.gen_range(0..self.len());
                let u = rng.gen::<f64>().sqrt() * self.radii[n];
                self.centers[n] + Complex64::from_polar(u, rng.gen_range(0.0..2.0 * PI))
            }
        }
    }

    /// Indices `n` with `|z - z_n| < factor * radii[n]`, ascending.
    pub fn indices_within(&self, z: Point, factor: f64) -> Vec<usize> {
        let mut out = Vec::new();
        match &self.layout {
            Layout::Grid { h, ix, iy } => {
                let reach = factor * COVER_FACTOR * h;
                let lo_i = (((z.re - reach) / h).ceil() as i64).max(ix.0);
                let hi_i = (((z.re + reach) / h).floor() as i64).min(ix.1);
                let lo_j = (((z.im - reach) / h).ceil() as i64).max(iy.0);
                let hi_j = (((z.im + reach) / h).floor() as i64).min(iy.1);
                let width = (ix.1 - ix.0 + 1) as usize;
                for j in lo_j..=hi_j {
                    for i in lo_i..=hi_i {
                        let idx = (j - iy.0) as usize * width + (i - ix.0) as usize;
                        if (z - self.centers[idx]).norm() < factor * self.radii[idx] {
                            out.push(idx);
                        }
                    }
                }
            }
            Layout::Rings { rings, .. } => {
                let r = z.norm();
                let arg = z.arg();
                for ring in rings {
                    let reach = factor * ring.radius;
                    if (r - ring.rho).abs() >= reach {
                        continue;
                    }
                    if ring.count == 1 || ring.rho == 0.0 {
                        for idx in ring.first..ring.first + ring.count {
                            if (z - self.centers[idx]).norm() < reach {
                                out.push(idx);
                            }
                        }
                        continue;
                    }
                    let cos_bound = if r == 0.0 {
                        -1.0
                    } else {
                        (r * r + ring.rho * ring.rho - reach * reach) / (2.0 * r * ring.rho)
                    };
                    let step = 2.0 * PI / ring.count as f64;
                    if cos_bound <= -1.0 {
                        for idx in ring.first..ring.first + ring.count {
                            if (z - self.centers[idx]).norm() < reach {
                                out.push(idx);
                            }
                        }
                        continue;
                    }
                    let half = cos_bound.min(1.0).acos();
                    let lo = ((arg - half) / step).floor() as i64;
                    let hi = ((arg + half) / step).ceil() as i64;
                    let count = ring.count as i64;
                    let mut local: Vec<usize> = Vec::new();
                    for j in lo..=hi {
                        let jj = j.rem_euclid(count) as usize;
                        let idx = ring.first + jj;
                        if (z - self.centers[idx]).norm() < reach && !local.contains(&idx) {
                            local.push(idx);
                        }
                    }
                    local.sort_unstable();
                    out.extend(local);
                }
            }
            Layout::Scatter => {
                for (idx, (c, r)) in self.centers.iter().zip(&self.radii).enumerate() {
                    if (z - c).norm() < factor * r {
                        out.push(idx);
                    }
                }
            }
        }
        out
    }

    pub fn is_covered(&self, z: Point) -> bool {
        !self.indices_within(z, 1.0).is_empty()
    }

    /// CSV with columns `index,re,im,radius,cell_measure`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,re,im,radius,cell_measure\n");
        for (i, c) in self.centers.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                i, c.re, c.im, self.radii[i], self.cell_measure[i]
            ));
        }
        s
    }
}

/// Probes the region with `n_probe` seeded random points and checks the lattice geometry.
pub fn verify_lattice(lat: &Lattice, n_probe: usize, seed: u64) -> Result<LatticeReport> {
    if n_probe < 100 {
        return Err(LabError::InvalidArgument(format!(
            "verify_lattice needs at least 100 probes, got {n_probe}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uncovered = 0;
    let mut multiplicity_max = 0;
    for _ in 0..n_probe {
        let z = lat.sample_region(&mut rng);
        let m = lat.indices_within(z, 1.0).len();
        if m == 0 {
            uncovered += 1;
        }
        multiplicity_max = multiplicity_max.max(m);
    }
    // nearest neighbours of every center lie within its partition support
    let mut min_gap_ratio = f64::INFINITY;
    for (i, c) in lat.centers.iter().enumerate() {
        for j in lat.indices_within(*c, 2.0) {
            if j != i {
                let ratio = (c - lat.centers[j]).norm() / (lat.sep_radii[i] + lat.sep_radii[j]);
                min_gap_ratio = min_gap_ratio.min(ratio);
            }
        }
    }
    Ok(LatticeReport {
        covered: uncovered == 0,
        uncovered,
        min_gap_ratio,
        multiplicity_max,
        n_probe,
    })
}

/// `psi_n(z) = g_n(z) / sum_m g_m(z)` with `g_n = S(|z - z_n| / radii[n])`.
pub fn partition_of_unity(lat: &Lattice, z: Point) -> Result<PartitionWeights> {
    let candidates = lat.indices_within(z, 2.0);
    let mut covered = false;
    let mut indices = Vec::with_capacity(candidates.len());
    let mut weights = Vec::with_capacity(candidates.len());
    for n in candidates {
        let x = (z - lat.centers[n]).norm() / lat.radii[n];
        if x < 1.0 {
            covered = true;
        }
        let g = smoothstep(x);
        if g > 0.0 {
            indices.push(n);
            weights.push(g);
        }
    }
    if !covered {
        return Err(LabError::Coverage { re: z.re, im: z.im });
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(PartitionWeights { indices, weights })
}

fn psi(lat: &Lattice, n: usize, z: Point) -> Result<f64> {
    let pw = partition_of_unity(lat, z)?;
    Ok(pw
        .indices
        .iter()
        .position(|&i| i == n)
        .map(|k| pw.weights[k])
        .unwrap_or(0.0))
}

/// Central-difference `dbar psi_n(z) = (d_x + i d_y) psi_n / 2`.
pub fn dbar_partition(lat: &Lattice, n: usize, z: Point, step: f64) -> Result<Complex64> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "step must be positive, got {step}"
        )));
    }
    if n >= lat.len() {
        return Err(LabError::InvalidArgument(format!(
            "lattice index {n} out of range"
        )));
    }
    let dx = (psi(lat, n, z + step)? - psi(lat, n, z - step)?) / (2.0 * step);
    let i_step = Complex64::new(0.0, step);
    let dy = (psi(lat, n, z + i_step)? - psi(lat, n, z - i_step)?) / (2.0 * step);
    Ok(Complex64::new(0.5 * dx, 0.5 * dy))
}
