//! Symbols: evaluatable functions on the domain with optional structure
//! metadata (monomial form, net angular degrees, jump circle, sup bound,
//! holomorphic derivative).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::weights::Point;

type EvalFn = Arc<dyn Fn(Point) -> Complex64 + Send + Sync>;

/// Names accepted by [`Symbol::from_catalog`].
pub const CATALOG: &[&str] = &[
    "const_1",
    "conj_z",
    "conj_z_sq",
    "inv_z_outside",
    "bounded_mix",
    "holo_z",
    "holo_z_sq",
];

#[derive(Clone)]
pub struct Symbol {
    name: String,
    eval: EvalFn,
    /// Net angular degrees present: `f(r e^{it})` only contains `e^{ikt}` with
    /// `k` in `[band.0, band.1]`.
    angular_band: Option<(i32, i32)>,
    /// `f = z^a conj(z)^b`.
    monomial: Option<(u32, u32)>,
    bounded: Option<f64>,
    jump_radius: Option<f64>,
    /// Derivative of a holomorphic symbol.
    derivative: Option<EvalFn>,
    real_valued: bool,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("angular_band", &self.angular_band)
            .field("monomial", &self.monomial)
            .field("bounded", &self.bounded)
            .field("jump_radius", &self.jump_radius)
            .field("holomorphic", &self.derivative.is_some())
            .finish()
    }
}

impl Symbol {
    /// A symbol with no structural metadata.
    pub fn from_fn(
        name: impl Into<String>,
        f: impl Fn(Point) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            angular_band: None,
            monomial: None,
            bounded: None,
            jump_radius: None,
            derivative: None,
            real_valued: false,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        let mut s = Self::from_fn(format!("const_{c}"), move |_| c);
        s.angular_band = Some((0, 0));
        s.bounded = Some(c.norm());
        s.derivative = Some(Arc::new(|_| Complex64::new(0.0, 0.0)));
        s.real_valued = c.im == 0.0;
        if c == Complex64::new(1.0, 0.0) {
            s.monomial = Some((0, 0));
            s.name = "const_1".into();
        }
        s
    }

    /// `z^a conj(z)^b`.
    pub fn monomial(a: u32, b: u32) -> Self {
        let mut s = Self::from_fn(format!("monomial_{a}_{b}"), move |z: Point| {
            z.powu(a) * z.conj().powu(b)
        });
        s.monomial = Some((a, b));
        let d = a as i32 - b as i32;
        s.angular_band = Some((d, d));
        s.real_valued = a == b;
        if b == 0 {
            s.derivative = Some(Arc::new(move |z: Point| {
                if a == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    z.powu(a - 1) * a as f64
                }
            }));
        }
        if a + b == 0 {
            s.bounded = Some(1.0);
        }
        s
    }

    /// Holomorphic polynomial `sum_k coeffs[k] z^k`.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        let c = coeffs.clone();
        let mut s = Self::from_fn("polynomial", move |z: Point| horner(&c, z));
        let dc: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| a * k as f64)
            .collect();
        s.derivative = Some(Arc::new(move |z: Point| horner(&dc, z)));
        let nz: Vec<i32> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() != 0.0)
            .map(|(k, _)| k as i32)
            .collect();
        s.angular_band = Some(match (nz.first(), nz.last()) {
            (Some(lo), Some(hi)) => (*lo, *hi),
            _ => (0, 0),
        });
        s
    }

    /// `1/z` for `|z| >= 1`, zero inside the unit disk.
    pub fn inv_z_outside() -> Self {
        let mut s = Self::from_fn("inv_z_outside", |z: Point| {
            if z.norm_sqr() >= 1.0 {
                z.inv()
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        s.angular_band = Some((-1, -1));
        s.bounded = Some(1.0);
        s.jump_radius = Some(1.0);
        s
    }

    /// `conj(z) / (1 + |z|^2)`.
    pub fn bounded_mix() -> Self {
        let mut s = Self::from_fn("bounded_mix", |z: Point| z.conj() / (1.0 + z.norm_sqr()));
        s.angular_band = Some((-1, -1));
        s.bounded = Some(0.5);
        s
    }

    pub fn from_catalog(name: &str) -> Result<Self> {
        Ok(match name {
            "const_1" => Self::constant(Complex64::new(1.0, 0.0)),
            "conj_z" => Self::monomial(0, 1).named("conj_z"),
            "conj_z_sq" => Self::monomial(0, 2).named("conj_z_sq"),
            "holo_z" => Self::monomial(1, 0).named("holo_z"),
            "holo_z_sq" => Self::monomial(2, 0).named("holo_z_sq"),
            "inv_z_outside" => Self::inv_z_outside(),
            "bounded_mix" => Self::bounded_mix(),
            other => {
                if let Some(spec) = other.strip_prefix("monomial:") {
                    return Self::parse_monomial(spec);
                }
                if other.contains(',') {
                    return Self::parse_monomial(other);
                }
                return Err(LabError::InvalidArgument(format!(
                    "unknown symbol `{other}`; catalog: {}, or monomial `a,b`",
                    CATALOG.join(", ")
                )));
            }
        })
    }

    fn parse_monomial(spec: &str) -> Result<Self> {
        let bad = || LabError::InvalidArgument(format!("monomial spec `{spec}` is not `a,b`"));
        let (a, b) = spec.split_once(',').ok_or_else(bad)?;
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        Ok(Self::monomial(a, b))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_band(mut self, band: (i32, i32)) -> Self {
        self.angular_band = Some(band);
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bounded = Some(bound);
        self
    }

    pub fn with_jump(mut self, radius: f64) -> Self {
        self.jump_radius = Some(radius);
        self
    }

    pub fn real_valued(mut self) -> Self {
        self.real_valued = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn angular_band(&self) -> Option<(i32, i32)> {
        self.angular_band
    }

    pub fn monomial_form(&self) -> Option<(u32, u32)> {
        self.monomial
    }

    pub fn bound(&self) -> Option<f64> {
        self.bounded
    }

    pub fn jump_radius(&self) -> Option<f64> {
        self.jump_radius
    }

    pub fn is_holomorphic(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    #[inline]
    pub fn eval(&self, z: Point) -> Complex64 {
        (self.eval)(z)
    }

    pub fn eval_checked(&self, z: Point) -> Result<Complex64> {
        let v = (self.eval)(z);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(LabError::symbol_eval(&self.name, z))
        }
    }

    /// Derivative of a holomorphic symbol.
    pub fn derivative(&self, z: Point) -> Option<Complex64> {
        self.derivative.as_ref().map(|d| d(z))
    }

    /// `conj(f)`: monomial exponents swap and the angular band is mirrored.
    pub fn conjugate(&self) -> Self {
        if self.real_valued {
            let mut s = self.clone();
            s.name = format!("conj({})", self.name);
            return s;
        }
        let inner = self.eval.clone();
        let mut s = Self::from_fn(format!("conj({})", self.name), move |z| inner(z).conj());
        s.monomial = self.monomial.map(|(a, b)| (b, a));
        s.angular_band = self.angular_band.map(|(lo, hi)| (-hi, -lo));
        s.bounded = self.bounded;
        s.jump_radius = self.jump_radius;
        s
    }

    /// `f - g` without structure metadata beyond the jump circle.
    pub fn minus(&self, other: &Symbol) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let mut s = Self::from_fn(format!("{}-{}", self.name, other.name), move |z| {
            f(z) - g(z)
        });
        s.jump_radius = self.jump_radius.or(other.jump_radius);
        s
    }
}

fn horner(coeffs: &[Complex64], z: Point) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}
