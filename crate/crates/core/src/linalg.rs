//! Dense Hermitian matrices and a cyclic Jacobi eigenvalue solver.

use num_complex::Complex64;

use crate::error::{LabError, Result};

pub const JACOBI_MAX_SWEEPS: usize = 60;
pub const JACOBI_TOL: f64 = 1e-14;

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds from the upper triangle `entry(j, k)` for `j <= k`, mirroring the rest.
    pub fn from_upper(n: usize, mut entry: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            let d = entry(j, j);
            m.set(j, j, Complex64::new(d.re, 0.0));
            for k in j + 1..n {
                let v = entry(j, k);
                m.set(j, k, v);
                m.set(k, j, v.conj());
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.data[j * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, j: usize, k: usize, v: Complex64) {
        self.data[j * self.n + k] = v;
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    fn off_diagonal(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.n {
            for k in 0..self.n {
                if j != k {
                    acc += self.get(j, k).norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    /// Largest `|a_jk - conj(a_kj)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.n {
            for k in j..self.n {
                worst = worst.max((self.get(j, k) - self.get(k, j).conj()).norm());
            }
        }
        worst
    }

    /// `c^* A c`.
    pub fn quadratic_form(&self, c: &[Complex64]) -> Result<f64> {
        if c.len() != self.n {
            return Err(LabError::InvalidArgument(format!(
                "vector of length {} against a {}x{} matrix",
                c.len(),
                self.n,
                self.n
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.n {
            let mut row = Complex64::new(0.0, 0.0);
            for (k, ck) in c.iter().enumerate() {
                row += self.get(j, k) * ck;
            }
            acc += c[j].conj() * row;
        }
        Ok(acc.re)
    }

    /// Eigenvalues in ascending order, by cyclic Jacobi rotations.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.n;
        let mut a = self.clone();
        let scale = a.frobenius();
        if scale == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let mut converged = a.off_diagonal() <= JACOBI_TOL * scale;
        let mut sweeps = 0;
        while !converged {
            if sweeps == JACOBI_MAX_SWEEPS {
                return Err(LabError::NotConverged(format!(
                    "Jacobi iteration after {JACOBI_MAX_SWEEPS} sweeps, off-diagonal {:e}",
                    a.off_diagonal() / scale
                )));
            }
            for p in 0..n {
                for q in p + 1..n {
                    a.rotate(p, q);
                }
            }
            sweeps += 1;
            converged = a.off_diagonal() <= JACOBI_TOL * scale;
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
        ev.sort_by(|x, y| x.total_cmp(y));
        Ok(ev)
    }

    /// Annihilates `a_pq` with a unitary rotation in the `(p, q)` plane.
    fn rotate(&mut self, p: usize, q: usize) {
        let apq = self.get(p, q);
        let g = apq.norm();
        if g == 0.0 {
            return;
        }
        let app = self.get(p, p).re;
        let aqq = self.get(q, q).re;
        // phase making the (p, q) entry real and positive
        let phase = apq / g;
        let theta = (aqq - app) / (2.0 * g);
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let t = if theta == 0.0 { 1.0 } else { t };
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        let n = self.n;
        for r in 0..n {
            if r == p || r == q {
                continue;
            }
            let arp = self.get(r, p);
            let arq = self.get(r, q) * phase.conj();
            let new_p = arp * c - arq * s;
            let new_q = (arp * s + arq * c) * phase;
            self.set(r, p, new_p);
            self.set(p, r, new_p.conj());
            self.set(r, q, new_q);
            self.set(q, r, new_q.conj());
        }
        self.set(p, p, Complex64::new(app - t * g, 0.0));
        self.set(q, q, Complex64::new(aqq + t * g, 0.0));
        self.set(p, q, Complex64::new(0.0, 0.0));
        self.set(q, p, Complex64::new(0.0, 0.0));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        HermitianMatrix::from_upper(n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn diagonal_and_zero() {
        let m = HermitianMatrix::from_upper(3, |j, k| {
            if j == k {
                Complex64::new([3.0, -1.0, 2.0][j], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert_eq!(m.eigenvalues().unwrap(), vec![-1.0, 2.0, 3.0]);
        assert_eq!(
            HermitianMatrix::zeros(4).eigenvalues().unwrap(),
            vec![0.0; 4]
        );
    }

    #[test]
    fn two_by_two_complex() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = HermitianMatrix::from_upper(2, |j, k| {
            if j == k {
                Complex64::new(2.0, 0.0)
            } else {
                Complex64::new(0.0, 1.0)
            }
        });
        let ev = m.eigenvalues().unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn trace_and_frobenius_preserved() {
        for seed in 0..5 {
            let m = random_hermitian(24, seed);
            let ev = m.eigenvalues().unwrap();
            let trace: f64 = (0..24).map(|i| m.get(i, i).re).sum();
            let fro2: f64 = m.frobenius().powi(2);
            assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-12);
            assert!((ev.iter().map(|x| x * x).sum::<f64>() - fro2).abs() < 1e-10 * fro2);
        }
    }

    #[test]
    fn eigenvalues_annihilate_determinant() {
        // det(A - lambda I) = 0 checked via the characteristic polynomial of a 3x3
        let m = random_hermitian(3, 42);
        let ev = m.eigenvalues().unwrap();
        for l in ev {
            let a = |j: usize, k: usize| {
                let v = m.get(j, k);
                if j == k {
                    v - l
                } else {
                    v
                }
            };
            let det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
            assert!(det.norm() < 1e-12, "det {det}");
        }
    }

    #[test]
    fn quadratic_form_matches() {
        let m = HermitianMatrix::identity(3);
        let c = [
            Complex64::new(1.0, 1.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(-1.0, 0.0),
        ];
        assert!((m.quadratic_form(&c).unwrap() - 7.0).abs() < 1e-15);
        assert!(m.quadratic_form(&c[..2]).is_err());
    }
}
