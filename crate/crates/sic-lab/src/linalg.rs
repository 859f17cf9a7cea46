//! Small dense complex linear algebra, sized for d <= ~70.

use num_complex::Complex64 as C64;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let n = self.n;
        CMat::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn conj(&self) -> CMat {
        let n = self.n;
        CMat::from_fn(n, |i, j| self.data[i * n + j].conj())
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.data[i * n + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn pow(&self, k: usize) -> CMat {
        let mut out = CMat::identity(self.n);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Max-entry deviation of A†A from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&CMat::identity(self.n))
    }

    pub fn frobenius_dist(&self, other: &CMat) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Hermitian inner product, conjugate-linear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn scale_vec(v: &[C64], s: C64) -> Vec<C64> {
    v.iter().map(|z| z * s).collect()
}

pub fn conj_vec(v: &[C64]) -> Vec<C64> {
    v.iter().map(|z| z.conj()).collect()
}

pub fn normalize(v: &[C64]) -> Vec<C64> {
    let n = norm(v);
    v.iter().map(|z| z / n).collect()
}

/// Gram-Schmidt with greedy column pivoting. Orthonormalizes the columns of
/// `candidates` and returns exactly `rank` vectors, picking the largest
/// residual at each step.
pub fn orthonormalize_rank(candidates: &[Vec<C64>], rank: usize) -> Vec<Vec<C64>> {
    let mut residuals: Vec<Vec<C64>> = candidates.to_vec();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(rank);
    for _ in 0..rank {
        let (best, _) = residuals
            .iter()
            .enumerate()
            .map(|(i, v)| (i, norm(v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("rank exceeds candidate count");
        let mut v = residuals.swap_remove(best);
        // re-orthogonalize twice for stability
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let v = normalize(&v);
        for r in residuals.iter_mut() {
            let c = inner(&v, r);
            for (x, y) in r.iter_mut().zip(&v) {
                *x -= c * y;
            }
        }
        basis.push(v);
    }
    basis
}

/// Eigenvalues of a Hermitian matrix via cyclic Jacobi on the real symmetric
/// embedding [[Re, -Im], [Im, Re]]; each eigenvalue of the input appears twice
/// in the embedding, so every second one is kept. Descending order.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let n = h.n();
    let m = 2 * n;
    let mut a = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h.get(i, j);
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    // cyclic Jacobi sweeps
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..m {
            for q in (p + 1)..m {
                off += a[p * m + q] * a[p * m + q];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                // rotation zeroing a[p][q]
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    eigs.sort_by(|x, y| y.total_cmp(x));
    eigs.into_iter().step_by(2).collect()
}

/// Solves (A + damping*I) x = b for a symmetric positive semidefinite A by
/// Gaussian elimination with partial pivoting. A is row-major n x n.
pub fn solve_damped(a: &[f64], n: usize, damping: f64, b: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0f64; n * (n + 1)];
    for i in 0..n {
        for j in 0..n {
            m[i * (n + 1) + j] = a[i * n + j] + if i == j { damping } else { 0.0 };
        }
        m[i * (n + 1) + n] = b[i];
    }
    for col in 0..n {
        let (piv, _) = (col..n)
            .map(|r| (r, m[r * (n + 1) + col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if piv != col {
            for k in 0..=n {
                m.swap(col * (n + 1) + k, piv * (n + 1) + k);
            }
        }
        let p = m[col * (n + 1) + col];
        if p.abs() < 1e-300 {
            continue;
        }
        for r in (col + 1)..n {
            let f = m[r * (n + 1) + col] / p;
            if f == 0.0 {
                continue;
            }
            for k in col..=n {
                m[r * (n + 1) + k] -= f * m[col * (n + 1) + k];
            }
        }
    }
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut acc = m[i * (n + 1) + n];
        for j in (i + 1)..n {
            acc -= m[i * (n + 1) + j] * x[j];
        }
        let p = m[i * (n + 1) + i];
        x[i] = if p.abs() < 1e-300 { 0.0 } else { acc / p };
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1
        let h = CMat::from_fn(2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => C64::new(2.0, 0.0),
            (0, 1) => C64::new(0.0, 1.0),
            _ => C64::new(0.0, -1.0),
        });
        let e = hermitian_eigenvalues(&h);
        assert!((e[0] - 3.0).abs() < 1e-12);
        assert!((e[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_damped_small_system() {
        // A = [[2,1],[1,3]], b = [5, 10] -> x = [1, 3]
        let a = [2.0, 1.0, 1.0, 3.0];
        let x = solve_damped(&a, 2, 0.0, &[5.0, 10.0]);
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn orthonormalize_fixed_rank() {
        let v1 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let v2 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)];
        let v3 = vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let basis = orthonormalize_rank(&[v1, v2, v3], 2);
        assert_eq!(basis.len(), 2);
        assert!(inner(&basis[0], &basis[1]).norm() < 1e-12);
        assert!((norm(&basis[0]) - 1.0).abs() < 1e-12);
    }
}
