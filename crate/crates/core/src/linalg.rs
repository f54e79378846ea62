//! Dense symmetric linear algebra: Cholesky factorization, Householder
//! tridiagonalization and the implicit-shift QL iteration.
//!
//! The tridiagonal reduction and QL sweeps follow the classical EISPACK
//! `tred2`/`tql2` pair (via the public-domain JAMA port).

#![allow(clippy::needless_range_loop)]

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Shape {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Matrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(&self.matvec(x), x)
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .fold(0.0, |m, v| f64::max(m, libm::fabs(*v)))
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max(libm::fabs(self.get(i, j) - self.get(j, i)));
            }
        }
        worst
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| f64::max(m, libm::fabs(*v)))
}

/// Lower Cholesky factor `L` with `A = L Lᵀ`. Only the lower triangle of `a`
/// is read.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.n;
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j);
        {
            let lj = &l.data[j * n..j * n + j];
            d -= dot(lj, lj);
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Definiteness(format!(
                "Cholesky breakdown at pivot {j} (value {d:e})"
            )));
        }
        let djj = libm::sqrt(d);
        l.data[j * n + j] = djj;
        for i in (j + 1)..n {
            let (upper, lower) = l.data.split_at_mut(i * n);
            let lj = &upper[j * n..j * n + j];
            let li = &lower[..j];
            let s = a.get(i, j) - dot(li, lj);
            lower[j] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L x = b` in place for lower-triangular `L`.
pub fn forward_substitute(l: &Matrix, b: &mut [f64]) {
    let n = l.n;
    for i in 0..n {
        let s = b[i] - dot(&l.row(i)[..i], &b[..i]);
        b[i] = s / l.get(i, i);
    }
}

/// Solves `Lᵀ x = b` in place for lower-triangular `L`.
pub fn backward_substitute_transpose(l: &Matrix, b: &mut [f64]) {
    let n = l.n;
    for i in (0..n).rev() {
        let xi = b[i] / l.get(i, i);
        b[i] = xi;
        let row = l.row(i);
        for k in 0..i {
            b[k] -= row[k] * xi;
        }
    }
}

/// `L⁻¹ A L⁻ᵀ` for symmetric `A`, symmetrized.
pub fn congruence_reduce(a: &Matrix, l: &Matrix) -> Matrix {
    let n = a.n;
    // W = L⁻¹ A, one column of A at a time (A symmetric: column j = row j).
    let mut w = Matrix::zeros(n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.copy_from_slice(a.row(j));
        forward_substitute(l, &mut col);
        for i in 0..n {
            w.data[i * n + j] = col[i];
        }
    }
    // C = W L⁻ᵀ  ⇔  Cᵀ = L⁻¹ Wᵀ; row i of C solves L cᵢ = (row i of W).
    let mut c = Matrix::zeros(n);
    for i in 0..n {
        col.copy_from_slice(w.row(i));
        forward_substitute(l, &mut col);
        c.data[i * n..(i + 1) * n].copy_from_slice(&col);
    }
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (c.get(i, j) + c.get(j, i));
            c.set(i, j, m);
            c.set(j, i, m);
        }
    }
    c
}

/// Eigen-decomposition of a symmetric matrix: eigenvalues ascending and the
/// matching orthonormal eigenvectors (as rows of the returned list).
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.n;
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    // tql2 rotates eigenvector columns; store them as rows for contiguous access.
    let mut z = transpose(&v);
    tql2(&mut z, &mut d, &mut e)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = order.iter().map(|&i| z.row(i).to_vec()).collect();
    Ok((values, vectors))
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    symmetric_eigen(a).map(|(v, _)| v)
}

fn transpose(a: &Matrix) -> Matrix {
    Matrix::from_fn(a.n, |i, j| a.get(j, i))
}

fn tred2(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = v.n;
    let idx = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v.data[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += libm::fabs(d[k]);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.data[idx(i - 1, j)];
                v.data[idx(i, j)] = 0.0;
                v.data[idx(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v.data[idx(j, i)] = f;
                g = e[j] + v.data[idx(j, j)] * f;
                for k in (j + 1)..i {
                    let vkj = v.data[idx(k, j)];
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v.data[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v.data[idx(i - 1, j)];
                v.data[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    // accumulate the transformations
    for i in 0..n - 1 {
        v.data[idx(n - 1, i)] = v.data[idx(i, i)];
        v.data[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.data[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.data[idx(k, i + 1)] * v.data[idx(k, j)];
                }
                for k in 0..=i {
                    v.data[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v.data[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v.data[idx(n - 1, j)];
        v.data[idx(n - 1, j)] = 0.0;
    }
    v.data[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`; `z` holds eigenvectors as rows.
fn tql2(z: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = z.n;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    let max_sweeps = 30 * n.max(1);
    for l in 0..n {
        tst1 = tst1.max(libm::fabs(d[l]) + libm::fabs(e[l]));
        let mut m = l;
        while m < n {
            if libm::fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > max_sweeps {
                    return Err(Error::Numerical(format!(
                        "QL iteration did not converge for eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (head, tail) = z.data.split_at_mut((i + 1) * n);
                    let zi = &mut head[i * n..];
                    let zi1 = &mut tail[..n];
                    for k in 0..n {
                        let hk = zi1[k];
                        zi1[k] = s * zi[k] + c * hk;
                        zi[k] = c * zi[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(libm::fabs(e[l]) > eps * tst1) {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn random_spd(n: usize, seed: u64) -> Matrix {
        let mut state = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let b = Matrix::from_fn(n, |_, _| next());
        Matrix::from_fn(n, |i, j| {
            let s: f64 = (0..n).map(|k| b.get(i, k) * b.get(j, k)).sum();
            s + if i == j { n as f64 } else { 0.0 }
        })
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = random_spd(7, 3);
        let l = cholesky(&a).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let s: f64 = (0..7).map(|k| l.get(i, k) * l.get(j, k)).sum();
                assert_relative_eq!(s, a.get(i, j), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_rows(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(cholesky(&a), Err(Error::Definiteness(_))));
    }

    #[test]
    fn tridiagonal_toeplitz_closed_form() {
        let n = 50;
        let a = Matrix::from_fn(n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        let vals = symmetric_eigenvalues(&a).unwrap();
        for (m, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (core::f64::consts::PI * (m + 1) as f64 / (n + 1) as f64).cos();
            assert_relative_eq!(*v, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn reduction_gives_generalized_pairs() {
        let a = random_spd(6, 11);
        let b = random_spd(6, 12);
        let l = cholesky(&b).unwrap();
        let c = congruence_reduce(&a, &l);
        let (vals, vecs) = symmetric_eigen(&c).unwrap();
        for (lam, y) in vals.iter().zip(&vecs) {
            let mut v = y.clone();
            backward_substitute_transpose(&l, &mut v);
            let av = a.matvec(&v);
            let bv = b.matvec(&v);
            for i in 0..6 {
                assert_relative_eq!(av[i], lam * bv[i], epsilon = 1e-10, max_relative = 1e-10);
            }
            assert_relative_eq!(dot(&v, &bv), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_and_trivial_sizes() {
        let (v, w) = symmetric_eigen(&Matrix::identity(1)).unwrap();
        assert_eq!(v, vec![1.0]);
        assert_eq!(w, vec![vec![1.0]]);
        let vals = symmetric_eigenvalues(&Matrix::identity(5).scaled(3.0)).unwrap();
        assert!(vals.iter().all(|&x| x == 3.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn decomposition_reconstructs(n in 1usize..12, seed in any::<u64>()) {
            let a = random_spd(n, seed);
            let (vals, vecs) = symmetric_eigen(&a).unwrap();
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            let scale = a.max_abs();
            for i in 0..n {
                for j in 0..n {
                    let s: f64 = (0..n).map(|k| vals[k] * vecs[k][i] * vecs[k][j]).sum();
                    prop_assert!((s - a.get(i, j)).abs() <= 1e-12 * scale * n as f64);
                    let o: f64 = dot(&vecs[i], &vecs[j]);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((o - expected).abs() <= 1e-12);
                }
            }
        }
    }
}
