//! Dense symmetric eigendecomposition: Householder reduction to tridiagonal
//! form followed by the implicit QL algorithm (the classic `tred2`/`tql2`
//! pair from EISPACK, by way of JAMA).
//!
//! The working matrix is kept column-major so that the inner loops of both
//! routines walk contiguous memory.

#![allow(clippy::needless_range_loop)]

use ndarray::Array2;

use crate::error::{invalid_param, Error, Result};

#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// Nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the unit eigenvector of `eigenvalues[j]`. The entry of
    /// largest magnitude in each column is positive.
    pub eigenvectors: Array2<f64>,
    /// Total QL sweeps.
    pub iterations: usize,
}

struct ColMajor {
    n: usize,
    data: Vec<f64>,
}

impl ColMajor {
    #[inline(always)]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.n + r]
    }

    #[inline(always)]
    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[c * self.n + r] = v;
    }

    fn col(&self, c: usize) -> &[f64] {
        &self.data[c * self.n..(c + 1) * self.n]
    }

    fn two_cols_mut(&mut self, a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(a < b);
        let n = self.n;
        let (lo, hi) = self.data.split_at_mut(b * n);
        (&mut lo[a * n..(a + 1) * n], &mut hi[..n])
    }
}

/// Eigendecomposition of a symmetric matrix. Symmetry is checked to a
/// relative tolerance of `1e-12`; only the lower triangle is read.
pub fn symmetric_eigen(matrix: &Array2<f64>) -> Result<SpectralResult> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(invalid_param("eigendecomposition needs a square matrix"));
    }
    if n == 0 {
        return Ok(SpectralResult { eigenvalues: vec![], eigenvectors: Array2::zeros((0, 0)), iterations: 0 });
    }
    let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("matrix has non-finite entries".into()));
    }
    for i in 0..n {
        for j in 0..i {
            if (matrix[[i, j]] - matrix[[j, i]]).abs() > 1e-12 * scale {
                return Err(invalid_param(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut v = ColMajor { n, data: vec![0.0; n * n] };
    for c in 0..n {
        for r in 0..n {
            let x = if r >= c { matrix[[r, c]] } else { matrix[[c, r]] };
            v.set(r, c, x);
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    let iterations = tql2(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
    let eigenvalues = order.iter().map(|&j| d[j]).collect();
    let mut eigenvectors = Array2::zeros((n, n));
    for (out, &j) in order.iter().enumerate() {
        let col = v.col(j);
        let mut pivot = 0;
        for (r, x) in col.iter().enumerate() {
            if x.abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (r, x) in col.iter().enumerate() {
            eigenvectors[[r, out]] = sign * x;
        }
    }
    Ok(SpectralResult { eigenvalues, eigenvectors, iterations })
}

fn tred2(v: &mut ColMajor, d: &mut [f64], e: &mut [f64]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);
            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.at(j, j) * f;
                let col = v.col(j);
                for k in (j + 1)..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
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
                let n = v.n;
                let col = &mut v.data[j * n..(j + 1) * n];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    for i in 0..(n - 1) {
        v.set(n - 1, i, v.at(i, i));
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let (cj, ci) = v.two_cols_mut(j, i + 1);
                let g: f64 = ci[..=i].iter().zip(&cj[..=i]).map(|(a, b)| a * b).sum();
                for k in 0..=i {
                    cj[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

fn tql2(v: &mut ColMajor, d: &mut [f64], e: &mut [f64]) -> Result<usize> {
    let n = v.n;
    let max_sweeps = 60 * n.max(1);
    let mut iterations = 0;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[n-1] == 0, so m < n always.
        if m > l {
            loop {
                iterations += 1;
                if iterations > max_sweeps {
                    return Err(Error::Degenerate("eigensolver did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[(l + 2)..n] {
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
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (ci, ci1) = v.two_cols_mut(i, i + 1);
                    for (a, b) in ci.iter_mut().zip(ci1.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn check_decomposition(a: &Array2<f64>, tol: f64) {
        let res = symmetric_eigen(a).unwrap();
        let n = a.nrows();
        let q = &res.eigenvectors;
        let qtq = q.t().dot(q);
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[[i, j]] - expect).abs() < 1e-9, "orthonormality ({i},{j})");
            }
        }
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
        for (j, &lambda) in res.eigenvalues.iter().enumerate() {
            let col = q.column(j);
            let av = a.dot(&col);
            let resid = av.iter().zip(col.iter()).map(|(x, y)| (x - lambda * y).powi(2)).sum::<f64>().sqrt();
            assert!(resid <= tol * norm, "pair {j}: residual {resid}");
        }
        assert!(res.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn diagonal_matrix() {
        let a = array![[1.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 2.0]];
        let res = symmetric_eigen(&a).unwrap();
        assert_eq!(res.eigenvalues, vec![3.0, 2.0, 1.0]);
        assert_eq!(res.eigenvectors.column(0).to_vec(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let res = symmetric_eigen(&a).unwrap();
        assert!((res.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((res.eigenvalues[1] - 1.0).abs() < 1e-14);
        check_decomposition(&a, 1e-12);
    }

    #[test]
    fn one_by_one_and_zero() {
        let res = symmetric_eigen(&array![[5.0]]).unwrap();
        assert_eq!(res.eigenvalues, vec![5.0]);
        let res = symmetric_eigen(&Array2::zeros((4, 4))).unwrap();
        assert!(res.eigenvalues.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn pseudo_random_symmetric() {
        for &n in &[3usize, 10, 57] {
            let mut state = 0x1234_5678_u64 + n as u64;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            let mut a = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..=i {
                    let x = next();
                    a[[i, j]] = x;
                    a[[j, i]] = x;
                }
            }
            check_decomposition(&a, 1e-8);
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let a = array![[2.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0], [0.0, 0.0, 1.0, 1.0]];
        check_decomposition(&a, 1e-12);
    }

    #[test]
    fn rejects_non_symmetric() {
        assert!(symmetric_eigen(&array![[1.0, 2.0], [0.0, 1.0]]).is_err());
        assert!(symmetric_eigen(&Array2::zeros((2, 3))).is_err());
    }
}
