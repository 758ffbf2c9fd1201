//! Dense real symmetric eigensolver: Householder reduction to tridiagonal
//! form followed by implicit-shift QL iteration.
//!
//! The matrix is row-major and only its lower triangle is read. Both phases
//! touch memory row by row; eigenvectors, when requested, are accumulated as
//! rows of the transposed orthogonal factor so that plane rotations also act
//! on contiguous rows.

use crate::error::{Error, Result};
use crate::numeric::dot;

/// QL sweeps allowed per eigenvalue before giving up.
const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Row `i` (length `n`) is a unit eigenvector for `values[i]`.
    pub vectors: Option<Vec<f64>>,
}

impl Decomposition {
    pub fn vector(&self, i: usize) -> Option<&[f64]> {
        let n = self.values.len();
        self.vectors.as_ref().map(|v| &v[i * n..(i + 1) * n])
    }
}

/// Eigen-decomposition of the symmetric `n × n` matrix stored row-major in `a`.
pub fn symmetric_eigen(mut a: Vec<f64>, n: usize, want_vectors: bool) -> Result<Decomposition> {
    assert_eq!(a.len(), n * n, "matrix storage must be n*n");
    if n == 0 {
        return Ok(Decomposition {
            values: Vec::new(),
            vectors: want_vectors.then(Vec::new),
        });
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let reflector_norms = tridiagonalize(&mut a, n, &mut e);
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[i * n + i];
    }
    let mut zt = if want_vectors {
        Some(accumulate(&a, n, &reflector_norms))
    } else {
        None
    };
    drop(a);
    tridiagonal_ql(&mut d, &mut e, zt.as_deref_mut(), n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = zt.map(|z| {
        let mut out = Vec::with_capacity(n * n);
        for &i in &order {
            out.extend_from_slice(&z[i * n..(i + 1) * n]);
        }
        out
    });
    Ok(Decomposition { values, vectors })
}

/// Reduces the lower triangle in place. Afterwards the diagonal holds the
/// tridiagonal diagonal, `e[i]` the entry coupling `i - 1` and `i`, and row
/// `i` keeps the Householder vector in its first `i` entries. Returns the
/// reflector normalizers `H_i = |u_i|^2 / 2` (zero when no reflection).
fn tridiagonalize(a: &mut [f64], n: usize, e: &mut [f64]) -> Vec<f64> {
    let mut hs = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut p = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let row = i * n;
        if l == 0 {
            e[i] = a[row];
            continue;
        }
        let scale: f64 = a[row..=row + l].iter().map(|x| x.abs()).sum();
        if scale == 0.0 {
            e[i] = 0.0;
            continue;
        }
        for x in &mut a[row..=row + l] {
            *x /= scale;
        }
        let mut h: f64 = a[row..=row + l].iter().map(|x| x * x).sum();
        let f = a[row + l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        a[row + l] = f - g;
        let m = l + 1;
        u[..m].copy_from_slice(&a[row..row + m]);

        // p = B u / h using only the lower triangle of the leading block B.
        p[..m].fill(0.0);
        for j in 0..m {
            let rj = &a[j * n..j * n + j];
            let uj = u[j];
            let s = dot(rj, &u[..j]);
            for (pk, &ajk) in p[..j].iter_mut().zip(rj) {
                *pk += ajk * uj;
            }
            p[j] += s + a[j * n + j] * uj;
        }
        for pk in &mut p[..m] {
            *pk /= h;
        }
        let k = dot(&u[..m], &p[..m]) / (2.0 * h);
        for (pk, &uk) in p[..m].iter_mut().zip(&u[..m]) {
            *pk -= k * uk;
        }
        // B -= u q^T + q u^T on the lower triangle, q stored in p.
        for j in 0..m {
            let (uj, qj) = (u[j], p[j]);
            let rj = &mut a[j * n..=j * n + j];
            for ((x, &qk), &uk) in rj.iter_mut().zip(&p[..=j]).zip(&u[..=j]) {
                *x -= uj * qk + qj * uk;
            }
        }
        hs[i] = h;
    }
    hs
}

/// Builds the transpose of the accumulated orthogonal factor, one reflector
/// at a time in ascending order.
fn accumulate(a: &[f64], n: usize, hs: &[f64]) -> Vec<f64> {
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    for i in 1..n {
        let h = hs[i];
        if h == 0.0 {
            continue;
        }
        let u = &a[i * n..i * n + i];
        for j in 0..i {
            let rj = &mut zt[j * n..j * n + i];
            let s = dot(rj, u) / h;
            for (x, &uk) in rj.iter_mut().zip(u) {
                *x -= s * uk;
            }
        }
    }
    zt
}

/// Implicit QL on the tridiagonal `(d, e)`; `e[i]` couples `i - 1` and `i` on
/// entry. Rotations are applied to the rows of `zt` when present.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>, n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::NonConvergence {
                        index: l,
                        iterations: sweeps - 1,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in &mut d[l + 2..] {
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
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let ri = &mut lo[i * n..];
                        let ri1 = &mut hi[..n];
                        for (x, y) in ri.iter_mut().zip(ri1.iter_mut()) {
                            let t = *y;
                            *y = s * *x + c * t;
                            *x = c * *x - s * t;
                        }
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
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_relative_eq;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut r = rng::stream(seed, 0);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x = 2.0 * rng::open_unit(&mut r) - 1.0;
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn matches_nalgebra_on_random_matrices() {
        for (n, seed) in [(1, 0), (2, 1), (3, 2), (7, 3), (40, 4), (113, 5)] {
            let a = random_symmetric(n, seed);
            let ours = symmetric_eigen(a.clone(), n, false).unwrap().values;
            let m = nalgebra::DMatrix::from_row_slice(n, n, &a);
            let mut theirs: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (x, y) in ours.iter().zip(&theirs) {
                assert!((x - y).abs() < 1e-11 * n as f64, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn vectors_are_orthonormal_with_small_residual() {
        let n = 60;
        let a = random_symmetric(n, 9);
        let dec = symmetric_eigen(a.clone(), n, true).unwrap();
        for i in 0..n {
            let v = dec.vector(i).unwrap();
            let mut res: f64 = 0.0;
            for r in 0..n {
                let av = dot(&a[r * n..(r + 1) * n], v);
                res += (av - dec.values[i] * v[r]).powi(2);
            }
            assert!(res.sqrt() < 1e-12, "residual {res}");
            for j in 0..=i {
                let ip = dot(v, dec.vector(j).unwrap());
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reads_only_lower_triangle() {
        let n = 5;
        let mut a = random_symmetric(n, 11);
        let clean = symmetric_eigen(a.clone(), n, false).unwrap().values;
        for i in 0..n {
            for j in i + 1..n {
                a[i * n + j] = f64::NAN;
            }
        }
        let dirty = symmetric_eigen(a, n, false).unwrap().values;
        assert_eq!(clean, dirty);
    }

    #[test]
    fn repeated_eigenvalues() {
        // C_4: {-2, 0, 0, 2}
        let n = 4;
        let mut a = vec![0.0; 16];
        for i in 0..4 {
            let j = (i + 1) % 4;
            a[i * n + j] = 1.0;
            a[j * n + i] = 1.0;
        }
        let v = symmetric_eigen(a, n, true).unwrap().values;
        for (x, y) in v.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert_relative_eq!(*x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn diagonal_and_zero() {
        let v = symmetric_eigen(vec![3.0, 0.0, 0.0, -1.0], 2, false).unwrap().values;
        assert_eq!(v, vec![-1.0, 3.0]);
        let v = symmetric_eigen(vec![0.0; 9], 3, true).unwrap().values;
        assert_eq!(v, vec![0.0; 3]);
    }
}
