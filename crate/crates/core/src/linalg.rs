//! Symmetric eigenvalue solvers at arbitrary precision.
//!
//! The tridiagonal solver is the implicit QL iteration with Wilkinson-type
//! shifts. Rotations are accumulated either into the full eigenvector matrix
//! or only into its first row, which is all Gauss quadrature needs.

use rug::Float;

use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 200;
const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vectors {
    /// Keep only the first component of every eigenvector.
    FirstComponents,
    Full,
}

#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    /// Eigenvalues in increasing order.
    pub values: Vec<Float>,
    /// First component of each normalized eigenvector (sign as produced).
    pub first: Vec<Float>,
    /// `vectors[j]` is the eigenvector for `values[j]`, when requested.
    pub vectors: Option<Vec<Vec<Float>>>,
}

fn eps(prec: u32) -> Float {
    Float::with_val(prec, Float::i_exp(1, 1 - prec as i32))
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with main
/// diagonal `diag` and off-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen(diag: &[Float], off: &[Float], prec: u32, want: Vectors) -> Result<TridiagonalEigen> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::Malformed(format!(
            "tridiagonal matrix needs n diagonal and n-1 off-diagonal entries (got {} and {})",
            n,
            off.len()
        )));
    }
    let eps = eps(prec);
    let mut d: Vec<Float> = diag.iter().map(|x| Float::with_val(prec, x)).collect();
    let mut e: Vec<Float> = off.iter().map(|x| Float::with_val(prec, x)).collect();
    e.push(Float::new(prec));
    let rows = match want {
        Vectors::FirstComponents => 1,
        Vectors::Full => n,
    };
    // z[k][j]: component k of eigenvector j
    let mut z: Vec<Vec<Float>> =
        (0..rows).map(|k| (0..n).map(|j| Float::with_val(prec, if j == k { 1 } else { 0 })).collect()).collect();

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = Float::with_val(prec, d[m].abs_ref()) + Float::with_val(prec, d[m + 1].abs_ref());
                let em = Float::with_val(prec, e[m].abs_ref());
                if em.is_zero() || em <= Float::with_val(prec, &eps * &dd) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NonFinite(format!("tridiagonal QL failed to converge for eigenvalue {l}")));
            }
            let two_e = Float::with_val(prec, &e[l] * 2u32);
            let mut g = Float::with_val(prec, &d[l + 1] - &d[l]) / &two_e;
            let mut r = Float::with_val(prec, g.hypot_ref(&Float::with_val(prec, 1)));
            let signed_r = if g.is_sign_negative() { -r.clone() } else { r.clone() };
            g = Float::with_val(prec, &d[m] - &d[l])
                + Float::with_val(prec, &e[l] / Float::with_val(prec, &g + &signed_r));
            let mut s = Float::with_val(prec, 1);
            let mut c = Float::with_val(prec, 1);
            let mut p = Float::new(prec);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = Float::with_val(prec, &s * &e[i]);
                let b = Float::with_val(prec, &c * &e[i]);
                r = Float::with_val(prec, f.hypot_ref(&g));
                e[i + 1] = r.clone();
                if r.is_zero() {
                    d[i + 1] -= &p;
                    e[m] = Float::new(prec);
                    deflated = true;
                    break;
                }
                s = Float::with_val(prec, &f / &r);
                c = Float::with_val(prec, &g / &r);
                g = Float::with_val(prec, &d[i + 1] - &p);
                r = Float::with_val(prec, &d[i] - &g) * &s + Float::with_val(prec, &c * &b) * 2u32;
                p = Float::with_val(prec, &s * &r);
                d[i + 1] = Float::with_val(prec, &g + &p);
                g = Float::with_val(prec, &c * &r) - &b;
                for row in z.iter_mut() {
                    let t = row[i + 1].clone();
                    let zi = row[i].clone();
                    row[i + 1] = Float::with_val(prec, &s * &zi) + Float::with_val(prec, &c * &t);
                    row[i] = Float::with_val(prec, &c * &zi) - Float::with_val(prec, &s * &t);
                }
            }
            if deflated {
                continue;
            }
            d[l] -= &p;
            e[l] = g;
            e[m] = Float::new(prec);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&j| d[j].clone()).collect();
    let first = order.iter().map(|&j| z[0][j].clone()).collect();
    let vectors = match want {
        Vectors::FirstComponents => None,
        Vectors::Full => Some(order.iter().map(|&j| (0..n).map(|k| z[k][j].clone()).collect()).collect()),
    };
    Ok(TridiagonalEigen { values, first, vectors })
}

/// Eigenvalues (increasing) and eigenvectors of a dense symmetric matrix by
/// the cyclic Jacobi method. Intended for small matrices.
pub fn symmetric_eigen(matrix: &[Vec<Float>], prec: u32) -> Result<(Vec<Float>, Vec<Vec<Float>>)> {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return Err(Error::Malformed("matrix must be square".into()));
    }
    let mut a: Vec<Vec<Float>> =
        matrix.iter().map(|row| row.iter().map(|x| Float::with_val(prec, x)).collect()).collect();
    let mut v: Vec<Vec<Float>> =
        (0..n).map(|i| (0..n).map(|j| Float::with_val(prec, (i == j) as u32)).collect()).collect();
    let eps = eps(prec);
    let frob = a.iter().flatten().fold(Float::new(prec), |acc, x| acc + Float::with_val(prec, x.square_ref()));
    let threshold = Float::with_val(prec, &eps * &eps) * &frob;

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = Float::new(prec);
        for i in 0..n {
            for j in (i + 1)..n {
                off += Float::with_val(prec, a[i][j].square_ref());
            }
        }
        if off <= threshold || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].is_zero() {
                    continue;
                }
                let theta = Float::with_val(prec, &a[q][q] - &a[p][p]) / Float::with_val(prec, &a[p][q] * 2u32);
                let root = Float::with_val(prec, theta.square_ref()) + 1u32;
                let root = root.sqrt();
                let denom = Float::with_val(prec, theta.abs_ref()) + &root;
                let mut t = Float::with_val(prec, 1) / denom;
                if theta.is_sign_negative() {
                    t = -t;
                }
                let c = (Float::with_val(prec, t.square_ref()) + 1u32).sqrt().recip();
                let s = Float::with_val(prec, &t * &c);
                for k in 0..n {
                    let akp = a[k][p].clone();
                    let akq = a[k][q].clone();
                    a[k][p] = Float::with_val(prec, &c * &akp) - Float::with_val(prec, &s * &akq);
                    a[k][q] = Float::with_val(prec, &s * &akp) + Float::with_val(prec, &c * &akq);
                }
                for k in 0..n {
                    let apk = a[p][k].clone();
                    let aqk = a[q][k].clone();
                    a[p][k] = Float::with_val(prec, &c * &apk) - Float::with_val(prec, &s * &aqk);
                    a[q][k] = Float::with_val(prec, &s * &apk) + Float::with_val(prec, &c * &aqk);
                }
                for row in v.iter_mut() {
                    let vkp = row[p].clone();
                    let vkq = row[q].clone();
                    row[p] = Float::with_val(prec, &c * &vkp) - Float::with_val(prec, &s * &vkq);
                    row[q] = Float::with_val(prec, &s * &vkp) + Float::with_val(prec, &c * &vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x][x].partial_cmp(&a[y][y]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&j| a[j][j].clone()).collect();
    let vectors = order.iter().map(|&j| (0..n).map(|k| v[k][j].clone()).collect()).collect();
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(prec: u32, x: f64) -> Float {
        Float::with_val(prec, x)
    }

    #[test]
    fn two_by_two_symmetric() {
        let prec = 128;
        let eig =
            tridiagonal_eigen(&[f(prec, 0.0), f(prec, 0.0)], &[f(prec, 1.0)], prec, Vectors::FirstComponents).unwrap();
        assert!((eig.values[0].clone() + 1u32).abs() < 1e-35);
        assert!((eig.values[1].clone() - 1u32).abs() < 1e-35);
        for w in &eig.first {
            assert!((w.clone().square() - 0.5f64).abs() < 1e-35);
        }
    }

    #[test]
    fn first_components_match_full_vectors_and_dense_solver() {
        let prec = 192;
        let diag: Vec<Float> = (0..12).map(|k| f(prec, (k as f64 * 0.7).sin() * 3.0)).collect();
        let off: Vec<Float> = (0..11).map(|k| f(prec, 0.2 + (k as f64 * 1.3).cos().abs())).collect();
        let a = tridiagonal_eigen(&diag, &off, prec, Vectors::FirstComponents).unwrap();
        let b = tridiagonal_eigen(&diag, &off, prec, Vectors::Full).unwrap();
        let mut dense = vec![vec![Float::new(prec); 12]; 12];
        for i in 0..12 {
            dense[i][i] = diag[i].clone();
            if i < 11 {
                dense[i][i + 1] = off[i].clone();
                dense[i + 1][i] = off[i].clone();
            }
        }
        let (dv, _) = symmetric_eigen(&dense, prec).unwrap();
        for j in 0..12 {
            assert!((a.values[j].clone() - &b.values[j]).abs() < 1e-50);
            assert!((a.values[j].clone() - &dv[j]).abs() < 1e-50);
            let fa = a.first[j].clone().abs();
            let fb = b.vectors.as_ref().unwrap()[j][0].clone().abs();
            assert!((fa - fb).abs() < 1e-50);
        }
        // eigenvectors are orthonormal and satisfy T v = lambda v
        let vecs = b.vectors.unwrap();
        for j in 0..12 {
            for k in 0..12 {
                let dot =
                    (0..12).fold(Float::new(prec), |acc, i| acc + Float::with_val(prec, &vecs[j][i] * &vecs[k][i]));
                let target = if j == k { 1.0 } else { 0.0 };
                assert!(Float::with_val(prec, dot - target).abs() < 1e-50);
            }
            for i in 0..12 {
                let mut tv = Float::with_val(prec, &diag[i] * &vecs[j][i]);
                if i > 0 {
                    tv += Float::with_val(prec, &off[i - 1] * &vecs[j][i - 1]);
                }
                if i < 11 {
                    tv += Float::with_val(prec, &off[i] * &vecs[j][i + 1]);
                }
                let lv = Float::with_val(prec, &b.values[j] * &vecs[j][i]);
                assert!((tv - lv).abs() < 1e-50);
            }
        }
    }

    #[test]
    fn rejects_shape_mismatch() {
        let prec = 64;
        assert!(tridiagonal_eigen(&[f(prec, 1.0)], &[f(prec, 1.0)], prec, Vectors::Full).is_err());
        assert!(tridiagonal_eigen(&[], &[], prec, Vectors::Full).is_err());
    }

    #[test]
    fn one_by_one() {
        let eig = tridiagonal_eigen(&[f(64, 2.5)], &[], 64, Vectors::FirstComponents).unwrap();
        assert_eq!(eig.values[0], 2.5);
        assert_eq!(eig.first[0], 1);
    }
}
