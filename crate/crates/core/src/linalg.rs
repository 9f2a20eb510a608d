//! Small eigenvalue helpers on top of nalgebra.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Lowest eigenpair of a dense symmetric matrix.
pub fn dense_lowest(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("linalg", "matrix has non-finite entries"));
    }
    let eig = SymmetricEigen::new(m.clone());
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::numerical("linalg", "empty matrix"))?;
    let mut v = eig.eigenvectors.column(idx).into_owned();
    let s = v.norm();
    v /= s;
    Ok((*val, v))
}

/// Lowest eigenvalue of a dense symmetric matrix, without eigenvectors.
pub fn dense_lowest_value(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("linalg", "matrix has non-finite entries"));
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::numerical("linalg", "empty matrix"))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lowest eigenpair of a symmetric operator given by its action, by Lanczos
/// iteration with full reorthogonalization.
///
/// Converges when the Ritz residual drops below `tol * max(1, |theta|)`.
pub fn lanczos_lowest<F>(n: usize, mut apply: F, start: &[f64], tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let m_max = max_iter.min(n).max(1);
    let norm0 = dot(start, start).sqrt();
    if !(norm0 > 0.0) || !norm0.is_finite() {
        return Err(Error::numerical("linalg", "Lanczos start vector is zero or non-finite"));
    }
    let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / norm0).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut scale = 0.0f64;
    let mut last = (f64::NAN, DVector::zeros(1), f64::INFINITY);
    for j in 0..m_max {
        apply(&basis[j], &mut w);
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::numerical("linalg", "operator produced non-finite values"));
        }
        let a = dot(&basis[j], &w);
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = dot(&w, &w).sqrt();
        scale = scale.max(a.abs()).max(b);
        let k = alpha.len();
        let converged_space = b <= 1e-14 * scale.max(f64::MIN_POSITIVE) || k == m_max;
        if k.is_multiple_of(4) || converged_space || k == n {
            let mut t = DMatrix::zeros(k, k);
            for i in 0..k {
                t[(i, i)] = alpha[i];
                if i + 1 < k {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (idx, &theta) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(y.1))
                .expect("non-empty tridiagonal");
            let s = eig.eigenvectors.column(idx).into_owned();
            let resid = (b * s[k - 1]).abs();
            last = (theta, s, resid);
            if resid <= tol * theta.abs().max(1.0) || converged_space {
                break;
            }
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let (theta, s, resid) = last;
    if resid > tol * theta.abs().max(1.0) && !(resid <= 1e-14 * scale) {
        return Err(Error::accuracy("linalg", "Lanczos iteration did not converge", resid));
    }
    let mut v = vec![0.0; n];
    for (coef, q) in s.iter().zip(&basis) {
        for (vi, qi) in v.iter_mut().zip(q) {
            *vi += coef * qi;
        }
    }
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    Ok((theta, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lanczos_matches_dense() {
        let n = 120;
        let m = DMatrix::from_fn(n, n, |i, j| {
            let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
            -(-(x - y).powi(2) * 30.0).exp() / n as f64 * 3.0 + if i == j { x * x } else { 0.0 }
        });
        let (dense, dv) = dense_lowest(&m).unwrap();
        let start = vec![1.0; n];
        let (lz, v) = lanczos_lowest(
            n,
            |x, y| {
                let r = &m * DVector::from_column_slice(x);
                y.copy_from_slice(r.as_slice());
            },
            &start,
            1e-12,
            200,
        )
        .unwrap();
        assert!((dense - lz).abs() < 1e-12, "{dense} vs {lz}");
        let overlap: f64 = v.iter().zip(dv.iter()).map(|(a, b)| a * b).sum();
        assert!(overlap.abs() > 1.0 - 1e-10);
        assert!((dense_lowest_value(&m).unwrap() - dense).abs() < 1e-13);
    }

    #[test]
    fn lanczos_zero_operator() {
        let (theta, _) = lanczos_lowest(10, |_, y| y.fill(0.0), &[1.0; 10], 1e-12, 50).unwrap();
        assert_eq!(theta, 0.0);
    }
}
