//! Dense symmetric eigendecomposition helpers.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 0; // 0 = no limit in nalgebra

/// Eigenvalues of a symmetric matrix sorted in decreasing order, with the
/// matching orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    m
}

/// Full eigensystem, eigenvalues decreasing. Vectors belonging to a cluster of
/// (numerically) equal eigenvalues are re-orthonormalized with modified
/// Gram-Schmidt.
pub fn eigen_decreasing(m: DMatrix<f64>) -> Result<SortedEigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Eigen(format!("matrix is {}x{}", n, m.ncols())));
    }
    let eig = SymmetricEigen::try_new(symmetrize(m), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Eigen(format!("no convergence on a {n}x{n} matrix")))?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    for cluster in clusters(&values, 1e-9) {
        if cluster.len() > 1 {
            gram_schmidt(&mut vectors, cluster);
        }
    }
    Ok(SortedEigen { values, vectors })
}

/// Eigenvalues only, decreasing.
pub fn eigenvalues_decreasing(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let mut values: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    if values.len() != n || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Index ranges of consecutive values that agree within `rel_tol * max(1, |v|)`.
pub fn clusters(values: &[f64], rel_tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len()
            || (values[i] - values[i - 1]).abs() > rel_tol * values[i - 1].abs().max(1.0);
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn gram_schmidt(vectors: &mut DMatrix<f64>, cols: std::ops::Range<usize>) {
    for j in cols.clone() {
        for k in cols.start..j {
            let proj = vectors.column(j).dot(&vectors.column(k));
            let basis = vectors.column(k).clone_owned();
            vectors.column_mut(j).axpy(-proj, &basis, 1.0);
        }
        let norm = vectors.column(j).norm();
        vectors.column_mut(j).scale_mut(1.0 / norm);
    }
}
