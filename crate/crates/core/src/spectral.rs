//! Symmetric eigendecompositions and the spectral quantities built on them.

use faer::{Mat, MatRef, Side};

use crate::error::{input, LabError, Result};

/// Absolute asymmetry tolerated before a matrix is rejected as non-symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenpairs of a symmetric matrix, eigenvalues in nondecreasing order.
/// Each eigenvector is normalised so that its first entry with magnitude
/// above `1e-12` is positive.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

pub fn check_symmetric(a: MatRef<'_, f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return input(format!("matrix is {}x{}, expected square", a.nrows(), a.ncols()));
    }
    for i in 0..a.nrows() {
        for j in 0..i {
            let (x, y) = (a[(i, j)], a[(j, i)]);
            if !x.is_finite() || !y.is_finite() {
                return input("matrix has non-finite entries");
            }
            if (x - y).abs() > SYMMETRY_TOL {
                return input(format!("matrix is not symmetric at ({i}, {j}): {x} vs {y}"));
            }
        }
        if !a[(i, i)].is_finite() {
            return input("matrix has non-finite entries");
        }
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix. The lower triangle is read.
pub fn sym_eigen(a: MatRef<'_, f64>) -> Result<SymEigen> {
    let n = a.nrows();
    if n == 0 {
        return Ok(SymEigen { values: Vec::new(), vectors: Mat::zeros(0, 0) });
    }
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LabError::Execution(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..n).map(|i| s[i]).collect();
    let mut vectors = evd.U().to_owned();
    for k in 0..n {
        let first = (0..n).map(|i| vectors[(i, k)]).find(|x| x.abs() > 1e-12);
        if matches!(first, Some(x) if x < 0.0) {
            for i in 0..n {
                vectors[(i, k)] = -vectors[(i, k)];
            }
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Eigenvalues only, nondecreasing.
pub fn sym_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| LabError::Execution(format!("eigenvalue computation failed: {e:?}")))
}

/// `U diag(values) U^T`, skipping zero weights.
pub fn reconstruct(vectors: MatRef<'_, f64>, values: &[f64]) -> Mat<f64> {
    let n = vectors.nrows();
    let support: Vec<usize> = (0..values.len()).filter(|&k| values[k] != 0.0).collect();
    if support.is_empty() {
        return Mat::zeros(n, n);
    }
    let r = support.len();
    let u = Mat::from_fn(n, r, |i, c| vectors[(i, support[c])]);
    let us = Mat::from_fn(n, r, |i, c| vectors[(i, support[c])] * values[support[c]]);
    let mut out = &us * u.transpose();
    symmetrize(&mut out);
    out
}

/// Replaces `m` by `(m + m^T) / 2`.
pub fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Sum of absolute eigenvalues of a symmetric matrix.
pub fn nuclear_norm(a: MatRef<'_, f64>) -> Result<f64> {
    check_symmetric(a)?;
    Ok(sym_eigenvalues(a)?.iter().map(|x| x.abs()).sum())
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm(a: MatRef<'_, f64>) -> Result<f64> {
    check_symmetric(a)?;
    Ok(sym_eigenvalues(a)?.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(a: MatRef<'_, f64>) -> Result<f64> {
    Ok(sym_eigenvalues(a)?.last().copied().unwrap_or(0.0))
}

pub fn frobenius(a: MatRef<'_, f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

/// Hilbert-Schmidt inner product `sum_ij a_ij b_ij`.
pub fn inner(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * b[(i, j)];
        }
    }
    s
}
