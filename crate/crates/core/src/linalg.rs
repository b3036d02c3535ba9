//! Dense helpers shared by the estimators.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
#[allow(unused_imports)] // unused when std float methods are linked in
use num_traits::Float;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Solution of `A X = B` in the least-squares, minimum-norm sense.
#[derive(Debug, Clone)]
pub struct PinvSolution {
    pub x: CMatrix,
    pub singular_values: Vec<f64>,
    pub cutoff: f64,
    pub rank: usize,
}

/// `A^† B` via the SVD of `A`, discarding singular values `≤ rcond · σ_max`.
pub fn pinv_solve(a: &CMatrix, b: &CMatrix, rcond: f64) -> Result<PinvSolution> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension { expected: a.nrows(), found: b.nrows() });
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested");
    let v_t = svd.v_t.as_ref().expect("requested");
    let mut sv: Vec<(usize, f64)> = svd.singular_values.iter().copied().enumerate().collect();
    let sigma_max = sv.iter().map(|s| s.1).fold(0.0, f64::max);
    let cutoff = rcond * sigma_max;
    // U^* B, scaled row by row by 1/σ for the kept directions
    let mut ub = u.adjoint() * b;
    let mut rank = 0;
    for &(i, s) in &sv {
        if s > cutoff && s > 0.0 {
            rank += 1;
            let inv = Complex64::new(1.0 / s, 0.0);
            ub.row_mut(i).iter_mut().for_each(|x| *x *= inv);
        } else {
            ub.row_mut(i).fill(Complex64::new(0.0, 0.0));
        }
    }
    let x = v_t.adjoint() * ub;
    sv.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(PinvSolution { x, singular_values: sv.into_iter().map(|s| s.1).collect(), cutoff, rank })
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `D^{-1/2}` for a symmetric positive definite `D`.
pub fn spd_inverse_sqrt(d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if d.nrows() != d.ncols() {
        return Err(Error::Dimension { expected: d.nrows(), found: d.ncols() });
    }
    let eig = SymmetricEigen::new(d.clone());
    let scale = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if eig.eigenvalues.iter().any(|&l| l <= f64::EPSILON * scale * d.nrows() as f64 || l <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&inv_sqrt) * q.transpose())
}

/// Largest absolute eigenvalue of a real symmetric matrix.
pub fn symmetric_spectral_radius(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Eigenvalues of a complex square matrix from its Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension { expected: m.nrows(), found: m.ncols() });
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::Singular)?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}
