//! Reconstruction of the map from an estimated push-forward, and the
//! truncated least-squares polynomial it coincides with at the origin.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when std float methods are linked in
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{real_point, FockBasis, SampleSet};
use crate::jets::monomial;
use crate::linalg::{pinv_solve, CMatrix};
use crate::maps::MapExpr;
use crate::multiindex::graded_numbering;
use crate::pushforward::{default_rcond, estimate_pushforward};

/// `f̃_i(z) = u_{p,m}(z) C^* (∂_{z_i} v_{q,m}(0))^*` for every component `i`.
///
/// `c` is `r_m^F × r_m^E`; either an estimate or the exact jet matrix.
pub fn reconstruct_eval(c: &CMatrix, p: &[f64], q: &[Complex64], m: usize, z: &[Complex64]) -> Result<Vec<Complex64>> {
    let u = FockBasis::real(p, m);
    let v = FockBasis::new(q, m);
    if c.nrows() != v.len() || c.ncols() != u.len() {
        return Err(Error::Dimension { expected: v.len() * u.len(), found: c.nrows() * c.ncols() });
    }
    if z.len() != p.len() {
        return Err(Error::Dimension { expected: p.len(), found: z.len() });
    }
    let row = u.row(z);
    // u(z) C^*, a row over the target basis
    let pulled: Vec<Complex64> =
        (0..c.nrows()).map(|j| (0..c.ncols()).map(|k| row[k] * c[(j, k)].conj()).sum()).collect();
    Ok((0..q.len())
        .map(|i| pulled.iter().zip(v.gradient_at_zero(i)).map(|(a, g)| a * g.conj()).sum())
        .collect())
}

/// Least-squares polynomial of degree `≤ n` through `(X, Y)`, truncated to
/// degree `≤ m`; coefficients follow the graded monomial order.
pub fn truncated_lsq(x: &[Vec<f64>], y: &[Complex64], m: usize, n: usize) -> Result<Vec<Complex64>> {
    if m > n {
        return Err(Error::Invalid("m must not exceed n".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Dimension { expected: x.len(), found: y.len() });
    }
    let d = x.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::Invalid("no sample points".into()));
    }
    let table = graded_numbering(d, n);
    let mut design = CMatrix::zeros(x.len(), table.len());
    for (i, point) in x.iter().enumerate() {
        if point.len() != d {
            return Err(Error::Dimension { expected: d, found: point.len() });
        }
        let z = real_point(point);
        for (j, alpha) in table.entries().iter().enumerate() {
            design[(i, j)] = monomial(&z, alpha);
        }
    }
    let rhs = CMatrix::from_column_slice(y.len(), 1, y);
    let sol = pinv_solve(&design, &rhs, default_rcond(x.len(), table.len()))?;
    if sol.rank < table.len() {
        return Err(Error::IllPosed { rank: sol.rank, required: table.len(), singular_values: sol.singular_values });
    }
    Ok(sol.x.column(0).iter().take(table.count_through(m)).copied().collect())
}

/// Monomial coefficients at the origin of the reconstruction from `c` with `p = q = 0`.
fn monomial_coefficients(c: &CMatrix, d: usize, m: usize) -> Vec<Complex64> {
    let table = graded_numbering(d, m);
    let v = FockBasis::new(&[Complex64::new(0.0, 0.0)], m);
    let grad = v.gradient_at_zero(0);
    table
        .entries()
        .iter()
        .enumerate()
        .map(|(k, alpha)| {
            let s: Complex64 = (0..c.nrows()).map(|j| c[(j, k)].conj() * grad[j].conj()).sum();
            s / alpha.factorial().sqrt()
        })
        .collect()
}

/// Largest coefficient difference between the Fock pipeline applied to
/// `g - g(0)` (plus `g(0)`) and the truncated least-squares polynomial of `g`.
///
/// Needs `m ≥ 1`: an order-0 target basis has no linear row to read the map from.
pub fn lsq_equivalence_check(g: &MapExpr, x: &[Vec<f64>], m: usize, n: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Invalid("m must be at least 1".into()));
    }
    if g.output_dim() != 1 {
        return Err(Error::Dimension { expected: 1, found: g.output_dim() });
    }
    let d = g.input_dim();
    let origin = alloc::vec![0.0; d];
    let g0 = g.eval_real(&origin)?[0];
    let z: Vec<Vec<Complex64>> = x.iter().map(|p| real_point(p)).collect();
    let values = z.iter().map(|zi| g.eval(zi).map(|v| v[0])).collect::<Result<Vec<_>>>()?;
    let shifted: Vec<Vec<Complex64>> = values.iter().map(|v| alloc::vec![v - g0]).collect();
    let samples = SampleSet::new(z, shifted)?;
    let estimate = estimate_pushforward(&origin, &[Complex64::new(0.0, 0.0)], m, n, &samples)?;
    let mut fock = monomial_coefficients(&estimate.c_hat, d, m);
    fock[0] += g0;
    let lsq = truncated_lsq(x, &values, m, n)?;
    Ok(fock.iter().zip(&lsq).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}
