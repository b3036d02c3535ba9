//! Flow maps of vector fields, the matrix logarithm and exponential, and
//! recovery of a vector field from an estimated flow push-forward.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when std float methods are linked in
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::linalg::{eigenvalues, frobenius, identity, op_norm, CMatrix};
use crate::maps::MapExpr;
use crate::pushforward::PushforwardEstimate;
use crate::quadrature::gauss_legendre_unit;

const MAX_STEPS: usize = 1_000_000;

fn field(v: &MapExpr, y: &[f64]) -> Result<Vec<f64>> {
    let out = v.eval_real(y)?;
    Ok(out.into_iter().map(|c| c.re).collect())
}

/// `φ^T(z0)` by the Dormand–Prince 5(4) pair with absolute and relative tolerance `tol`.
pub fn flow_map(v: &MapExpr, t_end: f64, z0: &[f64], tol: f64) -> Result<Vec<f64>> {
    if v.output_dim() != v.input_dim() {
        return Err(Error::Dimension { expected: v.input_dim(), found: v.output_dim() });
    }
    if z0.len() != v.input_dim() {
        return Err(Error::Dimension { expected: v.input_dim(), found: z0.len() });
    }
    if !(t_end >= 0.0) || !(tol > 0.0) {
        return Err(Error::Invalid("flow time must be nonnegative and tolerance positive".into()));
    }
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let dim = z0.len();
    let mut y = z0.to_vec();
    let mut t = 0.0;
    if t_end == 0.0 {
        return Ok(y);
    }
    let mut h = (t_end * 0.01).min(0.1).max(t_end * 1e-6);
    let h_min = t_end * 1e-14;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    k[0] = field(v, &y)?;
    for _ in 0..MAX_STEPS {
        if t >= t_end {
            return Ok(y);
        }
        let last = t + h >= t_end;
        let step = if last { t_end - t } else { h };
        for s in 1..7 {
            let stage: Vec<f64> =
                (0..dim).map(|i| y[i] + step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>()).collect();
            k[s] = field(v, &stage)?;
        }
        let y5: Vec<f64> = (0..dim).map(|i| y[i] + step * (0..7).map(|j| B5[j] * k[j][i]).sum::<f64>()).collect();
        let err = (0..dim)
            .map(|i| {
                let e = step * (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>();
                e.abs() / (tol + tol * y[i].abs().max(y5[i].abs()))
            })
            .fold(0.0, f64::max);
        if !err.is_finite() || y5.iter().any(|x| !x.is_finite()) {
            h = step * 0.1;
        } else if err <= 1.0 {
            t = if last { t_end } else { t + step };
            y = y5;
            k[0] = k[6].clone();
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * factor;
            continue;
        } else {
            h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h < h_min {
            return Err(Error::BlowUp { t });
        }
    }
    Err(Error::BlowUp { t })
}

/// `e^M` by scaling and squaring of the Taylor series.
pub fn matrix_exp(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = frobenius(m);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * Complex64::new(scale, 0.0);
    let mut result = identity(n);
    let mut term = identity(n);
    for j in 1..40 {
        term = &term * &a / Complex64::new(j as f64, 0.0);
        result += &term;
        if frobenius(&term) <= f64::EPSILON * 1e-2 * frobenius(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Rejects matrices with an eigenvalue on the closed negative real axis.
fn check_log_spectrum(c: &CMatrix) -> Result<()> {
    let scale = frobenius(c).max(1.0);
    for lambda in eigenvalues(c)? {
        let on_axis = lambda.im.abs() <= 1e-12 * scale;
        if on_axis && lambda.re <= 1e-14 * scale {
            return Err(Error::NonPositiveRealEigenvalue { re: lambda.re, im: lambda.im });
        }
    }
    Ok(())
}

fn log_quadrature(c: &CMatrix, nodes: usize) -> Result<CMatrix> {
    let n = c.nrows();
    let delta = c - identity(n);
    let (t, w) = gauss_legendre_unit(nodes);
    let mut sum = CMatrix::zeros(n, n);
    for (ti, wi) in t.iter().zip(&w) {
        let pencil = identity(n) + &delta * Complex64::new(*ti, 0.0);
        let solved = pencil.lu().solve(&delta).ok_or(Error::Singular)?;
        sum += solved * Complex64::new(*wi, 0.0);
    }
    Ok(sum)
}

/// Largest Gauss–Legendre rule tried by [`matrix_log`].
pub const MAX_LOG_NODES: usize = 4096;

/// `log C = (C - I) ∫_0^1 (I + t(C - I))^{-1} dt`, with the node count doubled
/// from 8 until successive values differ by less than `quad_tol` in Frobenius norm.
pub fn matrix_log(c: &CMatrix, quad_tol: f64) -> Result<CMatrix> {
    if c.nrows() != c.ncols() {
        return Err(Error::Dimension { expected: c.nrows(), found: c.ncols() });
    }
    if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invalid("non-finite matrix entry".into()));
    }
    check_log_spectrum(c)?;
    let mut nodes = 8;
    let mut previous = log_quadrature(c, nodes)?;
    let mut change = f64::INFINITY;
    while nodes < MAX_LOG_NODES {
        nodes *= 2;
        let next = log_quadrature(c, nodes)?;
        change = frobenius(&(&next - &previous));
        previous = next;
        if change < quad_tol {
            return Ok(previous);
        }
    }
    Err(Error::QuadratureNotConverged { nodes, change })
}

#[derive(Debug, Clone)]
pub struct GeneratorEstimate {
    pub a_hat: CMatrix,
    /// Flow time of the data.
    pub t: f64,
    /// `‖exp(T·Â) - Ĉ‖_Fr`.
    pub log_residual: f64,
    pub m: usize,
}

/// Default Frobenius tolerance of the logarithm quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

/// `Â = log(Ĉ) / T`.
pub fn estimate_generator(estimate: &PushforwardEstimate, t: f64) -> Result<GeneratorEstimate> {
    generator_from_matrix(&estimate.c_hat, t, estimate.m)
}

/// `log(C) / T` for an arbitrary square flow matrix of order `m`.
pub fn generator_from_matrix(c: &CMatrix, t: f64, m: usize) -> Result<GeneratorEstimate> {
    if c.nrows() != c.ncols() {
        return Err(Error::Dimension { expected: c.nrows(), found: c.ncols() });
    }
    if !(t > 0.0) {
        return Err(Error::Invalid("flow time must be positive".into()));
    }
    let log = matrix_log(c, DEFAULT_QUAD_TOL)?;
    let log_residual = frobenius(&(matrix_exp(&log) - c));
    Ok(GeneratorEstimate { a_hat: log / Complex64::new(t, 0.0), t, log_residual, m })
}

/// `V̂_i(z) = u_{p,m}(z) Â^* (∂_{z_i} u_{p,m}(0))^*`.
pub fn reconstruct_field(generator: &GeneratorEstimate, p: &[f64], z: &[Complex64]) -> Result<Vec<Complex64>> {
    let basis = FockBasis::real(p, generator.m);
    let a = &generator.a_hat;
    if a.nrows() != basis.len() {
        return Err(Error::Dimension { expected: basis.len(), found: a.nrows() });
    }
    if z.len() != p.len() {
        return Err(Error::Dimension { expected: p.len(), found: z.len() });
    }
    let row = basis.row(z);
    let pulled: Vec<Complex64> =
        (0..a.nrows()).map(|j| (0..a.ncols()).map(|k| row[k] * a[(j, k)].conj()).sum()).collect();
    Ok((0..p.len())
        .map(|i| pulled.iter().zip(basis.gradient_at_zero(i)).map(|(x, g)| x * g.conj()).sum())
        .collect())
}

/// `max_t ‖(I + t(C - I))^{-1}‖_op` over `t = 0, 1/grid, …, 1`; `+∞` if a pencil is singular.
pub fn bound_b(c: &CMatrix, grid: usize) -> f64 {
    let n = c.nrows();
    let grid = grid.max(1);
    let delta = c - identity(n);
    let mut best: f64 = 0.0;
    for k in 0..=grid {
        let t = k as f64 / grid as f64;
        let pencil = identity(n) + &delta * Complex64::new(t, 0.0);
        match pencil.try_inverse() {
            Some(inv) => {
                let norm = op_norm(&inv);
                if !norm.is_finite() {
                    return f64::INFINITY;
                }
                best = best.max(norm);
            }
            None => return f64::INFINITY,
        }
    }
    best
}

/// Largest `|V(p)|`; the recovery assumes `p` is an equilibrium.
pub fn equilibrium_residual(v: &MapExpr, p: &[f64]) -> Result<f64> {
    Ok(v.eval_real(p)?.iter().map(|c| c.norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::parse_map;
    use crate::pushforward::{oracle_generator, oracle_pushforward};
    use nalgebra::DVector;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&x| c(x))))
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn flow_examples() {
        let v = parse_map("-z1", 1, 1).unwrap();
        let y = flow_map(&v, 1.0, &[1.0], 1e-10).unwrap();
        assert!((y[0] - (-1f64).exp()).abs() < 1e-9);
        let zero = parse_map("0; 0", 2, 2).unwrap();
        assert_eq!(flow_map(&zero, 2.0, &[0.3, -0.1], 1e-10).unwrap(), vec![0.3, -0.1]);
        let v = parse_map("-z1 + 0.2*z1^2", 1, 1).unwrap();
        let exact = 0.4 / ((1.0 - 0.08) * 0.1f64.exp() + 0.08);
        let y = flow_map(&v, 0.1, &[0.4], 1e-10).unwrap();
        assert!((y[0] - exact).abs() < 1e-8);
    }

    #[test]
    fn flow_blow_up_is_reported() {
        let v = parse_map("z1^2", 1, 1).unwrap();
        assert!(matches!(flow_map(&v, 2.0, &[1.0], 1e-10), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn log_examples() {
        let l = matrix_log(&diag(&[2.0, 3.0]), 1e-13).unwrap();
        assert!(max_diff(&l, &diag(&[2f64.ln(), 3f64.ln()])) < 1e-12);
        let l = matrix_log(&identity(3), 1e-13).unwrap();
        assert!(frobenius(&l) < 1e-15);
        let jordan = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        let l = matrix_log(&jordan, 1e-13).unwrap();
        assert!(max_diff(&l, &CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])) < 1e-10);
    }

    #[test]
    fn log_rejects_negative_spectrum() {
        assert!(matches!(matrix_log(&diag(&[1.0, -2.0]), 1e-12), Err(Error::NonPositiveRealEigenvalue { .. })));
        assert!(matches!(matrix_log(&diag(&[1.0, 0.0]), 1e-12), Err(Error::NonPositiveRealEigenvalue { .. })));
    }

    #[test]
    fn exp_of_log() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(2.0), c(0.3), c(-0.1), c(0.1), c(0.7), c(0.5), Complex64::new(0.0, 0.2), c(-0.4), c(1.5)],
        );
        let l = matrix_log(&m, 1e-13).unwrap();
        assert!(frobenius(&(matrix_exp(&l) - &m)) < 1e-10 * frobenius(&m));
    }

    #[test]
    fn generator_examples() {
        let a = [0.3, -1.2, 0.0];
        let e: Vec<f64> = a.iter().map(|x: &f64| (0.5 * x).exp()).collect();
        let g = generator_from_matrix(&diag(&e), 0.5, 1).unwrap();
        assert!(max_diff(&g.a_hat, &diag(&a)) < 1e-9);
        assert!(g.log_residual < 1e-8);
        let g = generator_from_matrix(&identity(4), 0.1, 3).unwrap();
        assert!(frobenius(&g.a_hat) < 1e-14);
        let zero_field = GeneratorEstimate { a_hat: CMatrix::zeros(3, 3), t: 1.0, log_residual: 0.0, m: 2 };
        assert_eq!(reconstruct_field(&zero_field, &[0.0], &[c(0.3)]).unwrap(), vec![c(0.0)]);
    }

    #[test]
    fn flow_oracle_matches_generator_oracle() {
        // exact flow of ż = -z + 0.2z² against exp(T·A_m)
        let t = 0.1f64;
        let e = t.exp();
        let flow = parse_map(&alloc::format!("z1/((1 - 0.2*z1)*{e:.17} + 0.2*z1)"), 1, 1).unwrap();
        let field = parse_map("-z1 + 0.2*z1^2", 1, 1).unwrap();
        let c_t = oracle_pushforward(&flow, &[0.0], 5).unwrap().c;
        let a = oracle_generator(&field, &[0.0], 5).unwrap();
        assert!(max_diff(&matrix_exp(&(&a * c(t))), &c_t) < 1e-12);
        let g = generator_from_matrix(&c_t, t, 5).unwrap();
        assert!(max_diff(&g.a_hat, &a) < 1e-9);
        // the exact generator reproduces the field at degree ≤ m
        let exact = GeneratorEstimate { a_hat: a, t, log_residual: 0.0, m: 5 };
        let z = c(0.25);
        let out = reconstruct_field(&exact, &[0.0], &[z]).unwrap();
        assert!((out[0] - (-z + 0.2 * z * z)).norm() < 1e-12);
    }

    #[test]
    fn semigroup_of_linear_flow() {
        let flow = |t: f64| {
            let f = parse_map(&alloc::format!("{:.17}*z1", (-t).exp()), 1, 1).unwrap();
            oracle_pushforward(&f, &[0.0], 4).unwrap().c
        };
        assert!(max_diff(&(flow(0.1) * flow(0.2)), &flow(0.3)) < 1e-9);
    }

    #[test]
    fn bound_b_examples() {
        assert!((bound_b(&identity(3), 101) - 1.0).abs() < 1e-14);
        assert!((bound_b(&diag(&[2.0]), 101) - 1.0).abs() < 1e-14);
        assert!((bound_b(&diag(&[0.5]), 101) - 2.0).abs() < 1e-12);
        assert_eq!(bound_b(&diag(&[-1.0]), 100), f64::INFINITY);
    }

    #[test]
    fn equilibrium() {
        let v = parse_map("-z1 + 0.2*z1^2", 1, 1).unwrap();
        assert_eq!(equilibrium_residual(&v, &[0.0]).unwrap(), 0.0);
        assert!(equilibrium_residual(&v, &[1.0]).unwrap() > 0.1);
    }
}
