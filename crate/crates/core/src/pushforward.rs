//! Data-driven estimate of the push-forward on jets, its exact counterpart
//! computed by jet arithmetic, and the quantities entering the error bounds.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // unused when std float methods are linked in
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{feature_matrix, real_point, FockBasis, SampleSet};
use crate::jets::{monomial, Jet, JetSpace};
use crate::linalg::{pinv_solve, spd_inverse_sqrt, symmetric_spectral_radius, CMatrix};
use crate::maps::MapExpr;
use crate::multiindex::{binomial, factorial, MultiIndexTable};

#[derive(Debug, Clone)]
pub struct PushforwardEstimate {
    /// `r_m^F × r_m^E`.
    pub c_hat: CMatrix,
    pub m: usize,
    pub n: usize,
    /// Relative cutoff applied to the singular values of `U`.
    pub pinv_rcond: f64,
    pub smallest_kept_sv: f64,
    pub largest_sv: f64,
    pub rank: usize,
    /// All singular values of `U`, descending.
    pub singular_values: Vec<f64>,
}

impl PushforwardEstimate {
    /// Whether no singular direction of `U` was discarded.
    pub fn full_rank(&self) -> bool {
        self.rank == self.singular_values.len()
    }
}

#[derive(Debug, Clone)]
pub struct OraclePushforward {
    /// `r_m^F × r_m^E`.
    pub c: CMatrix,
    /// `df_p`, `r × d`.
    pub jacobian: CMatrix,
}

/// Default relative cutoff `1e-12 · max(N, r_n)`.
pub fn default_rcond(samples: usize, r_n: usize) -> f64 {
    1e-12 * samples.max(r_n) as f64
}

/// `Ĉ_{m,n,Z}` with the default singular-value cutoff.
pub fn estimate_pushforward(
    p: &[f64],
    q: &[Complex64],
    m: usize,
    n: usize,
    samples: &SampleSet,
) -> Result<PushforwardEstimate> {
    estimate_pushforward_with(p, q, m, n, samples, None)
}

/// `Ĉ_{m,n,Z}`: the leftmost `r_m^F × r_m^E` block of `V^*(U^*)^†`.
///
/// Since `V^*(U^*)^† = (U^† V)^*`, only the top `r_m^E` rows of `U^† V` are needed.
pub fn estimate_pushforward_with(
    p: &[f64],
    q: &[Complex64],
    m: usize,
    n: usize,
    samples: &SampleSet,
    rcond: Option<f64>,
) -> Result<PushforwardEstimate> {
    if m > n {
        return Err(Error::Invalid("m must not exceed n".into()));
    }
    if let Some(z) = samples.z.iter().find(|z| z.len() != p.len()) {
        return Err(Error::Dimension { expected: p.len(), found: z.len() });
    }
    if let Some(w) = samples.w.iter().find(|w| w.len() != q.len()) {
        return Err(Error::Dimension { expected: q.len(), found: w.len() });
    }
    let basis_u = FockBasis::real(p, n);
    let basis_v = FockBasis::new(q, m);
    let u = feature_matrix(&basis_u, &samples.z);
    let v = feature_matrix(&basis_v, &samples.w);
    let r_n = basis_u.len();
    let r_m = basis_u.table().count_through(m);
    let rcond = rcond.unwrap_or_else(|| default_rcond(samples.len(), r_n));
    let sol = pinv_solve(&u, &v, rcond)?;
    if sol.rank < r_m {
        return Err(Error::IllPosed { rank: sol.rank, required: r_m, singular_values: sol.singular_values });
    }
    let c_hat = sol.x.rows(0, r_m).adjoint();
    let largest_sv = sol.singular_values.first().copied().unwrap_or(0.0);
    let smallest_kept_sv = sol.singular_values[sol.rank - 1];
    Ok(PushforwardEstimate {
        c_hat,
        m,
        n,
        pinv_rcond: rcond,
        smallest_kept_sv,
        largest_sv,
        rank: sol.rank,
        singular_values: sol.singular_values,
    })
}

/// `⟨h, u_{p,α}⟩` for every `α` of `table`, with `h` given by its jet at `p`.
///
/// `u_{p,α} = e^{-‖p‖²/2}/√α! Σ_γ C(α,γ) (-p)^{α-γ} z^γ e_p`, and pairing `h`
/// with `z^γ e_p` yields `∂^γ h(p) = γ! h_γ`.
pub(crate) fn pair_with_basis(h: &Jet, p: &[f64], table: &MultiIndexTable) -> Vec<Complex64> {
    let neg_p: Vec<Complex64> = p.iter().map(|&x| Complex64::new(-x, 0.0)).collect();
    let norm_sqr: f64 = p.iter().map(|x| x * x).sum();
    let scale = (-0.5 * norm_sqr).exp();
    let jet_table = h.table();
    table
        .entries()
        .iter()
        .map(|alpha| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (gamma, &coeff) in jet_table.entries().iter().zip(h.coeffs()) {
                if !gamma.le(alpha) {
                    continue;
                }
                let rest = crate::multiindex::MultiIndex(
                    alpha.as_slice().iter().zip(gamma.as_slice()).map(|(a, g)| a - g).collect(),
                );
                let choose: f64 =
                    alpha.as_slice().iter().zip(gamma.as_slice()).map(|(&a, &g)| binomial(a, g)).product();
                acc += coeff * monomial(&neg_p, &rest).conj() * (choose * gamma.factorial());
            }
            acc * scale / alpha.factorial().sqrt()
        })
        .collect()
}

/// Jets at `p` of `v_{q,β} ∘ f` for every `β` of `table`, with `images = f` expanded at `p`.
pub(crate) fn composed_basis_jets(images: &[Jet], table: &MultiIndexTable) -> Vec<Jet> {
    let space = images[0].space().clone();
    let q: Vec<Complex64> = images.iter().map(Jet::value).collect();
    let q_norm_sqr: f64 = q.iter().map(|c| c.norm_sqr()).sum();
    let mut exponent = Jet::zero(&space);
    for (qk, fk) in q.iter().zip(images) {
        exponent = exponent.checked_add(&fk.scale(qk.conj())).expect("same space");
    }
    let carrier = exponent.exp().scale(Complex64::new((-0.5 * q_norm_sqr).exp(), 0.0));
    let shifted: Vec<Jet> = images.iter().zip(&q).map(|(f, qk)| f.add_constant(-qk)).collect();
    table
        .entries()
        .iter()
        .map(|beta| {
            let mut h = carrier.clone();
            for (k, &b) in beta.as_slice().iter().enumerate() {
                if b > 0 {
                    h = h.checked_mul(&shifted[k].powi(b)).expect("same space");
                }
            }
            h.scale(Complex64::new(1.0 / beta.factorial().sqrt(), 0.0))
        })
        .collect()
}

fn matrix_from_jets(hs: &[Jet], p: &[f64], table_e: &MultiIndexTable) -> CMatrix {
    let mut c = CMatrix::zeros(hs.len(), table_e.len());
    for (j, h) in hs.iter().enumerate() {
        for (i, value) in pair_with_basis(h, p, table_e).into_iter().enumerate() {
            c[(j, i)] = value.conj();
        }
    }
    c
}

/// The representation matrix `C_m` of `f_*` on jets of order `m` at `p`.
pub fn oracle_pushforward(f: &MapExpr, p: &[f64], m: usize) -> Result<OraclePushforward> {
    let space = JetSpace::new(f.input_dim(), m.max(1));
    let images = f.jets_in(p, &space)?;
    if images.is_empty() {
        return Err(Error::Invalid("map has no components".into()));
    }
    let mut jacobian = CMatrix::zeros(f.output_dim(), f.input_dim());
    for (k, jet) in images.iter().enumerate() {
        for i in 0..f.input_dim() {
            jacobian[(k, i)] = jet.coeffs()[i + 1];
        }
    }
    let space = JetSpace::new(f.input_dim(), m);
    let images = f.jets_in(p, &space)?;
    let table_f = crate::multiindex::graded_numbering(f.output_dim(), m);
    let hs = composed_basis_jets(&images, &table_f);
    Ok(OraclePushforward { c: matrix_from_jets(&hs, p, space.table()), jacobian })
}

/// The representation matrix `A_m` of `h ↦ Σ V_k ∂_k h` dual to the flow of `V`,
/// for a vector field with `V(p) = 0`.
pub fn oracle_generator(field: &MapExpr, p: &[f64], m: usize) -> Result<CMatrix> {
    let d = field.input_dim();
    if field.output_dim() != d {
        return Err(Error::Dimension { expected: d, found: field.output_dim() });
    }
    let space = JetSpace::new(d, m);
    let upper = JetSpace::new(d, m + 1);
    let identity: Vec<Jet> =
        p.iter().enumerate().map(|(k, &pk)| Jet::variable(&upper, k, Complex64::new(pk, 0.0))).collect();
    let table = crate::multiindex::graded_numbering(d, m);
    let basis_jets = composed_basis_jets(&identity, &table);
    let field_jets = field.jets_in(p, &space)?;
    let mut hs = Vec::with_capacity(basis_jets.len());
    for v in &basis_jets {
        let mut acc = Jet::zero(&space);
        for (k, vk) in field_jets.iter().enumerate() {
            acc = acc.checked_add(&vk.checked_mul(&v.derivative(k, &space)?)?)?;
        }
        hs.push(acc);
    }
    Ok(matrix_from_jets(&hs, p, space.table()))
}

/// `‖I - D_μ^{-1/2} D̂ D_μ^{-1/2}‖_op`.
pub fn gamma_check(d_mu: &DMatrix<f64>, d_hat: &DMatrix<f64>) -> Result<f64> {
    if d_mu.shape() != d_hat.shape() {
        return Err(Error::Dimension { expected: d_mu.nrows(), found: d_hat.nrows() });
    }
    let s = spd_inverse_sqrt(d_mu)?;
    let residual = DMatrix::identity(d_mu.nrows(), d_mu.nrows()) - &s * d_hat * &s;
    Ok(symmetric_spectral_radius(&residual))
}

/// `√(m!/γ) · R^n / √Λ_n`, the error rate without its constant.
pub fn theorem_rate(m: usize, n: usize, r_mu: f64, lambda_n: f64, gamma: f64) -> f64 {
    (factorial(m as u32) / gamma).sqrt() * r_mu.powi(n as i32) / lambda_n.sqrt()
}

/// Convenience: evaluate `f` at `p` to obtain `q`.
pub fn base_image(f: &MapExpr, p: &[f64]) -> Result<Vec<Complex64>> {
    f.eval(&real_point(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::parse_map;
    use alloc::vec;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn grid(count: usize, half: f64) -> Vec<Vec<f64>> {
        (0..count).map(|i| vec![-half + 2.0 * half * i as f64 / (count - 1) as f64]).collect()
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_estimate() {
        let f = parse_map("z1", 1, 1).unwrap();
        let samples = SampleSet::from_map(&f, &grid(10, 0.5)).unwrap();
        let est = estimate_pushforward(&[0.0], &[c(0.0)], 2, 2, &samples).unwrap();
        assert!(max_diff(&est.c_hat, &CMatrix::identity(3, 3)) < 1e-9);
        assert!(est.smallest_kept_sv > est.pinv_rcond * est.largest_sv);
        assert!(est.full_rank());
    }

    #[test]
    fn linear_estimate() {
        let f = parse_map("0.5*z1", 1, 1).unwrap();
        let samples = SampleSet::from_map(&f, &grid(200, 0.5)).unwrap();
        let est = estimate_pushforward(&[0.0], &[c(0.0)], 3, 3, &samples).unwrap();
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.5), c(0.25), c(0.125)]));
        assert!(max_diff(&est.c_hat, &expected) < 1e-6);
    }

    #[test]
    fn duplicated_points_are_ill_posed() {
        let f = parse_map("z1", 1, 1).unwrap();
        let samples = SampleSet::from_map(&f, &[vec![0.1], vec![0.1], vec![0.1]]).unwrap();
        let err = estimate_pushforward(&[0.0], &[c(0.0)], 2, 3, &samples).unwrap_err();
        assert!(matches!(err, Error::IllPosed { rank: 1, required: 3, .. }));
    }

    #[test]
    fn oracle_examples() {
        let id = parse_map("z1; z2", 2, 2).unwrap();
        let o = oracle_pushforward(&id, &[0.3, -0.2], 3).unwrap();
        assert!(max_diff(&o.c, &CMatrix::identity(10, 10)) < 1e-12);

        let f = parse_map("-0.7*z1", 1, 1).unwrap();
        let o = oracle_pushforward(&f, &[0.0], 3).unwrap();
        let expected =
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-0.7), c(0.49), c(-0.343)]));
        assert!(max_diff(&o.c, &expected) < 1e-14);
        assert_eq!(o.jacobian[(0, 0)], c(-0.7));
    }

    #[test]
    fn quadratic_oracle_structure_and_estimate() {
        let f = parse_map("z1 + z1^2", 1, 1).unwrap();
        let o = oracle_pushforward(&f, &[0.0], 2).unwrap();
        for i in 0..3 {
            assert!((o.c[(i, i)] - c(1.0)).norm() < 1e-14);
        }
        // v_1∘f = z + z², whose degree-2 part pairs with u_2 = z²/√2
        assert!((o.c[(1, 2)] - c(2f64.sqrt())).norm() < 1e-14);
        for (j, i) in [(1, 0), (2, 0), (2, 1), (0, 1), (0, 2)] {
            assert!(o.c[(j, i)].norm() < 1e-14);
        }
        let points: Vec<Vec<f64>> = (0..5000).map(|i| vec![-0.5 + (i as f64 + 0.5) / 5000.0]).collect();
        let samples = SampleSet::from_map(&f, &points).unwrap();
        let est = estimate_pushforward(&[0.0], &[c(0.0)], 2, 8, &samples).unwrap();
        assert!(max_diff(&est.c_hat, &o.c) < 1e-4);
    }

    #[test]
    fn nonzero_base_point() {
        let f = parse_map("0.8*z1 + 0.1*z1^2 + 0.3", 1, 1).unwrap();
        let p = [0.2];
        let q = base_image(&f, &p).unwrap();
        let o = oracle_pushforward(&f, &p, 2).unwrap();
        let points: Vec<Vec<f64>> = (0..3000).map(|i| vec![p[0] - 0.4 + 0.8 * (i as f64 + 0.5) / 3000.0]).collect();
        let samples = SampleSet::from_map(&f, &points).unwrap();
        let est = estimate_pushforward(&p, &q, 2, 9, &samples).unwrap();
        assert!(max_diff(&est.c_hat, &o.c) < 1e-4);
    }

    #[test]
    fn gram_identity() {
        let pts: Vec<Vec<f64>> = (0..37).map(|i| vec![(i as f64 * 0.618).fract() - 0.5, (i as f64 * 0.414).fract() - 0.5]).collect();
        let z: Vec<Vec<Complex64>> = pts.iter().map(|p| real_point(p)).collect();
        let basis = FockBasis::real(&[0.0, 0.0], 2);
        let u = feature_matrix(&basis, &z);
        let gram = u.adjoint() * &u / Complex64::new(pts.len() as f64, 0.0);
        let d = crate::hankel::moment_matrix(&crate::hankel::MeasureSpec::Empirical { points: pts }, 2).unwrap();
        for (i, a) in basis.table().entries().iter().enumerate() {
            for (j, b) in basis.table().entries().iter().enumerate() {
                let expected = d[(i, j)] / (a.factorial() * b.factorial()).sqrt();
                assert!((gram[(i, j)] - c(expected)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gamma_examples() {
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]);
        assert!(gamma_check(&d, &d).unwrap() < 1e-14);
        assert!((gamma_check(&d, &(&d * 2.0)).unwrap() - 1.0).abs() < 1e-14);
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0 / 3.0]));
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.25]));
        assert!((gamma_check(&a, &b).unwrap() - 0.25).abs() < 1e-14);
        assert_eq!(gamma_check(&DMatrix::zeros(2, 2), &a).unwrap_err(), Error::NotPositiveDefinite);
    }

    #[test]
    fn rate_examples() {
        assert_eq!(theorem_rate(0, 0, 0.5, 1.0, 1.0), 1.0);
        assert!((theorem_rate(2, 4, 0.5, 0.01, 0.5) - 1.25).abs() < 1e-14);
        assert!(theorem_rate(2, 4, 0.5, 0.01, 0.25) > theorem_rate(2, 4, 0.5, 0.01, 0.5));
    }

    #[test]
    fn generator_oracle_of_linear_field() {
        let v = parse_map("-z1", 1, 1).unwrap();
        let a = oracle_generator(&v, &[0.0], 3).unwrap();
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0), c(-1.0), c(-2.0), c(-3.0)]));
        assert!(max_diff(&a, &expected) < 1e-14);
    }
}
