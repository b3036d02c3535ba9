//! Normalized jet bases of the Fock space, feature matrices and domain geometry.
//!
//! For a centre `p` the basis functions are
//! `u_{p,α}(z) = e^{-‖p‖²/2} (z - p)^α e^{p* z} / √α!`, an orthonormal
//! system for the Gaussian weight `π^{-d} e^{-‖z‖²}`. The inner product is
//! linear in the first slot: `⟨z, w⟩ = Σ z_k conj(w_k)`, hence `p* z = Σ conj(p_k) z_k`.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // unused when std float methods are linked in
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hankel::MeasureSpec;
use crate::jets::monomial;
use crate::multiindex::{graded_numbering, MultiIndex, MultiIndexTable};

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `p* z`.
fn pairing(p: &[Complex64], z: &[Complex64]) -> Complex64 {
    p.iter().zip(z).map(|(a, b)| a.conj() * b).sum()
}

pub fn real_point(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

pub fn basis_u(p: &[Complex64], alpha: &MultiIndex, z: &[Complex64]) -> Complex64 {
    let delta: Vec<Complex64> = z.iter().zip(p).map(|(a, b)| a - b).collect();
    let scale = (-0.5 * norm_sqr(p)).exp() / alpha.factorial().sqrt();
    monomial(&delta, alpha) * pairing(p, z).exp() * scale
}

/// The target-side basis `v_{q,β}`; same formula with centre `q`.
pub fn basis_v(q: &[Complex64], beta: &MultiIndex, w: &[Complex64]) -> Complex64 {
    basis_u(q, beta, w)
}

/// The first `r_n` basis functions about a fixed centre.
#[derive(Debug, Clone)]
pub struct FockBasis {
    center: Vec<Complex64>,
    table: MultiIndexTable,
}

impl FockBasis {
    pub fn new(center: &[Complex64], order: usize) -> Self {
        FockBasis { center: center.to_vec(), table: graded_numbering(center.len(), order) }
    }

    pub fn real(center: &[f64], order: usize) -> Self {
        FockBasis::new(&real_point(center), order)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn table(&self) -> &MultiIndexTable {
        &self.table
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    /// `(u_1(z), …, u_{r_n}(z))`.
    pub fn row(&self, z: &[Complex64]) -> Vec<Complex64> {
        let delta: Vec<Complex64> = z.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let common = pairing(&self.center, z).exp() * (-0.5 * norm_sqr(&self.center)).exp();
        self.table
            .entries()
            .iter()
            .map(|alpha| monomial(&delta, alpha) * common / alpha.factorial().sqrt())
            .collect()
    }

    /// `∂_{z_i} u_α(0)` for every `α` in the table.
    pub fn gradient_at_zero(&self, i: usize) -> Vec<Complex64> {
        let neg_p: Vec<Complex64> = self.center.iter().map(|c| -c.conj()).collect();
        let scale = (-0.5 * norm_sqr(&self.center)).exp();
        let pi_conj = self.center[i].conj();
        self.table
            .entries()
            .iter()
            .map(|alpha| {
                let mut value = pi_conj * monomial(&neg_p, alpha);
                let ai = alpha.as_slice()[i];
                if ai > 0 {
                    let mut lowered = alpha.clone();
                    lowered.0[i] -= 1;
                    value += Complex64::new(f64::from(ai), 0.0) * monomial(&neg_p, &lowered);
                }
                value * scale / alpha.factorial().sqrt()
            })
            .collect()
    }
}

/// `U_{p,n,Z}`: row `i` holds the basis evaluated at `Z[i]`.
pub fn feature_matrix(basis: &FockBasis, points: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(points.len(), basis.len());
    for (i, z) in points.iter().enumerate() {
        for (j, v) in basis.row(z).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

pub fn feature_matrix_u(p: &[Complex64], n: usize, points: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    feature_matrix(&FockBasis::new(p, n), points)
}

pub fn feature_matrix_v(q: &[Complex64], m: usize, images: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    feature_matrix(&FockBasis::new(q, m), images)
}

/// `Σ_{|α| > n} |u_{p,α}(w)|²`, the squared distance from `e_w` to its
/// projection onto the first `r_n` basis functions.
///
/// Since `Σ_{|α| ≤ n} Π s_i^{α_i}/α_i! = Σ_{k ≤ n} S^k/k!` with
/// `s_i = |w_i - p_i|²` and `S = Σ s_i`, the tail is
/// `e^{2Re(p* w) - ‖p‖²} Σ_{k > n} S^k/k!`, summed directly.
pub fn projection_tail_sq(p: &[Complex64], n: usize, w: &[Complex64]) -> f64 {
    let s: f64 = w.iter().zip(p).map(|(a, b)| (a - b).norm_sqr()).sum();
    let prefactor = (2.0 * pairing(p, w).re - norm_sqr(p)).exp();
    let mut term = 1.0;
    for k in 1..=n + 1 {
        term *= s / k as f64;
    }
    let mut tail = 0.0;
    let mut k = n + 1;
    while term > 0.0 {
        tail += term;
        k += 1;
        term *= s / k as f64;
        if (k as f64) > s && term <= f64::EPSILON * 1e-3 * tail {
            break;
        }
    }
    prefactor * tail
}

pub fn basis_gradient_at_zero(q: &[Complex64], m: usize, i: usize) -> Vec<Complex64> {
    FockBasis::new(q, m).gradient_at_zero(i)
}

/// Shape of `K₀`, the absolutely convex neighbourhood of the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Box { radii: Vec<f64> },
    Ball { radius: f64 },
}

/// `K = p + K₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub center: Vec<f64>,
    pub geometry: Geometry,
}

impl DomainSpec {
    pub fn new_box(center: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        if radii.len() != center.len() {
            return Err(Error::Dimension { expected: center.len(), found: radii.len() });
        }
        if radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Invalid("radii must be positive".into()));
        }
        Ok(DomainSpec { center, geometry: Geometry::Box { radii } })
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Invalid("radius must be positive".into()));
        }
        Ok(DomainSpec { center, geometry: Geometry::Ball { radius } })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `|z|_{K₀}` for an offset `z`.
    pub fn minkowski(&self, z: &[Complex64]) -> f64 {
        match &self.geometry {
            Geometry::Box { radii } => z.iter().zip(radii).map(|(zi, r)| zi.norm() / r).fold(0.0, f64::max),
            Geometry::Ball { radius } => norm_sqr(z).sqrt() / radius,
        }
    }

    /// Gauge of a real box `Π [c_i - ρ_i, c_i + ρ_i]`, attained at a corner.
    fn gauge_of_box(&self, center: &[f64], radii: &[f64]) -> f64 {
        let far: Vec<f64> = center.iter().zip(radii).map(|(c, r)| c.abs() + r).collect();
        match &self.geometry {
            Geometry::Box { radii: k } => far.iter().zip(k).map(|(f, r)| f / r).fold(0.0, f64::max),
            Geometry::Ball { radius } => far.iter().map(|f| f * f).sum::<f64>().sqrt() / radius,
        }
    }

    fn gauge_of_ball(&self, center: &[f64], rho: f64) -> f64 {
        match &self.geometry {
            Geometry::Box { radii } => {
                center.iter().zip(radii).map(|(c, r)| (c.abs() + rho) / r).fold(0.0, f64::max)
            }
            Geometry::Ball { radius } => (center.iter().map(|c| c * c).sum::<f64>().sqrt() + rho) / radius,
        }
    }
}

pub fn minkowski(domain: &DomainSpec, z: &[Complex64]) -> f64 {
    domain.minkowski(z)
}

/// `(R_μ, L_μ)` for a measure given in offset coordinates (support inside `K₀`).
pub fn measure_radii(measure: &MeasureSpec, domain: &DomainSpec) -> Result<(f64, f64)> {
    let (r_mu, sup_coord) = match measure {
        MeasureSpec::Empirical { points } => {
            let r = points.iter().map(|x| domain.minkowski(&real_point(x))).fold(0.0, f64::max);
            let l = points.iter().flat_map(|x| x.iter().map(|v| v.abs())).fold(0.0, f64::max);
            (r, l)
        }
        MeasureSpec::UniformBox { center, radii, .. } => {
            let l = center.iter().zip(radii).map(|(c, r)| c.abs() + r).fold(0.0, f64::max);
            (domain.gauge_of_box(center, radii), l)
        }
        MeasureSpec::UniformBall { center, radius } => {
            let l = center.iter().map(|c| c.abs() + radius).fold(0.0, f64::max);
            (domain.gauge_of_ball(center, *radius), l)
        }
    };
    if r_mu > 1.0 + 1e-12 {
        return Err(Error::OutsideSupport);
    }
    Ok((r_mu, sup_coord.max(1.0)))
}

/// Samples `Z` and their images `W = f(Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub z: Vec<Vec<Complex64>>,
    pub w: Vec<Vec<Complex64>>,
    pub provenance: Provenance,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Iid,
    Grid,
    LowDiscrepancy,
    Given,
}

impl SampleSet {
    pub fn new(z: Vec<Vec<Complex64>>, w: Vec<Vec<Complex64>>) -> Result<Self> {
        if z.len() != w.len() {
            return Err(Error::Dimension { expected: z.len(), found: w.len() });
        }
        if z.is_empty() {
            return Err(Error::Invalid("sample set is empty".into()));
        }
        Ok(SampleSet { z, w, provenance: Provenance::Given, seed: 0 })
    }

    /// Applies `f` to real points.
    pub fn from_map(f: &crate::maps::MapExpr, points: &[Vec<f64>]) -> Result<Self> {
        let z: Vec<Vec<Complex64>> = points.iter().map(|x| real_point(x)).collect();
        let w = z.iter().map(|zi| f.eval(zi)).collect::<Result<Vec<_>>>()?;
        SampleSet::new(z, w)
    }

    pub fn with_provenance(mut self, provenance: Provenance, seed: u64) -> Self {
        self.provenance = provenance;
        self.seed = seed;
        self
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}
