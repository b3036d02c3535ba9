//! Truncated multivariate power series with complex coefficients.
//!
//! A [`Jet`] stores the coefficient of `(z - p)^α` for every `α` in a graded
//! [`MultiIndexTable`]. Products are truncated at the table's maximal degree,
//! so discarded degrees never feed back into retained ones.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multiindex::{graded_numbering, MultiIndex, MultiIndexTable};

/// A multi-index table together with its multiplication map.
#[derive(Debug)]
pub struct JetSpace {
    table: MultiIndexTable,
    triples: Vec<(usize, usize, usize)>,
}

impl JetSpace {
    pub fn new(d: usize, order: usize) -> Arc<Self> {
        let table = graded_numbering(d, order);
        let triples = table.product_triples();
        Arc::new(JetSpace { table, triples })
    }

    pub fn table(&self) -> &MultiIndexTable {
        &self.table
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn order(&self) -> usize {
        self.table.max_degree()
    }

    fn same(&self, other: &JetSpace) -> bool {
        core::ptr::eq(self, other)
            || (self.table.dim() == other.table.dim()
                && self.table.max_degree() == other.table.max_degree())
    }
}

#[derive(Debug, Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.space.same(&other.space) && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zero(space: &Arc<JetSpace>) -> Self {
        Jet { space: space.clone(), coeffs: alloc::vec![Complex64::new(0.0, 0.0); space.table.len()] }
    }

    pub fn constant(space: &Arc<JetSpace>, c: Complex64) -> Self {
        let mut j = Jet::zero(space);
        j.coeffs[0] = c;
        j
    }

    /// The coordinate function `z_k` expanded about a point whose `k`-th
    /// coordinate is `center`.
    pub fn variable(space: &Arc<JetSpace>, k: usize, center: Complex64) -> Self {
        let mut j = Jet::constant(space, center);
        if space.order() >= 1 {
            j.coeffs[k + 1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn from_coeffs(space: &Arc<JetSpace>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != space.table.len() {
            return Err(Error::Dimension { expected: space.table.len(), found: coeffs.len() });
        }
        Ok(Jet { space: space.clone(), coeffs })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn table(&self) -> &MultiIndexTable {
        &self.space.table
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Option<Complex64> {
        self.space.table.position(alpha).map(|i| self.coeffs[i])
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    fn check(&self, other: &Jet) -> Result<()> {
        if self.space.same(&other.space) {
            Ok(())
        } else {
            Err(Error::TableMismatch)
        }
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Jet { space: self.space.clone(), coeffs })
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Jet { space: self.space.clone(), coeffs })
    }

    pub fn neg(&self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet { space: self.space.clone(), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_constant(&self, c: Complex64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Cauchy product truncated at the table's maximal degree.
    pub fn checked_mul(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        let mut coeffs = alloc::vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for &(i, j, k) in &self.space.triples {
            coeffs[k] += self.coeffs[i] * other.coeffs[j];
        }
        Ok(Jet { space: self.space.clone(), coeffs })
    }

    /// `self - self(p)`, nilpotent of index `order + 1`.
    fn nonconstant_part(&self) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = Complex64::new(0.0, 0.0);
        h
    }

    /// `e^{a₀} Σ_{k ≤ n} (a - a₀)^k / k!`.
    pub fn exp(&self) -> Jet {
        let h = self.nonconstant_part();
        let mut term = Jet::constant(&self.space, Complex64::new(1.0, 0.0));
        let mut sum = term.clone();
        for k in 1..=self.space.order() {
            term = term.checked_mul(&h).expect("same space").scale(Complex64::new(1.0 / k as f64, 0.0));
            sum = sum.checked_add(&term).expect("same space");
        }
        sum.scale(self.coeffs[0].exp())
    }

    /// `1 / a` as a geometric series in `(a - a₀)/a₀`.
    pub fn recip(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0 == Complex64::new(0.0, 0.0) {
            return Err(Error::DivisionByZero);
        }
        let ratio = self.nonconstant_part().scale(-a0.inv());
        let mut term = Jet::constant(&self.space, Complex64::new(1.0, 0.0));
        let mut sum = term.clone();
        for _ in 1..=self.space.order() {
            term = term.checked_mul(&ratio)?;
            sum = sum.checked_add(&term)?;
        }
        Ok(sum.scale(a0.inv()))
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        self.checked_mul(&other.recip()?)
    }

    pub fn sin(&self) -> Jet {
        let i = Complex64::new(0.0, 1.0);
        let plus = self.scale(i).exp();
        let minus = self.scale(-i).exp();
        plus.checked_sub(&minus).expect("same space").scale(Complex64::new(0.0, -0.5))
    }

    pub fn cos(&self) -> Jet {
        let i = Complex64::new(0.0, 1.0);
        let plus = self.scale(i).exp();
        let minus = self.scale(-i).exp();
        plus.checked_add(&minus).expect("same space").scale(Complex64::new(0.5, 0.0))
    }

    /// `a^k` by repeated squaring; `a^0 = 1`.
    pub fn powi(&self, mut k: u32) -> Jet {
        let mut result = Jet::constant(&self.space, Complex64::new(1.0, 0.0));
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.checked_mul(&base).expect("same space");
            }
            k >>= 1;
            if k > 0 {
                base = base.checked_mul(&base).expect("same space");
            }
        }
        result
    }

    /// Evaluates the truncated series at `z`, expanded about `p`.
    /// `∂h/∂z_k` re-expanded in `target`, whose order should not exceed `self.order() - 1`.
    pub fn derivative(&self, k: usize, target: &Arc<JetSpace>) -> Result<Jet> {
        if target.dim() != self.space.dim() {
            return Err(Error::TableMismatch);
        }
        let coeffs = target
            .table
            .entries()
            .iter()
            .map(|alpha| {
                let raised = alpha.add(&MultiIndex::unit(alpha.dim(), k));
                let factor = f64::from(raised.as_slice()[k]);
                self.coeff(&raised).map_or(Complex64::new(0.0, 0.0), |c| c * factor)
            })
            .collect();
        Ok(Jet { space: target.clone(), coeffs })
    }

    pub fn eval(&self, p: &[Complex64], z: &[Complex64]) -> Complex64 {
        let delta: Vec<Complex64> = z.iter().zip(p).map(|(a, b)| a - b).collect();
        self.space
            .table
            .entries()
            .iter()
            .zip(&self.coeffs)
            .map(|(alpha, c)| c * monomial(&delta, alpha))
            .sum()
    }
}

/// `z^α`.
pub fn monomial(z: &[Complex64], alpha: &MultiIndex) -> Complex64 {
    z.iter().zip(alpha.as_slice()).fold(Complex64::new(1.0, 0.0), |acc, (zi, &a)| acc * zi.powu(a))
}

pub fn jet_add(a: &Jet, b: &Jet) -> Result<Jet> {
    a.checked_add(b)
}

pub fn jet_mul(a: &Jet, b: &Jet) -> Result<Jet> {
    a.checked_mul(b)
}

pub fn jet_exp(a: &Jet) -> Jet {
    a.exp()
}

pub fn jet_int_pow(a: &Jet, k: u32) -> Jet {
    a.powi(k)
}
