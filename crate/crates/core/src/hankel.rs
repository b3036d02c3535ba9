//! Moment matrices `D_n(μ)` over graded monomials, their smallest eigenvalues
//! in extended precision, and the decay and sample-size formulas built on them.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::multiindex::{graded_numbering, jet_dimension, MultiIndex, MultiIndexTable};
use crate::softfloat::SoftFloat;

/// A measure on `ℝ^d` whose moments are available.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    /// Equal weights `1/N` on the given points.
    Empirical { points: Vec<Vec<f64>> },
    /// Uniform on `Π [c_i - r_i, c_i + r_i]`: the probability measure when
    /// `normalized`, otherwise Lebesgue measure restricted to the box.
    UniformBox { center: Vec<f64>, radii: Vec<f64>, normalized: bool },
    /// The uniform probability measure on a Euclidean ball.
    UniformBall { center: Vec<f64>, radius: f64 },
}

impl MeasureSpec {
    pub fn uniform_box(center: Vec<f64>, radii: Vec<f64>) -> Self {
        MeasureSpec::UniformBox { center, radii, normalized: true }
    }

    pub fn lebesgue_box(center: Vec<f64>, radii: Vec<f64>) -> Self {
        MeasureSpec::UniformBox { center, radii, normalized: false }
    }

    pub fn dim(&self) -> usize {
        match self {
            MeasureSpec::Empirical { points } => points.first().map_or(0, Vec::len),
            MeasureSpec::UniformBox { center, .. } | MeasureSpec::UniformBall { center, .. } => center.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MeasureSpec::Empirical { points } => {
                let d = self.dim();
                if points.is_empty() || d == 0 {
                    return Err(Error::Invalid("empirical measure needs at least one point".into()));
                }
                if let Some(p) = points.iter().find(|p| p.len() != d) {
                    return Err(Error::Dimension { expected: d, found: p.len() });
                }
                if points.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::Invalid("non-finite sample point".into()));
                }
            }
            MeasureSpec::UniformBox { center, radii, .. } => {
                if center.is_empty() {
                    return Err(Error::Invalid("dimension must be positive".into()));
                }
                if radii.len() != center.len() {
                    return Err(Error::Dimension { expected: center.len(), found: radii.len() });
                }
                if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Invalid("box needs finite centre and positive radii".into()));
                }
            }
            MeasureSpec::UniformBall { center, radius } => {
                if center.is_empty() {
                    return Err(Error::Invalid("dimension must be positive".into()));
                }
                if !(*radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Invalid("ball needs finite centre and positive radius".into()));
                }
            }
        }
        Ok(())
    }
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn rational_pow(x: &BigRational, k: u32) -> BigRational {
    num_traits::pow(x.clone(), k as usize)
}

fn rational_binomial(n: u32, k: u32) -> BigRational {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    BigRational::from_integer(acc)
}

/// `∫ t^k dt` over `[c - r, c + r]`.
fn interval_moment(c: &BigRational, r: &BigRational, k: u32) -> BigRational {
    let hi = rational_pow(&(c + r), k + 1);
    let lo = rational_pow(&(c - r), k + 1);
    (hi - lo) / BigRational::from_integer(BigInt::from(k + 1))
}

/// Mean of `y^γ` over the unit ball in `ℝ^d`:
/// `Π (2k_i - 1)!!/2^{k_i} / Π_{j=1}^{K} (d/2 + j)` when `γ = 2k`, else `0`.
fn unit_ball_moment(gamma: &[u32]) -> BigRational {
    if gamma.iter().any(|g| g % 2 == 1) {
        return BigRational::zero();
    }
    let d = gamma.len() as i64;
    let mut acc = BigRational::one();
    let mut total = 0;
    for &g in gamma {
        let k = g / 2;
        total += k;
        for i in 1..=k {
            acc *= BigRational::new(BigInt::from(2 * i - 1), BigInt::from(2));
        }
    }
    for j in 1..=i64::from(total) {
        acc /= BigRational::new(BigInt::from(d + 2 * j), BigInt::from(2));
    }
    acc
}

fn sub_indices(alpha: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::zero(alpha.dim())];
    for (k, &a) in alpha.as_slice().iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * (a as usize + 1));
        for g in &out {
            for v in 0..=a {
                let mut h = g.clone();
                h.0[k] = v;
                next.push(h);
            }
        }
        out = next;
    }
    out
}

/// Sum of dyadic numbers `m · 2^e` without rounding.
struct DyadicSum {
    mantissa: BigInt,
    exponent: i64,
}

impl DyadicSum {
    fn new() -> Self {
        DyadicSum { mantissa: BigInt::zero(), exponent: 0 }
    }

    fn add(&mut self, mantissa: BigInt, exponent: i64) {
        if mantissa.is_zero() {
            return;
        }
        if self.mantissa.is_zero() {
            self.mantissa = mantissa;
            self.exponent = exponent;
        } else if exponent >= self.exponent {
            self.mantissa += mantissa << (exponent - self.exponent) as usize;
        } else {
            self.mantissa = (&self.mantissa << (self.exponent - exponent) as usize) + mantissa;
            self.exponent = exponent;
        }
    }

    fn to_rational(&self) -> BigRational {
        let two = BigInt::from(2);
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa * num_traits::pow(two, self.exponent as usize))
        } else {
            BigRational::new(self.mantissa.clone(), num_traits::pow(two, (-self.exponent) as usize))
        }
    }
}

fn dyadic(x: f64) -> (BigInt, i64) {
    let (m, e, s) = Float::integer_decode(x);
    (BigInt::from(m) * BigInt::from(s), i64::from(e))
}

/// Exact moments `∫ x^α dμ` for every `α` of `table`.
pub fn exact_moments(measure: &MeasureSpec, table: &MultiIndexTable) -> Result<Vec<BigRational>> {
    measure.validate()?;
    if table.dim() != measure.dim() {
        return Err(Error::Dimension { expected: measure.dim(), found: table.dim() });
    }
    let moments = match measure {
        MeasureSpec::Empirical { points } => {
            let coords: Vec<Vec<(BigInt, i64)>> =
                points.iter().map(|p| p.iter().map(|&x| dyadic(x)).collect()).collect();
            let count = BigRational::from_integer(BigInt::from(points.len()));
            table
                .entries()
                .iter()
                .map(|alpha| {
                    let mut sum = DyadicSum::new();
                    for point in &coords {
                        let mut m = BigInt::one();
                        let mut e = 0i64;
                        for ((pm, pe), &a) in point.iter().zip(alpha.as_slice()) {
                            m *= num_traits::pow(pm.clone(), a as usize);
                            e += pe * i64::from(a);
                        }
                        sum.add(m, e);
                    }
                    sum.to_rational() / &count
                })
                .collect()
        }
        MeasureSpec::UniformBox { center, radii, normalized } => {
            let c: Vec<BigRational> = center.iter().map(|&x| rational(x)).collect();
            let r: Vec<BigRational> = radii.iter().map(|&x| rational(x)).collect();
            let max = 2 * table.max_degree() as u32 + 1;
            let per_axis: Vec<Vec<BigRational>> = c
                .iter()
                .zip(&r)
                .map(|(ci, ri)| {
                    let width = ri * BigRational::from_integer(BigInt::from(2));
                    (0..=max)
                        .map(|k| {
                            let m = interval_moment(ci, ri, k);
                            if *normalized {
                                m / &width
                            } else {
                                m
                            }
                        })
                        .collect()
                })
                .collect();
            table
                .entries()
                .iter()
                .map(|alpha| {
                    alpha.as_slice().iter().zip(&per_axis).map(|(&a, axis)| axis[a as usize].clone()).product()
                })
                .collect()
        }
        MeasureSpec::UniformBall { center, radius } => {
            let c: Vec<BigRational> = center.iter().map(|&x| rational(x)).collect();
            let rad = rational(*radius);
            table
                .entries()
                .iter()
                .map(|alpha| {
                    let mut total = BigRational::zero();
                    for gamma in sub_indices(alpha) {
                        let base = unit_ball_moment(gamma.as_slice());
                        if base.is_zero() {
                            continue;
                        }
                        let mut term = base * rational_pow(&rad, gamma.degree());
                        for ((ci, &a), &g) in c.iter().zip(alpha.as_slice()).zip(gamma.as_slice()) {
                            term *= rational_binomial(a, g) * rational_pow(ci, a - g);
                        }
                        total += term;
                    }
                    total
                })
                .collect()
        }
    };
    Ok(moments)
}

/// A dense symmetric matrix of exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    size: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut entries = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                entries.push(f(i, j));
            }
        }
        RationalMatrix { size, entries }
    }

    /// Exact conversion of a double matrix.
    pub fn from_f64(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension { expected: m.nrows(), found: m.ncols() });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("non-finite matrix entry".into()));
        }
        Ok(RationalMatrix::from_fn(m.nrows(), |i, j| rational(m[(i, j)])))
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.size + j]
    }

    pub fn leading(&self, k: usize) -> RationalMatrix {
        RationalMatrix::from_fn(k, |i, j| self.get(i, j).clone())
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| self.get(i, j).to_f64().unwrap_or(f64::NAN))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

fn assemble(moments: &[BigRational], moment_table: &MultiIndexTable, n: usize) -> RationalMatrix {
    let block = moment_table.count_through(n);
    let entries = moment_table.entries();
    RationalMatrix::from_fn(block, |i, j| {
        let pos = moment_table.position(&entries[i].add(&entries[j])).expect("degree within 2n");
        moments[pos].clone()
    })
}

/// `D_n(μ)` with exact rational entries.
pub fn moment_matrix_exact(measure: &MeasureSpec, n: usize) -> Result<RationalMatrix> {
    jet_dimension(measure.dim().max(1), 2 * n)?;
    let table = graded_numbering(measure.dim().max(1), 2 * n);
    let moments = exact_moments(measure, &table)?;
    Ok(assemble(&moments, &table, n))
}

/// `D_n(μ)` in double precision. Empirical moments are plain averages;
/// box and ball moments are rounded from their exact values.
pub fn moment_matrix(measure: &MeasureSpec, n: usize) -> Result<DMatrix<f64>> {
    match measure {
        MeasureSpec::Empirical { points } => {
            measure.validate()?;
            let d = measure.dim();
            jet_dimension(d, 2 * n)?;
            let table = graded_numbering(d, 2 * n);
            let mut moments = vec![0.0; table.len()];
            for point in points {
                for (slot, alpha) in moments.iter_mut().zip(table.entries()) {
                    *slot +=
                        point.iter().zip(alpha.as_slice()).map(|(x, &a)| x.powi(a as i32)).product::<f64>();
                }
            }
            let inv = 1.0 / points.len() as f64;
            let size = table.count_through(n);
            let entries = table.entries();
            Ok(DMatrix::from_fn(size, size, |i, j| {
                moments[table.position(&entries[i].add(&entries[j])).expect("degree within 2n")] * inv
            }))
        }
        _ => Ok(moment_matrix_exact(measure, n)?.to_f64()),
    }
}

/// Smallest eigenvalue bracketed by inertia bisection.
#[derive(Debug, Clone)]
pub struct HankelSpectrum {
    /// Side length of the matrix.
    pub size: usize,
    /// Midpoint of the final bracket.
    pub lambda: SoftFloat,
    pub lower: SoftFloat,
    pub upper: SoftFloat,
    pub precision_bits: u32,
    /// Set when the bracket reached the requested relative width.
    pub certified: bool,
}

impl HankelSpectrum {
    pub fn value(&self) -> f64 {
        self.lambda.to_f64()
    }

    pub fn ln(&self) -> f64 {
        self.lambda.ln_abs()
    }
}

struct Inertia {
    matrix: Vec<Vec<SoftFloat>>,
    pivot_floor: SoftFloat,
}

impl Inertia {
    fn new(m: &RationalMatrix, bits: u32) -> Self {
        let matrix: Vec<Vec<SoftFloat>> = (0..m.size)
            .map(|i| (0..m.size).map(|j| SoftFloat::from_rational(m.get(i, j), bits)).collect())
            .collect();
        let scale = matrix.iter().flatten().map(SoftFloat::abs).max().unwrap_or_else(|| SoftFloat::zero(bits));
        let scale = if scale.is_zero() { SoftFloat::one(bits) } else { scale };
        let pivot_floor = scale.ldexp(-2 * i64::from(bits));
        Inertia { matrix, pivot_floor }
    }

    /// Number of eigenvalues of `M` below `t`, from the signs of the pivots
    /// of `M - tI` in an unpivoted symmetric elimination. Exactly vanishing
    /// pivots are replaced by a tiny negative value and counted.
    fn count_below(&self, t: &SoftFloat) -> usize {
        let n = self.matrix.len();
        let mut a: Vec<Vec<SoftFloat>> = self.matrix.clone();
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = row[i].sub(t);
        }
        let mut negatives = 0;
        for k in 0..n {
            let mut pivot = a[k][k].clone();
            if pivot.is_zero() {
                pivot = self.pivot_floor.neg();
            }
            if pivot.is_negative() {
                negatives += 1;
            }
            for i in k + 1..n {
                if a[k][i].is_zero() {
                    continue;
                }
                let l = a[k][i].div(&pivot);
                let (upper, lower) = a.split_at_mut(i);
                for (target, source) in lower[0][i..].iter_mut().zip(&upper[k][i..]) {
                    if !source.is_zero() {
                        *target = target.sub(&l.mul(source));
                    }
                }
            }
        }
        negatives
    }
}

/// Smallest eigenvalue of a symmetric double matrix (entries taken exactly).
pub fn smallest_eigenvalue(d: &DMatrix<f64>, precision_bits: u32) -> Result<HankelSpectrum> {
    smallest_eigenvalue_exact(&RationalMatrix::from_f64(d)?, precision_bits)
}

/// Smallest eigenvalue of an exact symmetric matrix, bracketed to relative
/// width `2^{-bits/4}` using software floats with `bits` mantissa bits.
pub fn smallest_eigenvalue_exact(d: &RationalMatrix, precision_bits: u32) -> Result<HankelSpectrum> {
    if d.size == 0 {
        return Err(Error::Invalid("empty matrix".into()));
    }
    if !d.is_symmetric() {
        return Err(Error::Invalid("matrix is not symmetric".into()));
    }
    if precision_bits < 24 {
        return Err(Error::Invalid("precision must be at least 24 bits".into()));
    }
    let bits = precision_bits;
    let inertia = Inertia::new(d, bits);
    let zero = SoftFloat::zero(bits);
    let scale = inertia.pivot_floor.ldexp(2 * i64::from(bits));
    let abs_floor = scale.mul_f64(d.size as f64).ldexp(-(i64::from(bits) - 8));
    let rel = -(i64::from(bits) / 4);

    // upper end: the smallest diagonal entry, nudged until it lies above λ_min
    let mut hi = (0..d.size).map(|i| inertia.matrix[i][i].clone()).min().expect("nonempty");
    let mut nudge = hi.abs().ldexp(-(i64::from(bits) / 2)).add(&abs_floor);
    while inertia.count_below(&hi) == 0 {
        hi = hi.add(&nudge);
        nudge = nudge.ldexp(1);
    }
    let lo;
    if inertia.count_below(&zero) == 0 {
        // positive definite: halve down to a ratio-two bracket
        let mut t = hi.clone();
        let mut steps = 0;
        loop {
            let half = t.ldexp(-1);
            if inertia.count_below(&half) == 0 {
                lo = half;
                hi = t;
                break;
            }
            t = half;
            steps += 1;
            if steps > 64 * i64::from(bits) {
                return Err(Error::NeedsMorePrecision { bits });
            }
        }
    } else {
        let mut gersh = hi.clone();
        for i in 0..d.size {
            let mut radius = SoftFloat::zero(bits);
            for j in 0..d.size {
                if i != j {
                    radius = radius.add(&inertia.matrix[i][j].abs());
                }
            }
            let bound = inertia.matrix[i][i].sub(&radius);
            if bound < gersh {
                gersh = bound;
            }
        }
        lo = gersh.sub(&scale).sub(&SoftFloat::one(bits));
        if hi > zero {
            hi = zero.clone();
        }
    }
    let mut lo = lo;
    let mut certified = false;
    for _ in 0..(8 * bits + 256) {
        let width = hi.sub(&lo);
        let magnitude = if lo.abs() > hi.abs() { lo.abs() } else { hi.abs() };
        if width <= magnitude.ldexp(rel) || width <= abs_floor {
            certified = true;
            break;
        }
        let mid = lo.add(&hi).ldexp(-1);
        if inertia.count_below(&mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = lo.add(&hi).ldexp(-1);
    Ok(HankelSpectrum { size: d.size, lambda, lower: lo, upper: hi, precision_bits: bits, certified })
}

/// Asymptotic decay constant `σ_{a,r}`: the smallest Hankel eigenvalue of an interval weight on `[a - r, a + r]` decays like `σ^{-2n-2}`.
pub fn sigma(a: f64, r: f64) -> f64 {
    let a_abs = a.abs();
    if a_abs + a * a - r * r >= 0.0 {
        let s = (a_abs + 1.0) / r;
        s + (s * s - 1.0).max(0.0).sqrt()
    } else {
        let u = 1.0 / (r * r - a * a);
        (u + 1.0).sqrt() + u.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct RatePoint {
    pub n: usize,
    pub spectrum: HankelSpectrum,
    /// `-ln λ_n / (2n + 2)`.
    pub rate: f64,
    /// `ln σ_{a,r}`.
    pub target: f64,
}

/// The (n+1)×(n+1) Hankel matrix of Lebesgue measure on `[a - r, a + r]`.
pub fn interval_hankel(a: f64, r: f64, n: usize) -> Result<RationalMatrix> {
    moment_matrix_exact(&MeasureSpec::lebesgue_box(vec![a], vec![r]), n)
}

/// Normalized log-rates of the smallest Hankel eigenvalues for `n = 0..=n_max`.
pub fn decay_rate_check(a: f64, r: f64, n_max: usize, precision_bits: u32) -> Result<Vec<RatePoint>> {
    if !(r > 0.0) {
        return Err(Error::Invalid("radius must be positive".into()));
    }
    let full = interval_hankel(a, r, n_max)?;
    let target = sigma(a, r).ln();
    (0..=n_max)
        .map(|n| {
            let spectrum = smallest_eigenvalue_exact(&full.leading(n + 1), precision_bits)?;
            let rate = -spectrum.ln() / (2 * n + 2) as f64;
            Ok(RatePoint { n, spectrum, rate, target })
        })
        .collect()
}

/// `Π_i λ_n(p_i, r_i)` with each factor bracketed.
#[derive(Debug, Clone)]
pub struct ProductBound {
    pub value: SoftFloat,
    pub lower: SoftFloat,
    pub upper: SoftFloat,
    pub certified: bool,
}

/// Product of the one-dimensional smallest Hankel eigenvalues, a lower bound
/// for `Λ_n` of Lebesgue measure on the rectangle `Π [p_i - r_i, p_i + r_i]`.
pub fn rectangle_lower_bound(p: &[f64], radii: &[f64], n: usize, precision_bits: u32) -> Result<ProductBound> {
    if p.is_empty() {
        return Err(Error::Invalid("dimension must be positive".into()));
    }
    if p.len() != radii.len() {
        return Err(Error::Dimension { expected: p.len(), found: radii.len() });
    }
    let one = SoftFloat::one(precision_bits);
    let mut bound = ProductBound { value: one.clone(), lower: one.clone(), upper: one, certified: true };
    for (&pi, &ri) in p.iter().zip(radii) {
        let s = smallest_eigenvalue_exact(&interval_hankel(pi, ri, n)?, precision_bits)?;
        bound.value = bound.value.mul(&s.lambda);
        bound.lower = bound.lower.mul(&s.lower);
        bound.upper = bound.upper.mul(&s.upper);
        bound.certified &= s.certified;
    }
    Ok(bound)
}

/// Smallest `N ≥ L^{4n} r_n² / Λ_n² · 4 ln(2/δ)`.
pub fn sample_complexity(n: usize, d: usize, lambda_n: f64, l_mu: f64, delta: f64) -> Result<u64> {
    if !(lambda_n > 0.0) {
        return Err(Error::Invalid("Lambda_n must be positive".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Invalid("delta must lie in (0, 1)".into()));
    }
    let r_n = jet_dimension(d, n)? as f64;
    let value = l_mu.powi(4 * n as i32) * r_n * r_n / (lambda_n * lambda_n) * 4.0 * (2.0 / delta).ln();
    if !value.is_finite() || value >= u64::MAX as f64 {
        return Err(Error::Overflow);
    }
    Ok(value.ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn dense_min(m: &DMatrix<f64>) -> f64 {
        SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn moment_examples() {
        let mu = MeasureSpec::uniform_box(vec![0.0], vec![1.0]);
        let d = moment_matrix_exact(&mu, 1).unwrap();
        assert_eq!(d, RationalMatrix::from_fn(2, |i, j| if i != j { q(0, 1) } else if i == 0 { q(1, 1) } else { q(1, 3) }));
        let d = moment_matrix_exact(&mu, 2).unwrap();
        let expected = [[q(1, 1), q(0, 1), q(1, 3)], [q(0, 1), q(1, 3), q(0, 1)], [q(1, 3), q(0, 1), q(1, 5)]];
        assert_eq!(d, RationalMatrix::from_fn(3, |i, j| expected[i][j].clone()));
        let emp = MeasureSpec::Empirical { points: vec![vec![0.0]] };
        assert_eq!(moment_matrix(&emp, 1).unwrap(), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(moment_matrix_exact(&emp, 1).unwrap().to_f64(), moment_matrix(&emp, 1).unwrap());
    }

    #[test]
    fn empirical_exact_and_double_agree() {
        let pts = vec![vec![0.1, -0.3], vec![0.7, 0.25], vec![-0.45, 0.9]];
        let mu = MeasureSpec::Empirical { points: pts };
        let exact = moment_matrix_exact(&mu, 2).unwrap().to_f64();
        let approx = moment_matrix(&mu, 2).unwrap();
        assert!((exact - approx).abs().max() < 1e-15);
    }

    #[test]
    fn ball_moments() {
        // second moment of the unit disc: 1/4 per axis; unit ball in R^3: 1/5
        let disc = MeasureSpec::UniformBall { center: vec![0.0, 0.0], radius: 1.0 };
        let m = moment_matrix_exact(&disc, 1).unwrap();
        assert_eq!(*m.get(1, 1), q(1, 4));
        assert_eq!(*m.get(1, 2), q(0, 1));
        let ball = MeasureSpec::UniformBall { center: vec![0.0; 3], radius: 1.0 };
        assert_eq!(*moment_matrix_exact(&ball, 1).unwrap().get(3, 3), q(1, 5));
        // the interval as a one-dimensional ball
        let seg = MeasureSpec::UniformBall { center: vec![0.5], radius: 2.0 };
        let boxed = MeasureSpec::uniform_box(vec![0.5], vec![2.0]);
        assert_eq!(moment_matrix_exact(&seg, 3).unwrap(), moment_matrix_exact(&boxed, 3).unwrap());
    }

    #[test]
    fn eigenvalue_examples() {
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0 / 3.0]);
        let s = smallest_eigenvalue(&d, 256).unwrap();
        assert!(s.certified);
        assert!((s.value() - 1.0 / 3.0).abs() < 1e-15);

        let exact = moment_matrix_exact(&MeasureSpec::uniform_box(vec![0.0], vec![1.0]), 2).unwrap();
        let s = smallest_eigenvalue_exact(&exact, 256).unwrap();
        let reference = dense_min(&exact.to_f64());
        assert!((s.value() - reference).abs() < 1e-14);
        assert!((s.value() - (0.6 - (0.16f64 + 1.0 / 9.0).sqrt())).abs() < 1e-14);
    }

    #[test]
    fn indefinite_and_singular() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s = smallest_eigenvalue(&d, 256).unwrap();
        assert!((s.value() + 1.0).abs() < 1e-12);
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let s = smallest_eigenvalue(&d, 256).unwrap();
        assert!(s.value().abs() < 1e-20);
        assert!(smallest_eigenvalue(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]), 64).is_err());
    }

    #[test]
    fn bisection_matches_dense_solver() {
        for n in 1..=6 {
            for (c, r) in [(0.0, 1.0), (0.3, 0.5), (-1.0, 2.0)] {
                let exact = interval_hankel(c, r, n).unwrap();
                let reference = dense_min(&exact.to_f64());
                if reference > 1e-6 {
                    let s = smallest_eigenvalue_exact(&exact, 160).unwrap();
                    assert!((s.value() - reference).abs() < 1e-10 * reference.max(1.0), "{n} {c} {r}");
                }
            }
        }
    }

    #[test]
    fn precision_self_consistency() {
        let exact = moment_matrix_exact(&MeasureSpec::uniform_box(vec![0.0], vec![1.0]), 12).unwrap();
        let a = smallest_eigenvalue_exact(&exact, 256).unwrap();
        let b = smallest_eigenvalue_exact(&exact, 512).unwrap();
        assert!(a.certified && b.certified);
        assert!(a.value() > 0.0 && a.value() < 1e-8);
        assert!(((a.value() - b.value()) / b.value()).abs() < 1e-10);
    }

    #[test]
    fn sigma_cases() {
        assert!((sigma(0.0, 1.0) - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((sigma(2.0, 1.0) - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-14);
        // |a| + a² = r² at a = 0.5, r² = 0.75
        let r = 0.75f64.sqrt();
        let first = {
            let s = 1.5 / r;
            s + (s * s - 1.0).sqrt()
        };
        let second = {
            let u = 1.0 / (r * r - 0.25);
            (u + 1.0).sqrt() + u.sqrt()
        };
        assert!((first - second).abs() < 1e-12);
        assert!((sigma(0.5, r) - first).abs() < 1e-12);
    }

    #[test]
    fn rates_decrease() {
        let points = decay_rate_check(0.0, 1.0, 8, 192).unwrap();
        for w in points.windows(2) {
            assert!(w[1].spectrum.upper < w[0].spectrum.lower);
        }
        let target = points[0].target;
        assert!((points[8].rate - target).abs() < (points[3].rate - target).abs());
    }

    #[test]
    fn rectangle_bound_examples() {
        let one_d = rectangle_lower_bound(&[0.0], &[1.0], 3, 128).unwrap();
        let direct = smallest_eigenvalue_exact(&interval_hankel(0.0, 1.0, 3).unwrap(), 128).unwrap();
        assert_eq!(one_d.value.to_f64(), direct.value());
        let zero = rectangle_lower_bound(&[0.0, 0.0], &[1.0, 1.0], 0, 256).unwrap();
        assert!((zero.value.to_f64() - 4.0).abs() < 1e-15);
        let bound = rectangle_lower_bound(&[0.0, 0.0], &[1.0, 1.0], 2, 128).unwrap();
        let rect = moment_matrix_exact(&MeasureSpec::lebesgue_box(vec![0.0, 0.0], vec![1.0, 1.0]), 2).unwrap();
        let big = smallest_eigenvalue_exact(&rect, 128).unwrap();
        assert!(big.upper >= bound.lower);
    }

    #[test]
    fn sample_complexity_examples() {
        assert_eq!(sample_complexity(1, 1, 1.0 / 3.0, 1.0, 0.1).unwrap(), 432);
        let a = sample_complexity(1, 1, 1.0 / 3.0, 1.0, 0.5).unwrap();
        let b = sample_complexity(1, 1, 1.0 / 3.0, 1.0, 0.9).unwrap();
        assert!(b < a);
        let base = 36.0 * 4.0 * 20f64.ln();
        let doubled = sample_complexity(1, 1, 1.0 / 3.0, 2.0, 0.1).unwrap();
        assert_eq!(doubled, (16.0 * base).ceil() as u64);
        assert!(sample_complexity(1, 1, 0.0, 1.0, 0.1).is_err());
    }
}
