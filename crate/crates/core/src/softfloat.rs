//! Binary floating point with a configurable mantissa width.
//!
//! A value is `mantissa · 2^exponent` with `|mantissa|` holding exactly
//! `precision` bits (or zero). Every operation rounds to nearest.

use core::cmp::Ordering;
use core::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq)]
pub struct SoftFloat {
    mantissa: BigInt,
    exponent: i64,
    precision: u32,
}

fn round_magnitude(mag: BigUint, exponent: i64, precision: u32) -> (BigUint, i64) {
    let bits = mag.bits();
    let precision = u64::from(precision);
    if bits == 0 {
        return (mag, 0);
    }
    if bits <= precision {
        let shift = precision - bits;
        return (mag << shift, exponent - shift as i64);
    }
    let shift = bits - precision;
    let round_up = mag.bit(shift - 1);
    let mut kept = mag >> shift;
    let mut exponent = exponent + shift as i64;
    if round_up {
        kept += 1u32;
        if kept.bits() > precision {
            kept >>= 1;
            exponent += 1;
        }
    }
    (kept, exponent)
}

impl SoftFloat {
    fn normalized(mantissa: BigInt, exponent: i64, precision: u32) -> Self {
        let (sign, mag) = mantissa.into_parts();
        let (mag, exponent) = round_magnitude(mag, exponent, precision);
        let sign = if mag.is_zero() { Sign::NoSign } else { sign };
        SoftFloat { mantissa: BigInt::from_biguint(sign, mag), exponent, precision }
    }

    pub fn zero(precision: u32) -> Self {
        SoftFloat { mantissa: BigInt::zero(), exponent: 0, precision }
    }

    pub fn from_int(value: i64, precision: u32) -> Self {
        SoftFloat::normalized(BigInt::from(value), 0, precision)
    }

    pub fn from_f64(value: f64, precision: u32) -> Self {
        assert!(value.is_finite(), "non-finite value");
        let (mantissa, exponent, sign) = Float::integer_decode(value);
        let m = BigInt::from(mantissa) * BigInt::from(sign);
        SoftFloat::normalized(m, i64::from(exponent), precision)
    }

    /// Nearest value to an exact rational (within one unit in the last place).
    pub fn from_rational(value: &BigRational, precision: u32) -> Self {
        if value.is_zero() {
            return SoftFloat::zero(precision);
        }
        let num = value.numer();
        let den = value.denom();
        // scale so the integer quotient carries at least precision + 2 bits
        let shift = i64::from(precision) + 2 + den.bits() as i64 - num.bits() as i64;
        let shift = shift.max(0);
        let q = (num << shift as usize) / den;
        SoftFloat::normalized(q, -shift, precision)
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn neg(&self) -> Self {
        SoftFloat { mantissa: -&self.mantissa, exponent: self.exponent, precision: self.precision }
    }

    pub fn abs(&self) -> Self {
        SoftFloat { mantissa: self.mantissa.abs(), exponent: self.exponent, precision: self.precision }
    }

    pub fn add(&self, other: &Self) -> Self {
        let precision = self.precision.max(other.precision);
        if self.is_zero() {
            return SoftFloat::normalized(other.mantissa.clone(), other.exponent, precision);
        }
        if other.is_zero() {
            return SoftFloat::normalized(self.mantissa.clone(), self.exponent, precision);
        }
        let (hi, lo) = if self.exponent >= other.exponent { (self, other) } else { (other, self) };
        let gap = (hi.exponent - lo.exponent) as u64;
        let limit = u64::from(precision) + 4 + hi.mantissa.bits();
        if gap > limit {
            // the smaller operand sits entirely below the rounding position
            let sticky = if lo.is_negative() { -1 } else { 1 };
            let widened = (&hi.mantissa << (limit as usize)) + BigInt::from(sticky);
            return SoftFloat::normalized(widened, hi.exponent - limit as i64, precision);
        }
        let sum = (&hi.mantissa << gap as usize) + &lo.mantissa;
        SoftFloat::normalized(sum, lo.exponent, precision)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let precision = self.precision.max(other.precision);
        SoftFloat::normalized(&self.mantissa * &other.mantissa, self.exponent + other.exponent, precision)
    }

    /// Panics on division by zero.
    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero");
        let precision = self.precision.max(other.precision);
        let shift = i64::from(precision) + 2 + other.mantissa.bits() as i64 - self.mantissa.bits() as i64;
        let shift = shift.max(0);
        let q = (&self.mantissa << shift as usize) / &other.mantissa;
        SoftFloat::normalized(q, self.exponent - other.exponent - shift, precision)
    }

    pub fn mul_f64(&self, factor: f64) -> Self {
        self.mul(&SoftFloat::from_f64(factor, self.precision))
    }

    /// `self · 2^k`, exact.
    pub fn ldexp(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        SoftFloat { mantissa: self.mantissa.clone(), exponent: self.exponent + k, precision: self.precision }
    }

    /// Nearest double; saturates to `0` or `±∞` outside the double range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits();
        let drop = bits.saturating_sub(64);
        let top = (self.mantissa.abs() >> drop as usize).to_u64().expect("64 bits");
        let sign = if self.is_negative() { -1.0 } else { 1.0 };
        let mut value = top as f64;
        let mut exp = self.exponent + drop as i64;
        // scale in chunks to stay within the exponent range of powi
        while exp > 0 {
            let step = exp.min(1000);
            value *= 2f64.powi(step as i32);
            exp -= step;
            if value.is_infinite() {
                break;
            }
        }
        while exp < 0 {
            let step = (-exp).min(1000);
            value *= 2f64.powi(-(step as i32));
            exp += step;
            if value == 0.0 {
                break;
            }
        }
        sign * value
    }

    /// Natural logarithm of `|self|`, valid far outside the double range.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.mantissa.bits();
        let drop = bits.saturating_sub(64);
        let top = (self.mantissa.abs() >> drop as usize).to_u64().expect("64 bits") as f64;
        top.ln() + (self.exponent + drop as i64) as f64 * core::f64::consts::LN_2
    }

    /// Exact rational value.
    pub fn to_rational(&self) -> BigRational {
        let two = BigInt::from(2);
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa * num_traits::pow(two, self.exponent as usize))
        } else {
            BigRational::new(self.mantissa.clone(), num_traits::pow(two, (-self.exponent) as usize))
        }
    }

    pub fn one(precision: u32) -> Self {
        SoftFloat::normalized(BigInt::one(), 0, precision)
    }
}

impl PartialOrd for SoftFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SoftFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.sub(other);
        if diff.is_zero() {
            // a difference below the rounding position still decides the order
            self.to_rational().cmp(&other.to_rational())
        } else if diff.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl fmt::Debug for SoftFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SoftFloat({:e}, {} bits)", self.to_f64(), self.precision)
    }
}

impl fmt::Display for SoftFloat {
    /// Scientific notation with as many decimal digits as the mantissa supports.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let digits = f.precision().unwrap_or(((f64::from(self.precision) * core::f64::consts::LOG10_2) as usize).max(2));
        let decimal_exp = (self.ln_abs() / core::f64::consts::LN_10).floor() as i64;
        // scaled = |self| · 10^(digits - 1 - decimal_exp), rounded to an integer
        let shift = digits as i64 - 1 - decimal_exp;
        let ten = BigInt::from(10);
        let mut r = self.to_rational().abs();
        if shift >= 0 {
            r *= BigRational::from_integer(num_traits::pow(ten.clone(), shift as usize));
        } else {
            r /= BigRational::from_integer(num_traits::pow(ten.clone(), (-shift) as usize));
        }
        let mut int = r.round().to_integer();
        let mut exp10 = decimal_exp;
        let limit = num_traits::pow(ten.clone(), digits);
        if int >= limit {
            int /= &ten;
            exp10 += 1;
        }
        let lower = num_traits::pow(ten.clone(), digits - 1);
        if int < lower {
            int *= &ten;
            exp10 -= 1;
        }
        let s = alloc::format!("{int}");
        let sign = if self.is_negative() { "-" } else { "" };
        let (head, tail) = s.split_at(1);
        if tail.is_empty() {
            write!(f, "{sign}{head}e{exp10}")
        } else {
            write!(f, "{sign}{head}.{tail}e{exp10}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn exact(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap()
    }

    fn operand() -> impl proptest::strategy::Strategy<Value = f64> {
        use proptest::prelude::*;
        (-1.0f64..1.0, -30i32..30).prop_map(|(m, e)| m * 2f64.powi(e))
    }

    proptest::proptest! {
        #[test]
        fn arithmetic_is_exact_or_correctly_bounded(a in operand(), b in operand()) {
            // sums and products of such doubles fit in 200 bits, so they must be exact
            let (x, y) = (SoftFloat::from_f64(a, 200), SoftFloat::from_f64(b, 200));
            proptest::prop_assert_eq!(x.add(&y).to_rational(), exact(a) + exact(b));
            proptest::prop_assert_eq!(x.sub(&y).to_rational(), exact(a) - exact(b));
            proptest::prop_assert_eq!(x.mul(&y).to_rational(), exact(a) * exact(b));
            if b != 0.0 && a != 0.0 {
                let quotient = exact(a) / exact(b);
                let err = (x.div(&y).to_rational() - &quotient) / &quotient;
                let half_ulp = BigRational::new(BigInt::one(), BigInt::one() << 200usize);
                proptest::prop_assert!(err.abs() <= half_ulp);
            }
            proptest::prop_assert_eq!(x.cmp(&y), a.partial_cmp(&b).unwrap());
        }
    }

    #[test]
    fn round_trip_doubles() {
        for &x in &[1.0, -2.5, 1e-300, core::f64::consts::PI, 1e300, -7.0e-5] {
            assert_eq!(SoftFloat::from_f64(x, 64).to_f64(), x);
            assert_eq!(SoftFloat::from_f64(x, 53).to_f64(), x);
        }
    }

    #[test]
    fn arithmetic_against_doubles() {
        let a = SoftFloat::from_f64(0.1, 53);
        let b = SoftFloat::from_f64(0.2, 53);
        assert_eq!(a.add(&b).to_f64(), 0.1 + 0.2);
        assert_eq!(a.mul(&b).to_f64(), 0.1 * 0.2);
        assert_eq!(a.div(&b).to_f64(), 0.1 / 0.2);
        assert_eq!(a.sub(&b).to_f64(), 0.1 - 0.2);
        let third = SoftFloat::from_rational(&q(1, 3), 53);
        assert_eq!(third.to_f64(), 1.0 / 3.0);
    }

    #[test]
    fn high_precision_third() {
        let third = SoftFloat::from_rational(&q(1, 3), 256);
        let three = SoftFloat::from_int(3, 256);
        let err = third.mul(&three).sub(&SoftFloat::one(256));
        assert!(err.is_zero() || err.ln_abs() < -250.0 * core::f64::consts::LN_2);
        assert_eq!(third.to_string().len(), "3.".len() + 76 + "e-1".len());
        assert!(third.to_string().starts_with("3.333333333333333333333333"));
    }

    #[test]
    fn tiny_operand_rounds_correctly() {
        let one = SoftFloat::one(64);
        let tiny = SoftFloat::from_f64(1e-200, 64);
        assert_eq!(one.add(&tiny), one);
        assert_eq!(one.sub(&tiny), one);
        assert!(one.sub(&SoftFloat::from_f64(1e-15, 64)) < one);
        assert!(tiny.ln_abs() - (1e-200f64).ln() < 1e-12);
    }

    #[test]
    fn ordering() {
        let a = SoftFloat::from_rational(&q(1, 7), 128);
        let b = SoftFloat::from_rational(&q(1, 6), 128);
        assert!(a < b);
        assert!(b.neg() < a.neg());
        assert!(SoftFloat::zero(128) < a);
    }

    #[test]
    fn huge_exponents() {
        let x = SoftFloat::from_f64(1e-300, 128);
        let y = x.mul(&x).mul(&x);
        assert_eq!(y.to_f64(), 0.0);
        assert!((y.ln_abs() - 3.0 * (1e-300f64).ln()).abs() < 1e-9);
        assert!(y.is_positive());
    }
}
