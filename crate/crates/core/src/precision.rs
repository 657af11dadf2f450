//! Arbitrary-precision reals.
//!
//! [`BigReal`] wraps a binary floating-point number together with the
//! precision it was produced at. Binary operations yield the smaller of the
//! two operand precisions, so a value never claims more bits than its
//! weakest input. Decimal is only used for presentation and persistence.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// Guard bits added on every decimal-to-binary precision conversion.
pub const GUARD_BITS: usize = 32;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

pub(crate) fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Working precision expressed in decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub const MIN_DIGITS: u32 = 15;

    pub fn new(decimal_digits: u32) -> Result<Self> {
        if decimal_digits < Self::MIN_DIGITS {
            return Err(Error::domain(
                "Precision::new",
                format!("need at least {} digits, got {decimal_digits}", Self::MIN_DIGITS),
            ));
        }
        Ok(Precision {
            digits: decimal_digits,
        })
    }

    /// Like [`Precision::new`] but clamps to the minimum instead of failing.
    pub fn digits(decimal_digits: u32) -> Self {
        Precision {
            digits: decimal_digits.max(Self::MIN_DIGITS),
        }
    }

    pub fn decimal_digits(&self) -> u32 {
        self.digits
    }

    /// `ceil(digits * log2(10)) + 32`.
    pub fn bits(&self) -> usize {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + GUARD_BITS
    }

    pub fn plus(&self, extra: u32) -> Self {
        Precision {
            digits: self.digits + extra,
        }
    }

    /// Absolute tolerance `10^-digits` as a value at this precision.
    pub fn epsilon(&self) -> BigReal {
        BigReal::ten_pow(-(self.digits as i64), self.bits())
    }
}

/// Arbitrary-precision real number with an explicit binary precision.
#[derive(Clone)]
pub struct BigReal {
    value: BigFloat,
    bits: usize,
}

impl BigReal {
    fn wrap(value: BigFloat, bits: usize) -> Self {
        debug_assert!(!value.is_nan(), "NaN escaped into BigReal: {:?}", value.err());
        BigReal { value, bits }
    }

    pub fn zero(bits: usize) -> Self {
        Self::from_u64(0, bits)
    }

    pub fn one(bits: usize) -> Self {
        Self::from_u64(1, bits)
    }

    pub fn from_u64(v: u64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_u64(v, bits), bits)
    }

    pub fn from_i64(v: i64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_i64(v, bits), bits)
    }

    pub fn from_u128(v: u128, bits: usize) -> Self {
        Self::wrap(BigFloat::from_u128(v, bits), bits)
    }

    /// Exact conversion of a finite `f64` (every double is a dyadic rational).
    pub fn from_f64(v: f64, bits: usize) -> Self {
        assert!(v.is_finite(), "non-finite f64 {v}");
        Self::wrap(BigFloat::from_f64(v, bits.max(64)), bits)
    }

    /// `num / den` rounded to `bits`.
    pub fn ratio(num: i64, den: i64, bits: usize) -> Self {
        Self::from_i64(num, bits) / Self::from_i64(den, bits)
    }

    /// `10^e` for integer `e`.
    pub fn ten_pow(e: i64, bits: usize) -> Self {
        let t = BigFloat::from_u64(10, bits).powi(e.unsigned_abs() as usize, bits, RM);
        let v = if e < 0 {
            BigFloat::from_u64(1, bits).div(&t, bits, RM)
        } else {
            t
        };
        Self::wrap(v, bits)
    }

    /// `2^e` for integer `e`.
    pub fn pow2(e: i64, bits: usize) -> Self {
        let t = BigFloat::from_u64(2, bits).powi(e.unsigned_abs() as usize, bits, RM);
        let v = if e < 0 {
            BigFloat::from_u64(1, bits).div(&t, bits, RM)
        } else {
            t
        };
        Self::wrap(v, bits)
    }

    pub fn pi(bits: usize) -> Self {
        Self::wrap(with_consts(|cc| cc.pi(bits, RM)), bits)
    }

    pub fn ln2(bits: usize) -> Self {
        Self::wrap(with_consts(|cc| cc.ln_2(bits, RM)), bits)
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Re-rounds (or zero-extends) to a new precision.
    pub fn with_bits(&self, bits: usize) -> Self {
        let mut v = self.value.clone();
        v.set_precision(bits.max(64), RM)
            .expect("precision change");
        BigReal { value: v, bits }
    }

    fn binop(&self, other: &Self, f: impl FnOnce(&BigFloat, &BigFloat, usize) -> BigFloat) -> Self {
        let bits = self.bits.min(other.bits);
        Self::wrap(f(&self.value, &other.value, bits), bits)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.value.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && self.value.is_positive()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.value.abs(), self.bits)
    }

    pub fn recip(&self) -> Self {
        Self::one(self.bits) / self
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn powi(&self, n: u32) -> Self {
        if n == 0 {
            return Self::one(self.bits);
        }
        Self::wrap(self.value.powi(n as usize, self.bits, RM), self.bits)
    }

    pub fn mul_int(&self, k: i64) -> Self {
        self * &Self::from_i64(k, self.bits)
    }

    pub fn div_int(&self, k: i64) -> Self {
        self / &Self::from_i64(k, self.bits)
    }

    /// Natural logarithm; non-positive arguments are a domain error.
    pub fn ln(&self) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::domain("ln", format!("argument {self} is not positive")));
        }
        let bits = self.bits;
        Ok(Self::wrap(with_consts(|cc| self.value.ln(bits, RM, cc)), bits))
    }

    pub fn exp(&self) -> Self {
        let bits = self.bits;
        let v = with_consts(|cc| self.value.exp(bits, RM, cc));
        assert!(!v.is_inf(), "exp overflow");
        Self::wrap(v, bits)
    }

    /// `self^e` for positive `self`.
    pub fn pow(&self, e: &Self) -> Result<Self> {
        if self.is_zero() && e.is_positive() {
            return Ok(Self::zero(self.bits.min(e.bits)));
        }
        Ok((&self.ln()? * e).exp())
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::domain("sqrt", format!("argument {self} is negative")));
        }
        Ok(Self::wrap(self.value.sqrt(self.bits, RM), self.bits))
    }

    pub fn floor(&self) -> Self {
        Self::wrap(self.value.floor(), self.bits)
    }

    pub fn ceil(&self) -> Self {
        Self::wrap(self.value.ceil(), self.bits)
    }

    pub fn is_integer(&self) -> bool {
        self.is_zero() || self.value.is_int()
    }

    pub fn max(&self, other: &Self) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Binary exponent `e` with `|self| = f * 2^e`, `f` in `[1/2, 1)`. `None` for zero.
    pub fn exponent2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            self.value.exponent().map(|e| e as i64)
        }
    }

    /// `log10 |self|`, robust far outside the range of `f64`. `-inf` for zero.
    pub fn log10_abs(&self) -> f64 {
        match self.value.as_raw_parts() {
            Some((m, _, _, e, _)) if !self.is_zero() => {
                let top = *m.last().expect("mantissa") as f64;
                let word_bits = (std::mem::size_of_val(&m[0]) * 8) as i32;
                let frac = top / 2f64.powi(word_bits);
                frac.log10() + e as f64 * std::f64::consts::LOG10_2
            }
            _ => f64::NEG_INFINITY,
        }
    }

    /// Nearest `f64` (saturating to 0 or infinity outside its range).
    pub fn to_f64(&self) -> f64 {
        match self.value.as_raw_parts() {
            Some((m, _, s, e, _)) if !self.is_zero() => {
                let word_bits = (std::mem::size_of_val(&m[0]) * 8) as i32;
                let mut frac = 0.0f64;
                for w in m.iter().rev().take(128 / word_bits as usize) {
                    frac = frac * 2f64.powi(word_bits) + *w as f64;
                }
                let used = m.len().min(128 / word_bits as usize) as i32;
                let shift = e as i64 - (used * word_bits) as i64;
                let v = if shift < -1100 {
                    (frac.log2() + shift as f64).exp2()
                } else {
                    frac * 2f64.powi(shift.clamp(-1100, 1100) as i32)
                };
                if s == Sign::Neg {
                    -v
                } else {
                    v
                }
            }
            _ => 0.0,
        }
    }

    /// Rounds to an integer and returns it when it fits `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        let f = self.to_f64().round();
        if f.abs() < 9.0e18 {
            Some(f as i64)
        } else {
            None
        }
    }

    /// Decimal digits and exponent: `±0.d1d2...dn × 10^(e+1)`, i.e. `d1.d2... × 10^e`.
    fn decimal_parts(&self, digits: usize) -> (bool, Vec<u8>, i64) {
        let s = with_consts(|cc| self.value.format(Radix::Dec, RM, cc)).expect("decimal format");
        let neg = s.starts_with('-');
        let body = s.trim_start_matches('-');
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i64>().expect("exponent")),
            None => (body, 0),
        };
        let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
        let mut ds: Vec<u8> = ip.bytes().chain(fp.bytes()).map(|b| b - b'0').collect();
        let mut exp10 = exp + ip.len() as i64 - 1;
        // strip leading zeros (only possible for zero or unnormalized output)
        while ds.len() > 1 && ds[0] == 0 {
            ds.remove(0);
            exp10 -= 1;
        }
        if ds.iter().all(|&d| d == 0) {
            return (false, vec![0; digits], 0);
        }
        if ds.len() > digits {
            let round_up = ds[digits] >= 5;
            ds.truncate(digits);
            if round_up {
                let mut i = digits;
                loop {
                    if i == 0 {
                        ds.insert(0, 1);
                        ds.truncate(digits);
                        exp10 += 1;
                        break;
                    }
                    i -= 1;
                    if ds[i] == 9 {
                        ds[i] = 0;
                    } else {
                        ds[i] += 1;
                        break;
                    }
                }
            }
        }
        ds.resize(digits, 0);
        (neg, ds, exp10)
    }

    /// Normalized scientific notation with exactly `digits` significant digits,
    /// e.g. `1.4722e-1`.
    pub fn to_sci_string(&self, digits: usize) -> String {
        let digits = digits.max(1);
        let (neg, ds, e) = self.decimal_parts(digits);
        let mut out = String::with_capacity(digits + 8);
        if neg {
            out.push('-');
        }
        out.push((b'0' + ds[0]) as char);
        if digits > 1 {
            out.push('.');
            out.extend(ds[1..].iter().map(|d| (b'0' + d) as char));
        }
        out.push('e');
        out.push_str(&e.to_string());
        out
    }

    /// Fixed-point decimal with `places` digits after the point.
    pub fn to_fixed_string(&self, places: usize) -> String {
        let mag = self.log10_abs();
        if !mag.is_finite() {
            return format!("{:.*}", places, 0.0);
        }
        let lead = mag.floor() as i64;
        let sig = (lead + 1 + places as i64).max(1) as usize;
        let (neg, ds, e) = self.decimal_parts(sig);
        let mut int_part = String::new();
        let mut frac_part = String::new();
        for (i, d) in ds.iter().enumerate() {
            let pos = e - i as i64;
            let c = (b'0' + d) as char;
            if pos >= 0 {
                int_part.push(c);
            } else if ((-pos) as usize) <= places {
                frac_part.push(c);
            }
        }
        if e < 0 {
            int_part.push('0');
            let zeros = ((-e - 1) as usize).min(places);
            frac_part = "0".repeat(zeros) + &frac_part;
        } else {
            for _ in 0..(e + 1 - int_part.len() as i64).max(0) {
                int_part.push('0');
            }
        }
        frac_part.truncate(places);
        while frac_part.len() < places {
            frac_part.push('0');
        }
        let sign = if neg { "-" } else { "" };
        if places == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }

    /// Parses a decimal literal (`1.25`, `-3e-7`, ...) at the given precision.
    pub fn parse(s: &str, bits: usize) -> Result<Self> {
        let t = s.trim();
        let ok = !t.is_empty()
            && t.bytes()
                .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'));
        if !ok {
            return Err(Error::Parse {
                line: 0,
                reason: format!("not a decimal number: {t:?}"),
            });
        }
        let v = with_consts(|cc| BigFloat::parse(t, Radix::Dec, bits.max(64), RM, cc));
        if v.is_nan() || v.is_inf() {
            return Err(Error::Parse {
                line: 0,
                reason: format!("not a finite decimal number: {t:?}"),
            });
        }
        Ok(BigReal { value: v, bits })
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.value.cmp(&other.value) == Some(0)
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.cmp(&other.value).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f
            .precision()
            .unwrap_or_else(|| ((self.bits.saturating_sub(GUARD_BITS)) as f64 / std::f64::consts::LOG2_10) as usize);
        f.write_str(&self.to_sci_string(digits.max(1)))
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({}, {} bits)", self.to_sci_string(25), self.bits)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $inner:ident) => {
        impl $tr<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $m(self, rhs: &BigReal) -> BigReal {
                self.binop(rhs, |a, b, p| a.$inner(b, p, RM))
            }
        }
        impl $tr<BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: BigReal) -> BigReal {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: &BigReal) -> BigReal {
                (&self).$m(rhs)
            }
        }
        impl $tr<BigReal> for &BigReal {
            type Output = BigReal;
            fn $m(self, rhs: BigReal) -> BigReal {
                self.$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);
forward_binop!(Div, div, div);

impl AddAssign<&BigReal> for BigReal {
    fn add_assign(&mut self, rhs: &BigReal) {
        *self = &*self + rhs;
    }
}

impl AddAssign<BigReal> for BigReal {
    fn add_assign(&mut self, rhs: BigReal) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&BigReal> for BigReal {
    fn sub_assign(&mut self, rhs: &BigReal) {
        *self = &*self - rhs;
    }
}

impl SubAssign<BigReal> for BigReal {
    fn sub_assign(&mut self, rhs: BigReal) {
        *self = &*self - &rhs;
    }
}

impl MulAssign<&BigReal> for BigReal {
    fn mul_assign(&mut self, rhs: &BigReal) {
        *self = &*self * rhs;
    }
}

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal::wrap(self.value.neg(), self.bits)
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal::wrap(self.value.clone().neg(), self.bits)
    }
}

impl std::iter::Sum for BigReal {
    fn sum<I: Iterator<Item = BigReal>>(iter: I) -> BigReal {
        let mut it = iter;
        let first = it.next().expect("sum of empty BigReal iterator");
        it.fold(first, |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: u32) -> usize {
        Precision::digits(d).bits()
    }

    #[test]
    fn precision_bits_include_guard() {
        let pr = Precision::new(100).unwrap();
        assert_eq!(pr.bits(), 333 + 32);
        assert!(pr.bits() as f64 > 100.0 * 3.32);
        assert!(Precision::new(14).is_err());
    }

    #[test]
    fn derived_precision_is_minimum() {
        let a = BigReal::one(p(50));
        let b = BigReal::one(p(20));
        assert_eq!((&a + &b).bits(), p(20));
        assert_eq!((&b * &a).bits(), p(20));
    }

    #[test]
    fn ln_two_matches_reference() {
        let l = BigReal::from_u64(2, p(60)).ln().unwrap();
        assert_eq!(
            l.to_sci_string(50),
            "6.9314718055994530941723212145817656807550013436026e-1"
        );
        assert_eq!(l, BigReal::ln2(p(60)));
    }

    #[test]
    fn exp_zero_is_one_and_log_domain() {
        assert_eq!(BigReal::zero(p(30)).exp(), BigReal::one(p(30)));
        assert!(matches!(
            BigReal::from_i64(-1, p(30)).ln(),
            Err(Error::Domain { .. })
        ));
        assert!(BigReal::zero(p(30)).ln().is_err());
    }

    #[test]
    fn exp_log_round_trip_within_four_ulp() {
        let bits = p(80);
        for x in [BigReal::from_u64(2, bits), BigReal::from_u64(10, bits), BigReal::ratio(1, 3, bits)] {
            let y = x.ln().unwrap().exp();
            let err = (&y - &x).abs();
            let four_ulp = BigReal::pow2(2 - bits as i64, bits) * x.abs();
            assert!(err <= four_ulp, "exp(ln {x}) = {y}");
        }
    }

    #[test]
    fn sci_string_rounds_and_carries() {
        let bits = p(30);
        assert_eq!(BigReal::ratio(2, 3, bits).to_sci_string(5), "6.6667e-1");
        assert_eq!(BigReal::ratio(9999999, 10000000, bits).to_sci_string(3), "1.00e0");
        assert_eq!(BigReal::from_i64(-1234, bits).to_sci_string(2), "-1.2e3");
        assert_eq!(BigReal::zero(bits).to_sci_string(3), "0.00e0");
        assert_eq!(BigReal::ratio(1, 8, bits).to_sci_string(1), "1e-1");
    }

    #[test]
    fn fixed_string() {
        let bits = p(30);
        assert_eq!(BigReal::ratio(1, 3, bits).to_fixed_string(4), "0.3333");
        assert_eq!(BigReal::ratio(-20776, 1000, bits).to_fixed_string(3), "-20.776");
        assert_eq!(BigReal::ratio(1, 1000, bits).to_fixed_string(2), "0.00");
    }

    #[test]
    fn parse_round_trip() {
        let bits = p(40);
        let x = BigReal::parse("-1.0006e-229", bits).unwrap();
        assert_eq!(x.to_sci_string(5), "-1.0006e-229");
        assert!((x.log10_abs() + 228.99974).abs() < 1e-4);
        assert!(BigReal::parse("abc", bits).is_err());
        let y = BigReal::ratio(1, 7, bits);
        let s = y.to_sci_string(40);
        assert_eq!(BigReal::parse(&s, bits).unwrap().to_sci_string(40), s);
    }

    #[test]
    fn to_f64_and_ordering() {
        let bits = p(30);
        assert_eq!(BigReal::ratio(3, 4, bits).to_f64(), 0.75);
        assert_eq!(BigReal::from_i64(-5, bits).to_f64(), -5.0);
        assert!(BigReal::ratio(1, 3, bits) < BigReal::ratio(1, 2, bits));
        let tiny = BigReal::ten_pow(-400, bits);
        assert_eq!(tiny.to_f64(), 0.0);
        assert!((tiny.log10_abs() + 400.0).abs() < 1e-9);
    }
}
