//! Exact scalar types.
//!
//! Everything measure-valued in this crate is generic over [`Scalar`], an
//! exact ordered field with integer rounding. Any `num_rational::Ratio<I>`
//! over a signed integer type qualifies; the crate root fixes
//! [`crate::Rational`] as the arbitrary-precision default.
//!
//! Floating point types are deliberately not scalars: every comparison the
//! verifiers make (covering, packing, density equalities) must be exact.

use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};
use serde_with::{DeserializeAs, SerializeAs};

pub trait Scalar: Clone + Ord + Hash + Debug + Display + Send + Sync + Signed + 'static {
    fn from_int(v: i64) -> Self;
    fn from_ratio(numer: i64, denom: i64) -> Self;
    /// Largest integer not above `self`.
    fn floor(&self) -> Self;
    /// Smallest integer not below `self`.
    fn ceil(&self) -> Self;
    /// Numerator of the reduced fraction, as an integral scalar.
    fn numer(&self) -> Self;
    /// Denominator of the reduced fraction, as an integral scalar (always positive).
    fn denom(&self) -> Self;
    fn is_integer(&self) -> bool;
    fn to_i64(&self) -> Option<i64>;
    fn to_f64(&self) -> f64;
    /// Parses `"p/q"`, `"p"`, or a finite decimal such as `"-0.25"` or `"1e-6"`.
    fn parse_exact(s: &str) -> Option<Self>;

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }
}

impl<I> Scalar for Ratio<I>
where
    I: Integer
        + Clone
        + Signed
        + Hash
        + Debug
        + Display
        + FromStr
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static,
{
    fn from_int(v: i64) -> Self {
        Ratio::from_integer(I::from_i64(v).expect("integer fits scalar"))
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Ratio::new(
            I::from_i64(numer).expect("integer fits scalar"),
            I::from_i64(denom).expect("integer fits scalar"),
        )
    }

    fn floor(&self) -> Self {
        Ratio::floor(self)
    }

    fn ceil(&self) -> Self {
        Ratio::ceil(self)
    }

    fn numer(&self) -> Self {
        Ratio::from_integer(Ratio::numer(self).clone())
    }

    fn denom(&self) -> Self {
        Ratio::from_integer(Ratio::denom(self).clone())
    }

    fn is_integer(&self) -> bool {
        Ratio::is_integer(self)
    }

    fn to_i64(&self) -> Option<i64> {
        if Ratio::is_integer(self) {
            Ratio::numer(self).to_i64()
        } else {
            None
        }
    }

    fn to_f64(&self) -> f64 {
        let n = Ratio::numer(self).to_f64().unwrap_or(f64::NAN);
        let d = Ratio::denom(self).to_f64().unwrap_or(f64::NAN);
        n / d
    }

    fn parse_exact(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        if let Some((n, d)) = s.split_once('/') {
            let n = I::from_str(n.trim()).ok()?;
            let d = I::from_str(d.trim()).ok()?;
            if d.is_zero() {
                return None;
            }
            return Some(Ratio::new(n, d));
        }
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
            None => (s, 0),
        };
        let (negative, mantissa) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let digits = digits.trim_start_matches('0');
        let numer = if digits.is_empty() {
            I::zero()
        } else {
            I::from_str(digits).ok()?
        };
        let ten = I::from_u8(10)?;
        let scale = exponent - frac_part.len() as i32;
        let pow = |k: u32| num_traits::pow(ten.clone(), k as usize);
        let mut value = if scale >= 0 {
            Ratio::from_integer(numer * pow(scale as u32))
        } else {
            Ratio::new(numer, pow(scale.unsigned_abs()))
        };
        if negative {
            value = -value;
        }
        Some(value)
    }
}

/// Least common multiple of two positive rationals: the least positive value
/// that is an integer multiple of both. `None` when the multiplier needed
/// exceeds `max_factor`.
pub fn rational_lcm<T: Scalar>(a: &T, b: &T, max_factor: i64) -> Option<T> {
    let q = a.clone() / b.clone();
    let k = q.denom();
    if k > T::from_int(max_factor) || q.numer() > T::from_int(max_factor) {
        return None;
    }
    Some(a.clone() * k)
}

/// Exact `p/q` string representation for serde (`#[serde_as(as = "Exact")]`).
/// Integers and decimal strings are accepted on input; output is always the
/// reduced fraction.
pub struct Exact;

impl<T: Scalar> SerializeAs<T> for Exact {
    fn serialize_as<S: Serializer>(value: &T, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(value)
    }
}

impl<'de, T: Scalar> DeserializeAs<'de, T> for Exact {
    fn deserialize_as<D: Deserializer<'de>>(deserializer: D) -> Result<T, D::Error> {
        struct ExactVisitor<T>(std::marker::PhantomData<T>);

        impl<T: Scalar> Visitor<'_> for ExactVisitor<T> {
            type Value = T;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an exact rational as \"p/q\" or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<T, E> {
                T::parse_exact(v).ok_or_else(|| E::custom(format!("invalid exact rational {v:?}")))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<T, E> {
                Ok(T::from_int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<T, E> {
                i64::try_from(v)
                    .map(T::from_int)
                    .map_err(|_| E::custom("integer out of range"))
            }
        }

        deserializer.deserialize_any(ExactVisitor(std::marker::PhantomData))
    }
}

/// Formats an exact value as `p/q (≈ decimal)`; the fraction is authoritative.
pub fn render<T: Scalar>(v: &T) -> String {
    if v.is_integer() {
        format!("{v}")
    } else {
        format!("{v} (≈ {})", sig6(v.to_f64()))
    }
}

pub(crate) fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..=9).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(s: &str) -> Rational {
        Rational::parse_exact(s).unwrap()
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(q("1/3"), Rational::from_ratio(1, 3));
        assert_eq!(q("-5/7"), Rational::from_ratio(-5, 7));
        assert_eq!(q("0.4"), Rational::from_ratio(2, 5));
        assert_eq!(q("1e-6"), Rational::from_ratio(1, 1_000_000));
        assert_eq!(q("-2.5E1"), Rational::from_int(-25));
        assert_eq!(q(".5"), Rational::from_ratio(1, 2));
        assert!(Rational::parse_exact("1/0").is_none());
        assert!(Rational::parse_exact("abc").is_none());
        assert!(Rational::parse_exact("").is_none());
    }

    #[test]
    fn rational_lcm_of_periods() {
        let a = Rational::from_ratio(2, 3);
        let b = Rational::from_ratio(1, 2);
        assert_eq!(rational_lcm(&a, &b, 100), Some(Rational::from_int(2)));
        let c = Rational::from_int(1);
        let d = Rational::from_ratio(1, 1_000_000);
        assert_eq!(rational_lcm(&c, &d, 1000), None);
    }

    #[test]
    fn rounding_is_exact_for_small_ratios_too() {
        type R64 = num_rational::Ratio<i64>;
        assert_eq!(R64::from_ratio(-7, 2).floor(), R64::from_int(-4));
        assert_eq!(R64::from_ratio(-7, 2).ceil(), R64::from_int(-3));
        assert_eq!(Scalar::denom(&R64::from_ratio(6, 4)), R64::from_int(2));
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(2.0), "2");
        assert_eq!(sig6(1e-7), "1.00000e-7");
    }
}
