//! Exact rational arithmetic for thresholds, shares and percent changes.
//!
//! Counts in compliance tables are exact integers; every ratio derived from
//! them stays exact until the final rendering step, where half-even rounding
//! at a declared precision produces the printed figure. No floats anywhere.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::AuditError;

/// A reduced fraction with a strictly positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Result<Self, AuditError> {
        if den == 0 {
            return Err(AuditError::Value("rational with zero denominator".into()));
        }
        let sign = if den < 0 { -1 } else { 1 };
        let (num, den) = (num * sign, den * sign);
        let g = gcd(num, den).max(1);
        Ok(Rational {
            num: num / g,
            den: den / g,
        })
    }

    pub fn from_integer(n: i128) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn zero() -> Self {
        Rational::from_integer(0)
    }

    pub fn one() -> Self {
        Rational::from_integer(1)
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    pub fn checked_add(&self, other: &Rational) -> Result<Rational, AuditError> {
        Rational::new(self.num * other.den + other.num * self.den, self.den * other.den)
    }

    /// Rounds to `scale` decimal places, ties to even, returning the scaled
    /// integer (e.g. scale 2 turns 1/3 into 33).
    pub fn round_scaled(&self, scale: u32) -> i128 {
        let pow = 10i128.pow(scale);
        round_ratio_half_even(self.num * pow, self.den)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        // Denominators are positive, so cross-multiplication preserves order.
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            return write!(f, "{}", self.num);
        }
        // Prefer a terminating decimal when the denominator divides a power
        // of ten; otherwise print the reduced fraction.
        if let Some(s) = decimal_form(self.num, self.den) {
            return f.write_str(&s);
        }
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn decimal_form(num: i128, den: i128) -> Option<String> {
    let mut d = den;
    let mut twos = 0u32;
    let mut fives = 0u32;
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return None;
    }
    let scale = twos.max(fives);
    if scale > 27 {
        return None;
    }
    let pow = 10i128.checked_pow(scale)?;
    let scaled = num.checked_mul(pow)? / den;
    Some(format_scaled(scaled, scale))
}

/// Formats a scaled integer as a plain decimal, e.g. (-5145, 2) -> "-51.45".
pub fn format_scaled(scaled: i128, scale: u32) -> String {
    if scale == 0 {
        return scaled.to_string();
    }
    let pow = 10i128.pow(scale);
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.abs();
    format!(
        "{sign}{}.{:0width$}",
        abs / pow,
        abs % pow,
        width = scale as usize
    )
}

/// Nearest integer to `num/den` with ties rounded to even. `den` must be > 0.
pub fn round_ratio_half_even(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    let q = num.div_euclid(den);
    let r = num.rem_euclid(den);
    match (2 * r).cmp(&den) {
        Ordering::Less => q,
        Ordering::Greater => q + 1,
        Ordering::Equal => {
            if q % 2 == 0 {
                q
            } else {
                q + 1
            }
        }
    }
}

impl FromStr for Rational {
    type Err = AuditError;

    /// Accepts `"n/d"`, plain integers, and terminating decimals like `"0.05"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(AuditError::Value("empty rational literal".into()));
        }
        if let Some((n, d)) = s.split_once('/') {
            let num: i128 = n
                .trim()
                .parse()
                .map_err(|_| AuditError::Value(format!("bad numerator in `{s}`")))?;
            let den: i128 = d
                .trim()
                .parse()
                .map_err(|_| AuditError::Value(format!("bad denominator in `{s}`")))?;
            return Rational::new(num, den);
        }
        if let Some((int, frac)) = s.split_once('.') {
            let neg = int.trim_start().starts_with('-');
            let int_part: i128 = if int.is_empty() || int == "-" {
                0
            } else {
                int.parse()
                    .map_err(|_| AuditError::Value(format!("bad decimal `{s}`")))?
            };
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(AuditError::Value(format!("bad decimal `{s}`")));
            }
            if frac.len() > 27 {
                return Err(AuditError::Value(format!("decimal too precise: `{s}`")));
            }
            let frac_part: i128 = frac.parse().unwrap();
            let pow = 10i128.pow(frac.len() as u32);
            let mag = int_part.abs() * pow + frac_part;
            return Rational::new(if neg { -mag } else { mag }, pow);
        }
        let n: i128 = s
            .parse()
            .map_err(|_| AuditError::Value(format!("bad rational `{s}`")))?;
        Ok(Rational::from_integer(n))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_fraction_and_integer_forms() {
        assert_eq!("0.05".parse::<Rational>().unwrap(), Rational::new(1, 20).unwrap());
        assert_eq!("5/100".parse::<Rational>().unwrap(), Rational::new(1, 20).unwrap());
        assert_eq!("50".parse::<Rational>().unwrap(), Rational::from_integer(50));
        assert_eq!("-0.25".parse::<Rational>().unwrap(), Rational::new(-1, 4).unwrap());
    }

    #[test]
    fn rejects_zero_denominator_and_garbage() {
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("1.2.3".parse::<Rational>().is_err());
    }

    #[test]
    fn display_round_trips_through_parse() {
        for s in ["0.05", "3/7", "50", "-0.25", "1"] {
            let r: Rational = s.parse().unwrap();
            let back: Rational = r.to_string().parse().unwrap();
            assert_eq!(r, back, "via {s}");
        }
    }

    #[test]
    fn half_even_rounding_ties() {
        // 0.5 -> 0 (even), 1.5 -> 2, 2.5 -> 2, -0.5 -> 0, -1.5 -> -2
        assert_eq!(round_ratio_half_even(1, 2), 0);
        assert_eq!(round_ratio_half_even(3, 2), 2);
        assert_eq!(round_ratio_half_even(5, 2), 2);
        assert_eq!(round_ratio_half_even(-1, 2), 0);
        assert_eq!(round_ratio_half_even(-3, 2), -2);
    }

    #[test]
    fn ordering_by_cross_multiplication() {
        let a = Rational::new(1, 3).unwrap();
        let b = Rational::new(1, 4).unwrap();
        assert!(a > b);
        assert!(Rational::new(-1, 2).unwrap() < Rational::zero());
    }

    #[test]
    fn scaled_formatting() {
        assert_eq!(format_scaled(-5145, 2), "-51.45");
        assert_eq!(format_scaled(9998, 4), "0.9998");
        assert_eq!(format_scaled(0, 2), "0.00");
        assert_eq!(format_scaled(53794, 2), "537.94");
    }
}
