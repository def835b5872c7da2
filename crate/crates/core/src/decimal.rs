//! Exact decimal numbers for tabular attribute values.
//!
//! Values are kept as an integer mantissa with a decimal exponent so that
//! fixed-point scaling into logic-program integers (`value × 10^d`) is exact
//! and order-preserving.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use thiserror::Error;

const MAX_SCALE: u32 = 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid decimal literal `{0}`")]
pub struct ParseDecimalError(pub String);

/// A decimal `mantissa × 10^-scale`.
///
/// Equality, ordering and hashing are by numeric value, so `150.0 == 150`.
/// The written scale is kept for display.
#[derive(Debug, Clone, Copy)]
pub struct Decimal {
    mantissa: i64,
    scale: u32,
}

impl Decimal {
    pub fn new(mantissa: i64, scale: u32) -> Self {
        assert!(scale <= MAX_SCALE, "decimal scale {scale} too large");
        Decimal { mantissa, scale }
    }

    pub fn from_int(value: i64) -> Self {
        Decimal::new(value, 0)
    }

    pub fn mantissa(&self) -> i64 {
        self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Trailing zeros stripped from the mantissa.
    pub fn normalized(&self) -> Decimal {
        let mut m = self.mantissa;
        let mut s = self.scale;
        while s > 0 && m % 10 == 0 {
            m /= 10;
            s -= 1;
        }
        Decimal { mantissa: m, scale: s }
    }

    /// Number of fractional digits needed to write the value exactly.
    pub fn significant_scale(&self) -> u32 {
        self.normalized().scale
    }

    /// `self × 10^digits` as an integer, or `None` when that is not an
    /// integer or overflows.
    pub fn to_scaled(&self, digits: u32) -> Option<i64> {
        let n = self.normalized();
        if n.scale > digits {
            return None;
        }
        let factor = 10i64.checked_pow(digits - n.scale)?;
        n.mantissa.checked_mul(factor)
    }

    /// Inverse of [`Decimal::to_scaled`].
    pub fn from_scaled(value: i64, digits: u32) -> Decimal {
        Decimal::new(value, digits)
    }

    pub fn to_f64(&self) -> f64 {
        // Parsing the exact text gives the correctly rounded binary value.
        self.to_string().parse().unwrap_or(f64::NAN)
    }

    fn widened(&self, scale: u32) -> i128 {
        self.mantissa as i128 * 10i128.pow(scale - self.scale)
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Decimal {}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let scale = self.scale.max(other.scale);
        self.widened(scale).cmp(&other.widened(scale))
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Decimal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let n = self.normalized();
        n.mantissa.hash(state);
        n.scale.hash(state);
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let sign = if self.mantissa < 0 { "-" } else { "" };
        let digits = self.mantissa.unsigned_abs().to_string();
        let scale = self.scale as usize;
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int, frac) = padded.split_at(padded.len() - scale);
        write!(f, "{sign}{int}.{frac}")
    }
}

impl FromStr for Decimal {
    type Err = ParseDecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDecimalError(s.to_string());
        let text = s.trim();
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let scale = u32::try_from(frac.len()).map_err(|_| err())?;
        if scale > MAX_SCALE {
            return Err(err());
        }
        let mut mantissa: i64 = 0;
        for b in int.bytes().chain(frac.bytes()) {
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add((b - b'0') as i64))
                .ok_or_else(err)?;
        }
        if negative {
            mantissa = -mantissa;
        }
        Ok(Decimal { mantissa, scale })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_displays() {
        assert_eq!(d("150.0").to_string(), "150.0");
        assert_eq!(d("-0.05").to_string(), "-0.05");
        assert_eq!(d("45").to_string(), "45");
        assert_eq!(d(".5").to_string(), "0.5");
        assert!("abc".parse::<Decimal>().is_err());
        assert!("1.2.3".parse::<Decimal>().is_err());
        assert!("".parse::<Decimal>().is_err());
        assert!("?".parse::<Decimal>().is_err());
    }

    #[test]
    fn value_equality_ignores_written_scale() {
        assert_eq!(d("150.0"), d("150"));
        assert!(d("0.38") < d("0.4"));
        assert_eq!(d("2.60").significant_scale(), 1);
    }

    #[test]
    fn scaling() {
        assert_eq!(d("150.0").to_scaled(1), Some(1500));
        assert_eq!(d("45").to_scaled(0), Some(45));
        assert_eq!(d("0.38").to_scaled(1), None);
        assert_eq!(d("0.38").to_scaled(2), Some(38));
        assert_eq!(Decimal::from_scaled(660, 1).to_string(), "66.0");
        assert_eq!(Decimal::from_scaled(-5, 2).to_string(), "-0.05");
    }

    proptest! {
        #[test]
        fn scaling_preserves_order(a in -1_000_000i64..1_000_000, b in -1_000_000i64..1_000_000,
                                   sa in 0u32..4, sb in 0u32..4) {
            let (x, y) = (Decimal::new(a, sa), Decimal::new(b, sb));
            let digits = 3;
            let (xs, ys) = (x.to_scaled(digits).unwrap(), y.to_scaled(digits).unwrap());
            prop_assert_eq!(x <= y, xs <= ys);
            prop_assert_eq!(x == y, xs == ys);
        }

        #[test]
        fn display_round_trips(m in -10_000_000i64..10_000_000, s in 0u32..8) {
            let x = Decimal::new(m, s);
            let back: Decimal = x.to_string().parse().unwrap();
            prop_assert_eq!(back.mantissa(), m);
            prop_assert_eq!(back.scale(), s);
        }
    }
}
