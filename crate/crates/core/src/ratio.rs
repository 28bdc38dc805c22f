//! Parsing and formatting of exact rational numbers.
//!
//! Every tally, weight, and share in this crate is a [`BigRational`]. File
//! formats and machine reports carry them as `numerator/denominator` strings
//! so that values survive a round trip without precision loss. Decimals are
//! accepted on input (`0.25` becomes `1/4` exactly) but never written.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatioParseError {
    #[error("empty numeric field")]
    Empty,
    #[error("invalid numeric literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `n`, `n/d`, or a plain decimal such as `2.75` into an exact rational.
pub fn parse_ratio(text: &str) -> Result<BigRational, RatioParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RatioParseError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_bigint(num, s)?;
        let d = parse_bigint(den, s)?;
        if d.is_zero() {
            return Err(RatioParseError::ZeroDenominator(s.to_string()));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let whole_part = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            parse_bigint(whole, s)?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RatioParseError::Invalid(s.to_string()));
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = parse_bigint(frac, s)?;
        let negative = s.starts_with('-');
        let magnitude = whole_part.abs() * &scale + frac_part;
        let signed = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(signed, scale));
    }
    Ok(BigRational::from_integer(parse_bigint(s, s)?))
}

fn parse_bigint(part: &str, whole: &str) -> Result<BigInt, RatioParseError> {
    part.trim()
        .parse::<BigInt>()
        .map_err(|_| RatioParseError::Invalid(whole.to_string()))
}

/// Canonical machine form: always `numerator/denominator`, lowest terms.
pub fn fraction_string(value: &BigRational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Human form: integers print without the denominator.
pub fn display_string(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}
