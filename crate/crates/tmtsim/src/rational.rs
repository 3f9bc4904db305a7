//! Exact rational arithmetic for cost accounting.
//!
//! All service and adjustment costs are sums of integers and products of
//! integers with user-supplied parameters such as `alpha`. Representing them
//! as arbitrary-precision rationals keeps every ledger total exactly equal to
//! the sum it claims to be, so reconciliation checks can use `==` instead of
//! tolerances.
//!
//! Parameters enter the system as decimal strings ("0.5", "3"), which always
//! denote rationals with a power-of-ten denominator, and leave it through
//! [`format_decimal`], which prints the exact expansion whenever one exists.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number used for all costs, weights, and thresholds.
pub type Rational = num_rational::BigRational;

/// Shorthand for an integer-valued [`Rational`].
pub fn int(value: u64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Rational from an explicit numerator/denominator pair. Panics on zero
/// denominator; intended for tests and fixtures.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid decimal number {text:?} (expected digits with an optional fraction, e.g. \"3\" or \"0.25\")")]
pub struct DecimalError {
    pub text: String,
}

/// Parses a decimal string (`[+-]?digits[.digits]`) into an exact rational.
///
/// The fraction is taken literally: `"0.1"` becomes exactly 1/10, with none
/// of the drift a detour through binary floating point would introduce.
pub fn parse_decimal(text: &str) -> Result<Rational, DecimalError> {
    let err = || DecimalError {
        text: text.to_string(),
    };
    let trimmed = text.trim();
    let (negative, body) = match trimmed.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, trimmed.strip_prefix('+').unwrap_or(trimmed)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    if body.contains('.') && (frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()))
    {
        return Err(err());
    }
    let digits: String = format!("{int_part}{frac_part}");
    let mut numer = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(err)?;
    if negative {
        numer = -numer;
    }
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(Rational::new(numer, denom))
}

/// Renders a rational as a decimal string.
///
/// If the reduced denominator divides a power of ten the exact expansion is
/// printed with no trailing zeros. Otherwise the value is rounded to 12
/// significant digits (this arises only for derived statistics such as mean
/// hop counts, never for ledger totals).
pub fn format_decimal(value: &Rational) -> String {
    let numer = value.numer();
    let denom = value.denom();
    if denom.is_one() {
        return numer.to_string();
    }
    let mut rest = denom.magnitude().clone();
    let two = BigUint::from(2u32);
    let five = BigUint::from(5u32);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&rest % &two).is_zero() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if rest.is_one() {
        let digits = twos.max(fives);
        let scaled = (numer * BigInt::from(10u32).pow(digits)) / denom;
        let sign = if scaled.is_negative() { "-" } else { "" };
        let mut mag = scaled.magnitude().to_string();
        let digits = digits as usize;
        if mag.len() <= digits {
            mag = format!("{}{}", "0".repeat(digits + 1 - mag.len()), mag);
        }
        let (int_part, frac_part) = mag.split_at(mag.len() - digits);
        format!("{sign}{int_part}.{frac_part}")
    } else {
        round_significant(value, 12)
    }
}

/// Rounds to `digits` significant decimal digits (half away from zero) and
/// renders in plain positional notation, trimming trailing fractional zeros.
fn round_significant(value: &Rational, digits: u32) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let num = value.numer().magnitude().clone();
    let den = value.denom().magnitude().clone();
    let ten = BigUint::from(10u32);

    // exponent = floor(log10(|value|))
    let mut exponent: i64 = 0;
    if num >= den {
        let mut scale = den.clone();
        while &scale * &ten <= num {
            scale *= &ten;
            exponent += 1;
        }
    } else {
        let mut scaled = num.clone();
        while &scaled < &den {
            scaled *= &ten;
            exponent -= 1;
        }
    }

    // We want round(|value| * 10^(digits-1-exponent)).
    let shift = digits as i64 - 1 - exponent;
    let (num, den) = if shift >= 0 {
        (num * ten.pow(shift as u32), den)
    } else {
        (num, den * ten.pow((-shift) as u32))
    };
    let (mut q, r) = num.div_rem(&den);
    if &r * 2u32 >= den {
        q += 1u32;
    }
    let mut mantissa = q.to_string();
    if mantissa.len() > digits as usize {
        // rounding carried into an extra digit (e.g. 999.5 -> 1000)
        mantissa.truncate(digits as usize);
        exponent += 1;
    }

    let sign = if negative { "-" } else { "" };
    let point = exponent + 1; // digits before the decimal point
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), mantissa)
    } else if (point as usize) >= mantissa.len() {
        format!(
            "{}{}",
            mantissa,
            "0".repeat(point as usize - mantissa.len())
        )
    } else {
        format!(
            "{}.{}",
            &mantissa[..point as usize],
            &mantissa[point as usize..]
        )
    };
    let body = if body.contains('.') {
        body.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        body
    };
    format!("{sign}{body}")
}

/// Converts to `f64` for statistical checks; not used in cost accounting.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}
