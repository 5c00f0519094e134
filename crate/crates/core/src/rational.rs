//! Arbitrary precision rationals and the handful of conversions the rest of
//! the crate needs (decimal literals, `num/den` strings, rounded decimals).

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_u128(n: u128) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio_u128(num: u128, den: u128) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"n"`, `"n/d"` or a decimal literal such as `"2.64944"` exactly.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{whole_digits}{frac}");
        let mut n: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| bad())?
        };
        if negative {
            n = -n;
        }
        let d = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(Rational::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// `num/den` form, with integers printed without a denominator.
pub fn format(q: &Rational) -> String {
    q.to_string()
}

/// Largest multiple of `10^-digits` that is `<= q`, as a decimal string.
pub fn floor_decimal(q: &Rational, digits: u32) -> String {
    render_scaled(&scaled_floor(q, digits), digits)
}

/// Smallest multiple of `10^-digits` that is `>= q`, as a decimal string.
pub fn ceil_decimal(q: &Rational, digits: u32) -> String {
    let neg = -q;
    let mut s = scaled_floor(&neg, digits);
    s = -s;
    render_scaled(&s, digits)
}

/// `floor(q * 10^digits)`.
pub fn scaled_floor(q: &Rational, digits: u32) -> BigInt {
    let scale = BigInt::from(10u32).pow(digits);
    let n = q.numer() * &scale;
    n.div_floor(q.denom())
}

fn render_scaled(v: &BigInt, digits: u32) -> String {
    let negative = v.is_negative();
    let mag = v.abs().to_string();
    let digits = digits as usize;
    let body = if digits == 0 {
        mag
    } else {
        let padded = format!("{mag:0>width$}", width = digits + 1);
        let (int_part, frac_part) = padded.split_at(padded.len() - digits);
        format!("{int_part}.{frac_part}")
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    // Good enough for diagnostics; exact comparisons never go through f64.
    let digits = 30;
    let s = scaled_floor(q, digits);
    let f: f64 = s.to_string().parse().unwrap_or(f64::NAN);
    f / 10f64.powi(digits as i32)
}

/// Integer `k`-th root, rounded down.
pub fn iroot_floor(n: &BigUint, k: u32) -> BigUint {
    if n.is_zero() || k == 1 {
        return n.clone();
    }
    let mut lo = BigUint::zero();
    let mut hi = BigUint::one() << (n.bits() / k as u64 + 1);
    while &lo + 1u32 < hi {
        let mid: BigUint = (&lo + &hi) >> 1usize;
        if mid.pow(k) <= *n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn to_biguint(n: &BigInt) -> Option<BigUint> {
    match n.sign() {
        Sign::Minus => None,
        _ => Some(n.magnitude().clone()),
    }
}
