//! Helpers for exact rationals: parsing, formatting, float conversion and
//! overflow-free logarithms.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `p/q`, an integer, or a decimal literal (optionally with an
/// exponent) into an exact rational. Decimals are read digit by digit, so
/// `0.1` becomes exactly `1/10`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let num = parse_decimal(p)?;
        let den = parse_decimal(q)?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(num / den);
    }
    parse_decimal(s)
}

fn parse_decimal(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a number: {text:?}"));
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = body[pos + 1..].parse().map_err(|_| bad())?;
            (&body[..pos], exp)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Canonical `p/q` rendering (denominator always printed).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let ln = ln_abs(r);
    let mag = ln.exp();
    if r.is_negative() {
        -mag
    } else {
        mag
    }
}

/// Exact rational value of a finite float.
pub fn from_f64(v: f64) -> Rational {
    Rational::from_float(v).expect("finite float")
}

/// Smallest multiple of `1/den` that is >= `v`.
pub fn round_up(v: f64, den: u64) -> Rational {
    let scaled = (from_f64(v) * Rational::from_integer(BigInt::from(den))).ceil();
    scaled / Rational::from_integer(BigInt::from(den))
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln |r|`, finite for every nonzero rational regardless of its size;
/// `-inf` for zero.
pub fn ln_abs(r: &Rational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// `r^(1/k)` for `r >= 0`, evaluated through logarithms so that values far
/// outside the float range still produce a finite root. Within the float
/// range the result is the largest float whose `k`-th power is at most `r`.
pub fn nth_root(r: &Rational, k: usize) -> f64 {
    debug_assert!(!r.is_negative());
    if r.is_zero() {
        return 0.0;
    }
    let mut x = (ln_abs(r) / k as f64).exp();
    if !x.is_normal() {
        return x;
    }
    let fits = |x: f64| &pow(&from_f64(x), k) <= r;
    if fits(x) {
        for _ in 0..64 {
            let up = x.next_up();
            if !up.is_finite() || !fits(up) {
                break;
            }
            x = up;
        }
    } else {
        for _ in 0..1024 {
            x = x.next_down();
            if fits(x) {
                break;
            }
        }
    }
    x
}

pub fn pow(r: &Rational, e: usize) -> Rational {
    num_traits::pow(r.clone(), e)
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn is_nonnegative(r: &Rational) -> bool {
    r.numer().sign() != Sign::Minus
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-5/8").unwrap(), ratio(-5, 8));
        assert_eq!(parse_rational("0.1").unwrap(), ratio(1, 10));
        assert_eq!(parse_rational("-1.25").unwrap(), ratio(-5, 4));
        assert_eq!(parse_rational("12").unwrap(), int(12));
        assert_eq!(parse_rational("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_rational("2.5E2").unwrap(), int(250));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("0.5/2").unwrap(), ratio(1, 4));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1/0", "1.2.3", "--1", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn format_always_has_denominator() {
        assert_eq!(format_rational(&int(3)), "3/1");
        assert_eq!(format_rational(&ratio(-6, 8)), "-3/4");
    }

    #[test]
    fn roots_of_huge_values_stay_finite() {
        let big = pow(&int(10), 400);
        let r = nth_root(&big, 100);
        assert!((r - 10f64.powi(4)).abs() < 1e-6);
        let tiny = Rational::new(BigInt::one(), num_traits::pow(BigInt::from(7), 500));
        assert!((nth_root(&tiny, 500) - 1.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn round_up_is_an_upper_bound() {
        let r = round_up(0.3, 1024);
        assert!(r >= from_f64(0.3));
        assert!(to_f64(&r) - 0.3 < 1.0 / 1024.0);
    }
}
