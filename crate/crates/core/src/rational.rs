//! Exact rational arithmetic helpers shared by the symbolic paths.

use num::bigint::BigInt;
use num::traits::{Signed, ToPrimitive, Zero};
use num::One;

use crate::{Error, Result};

/// Arbitrary-precision rational. All exponent and coefficient arithmetic in
/// symbolic paths uses this type so zero tests are exact.
pub type Rat = num::BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of truncated floats for pathological sizes.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

pub fn to_i64(r: &Rat) -> Option<i64> {
    if is_integer(r) {
        r.numer().to_i64()
    } else {
        None
    }
}

/// Exact conversion: every finite f64 is a dyadic rational.
pub fn rat_from_f64(x: f64) -> Result<Rat> {
    Rat::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite value {x}")))
}

/// Conversion through the shortest decimal representation, so that a JSON
/// value like `1.4` means 7/5 rather than its binary approximation.
pub fn rat_from_f64_decimal(x: f64) -> Result<Rat> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("non-finite value {x}")));
    }
    parse_rat(&format!("{x}"))
}

/// Parses "p/q", integers, decimals, and scientific notation into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Domain(format!("`{s}` is not a rational literal"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Domain(format!("zero denominator in `{s}`")));
        }
        return Ok(Rat::new(p, q));
    }
    let (mantissa, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!(
        "{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part
    );
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let shift = exp10 - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if shift >= 0 {
        Rat::from_integer(n * ten.pow(shift as u32))
    } else {
        Rat::new(n, ten.pow((-shift) as u32))
    })
}

/// Renders as `p/q` (or just `p` for integers); re-parsable by [`parse_rat`].
pub fn render_rat(r: &Rat) -> String {
    if is_integer(r) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn nth_root_exact(n: &BigInt, k: u32) -> Option<BigInt> {
    if k == 1 {
        return Some(n.clone());
    }
    if n.is_negative() && k.is_multiple_of(2) {
        return None;
    }
    let root = n.nth_root(k);
    if num::pow::pow(root.clone(), k as usize) == *n {
        Some(root)
    } else {
        None
    }
}

/// `base^exp` when the result is exactly rational, `None` otherwise
/// (e.g. `2^(1/2)`). Integer exponents always succeed for nonzero base.
pub fn exact_pow(base: &Rat, exp: &Rat) -> Option<Rat> {
    if exp.is_zero() {
        return Some(Rat::one());
    }
    if base.is_zero() {
        return if exp.is_positive() {
            Some(Rat::zero())
        } else {
            None
        };
    }
    let root_deg = exp.denom().to_u32()?;
    let num_root = nth_root_exact(base.numer(), root_deg)?;
    let den_root = nth_root_exact(base.denom(), root_deg)?;
    let power = exp.numer().to_i64()?;
    let rooted = Rat::new(num_root, den_root);
    let mag = num::pow::pow(rooted, power.unsigned_abs() as usize);
    Some(if power < 0 { mag.recip() } else { mag })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("7/5").unwrap(), rat(7, 5));
        assert_eq!(parse_rat("-3").unwrap(), rat_int(-3));
        assert_eq!(parse_rat("1.4").unwrap(), rat(7, 5));
        assert_eq!(parse_rat("2.5e-1").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("1e3").unwrap(), rat_int(1000));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn decimal_f64_roundtrip() {
        assert_eq!(rat_from_f64_decimal(1.4).unwrap(), rat(7, 5));
        assert_eq!(rat_from_f64_decimal(-0.5).unwrap(), rat(-1, 2));
        assert_eq!(rat_from_f64_decimal(1e-7).unwrap(), rat(1, 10_000_000));
    }

    #[test]
    fn exact_powers() {
        assert_eq!(exact_pow(&rat(4, 9), &rat(1, 2)), Some(rat(2, 3)));
        assert_eq!(exact_pow(&rat(-8, 1), &rat(1, 3)), Some(rat_int(-2)));
        assert_eq!(exact_pow(&rat(2, 1), &rat(1, 2)), None);
        assert_eq!(exact_pow(&rat(2, 1), &rat(-2, 1)), Some(rat(1, 4)));
        assert_eq!(exact_pow(&rat(-4, 1), &rat(1, 2)), None);
        assert_eq!(exact_pow(&rat(5, 7), &Rat::zero()), Some(Rat::one()));
    }
}
