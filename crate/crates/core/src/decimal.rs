//! Exact parsing of decimal and fraction literals.

use num_rational::Ratio;

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Parses `-12.375`, `3`, `.5`, `1e-3` style decimals, or `p/q`, into an exact
/// rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("malformed decimal `{text}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(Error::Parse(format!("zero denominator in `{text}`")));
        }
        return Ok(Ratio::new(p, q));
    }

    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }

    let overflow = || Error::Parse(format!("decimal `{text}` out of range"));
    let mut num: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        num = num
            .checked_mul(10)
            .and_then(|v| v.checked_add((b - b'0') as i64))
            .ok_or_else(overflow)?;
    }
    let scale = exp - frac_part.len() as i32;
    let pow = |k: u32| 10i64.checked_pow(k).ok_or_else(overflow);
    let value = if scale >= 0 {
        Ratio::from_integer(num.checked_mul(pow(scale as u32)?).ok_or_else(overflow)?)
    } else {
        Ratio::new(num, pow((-scale) as u32)?)
    };
    Ok(if neg { -value } else { value })
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Rounds to 12 significant digits; the form used for metric values in reports.
pub fn round12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_rational("0.05").unwrap(), Ratio::new(1, 20));
        assert_eq!(parse_rational("-1.25").unwrap(), Ratio::new(-5, 4));
        assert_eq!(
            parse_rational("100000").unwrap(),
            Ratio::from_integer(100_000)
        );
        assert_eq!(parse_rational("1e5").unwrap(), Ratio::from_integer(100_000));
        assert_eq!(parse_rational("1/100").unwrap(), Ratio::new(1, 100));
        assert_eq!(parse_rational(".5").unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "abc", "1.2.3", "1/0", "-", "1e", "0x10", "."] {
            assert!(parse_rational(s).is_err(), "{s}");
        }
    }

    #[test]
    fn rounding() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(5.0), 5.0);
    }
}
