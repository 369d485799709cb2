//! Exact rational scalars used by the problem model and the encoder.

use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = num_rational::Ratio<i128>;

pub fn int(v: i128) -> Rational {
    Rational::from_integer(v)
}

/// Parses `"3"`, `"-2.75"`, `"1e-3"`, `"2.5E2"` or `"7/3"` into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: i128 = num.trim().parse().ok()?;
        let d: i128 = den.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut numer: i128 = 0;
    for b in whole.bytes().chain(frac.bytes()) {
        numer = numer.checked_mul(10)?.checked_add(i128::from(b - b'0'))?;
    }
    let scale = exponent - i32::try_from(frac.len()).ok()?;
    let pow = 10i128.checked_pow(scale.unsigned_abs())?;
    let value = if scale >= 0 {
        Rational::from_integer(numer.checked_mul(pow)?)
    } else {
        Rational::new(numer, pow)
    };
    Some(if negative { -value } else { value })
}

/// Renders a terminating decimal when the denominator allows it, `p/q` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    let mut den = *value.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let places = twos.max(fives);
    let scaled = value * Rational::from_integer(10i128.pow(places));
    let digits = scaled.to_integer().abs().to_string();
    let places = places as usize;
    let padded = format!("{:0>width$}", digits, width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    let sign = if value.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

pub fn to_f64(value: &Rational) -> f64 {
    if value.is_zero() {
        return 0.0;
    }
    value.to_f64().unwrap_or(f64::NAN)
}
