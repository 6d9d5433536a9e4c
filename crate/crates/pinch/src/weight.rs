//! Exact edge-weight representation.
//!
//! Edge weights arrive as nonnegative decimal text (or as `f64` through the
//! C interface). To keep boundary comparisons exact they are stored as an
//! integer numerator over a power-of-ten denominator. Fractional precision
//! is capped at [`MAX_FRAC_DIGITS`] digits; anything beyond that is rounded
//! half away from zero at parse time, so two files that agree to nine
//! decimal places produce identical graphs. A whole graph later shares a
//! single denominator (see [`crate::graph`]); this module only handles the
//! per-value parsing and formatting.

/// Fractional decimal digits kept when parsing a weight.
pub const MAX_FRAC_DIGITS: u32 = 9;

/// A nonnegative decimal weight, `numerator / 10^frac_digits`, with
/// trailing zeros trimmed so the representation is canonical.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParsedWeight {
    pub numerator: u64,
    pub frac_digits: u32,
}

impl ParsedWeight {
    /// An exact integer weight.
    pub fn integer(n: u64) -> Self {
        ParsedWeight {
            numerator: n,
            frac_digits: 0,
        }
    }

    /// Approximate floating-point view, for display only.
    pub fn value(&self) -> f64 {
        self.numerator as f64 / 10f64.powi(self.frac_digits as i32)
    }

    fn normalized(mut numerator: u128, mut frac_digits: u32) -> Result<Self, String> {
        if numerator == 0 {
            frac_digits = 0;
        }
        while frac_digits > 0 && numerator.is_multiple_of(10) {
            numerator /= 10;
            frac_digits -= 1;
        }
        if numerator > u64::MAX as u128 {
            return Err("weight out of range".into());
        }
        Ok(ParsedWeight {
            numerator: numerator as u64,
            frac_digits,
        })
    }
}

/// Exact midpoint `(a + b) / 2`. Halving a decimal multiplies the numerator
/// by five and shifts the point one place, so the result stays exact.
pub(crate) fn average(a: ParsedWeight, b: ParsedWeight) -> Result<ParsedWeight, String> {
    let f = a.frac_digits.max(b.frac_digits);
    let na = u128::from(a.numerator) * 10u128.pow(f - a.frac_digits);
    let nb = u128::from(b.numerator) * 10u128.pow(f - b.frac_digits);
    ParsedWeight::normalized((na + nb) * 5, f + 1)
}

/// Parses a decimal weight, accepting plain (`2`, `0.25`, `.5`) and
/// scientific (`1e-3`, `1.234E+2`) forms.
pub fn parse_decimal(s: &str) -> crate::Result<ParsedWeight> {
    parse(s).map_err(|e| crate::Error::InvalidInput(format!("weight {s:?}: {e}")))
}

pub(crate) fn parse(s: &str) -> Result<ParsedWeight, String> {
    let mut rest = s.trim();
    if rest.is_empty() {
        return Err("empty".into());
    }
    let mut negative = false;
    if let Some(r) = rest.strip_prefix('+') {
        rest = r;
    } else if let Some(r) = rest.strip_prefix('-') {
        negative = true;
        rest = r;
    }
    let (mantissa, exponent) = match rest.find(['e', 'E']) {
        Some(i) => {
            let exp: i32 = rest[i + 1..]
                .parse()
                .map_err(|_| format!("bad exponent {:?}", &rest[i + 1..]))?;
            (&rest[..i], exp)
        }
        None => (rest, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err("no digits".into());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err("not a decimal number".into());
    }

    let mut digits: u128 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        digits = digits
            .checked_mul(10)
            .and_then(|d| d.checked_add(u128::from(b - b'0')))
            .ok_or("too many digits")?;
    }
    if negative && digits != 0 {
        return Err("negative weight".into());
    }

    let frac = frac_part.len() as i64 - exponent as i64;
    if frac > i64::from(MAX_FRAC_DIGITS) {
        // Round half away from zero to the supported precision. One guard
        // digit decides the direction: a remainder of exactly one half
        // rounds up either way.
        let drop = frac - i64::from(MAX_FRAC_DIGITS);
        if drop > 38 {
            digits = 0;
        } else {
            let div = 10u128.pow(drop as u32);
            digits = digits / div + u128::from(digits % div >= div / 2);
        }
        ParsedWeight::normalized(digits, MAX_FRAC_DIGITS)
    } else if frac < 0 {
        let shift = (-frac) as u32;
        if digits != 0 {
            if shift > 38 {
                return Err("weight out of range".into());
            }
            digits = digits
                .checked_mul(10u128.pow(shift))
                .ok_or("weight out of range")?;
        }
        ParsedWeight::normalized(digits, 0)
    } else {
        ParsedWeight::normalized(digits, frac as u32)
    }
}

/// Quantizes a floating-point weight to at most [`MAX_FRAC_DIGITS`]
/// fractional digits (fewer for large magnitudes, where `f64` itself has no
/// fractional precision left).
pub fn from_f64(w: f64) -> crate::Result<ParsedWeight> {
    from_f64_inner(w).map_err(|e| crate::Error::InvalidInput(format!("weight {w}: {e}")))
}

fn from_f64_inner(w: f64) -> Result<ParsedWeight, String> {
    if !w.is_finite() {
        return Err("not finite".into());
    }
    if w < 0.0 {
        return Err("negative weight".into());
    }
    if w > u64::MAX as f64 {
        return Err("weight out of range".into());
    }
    let mut frac = MAX_FRAC_DIGITS;
    while frac > 0 && w * 10f64.powi(frac as i32) > 9.0e15 {
        frac -= 1;
    }
    let numerator = (w * 10f64.powi(frac as i32)).round() as u128;
    ParsedWeight::normalized(numerator, frac)
}

/// Formats `numerator / scale` exactly when the scale divides a power of
/// ten (always true for graphs built from parsed text), and as the shortest
/// round-tripping float otherwise.
pub fn format_scaled(numerator: u64, scale: u64) -> String {
    if scale == 1 {
        return numerator.to_string();
    }
    for e in 1..=27u32 {
        let pow = 10u128.pow(e);
        if pow % u128::from(scale) == 0 {
            let total = u128::from(numerator) * (pow / u128::from(scale));
            let int = total / pow;
            let frac = total % pow;
            if frac == 0 {
                return int.to_string();
            }
            let mut fs = format!("{frac:0>width$}", width = e as usize);
            while fs.ends_with('0') {
                fs.pop();
            }
            return format!("{int}.{fs}");
        }
    }
    format!("{}", numerator as f64 / scale as f64)
}
