//! Numeric formatting shared by every CSV writer.

/// Magnitudes below this print as `0`.
pub const PRINT_FLOOR: f64 = 1e-14;

const SIG_DIGITS: usize = 15;

/// Positional notation with 15 significant digits and a `.` separator.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x.abs() < PRINT_FLOOR {
        return "0".to_owned();
    }
    // `{:e}` rounds to exactly SIG_DIGITS digits; the result is then shifted
    // into positional form without further rounding.
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

/// Like [`num`], with an empty field for an absent value.
pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
