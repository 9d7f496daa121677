//! Fixed-precision number formatting for reproducible text output.

/// Round to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    s.parse().unwrap_or(x)
}

/// Shortest decimal text of `x` rounded to `digits` significant digits.
pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".to_string() } else { "-inf".to_string() };
    }
    let r = round_sig(x, digits);
    if r == 0.0 {
        return "0".to_string();
    }
    format!("{r}")
}
