//! Locale-independent number formatting for CSV output.

/// Formats `x` with 12 significant digits, `.` as decimal separator and no
/// trailing zeros. Very small or very large magnitudes use `e` notation.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Round through the exponent form, then print the shortest round-trip
    // representation of the rounded value.
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    let mag = rounded.abs();
    if !(1e-6..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

pub fn bool01(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(sig12(0.339_528_855_083_281), "0.339528855083");
        assert_eq!(sig12(2.0), "2");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(1.5e-9), "1.5e-9");
        assert_eq!(sig12(123456789012345.0), "123456789012000");
        assert_eq!(sig12(f64::NAN), "nan");
    }
}
