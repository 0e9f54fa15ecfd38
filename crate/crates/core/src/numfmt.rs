//! Locale-independent numeric formatting for CSV artifacts.

/// Formats with 12 significant digits, plain decimal notation for moderate
/// magnitudes and scientific notation otherwise. Trailing zeros after the
/// decimal point are trimmed, so `1.0` prints as `1`.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_trailing_zeros(s)
    } else {
        format!("{x:.11e}")
    }
}

/// Fixed-point with exactly 12 fractional digits (event-field timestamps).
pub fn fixed12(x: f64) -> String {
    format!("{x:.12}")
}

fn trim_trailing_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_examples() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(2.5), "2.5");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(25.0 / 12.0), "2.08333333333");
        assert_eq!(sig12(-1.5), "-1.5");
        assert_eq!(sig12(1e15), "1.00000000000e15");
        assert_eq!(sig12(3.2e-9), "3.20000000000e-9");
    }

    #[test]
    fn fixed12_pads() {
        assert_eq!(fixed12(1.5), "1.500000000000");
    }
}
