//! Number formatting for CSV output.

/// Format `v` with `digits` significant digits, `%g` style: fixed notation
/// for moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn sig(v: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{exp}", trim(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `sig`, or `NA` for an absent value.
pub fn sig_or_na(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "NA".to_string(), |v| sig(v, digits))
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn g_style() {
        assert_eq!(sig(1.0 / 3.0, 9), "0.333333333");
        assert_eq!(sig(1.0 / 3.0, 6), "0.333333");
        assert_eq!(sig(0.25, 9), "0.25");
        assert_eq!(sig(3.0, 6), "3");
        assert_eq!(sig(-2.5, 6), "-2.5");
        assert_eq!(sig(123456789.0, 6), "1.23457e8");
        assert_eq!(sig(0.000012345, 3), "1.23e-5");
        assert_eq!(sig(0.00012345, 3), "0.000123");
        assert_eq!(sig(999999.5, 6), "1e6");
        assert_eq!(sig(0.0, 6), "0");
    }
}
