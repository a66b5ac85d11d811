/// `%g`-style rendering with six significant digits.
pub fn fmt6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    strip_zeros(&format!("{x:.decimals$}")).to_string()
}

/// Like [`fmt6`] with an explicit `+` on positive values.
pub fn fmt6_signed(x: f64) -> String {
    if x > 0.0 {
        format!("+{}", fmt6(x))
    } else {
        fmt6(x)
    }
}

pub fn fmt6_opt(x: Option<f64>) -> String {
    x.map(fmt6).unwrap_or_else(|| "n/a".into())
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (0.123_456_789, "0.123457"),
            (123_456.7, "123457"),
            (1_234_567.0, "1.23457e+06"),
            (0.000_123_456_7, "0.000123457"),
            (0.000_012_345_67, "1.23457e-05"),
            (-2.5, "-2.5"),
            (0.049_999_999_999_999_93, "0.05"),
            (999_999.5, "1e+06"),
            (1e-300, "1e-300"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt6(x), want, "{x}");
        }
        assert_eq!(fmt6(f64::INFINITY), "inf");
        assert_eq!(fmt6_signed(0.05), "+0.05");
        assert_eq!(fmt6_signed(-0.024), "-0.024");
        assert_eq!(fmt6_opt(None), "n/a");
    }
}
