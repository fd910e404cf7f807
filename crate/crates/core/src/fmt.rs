//! Deterministic float formatting for text outputs.

/// Formats `x` like C's `printf("%.{precision}g", x)`.
pub fn format_g(x: f64, precision: usize) -> String {
    let p = precision.max(1);
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    // Round to p significant digits first; the exponent of the rounded value decides the style.
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

/// Shortest text that parses back to exactly `x`, in positional notation for
/// moderate magnitudes and `e` notation otherwise.
pub fn format_exact(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || a.is_infinite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
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
    use super::{format_exact, format_g};

    #[test]
    fn exact_round_trips() {
        for x in [0.1 + 0.2, 1.0, -3.5e-9, 6.02214076e23, 1e-300, f64::MIN_POSITIVE, 123456.789] {
            assert_eq!(format_exact(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_exact(2.0), "2");
        assert_eq!(format_exact(2.5e-7), "2.5e-7");
    }

    #[test]
    fn matches_printf() {
        let cases: &[(f64, usize, &str)] = &[
            (0.0, 12, "0"),
            (1.0, 12, "1"),
            (-0.5, 12, "-0.5"),
            (10.0, 12, "10"),
            (0.1, 17, "0.10000000000000001"),
            (1.0 / 3.0, 12, "0.333333333333"),
            (123456789012345.0, 12, "1.23456789012e+14"),
            (1e-5, 12, "1e-05"),
            (0.0001, 12, "0.0001"),
            (999999999999.5, 12, "1e+12"),
            (-1.5e100, 6, "-1.5e+100"),
            (100.0, 3, "100"),
            (1000.0, 3, "1e+03"),
        ];
        for &(x, p, want) in cases {
            assert_eq!(format_g(x, p), want, "x={x} p={p}");
        }
    }
}
