// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixed-precision rounding for exported numbers.

/// Rounds to 12 significant digits so exports are stable across platforms.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Text form of [`round_sig`]: plain decimals for moderate magnitudes,
/// exponent notation below 1e-4 or from 1e15 up.
pub fn fmt_number(x: f64) -> String {
    let r = round_sig(x);
    let a = r.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_twelve_digits() {
        assert_eq!(round_sig(1.234567890123456), 1.23456789012);
        assert_eq!(round_sig(-9.87654321098765e-7), -9.87654321099e-7);
        assert_eq!(round_sig(-0.0).to_bits(), 0.0f64.to_bits());
        assert_eq!(round_sig(3.0), 3.0);
    }

    #[test]
    fn text_form() {
        assert_eq!(fmt_number(5.69978914113e-5), "5.69978914113e-5");
        assert_eq!(fmt_number(0.25), "0.25");
        assert_eq!(fmt_number(4.962e9), "4962000000");
        assert_eq!(fmt_number(0.0), "0");
        assert_eq!(fmt_number(f64::NAN), "NaN");
        assert_eq!(fmt_number(5.69978914113e-5).parse::<f64>().unwrap(), 5.69978914113e-5);
    }
}
