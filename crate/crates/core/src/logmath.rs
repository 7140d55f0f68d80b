//! Log-domain helpers for probabilities that leave double range.

use std::f64::consts::LN_2;

/// `ln(e^a + e^b)` without overflow; `-inf` is the additive identity.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a >= b`. Returns `-inf` when the two are equal.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + ln_1m_exp(b - a)
}

/// `ln(1 - e^x)` for `x < 0`, accurate on both ends (Mächler's switch at -ln 2).
pub fn ln_1m_exp(x: f64) -> f64 {
    if x >= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x > -LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Log-sum-exp over a slice; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Natural log of a nonnegative real, mapping 0 to `-inf`.
pub fn ln0(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

/// Relative agreement of two log-values, measured on the linear scale: `|e^(a-b) - 1|`.
pub fn log_rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if !a.is_finite() || !b.is_finite() {
        return f64::INFINITY;
    }
    (a - b).exp_m1().abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_and_sub_are_inverse() {
        let a = -1000.0;
        let b = -1001.5;
        let s = log_add_exp(a, b);
        assert!((log_sub_exp(s, b) - a).abs() < 1e-12);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
        assert_eq!(log_sub_exp(-2.0, -2.0), f64::NEG_INFINITY);
    }

    #[test]
    fn ln_1m_exp_small_and_large() {
        let x = -1e-20_f64;
        assert!((ln_1m_exp(x) - (1e-20_f64).ln()).abs() < 1e-12);
        let y = -50.0_f64;
        assert!((ln_1m_exp(y) + (-50.0_f64).exp()).abs() < 1e-30);
    }

    #[test]
    fn lse_matches_direct_sum() {
        let v = [0.1_f64.ln(), 0.2_f64.ln(), 0.3_f64.ln()];
        assert!((log_sum_exp(&v) - 0.6_f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
