//! Analytic segment shapes of a survival function.
//!
//! Every scale constant is carried as a natural log so that segments far out in
//! the tail (values like `2^-500000`) stay representable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logmath::{ln0, ln_1m_exp, log_add_exp, log_sub_exp};
use crate::quad::{self, Tolerance};

/// Shape of `F̄` on one knot interval. Scale constants are stored as logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SegmentForm {
    /// `e^ln_c`; `c` is the plain level when it is known exactly and normal.
    Const {
        ln_c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
    /// `e^ln_scale * Σ coeffs[k] (x - origin)^k`
    Poly {
        ln_scale: f64,
        coeffs: Vec<f64>,
        origin: f64,
    },
    /// `e^ln_c * x^-alpha`
    ScaledPower { ln_c: f64, alpha: f64 },
    /// `e^ln_c * e^-sqrt(x)`
    ScaledExpSqrt { ln_c: f64 },
    /// `e^ln_c * e^(-lambda x)`
    LogAffine { ln_c: f64, lambda: f64 },
    /// `base(x)^m`
    PowerOf { base: Box<SegmentForm>, m: u32 },
    /// `e^ln_scale * (∫_x^upper inner(y) dy + e^ln_offset)`; produced by the integrated-tail operator.
    Integrated {
        inner: Box<SegmentForm>,
        upper: f64,
        ln_offset: f64,
        ln_scale: f64,
    },
}

/// How a form behaves as `x → ∞`; decides convergence of tail integrals and moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// Identically zero.
    Zero,
    /// Faster than every power.
    Fast,
    /// Like `x^-p`.
    Power(f64),
    /// Does not tend to zero.
    None,
}

impl Decay {
    fn converges_beyond(self, order: f64) -> bool {
        match self {
            Decay::Zero | Decay::Fast => true,
            Decay::Power(p) => p > order,
            Decay::None => false,
        }
    }
}

fn quad_tol() -> Tolerance {
    Tolerance {
        rel: 1e-12,
        abs: 0.0,
        max_intervals: 2000,
    }
}

fn poly_eval(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

/// `x - y - origin`, subtracting first whichever pair cancels exactly.
fn diff_from(x: f64, y: f64, origin: f64) -> f64 {
    if 2.0 * y >= x {
        (x - y) - origin
    } else {
        (x - origin) - y
    }
}

fn poly_deriv_eval(coeffs: &[f64], u: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &c)| acc * u + k as f64 * c)
}

/// `ln ∫_da^db p(u) du` for `p >= 0` of degree at most 7: width times the 4-point
/// Gauss-Legendre mean, so neither `u^(k+1)` nor the width squared is ever formed.
fn ln_poly_integral(coeffs: &[f64], da: f64, db: f64) -> f64 {
    const NODES: [(f64, f64); 4] = [
        (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    ];
    debug_assert!(coeffs.len() <= 8);
    let (mid, half) = (0.5 * da + 0.5 * db, 0.5 * db - 0.5 * da);
    let mean: f64 = NODES
        .iter()
        .map(|&(t, w)| 0.5 * w * poly_eval(coeffs, mid + half * t))
        .sum();
    ln0(db - da) + ln0(mean)
}

/// `ln Γ(n+1, s) = ln( n! e^-s Σ_{j≤n} s^j/j! )`
fn ln_upper_gamma_int(n: u32, s: f64) -> f64 {
    let mut terms = Vec::with_capacity(n as usize + 1);
    let mut ln_fact_n = 0.0;
    for j in 1..=n {
        ln_fact_n += (j as f64).ln();
    }
    let mut ln_fact_j = 0.0;
    for j in 0..=n {
        if j > 0 {
            ln_fact_j += (j as f64).ln();
        }
        terms.push(j as f64 * ln0(s) - ln_fact_j);
    }
    let terms: Vec<f64> = terms
        .into_iter()
        .enumerate()
        .map(|(j, t)| if j == 0 { 0.0 } else { t })
        .collect();
    ln_fact_n - s + crate::logmath::log_sum_exp(&terms)
}

impl SegmentForm {
    pub fn constant(c: f64) -> Self {
        SegmentForm::Const {
            ln_c: ln0(c),
            c: c.is_normal().then_some(c),
        }
    }

    /// A level given by its log only.
    pub fn const_ln(ln_c: f64) -> Self {
        SegmentForm::Const { ln_c, c: None }
    }

    /// A level known both exactly (when normal) and by an independently computed log.
    pub fn const_exact(c: f64, ln_c: f64) -> Self {
        SegmentForm::Const {
            ln_c,
            c: c.is_normal().then_some(c),
        }
    }

    pub fn zero() -> Self {
        SegmentForm::const_ln(f64::NEG_INFINITY)
    }

    pub fn poly(coeffs: Vec<f64>, origin: f64) -> Self {
        SegmentForm::Poly {
            ln_scale: 0.0,
            coeffs,
            origin,
        }
    }

    pub fn scaled_power(c: f64, alpha: f64) -> Self {
        SegmentForm::ScaledPower {
            ln_c: c.ln(),
            alpha,
        }
    }

    pub fn scaled_exp_sqrt(c: f64) -> Self {
        SegmentForm::ScaledExpSqrt { ln_c: c.ln() }
    }

    pub fn log_affine(c: f64, lambda: f64) -> Self {
        SegmentForm::LogAffine {
            ln_c: c.ln(),
            lambda,
        }
    }

    /// Affine descent on `[left, right]` anchored at the right end, so that values near the
    /// right end are sums of positive terms. `ratio` is `F̄(left)/F̄(right) >= 1`.
    pub fn affine_descent(left: f64, right: f64, ln_right_value: f64, ratio: f64) -> Self {
        let slope = (ratio - 1.0) / (right - left);
        SegmentForm::Poly {
            ln_scale: ln_right_value,
            coeffs: vec![1.0, -slope],
            origin: right,
        }
    }

    /// `F̄^m`, folded into a closed form where the family is closed under powers.
    pub fn power(self, m: u32) -> Self {
        if m == 1 {
            return self;
        }
        let mf = m as f64;
        match self {
            SegmentForm::Const { ln_c, .. } => SegmentForm::const_ln(mf * ln_c),
            SegmentForm::ScaledPower { ln_c, alpha } => SegmentForm::ScaledPower {
                ln_c: mf * ln_c,
                alpha: mf * alpha,
            },
            SegmentForm::LogAffine { ln_c, lambda } => SegmentForm::LogAffine {
                ln_c: mf * ln_c,
                lambda: mf * lambda,
            },
            SegmentForm::PowerOf { base, m: inner } => SegmentForm::PowerOf {
                base,
                m: inner * m,
            },
            other => SegmentForm::PowerOf {
                base: Box::new(other),
                m,
            },
        }
    }

    /// Natural log of the value at `x` (`-inf` where the value is zero).
    pub fn ln_value(&self, x: f64) -> f64 {
        match self {
            SegmentForm::Const { ln_c, .. } => *ln_c,
            SegmentForm::Poly {
                ln_scale,
                coeffs,
                origin,
            } => ln_scale + ln0(poly_eval(coeffs, x - origin)),
            SegmentForm::ScaledPower { ln_c, alpha } => ln_c - alpha * x.ln(),
            SegmentForm::ScaledExpSqrt { ln_c } => ln_c - x.sqrt(),
            SegmentForm::LogAffine { ln_c, lambda } => ln_c - lambda * x,
            SegmentForm::PowerOf { base, m } => *m as f64 * base.ln_value(x),
            SegmentForm::Integrated {
                inner,
                upper,
                ln_offset,
                ln_scale,
            } => {
                let body = if x < *upper {
                    inner.ln_integral(x, *upper).unwrap_or(f64::NAN)
                } else {
                    f64::NEG_INFINITY
                };
                ln_scale + log_add_exp(body, *ln_offset)
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.ln_value(x).exp()
    }

    /// Log of `-d/dx value`; `-inf` where the form is flat, NaN where it increases.
    pub fn ln_density(&self, x: f64) -> f64 {
        match self {
            SegmentForm::Const { .. } => f64::NEG_INFINITY,
            SegmentForm::Poly {
                ln_scale,
                coeffs,
                origin,
            } => {
                let d = -poly_deriv_eval(coeffs, x - origin);
                if d > 0.0 {
                    ln_scale + d.ln()
                } else if d == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    f64::NAN
                }
            }
            SegmentForm::ScaledPower { ln_c, alpha } => {
                ln_c + alpha.ln() - (alpha + 1.0) * x.ln()
            }
            SegmentForm::ScaledExpSqrt { ln_c } => {
                let s = x.sqrt();
                ln_c - s - (2.0 * s).ln()
            }
            SegmentForm::LogAffine { ln_c, lambda } => ln_c + lambda.ln() - lambda * x,
            SegmentForm::PowerOf { base, m } => {
                let mf = *m as f64;
                mf.ln() + (mf - 1.0) * base.ln_value(x) + base.ln_density(x)
            }
            SegmentForm::Integrated {
                inner,
                upper,
                ln_scale,
                ..
            } => {
                if x < *upper {
                    ln_scale + inner.ln_value(x)
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let d = self.ln_density(x).exp();
        if d.is_nan() {
            0.0
        } else {
            d
        }
    }

    /// [`Self::ln_value`] at `x - y`, evaluated without rounding the difference where the form allows.
    pub fn ln_value_diff(&self, x: f64, y: f64) -> f64 {
        match self {
            SegmentForm::Poly {
                ln_scale,
                coeffs,
                origin,
            } => ln_scale + ln0(poly_eval(coeffs, diff_from(x, y, *origin))),
            SegmentForm::LogAffine { ln_c, lambda } if 2.0 * y >= x => ln_c - lambda * (x - y),
            SegmentForm::LogAffine { ln_c, lambda } => ln_c - lambda * x + lambda * y,
            SegmentForm::PowerOf { base, m } => *m as f64 * base.ln_value_diff(x, y),
            _ => self.ln_value((x - y).max(0.0)),
        }
    }

    /// [`Self::ln_density`] at `x - y`, like [`Self::ln_value_diff`].
    pub fn ln_density_diff(&self, x: f64, y: f64) -> f64 {
        match self {
            SegmentForm::Poly {
                ln_scale,
                coeffs,
                origin,
            } => {
                let d = -poly_deriv_eval(coeffs, diff_from(x, y, *origin));
                if d > 0.0 {
                    ln_scale + d.ln()
                } else if d == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    f64::NAN
                }
            }
            SegmentForm::LogAffine { ln_c, lambda } if 2.0 * y >= x => ln_c + lambda.ln() - lambda * (x - y),
            SegmentForm::LogAffine { ln_c, lambda } => ln_c + lambda.ln() - lambda * x + lambda * y,
            SegmentForm::PowerOf { base, m } => {
                let mf = *m as f64;
                mf.ln() + (mf - 1.0) * base.ln_value_diff(x, y) + base.ln_density_diff(x, y)
            }
            SegmentForm::Integrated {
                inner,
                upper,
                ln_scale,
                ..
            } => {
                if x - y < *upper {
                    ln_scale + inner.ln_value_diff(x, y)
                } else {
                    f64::NEG_INFINITY
                }
            }
            _ => self.ln_density((x - y).max(0.0)),
        }
    }

    /// Density is unbounded like `1/sqrt(x)` at the origin.
    pub fn sqrt_singular_at_zero(&self) -> bool {
        match self {
            SegmentForm::ScaledExpSqrt { .. } => true,
            SegmentForm::PowerOf { base, .. } => base.sqrt_singular_at_zero(),
            _ => false,
        }
    }

    pub fn decay(&self) -> Decay {
        match self {
            SegmentForm::Const { ln_c, .. } => {
                if *ln_c == f64::NEG_INFINITY {
                    Decay::Zero
                } else {
                    Decay::None
                }
            }
            SegmentForm::Poly { coeffs, .. } => {
                if coeffs.iter().all(|&c| c == 0.0) {
                    Decay::Zero
                } else {
                    Decay::None
                }
            }
            SegmentForm::ScaledPower { alpha, .. } => Decay::Power(*alpha),
            SegmentForm::ScaledExpSqrt { .. } | SegmentForm::LogAffine { .. } => Decay::Fast,
            SegmentForm::PowerOf { base, m } => match base.decay() {
                Decay::Power(p) => Decay::Power(p * *m as f64),
                d => d,
            },
            SegmentForm::Integrated {
                inner,
                upper,
                ln_offset,
                ..
            } => {
                if upper.is_finite() {
                    if *ln_offset == f64::NEG_INFINITY {
                        Decay::Zero
                    } else {
                        Decay::None
                    }
                } else {
                    match inner.decay() {
                        Decay::Power(p) => Decay::Power(p - 1.0),
                        d => d,
                    }
                }
            }
        }
    }

    /// Short human-readable name, used in error messages.
    pub fn label(&self) -> String {
        match self {
            SegmentForm::Const { ln_c, .. } => format!("const({})", ln_c.exp()),
            SegmentForm::Poly { coeffs, .. } => format!("poly(degree {})", coeffs.len().saturating_sub(1)),
            SegmentForm::ScaledPower { alpha, .. } => format!("scaled_power(alpha={alpha})"),
            SegmentForm::ScaledExpSqrt { .. } => "scaled_exp_sqrt".into(),
            SegmentForm::LogAffine { lambda, .. } => format!("log_affine(lambda={lambda})"),
            SegmentForm::PowerOf { base, m } => format!("power_of({}, m={m})", base.label()),
            SegmentForm::Integrated { inner, .. } => format!("integrated({})", inner.label()),
        }
    }

    /// `ln ∫_a^b value(y) dy`; `b` may be `+inf`.
    pub fn ln_integral(&self, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(f64::NEG_INFINITY);
        }
        if b.is_infinite() && !self.decay().converges_beyond(1.0) {
            return Err(Error::Divergence(format!(
                "tail integral of {} to infinity (infinite mean)",
                self.label()
            )));
        }
        match self {
            SegmentForm::Const { ln_c, .. } if *ln_c == f64::NEG_INFINITY => Ok(f64::NEG_INFINITY),
            SegmentForm::Const { ln_c, .. } => Ok(ln_c + (b - a).ln()),
            SegmentForm::Poly {
                ln_scale,
                coeffs,
                origin,
            } => {
                if b.is_infinite() {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(ln_scale + ln_poly_integral(coeffs, a - origin, b - origin))
            }
            SegmentForm::ScaledPower { ln_c, alpha } => {
                let (la, lb) = (a.ln(), b.ln());
                if (*alpha - 1.0).abs() < 1e-15 {
                    if b.is_infinite() {
                        return Err(Error::Divergence(format!(
                            "tail integral of {} to infinity (infinite mean)",
                            self.label()
                        )));
                    }
                    return Ok(ln_c + (lb - la).ln());
                }
                let e = 1.0 - alpha;
                if e < 0.0 {
                    let rest = if b.is_infinite() {
                        0.0
                    } else {
                        ln_1m_exp(e * (lb - la))
                    };
                    Ok(ln_c - (-e).ln() + e * la + rest)
                } else {
                    if a == 0.0 {
                        return Ok(ln_c - e.ln() + e * lb);
                    }
                    Ok(ln_c - e.ln() + e * lb + ln_1m_exp(e * (la - lb)))
                }
            }
            SegmentForm::ScaledExpSqrt { ln_c } => {
                let (sa, sb) = (a.sqrt(), b.sqrt());
                let ga = std::f64::consts::LN_2 + sa.ln_1p() - sa;
                let gb = if b.is_infinite() {
                    f64::NEG_INFINITY
                } else {
                    std::f64::consts::LN_2 + sb.ln_1p() - sb
                };
                Ok(ln_c + ga + ln_1m_exp(gb - ga))
            }
            SegmentForm::LogAffine { ln_c, lambda } => {
                let rest = if b.is_infinite() {
                    0.0
                } else {
                    ln_1m_exp(-lambda * (b - a))
                };
                Ok(ln_c - lambda * a - lambda.ln() + rest)
            }
            SegmentForm::PowerOf { .. } | SegmentForm::Integrated { .. } => {
                self.ln_integral_numeric(a, b)
            }
        }
    }

    fn ln_integral_numeric(&self, a: f64, b: f64) -> Result<f64> {
        let reference = self.ln_value(a);
        if reference == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let f = |y: f64| (self.ln_value(y) - reference).exp();
        let total = if b.is_finite() {
            quad::integrate(f, a, b, quad_tol())?.value
        } else {
            integrate_to_infinity(f, a)?
        };
        Ok(reference + ln0(total))
    }

    /// `∫_a^b y^k dF(y)` over the absolutely continuous part of this segment.
    pub fn moment(&self, k: u32, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let kf = k as f64;
        if b.is_infinite() && !self.decay().converges_beyond(kf) {
            return Err(Error::Divergence(format!(
                "moment of order {k} of {} to infinity",
                self.label()
            )));
        }
        if k == 0 {
            // the segment is continuous inside, so its mass is the drop of the tail
            let hi = if b.is_infinite() { f64::NEG_INFINITY } else { self.ln_value(b) };
            return Ok(log_sub_exp(self.ln_value(a), hi).exp());
        }
        if b.is_finite() && self.has_closed_tail_moment() && self.decay().converges_beyond(kf) {
            // a tail moment difference as long as the upper part is small
            let (ma, mb) = (self.moment(k, a, f64::INFINITY)?, self.moment(k, b, f64::INFINITY)?);
            if mb <= 0.5 * ma {
                return Ok(ma - mb);
            }
        }
        match self {
            SegmentForm::Const { .. } => Ok(0.0),
            SegmentForm::ScaledPower { ln_c, alpha } if b.is_infinite() => {
                Ok((ln_c + alpha.ln() + (kf - alpha) * a.ln() - (alpha - kf).ln()).exp())
            }
            SegmentForm::ScaledExpSqrt { ln_c } if b.is_infinite() => {
                Ok((ln_c + ln_upper_gamma_int(2 * k, a.sqrt())).exp())
            }
            SegmentForm::LogAffine { ln_c, lambda } if b.is_infinite() => {
                // ∫_a^∞ y^k λ e^{-λy} dy = Γ(k+1, λa) / λ^k
                Ok((ln_c + ln_upper_gamma_int(k, lambda * a) - kf * lambda.ln()).exp())
            }
            _ => {
                let f = |y: f64| {
                    let d = self.density(y);
                    if d == 0.0 {
                        0.0
                    } else {
                        y.powi(k as i32) * d
                    }
                };
                if b.is_infinite() {
                    return integrate_to_infinity(f, a);
                }
                if a == 0.0 && self.sqrt_singular_at_zero() {
                    let s_hi = b.sqrt();
                    let g = |s: f64| 2.0 * s * f(s * s);
                    return Ok(quad::integrate(g, 0.0, s_hi, quad_tol())?.value);
                }
                Ok(quad::integrate(f, a, b, quad_tol())?.value)
            }
        }
    }

    fn has_closed_tail_moment(&self) -> bool {
        matches!(
            self,
            SegmentForm::ScaledPower { .. } | SegmentForm::ScaledExpSqrt { .. } | SegmentForm::LogAffine { .. }
        )
    }

    /// A point `x` in `[a, b]` with `ln_value(x) = target`, assuming the form crosses the
    /// target inside the interval. Closed-form where available, bisection otherwise.
    pub fn inverse_ln(&self, target: f64, a: f64, b: f64) -> f64 {
        let clamp = |x: f64| x.max(a).min(b);
        match self {
            SegmentForm::Const { .. } => a,
            SegmentForm::ScaledPower { ln_c, alpha } => clamp(((ln_c - target) / alpha).exp()),
            SegmentForm::ScaledExpSqrt { ln_c } => {
                let s = ln_c - target;
                clamp(s * s)
            }
            SegmentForm::LogAffine { ln_c, lambda } => clamp((ln_c - target) / lambda),
            SegmentForm::PowerOf { base, m } => base.inverse_ln(target / *m as f64, a, b),
            SegmentForm::Poly {
                ln_scale,
                coeffs,
                origin,
            } if coeffs.len() == 2 && coeffs[1] != 0.0 => {
                let v = (target - ln_scale).exp();
                clamp(origin + (v - coeffs[0]) / coeffs[1])
            }
            _ => self.bisect_ln(target, a, b),
        }
    }

    fn bisect_ln(&self, target: f64, a: f64, b: f64) -> f64 {
        let mut lo = a;
        let mut hi = if b.is_finite() {
            b
        } else {
            let mut h = (2.0 * a).max(1.0);
            while self.ln_value(h) > target && h < 1e300 {
                h *= 2.0;
            }
            h
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.ln_value(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `∫_a^∞ f` by geometric chunks; `f` must decay.
fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64) -> Result<f64> {
    let mut lo = a;
    let mut total = 0.0;
    let mut width = a.abs().max(1.0);
    for _ in 0..2000 {
        let hi = lo + width;
        let part = quad::integrate(&f, lo, hi, quad_tol())?.value;
        total += part;
        if hi > 1e300 || (part.abs() <= 1e-17 * total.abs() && f(hi) * hi <= 1e-17 * total.abs())
        {
            break;
        }
        lo = hi;
        width *= 2.0;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_sqrt_integral_matches_antiderivative() {
        let f = SegmentForm::scaled_exp_sqrt(1.0);
        let got = f.ln_integral(0.0, f64::INFINITY).unwrap().exp();
        assert!((got - 2.0).abs() < 1e-14);
        let got = f.ln_integral(4.0, 9.0).unwrap().exp();
        let want = 2.0 * 3.0 * (-2.0f64).exp() - 2.0 * 4.0 * (-3.0f64).exp();
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn power_integral_diverges_for_small_alpha() {
        let f = SegmentForm::scaled_power(1.0, 0.5);
        assert!(matches!(
            f.ln_integral(1.0, f64::INFINITY),
            Err(Error::Divergence(_))
        ));
        let g = SegmentForm::scaled_power(1.0, 3.0);
        assert!((g.ln_integral(1.0, f64::INFINITY).unwrap().exp() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn affine_descent_hits_both_ends() {
        let f = SegmentForm::affine_descent(2.0, 6.0, (0.25f64).ln(), 3.0);
        assert!((f.value(6.0) - 0.25).abs() < 1e-16);
        assert!((f.value(2.0) - 0.75).abs() < 1e-15);
        assert!((f.density(4.0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn closed_form_moments() {
        let e = SegmentForm::log_affine(1.0, 1.0);
        assert!((e.moment(1, 0.0, f64::INFINITY).unwrap() - 1.0).abs() < 1e-14);
        assert!((e.moment(2, 0.0, f64::INFINITY).unwrap() - 2.0).abs() < 1e-14);
        let s = SegmentForm::scaled_exp_sqrt(1.0);
        // E[X] for F̄ = e^{-sqrt x} is Γ(3) = 2
        assert!((s.moment(1, 0.0, f64::INFINITY).unwrap() - 2.0).abs() < 1e-13);
        let p = SegmentForm::scaled_power(1.0, 3.0);
        assert!((p.moment(1, 1.0, f64::INFINITY).unwrap() - 1.5).abs() < 1e-14);
        let numeric = p.moment(1, 1.0, 1e6).unwrap();
        assert!((numeric - 1.5 * (1.0 - 1e-12)).abs() < 1e-10);
    }

    #[test]
    fn power_folds_into_closed_forms() {
        let p = SegmentForm::scaled_power(1.0, 2.0).power(3);
        assert_eq!(p, SegmentForm::ScaledPower { ln_c: 0.0, alpha: 6.0 });
        let q = SegmentForm::scaled_exp_sqrt(1.0).power(2);
        assert!((q.ln_value(4.0) + 4.0).abs() < 1e-15);
        assert!((q.inverse_ln(-4.0, 0.0, 100.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_inverse_for_cubic() {
        // 1 - x^3 on [0,1)
        let f = SegmentForm::poly(vec![1.0, 0.0, 0.0, -1.0], 0.0);
        let x = f.inverse_ln(0.5f64.ln(), 0.0, 1.0);
        assert!((x - 0.5f64.cbrt()).abs() < 1e-12);
    }
}
