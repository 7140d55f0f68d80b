//! Two-fold convolution tails and the conditional single-big-jump probability.
//!
//! Every Stieltjes integral `∫ F̄(x - y) dF(y)` is split into the atoms of `F` and the density
//! part. The density part is integrated piecewise between the knots of `F` and the image knots
//! `x - t_i`, each piece rescaled by its own log-maximum so that tails far below double range
//! still integrate to full relative precision.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logmath::{ln_1m_exp, log_add_exp, log_sub_exp, log_sum_exp};
use crate::quad::{integrate, Tolerance};
use crate::tailfn::{SegmentForm, TailFunction};
use crate::transform::{DiagnosticSeries, DomainTag, SeriesKind, SeriesPoint};

/// Relative size of the plain sub-piece at an endpoint before logarithmic spacing takes over.
const EDGE: f64 = 1e-12;

const TOL: Tolerance = Tolerance {
    rel: 1e-11,
    abs: 1e-300,
    max_intervals: 4000,
};

/// End of an integration range for `dF`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Bound {
    Open(f64),
    Closed(f64),
}

impl Bound {
    fn at(self) -> f64 {
        match self {
            Bound::Open(v) | Bound::Closed(v) => v,
        }
    }
}

fn check(t: &TailFunction, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("position must be a nonnegative real, got {x}")));
    }
    if x > t.x_cap() {
        return Err(Error::Range { x, cap: t.x_cap() });
    }
    Ok(())
}

/// `ln ∫ g` over `[lo, hi]` on a scale matched to the range: logarithmic where it spans decades,
/// with a plain sub-piece at the origin.
fn ln_integral_scaled(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    if lo == 0.0 {
        let e = hi * EDGE;
        Ok(log_add_exp(
            ln_integral(&g, 0.0, e)?,
            ln_integral(|s| g(s.exp()) + s, e.ln(), hi.ln())?,
        ))
    } else if hi > 4.0 * lo {
        ln_integral(|s| g(s.exp()) + s, lo.ln(), hi.ln())
    } else {
        ln_integral(g, lo, hi)
    }
}

fn nan_free(d: f64) -> f64 {
    if d.is_nan() {
        f64::NEG_INFINITY
    } else {
        d
    }
}

/// `ln ∫ f(y) F̄(x - y) dy` over `[a, b]` with `b <= x/2`: `f` the density of `form`, `image`
/// the form of `F̄` on `(x - b, x - a)`.
fn ln_piece_y(form: &SegmentForm, image: &SegmentForm, a: f64, b: f64, x: f64) -> Result<f64> {
    let h = |y: f64| nan_free(form.ln_density(y)) + image.ln_value_diff(x, y);
    if a == 0.0 && form.sqrt_singular_at_zero() {
        // y = e(3s² - 2s³) on the first sub-piece cancels the 1/√y singularity
        let e = b * EDGE;
        let near = ln_integral(
            |s| {
                let y = e * s * s * (3.0 - 2.0 * s);
                h(y) + (e * 6.0 * s * (1.0 - s)).ln()
            },
            0.0,
            1.0,
        )?;
        Ok(log_add_exp(near, ln_integral(|s| h(s.exp()) + s, e.ln(), b.ln())?))
    } else {
        ln_integral_scaled(h, a, b)
    }
}

/// The same integral over `y = x - z` for `z` in `[zl, zh]`, `zh <= x/2`, with `image` the form
/// of `F̄` on `(zl, zh)`. The image argument is exact, so knots far below `ulp(x)` still count.
fn ln_piece_z(form: &SegmentForm, image: &SegmentForm, zl: f64, zh: f64, x: f64) -> Result<f64> {
    ln_integral_scaled(
        |z| nan_free(form.ln_density_diff(x, z)) + image.ln_value(z),
        zl,
        zh,
    )
}

/// `ln ∫ exp(g)` over `[lo, hi]`, rescaled by a sampled maximum. Far out the integrand's log is
/// only known to a few ulps of its magnitude, which bounds the attainable relative accuracy.
fn ln_integral(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(f64::NEG_INFINITY);
    }
    let w = hi - lo;
    let sampled = |n: usize| {
        (0..=n)
            .map(|k| g(lo + w * k as f64 / n as f64))
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut reference = sampled(16);
    if reference == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let tol = |r: f64| Tolerance {
        rel: TOL.rel.max(64.0 * f64::EPSILON * r.abs()),
        ..TOL
    };
    let mut q = integrate(|s| (g(s) - reference).exp(), lo, hi, tol(reference))?;
    if !q.value.is_finite() {
        // the sampled maximum missed a sharp peak
        reference = sampled(1024);
        q = integrate(|s| (g(s) - reference).exp(), lo, hi, tol(reference))?;
    }
    Ok(q.value.ln() + reference)
}

/// `x - y` rounded, and the rounding error: the exact difference is `z + r`.
fn diff_exact(x: f64, y: f64) -> (f64, f64) {
    let z = x - y;
    let v = z - x;
    (z, (x - (z - v)) + (-y - v))
}

/// Segment holding the exact `x - y`, even when the subtraction rounds up onto a knot.
fn segment_above(t: &TailFunction, x: f64, y: f64) -> usize {
    let (z, r) = diff_exact(x, y);
    let i = t.locate(z);
    if i > 0 && r < 0.0 && t.segments()[i].start == z {
        i - 1
    } else {
        i
    }
}

/// `ln F̄(x - y)`, taking the left limit when `x - y` rounds up onto a knot.
pub(crate) fn ln_tail_below(t: &TailFunction, x: f64, y: f64) -> f64 {
    let (z, r) = diff_exact(x, y);
    if r < 0.0 {
        let i = t.locate(z);
        if t.segments()[i].start == z {
            return t.ln_left_at_knot(i);
        }
    }
    t.ln_unchecked(z)
}

/// `ln ∫_{lo..hi} F̄(x - y) dF(y)`, `hi <= x`.
fn ln_stieltjes(t: &TailFunction, x: f64, lo: Bound, hi: Bound) -> Result<f64> {
    let (a, b) = (lo.at(), hi.at());
    if !(a <= b) {
        return Ok(f64::NEG_INFINITY);
    }
    let mut terms = Vec::new();
    for (pos, ln_m) in t.atoms_in(a, b) {
        if (pos == a && matches!(lo, Bound::Open(_))) || (pos == b && matches!(hi, Bound::Open(_))) {
            continue;
        }
        terms.push(ln_m + ln_tail_below(t, x, pos));
    }
    if a < b {
        let knots = t.knots();
        let segs = t.segments();
        for seg in segs {
            if seg.end <= a || seg.start >= b || matches!(seg.form, SegmentForm::Const { .. }) {
                continue;
            }
            let (s, e) = (seg.start.max(a), seg.end.min(b));
            let half = 0.5 * x;
            // y below x/2: cuts x - k for knots k above x/2 are exact
            if s < half {
                let e = e.min(half);
                let mut cuts = vec![s];
                let first = knots.partition_point(|&k| k <= x - e);
                for &k in knots[first..].iter().take_while(|&&k| k < x - s) {
                    let c = x - k;
                    if c > s && c < e {
                        cuts.push(c);
                    }
                }
                cuts.push(e);
                cuts.sort_by(f64::total_cmp);
                for w in cuts.windows(2) {
                    if w[1] > w[0] {
                        let j = segment_above(t, x, 0.5 * (w[0] + w[1]));
                        terms.push(ln_piece_y(&seg.form, &segs[j].form, w[0], w[1], x)?);
                    }
                }
            }
            // y from x/2 on: split z = x - y at the knots themselves
            if e > half {
                let (zl, zh) = (x - e, x - s.max(half));
                let mut cuts = vec![zl];
                let first = knots.partition_point(|&k| k <= zl);
                cuts.extend(knots[first..].iter().copied().take_while(|&k| k < zh));
                cuts.push(zh);
                for w in cuts.windows(2) {
                    if w[1] > w[0] {
                        let j = t.locate(w[0]);
                        terms.push(ln_piece_z(&seg.form, &segs[j].form, w[0], w[1], x)?);
                    }
                }
            }
        }
    }
    Ok(log_sum_exp(&terms))
}

/// `ln P(X₁ + X₂ > x)` from `F̄(x) + ∫_[0,x] F̄(x - y) dF(y)`.
pub fn ln_conv2_tail(t: &TailFunction, x: f64) -> Result<f64> {
    check(t, x)?;
    let j = ln_stieltjes(t, x, Bound::Closed(0.0), Bound::Closed(x))?;
    Ok(log_add_exp(t.ln_unchecked(x), j))
}

/// `P(X₁ + X₂ > x)`.
pub fn conv2_tail(t: &TailFunction, x: f64) -> Result<f64> {
    Ok(ln_conv2_tail(t, x)?.exp())
}

/// `ln P(X₁ + X₂ > x)` from `2F̄(x) - F̄(x/2)² + 2∫_(x/2,x] F̄(x - y) dF(y)`.
pub fn ln_conv2_tail_sym(t: &TailFunction, x: f64) -> Result<f64> {
    check(t, x)?;
    let j = ln_stieltjes(t, x, Bound::Open(0.5 * x), Bound::Closed(x))?;
    let pos = LN_2 + log_add_exp(t.ln_unchecked(x), j);
    Ok(log_sub_exp(pos, 2.0 * t.ln_unchecked(0.5 * x)))
}

pub fn conv2_tail_sym(t: &TailFunction, x: f64) -> Result<f64> {
    Ok(ln_conv2_tail_sym(t, x)?.exp())
}

/// `H(x) = F̄(x)^-1 ∫_(x/2,x] F̄(x - y) dF(y)`.
#[allow(non_snake_case)]
pub fn H(t: &TailFunction, x: f64) -> Result<f64> {
    check(t, x)?;
    let den = t.ln_unchecked(x);
    if den == f64::NEG_INFINITY {
        return Err(Error::Underflow(format!(
            "F̄({x}) is zero; use the log-domain ratio diagnostics"
        )));
    }
    let j = ln_stieltjes(t, x, Bound::Open(0.5 * x), Bound::Closed(x))?;
    Ok((j - den).exp())
}

/// Exact single-big-jump probability and the two lower-bound terms at one `(x, K)`.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BigJumpTerms {
    /// `P(X_(2,2) <= K | X₁ + X₂ > x)`.
    pub B: f64,
    pub B1: f64,
    pub B2: f64,
    pub x: f64,
    pub K: f64,
    /// `1 - B`, computed directly from the complementary integrals.
    pub complement: f64,
}

/// [`big_jump_B`] for several `K` at one `x`; returns one entry per `K` in input order.
#[allow(non_snake_case)]
pub fn big_jump_terms_many(t: &TailFunction, x: f64, ks: &[f64]) -> Result<Vec<BigJumpTerms>> {
    check(t, x)?;
    let half = 0.5 * x;
    for &k in ks {
        if !(k > 0.0 && 2.0 * k < x) {
            return Err(Error::Domain(format!("need x > 2K > 0, got x = {x}, K = {k}")));
        }
    }
    let mut order: Vec<usize> = (0..ks.len()).collect();
    order.sort_by(|&i, &j| ks[i].total_cmp(&ks[j]));
    // consecutive slices [0,K₁], (K₁,K₂], ..., (K_last, x/2]
    let mut slices = Vec::with_capacity(ks.len() + 1);
    let mut lo = Bound::Closed(0.0);
    for &i in &order {
        slices.push(ln_stieltjes(t, x, lo, Bound::Closed(ks[i]))?);
        lo = Bound::Open(ks[i]);
    }
    slices.push(ln_stieltjes(t, x, lo, Bound::Closed(half))?);
    let ln_half = t.ln_unchecked(half);
    let q = 2.0 * ln_half - LN_2;
    let total = log_sum_exp(&slices);
    let den = log_add_exp(total, q);
    if den == f64::NEG_INFINITY {
        return Err(Error::Underflow(format!("P(S₂ > {x}) is zero in the log domain")));
    }
    let ln_b2 = 2.0 * ln_half - LN_2 - t.ln_unchecked(x) - ln_1m_exp(ln_half);
    let mut out = vec![None; ks.len()];
    for (rank, &i) in order.iter().enumerate() {
        let n = log_sum_exp(&slices[..=rank]);
        let m = log_sum_exp(&slices[rank + 1..]);
        out[i] = Some(BigJumpTerms {
            B: (n - den).exp().min(1.0),
            // no mass in [0, x/2] leaves B1 empty rather than 0/0
            B1: if m == f64::NEG_INFINITY { 0.0 } else { (m - total).exp() },
            B2: ln_b2.exp(),
            x,
            K: ks[i],
            complement: (log_add_exp(m, q) - den).exp().min(1.0),
        });
    }
    Ok(out.into_iter().map(|o| o.expect("filled above")).collect())
}

/// `P(X_(2,2) <= K | X₁ + X₂ > x)` with the bound terms; needs `x > 2K > 0`.
#[allow(non_snake_case)]
pub fn big_jump_B(t: &TailFunction, x: f64, k: f64) -> Result<BigJumpTerms> {
    Ok(big_jump_terms_many(t, x, &[k])?[0])
}

/// One row of [`big_jump_profile`].
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub K: f64,
    /// `inf_x B(x, K)` over admissible grid points.
    pub inf_B: f64,
    /// `sup_x (1 - B(x, K))`, from the directly computed complements.
    pub sup_complement: f64,
    pub argmin_x: f64,
    pub pairs: usize,
}

/// `inf` over the x-grid of `B(x, K)` for each `K` with at least one `x > 2K`.
pub fn big_jump_profile(t: &TailFunction, xs: &[f64], ks: &[f64]) -> Result<Vec<ProfileRow>> {
    let per_x = xs
        .par_iter()
        .map(|&x| {
            let adm: Vec<f64> = ks.iter().copied().filter(|&k| k > 0.0 && 2.0 * k < x).collect();
            if adm.is_empty() {
                Ok(Vec::new())
            } else {
                big_jump_terms_many(t, x, &adm)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for &k in ks {
        let mut row: Option<ProfileRow> = None;
        for terms in per_x.iter().flatten().filter(|b| b.K == k) {
            let r = row.get_or_insert(ProfileRow {
                K: k,
                inf_B: f64::INFINITY,
                sup_complement: 0.0,
                argmin_x: terms.x,
                pairs: 0,
            });
            r.pairs += 1;
            if terms.complement > r.sup_complement {
                r.sup_complement = terms.complement;
                r.argmin_x = terms.x;
            }
            r.inf_B = r.inf_B.min(terms.B);
        }
        rows.extend(row);
    }
    if rows.is_empty() {
        return Err(Error::Domain(
            "no admissible (x, K) pair with x > 2K in the grids".into(),
        ));
    }
    Ok(rows)
}

/// The profile as a series over `K` of `sup_x (1 - B)`.
pub fn profile_series(rows: &[ProfileRow]) -> DiagnosticSeries {
    let mut points: Vec<SeriesPoint> = rows
        .iter()
        .map(|r| SeriesPoint {
            ln_x: r.K.ln(),
            ln_value: r.sup_complement.ln(),
        })
        .collect();
    points.sort_by(|a, b| a.ln_x.total_cmp(&b.ln_x));
    points.dedup_by(|a, b| a.ln_x == b.ln_x);
    DiagnosticSeries {
        kind: SeriesKind::BigJump,
        domain: DomainTag::NumericGrid,
        points,
        notes: Vec::new(),
    }
}

/// `F̄*²(x)/F̄(x)` on a grid, tagged as the OS or S diagnostic.
pub fn conv_ratio_series(t: &TailFunction, xs: &[f64], s_kind: bool) -> Result<DiagnosticSeries> {
    let mut grid: Vec<f64> = xs.iter().copied().filter(|&x| x > 0.0).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let vals = grid
        .par_iter()
        .map(|&x| Ok((x, ln_conv2_tail_sym(t, x)?, t.log_eval_tail(x)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut notes = Vec::new();
    let mut points = Vec::new();
    for (x, c, f) in vals {
        if f == f64::NEG_INFINITY {
            notes.push(format!("F̄ vanishes at x = {x}; later points dropped"));
            break;
        }
        points.push(SeriesPoint {
            ln_x: x.ln(),
            ln_value: c - f,
        });
    }
    Ok(DiagnosticSeries {
        kind: if s_kind { SeriesKind::SRatio } else { SeriesKind::OSRatio },
        domain: DomainTag::NumericGrid,
        points,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn exp1() -> TailFunction {
        TailFunction::single(SegmentForm::log_affine(1.0, 1.0))
    }

    fn two_point(p: f64, c: f64) -> TailFunction {
        TailFunction::from_parts(
            vec![0.0, c],
            vec![SegmentForm::constant(p), SegmentForm::zero()],
            1e300,
        )
        .unwrap()
    }

    #[test]
    fn erlang_two() {
        let e = exp1();
        for x in [0.1f64, 1.0, 2.0, 7.5, 40.0, 300.0] {
            let want = (1.0 + x) * (-x).exp();
            let a = conv2_tail(&e, x).unwrap();
            let b = conv2_tail_sym(&e, x).unwrap();
            assert!((a / want - 1.0).abs() < 1e-10, "x={x} a={a}");
            assert!((b / want - 1.0).abs() < 1e-10, "x={x} b={b}");
        }
        assert!((conv2_tail_sym(&e, 2.0).unwrap() - 3.0 * (-2f64).exp()).abs() < 1e-12);
        assert!((H(&e, 6.0).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn origin_atoms() {
        let t = two_point(0.3, 5.0);
        assert!((conv2_tail(&t, 0.0).unwrap() - (1.0 - 0.49)).abs() < 1e-15);
        // S₂ > 7 needs both at 5
        assert!((conv2_tail(&t, 7.0).unwrap() - 0.09).abs() < 1e-15);
        assert!((conv2_tail_sym(&t, 7.0).unwrap() - 0.09).abs() < 1e-15);
        assert!((conv2_tail(&t, 3.0).unwrap() - (1.0 - 0.49)).abs() < 1e-15);
    }

    #[test]
    fn two_point_big_jump() {
        let t = two_point(0.3, 5.0);
        assert_eq!(big_jump_B(&t, 7.0, 3.0).unwrap().B, 0.0);
        let t = two_point(0.3, 2.0);
        let b = big_jump_B(&t, 3.0, 1.4).unwrap();
        assert_eq!(b.B, 0.0);
        assert!(matches!(big_jump_B(&t, 3.0, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn no_mass_in_upper_half_gives_zero_h() {
        let t = two_point(0.5, 1.0);
        assert_eq!(H(&t, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn pareto_ratio_trends_to_two() {
        let p = catalog::reference("pareto", 1.0, 2.0).unwrap();
        let r1 = conv2_tail_sym(&p, 10.0).unwrap() / p.eval_tail(10.0).unwrap();
        let r2 = conv2_tail_sym(&p, 1e4).unwrap() / p.eval_tail(1e4).unwrap();
        assert!((r2 - 2.0).abs() < (r1 - 2.0).abs());
        assert!((r2 - 2.0).abs() < 0.01);
    }

    #[test]
    fn bound_terms_hold_on_ex33() {
        let e = catalog::build_default("ex33").unwrap();
        let x = 1.5 * 8200.0;
        let ks = [10.0, 50.0, 200.0, 500.0];
        let terms = big_jump_terms_many(&e.tail, x, &ks).unwrap();
        for w in terms.windows(2) {
            assert!(w[1].B >= w[0].B);
        }
        for b in terms {
            assert!(b.B >= 1.0 - b.B1 - b.B2 - 1e-12);
            assert!((b.B + b.complement - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_profile_is_domain_error() {
        let e = exp1();
        assert!(matches!(
            big_jump_profile(&e, &[10.0], &[6.0]),
            Err(Error::Domain(_))
        ));
    }
}
