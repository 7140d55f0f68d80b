//! Distribution operators and the ratio diagnostics behind the class definitions.

use std::f64::consts::LN_2;
use std::fmt;

use serde::Serialize;

use crate::catalog::KnotOracle;
use crate::error::{Error, Result};
use crate::logmath::log_sum_exp;
use crate::tailfn::{SegmentForm, TailFunction};

/// `F̄ᴵ(x) = μ^-1 ∫_x^∞ F̄(y) dy` as a continuous piecewise tail on the same knots.
pub fn integrated_tail(t: &TailFunction) -> Result<TailFunction> {
    let segs = t.segments();
    let pieces = segs
        .iter()
        .map(|s| s.form.ln_integral(s.start, s.end))
        .collect::<Result<Vec<f64>>>()?;
    // ln ∫_{t_i}^∞ F̄, accumulated from the right
    let mut ln_rest = vec![f64::NEG_INFINITY; segs.len() + 1];
    for i in (0..segs.len()).rev() {
        ln_rest[i] = log_sum_exp(&[pieces[i], ln_rest[i + 1]]);
    }
    let ln_mu = ln_rest[0];
    if !(ln_mu > f64::NEG_INFINITY && ln_mu.is_finite()) {
        return Err(Error::Domain(format!(
            "integrated tail needs 0 < mean < ∞, got mean {}",
            ln_mu.exp()
        )));
    }
    let forms = segs
        .iter()
        .enumerate()
        .map(|(i, s)| integrate_form(&s.form, s.end, ln_rest[i + 1], ln_mu))
        .collect();
    TailFunction::from_parts(t.knots(), forms, t.x_cap())
}

/// `μ^-1 (∫_x^end form + e^ln_after)` on one segment.
fn integrate_form(form: &SegmentForm, end: f64, ln_after: f64, ln_mu: f64) -> SegmentForm {
    let rescale = |ln_s: f64, parts: &[f64]| -> f64 { parts.iter().map(|p| (p - ln_s).exp()).sum() };
    match form {
        SegmentForm::Const { ln_c, .. } if *ln_c == f64::NEG_INFINITY => SegmentForm::const_ln(ln_after - ln_mu),
        SegmentForm::Const { ln_c, .. } => {
            let ln_s = ln_after.max(*ln_c);
            SegmentForm::Poly {
                ln_scale: ln_s - ln_mu,
                coeffs: vec![rescale(ln_s, &[ln_after]), -rescale(ln_s, &[*ln_c])],
                origin: end,
            }
        }
        SegmentForm::Poly {
            ln_scale,
            coeffs,
            origin,
        } if end.is_finite() => {
            let ln_s = ln_after.max(*ln_scale);
            let w = (ln_scale - ln_s).exp();
            let u_end = end - origin;
            let p_end: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / (k as f64 + 1.0) * u_end.powi(k as i32 + 1))
                .sum();
            let mut out = vec![(ln_after - ln_s).exp() + w * p_end];
            out.extend(
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| -w * c / (k as f64 + 1.0)),
            );
            SegmentForm::Poly {
                ln_scale: ln_s - ln_mu,
                coeffs: out,
                origin: *origin,
            }
        }
        SegmentForm::ScaledPower { ln_c, alpha } if end.is_infinite() => SegmentForm::ScaledPower {
            ln_c: ln_c - (alpha - 1.0).ln() - ln_mu,
            alpha: alpha - 1.0,
        },
        SegmentForm::LogAffine { ln_c, lambda } if end.is_infinite() => SegmentForm::LogAffine {
            ln_c: ln_c - lambda.ln() - ln_mu,
            lambda: *lambda,
        },
        other => SegmentForm::Integrated {
            inner: Box::new(other.clone()),
            upper: end,
            ln_offset: ln_after,
            ln_scale: -ln_mu,
        },
    }
}

/// `Ḡ = F̄^m`, segment by segment; atoms become the jumps of `Ḡ`.
pub fn power_tail(t: &TailFunction, m: u32) -> Result<TailFunction> {
    if m == 0 {
        return Err(Error::Domain("power_tail needs m >= 1".into()));
    }
    Ok(t.map_forms(|f| f.clone().power(m)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SeriesKind {
    /// `F̄(x - t)/F̄(x)`, judged against 1 (L) or boundedness (OL).
    LRatio(f64),
    /// `F̄(x/2)/F̄(x)`.
    DHalving,
    /// `F̄*²(x)/F̄(x)`, judged against boundedness.
    OSRatio,
    /// `F̄*²(x)/F̄(x)`, judged against 2.
    SRatio,
    /// `e^(λx) F̄(x)`.
    LambdaScan(f64),
    /// `x^δ F̄(x)`.
    DeltaScan(f64),
    /// `F̄_1(x)/F̄_2(x)`.
    WeakEquiv,
    /// Estimates of `C(F, t)`, positioned at `t`.
    ShiftGrowth,
    /// `1 - inf_x B(x, K)`, positioned at `K`.
    BigJump,
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesKind::LRatio(t) => write!(f, "L_ratio(t={t})"),
            SeriesKind::DHalving => write!(f, "D_halving"),
            SeriesKind::OSRatio => write!(f, "OS_ratio"),
            SeriesKind::SRatio => write!(f, "S_ratio"),
            SeriesKind::LambdaScan(l) => write!(f, "lambda_scan(lambda={l})"),
            SeriesKind::DeltaScan(d) => write!(f, "delta_scan(delta={d})"),
            SeriesKind::WeakEquiv => write!(f, "weak_equiv"),
            SeriesKind::ShiftGrowth => write!(f, "C_of_t"),
            SeriesKind::BigJump => write!(f, "big_jump_complement"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DomainTag {
    NumericGrid,
    KnotOracle,
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainTag::NumericGrid => "numeric-grid",
            DomainTag::KnotOracle => "knot-oracle",
        })
    }
}

/// One point of a series: the diagnosed quantity is `V = e^ln_value` at `x = e^ln_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub ln_x: f64,
    pub ln_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticSeries {
    pub kind: SeriesKind,
    pub domain: DomainTag,
    pub points: Vec<SeriesPoint>,
    pub notes: Vec<String>,
}

/// `{:.16e}` with explicit infinities.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

pub const SERIES_CSV_HEADER: &str = "kind,x,log2_x,value,log2_value,domain_tag";

impl DiagnosticSeries {
    fn new(kind: SeriesKind, domain: DomainTag) -> Self {
        Self {
            kind,
            domain,
            points: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, ln_x: f64, ln_value: f64) {
        if let Some(last) = self.points.last() {
            if !(ln_x > last.ln_x) {
                return;
            }
        }
        self.points.push(SeriesPoint { ln_x, ln_value });
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The last `w` points.
    pub fn tail(&self, w: usize) -> &[SeriesPoint] {
        &self.points[self.points.len().saturating_sub(w)..]
    }

    /// Points with `x` in the last decade of the grid.
    pub fn last_decade(&self) -> &[SeriesPoint] {
        let Some(last) = self.points.last() else {
            return &[];
        };
        let cut = last.ln_x - std::f64::consts::LN_10;
        let first = self.points.partition_point(|p| p.ln_x < cut);
        &self.points[first..]
    }

    /// CSV rows without header.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.kind,
                fmt_num(p.ln_x.exp()),
                fmt_num(p.ln_x / LN_2),
                fmt_num(p.ln_value.exp()),
                fmt_num(p.ln_value / LN_2),
                self.domain
            ));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{SERIES_CSV_HEADER}\n{}", self.csv_rows())
    }
}

/// Largest `ln_value` in a window.
pub fn window_max(points: &[SeriesPoint]) -> f64 {
    points.iter().map(|p| p.ln_value).fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest `ln_value` in a window.
pub fn window_min(points: &[SeriesPoint]) -> f64 {
    points.iter().map(|p| p.ln_value).fold(f64::INFINITY, f64::min)
}

/// Each value at least the previous one minus `slack`.
pub fn nondecreasing(points: &[SeriesPoint], slack: f64) -> bool {
    points.windows(2).all(|w| w[1].ln_value >= w[0].ln_value - slack)
}

/// Each value at most the previous one plus `slack`.
pub fn nonincreasing(points: &[SeriesPoint], slack: f64) -> bool {
    points.windows(2).all(|w| w[1].ln_value <= w[0].ln_value + slack)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// `F̄(x - t)/F̄(x)` on a numeric grid.
pub fn ratio_series(t: &TailFunction, shift: f64, xs: &[f64]) -> Result<DiagnosticSeries> {
    if !(shift > 0.0) {
        return Err(Error::Domain(format!("shift t must be positive, got {shift}")));
    }
    let mut s = DiagnosticSeries::new(SeriesKind::LRatio(shift), DomainTag::NumericGrid);
    let mut skipped = 0;
    for x in sorted(xs) {
        if x - shift < 0.0 {
            skipped += 1;
            continue;
        }
        let den = t.log_eval_tail(x)?;
        if den == f64::NEG_INFINITY {
            s.notes.push(format!("F̄ vanishes at x = {x}; later points dropped"));
            break;
        }
        s.push(x.ln(), t.log_eval_tail(x - shift)? - den);
    }
    if skipped > 0 {
        s.notes.push(format!("{skipped} point(s) with x - t < 0 skipped"));
    }
    Ok(s)
}

/// Shift ratios at the oracle's witness points for indices `lo..=hi`.
pub fn ratio_series_oracle(o: &dyn KnotOracle, shift: f64, lo: u64, hi: u64) -> DiagnosticSeries {
    let mut s = DiagnosticSeries::new(SeriesKind::LRatio(shift), DomainTag::KnotOracle);
    for n in lo.max(o.n_min())..=hi.min(o.n_max()) {
        let w = o.shift_witness(n, shift);
        s.push(w.ln_x, w.ln_ratio);
    }
    s
}

/// `F̄(x/2)/F̄(x)` on a numeric grid.
pub fn halving_series(t: &TailFunction, xs: &[f64]) -> Result<DiagnosticSeries> {
    let mut s = DiagnosticSeries::new(SeriesKind::DHalving, DomainTag::NumericGrid);
    for x in sorted(xs).into_iter().filter(|&x| x > 0.0) {
        let den = t.log_eval_tail(x)?;
        if den == f64::NEG_INFINITY {
            s.notes.push(format!("F̄ vanishes at x = {x}; later points dropped"));
            break;
        }
        s.push(x.ln(), t.log_eval_tail(0.5 * x)? - den);
    }
    Ok(s)
}

/// Halving ratios at the oracle's witness points.
pub fn halving_series_oracle(o: &dyn KnotOracle, lo: u64, hi: u64) -> DiagnosticSeries {
    let mut s = DiagnosticSeries::new(SeriesKind::DHalving, DomainTag::KnotOracle);
    for n in lo.max(o.n_min())..=hi.min(o.n_max()) {
        let w = o.halving_witness(n);
        s.push(w.ln_x, w.ln_ratio);
    }
    s
}

/// `λx + ln F̄(x)` on a numeric grid.
pub fn lambda_scan(t: &TailFunction, lambda: f64, xs: &[f64]) -> Result<DiagnosticSeries> {
    let mut s = DiagnosticSeries::new(SeriesKind::LambdaScan(lambda), DomainTag::NumericGrid);
    for x in sorted(xs).into_iter().filter(|&x| x > 0.0) {
        s.push(x.ln(), lambda * x + t.log_eval_tail(x)?);
    }
    Ok(s)
}

/// `δ ln x + ln F̄(x)` on a numeric grid.
pub fn delta_scan(t: &TailFunction, delta: f64, xs: &[f64]) -> Result<DiagnosticSeries> {
    let mut s = DiagnosticSeries::new(SeriesKind::DeltaScan(delta), DomainTag::NumericGrid);
    for x in sorted(xs).into_iter().filter(|&x| x > 0.0) {
        s.push(x.ln(), delta * x.ln() + t.log_eval_tail(x)?);
    }
    Ok(s)
}

/// Which extreme of each oracle period a scan reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Low,
    High,
}

fn period_scan(
    o: &dyn KnotOracle,
    kind: SeriesKind,
    lo: u64,
    hi: u64,
    which: Extreme,
    g: impl Fn(f64, f64) -> f64,
) -> DiagnosticSeries {
    let mut s = DiagnosticSeries::new(kind, DomainTag::KnotOracle);
    for n in lo.max(o.n_min())..=hi.min(o.n_max()) {
        let vals = o.period_points(n).into_iter().map(|(lx, lv)| g(lx, lv));
        let v = match which {
            Extreme::Low => vals.fold(f64::INFINITY, f64::min),
            Extreme::High => vals.fold(f64::NEG_INFINITY, f64::max),
        };
        s.push(o.log_knot(n), v);
    }
    s
}

/// Per-period extreme of `λx + ln F̄(x)`, positioned at the period's first knot.
pub fn lambda_scan_oracle(
    o: &dyn KnotOracle,
    lambda: f64,
    lo: u64,
    hi: u64,
    which: Extreme,
) -> DiagnosticSeries {
    period_scan(o, SeriesKind::LambdaScan(lambda), lo, hi, which, |lx, lv| {
        // λx overflows only where it dominates any representable ln F̄
        let lam_x = (lambda.ln() + lx).exp();
        if lam_x.is_infinite() {
            f64::INFINITY
        } else {
            lam_x + lv
        }
    })
}

/// Per-period extreme of `δ ln x + ln F̄(x)`.
pub fn delta_scan_oracle(
    o: &dyn KnotOracle,
    delta: f64,
    lo: u64,
    hi: u64,
    which: Extreme,
) -> DiagnosticSeries {
    period_scan(o, SeriesKind::DeltaScan(delta), lo, hi, which, |lx, lv| delta * lx + lv)
}

/// `ln F̄_1(x) - ln F̄_2(x)` on a numeric grid.
pub fn weak_equiv_series(
    t1: &TailFunction,
    t2: &TailFunction,
    xs: &[f64],
) -> Result<DiagnosticSeries> {
    let mut s = DiagnosticSeries::new(SeriesKind::WeakEquiv, DomainTag::NumericGrid);
    for x in sorted(xs).into_iter().filter(|&x| x > 0.0) {
        let (a, b) = (t1.log_eval_tail(x)?, t2.log_eval_tail(x)?);
        if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
            s.notes.push(format!("both tails vanish at x = {x}; later points dropped"));
            break;
        }
        s.push(x.ln(), a - b);
    }
    Ok(s)
}

/// Estimates of `C(F, t) = limsup_x F̄(x - t)/F̄(x)` for each `t`: the largest witness ratio
/// over the last `window` oracle indices up to `hi`.
pub fn shift_growth_oracle(
    o: &dyn KnotOracle,
    ts: &[f64],
    hi: u64,
    window: u64,
) -> DiagnosticSeries {
    let hi = hi.min(o.n_max());
    let lo = hi.saturating_sub(window.saturating_sub(1)).max(o.n_min());
    let mut s = DiagnosticSeries::new(SeriesKind::ShiftGrowth, DomainTag::KnotOracle);
    for t in sorted(ts).into_iter().filter(|&t| t > 0.0) {
        let v = (lo..=hi)
            .map(|n| o.shift_witness(n, t).ln_ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        s.push(t.ln(), v);
    }
    s
}

/// Numeric counterpart of [`shift_growth_oracle`]: the largest ratio over the grid `xs`.
pub fn shift_growth(t: &TailFunction, ts: &[f64], xs: &[f64]) -> Result<DiagnosticSeries> {
    let mut s = DiagnosticSeries::new(SeriesKind::ShiftGrowth, DomainTag::NumericGrid);
    for shift in sorted(ts).into_iter().filter(|&t| t > 0.0) {
        let r = ratio_series(t, shift, xs)?;
        s.push(shift.ln(), window_max(&r.points));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn exponential_is_a_fixed_point() {
        let e = TailFunction::single(SegmentForm::log_affine(1.0, 1.0));
        let i = integrated_tail(&e).unwrap();
        for x in [0.0, 0.5, 3.0, 40.0] {
            assert!((i.log_eval_tail(x).unwrap() + x).abs() < 1e-13);
        }
    }

    #[test]
    fn uniform_integrates_to_square() {
        let u = TailFunction::from_parts(
            vec![0.0, 1.0],
            vec![SegmentForm::poly(vec![1.0, -1.0], 0.0), SegmentForm::zero()],
            1e300,
        )
        .unwrap();
        let i = integrated_tail(&u).unwrap();
        for x in [0.0, 0.25, 0.5, 0.9] {
            let want: f64 = (1.0 - x) * (1.0 - x);
            assert!((i.eval_tail(x).unwrap() - want).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn infinite_mean_is_divergence() {
        let b = catalog::build_default("ex32_base").unwrap();
        assert!(matches!(integrated_tail(&b.tail), Err(Error::Divergence(_))));
    }

    #[test]
    fn ex41_itail_matches_closed_form() {
        let e = catalog::make_ex41().unwrap();
        let i = integrated_tail(&e.f).unwrap();
        for n in 2..=10 {
            let x = 2f64.powi(n);
            let want = ((n - n * n) as f64 / 2.0) * LN_2;
            assert!((i.log_eval_tail(x).unwrap() - want).abs() < 1e-12, "n={n}");
        }
        assert!((i.eval_tail(7.0).unwrap() / i.eval_tail(8.0).unwrap() - 1.75).abs() < 1e-13);
    }

    #[test]
    fn halving_of_pareto_is_constant() {
        let p = catalog::reference("pareto", 1.0, 2.0).unwrap();
        let s = halving_series(&p, &[4.0, 10.0, 1e5]).unwrap();
        for pt in &s.points {
            assert!((pt.ln_value.exp() - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_has_fixed_columns() {
        let p = catalog::reference("pareto", 1.0, 2.0).unwrap();
        let s = halving_series(&p, &[4.0]).unwrap();
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), SERIES_CSV_HEADER);
        assert_eq!(lines.next().unwrap().split(',').count(), 6);
    }
}
