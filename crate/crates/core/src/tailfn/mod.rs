//! Piecewise-analytic survival functions with atoms.
//!
//! A [`TailFunction`] is a right-continuous, nonincreasing `F̄` on `[0, ∞)` given by one
//! [`SegmentForm`] per knot interval. Atoms are the downward jumps at knots and are never
//! stored separately. All knots are materialized at construction, so a value is immutable
//! and safe to share across threads.
//!
//! Probabilities returned as plain reals underflow to zero; the `ln_*` accessors stay exact.

mod form;

pub use form::{Decay, SegmentForm};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logmath::{ln0, log_sub_exp, log_sum_exp};

/// Default largest position at which a tail may be evaluated.
pub const DEFAULT_X_CAP: f64 = 1e300;

/// One knot interval `[start, end)`; the last segment has `end = ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub form: SegmentForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailFunction {
    segments: Vec<Segment>,
    x_cap: f64,
    /// `ln F̄(t_i)`
    ln_at_knot: Vec<f64>,
    /// `ln F̄(t_i-)`, with `F̄(0-) = 1`
    ln_left_at_knot: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Monotonicity,
    Bounds,
    NegativeAtom,
    NonVanishing,
    NotANumber,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub x: f64,
    pub detail: String,
}

const LOG_SLACK: f64 = 1e-12;

impl TailFunction {
    /// Build from knots `t_0 = 0 < t_1 < …` and one form per interval. Monotonicity is not
    /// checked here; see [`TailFunction::checked`] and [`TailFunction::validate`].
    pub fn from_parts(knots: Vec<f64>, forms: Vec<SegmentForm>, x_cap: f64) -> Result<Self> {
        if knots.is_empty() || knots.len() != forms.len() {
            return Err(Error::Construction(format!(
                "need one form per knot; got {} knots and {} forms",
                knots.len(),
                forms.len()
            )));
        }
        if knots[0] != 0.0 {
            return Err(Error::Construction(format!(
                "first knot must be 0, got {}",
                knots[0]
            )));
        }
        for w in knots.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::Construction(format!(
                    "knots must be finite and strictly increasing (zero-length segment at {} .. {})",
                    w[0], w[1]
                )));
            }
        }
        if !(x_cap > 0.0) {
            return Err(Error::Construction(format!("x_cap must be positive, got {x_cap}")));
        }
        let n = knots.len();
        let segments: Vec<Segment> = forms
            .into_iter()
            .enumerate()
            .map(|(i, form)| Segment {
                start: knots[i],
                end: if i + 1 < n { knots[i + 1] } else { f64::INFINITY },
                form,
            })
            .collect();
        let ln_at_knot: Vec<f64> = segments.iter().map(|s| s.form.ln_value(s.start)).collect();
        let mut ln_left_at_knot = Vec::with_capacity(n);
        ln_left_at_knot.push(0.0);
        for i in 1..n {
            ln_left_at_knot.push(segments[i - 1].form.ln_value(segments[i].start));
        }
        Ok(Self {
            segments,
            x_cap,
            ln_at_knot,
            ln_left_at_knot,
        })
    }

    /// [`TailFunction::from_parts`] followed by [`TailFunction::validate`]; any violation is a
    /// construction error.
    pub fn checked(knots: Vec<f64>, forms: Vec<SegmentForm>, x_cap: f64) -> Result<Self> {
        let t = Self::from_parts(knots, forms, x_cap)?;
        let v = t.validate();
        if let Some(first) = v.first() {
            return Err(Error::Construction(format!(
                "{} violation(s); first at x={}: {}",
                v.len(),
                first.x,
                first.detail
            )));
        }
        Ok(t)
    }

    /// Single-segment tail.
    pub fn single(form: SegmentForm) -> Self {
        Self::from_parts(vec![0.0], vec![form], DEFAULT_X_CAP).expect("one knot at zero")
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn knots(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.start).collect()
    }

    pub fn x_cap(&self) -> f64 {
        self.x_cap
    }

    /// `ln F̄(t_i)` at the `i`-th knot.
    pub fn ln_at_knot(&self, i: usize) -> f64 {
        self.ln_at_knot[i]
    }

    /// `ln F̄(t_i-)` at the `i`-th knot.
    pub fn ln_left_at_knot(&self, i: usize) -> f64 {
        self.ln_left_at_knot[i]
    }

    /// Same segments with a new forms vector, e.g. for `F̄^m`.
    pub fn map_forms<G: Fn(&SegmentForm) -> SegmentForm>(&self, g: G) -> Self {
        let knots = self.knots();
        let forms = self.segments.iter().map(|s| g(&s.form)).collect();
        Self::from_parts(knots, forms, self.x_cap).expect("knots already valid")
    }

    /// Index of the segment containing `x` (right-continuous convention).
    pub fn locate(&self, x: f64) -> usize {
        self.segments.partition_point(|s| s.start <= x).saturating_sub(1)
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!("position must be a nonnegative real, got {x}")));
        }
        if x > self.x_cap {
            return Err(Error::Range { x, cap: self.x_cap });
        }
        Ok(())
    }

    /// `ln F̄(x)`.
    pub fn log_eval_tail(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.ln_unchecked(x))
    }

    pub(crate) fn ln_unchecked(&self, x: f64) -> f64 {
        let i = self.locate(x);
        if self.segments[i].start == x {
            self.ln_at_knot[i]
        } else {
            self.segments[i].form.ln_value(x)
        }
    }

    /// `F̄(x)`.
    pub fn eval_tail(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        match self.plain_level(self.locate(x)) {
            Some(c) => Ok(c),
            None => Ok(self.ln_unchecked(x).exp()),
        }
    }

    /// Exact level of segment `i` when it is a constant known in plain form.
    fn plain_level(&self, i: usize) -> Option<f64> {
        match self.segments[i].form {
            SegmentForm::Const { c, .. } => c,
            _ => None,
        }
    }

    /// `ln F̄(x-)`; `0` at the origin.
    pub fn log_left_limit(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.ln_left_unchecked(x))
    }

    pub(crate) fn ln_left_unchecked(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let i = self.locate(x);
        if self.segments[i].start == x {
            self.ln_left_at_knot[i]
        } else {
            self.segments[i].form.ln_value(x)
        }
    }

    /// `ln` of the probability mass at `x`.
    pub fn log_atom_mass(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(log_sub_exp(self.ln_left_unchecked(x), self.ln_unchecked(x)))
    }

    /// Mass at `x`: `F̄(x-) - F̄(x)`, and `1 - F̄(0)` at the origin.
    pub fn atom_mass(&self, x: f64) -> Result<f64> {
        let i = self.locate(x);
        if self.check_x(x).is_ok() && self.segments[i].start == x {
            let left = if x == 0.0 { Some(1.0) } else { i.checked_sub(1).and_then(|j| self.plain_level(j)) };
            if let (Some(l), Some(r)) = (left, self.plain_level(i)) {
                return Ok(l - r);
            }
        }
        Ok(self.log_atom_mass(x)?.exp())
    }

    /// `(position, ln mass)` of every atom at a knot inside `[lo, hi]`.
    pub fn atoms_in(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let first = self.segments.partition_point(|s| s.start < lo);
        self.segments[first..]
            .iter()
            .enumerate()
            .take_while(|(_, s)| s.start <= hi)
            .filter_map(|(j, s)| {
                let i = first + j;
                let m = log_sub_exp(self.ln_left_at_knot[i], self.ln_at_knot[i]);
                (m > f64::NEG_INFINITY).then_some((s.start, m))
            })
            .collect()
    }

    fn ln_end_of(&self, i: usize) -> f64 {
        if i + 1 < self.segments.len() {
            self.ln_left_at_knot[i + 1]
        } else {
            match self.segments[i].form.decay() {
                Decay::None => self.segments[i].form.ln_value(f64::MAX),
                _ => f64::NEG_INFINITY,
            }
        }
    }

    /// `inf { x >= 0 : F̄(x) <= u }`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile level must lie in (0,1), got {u}")));
        }
        Ok(self.quantile_ln(u.ln()))
    }

    pub(crate) fn quantile_ln(&self, ln_u: f64) -> f64 {
        let i = self.first_segment_reaching(ln_u);
        if i >= self.segments.len() {
            return f64::INFINITY;
        }
        let s = &self.segments[i];
        if self.ln_at_knot[i] <= ln_u {
            return s.start;
        }
        // the analytic inverse can land an ulp or two on either side of the level
        let mut x = s.form.inverse_ln(ln_u, s.start, s.end);
        for _ in 0..64 {
            if self.ln_unchecked(x) <= ln_u || x >= s.end {
                break;
            }
            x = x.next_up();
        }
        for _ in 0..64 {
            let below = x.next_down();
            if below <= s.start || self.ln_unchecked(below) > ln_u {
                break;
            }
            x = below;
        }
        x
    }

    fn first_segment_reaching(&self, ln_u: f64) -> usize {
        // predicate is monotone because F̄ is nonincreasing
        let n = self.segments.len();
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.ln_at_knot[mid] <= ln_u || self.ln_end_of(mid) < ln_u {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// Stieltjes moment `∫ y^k dF(y)` over `(a, b]`; when `a = 0` the atom at the origin is
    /// included, so `k = 0, a = 0, b = ∞` is the total mass. `b` may be `+inf`.
    pub fn truncated_moment(&self, k: u32, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || a < 0.0 || !(b > a) {
            return Err(Error::Domain(format!(
                "moment bounds need 0 <= A < B, got A={a}, B={b}"
            )));
        }
        let mut total = 0.0;
        let first = self.locate(a);
        for s in &self.segments[first..] {
            if s.start >= b {
                break;
            }
            let lo = s.start.max(a);
            let hi = s.end.min(b);
            total += s.form.moment(k, lo, hi)?;
        }
        let upper = if b.is_finite() { b } else { f64::MAX };
        for (pos, ln_m) in self.atoms_in(a, upper) {
            if pos > a || (a == 0.0 && pos == 0.0) {
                total += pos.powi(k as i32) * ln_m.exp();
            }
        }
        Ok(total)
    }

    /// `ln ∫_x^∞ F̄(y) dy`.
    pub fn ln_tail_integral(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!("position must be a nonnegative real, got {x}")));
        }
        let first = self.locate(x);
        let parts = self.segments[first..]
            .iter()
            .map(|s| s.form.ln_integral(s.start.max(x), s.end))
            .collect::<Result<Vec<f64>>>()?;
        Ok(log_sum_exp(&parts))
    }

    /// `∫_x^∞ F̄(y) dy`.
    pub fn tail_integral(&self, x: f64) -> Result<f64> {
        Ok(self.ln_tail_integral(x)?.exp())
    }

    /// `E[X] = ∫_0^∞ F̄`.
    pub fn mean(&self) -> Result<f64> {
        self.tail_integral(0.0)
    }

    /// Monotonicity, bounds and atom bookkeeping on a dense grid plus all knots.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.ln_at_knot[0] > LOG_SLACK {
            out.push(Violation {
                kind: ViolationKind::Bounds,
                x: 0.0,
                detail: format!("F̄(0) = {} exceeds 1", self.ln_at_knot[0].exp()),
            });
        }
        for (i, s) in self.segments.iter().enumerate() {
            if s.start > self.x_cap {
                break;
            }
            if i > 0
                && self.ln_left_at_knot[i] + LOG_SLACK * self.ln_at_knot[i].abs().max(1.0)
                    < self.ln_at_knot[i]
            {
                out.push(Violation {
                    kind: ViolationKind::NegativeAtom,
                    x: s.start,
                    detail: format!(
                        "F̄ jumps up at knot: left {} < right {}",
                        self.ln_left_at_knot[i].exp(),
                        self.ln_at_knot[i].exp()
                    ),
                });
            }
            let hi = s.end.min(self.x_cap);
            let mut prev = f64::INFINITY;
            for x in sample_points(s.start, hi, s.end.is_finite() && s.end <= self.x_cap) {
                let v = s.form.ln_value(x);
                if v.is_nan() {
                    out.push(Violation {
                        kind: ViolationKind::NotANumber,
                        x,
                        detail: format!("{} evaluates to NaN", s.form.label()),
                    });
                    break;
                }
                if v > LOG_SLACK {
                    out.push(Violation {
                        kind: ViolationKind::Bounds,
                        x,
                        detail: format!("{} exceeds 1 ({})", s.form.label(), v.exp()),
                    });
                    break;
                }
                if v > prev + LOG_SLACK * prev.abs().max(1.0) {
                    out.push(Violation {
                        kind: ViolationKind::Monotonicity,
                        x,
                        detail: format!("{} increases on [{}, {})", s.form.label(), s.start, s.end),
                    });
                    break;
                }
                prev = v;
            }
        }
        let last = &self.segments[self.segments.len() - 1];
        if last.form.decay() == Decay::None && last.form.ln_value(self.x_cap.max(last.start)) > f64::NEG_INFINITY {
            out.push(Violation {
                kind: ViolationKind::NonVanishing,
                x: self.x_cap,
                detail: format!("final form {} does not tend to 0", last.form.label()),
            });
        }
        out
    }
}

/// Linear plus geometric sample points on `[lo, hi]`; `open_right` excludes `hi`.
fn sample_points(lo: f64, hi: f64, open_right: bool) -> Vec<f64> {
    const N: usize = 24;
    let mut pts = Vec::with_capacity(2 * N + 1);
    for j in 0..=N {
        pts.push(lo + (hi - lo) * j as f64 / N as f64);
    }
    let base = lo.max(1e-300);
    if hi > 4.0 * base {
        let (la, lb) = (ln0(base), hi.ln());
        for j in 1..N {
            pts.push((la + (lb - la) * j as f64 / N as f64).exp());
        }
    }
    pts.retain(|&x| x >= lo && (x < hi || (!open_right && x <= hi)));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
