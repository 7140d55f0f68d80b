//! Window rules shared by the class verdicts. All series carry log values.

use super::{Thresholds, Verdict};
use crate::transform::{
    nondecreasing, nonincreasing, window_max, window_min, DiagnosticSeries, DomainTag, SeriesPoint,
};

/// Slack for monotone-trend checks on log values.
const TREND_SLACK: f64 = 1e-9;
/// Slack for trends of deviations read off oracle ratios near the precision horizon.
const TREND_TOL: f64 = 1e-6;

/// `(previous, last)` windows, or `None` when the series is too short to judge.
pub(super) fn windows(s: &DiagnosticSeries, w: usize) -> Option<(&[SeriesPoint], &[SeriesPoint])> {
    let p = &s.points;
    match s.domain {
        DomainTag::KnotOracle => {
            (w > 0 && p.len() >= 2 * w).then(|| (&p[p.len() - 2 * w..p.len() - w], &p[p.len() - w..]))
        }
        DomainTag::NumericGrid => {
            if p.len() < 4 {
                return None;
            }
            let mid = 0.5 * (p[0].ln_x + p[p.len() - 1].ln_x);
            let cut = p.partition_point(|q| q.ln_x < mid).clamp(1, p.len() - 1);
            Some((&p[..cut], &p[cut..]))
        }
    }
}

fn final_value(s: &[SeriesPoint]) -> f64 {
    s.last().map_or(f64::NAN, |p| p.ln_value)
}

fn short(label: &str) -> (Verdict, String) {
    (Verdict::Inconclusive, format!("{label}: series too short for the window rule"))
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(super) enum ScanMode {
    /// `limsup e^(λx) F̄ = ∞` for every λ (class K, per-period maxima).
    Some,
    /// `lim e^(λx) F̄ = ∞` for every λ (class K*, per-period minima).
    Every,
}

/// λ-scans: supported when the scan at the smallest λ is positive and rising; refuted when
/// some λ gives a negative scan that no longer rises.
pub(super) fn scan_rule(
    scans: &[(f64, DiagnosticSeries)],
    lam_min: f64,
    w: usize,
    mode: ScanMode,
) -> (Verdict, String) {
    let what = match mode {
        ScanMode::Some => "per-period max of λx + ln F̄",
        ScanMode::Every => "per-period min of λx + ln F̄",
    };
    for (l, s) in scans {
        let Some((_, last)) = windows(s, w) else {
            continue;
        };
        if final_value(last) < 0.0 && nonincreasing(last, TREND_SLACK) {
            return (
                Verdict::Refuted,
                format!("{what} at λ = {l} is negative and not increasing"),
            );
        }
    }
    let Some((_, s)) = scans.iter().find(|(l, _)| *l == lam_min) else {
        return (Verdict::Inconclusive, "no λ-scan".into());
    };
    let Some((_, last)) = windows(s, w) else {
        return short(what);
    };
    if final_value(last) > 0.0 && nondecreasing(last, TREND_SLACK) {
        (
            Verdict::Supported,
            format!("{what} at λ = {lam_min} is positive and increasing"),
        )
    } else {
        (
            Verdict::Inconclusive,
            format!("{what} at λ = {lam_min} ends at {:.4e}", final_value(last)),
        )
    }
}

/// δ-scans of per-period minima of `δ ln x + ln F̄`.
pub(super) fn delta_rule(scans: &[(f64, DiagnosticSeries)], w: usize) -> (Verdict, String) {
    let mut all_falling = !scans.is_empty();
    for (d, s) in scans {
        let Some((_, last)) = windows(s, w) else {
            return short("δ-scan");
        };
        if final_value(last) > 0.0 && nondecreasing(last, TREND_SLACK) {
            return (
                Verdict::Supported,
                format!("min of δ ln x + ln F̄ at δ = {d} is positive and increasing"),
            );
        }
        all_falling &= final_value(last) < 0.0 && nonincreasing(last, TREND_SLACK);
    }
    if all_falling {
        (
            Verdict::Refuted,
            "min of δ ln x + ln F̄ is negative and decreasing for every δ in the grid".into(),
        )
    } else {
        (Verdict::Inconclusive, "no δ-scan is positive and increasing".into())
    }
}

fn dev_from(points: &[SeriesPoint], target: f64) -> f64 {
    points
        .iter()
        .map(|p| (p.ln_value.exp() - target).abs())
        .fold(0.0, f64::max)
}

/// Shift ratios → L.
pub(super) fn l_rule(shifts: &[DiagnosticSeries], th: &Thresholds) -> (Verdict, String) {
    let mut ok = !shifts.is_empty();
    let mut worst = 0.0f64;
    for s in shifts {
        let Some((prev, last)) = windows(s, th.window) else {
            return short("shift ratio");
        };
        // refutation needs the ratio to stay high over the whole last window
        if window_min(last) >= th.l_refute.ln() {
            return (
                Verdict::Refuted,
                format!(
                    "{} stays >= {} over the last window (min {:.4e})",
                    s.kind,
                    th.l_refute,
                    window_min(last).exp()
                ),
            );
        }
        let d = dev_from(last, 1.0);
        worst = worst.max(d);
        ok &= d < th.l_support && d <= dev_from(prev, 1.0) + TREND_TOL;
    }
    if ok {
        (
            Verdict::Supported,
            format!("max |ratio - 1| = {worst:.4e} < {} and not increasing", th.l_support),
        )
    } else {
        (
            Verdict::Inconclusive,
            format!("max |ratio - 1| over the last window = {worst:.4e}"),
        )
    }
}

/// Generic boundedness rule: refuted on persistent growth past the threshold, supported when
/// the last window's maximum stabilizes against the previous one. On knot subsequences any
/// growth of the window maximum counts as persistent; on numeric grids only growth beyond the
/// stabilization band does.
pub(super) fn growth_rule(s: &DiagnosticSeries, th: &Thresholds, what: &str) -> (Verdict, String) {
    let Some((prev, last)) = windows(s, th.window) else {
        return short(what);
    };
    let (mp, ml) = (window_max(prev), window_max(last));
    let stable = ml <= mp + th.stabilize.ln_1p();
    let growing = match s.domain {
        DomainTag::KnotOracle => ml > mp + TREND_TOL,
        DomainTag::NumericGrid => !stable,
    };
    if ml > th.growth_refute.ln() && growing {
        return (
            Verdict::Refuted,
            format!("{what} exceeds {} and keeps growing (max {:.4e})", th.growth_refute, ml.exp()),
        );
    }
    if stable {
        (
            Verdict::Supported,
            format!(
                "{what} maxima stabilize: {:.4e} after {:.4e}",
                ml.exp(),
                mp.exp()
            ),
        )
    } else {
        (
            Verdict::Inconclusive,
            format!("{what} max grows from {:.4e} to {:.4e}", mp.exp(), ml.exp()),
        )
    }
}

/// Shift ratios → OL: every shift must stabilize, any unbounded one refutes.
pub(super) fn ol_rule(shifts: &[DiagnosticSeries], th: &Thresholds) -> (Verdict, String) {
    let mut reasons = Vec::new();
    let mut all = !shifts.is_empty();
    for s in shifts {
        let r = growth_rule(s, th, &s.kind.to_string());
        if r.0 == Verdict::Refuted {
            return r;
        }
        all &= r.0 == Verdict::Supported;
        reasons.push(r.1);
    }
    (
        if all { Verdict::Supported } else { Verdict::Inconclusive },
        reasons.join("; "),
    )
}

/// Convolution ratio → S.
pub(super) fn s_rule(s: &DiagnosticSeries, th: &Thresholds, l_refuted: bool) -> (Verdict, String) {
    if l_refuted {
        return (Verdict::Refuted, "L refuted and S is contained in L".into());
    }
    let Some((prev, last)) = windows(s, th.window) else {
        return short("convolution ratio");
    };
    let (lo, hi) = th.s_band;
    let inside = |p: &SeriesPoint| {
        let r = p.ln_value.exp();
        r >= lo && r <= hi
    };
    if last.iter().all(|p| !inside(p)) {
        return (
            Verdict::Refuted,
            format!("convolution ratio stays outside [{lo}, {hi}] over the last window"),
        );
    }
    let (dp, dl) = (dev_from(prev, 2.0), dev_from(last, 2.0));
    if last.iter().all(inside) && dl <= dp + TREND_TOL {
        (
            Verdict::Supported,
            format!("convolution ratio within [{lo}, {hi}], max |ratio - 2| = {dl:.4e}"),
        )
    } else {
        (
            Verdict::Inconclusive,
            format!("max |ratio - 2| over the last window = {dl:.4e}"),
        )
    }
}
