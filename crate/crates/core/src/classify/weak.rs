//! Weak tail equivalence against reference tails, with the shift-growth obstruction: if
//! `C(F, t)` is unbounded in `t`, `F` is not weakly equivalent to any long-tailed tail.

use serde::Serialize;

use super::rules::windows;
use super::{classify, Class, ClassifyConfig, Subject, Thresholds, Verdict};
use crate::catalog::KnotOracle;
use crate::error::Result;
use crate::tailfn::TailFunction;
use crate::transform::{
    nondecreasing, shift_growth, shift_growth_oracle, weak_equiv_series, window_max, window_min,
    DiagnosticSeries,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakEquivVerdict {
    pub reference: String,
    pub verdict: Verdict,
    pub reason: String,
    pub scale: String,
}

/// Shifts `t = 1, 2, 4, ..., 1024` probed for `C(F, t)`.
pub fn shift_probe() -> Vec<f64> {
    (0..=10).map(|k| 2f64.powi(k)).collect()
}

/// `ln C(F, t)` over [`shift_probe`], from the oracle's last `window` periods when available.
pub fn shift_growth_estimate(
    t: &TailFunction,
    oracle: Option<&dyn KnotOracle>,
    xs: &[f64],
    window: usize,
) -> Result<DiagnosticSeries> {
    match oracle {
        Some(o) => Ok(shift_growth_oracle(o, &shift_probe(), super::default_knot_hi(o), window as u64)),
        None => shift_growth(t, &shift_probe(), xs),
    }
}

/// `C(F, t)` grows past the refutation threshold and never decreases in `t`.
pub fn unbounded_in_t(c: &DiagnosticSeries, th: &Thresholds) -> bool {
    !c.is_empty() && nondecreasing(&c.points, 1e-9) && window_max(&c.points) > th.growth_refute.ln()
}

/// Verdict on `F ≈ reference`. The obstruction refutes against long-tailed references; otherwise
/// the log ratio is judged directly: refuted when its range keeps widening past the growth
/// threshold, supported when both extremes stabilize.
pub fn weak_equiv_verdict(
    t: &TailFunction,
    oracle: Option<&dyn KnotOracle>,
    reference_name: &str,
    reference: &TailFunction,
    xs: &[f64],
    th: &Thresholds,
) -> Result<WeakEquivVerdict> {
    let scale = match (xs.first(), xs.last()) {
        (Some(a), Some(b)) => format!("x in [{a:.6e}, {b:.6e}]"),
        _ => String::new(),
    };
    let out = |verdict, reason: String| WeakEquivVerdict {
        reference: reference_name.to_string(),
        verdict,
        reason,
        scale: scale.clone(),
    };
    let c = shift_growth_estimate(t, oracle, xs, th.window)?;
    let l_cfg = ClassifyConfig {
        x_grid: xs.to_vec(),
        classes: vec![Class::L],
        thresholds: th.clone(),
        ..ClassifyConfig::default()
    };
    let reference_l = classify(
        Subject {
            name: reference_name,
            tail: Some(reference),
            oracle: None,
        },
        &l_cfg,
    )?
    .verdict(Class::L);
    if unbounded_in_t(&c, th) && reference_l == Verdict::Supported {
        let last = c.points[c.len() - 1];
        return Ok(out(
            Verdict::Refuted,
            format!(
                "C(F, t) reaches {:.4e} at t = {} and keeps growing in t; {reference_name} is long-tailed",
                last.ln_value.exp(),
                last.ln_x.exp()
            ),
        ));
    }
    let s = weak_equiv_series(t, reference, xs)?;
    let Some((prev, last)) = windows(&s, th.window) else {
        return Ok(out(Verdict::Inconclusive, "log ratio series too short".into()));
    };
    let spread = |p: &[crate::transform::SeriesPoint]| window_max(p) - window_min(p);
    let band = th.growth_refute.ln();
    let slack = th.stabilize.ln_1p();
    if spread(last) > band && spread(last) > spread(prev) + slack {
        return Ok(out(
            Verdict::Refuted,
            format!("ln ratio spread grows to {:.4e} over the upper range", spread(last)),
        ));
    }
    let (mp, ml) = (window_max(prev), window_max(last));
    let (np, nl) = (window_min(prev), window_min(last));
    if ml.is_finite() && nl.is_finite() && ml <= mp + slack && nl >= np - slack {
        Ok(out(
            Verdict::Supported,
            format!("ratio stays within [{:.4e}, {:.4e}]", nl.exp(), ml.exp()),
        ))
    } else {
        Ok(out(
            Verdict::Inconclusive,
            format!("ratio ranges over [{:.4e}, {:.4e}] in the upper range", nl.exp(), ml.exp()),
        ))
    }
}
