//! Claims on the staircase, flattened and knot-sequence constructions.

use std::f64::consts::LN_2;

use super::{bound_violations, expect_verdicts, Claim, Outcome, Run};
use crate::catalog::oracle::Ex31Oracle;
use crate::catalog::{make_ex32, Entry, KnotOracle, NAMES};
use crate::classify::{
    classify, default_config, default_knot_hi, log_points, shift_growth_estimate, shift_probe,
    unbounded_in_t, weak_equiv_verdict, Class, ClassifyConfig, Subject, Thresholds, Verdict,
};
use crate::convolution::big_jump_profile;
use crate::error::{Error, Result};
use crate::logmath::log_rel_diff;
use crate::transform::{fmt_num, integrated_tail};

pub(super) fn claims() -> Vec<Claim> {
    let c = |id, location, check| Claim { id, location, check };
    vec![
        c("goldie.jump", "staircase tail: jump ratio at the knots", goldie_jump),
        c("goldie.classify", "staircase tail: class matrix", goldie_classify),
        c("ex31.l-witness", "flattened e^-sqrt(x): unit shift at y_n", ex31_witness),
        c("ex31.classify", "flattened e^-sqrt(x): class matrix", ex31_classify),
        c("ex31.j-closure", "flattened e^-sqrt(x): J shared with the base", ex31_closure),
        c("ex32.yn-identity", "power interpolation: flattening points", ex32_yn),
        c("ex32.continuity", "power interpolation: continuity at the knots", ex32_continuity),
        c("ex32.halving", "power interpolation: halving ratio at x_(n+1)", ex32_halving),
        c("ex32_base.infinite-mean", "power interpolation: infinite mean", ex32_mean),
        c("ex32.classify", "power interpolation, flattened: class matrix", ex32_classify),
        c("ex32.j-closure", "power interpolation: J shared with the base", ex32_closure),
        c("ex33.drop", "knot sequence tail: drop over [x_n, 2x_n]", ex33_drop),
        c("ex33.shift1", "knot sequence tail: unit shift at 2x_n", ex33_shift1),
        c("ex33.sandwich", "knot sequence tail: power sandwich", ex33_sandwich),
        c("ex33.c-of-t", "knot sequence tail: C(F, t) at 2x_n", ex33_c_of_t),
        c("ex33.weak-equiv", "knot sequence tail: no long-tailed weak equivalent", ex33_weak),
        c("ex33.j-profile", "knot sequence tail: single big jump holds", ex33_profile),
        c("ex33.bound-terms", "knot sequence tail: B >= 1 - B1 - B2", ex33_bounds),
        c("ex33.classify", "knot sequence tail: class matrix", ex33_classify),
    ]
}

fn goldie_jump(run: &Run) -> Result<Outcome> {
    let e = run.entry("goldie")?;
    let o = e.oracle.as_ref();
    let mut worst = 0.0f64;
    let mut n = o.n_min();
    let mut checked = 0;
    while o.log_knot(n) < 1e15f64.ln() {
        let x = o.log_knot(n).exp().round();
        let got = e.tail.log_eval_tail(x - 1.0)? - e.tail.log_eval_tail(x)?;
        let nf = n as f64;
        // n^-n (n+1)^(n+1), independently of the oracle's levels
        let want = (nf + 1.0) * (nf + 1.0).ln() - nf * nf.ln();
        let named = o.named_ratio("jump", n).unwrap_or(f64::NAN);
        worst = worst.max(log_rel_diff(got, want)).max(log_rel_diff(named, want));
        n += 1;
        checked += 1;
    }
    Ok(Outcome::new(
        "F̄(x_n - 1)/F̄(x_n) = n^-n (n+1)^(n+1), log rel err <= 1e-12",
        format!("{} over {checked} knots", fmt_num(worst)),
        worst <= 1e-12 && checked >= 5,
    ))
}

fn goldie_classify(run: &Run) -> Result<Outcome> {
    Ok(expect_verdicts(
        run.report("goldie")?,
        &[(Class::DK1, Verdict::Supported), (Class::OL, Verdict::Refuted)],
    ))
}

fn j_s_l_d(run: &Run, name: &str) -> Result<Outcome> {
    Ok(expect_verdicts(
        run.report(name)?,
        &[
            (Class::J, Verdict::Supported),
            (Class::L, Verdict::Refuted),
            (Class::D, Verdict::Refuted),
        ],
    ))
}

fn ex31_witness(run: &Run) -> Result<Outcome> {
    let e = run.entry("ex31")?;
    let a = e.params.a.unwrap_or(2.0);
    let o = Ex31Oracle { a };
    let knots = e.tail.knots();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for n in o.n_min()..=default_knot_hi(&o) {
        let (x, y) = (o.log_knot(n).exp(), o.log_y(n).exp());
        // y - 1 must stay exact in f64
        if y > 2f64.powi(52) {
            break;
        }
        if y - x < 1.0 {
            continue;
        }
        // the materialized flattening point, which carries its own rounding
        let Some(&k) = knots.iter().find(|&&k| (k / y - 1.0).abs() < 1e-9) else {
            break;
        };
        let ln_at = e.tail.log_eval_tail(k)?;
        let d = e.tail.log_eval_tail(k - 1.0)? - ln_at - a.ln();
        // log values of size |ln F̄| keep about 1e-16 |ln F̄| absolute precision
        worst = worst.max(d.abs() / ln_at.abs().max(1.0));
        checked += 1;
    }
    let mut oracle_worst = 0.0f64;
    for n in o.n_min()..=default_knot_hi(&o) {
        if o.log_y(n).exp() - o.log_knot(n).exp() >= 1.0 {
            let r = o.named_ratio("jump_at_y", n).unwrap_or(f64::NAN).exp();
            oracle_worst = oracle_worst.max((r / a - 1.0).abs());
        }
    }
    Ok(Outcome::new(
        format!("F̄(y_n - 1)/F̄(y_n) = a = {a}: |Δ ln| / |ln F̄(y_n)| <= 1e-12; oracle rel err <= 1e-9"),
        format!(
            "numeric {} over {checked} knots; oracle {}",
            fmt_num(worst),
            fmt_num(oracle_worst)
        ),
        worst <= 1e-12 && oracle_worst <= 1e-9 && checked > 0,
    ))
}

fn ex31_classify(run: &Run) -> Result<Outcome> {
    j_s_l_d(run, "ex31")
}

/// The flattened entry's default J verdict against the base classified on the same grids.
fn closure(run: &Run, name: &str, base_name: &str) -> Result<Outcome> {
    let e = run.entry(name)?;
    let base = match base_name {
        "" => e
            .base
            .clone()
            .ok_or_else(|| Error::Domain(format!("{name} has no base")))?,
        b => run.entry(b)?.tail.clone(),
    };
    let cfg = j_config(e);
    let flat = classify(
        Subject {
            name,
            tail: Some(&e.tail),
            oracle: None,
        },
        &cfg,
    )?;
    let b = classify(
        Subject {
            name: "base",
            tail: Some(&base),
            oracle: None,
        },
        &cfg,
    )?;
    let (vf, vb) = (flat.verdict(Class::J), b.verdict(Class::J));
    Ok(Outcome::new(
        "J(flattened) = J(base), both supported",
        format!("flattened {vf}; base {vb}"),
        vf == vb && vf == Verdict::Supported,
    ))
}

/// Default grids restricted to the J verdict.
fn j_config(e: &Entry) -> ClassifyConfig {
    ClassifyConfig {
        classes: vec![Class::J],
        ..default_config(e)
    }
}

fn ex31_closure(run: &Run) -> Result<Outcome> {
    closure(run, "ex31", "")
}

fn ex32_closure(run: &Run) -> Result<Outcome> {
    closure(run, "ex32", "ex32_base")
}

fn ex32_yn(run: &Run) -> Result<Outcome> {
    let p = &run.entry("ex32")?.params;
    let e = make_ex32(p.alpha.unwrap_or(0.5), p.beta.unwrap_or(0.75), p.x1.unwrap_or(100.0))?;
    let mut worst = 0.0f64;
    for &(x, y) in e.pairs.iter().take(8) {
        let lhs = (e.base.log_eval_tail(y)? + LN_2).exp();
        let rhs = e.base.eval_tail(x)?;
        worst = worst.max((lhs / rhs - 1.0).abs());
    }
    let n = e.pairs.len().min(8);
    Ok(Outcome::new(
        "2 F̄₁(y_n) = F̄₁(x_n) within 1e-12, n <= 8",
        format!("{} over n = 1..{n}", fmt_num(worst)),
        worst <= 1e-12 && n == 8,
    ))
}

fn ex32_continuity(run: &Run) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut knots = 0;
    let t = &run.entry("ex32_base")?.tail;
    for i in 1..t.segments().len() {
        let (l, r) = (t.ln_left_at_knot(i), t.ln_at_knot(i));
        if l == f64::NEG_INFINITY && r == f64::NEG_INFINITY {
            continue;
        }
        worst = worst.max(((l - r).exp() - 1.0).abs());
        knots += 1;
    }
    Ok(Outcome::new(
        "|F̄(k-)/F̄(k) - 1| <= 1e-12 at every knot",
        format!("{} over {knots} knots", fmt_num(worst)),
        worst <= 1e-12,
    ))
}

fn ex32_halving(run: &Run) -> Result<Outcome> {
    let e = run.entry("ex32_base")?;
    let o = e.oracle.as_ref();
    let (alpha, beta) = (e.params.alpha.unwrap_or(0.5), e.params.beta.unwrap_or(0.75));
    let top = e.tail.knots().last().copied().unwrap_or(0.0);
    let mut margin = f64::INFINITY;
    let mut checked = 0;
    for n in o.n_min()..=default_knot_hi(o) {
        let xn1 = o.log_knot(n + 1).exp();
        if xn1 > top {
            break;
        }
        let got = e.tail.log_eval_tail(0.5 * xn1)? - e.tail.log_eval_tail(xn1)?;
        let bound = ((beta - alpha) * o.log_knot(n)).exp().ln_1p() - LN_2;
        margin = margin.min((got - bound) / o.log_tail_at(n + 1).abs().max(1.0));
        checked += 1;
    }
    let mut oracle_margin = f64::INFINITY;
    for n in o.n_min()..=default_knot_hi(o) {
        let got = o.named_ratio("halving_at_next", n).unwrap_or(f64::NAN);
        let bound = o.named_ratio("halving_bound", n).unwrap_or(f64::NAN);
        oracle_margin = oracle_margin.min((got - bound) / o.log_tail_at(n + 1).abs().max(1.0));
    }
    Ok(Outcome::new(
        "ln F̄(x_(n+1)/2) - ln F̄(x_(n+1)) >= ln((1 + x_n^(beta-alpha))/2), margin relative to |ln F̄(x_(n+1))| >= -1e-12",
        format!(
            "numeric min {} over {checked} knots; oracle min {}",
            fmt_num(margin),
            fmt_num(oracle_margin)
        ),
        margin >= -1e-12 && oracle_margin >= -1e-12 && checked > 0,
    ))
}

fn ex32_mean(run: &Run) -> Result<Outcome> {
    let r = integrated_tail(&run.entry("ex32_base")?.tail);
    let got = match &r {
        Ok(_) => "integrated tail built".to_string(),
        Err(e) => e.to_string(),
    };
    let pass = matches!(&r, Err(Error::Divergence(m)) if m.contains("infinite mean"));
    Ok(Outcome::new("integrated tail rejected: infinite mean", got, pass))
}

fn ex32_classify(run: &Run) -> Result<Outcome> {
    j_s_l_d(run, "ex32")
}

/// Knots `x_1..x_8` of the default construction, from the tail's breakpoints `0, x_1, 2x_1, ...`.
fn ex33_knots(run: &Run) -> Result<Vec<f64>> {
    let k = run.entry("ex33")?.tail.knots();
    let xs: Vec<f64> = k.iter().skip(1).step_by(2).take(8).copied().collect();
    if xs.len() < 8 {
        return Err(Error::Domain("fewer than 8 knots materialized".into()));
    }
    Ok(xs)
}

fn ex33_drop(run: &Run) -> Result<Outcome> {
    let t = &run.entry("ex33")?.tail;
    let mut worst = 0.0f64;
    for x in ex33_knots(run)? {
        let r = t.log_eval_tail(2.0 * x)? - t.log_eval_tail(x)?;
        worst = worst.max(log_rel_diff(r.exp(), 1.0 / x));
    }
    Ok(Outcome::new("F̄(2x_n)/F̄(x_n) = 1/x_n, n <= 8, rel err <= 1e-12", fmt_num(worst), worst <= 1e-12))
}

fn ex33_shift1(run: &Run) -> Result<Outcome> {
    let t = &run.entry("ex33")?.tail;
    let mut worst = 0.0f64;
    for x in ex33_knots(run)? {
        let r = (t.log_eval_tail(2.0 * x - 1.0)? - t.log_eval_tail(2.0 * x)?).exp();
        worst = worst.max((r / (2.0 - 1.0 / x) - 1.0).abs());
    }
    Ok(Outcome::new(
        "F̄(2x_n - 1)/F̄(2x_n) = 2 - 1/x_n, n <= 8, rel err <= 1e-12",
        fmt_num(worst),
        worst <= 1e-12,
    ))
}

fn ex33_sandwich(run: &Run) -> Result<Outcome> {
    let e = run.entry("ex33")?;
    let alpha = e.params.alpha.unwrap_or(5.5);
    let x1 = e.params.x1.unwrap_or(2050.0);
    let xs = log_points(x1, 1e250f64.min(e.tail.x_cap()), 1000);
    let mut worst = f64::INFINITY;
    for &x in &xs {
        let v = e.tail.log_eval_tail(x)?;
        let lo = -(alpha + 1.0) * x.ln();
        let hi = alpha * LN_2 - alpha * x.ln();
        worst = worst.min(v - lo).min(hi - v);
    }
    Ok(Outcome::new(
        "x^(-alpha-1) <= F̄(x) <= 2^alpha x^-alpha at 1000 points x >= x_1 (min log margin >= -1e-12)",
        fmt_num(worst),
        worst >= -1e-12,
    ))
}

fn ex33_c_of_t(run: &Run) -> Result<Outcome> {
    let e = run.entry("ex33")?;
    let t = &e.tail;
    let mut worst = 0.0f64;
    for x in ex33_knots(run)?.into_iter().skip(1) {
        for s in shift_probe() {
            let r = (t.log_eval_tail(2.0 * x - s)? - t.log_eval_tail(2.0 * x)?).exp();
            worst = worst.max((r / (1.0 + s - s / x) - 1.0).abs());
        }
    }
    let th = Thresholds::default();
    let c = shift_growth_estimate(t, Some(e.oracle.as_ref()), &[], th.window)?;
    let grows = unbounded_in_t(&c, &th);
    let top = c.points.last().map_or(f64::NAN, |p| p.ln_value.exp());
    Ok(Outcome::new(
        "F̄(2x_n - t)/F̄(2x_n) = 1 + t - t/x_n (rel err <= 1e-9, t = 1..1024); C(F, t) unbounded in t",
        format!("{}; C(F, 1024) estimate {}", fmt_num(worst), fmt_num(top)),
        worst <= 1e-9 && grows,
    ))
}

fn ex33_weak(run: &Run) -> Result<Outcome> {
    let e = run.entry("ex33")?;
    let xs = default_config(e).x_grid;
    let th = Thresholds::default();
    let mut got = Vec::new();
    let mut all = true;
    for name in NAMES {
        if run.report(name)?.verdict(Class::L) != Verdict::Supported {
            continue;
        }
        let r = &run.entry(name)?.tail;
        let v = weak_equiv_verdict(&e.tail, Some(e.oracle.as_ref()), name, r, &xs, &th)?;
        all &= v.verdict == Verdict::Refuted;
        got.push(format!("{name}: {}", v.verdict));
    }
    Ok(Outcome::new(
        "refuted at explored scale against every long-tailed catalog entry",
        got.join("; "),
        all && !got.is_empty(),
    ))
}

/// `K = 10, 20, ..., 500` and the grid on `[x_2, x_4]`.
fn ex33_grids(run: &Run) -> Result<(Vec<f64>, Vec<f64>)> {
    let cfg = default_config(run.entry("ex33")?);
    let ks = (1..=50).map(|i| 10.0 * i as f64).collect();
    Ok((cfg.x_grid, ks))
}

fn ex33_profile(run: &Run) -> Result<Outcome> {
    let (xs, ks) = ex33_grids(run)?;
    let rows = big_jump_profile(&run.entry("ex33")?.tail, &xs, &ks)?;
    let c: Vec<f64> = rows.iter().map(|r| r.sup_complement).collect();
    let decreasing = c.windows(2).all(|w| w[1] <= w[0]);
    let last = c.last().copied().unwrap_or(f64::NAN);
    Ok(Outcome::new(
        "1 - inf_x B(x, K) decreasing in K = 10..500 and < 0.05 at K = 500",
        format!(
            "{}; at K = 10 {}; at K = 500 {}",
            if decreasing { "decreasing" } else { "not monotone" },
            fmt_num(c.first().copied().unwrap_or(f64::NAN)),
            fmt_num(last)
        ),
        decreasing && last < 0.05 && rows.len() == ks.len(),
    ))
}

fn ex33_bounds(run: &Run) -> Result<Outcome> {
    let (xs, ks) = ex33_grids(run)?;
    let (bad, pairs) = bound_violations(&run.entry("ex33")?.tail, &xs, &ks)?;
    Ok(Outcome::new("0 violations", format!("{bad} of {pairs} pairs"), bad == 0 && pairs > 0))
}

fn ex33_classify(run: &Run) -> Result<Outcome> {
    Ok(expect_verdicts(
        run.report("ex33")?,
        &[
            (Class::K, Verdict::Supported),
            (Class::Kstar, Verdict::Supported),
            (Class::DK1, Verdict::Supported),
            (Class::L, Verdict::Refuted),
            (Class::D, Verdict::Refuted),
            (Class::OL, Verdict::Supported),
            (Class::OS, Verdict::Supported),
            (Class::J, Verdict::Supported),
            (Class::S, Verdict::Refuted),
        ],
    ))
}
