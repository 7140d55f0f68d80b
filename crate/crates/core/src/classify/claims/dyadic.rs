//! Claims on the dyadic step tail and its integrated tail.

use std::f64::consts::LN_2;

use super::{bound_violations, expect_verdicts, max_log_err, Claim, Outcome, Run};
use crate::catalog::oracle::{Ex41ItailOracle, Ex41Oracle};
use crate::catalog::KnotOracle;
use crate::classify::{default_config, default_knot_hi, Class, Verdict};
use crate::convolution::{big_jump_profile, conv2_tail};
use crate::error::Result;
use crate::mc::mc_conv_tail;
use crate::transform::{fmt_num, integrated_tail};

pub(super) fn claims() -> Vec<Claim> {
    vec![
        Claim {
            id: "ex41.eval",
            location: "dyadic step tail: value on [4, 8)",
            check: eval,
        },
        Claim {
            id: "ex41.mu",
            location: "dyadic step tail: finite mean",
            check: mu,
        },
        Claim {
            id: "ex41.itail-closed-form",
            location: "dyadic step tail: integrated tail closed form on [0, 2^20]",
            check: itail_closed_form,
        },
        Claim {
            id: "ex41.itail-knots",
            location: "dyadic step tail: integrated tail at 2^n",
            check: itail_knots,
        },
        Claim {
            id: "ex41.itail-step",
            location: "dyadic step tail: integrated tail ratio over one period",
            check: itail_step,
        },
        Claim {
            id: "ex41.itail-ratio",
            location: "dyadic step tail: integrated tail unit shift at 2^(n+1)",
            check: itail_ratio,
        },
        Claim {
            id: "ex41.ol-refuted",
            location: "dyadic step tail: jump ratio at 2^n",
            check: ol_refuted,
        },
        Claim {
            id: "ex41.conv-mc",
            location: "dyadic step tail: two-fold convolution at x = 12",
            check: conv_mc,
        },
        Claim {
            id: "ex41.j-profile",
            location: "dyadic step tail: single big jump fails",
            check: j_profile,
        },
        Claim {
            id: "ex41.bound-terms",
            location: "dyadic step tail: B >= 1 - B1 - B2",
            check: bound_terms,
        },
        Claim {
            id: "ex41.classify",
            location: "dyadic step tail: class matrix",
            check: classify_f,
        },
        Claim {
            id: "ex41_itail.classify",
            location: "dyadic step tail, integrated: class matrix",
            check: classify_itail,
        },
    ]
}

fn eval(run: &Run) -> Result<Outcome> {
    let v = run.entry("ex41")?.tail.eval_tail(5.0)?;
    Ok(Outcome::new("0.09375 exactly", fmt_num(v), v == 0.09375))
}

fn mu(run: &Run) -> Result<Outcome> {
    let m = run.entry("ex41")?.tail.mean()?;
    Ok(Outcome::new("mu = 1 within 1e-12", fmt_num(m), (m - 1.0).abs() <= 1e-12))
}

fn itail_closed_form(run: &Run) -> Result<Outcome> {
    let numeric = integrated_tail(&run.entry("ex41")?.tail)?;
    let closed = &run.entry("ex41_itail")?.tail;
    let mut xs: Vec<f64> = (0..=4000).map(|i| i as f64 * 2f64.powi(20) / 4000.0).collect();
    for n in 0..=20 {
        let k = 2f64.powi(n);
        xs.extend([k - 0.5, k, k + 0.5, 1.5 * k]);
    }
    let mut pairs = Vec::with_capacity(xs.len());
    for x in xs.into_iter().filter(|x| (0.0..=2f64.powi(20)).contains(x)) {
        pairs.push((numeric.log_eval_tail(x)?, closed.log_eval_tail(x)?));
    }
    Ok(Outcome::at_most("max |Δ ln F̄ᴵ|", max_log_err(pairs), 1e-10))
}

fn itail_knots(run: &Run) -> Result<Outcome> {
    let numeric = integrated_tail(&run.entry("ex41")?.tail)?;
    let mut worst = 0.0f64;
    for n in 2..=10 {
        let nf = n as f64;
        let want = ((nf - nf * nf) / 2.0).exp2();
        let got = numeric.eval_tail(nf.exp2())?;
        worst = worst.max((got / want - 1.0).abs());
    }
    Ok(Outcome::new(
        "F̄ᴵ(2^n) = 2^((n - n^2)/2), n = 2..10, rel err <= 1e-12",
        fmt_num(worst),
        worst <= 1e-12,
    ))
}

fn itail_step(run: &Run) -> Result<Outcome> {
    let numeric = integrated_tail(&run.entry("ex41")?.tail)?;
    let mut worst = 0.0f64;
    for n in 2..=10 {
        let nf = n as f64;
        let r = numeric.eval_tail((nf + 1.0).exp2())? / numeric.eval_tail(nf.exp2())?;
        worst = worst.max((r / (-nf).exp2() - 1.0).abs());
    }
    // oracle: the level exponents (n - n^2)/2 differ by exactly -n; the named ratio must agree
    let o = Ex41ItailOracle;
    let mut exact = true;
    let mut oracle_worst = 0.0f64;
    for n in 2..=1_000_000i64 {
        let e = |k: i64| (k - k * k) / 2;
        exact &= e(n + 1) - e(n) == -n;
        let want = -(n as f64) * LN_2;
        let named = o.named_ratio("step", n as u64).unwrap_or(f64::NAN);
        oracle_worst = oracle_worst.max((named / want - 1.0).abs());
    }
    let oracle_worst = if exact { oracle_worst } else { f64::INFINITY };
    Ok(Outcome::new(
        "F̄ᴵ(2^(n+1))/F̄ᴵ(2^n) = 2^-n: numeric n <= 10 rel err <= 1e-12; oracle n <= 1e6 log rel err <= 1e-12",
        format!("numeric {}; oracle {}", fmt_num(worst), fmt_num(oracle_worst)),
        worst <= 1e-12 && oracle_worst <= 1e-12,
    ))
}

fn itail_ratio(run: &Run) -> Result<Outcome> {
    let numeric = integrated_tail(&run.entry("ex41")?.tail)?;
    let mut worst = 0.0f64;
    for n in 2..=10 {
        let nf = n as f64;
        let x = (nf + 1.0).exp2();
        let r = numeric.eval_tail(x - 1.0)? / numeric.eval_tail(x)?;
        worst = worst.max((r / (2.0 - (-nf).exp2()) - 1.0).abs());
    }
    let o = Ex41ItailOracle;
    let mut oracle_worst = 0.0f64;
    for n in 2..=60u64 {
        let r = o.named_ratio("shift1", n).unwrap_or(f64::NAN).exp();
        oracle_worst = oracle_worst.max((r / (2.0 - (-(n as f64)).exp2()) - 1.0).abs());
    }
    Ok(Outcome::new(
        "2 - 2^-n within 1e-12 (affine on [2^n, 2^(n+1)], limit 2)",
        format!("numeric {}; oracle {}", fmt_num(worst), fmt_num(oracle_worst)),
        worst <= 1e-12 && oracle_worst <= 1e-12,
    ))
}

fn ol_refuted(run: &Run) -> Result<Outcome> {
    let t = &run.entry("ex41")?.tail;
    let tol = 1.01f64.ln();
    let mut worst = 0.0f64;
    // 2^n - 1 is exact in f64 up to n = 53
    for n in 10..=53 {
        let x = 2f64.powi(n);
        let d = t.log_eval_tail(x - 1.0)? - t.log_eval_tail(x)? - n as f64 * LN_2;
        worst = worst.max(d.abs());
    }
    let o = Ex41Oracle;
    let mut oracle_worst = 0.0f64;
    let hi = default_knot_hi(&o);
    for n in 10..=hi {
        let d = o.named_ratio("jump", n).unwrap_or(f64::NAN) - n as f64 * LN_2;
        oracle_worst = oracle_worst.max(d.abs());
    }
    Ok(Outcome::new(
        format!("F̄(2^n - 1)/F̄(2^n) within 1% of 2^n: |Δ ln| <= {}", fmt_num(tol)),
        format!(
            "numeric n = 10..53: {}; oracle n = 10..{hi}: {}",
            fmt_num(worst),
            fmt_num(oracle_worst)
        ),
        worst <= tol && oracle_worst <= tol,
    ))
}

fn conv_mc(run: &Run) -> Result<Outcome> {
    let t = &run.entry("ex41")?.tail;
    let exact = conv2_tail(t, 12.0)?;
    let e = mc_conv_tail(t, 2, 12.0, run.opts.mc_trials, run.opts.seed)?;
    Ok(Outcome::new(
        format!("|exact - MC| <= 4 stderr, {} trials", run.opts.mc_trials),
        format!(
            "exact {}; MC {} +- {}",
            fmt_num(exact),
            fmt_num(e.mean),
            fmt_num(e.stderr)
        ),
        e.within(exact, 4.0),
    ))
}

fn j_profile(run: &Run) -> Result<Outcome> {
    let e = run.entry("ex41")?;
    let cfg = default_config(e);
    let rows = big_jump_profile(&e.tail, &cfg.x_grid, &cfg.k_grid)?;
    let least = rows.iter().map(|r| r.sup_complement).fold(f64::INFINITY, f64::min);
    let last = rows.last().map_or(f64::NAN, |r| r.sup_complement);
    Ok(Outcome::new(
        "1 - inf_x B(x, K) > 0.2 for every K in 10..500",
        format!("min over K {}; at K = 500 {}", fmt_num(least), fmt_num(last)),
        least > 0.2 && rows.len() == cfg.k_grid.len(),
    ))
}

fn bound_terms(run: &Run) -> Result<Outcome> {
    let e = run.entry("ex41")?;
    let cfg = default_config(e);
    let (bad, pairs) = bound_violations(&e.tail, &cfg.x_grid, &cfg.k_grid)?;
    Ok(Outcome::new(
        "0 violations",
        format!("{bad} of {pairs} pairs"),
        bad == 0 && pairs > 0,
    ))
}

fn classify_f(run: &Run) -> Result<Outcome> {
    Ok(expect_verdicts(
        run.report("ex41")?,
        &[
            (Class::OL, Verdict::Refuted),
            (Class::Kstar, Verdict::Supported),
            (Class::DK1, Verdict::Refuted),
            (Class::J, Verdict::Refuted),
        ],
    ))
}

fn classify_itail(run: &Run) -> Result<Outcome> {
    Ok(expect_verdicts(
        run.report("ex41_itail")?,
        &[
            (Class::J, Verdict::Supported),
            (Class::L, Verdict::Refuted),
            (Class::D, Verdict::Refuted),
            (Class::DK1, Verdict::Refuted),
        ],
    ))
}
