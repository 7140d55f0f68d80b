//! Invariants of tails, catalog constructions and transforms.

use std::sync::OnceLock;

use bigjump::catalog::{build, build_default, Entry, Params, NAMES};
use bigjump::cli::parse_grid;
use bigjump::tailfn::TailFunction;
use bigjump::transform::{integrated_tail, power_tail, ratio_series};
use proptest::prelude::*;

fn entries() -> &'static [Entry] {
    static E: OnceLock<Vec<Entry>> = OnceLock::new();
    E.get_or_init(|| NAMES.iter().map(|n| build_default(n).unwrap()).collect())
}

/// A position at tail level `u` in `[1e-12, 1)`, so atoms and deep tails are both hit.
fn at_level(t: &TailFunction, log10_u: f64) -> f64 {
    t.quantile(10f64.powf(log10_u)).unwrap().min(0.5 * t.x_cap())
}

fn level() -> impl Strategy<Value = f64> {
    -12.0f64..-1e-9
}

fn entry() -> impl Strategy<Value = usize> {
    0..NAMES.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tail_is_a_nonincreasing_probability(i in entry(), u in level(), v in level(), jitter in 0.0f64..2.0) {
        let t = &entries()[i].tail;
        let (a, b) = (at_level(t, u) * jitter.max(0.5), at_level(t, v));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (fl, fh) = (t.eval_tail(lo).unwrap(), t.eval_tail(hi).unwrap());
        prop_assert!((0.0..=1.0).contains(&fl) && (0.0..=1.0).contains(&fh));
        prop_assert!(fh <= fl, "{} at {lo} -> {fl}, {hi} -> {fh}", NAMES[i]);
    }

    #[test]
    fn log_eval_matches_eval(i in entry(), u in level()) {
        let t = &entries()[i].tail;
        let x = at_level(t, u);
        let v = t.eval_tail(x).unwrap();
        if v > 1e-300 {
            let w = t.log_eval_tail(x).unwrap().exp();
            prop_assert!((w / v - 1.0).abs() <= 1e-12, "{} at {x}: {w} vs {v}", NAMES[i]);
        }
    }

    #[test]
    fn zeroth_moment_is_the_tail_difference(i in entry(), u in level(), v in level()) {
        let t = &entries()[i].tail;
        let (a, b) = (at_level(t, u.max(v)), at_level(t, u.min(v)));
        prop_assume!(a > 0.0 && b > a);
        let m = t.truncated_moment(0, a, b).unwrap();
        let want = t.eval_tail(a).unwrap() - t.eval_tail(b).unwrap();
        prop_assert!((m - want).abs() <= 1e-10, "{} on ({a}, {b}]: {m} vs {want}", NAMES[i]);
    }

    #[test]
    fn quantile_is_the_generalized_inverse(i in entry(), u in level()) {
        let t = &entries()[i].tail;
        let p = 10f64.powf(u);
        let x = t.quantile(p).unwrap();
        prop_assert!(t.eval_tail(x).unwrap() <= p * (1.0 + 1e-12));
        // no representable point below x is already at or under the level
        if x > 0.0 {
            let below = t.log_left_limit(x).unwrap().exp().max(t.eval_tail(x.next_down()).unwrap());
            prop_assert!(below >= p * (1.0 - 1e-12), "{}: F̄ just below {x} is {below} < {p}", NAMES[i]);
        }
    }

    #[test]
    fn power_tail_multiplies_logs(i in entry(), u in level(), m in 1u32..5) {
        let t = &entries()[i].tail;
        let p = power_tail(t, m).unwrap();
        let x = at_level(t, u);
        let (a, b) = (p.log_eval_tail(x).unwrap(), t.log_eval_tail(x).unwrap());
        if m == 1 {
            prop_assert_eq!(a, b);
        } else {
            prop_assert!((a - m as f64 * b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {m} * {b}");
        }
    }

    #[test]
    fn shift_ratios_are_at_least_one(i in entry(), shift in 0.01f64..10.0, u in level()) {
        let t = &entries()[i].tail;
        let x = at_level(t, u);
        let xs: Vec<f64> = (0..20).map(|k| shift + x * (1.0 + k as f64 / 19.0)).filter(|&y| y <= t.x_cap()).collect();
        let s = ratio_series(t, shift, &xs).unwrap();
        for p in &s.points {
            prop_assert!(p.ln_value >= 0.0 || p.ln_value.is_nan(), "{} ln ratio {} at ln x {}", NAMES[i], p.ln_value, p.ln_x);
        }
    }
}

#[test]
fn total_mass_is_one() {
    for e in entries() {
        let t = &e.tail;
        let cap = t.x_cap();
        let total = t.truncated_moment(0, 0.0, cap).unwrap() + t.eval_tail(cap).unwrap();
        assert!((total - 1.0).abs() <= 1e-9, "{}: {total}", e.name);
    }
}

#[test]
fn constructions_validate() {
    for e in entries() {
        assert!(e.tail.validate().is_empty(), "{}: {:?}", e.name, e.tail.validate());
    }
    let p = Params { alpha: Some(4.0), x1: Some(500.0), m: Some(3), ..Params::default() };
    assert!(build("ex33", &p).unwrap().tail.validate().is_empty());
}

#[test]
fn oracles_agree_with_the_tail_at_knots() {
    for e in entries() {
        let o = e.oracle.as_ref();
        for n in o.n_min()..=o.n_max().min(o.n_min() + 300) {
            let x = match parse_grid(&format!("knots:{n}:{n}"), Some(&e.tail), Some(o)) {
                Ok(v) => v[0],
                Err(_) => break,
            };
            if x > e.tail.x_cap() {
                break;
            }
            let want = o.log_tail_at(n);
            if want < (1e-300f64).ln() {
                break;
            }
            let got = e.tail.log_eval_tail(x).unwrap();
            assert!((got - want).abs() <= 1e-9, "{} n = {n} at {x}: {got} vs {want}", e.name);
        }
    }
}

#[test]
fn flattening_stays_between_one_and_a_times_the_base() {
    for name in ["ex31", "ex32"] {
        let e = build_default(name).unwrap();
        let base = e.base.as_ref().unwrap();
        let a = e.params.a.unwrap_or(2.0);
        let hi = e.tail.x_cap().min(1e300).ln();
        for k in 0..10_000 {
            let x = ((hi * k as f64 / 9999.0).exp() - 1.0).min(e.tail.x_cap());
            let (f, f1) = (e.tail.log_eval_tail(x).unwrap(), base.log_eval_tail(x).unwrap());
            let slack = 1e-12 * f1.abs().max(1.0);
            assert!(f >= f1 - slack && f <= f1 + a.ln() + slack, "{name} at {x}: {f} vs {f1}");
        }
    }
}

/// Direct piecewise formula on the given knots `x_n`: affine from 1 at 0 to `x_1^-alpha`, then
/// affine from `x_n^-alpha` to `x_n^(-alpha-1)` on `[x_n, 2x_n)` and flat until `x_(n+1)`.
fn ex33_direct(alpha: f64, xs: &[f64], x: f64) -> f64 {
    let x1 = xs[0];
    if x < x1 {
        return 1.0 + x * (x1.powf(-alpha) - 1.0) / x1;
    }
    let n = xs.partition_point(|&k| k <= x) - 1;
    let xn = xs[n];
    let (top, low) = (xn.powf(-alpha), xn.powf(-alpha - 1.0));
    if x < 2.0 * xn {
        top + (x - xn) * (low - top) / xn
    } else {
        low
    }
}

#[test]
fn ex33_matches_the_direct_construction() {
    let e = build_default("ex33").unwrap();
    let p = Params { m: Some(2), ..Params::default() };
    let sq = build("ex33", &p).unwrap().tail;
    let (alpha, x1) = (5.5, 2050.0);
    // knots are 0, x_1, 2x_1, x_2, 2x_2, ...
    let ks = e.tail.knots();
    let xs: Vec<f64> = ks.iter().skip(1).step_by(2).copied().collect();
    assert_eq!(xs[0], x1);
    for (i, w) in xs.windows(2).enumerate() {
        assert_eq!(ks[2 * i + 2], 2.0 * w[0]);
        let want = (1.0 + 1.0 / alpha) * w[0].ln();
        assert!((w[1].ln() / want - 1.0).abs() <= 1e-14, "x_{} = {}", i + 2, w[1]);
    }
    for k in 0..5000 {
        let x = 1e20f64.powf(k as f64 / 4999.0) * (1.0 + 1e-7 * (k % 7) as f64);
        let want = ex33_direct(alpha, &xs, x);
        let got = e.tail.eval_tail(x).unwrap();
        assert!((got / want - 1.0).abs() <= 1e-12, "at {x}: {got} vs {want}");
        let got2 = sq.eval_tail(x).unwrap();
        assert!((got2 / (got * got) - 1.0).abs() <= 1e-12, "m = 2 at {x}");
    }
}

#[test]
fn integrated_tails_are_continuous_and_have_slope_minus_tail_over_mean() {
    for e in entries() {
        let Ok(mu) = e.tail.mean() else { continue };
        let it = integrated_tail(&e.tail).unwrap();
        assert_eq!(it.eval_tail(0.0).unwrap(), 1.0, "{}", e.name);
        let knots: Vec<f64> = it.knots().into_iter().filter(|&k| k <= 1e6).collect();
        for &k in &knots {
            assert!(it.atom_mass(k).unwrap() <= 1e-15, "{} atom at {k}", e.name);
        }
        let mut checked = 0;
        let segs = e.tail.segments();
        'outer: for round in 0..100 {
            for s in segs.iter() {
                if checked == 100 {
                    break 'outer;
                }
                let end = s.end.min(1e6).min(e.tail.quantile(1e-100).unwrap());
                if end <= s.start {
                    continue;
                }
                let w = end - s.start;
                let x = s.start + w * (0.1 + 0.8 * ((round * 37 % 100) as f64 / 100.0));
                let h = 1e-5 * w.min(x);
                let f = e.tail.eval_tail(x).unwrap();
                if f < 1e-200 {
                    continue;
                }
                let d = (it.eval_tail(x + h).unwrap() - it.eval_tail(x - h).unwrap()) / (2.0 * h);
                assert!((-d * mu / f - 1.0).abs() <= 1e-6, "{} at {x}: {} vs {}", e.name, -d, f / mu);
                checked += 1;
            }
        }
        assert!(checked > 0, "{}", e.name);
        let mut prev = 1.0;
        for i in 0..2000 {
            let v = it.eval_tail(1e6 * i as f64 / 1999.0).unwrap();
            assert!(v <= prev, "{} not nonincreasing", e.name);
            prev = v;
        }
    }
}
