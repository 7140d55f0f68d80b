//! Convolution bounds, single-big-jump terms and Monte Carlo stream properties.

use std::sync::OnceLock;

use bigjump::catalog::{build_default, Entry, NAMES};
use bigjump::convolution::{big_jump_B, conv2_tail, conv2_tail_sym};
use bigjump::mc::{mc_conv_tail, CHUNK};
use proptest::prelude::*;

fn entries() -> &'static [Entry] {
    static E: OnceLock<Vec<Entry>> = OnceLock::new();
    E.get_or_init(|| NAMES.iter().map(|n| build_default(n).unwrap()).collect())
}

fn position(i: usize, log10_u: f64) -> f64 {
    let t = &entries()[i].tail;
    t.quantile(10f64.powf(log10_u)).unwrap().min(0.25 * t.x_cap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn two_fold_tail_is_bracketed(i in 0..NAMES.len(), u in -10.0f64..-0.05) {
        let t = &entries()[i].tail;
        let x = position(i, u);
        let c = conv2_tail(t, x).unwrap();
        let f = t.eval_tail(x).unwrap();
        let union = (2.0 * t.eval_tail(0.5 * x).unwrap()).min(1.0);
        let slack = 1e-12;
        prop_assert!(c >= f * (1.0 - slack), "{}: S2 tail {c} below F̄ {f} at {x}", NAMES[i]);
        prop_assert!(c <= union * (1.0 + slack), "{}: S2 tail {c} above union bound {union} at {x}", NAMES[i]);
        // the cross term of the formula is a nonnegative integral
        prop_assert!(c >= (2.0 * f - f * f) * (1.0 - slack), "{}: {c} < 2F̄ - F̄² at {x}", NAMES[i]);
        let s = conv2_tail_sym(t, x).unwrap();
        prop_assert!((s / c - 1.0).abs() <= 1e-9 || (c == 0.0 && s == 0.0));
    }

    #[test]
    fn big_jump_terms_are_consistent(i in 0..NAMES.len(), u in -10.0f64..-0.05, frac in 0.01f64..0.49) {
        let t = &entries()[i].tail;
        let x = position(i, u);
        prop_assume!(x > 0.0);
        let k = frac * x;
        let b = big_jump_B(t, x, k).unwrap();
        prop_assert!((0.0..=1.0).contains(&b.B), "B = {}", b.B);
        prop_assert!(b.B >= 1.0 - b.B1 - b.B2 - 1e-12, "{}: B {} < 1 - {} - {}", NAMES[i], b.B, b.B1, b.B2);
        prop_assert!((b.B + b.complement - 1.0).abs() <= 1e-9, "B {} + complement {}", b.B, b.complement);
    }
}

#[test]
fn substreams_pool_to_the_per_stream_variance() {
    let t = &build_default("exponential").unwrap().tail;
    // one run spans two chunks, so both the chunk streams and the root seeds are exercised
    let trials = CHUNK + 5_000;
    let reps = 400;
    let est: Vec<_> = (0..reps).map(|s| mc_conv_tail(t, 2, 2.0, trials, 7_000 + s).unwrap()).collect();
    let mean = est.iter().map(|e| e.mean).sum::<f64>() / reps as f64;
    let pooled = est.iter().map(|e| (e.mean - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let per_stream = est.iter().map(|e| e.stderr * e.stderr).sum::<f64>() / reps as f64;
    assert!((pooled / per_stream - 1.0).abs() <= 0.2, "pooled {pooled} vs per-stream {per_stream}");
    let exact = 3.0 * (-2f64).exp();
    assert!((mean - exact).abs() <= 4.0 * (per_stream / reps as f64).sqrt(), "{mean} vs {exact}");
}

#[test]
fn estimates_are_bit_exact_per_seed_and_differ_across_seeds() {
    let t = &build_default("pareto").unwrap().tail;
    let a = mc_conv_tail(t, 2, 10.0, 50_000, 1).unwrap();
    assert_eq!(a, mc_conv_tail(t, 2, 10.0, 50_000, 1).unwrap());
    assert_ne!(a.mean, mc_conv_tail(t, 2, 10.0, 50_000, 2).unwrap().mean);
}
