//! Classification determinism, J closure under weak equivalence and verdict hysteresis.

use bigjump::catalog::build_default;
use bigjump::classify::{classify, classify_entry, default_config, Class, ClassifyConfig, Subject, Verdict};

#[test]
fn classify_is_deterministic() {
    for name in ["ex41", "pareto", "ex31"] {
        let e = build_default(name).unwrap();
        let cfg = default_config(&e);
        let a = classify_entry(&e, &cfg).unwrap();
        let b = classify_entry(&e, &cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv(), "{name}");
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap(), "{name}");
    }
}

#[test]
fn j_is_shared_by_weakly_equivalent_tails() {
    for name in ["ex31", "ex32"] {
        let e = build_default(name).unwrap();
        let base = e.base.as_ref().unwrap();
        let cfg = ClassifyConfig { classes: vec![Class::J], ..default_config(&e) };
        let flat = classify_entry(&e, &cfg).unwrap().verdict(Class::J);
        let sub = Subject { name: "base", tail: Some(base), oracle: None };
        let orig = classify(sub, &cfg).unwrap().verdict(Class::J);
        assert_eq!(flat, orig, "{name}");
        assert_ne!(flat, Verdict::Inconclusive, "{name}");
    }
}

#[test]
fn enlarging_the_range_passes_through_inconclusive() {
    for name in ["ex41", "ex32", "goldie", "exponential"] {
        let e = build_default(name).unwrap();
        let full = default_config(&e);
        let n = full.x_grid.len();
        let mut prev: Option<Vec<Verdict>> = None;
        for keep in [n / 4, n / 2, 3 * n / 4, n] {
            let cfg = ClassifyConfig { x_grid: full.x_grid[..keep].to_vec(), ..full.clone() };
            let r = classify_entry(&e, &cfg).unwrap();
            let now: Vec<Verdict> = Class::ALL.iter().map(|&c| r.verdict(c)).collect();
            if let Some(p) = &prev {
                for (c, (a, b)) in Class::ALL.iter().zip(p.iter().zip(&now)) {
                    let flip = matches!(
                        (a, b),
                        (Verdict::Supported, Verdict::Refuted) | (Verdict::Refuted, Verdict::Supported)
                    );
                    assert!(!flip, "{name} {c}: {a} -> {b} at {keep} of {n} points");
                }
            }
            prev = Some(now);
        }
    }
}
