//! Grid syntax: `lo:hi:count` (linear), `log:lo:hi:count`, `knots:i:j` (knots `i..=j`) or a
//! comma-separated list of values.
//!
//! `knots:i:j` counts in the entry's own knot sequence `x_n` when there is a knot oracle, and in
//! the materialized knot list of the tail otherwise.

use crate::catalog::KnotOracle;
use crate::error::{Error, Result};
use crate::tailfn::TailFunction;

fn num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

fn count(s: &str) -> Result<usize> {
    match s.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(Error::Parse(format!("grid count must be a positive integer, got `{s}`"))),
    }
}

/// Oracle knot `n`, snapped to the materialized knot it names when there is one.
fn oracle_knot(o: &dyn KnotOracle, tail: Option<&TailFunction>, n: u64) -> Result<f64> {
    if n < o.n_min() || n > o.n_max() {
        return Err(Error::Parse(format!(
            "knot index {n} outside {}..{} for {}",
            o.n_min(),
            o.n_max(),
            o.name()
        )));
    }
    let x = o.log_knot(n).exp();
    if let Some(t) = tail {
        let ks = t.knots();
        let i = ks.partition_point(|&k| k < x);
        for &k in ks[i.saturating_sub(1)..].iter().take(2) {
            if (k / x - 1.0).abs() <= 1e-9 {
                return Ok(k);
            }
        }
    }
    Ok(x)
}

/// Evaluate a grid spec; `knots:` grids need a tail or an oracle.
pub fn parse_grid(spec: &str, tail: Option<&TailFunction>, oracle: Option<&dyn KnotOracle>) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Parse(format!("grid `{spec}`: expected lo:hi:count, log:lo:hi:count or knots:i:j"));
    let xs = match parts.as_slice() {
        [one] => one.split(',').map(num).collect::<Result<Vec<_>>>()?,
        ["log", lo, hi, n] => {
            let (lo, hi, n) = (num(lo)?, num(hi)?, count(n)?);
            if !(lo > 0.0 && hi >= lo) {
                return Err(Error::Parse(format!("log grid needs 0 < lo <= hi, got {lo}:{hi}")));
            }
            if n == 1 {
                vec![lo]
            } else {
                (0..n)
                    .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
                    .collect()
            }
        }
        ["knots", i, j] => {
            let idx = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("knot index must be a nonnegative integer, got `{s}`")))
            };
            let (i, j) = (idx(i)?, idx(j)?);
            if i > j {
                return Err(Error::Parse(format!("empty knot range {i}..{j}")));
            }
            if let Some(o) = oracle {
                return (i as u64..=j as u64).map(|n| oracle_knot(o, tail, n)).collect();
            }
            let t = tail.ok_or_else(|| Error::Parse("knots: grid needs a distribution".into()))?;
            let knots = t.knots();
            if j >= knots.len() {
                return Err(Error::Parse(format!(
                    "knot range {i}..{j} outside the {} materialized knots",
                    knots.len()
                )));
            }
            knots[i..=j].to_vec()
        }
        [lo, hi, n] => {
            let (lo, hi, n) = (num(lo)?, num(hi)?, count(n)?);
            if !(hi >= lo) {
                return Err(Error::Parse(format!("grid needs lo <= hi, got {lo}:{hi}")));
            }
            if n == 1 {
                vec![lo]
            } else {
                (0..n)
                    .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                    .collect()
            }
        }
        _ => return Err(bad()),
    };
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parse(format!("grid `{spec}` has non-finite values")));
    }
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::build_default;

    #[test]
    fn linear_grid_counts_points() {
        let g = parse_grid("10:500:10", None, None).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!((g[0], g[9]), (10.0, 500.0));
    }

    #[test]
    fn log_grid_ends_exactly() {
        let g = parse_grid("log:1:1e6:7", None, None).unwrap();
        assert_eq!(g[0], 1.0);
        assert!((g[6] / 1e6 - 1.0).abs() < 1e-15);
        assert!((g[1] / 10.0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn knot_grid_follows_the_knot_sequence() {
        let e = build_default("ex41").unwrap();
        let o = Some(e.oracle.as_ref());
        // x_n = 2^n, exactly
        assert_eq!(parse_grid("knots:2:5", Some(&e.tail), o).unwrap(), vec![4.0, 8.0, 16.0, 32.0]);
        assert_eq!(parse_grid("knots:40:40", Some(&e.tail), o).unwrap(), vec![2f64.powi(40)]);
        assert!(parse_grid("knots:1:3", Some(&e.tail), o).is_err());
        // ex33 materializes 2 x_n between the x_n
        let e = build_default("ex33").unwrap();
        let ks = e.tail.knots();
        assert_eq!(parse_grid("knots:1:2", Some(&e.tail), Some(e.oracle.as_ref())).unwrap(), vec![ks[1], ks[3]]);
    }

    #[test]
    fn knot_grid_without_an_oracle_indexes_the_tail() {
        let t = build_default("ex41").unwrap().tail;
        assert_eq!(parse_grid("knots:2:4", Some(&t), None).unwrap(), vec![8.0, 16.0, 32.0]);
        assert!(parse_grid("knots:2:4", None, None).is_err());
        assert!(parse_grid("knots:4:2", Some(&t), None).is_err());
    }

    #[test]
    fn lists_and_errors() {
        assert_eq!(parse_grid("1,2.5,4", None, None).unwrap(), vec![1.0, 2.5, 4.0]);
        for bad in ["1:2", "a:b:c", "1:2:0", "log:0:1:3", "x", "1:2:3:4:5"] {
            assert!(matches!(parse_grid(bad, None, None), Err(Error::Parse(_))), "{bad}");
        }
    }
}
